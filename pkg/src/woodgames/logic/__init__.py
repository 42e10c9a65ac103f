"""First-order formulas: syntax, text format, semantics and an
enumeration oracle for rank-k equivalence."""
from .formulas import (
    FALSE,
    TRUE,
    And,
    Atom,
    Eq,
    Exists,
    Forall,
    Formula,
    Not,
    Or,
    conj,
    disj,
    eq,
    exists,
    forall,
    free_variables,
    implies,
    neg,
    quantifier_rank,
    simplify,
)
from .oracle import OracleVerdict, rank_k_equivalent_oracle
from .semantics import EvaluationError, Evaluator, evaluate, holds_sentence, satisfying_set
from .sexpr import FormulaSyntaxError, parse_formula, to_sexpr

__all__ = [
    "FALSE", "TRUE", "And", "Atom", "Eq", "Exists", "Forall", "Formula", "Not", "Or",
    "conj", "disj", "eq", "exists", "forall", "free_variables", "implies", "neg",
    "quantifier_rank", "simplify", "OracleVerdict", "rank_k_equivalent_oracle",
    "EvaluationError", "Evaluator", "evaluate", "holds_sentence", "satisfying_set",
    "FormulaSyntaxError", "parse_formula", "to_sexpr",
]
