import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import SIG_R, chain, edgeless, homs, structures
from woodgames.logic import (
    FALSE,
    TRUE,
    And,
    Atom,
    Eq,
    EvaluationError,
    Evaluator,
    Exists,
    Forall,
    FormulaSyntaxError,
    Not,
    Or,
    conj,
    disj,
    evaluate,
    exists,
    neg,
    parse_formula,
    quantifier_rank,
    rank_k_equivalent_oracle,
    simplify,
    to_sexpr,
)
from woodgames.logic.oracle import DISTINGUISHED, EQUIVALENT, EXHAUSTED
from woodgames.oracles import classical_ef_equivalent
from woodgames.structures import Structure

VARS = ("x", "y", "z")


def formulas(positive=False, max_leaves=12):
    atoms = st.builds(lambda a, b: Atom("R", (a, b)), st.sampled_from(VARS), st.sampled_from(VARS))
    if not positive:
        atoms = atoms | st.builds(Eq, st.sampled_from(VARS), st.sampled_from(VARS)) | st.sampled_from([TRUE, FALSE])

    def extend(inner):
        parts = [
            st.builds(lambda xs: And(tuple(xs)), st.lists(inner, max_size=3)),
            st.builds(lambda xs: Or(tuple(xs)), st.lists(inner, max_size=3)),
            st.builds(Exists, st.sampled_from(VARS), inner),
        ]
        if not positive:
            parts += [st.builds(Not, inner), st.builds(Forall, st.sampled_from(VARS), inner)]
        return st.one_of(parts)

    return st.recursive(atoms, extend, max_leaves=max_leaves)


def assignments(m):
    for vals in itertools.product(range(m.size), repeat=len(VARS)):
        yield dict(zip(VARS, vals))


# --- evaluation ---------------------------------------------------------------


def test_truth_constants():
    assert evaluate(edgeless(0), TRUE)
    assert not evaluate(edgeless(3), FALSE)


def test_two_distinct_elements():
    phi = parse_formula("(exists x (exists y (not (= x y))))")
    assert not evaluate(edgeless(1), phi)
    assert evaluate(edgeless(2), phi)
    assert quantifier_rank(phi) == 2


def test_transitivity_on_chain():
    phi = parse_formula("(forall x (forall y (forall z (or (not (R x y)) (not (R y z)) (R x z)))))")
    assert evaluate(chain(3), phi)
    assert not evaluate(Structure(SIG_R, 3, {"R": [(0, 1), (1, 2)]}), phi)


def test_evaluation_errors():
    with pytest.raises(EvaluationError, match="unbound"):
        evaluate(chain(2), Atom("R", ("x", "y")), {"x": 0})
    with pytest.raises(EvaluationError, match="arity"):
        evaluate(chain(2), Atom("R", ("x",)), {"x": 0})


def test_quantifier_rank_examples():
    assert quantifier_rank(Atom("R", ("x", "y"))) == 0
    three = exists("x", exists("y", exists("z", Atom("R", ("x", "z")))))
    one = exists("x", Atom("R", ("x", "x")))
    assert quantifier_rank(conj(one, three)) == 3


@given(structures(max_size=3), formulas())
def test_vectorized_evaluator_agrees(m, phi):
    ev = Evaluator(m)
    for v in itertools.islice(assignments(m), 27):
        assert ev.holds(phi, v) == evaluate(m, phi, v)


@given(homs(max_size=3), formulas(positive=True, max_leaves=8))
def test_positive_existential_preserved(data, phi):
    m, n, f = data
    for v in assignments(m):
        if evaluate(m, phi, v):
            assert evaluate(n, phi, {x: f[a] for x, a in v.items()})


# --- simplification ----------------------------------------------------------------


def test_simplify_examples():
    phi = Atom("R", ("x", "y"))
    assert simplify(And((FALSE, phi))) == FALSE
    assert simplify(And((phi,))) == phi
    assert simplify(Not(Not(phi))) == phi
    assert conj(phi, neg(phi)) == FALSE
    assert disj(phi, neg(phi)) == TRUE


@given(formulas(), structures(max_size=3))
def test_simplify_preserves_meaning(phi, m):
    s = simplify(phi)
    assert quantifier_rank(s) <= quantifier_rank(phi)
    for v in itertools.islice(assignments(m), 27):
        assert evaluate(m, s, v) == evaluate(m, phi, v)


# --- text format --------------------------------------------------------------------


@given(formulas())
def test_sexpr_roundtrip(phi):
    text = to_sexpr(phi)
    assert parse_formula(text) == phi
    assert to_sexpr(parse_formula(text)) == text


def test_sexpr_sample():
    text = "(exists x (and (R x y) (not (= x y))))"
    assert to_sexpr(parse_formula(text)) == text
    assert to_sexpr(TRUE) == "⊤" and to_sexpr(FALSE) == "⊥"


@pytest.mark.parametrize("text", ["", "(and", ")", "(exists (R x y))", "(R x y) (R y x)", "x"])
def test_sexpr_errors(text):
    with pytest.raises(FormulaSyntaxError):
        parse_formula(text)


# --- oracle -----------------------------------------------------------------------------


def test_oracle_identical_structures():
    m = chain(3)
    assert rank_k_equivalent_oracle(m, m, 3).status == EQUIVALENT


def test_oracle_counts_elements():
    v = rank_k_equivalent_oracle(edgeless(1), edgeless(2), 2)
    assert v.status == DISTINGUISHED and v.true_in == "N"
    assert to_sexpr(v.witness) == "(exists x1 (exists x2 (not (= x1 x2))))"


def test_oracle_linear_orders():
    assert rank_k_equivalent_oracle(chain(3), chain(4), 2).status == EQUIVALENT
    v = rank_k_equivalent_oracle(chain(3), chain(4), 3)
    assert v.status == DISTINGUISHED
    assert quantifier_rank(v.witness) <= 3
    assert evaluate(chain(3), v.witness) != evaluate(chain(4), v.witness)


def test_oracle_budget_exhaustion_is_reported():
    v = rank_k_equivalent_oracle(chain(3), chain(4), 3, budget=10)
    assert v.status == EXHAUSTED and v.witness is None


def test_oracle_without_equality_cannot_count():
    v = rank_k_equivalent_oracle(edgeless(1), edgeless(2), 3, equality=False)
    assert v.status == EQUIVALENT


@given(structures(max_size=3), structures(max_size=3), st.integers(1, 2), st.booleans())
def test_oracle_matches_classical_ef(m, n, k, equality):
    v = rank_k_equivalent_oracle(m, n, k, equality=equality)
    assert v.status != EXHAUSTED
    assert (v.status == EQUIVALENT) == classical_ef_equivalent(m, n, k, equality)
    if v.witness is not None:
        # soundness: the witness really separates, with the stated rank
        assert quantifier_rank(v.witness) <= k
        vm, vn = evaluate(m, v.witness), evaluate(n, v.witness)
        assert vm != vn and vm == (v.true_in == "M")
