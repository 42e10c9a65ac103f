"""S-expression text format for formulas.

    (exists x (and (R x y) (not (= x y))))

The empty conjunction prints as ``⊤`` and the empty disjunction as ``⊥``;
the reader also accepts ``true``/``false``.  Printing is iterative so deep
Hintikka formulas do not hit the recursion limit.
"""
from __future__ import annotations

import re

from .formulas import FALSE, TRUE, And, Atom, Eq, Exists, Forall, Formula, Not, Or

_KEYWORDS = {"and", "or", "not", "exists", "forall", "="}
_TOKEN = re.compile(r"\s*(?:(\()|(\))|([^\s()]+))")


class FormulaSyntaxError(ValueError):
    pass


def to_sexpr(phi: Formula) -> str:
    out: list[str] = []
    stack: list = [phi]
    while stack:
        f = stack.pop()
        if isinstance(f, str):
            out.append(f)
        elif isinstance(f, Atom):
            out.append("(" + " ".join((f.rel,) + f.args) + ")")
        elif isinstance(f, Eq):
            out.append(f"(= {f.left} {f.right})")
        elif isinstance(f, And) and not f.args:
            out.append("⊤")
        elif isinstance(f, Or) and not f.args:
            out.append("⊥")
        elif isinstance(f, Not):
            out.append("(not ")
            stack.extend([")", f.arg])
        elif isinstance(f, (And, Or)):
            out.append("(and" if isinstance(f, And) else "(or")
            stack.append(")")
            for a in reversed(f.args):
                stack.extend([a, " "])
        elif isinstance(f, (Exists, Forall)):
            head = "exists" if isinstance(f, Exists) else "forall"
            out.append(f"({head} {f.var} ")
            stack.extend([")", f.body])
        else:
            raise TypeError(f"not a formula: {f!r}")
    return "".join(out)


def _tokens(text: str):
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise FormulaSyntaxError(f"unexpected character at offset {pos}")
        pos = m.end()
        yield m.group(1) or m.group(2) or m.group(3), m.start()


def parse_formula(text: str) -> Formula:
    """Read one formula; no simplification is applied."""
    toks = list(_tokens(text))
    if not toks:
        raise FormulaSyntaxError("empty input")
    # iterative reader: frames of [head-token, items]
    stack: list[list] = []
    result = None
    for tok, at in toks:
        if result is not None:
            raise FormulaSyntaxError(f"trailing input at offset {at}")
        if tok == "(":
            stack.append([])
            continue
        if tok == ")":
            if not stack:
                raise FormulaSyntaxError(f"unbalanced ')' at offset {at}")
            node = _build(stack.pop(), at)
        else:
            node = tok
        if stack:
            stack[-1].append(node)
        else:
            result = node
    if stack:
        raise FormulaSyntaxError("unbalanced '(' at end of input")
    return _atomic(result, 0) if isinstance(result, str) else result


def _atomic(tok: str, at: int) -> Formula:
    if tok in ("⊤", "true"):
        return TRUE
    if tok in ("⊥", "false"):
        return FALSE
    raise FormulaSyntaxError(f"bare symbol {tok!r} at offset {at}")


def _name(item, at) -> str:
    if not isinstance(item, str) or item in _KEYWORDS or item in ("⊤", "⊥"):
        raise FormulaSyntaxError(f"expected a name near offset {at}")
    return item


def _sub(item, at) -> Formula:
    return _atomic(item, at) if isinstance(item, str) else item


def _build(items: list, at: int) -> Formula:
    if not items:
        raise FormulaSyntaxError(f"empty list at offset {at}")
    head, rest = items[0], items[1:]
    if not isinstance(head, str):
        raise FormulaSyntaxError(f"expected an operator near offset {at}")
    if head == "and":
        return And(tuple(_sub(x, at) for x in rest))
    if head == "or":
        return Or(tuple(_sub(x, at) for x in rest))
    if head == "not":
        if len(rest) != 1:
            raise FormulaSyntaxError(f"'not' takes one argument near offset {at}")
        return Not(_sub(rest[0], at))
    if head in ("exists", "forall"):
        if len(rest) != 2:
            raise FormulaSyntaxError(f"'{head}' takes a variable and a body near offset {at}")
        cls = Exists if head == "exists" else Forall
        return cls(_name(rest[0], at), _sub(rest[1], at))
    if head == "=":
        if len(rest) != 2:
            raise FormulaSyntaxError(f"'=' takes two arguments near offset {at}")
        return Eq(_name(rest[0], at), _name(rest[1], at))
    if not rest:
        raise FormulaSyntaxError(f"relation {head!r} without arguments near offset {at}")
    return Atom(_name(head, at), tuple(_name(x, at) for x in rest))
