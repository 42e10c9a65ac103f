"""First-order formula AST with structural fingerprints.

Nodes are immutable and carry a blake2b fingerprint of their structure,
so equal formulas built independently compare and hash equal in O(1)
and large formulas that share subterms stay cheap to deduplicate.

``TRUE`` is the empty conjunction and ``FALSE`` the empty disjunction.
The lower-case constructors (``conj``, ``disj``, ``neg``, ``exists``,
``forall``) simplify as they build; the class constructors do not.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Iterable

__all__ = [
    "Formula", "Atom", "Eq", "Not", "And", "Or", "Exists", "Forall",
    "TRUE", "FALSE", "conj", "disj", "neg", "exists", "forall", "eq",
    "simplify", "quantifier_rank", "free_variables", "implies",
]


def _digest(*parts: bytes) -> bytes:
    h = hashlib.blake2b(digest_size=16)
    for p in parts:
        h.update(len(p).to_bytes(4, "little"))
        h.update(p)
    return h.digest()


class Formula:
    """Base class; concrete nodes are the frozen dataclasses below."""

    fp: bytes
    qr: int
    size: int
    free: frozenset

    def __hash__(self):
        return int.from_bytes(self.fp[:8], "little")

    def __eq__(self, other):
        return isinstance(other, Formula) and self.fp == other.fp

    def __lt__(self, other):
        return self.fp < other.fp

    def __str__(self):
        from .sexpr import to_sexpr

        return to_sexpr(self)

    def _finish(self, tag: str, *parts: bytes, qr: int, size: int, free):
        object.__setattr__(self, "fp", _digest(tag.encode(), *parts))
        object.__setattr__(self, "qr", qr)
        object.__setattr__(self, "size", size)
        object.__setattr__(self, "free", frozenset(free))


@dataclass(frozen=True, eq=False, repr=False)
class Atom(Formula):
    rel: str
    args: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        self._finish("atom", self.rel.encode(), *(a.encode() for a in self.args),
                     qr=0, size=1, free=self.args)

    def __repr__(self):
        return f"Atom({self.rel!r}, {self.args!r})"


@dataclass(frozen=True, eq=False, repr=False)
class Eq(Formula):
    left: str
    right: str

    def __post_init__(self):
        self._finish("eq", self.left.encode(), self.right.encode(),
                     qr=0, size=1, free=(self.left, self.right))

    def __repr__(self):
        return f"Eq({self.left!r}, {self.right!r})"


@dataclass(frozen=True, eq=False, repr=False)
class Not(Formula):
    arg: Formula

    def __post_init__(self):
        a = self.arg
        self._finish("not", a.fp, qr=a.qr, size=a.size + 1, free=a.free)

    def __repr__(self):
        return f"Not({self.arg!r})"


@dataclass(frozen=True, eq=False, repr=False)
class And(Formula):
    args: tuple[Formula, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        self._finish(
            "and", *(a.fp for a in self.args),
            qr=max((a.qr for a in self.args), default=0),
            size=1 + sum(a.size for a in self.args),
            free=frozenset().union(*(a.free for a in self.args)),
        )

    def __repr__(self):
        return f"And({list(self.args)!r})"


@dataclass(frozen=True, eq=False, repr=False)
class Or(Formula):
    args: tuple[Formula, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        self._finish(
            "or", *(a.fp for a in self.args),
            qr=max((a.qr for a in self.args), default=0),
            size=1 + sum(a.size for a in self.args),
            free=frozenset().union(*(a.free for a in self.args)),
        )

    def __repr__(self):
        return f"Or({list(self.args)!r})"


@dataclass(frozen=True, eq=False, repr=False)
class Exists(Formula):
    var: str
    body: Formula

    def __post_init__(self):
        b = self.body
        self._finish("exists", self.var.encode(), b.fp,
                     qr=b.qr + 1, size=b.size + 1, free=b.free - {self.var})

    def __repr__(self):
        return f"Exists({self.var!r}, {self.body!r})"


@dataclass(frozen=True, eq=False, repr=False)
class Forall(Formula):
    var: str
    body: Formula

    def __post_init__(self):
        b = self.body
        self._finish("forall", self.var.encode(), b.fp,
                     qr=b.qr + 1, size=b.size + 1, free=b.free - {self.var})

    def __repr__(self):
        return f"Forall({self.var!r}, {self.body!r})"


TRUE = And(())
FALSE = Or(())


def quantifier_rank(phi: Formula) -> int:
    return phi.qr


def free_variables(phi: Formula) -> frozenset:
    return phi.free


# --- simplifying constructors ---------------------------------------------


def _gather(kind, items: Iterable[Formula]) -> list[Formula]:
    out = []
    for f in items:
        if isinstance(f, kind):
            out.extend(f.args)
        else:
            out.append(f)
    return out


def _junction(kind, unit, absorbing, items):
    seen = {}
    for f in _gather(kind, items):
        if f == absorbing:
            return absorbing
        if f == unit:
            continue
        seen[f.fp] = f
    fps = set(seen)
    for f in seen.values():
        if isinstance(f, Not) and f.arg.fp in fps:
            return absorbing
    if len(seen) == 1:
        return next(iter(seen.values()))
    return kind(tuple(sorted(seen.values())))


def conj(*items: Formula) -> Formula:
    if len(items) == 1 and not isinstance(items[0], Formula):
        items = tuple(items[0])
    return _junction(And, TRUE, FALSE, items)


def disj(*items: Formula) -> Formula:
    if len(items) == 1 and not isinstance(items[0], Formula):
        items = tuple(items[0])
    return _junction(Or, FALSE, TRUE, items)


def neg(phi: Formula) -> Formula:
    if phi == TRUE:
        return FALSE
    if phi == FALSE:
        return TRUE
    if isinstance(phi, Not):
        return phi.arg
    return Not(phi)


def eq(x: str, y: str) -> Formula:
    if x == y:
        return TRUE
    return Eq(*sorted((x, y)))


def exists(var: str, body: Formula) -> Formula:
    # vacuous quantifiers are kept: they are not valid over empty structures
    if body == FALSE:
        return FALSE
    return Exists(var, body)


def forall(var: str, body: Formula) -> Formula:
    if body == TRUE:
        return TRUE
    return Forall(var, body)


def implies(a: Formula, b: Formula) -> Formula:
    return disj(neg(a), b)


def simplify(phi: Formula) -> Formula:
    """Bottom-up constant folding, flattening and deduplication."""
    memo: dict[bytes, Formula] = {}

    def go(f: Formula) -> Formula:
        hit = memo.get(f.fp)
        if hit is not None:
            return hit
        if isinstance(f, Atom):
            out = f
        elif isinstance(f, Eq):
            out = eq(f.left, f.right)
        elif isinstance(f, Not):
            out = neg(go(f.arg))
        elif isinstance(f, And):
            out = conj([go(a) for a in f.args])
        elif isinstance(f, Or):
            out = disj([go(a) for a in f.args])
        elif isinstance(f, Exists):
            out = exists(f.var, go(f.body))
        elif isinstance(f, Forall):
            out = forall(f.var, go(f.body))
        else:
            raise TypeError(f"not a formula: {f!r}")
        memo[f.fp] = out
        return out

    return go(phi)
