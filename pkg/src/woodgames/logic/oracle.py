"""Brute-force rank-k equivalence by formula enumeration.

The oracle only builds formulas and evaluates them; it never looks at
games.  Enumerating every sentence of rank ≤ k is hopeless even for tiny
signatures, so formulas are enumerated modulo observational equivalence
on the two structures at hand:

* a *generator* over variables x̄ is an atom, or ``∃y β`` for a block β
  over x̄y of one rank less;
* a *block* is a conjunction fixing the truth value of every generator,
  kept only when some tuple of M or N realizes it.

Generators with identical truth tables on M and N are merged (the first
in enumeration order wins).  Since every rank-k formula is, on M ⊔ N, a
boolean combination of these generators, M and N agree on all rank-k
sentences iff they agree on the rank-k generators over no variables.
``budget`` caps the number of generated formulas; running out is
reported as such and never as equivalence.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ..structures import Structure
from .formulas import And, Atom, Exists, Forall, Formula, Not, Or, conj, eq, exists, neg
from .semantics import Evaluator

EQUIVALENT = "equivalent-within-budget"
DISTINGUISHED = "distinguished"
EXHAUSTED = "budget-exhausted"


@dataclass(frozen=True)
class OracleVerdict:
    status: str
    witness: Formula | None = None
    # "M" or "N": where the witness holds
    true_in: str | None = None
    generated: int = 0

    @property
    def distinguished(self) -> bool:
        return self.status == DISTINGUISHED


class _Exhausted(Exception):
    pass


class _Enumerator:
    def __init__(self, m: Structure, n: Structure, equality: bool, variables: int | None, budget: int):
        self.m, self.n = m, n
        self.ev = (Evaluator(m), Evaluator(n))
        self.equality = equality
        self.variables = variables
        self.budget = budget
        self.generated = 0
        self.memo: dict = {}

    def names(self, ctx_len_or_none=None):
        return [f"x{i + 1}" for i in range(self.variables)]

    def choices(self, ctx: tuple) -> list[str]:
        if self.variables is None:
            return [f"x{len(ctx) + 1}"]
        return self.names()

    @staticmethod
    def extend(ctx: tuple, x: str) -> tuple:
        return tuple(sorted(set(ctx) | {x}, key=lambda v: int(v[1:])))

    def _count(self, k: int):
        self.generated += k
        if self.generated > self.budget:
            raise _Exhausted

    def atoms(self, ctx: tuple) -> list[Formula]:
        out = []
        for name, arity in self.m.signature.relations:
            for args in itertools.product(ctx, repeat=arity):
                out.append(Atom(name, args))
        if self.equality:
            out += [eq(x, y) for x, y in itertools.combinations(ctx, 2)]
        return out

    def table(self, f: Formula, ctx: tuple) -> tuple[np.ndarray, np.ndarray]:
        return self.ev[0].sat(f, ctx).ravel(), self.ev[1].sat(f, ctx).ravel()

    def generators(self, ctx: tuple, r: int) -> list[Formula]:
        raw = self.atoms(ctx)
        if r > 0:
            for x in self.choices(ctx):
                inner = self.extend(ctx, x)
                raw += [exists(x, b) for b in self.blocks(inner, r - 1)]
        self._count(len(raw))
        raw.sort(key=lambda f: (f.qr, f.size))
        seen, out = set(), []
        for g in raw:
            tm, tn = self.table(g, ctx)
            key = (tm.tobytes(), tn.tobytes())
            if key not in seen:
                seen.add(key)
                out.append(g)
        return out

    def blocks(self, ctx: tuple, r: int) -> list[Formula]:
        key = (ctx, r)
        if key in self.memo:
            return self.memo[key]
        gens = self.generators(ctx, r)
        if gens:
            tm = np.stack([self.table(g, ctx)[0] for g in gens])
            tn = np.stack([self.table(g, ctx)[1] for g in gens])
            cols = np.concatenate([tm, tn], axis=1)
        else:
            cols = np.zeros((0, self.m.size ** len(ctx) + self.n.size ** len(ctx)), dtype=bool)
        out = []
        if cols.shape[1]:
            seen = set()
            for col in cols.T:
                sig = col.tobytes()
                if sig in seen:
                    continue
                seen.add(sig)
                out.append(conj([g if bit else neg(g) for g, bit in zip(gens, col)]))
        self._count(len(out))
        self.memo[key] = out
        return out

    def sentence_value(self, f: Formula) -> tuple[bool, bool]:
        return bool(self.ev[0].sat(f, ())), bool(self.ev[1].sat(f, ()))


def _drop_one(f: Formula):
    """Formulas obtained by deleting one conjunct somewhere inside f,
    outermost first."""
    if isinstance(f, And):
        for i in range(len(f.args)):
            yield conj(f.args[:i] + f.args[i + 1:])
        for i, a in enumerate(f.args):
            for b in _drop_one(a):
                yield conj(f.args[:i] + (b,) + f.args[i + 1:])
    elif isinstance(f, Or):
        for i, a in enumerate(f.args):
            for b in _drop_one(a):
                yield Or(f.args[:i] + (b,) + f.args[i + 1:])
    elif isinstance(f, Not):
        for b in _drop_one(f.arg):
            yield neg(b)
    elif isinstance(f, (Exists, Forall)):
        for b in _drop_one(f.body):
            yield type(f)(f.var, b)


def _minimize(en: _Enumerator, f: Formula, limit: int = 4000) -> Formula:
    """Greedy shrinking that keeps f distinguishing."""
    tries = 0
    changed = True
    while changed and tries < limit:
        changed = False
        for g in _drop_one(f):
            tries += 1
            vm, vn = en.sentence_value(g)
            if vm != vn:
                f = g
                changed = True
                break
            if tries >= limit:
                break
    return f


def rank_k_equivalent_oracle(
    m: Structure,
    n: Structure,
    k: int,
    budget: int = 2_000_000,
    equality: bool = True,
    variables: int | None = None,
    minimize: bool = True,
) -> OracleVerdict:
    """Do M and N satisfy the same sentences of quantifier rank ≤ k?

    ``variables`` restricts to sentences using that many variable names
    (best effort: the search space grows quickly).
    """
    if m.signature != n.signature:
        raise ValueError("signature mismatch")
    en = _Enumerator(m, n, equality, variables, budget)
    try:
        gens = en.generators((), k)
    except _Exhausted:
        return OracleVerdict(EXHAUSTED, generated=en.generated)
    for g in gens:
        vm, vn = en.sentence_value(g)
        if vm != vn:
            w = _minimize(en, g) if minimize else g
            vm, _ = en.sentence_value(w)
            return OracleVerdict(DISTINGUISHED, w, "M" if vm else "N", en.generated)
    return OracleVerdict(EQUIVALENT, generated=en.generated)
