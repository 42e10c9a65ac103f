"""Satisfaction of formulas in finite structures.

``evaluate`` is the textbook recursive definition.  ``Evaluator`` computes
whole satisfying sets as boolean arrays, one axis per context variable,
and memoizes them by formula fingerprint; the two are cross-checked in
the tests.
"""
from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from ..structures import Structure
from .formulas import And, Atom, Eq, Exists, Forall, Formula, Not, Or


class EvaluationError(ValueError):
    pass


def _check_atom(m: Structure, f: Atom):
    try:
        arity = m.signature.arity(f.rel)
    except ValueError:
        raise EvaluationError(f"relation {f.rel!r} is not in the signature") from None
    if arity != len(f.args):
        raise EvaluationError(f"arity mismatch for {f.rel!r}: expected {arity}, got {len(f.args)}")


def evaluate(m: Structure, phi: Formula, assignment: Mapping[str, int] | None = None) -> bool:
    """Tarskian satisfaction ``M |= phi[assignment]``."""
    env = dict(assignment or {})
    for v, a in env.items():
        if not 0 <= a < m.size:
            raise EvaluationError(f"variable {v} assigned out-of-range element {a}")

    def look(v):
        try:
            return env[v]
        except KeyError:
            raise EvaluationError(f"unbound variable {v!r}") from None

    def go(f: Formula) -> bool:
        if isinstance(f, Atom):
            _check_atom(m, f)
            return tuple(look(v) for v in f.args) in m.relations[f.rel]
        if isinstance(f, Eq):
            return look(f.left) == look(f.right)
        if isinstance(f, Not):
            return not go(f.arg)
        if isinstance(f, And):
            return all(go(a) for a in f.args)
        if isinstance(f, Or):
            return any(go(a) for a in f.args)
        if isinstance(f, (Exists, Forall)):
            saved = env.get(f.var, None)
            had = f.var in env
            quant = any if isinstance(f, Exists) else all
            try:
                def body(a):
                    env[f.var] = a
                    return go(f.body)

                return quant(body(a) for a in m.universe)
            finally:
                if had:
                    env[f.var] = saved
                else:
                    env.pop(f.var, None)
        raise TypeError(f"not a formula: {f!r}")

    return go(phi)


def holds_sentence(m: Structure, phi: Formula) -> bool:
    if phi.free:
        raise EvaluationError(f"not a sentence: free variables {sorted(phi.free)}")
    return evaluate(m, phi, {})


class Evaluator:
    """Vectorized satisfying sets over one structure.

    ``sat(phi, ctx)`` returns a boolean array of shape ``(n,) * len(ctx)``
    whose entry at ``(a_1, ..., a_j)`` says whether ``phi`` holds when
    ``ctx[i]`` is assigned ``a_i``.
    """

    def __init__(self, m: Structure):
        self.m = m
        n = m.size
        self.tensors = {}
        for name, arity in m.signature.relations:
            t = np.zeros((n,) * arity, dtype=bool)
            for row in m.relations[name]:
                t[row] = True
            self.tensors[name] = t
        self.memo: dict = {}

    def clear(self):
        self.memo.clear()

    def _grid(self, pos: int, width: int) -> np.ndarray:
        shape = [1] * width
        shape[pos] = self.m.size
        return np.arange(self.m.size).reshape(shape)

    def sat(self, phi: Formula, ctx: Sequence[str]) -> np.ndarray:
        ctx = tuple(ctx)
        if len(set(ctx)) != len(ctx):
            raise EvaluationError("repeated variable in context")
        missing = phi.free - set(ctx)
        if missing:
            raise EvaluationError(f"unbound variable(s) {sorted(missing)}")
        return self._sat(phi, ctx)

    def _sat(self, f: Formula, ctx: tuple) -> np.ndarray:
        key = (f.fp, ctx)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        n, w = self.m.size, len(ctx)
        shape = (n,) * w
        if isinstance(f, Atom):
            _check_atom(self.m, f)
            idx = tuple(self._grid(ctx.index(v), w) for v in f.args)
            out = np.broadcast_to(self.tensors[f.rel][idx], shape)
        elif isinstance(f, Eq):
            out = np.broadcast_to(
                self._grid(ctx.index(f.left), w) == self._grid(ctx.index(f.right), w), shape
            )
        elif isinstance(f, Not):
            out = ~self._sat(f.arg, ctx)
        elif isinstance(f, And):
            out = np.ones(shape, dtype=bool)
            for a in f.args:
                out = out & self._sat(a, ctx)
                if not out.any():
                    break
        elif isinstance(f, Or):
            out = np.zeros(shape, dtype=bool)
            for a in f.args:
                out = out | self._sat(a, ctx)
                if out.all():
                    break
        elif isinstance(f, (Exists, Forall)):
            reduce = np.any if isinstance(f, Exists) else np.all
            if f.var in ctx:
                # rebinding: evaluate with the variable moved to the last axis
                i = ctx.index(f.var)
                inner = ctx[:i] + ctx[i + 1:] + (f.var,)
                red = reduce(self._sat(f.body, inner), axis=-1)
                out = np.broadcast_to(np.expand_dims(red, i), shape)
            else:
                out = reduce(self._sat(f.body, ctx + (f.var,)), axis=-1)
        else:
            raise TypeError(f"not a formula: {f!r}")
        out = np.asarray(out)
        self.memo[key] = out
        return out

    def holds(self, phi: Formula, assignment: Mapping[str, int] | None = None) -> bool:
        assignment = dict(assignment or {})
        ctx = tuple(sorted(phi.free))
        arr = self.sat(phi, ctx) if all(v in assignment for v in ctx) else None
        if arr is None:
            missing = sorted(v for v in ctx if v not in assignment)
            raise EvaluationError(f"unbound variable(s) {missing}")
        return bool(arr[tuple(assignment[v] for v in ctx)])


def satisfying_set(m: Structure, phi: Formula, ctx: Sequence[str]) -> np.ndarray:
    return Evaluator(m).sat(phi, ctx)
