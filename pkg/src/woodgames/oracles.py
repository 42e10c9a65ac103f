"""Independent reference solvers used to cross-check the game engine.

None of these touch path shapes or the rank iteration: they recompute
everything from the raw structures with textbook algorithms.
"""
from __future__ import annotations

import itertools
from functools import lru_cache

from .structures import Structure, is_partial_isomorphism
from .wooded import ForestStructure


def minimax_duplicator_wins(a: ForestStructure, b: ForestStructure, left: int, right: int, depth: int) -> bool:
    """Plain game-tree search: does Duplicator survive ``depth`` rounds
    from the position given by tree indices ``(left, right)``?

    Positions are checked by testing the chain correspondence for being a
    partial isomorphism of the carriers (plus equal pebbles), instead of
    comparing precomputed shapes.
    """
    ta, tb = a.tree, b.tree

    @lru_cache(maxsize=None)
    def ok(i, j):
        ci, cj = ta.chain[i], tb.chain[j]
        if len(ci) != len(cj):
            return False
        if a.flavor == "P" and any(a.pebbling[x] != b.pebbling[y] for x, y in zip(ci, cj)):
            return False
        return is_partial_isomorphism(a.carrier, b.carrier, list(zip(ci, cj)))

    @lru_cache(maxsize=None)
    def wins(i, j, d):
        if not ok(i, j):
            return False
        if d == 0:
            return True
        for c in ta.children[i]:
            if not any(wins(c, e, d - 1) for e in tb.children[j]):
                return False
        for e in tb.children[j]:
            if not any(wins(c, e, d - 1) for c in ta.children[i]):
                return False
        return True

    return wins(left, right, depth)


def _atoms_agree(m: Structure, n: Structure, xs, ys) -> bool:
    width = len(xs)
    for name, arity in m.signature.relations:
        rm, rn = m.relations[name], n.relations[name]
        for idx in itertools.product(range(width), repeat=arity):
            if (tuple(xs[i] for i in idx) in rm) != (tuple(ys[i] for i in idx) in rn):
                return False
    return True


def _config_ok(m, n, xs, ys, equality: bool) -> bool:
    if equality:
        return is_partial_isomorphism(m, n, list(zip(xs, ys)))
    return _atoms_agree(m, n, xs, ys)


def classical_ef_equivalent(m: Structure, n: Structure, k: int, equality: bool = True) -> bool:
    """k-round Ehrenfeucht–Fraïssé game over tuples."""

    @lru_cache(maxsize=None)
    def wins(xs, ys, r):
        if not _config_ok(m, n, xs, ys, equality):
            return False
        if r == 0:
            return True
        for x in m.universe:
            if not any(wins(xs + (x,), ys + (y,), r - 1) for y in n.universe):
                return False
        for y in n.universe:
            if not any(wins(xs + (x,), ys + (y,), r - 1) for x in m.universe):
                return False
        return True

    return wins((), (), k)


def classical_pebble_equivalent(m: Structure, n: Structure, k: int, rounds: int, equality: bool = True) -> bool:
    """k-pebble game lasting ``rounds`` rounds.  A configuration is a
    tuple of k slots, each empty or holding a pair (a, b)."""

    def ok(config):
        live = [c for c in config if c is not None]
        return _config_ok(m, n, tuple(c[0] for c in live), tuple(c[1] for c in live), equality)

    @lru_cache(maxsize=None)
    def wins(config, r):
        if r == 0:
            return True
        for p in range(k):
            def place(x, y):
                return config[:p] + ((x, y),) + config[p + 1:]

            for x in m.universe:
                if not any(ok(place(x, y)) and wins(place(x, y), r - 1) for y in n.universe):
                    return False
            for y in n.universe:
                if not any(ok(place(x, y)) and wins(place(x, y), r - 1) for x in m.universe):
                    return False
        return True

    return wins((None,) * k, rounds)


def bisimulation_classes(m: Structure, n: Structure, depth: int | None = None) -> tuple[list, list]:
    """Partition refinement on the disjoint union; ``depth`` rounds, or to
    the fixed point when None.  Returns class ids for M and for N."""
    sig = m.signature
    unary = [r for r, ar in sig.relations if ar == 1]
    binary = [r for r, ar in sig.relations if ar == 2]
    nodes = [("m", x) for x in m.universe] + [("n", y) for y in n.universe]
    struct = {"m": m, "n": n}

    def succ(node, rel):
        side, x = node
        return [(side, y) for (z, y) in struct[side].relations[rel] if z == x]

    label = {v: tuple((v[1],) in struct[v[0]].relations[u] for u in unary) for v in nodes}
    cls = _renumber(label)
    steps = itertools.count() if depth is None else range(depth)
    for _ in steps:
        key = {
            v: (cls[v],) + tuple(frozenset(cls[w] for w in succ(v, r)) for r in binary)
            for v in nodes
        }
        new = _renumber(key)
        stable = len(set(new.values())) == len(set(cls.values()))
        cls = new
        if stable and depth is None:
            break
    return [cls[("m", x)] for x in m.universe], [cls[("n", y)] for y in n.universe]


def _renumber(keys: dict) -> dict:
    ids: dict = {}
    return {v: ids.setdefault(key, len(ids)) for v, key in sorted(keys.items(), key=lambda kv: repr(kv[0]))}


def bounded_bisimilar(m: Structure, n: Structure, depth: int) -> bool:
    """Points agree up to ``depth`` transition steps."""
    cm, cn = bisimulation_classes(m, n, depth)
    return cm[m.point] == cn[n.point]
