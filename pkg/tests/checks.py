"""Shared checking loops for the Hintikka and acceptance tests."""
import numpy as np

from woodgames.comonads import fmap, unravel
from woodgames.games import Game
from woodgames.hintikka import HintikkaSynthesizer, play_tuple, var
from woodgames.logic import Evaluator
from woodgames.oracles import bisimulation_classes
from woodgames.structures import Homomorphism, Structure


def node_tuples(spec, b):
    """Elements realizing each path node of b, grouped by path shape."""
    groups: dict = {}
    t = b.tree
    for j, ident in enumerate(t.ident):
        c = () if ident is None else play_tuple(spec, b.labels[ident])
        groups.setdefault(t.shape[j], []).append((j, c))
    return groups


def exactness_mismatches(spec, syn: HintikkaSynthesizer, n, ev: Evaluator, rmax: int):
    """Compare N ⊨ Θ[m, shape(n), r](c_n) with rank(m, n) ≥ r over all
    position pairs of equal depth.  Returns (mismatches, checks)."""
    b = unravel(spec, n)
    g = Game(syn.a, b)
    ta = syn.tree
    bad = checks = 0
    groups = node_tuples(spec, b)
    for i in range(len(ta)):
        d = ta.depth(i)
        for q, members in groups.items():
            if q.length != d:
                continue
            ctx = tuple(var(t) for t in range(q.length))
            idx = tuple(np.array([c[t] for _, c in members], dtype=int) for t in range(q.length))
            ranks = np.array([g.rank_index(i, j) for j, _ in members], dtype=float)
            for r in range(rmax + 1):
                arr = ev.sat(syn.theta(i, q, r), ctx)
                vals = arr[idx] if ctx else np.full(len(members), bool(arr))
                bad += int(np.count_nonzero(vals != (ranks >= r)))
                checks += len(members)
    return bad, checks


def bisimulation_span(spec, m, n):
    """Product of two pointed Kripke structures restricted to the largest
    bisimulation, with its projections."""
    cm, cn = bisimulation_classes(m, n)
    pairs = [(x, y) for x in m.universe for y in n.universe if cm[x] == cn[y]]
    index = {p: i for i, p in enumerate(pairs)}
    edges = [(index[x, y], index[u, v]) for (x, y) in pairs for (u, v) in pairs
             if (x, u) in m.relations["R"] and (y, v) in n.relations["R"]]
    marked = [(index[p],) for p in pairs if (p[0],) in m.relations["P"]]
    prod = Structure(m.signature, len(pairs), {"R": edges, "P": marked}, index[m.point, n.point])
    left = fmap(spec, Homomorphism(prod, m, tuple(x for x, _ in pairs)))
    right = fmap(spec, Homomorphism(prod, n, tuple(y for _, y in pairs)))
    return unravel(spec, prod), left.mapping, right.mapping
