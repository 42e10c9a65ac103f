"""The back-and-forth game G(a, b) on path trees.

Positions are pairs of path nodes.  Spoiler extends either node to a
covering successor, Duplicator must answer on the other side so that the
two path domains stay isomorphic.  ``Rk(0)`` is the winning relation W
and ``Rk(i+1)`` keeps the positions of ``Rk(i)`` from which every Spoiler
move has an answer inside ``Rk(i)``.  Position sets are finite, so the
chain stabilizes; the stable positions get rank ``TOP``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

from .comonads import ComonadSpec, unravel
from .structures import Signature, Structure, StructureError, reflects
from .wooded import ForestStructure, PathTree, is_morphism

TOP = math.inf


class GameError(ValueError):
    pass


@dataclass(frozen=True)
class Position:
    left: object
    right: object

    def __repr__(self):
        show = lambda x: "root" if x is None else str(x)  # noqa: E731
        return f"({show(self.left)},{show(self.right)})"


@dataclass
class RankTable:
    a: ForestStructure
    b: ForestStructure
    rank: dict
    stabilization_rank: int
    # |Rk(i)| for i = 0 .. stabilization_rank
    level_sizes: list = field(default_factory=list)

    def rank_of(self, p: Position):
        """Rank of ``p``, ``TOP``, or None when ``p`` is outside W."""
        return self.rank.get(p)

    def at_least(self, p: Position, r: int) -> bool:
        v = self.rank.get(p)
        return v is not None and v >= r

    def stable(self) -> set:
        return {p for p, v in self.rank.items() if v == TOP}


def _check_game(a: ForestStructure, b: ForestStructure):
    if a.flavor != b.flavor:
        raise StructureError(f"flavor mismatch: {a.flavor} vs {b.flavor}")
    if a.carrier.signature != b.carrier.signature:
        raise StructureError("signature mismatch")


class Game:
    """Index-level game data; the public functions wrap this."""

    def __init__(self, a: ForestStructure, b: ForestStructure):
        _check_game(a, b)
        self.a, self.b = a, b
        self.ta: PathTree = a.tree
        self.tb: PathTree = b.tree

    def position(self, i: int, j: int) -> Position:
        return Position(self.ta.ident[i], self.tb.ident[j])

    def indices(self, p: Position) -> tuple[int, int]:
        return self.ta.node(p.left), self.tb.node(p.right)

    @property
    def root(self) -> tuple[int, int]:
        return 0, 0

    @cached_property
    def winning(self) -> frozenset:
        buckets: dict = {}
        for j, sh in enumerate(self.tb.shape):
            buckets.setdefault(sh, []).append(j)
        return frozenset(
            (i, j) for i, sh in enumerate(self.ta.shape) for j in buckets.get(sh, ())
        )

    @cached_property
    def _moves(self) -> dict:
        """For each W position: per left child, the W-compatible right
        children, and per right child, the compatible left children."""
        w = self.winning
        out = {}
        for i, j in w:
            ka, kb = self.ta.children[i], self.tb.children[j]
            forth = [[d for d in kb if (c, d) in w] for c in ka]
            back = [[c for c in ka if (c, d) in w] for d in kb]
            out[i, j] = (ka, kb, forth, back)
        return out

    def survives(self, p, cur) -> bool:
        ka, kb, forth, back = self._moves[p]
        for c, replies in zip(ka, forth):
            if not any((c, d) in cur for d in replies):
                return False
        for d, replies in zip(kb, back):
            if not any((c, d) in cur for c in replies):
                return False
        return True

    @cached_property
    def ranks(self) -> tuple[dict, int, list]:
        cur = set(self.winning)
        rank: dict = {}
        sizes = [len(cur)]
        i = 0
        while True:
            nxt = {p for p in cur if self.survives(p, cur)}
            if not nxt <= cur:
                raise AssertionError("rank sequence is not decreasing")
            if nxt == cur:
                break
            for p in cur - nxt:
                rank[p] = i
            cur = nxt
            i += 1
            sizes.append(len(cur))
        # one more round: the stable set must reproduce itself
        if {p for p in cur if self.survives(p, cur)} != cur:
            raise AssertionError("rank sequence failed to stabilize")
        for p in cur:
            rank[p] = TOP
        return rank, i, sizes

    def table(self) -> RankTable:
        rank, stab, sizes = self.ranks
        return RankTable(
            self.a, self.b,
            {self.position(i, j): v for (i, j), v in rank.items()},
            stab, sizes,
        )

    def rank_index(self, i: int, j: int):
        """Rank by indices; -1 outside W."""
        return self.ranks[0].get((i, j), -1)


def _game(a, b) -> Game:
    return Game(a, b)


def winning_relation(a: ForestStructure, b: ForestStructure) -> set[Position]:
    g = _game(a, b)
    return {g.position(i, j) for i, j in g.winning}


def rank_table(a: ForestStructure, b: ForestStructure) -> RankTable:
    return _game(a, b).table()


def duplicator_wins(a: ForestStructure, b: ForestStructure, p: Position) -> bool:
    g = _game(a, b)
    return g.rank_index(*g.indices(p)) == TOP


def root_position(a: ForestStructure, b: ForestStructure) -> Position:
    return Position(a.tree.ident[0], b.tree.ident[0])


def back_and_forth_equivalent(a: ForestStructure, b: ForestStructure) -> bool:
    g = _game(a, b)
    return g.rank_index(0, 0) == TOP


def root_rank(a: ForestStructure, b: ForestStructure):
    """Rank of the root position: an int, ``TOP``, or -1 outside W."""
    return _game(a, b).rank_index(0, 0)


def r_equivalent(m: Structure, n: Structure, spec: ComonadSpec) -> bool:
    if m.signature != n.signature:
        raise StructureError("signature mismatch")
    return back_and_forth_equivalent(unravel(spec, m), unravel(spec, n))


# --- strategies ---------------------------------------------------------------


@dataclass
class Strategy:
    """Duplicator's reply per (position, side, Spoiler's node)."""

    game: Game
    start: Position
    replies: dict

    def reply(self, p: Position, side: str, node) -> object:
        return self.replies[p, side, node]


def extract_strategy(a: ForestStructure, b: ForestStructure, p: Position) -> Strategy:
    g = _game(a, b)
    start = g.indices(p)
    if g.rank_index(*start) != TOP:
        raise GameError(f"Duplicator does not win from {p}")
    rank = g.ranks[0]
    replies = {}
    todo, seen = [start], {start}
    while todo:
        i, j = todo.pop()
        ka, kb, forth, back = g._moves[i, j]
        moves = [("left", c, [(c, d) for d in cand]) for c, cand in zip(ka, forth)]
        moves += [("right", d, [(c, d) for c in cand]) for d, cand in zip(kb, back)]
        for side, node, options in moves:
            # smallest index among stable replies keeps extraction deterministic
            good = sorted(q for q in options if rank.get(q) == TOP)
            q = good[0]
            answer = q[1] if side == "left" else q[0]
            tree = g.tb if side == "left" else g.ta
            here = g.position(i, j)
            moved = (g.ta if side == "left" else g.tb).ident[node]
            replies[here, side, moved] = tree.ident[answer]
            if q not in seen:
                seen.add(q)
                todo.append(q)
    return Strategy(g, p, replies)


# --- open maps ---------------------------------------------------------------


def _node_image(f, a: ForestStructure, b: ForestStructure):
    """Index-level image of every path node of a under f."""
    ta, tb = a.tree, b.tree
    out = []
    for i, ident in enumerate(ta.ident):
        if ident is None:
            out.append(tb.node(None))
        else:
            out.append(tb.node(f[ident]))
    return out


def is_open(f, a: ForestStructure, b: ForestStructure) -> bool:
    """Path lifting: for every u and every w above f(u), some u' ≥ u is
    sent onto w with f restricted to ↓u' an embedding."""
    f = tuple(f)
    if not is_morphism(f, a, b):
        raise GameError("not a morphism of the wooded category")
    ta, tb = a.tree, b.tree
    img = _node_image(f, a, b)

    def embeds(i):
        chain = ta.chain[i]
        sub = [f[x] for x in chain]
        if len(set(sub)) != len(sub):
            return False
        dom = _restrict(a, chain)
        cod = _restrict(b, tuple(sub))
        return reflects(tuple(range(len(chain))), dom, cod)

    emb = [embeds(i) for i in range(len(ta))]
    # the square with Q = ↓f(u) itself already needs f to reflect on ↓u,
    # so open maps are pathwise embeddings
    if not all(emb):
        return False
    for i in range(len(ta)):
        for j in range(len(tb)):
            if not tb.leq(img[i], j):
                continue
            target_chain = tb.chain[j]
            # walk down from u along nodes whose image stays on ↓w
            frontier = [i]
            found = False
            while frontier and not found:
                nxt = []
                for x in frontier:
                    if img[x] == j:
                        if emb[x]:
                            found = True
                            break
                        continue
                    depth = ta.depth(x)
                    for c in ta.children[x]:
                        if depth < len(target_chain) and tb.chain[img[c]] == target_chain[: depth + 1]:
                            nxt.append(c)
                frontier = nxt
            if not found:
                return False
    return True


def _restrict(a: ForestStructure, chain: tuple) -> Structure:
    pos = {x: i for i, x in enumerate(chain)}
    m = a.carrier
    tables = {
        n: [tuple(pos[x] for x in row) for row in m.relations[n] if all(x in pos for x in row)]
        for n in m.signature.names
    }
    return Structure(Signature(m.signature.relations), len(chain), tables)


def certify_span(s: ForestStructure, f, c: ForestStructure, g, d: ForestStructure) -> bool:
    """Both legs of the span c ← s → d are open."""
    return is_open(f, s, c) and is_open(g, s, d)
