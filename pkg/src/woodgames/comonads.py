"""EF, pebble and modal unravellings as forest-ordered structures.

Plays are plain tuples:

* EF: ``(a1, ..., an)``
* pebble: ``((p1, a1), ..., (pn, an))``
* modal: ``((None, a0), (R1, a1), ..., (Rn, an))``, a walk along
  transition relations starting at the point.

The same encodings apply one level up, so ``G G M`` has plays of plays.
Relation lifting is defined by a predicate (``lifted_holds``) that works
on any such tuples; unravellings materialize it as tables.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

from .structures import Homomorphism, Structure, StructureError, expand_identity, is_homomorphism
from .wooded import ForestStructure, is_morphism

KINDS = ("ef", "pebble", "modal")


@dataclass(frozen=True)
class ComonadSpec:
    kind: str
    k: int
    with_identity: bool = False
    play_bound: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise StructureError(f"unknown comonad kind {self.kind!r}")
        if not isinstance(self.k, int) or self.k < 1:
            raise StructureError("resource k must be a positive integer")
        if self.with_identity and self.kind == "modal":
            raise StructureError("the modal comonad has no identity variant")
        if self.play_bound is not None:
            if self.kind != "pebble":
                raise StructureError("play bound only applies to the pebble comonad")
            if self.play_bound < 1:
                raise StructureError("play bound must be positive")

    @property
    def bound(self) -> int:
        """Maximal play length."""
        if self.kind == "pebble":
            return self.play_bound if self.play_bound is not None else 2 * self.k
        return self.k

    @property
    def flavor(self) -> str:
        return {"ef": "E", "pebble": "P", "modal": "M"}[self.kind]

    def base(self, m: Structure) -> Structure:
        """The structure that is actually unravelled (J M for the I variant)."""
        if self.with_identity and m.signature.identity is None:
            return expand_identity(m)
        if self.kind == "modal":
            if not m.signature.modal:
                raise StructureError("modal comonad needs a modal signature")
            if m.point is None:
                raise StructureError("missing point for modal structure")
        return m


def last(spec: ComonadSpec, play):
    return play[-1] if spec.kind == "ef" else play[-1][1]


def is_prefix(s, t) -> bool:
    return len(s) <= len(t) and t[: len(s)] == s


def live_at(play, length: int) -> bool:
    """Pebble placed at position ``length`` of ``play`` is not reused later."""
    p = play[length - 1][0]
    return all(q != p for q, _ in play[length:])


def lifted_holds(spec: ComonadSpec, holds: Callable, rel: str, args: Sequence, arity: int | None = None) -> bool:
    """Does ``rel`` hold of the plays ``args`` in the unravelling?

    ``holds(rel, elements)`` decides the relation in the base structure.
    """
    if spec.kind == "modal":
        if len(args) == 1:
            return holds(rel, (last(spec, args[0]),))
        s, t = args
        return (
            len(t) == len(s) + 1 and t[:-1] == s and t[-1][0] == rel
            and holds(rel, (last(spec, s), last(spec, t)))
        )
    top = max(args, key=len)
    if not all(is_prefix(s, top) for s in args):
        return False
    if spec.kind == "pebble" and not all(live_at(top, len(s)) for s in args):
        return False
    return holds(rel, tuple(last(spec, s) for s in args))


def plays(spec: ComonadSpec, m: Structure) -> list[tuple]:
    """All plays of length ≤ bound, shortest first, lexicographic within a length."""
    m = spec.base(m)
    out: list[tuple] = []
    if spec.kind == "modal":
        binary = [n for n, ar in m.signature.relations if ar == 2]
        succ = {x: sorted((n, y) for n in binary for (z, y) in m.relations[n] if z == x)
                for x in m.universe}
        layer = [((None, m.point),)]
        for _ in range(spec.k):
            out.extend(layer)
            layer = [w + (step,) for w in layer for step in succ[w[-1][1]]]
        return out
    moves = list(m.universe) if spec.kind == "ef" else [
        (p, a) for p in range(1, spec.k + 1) for a in m.universe
    ]
    layer = [(x,) for x in moves]
    for _ in range(spec.bound):
        out.extend(layer)
        layer = [s + (x,) for s in layer for x in moves]
    return out


def _lift_tables(spec: ComonadSpec, m: Structure, seqs: list[tuple], index: dict) -> dict:
    tables: dict[str, list] = {}
    for name, arity in m.signature.relations:
        table = m.relations[name]
        rows = []
        if spec.kind == "modal":
            for i, s in enumerate(seqs):
                if arity == 1 and (s[-1][1],) in table:
                    rows.append((i,))
                elif arity == 2 and len(s) > 1 and s[-1][0] == name:
                    rows.append((index[s[:-1]], i))
            tables[name] = rows
            continue
        for i, t in enumerate(seqs):
            n = len(t)
            for lens in itertools.product(range(1, n + 1), repeat=arity):
                if n not in lens:
                    continue
                if spec.kind == "pebble" and not all(live_at(t, l) for l in lens):
                    continue
                if tuple(last(spec, t[:l]) for l in lens) in table:
                    rows.append(tuple(index[t[:l]] for l in lens))
        tables[name] = rows
    return tables


@lru_cache(maxsize=4096)
def unravel(spec: ComonadSpec, m: Structure) -> ForestStructure:
    base = spec.base(m)
    seqs = plays(spec, base)
    index = {s: i for i, s in enumerate(seqs)}
    parent = tuple(index[s[:-1]] if len(s) > 1 else None for s in seqs)
    tables = _lift_tables(spec, base, seqs, index)
    point = 0 if spec.kind == "modal" else None
    carrier = Structure(base.signature, len(seqs), tables, point)
    pebbling = tuple(s[-1][0] for s in seqs) if spec.kind == "pebble" else None
    return ForestStructure(
        carrier, parent, spec.bound, spec.flavor,
        spec.k if spec.kind == "pebble" else None, pebbling, tuple(seqs),
    )


def counit(spec: ComonadSpec, m: Structure) -> Homomorphism:
    """Last-element map from the carrier of the unravelling to M (or J M)."""
    a = unravel(spec, m)
    return Homomorphism(a.carrier, spec.base(m), tuple(last(spec, s) for s in a.labels))


# --- elementwise comonad structure ----------------------------------------


def extract(spec: ComonadSpec, play):
    return last(spec, play)


def duplicate(spec: ComonadSpec, play) -> tuple:
    """A play ↦ the play of its non-empty prefixes."""
    prefixes = [play[:i] for i in range(1, len(play) + 1)]
    if spec.kind == "ef":
        return tuple(prefixes)
    return tuple((step[0], pre) for step, pre in zip(play, prefixes))


def fmap_play(spec: ComonadSpec, f: Callable, play) -> tuple:
    if spec.kind == "ef":
        return tuple(f(x) for x in play)
    return tuple((tag, f(x)) for tag, x in play)


class Comultiplication:
    """δ : G M → G G M.

    The codomain is usually too large to build (pebble plays of plays), so
    the homomorphism property is checked through the lifted predicate of
    G applied to G M.  ``as_homomorphism`` materializes the codomain for
    small cases.
    """

    def __init__(self, spec: ComonadSpec, m: Structure):
        self.spec = spec
        self.m = m
        self.source = unravel(spec, m)

    def __call__(self, play) -> tuple:
        return duplicate(self.spec, play)

    def holds_in_source(self, rel, plays_) -> bool:
        base = self.spec.base(self.m)
        return lifted_holds(self.spec, lambda r, xs: xs in base.relations[r], rel, plays_)

    def is_homomorphism(self) -> bool:
        a = self.source
        lab = a.labels
        for name, row in a.carrier.tuples():
            image = tuple(duplicate(self.spec, lab[i]) for i in row)
            if not lifted_holds(self.spec, self.holds_in_source, name, image):
                return False
        if self.spec.kind == "modal":
            # the point goes to the point
            return duplicate(self.spec, lab[0]) == ((None, lab[0]),)
        return True

    def as_homomorphism(self) -> Homomorphism:
        gg = unravel(self.spec, self.source.carrier)
        index = {tuple(_relabel(self.spec, s, self.source.labels)): i for i, s in enumerate(gg.labels)}
        mapping = tuple(index[duplicate(self.spec, s)] for s in self.source.labels)
        return Homomorphism(self.source.carrier, gg.carrier, mapping)


def _relabel(spec, s, labels):
    # plays of G G M refer to elements of G M by index; swap in the plays
    return fmap_play(spec, lambda i: labels[i], s)


def comultiplication(spec: ComonadSpec, m: Structure) -> Comultiplication:
    return Comultiplication(spec, m)


def fmap(spec: ComonadSpec, h: Homomorphism) -> Homomorphism:
    """G h : G M → G N, applying h to every element of a play."""
    a, b = unravel(spec, h.source), unravel(spec, h.target)
    index = {s: i for i, s in enumerate(b.labels)}
    mapping = tuple(index[fmap_play(spec, h.mapping.__getitem__, s)] for s in a.labels)
    return Homomorphism(a.carrier, b.carrier, mapping)


# --- adjunction -------------------------------------------------------------


def _check_flavor(spec: ComonadSpec, a: ForestStructure):
    if a.flavor != spec.flavor:
        raise StructureError(f"flavor {a.flavor} does not match the {spec.kind} comonad")
    if any(d > spec.bound for d in a.depth):
        raise StructureError("forest is deeper than the comonad allows")
    if spec.kind == "pebble" and any(not 1 <= p <= spec.k for p in a.pebbling):
        raise StructureError("pebbling uses more pebbles than the comonad allows")


def _step_label(a: ForestStructure, x: int) -> str:
    p = a.parent[x]
    names = [n for n, ar in a.carrier.signature.relations if ar == 2 and (p, x) in a.carrier.relations[n]]
    if len(names) != 1:
        raise StructureError("modal forest edge without a unique transition label")
    return names[0]


def transpose(spec: ComonadSpec, f: Sequence[int], a: ForestStructure, m: Structure) -> tuple[int, ...]:
    """L a → M  ↦  a → R M, sending u to the play (f v) for v in ↓u."""
    _check_flavor(spec, a)
    base = spec.base(m)
    if a.carrier.signature != base.signature:
        raise StructureError("signature mismatch")
    if not is_homomorphism(tuple(f), a.carrier, base):
        raise StructureError("map is not a homomorphism of carriers")
    r = unravel(spec, m)
    index = {s: i for i, s in enumerate(r.labels)}
    out = []
    for u in range(a.size):
        chain = a.down(u)
        if spec.kind == "ef":
            play = tuple(f[v] for v in chain)
        elif spec.kind == "pebble":
            play = tuple((a.pebbling[v], f[v]) for v in chain)
        else:
            play = ((None, f[chain[0]]),) + tuple((_step_label(a, v), f[v]) for v in chain[1:])
        out.append(index[play])
    return tuple(out)


def transpose_inverse(spec: ComonadSpec, g: Sequence[int], a: ForestStructure, m: Structure) -> tuple[int, ...]:
    """a → R M  ↦  L a → M, composing with the counit."""
    r = unravel(spec, m)
    if not is_morphism(tuple(g), a, r):
        raise StructureError("map is not a morphism into the unravelling")
    return tuple(last(spec, r.labels[g[u]]) for u in range(a.size))
