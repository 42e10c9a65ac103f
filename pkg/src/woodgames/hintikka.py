"""Embedding formulas and rank-defining Hintikka formulas.

``Θ[m, Q, r]`` has free variables ``z1 .. zj`` where ``j`` is the length
of the path shape ``Q``; a tuple ``c`` of a structure N realizes a path
embedding ``n : Q ↪ R N`` (the play whose elements are ``c``), and

    N ⊨ Θ[m, Q, r](c)   iff   rank(m, n) ≥ r.

Formulas are written over the extensional signature: the lifted relation
I of the identity variant becomes real equality.  Prefix inclusion of
paths is expressed by sharing variables: the new path's tuple is the old
one followed by one fresh variable.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .comonads import ComonadSpec, unravel
from .games import TOP, Game
from .logic.formulas import (
    FALSE,
    TRUE,
    Atom,
    Formula,
    conj,
    disj,
    eq,
    exists,
    forall,
    neg,
)
from .structures import Signature, Structure, StructureError
from .wooded import PathShape

EQUALITY = "="


def var(i: int) -> str:
    """Variable for chain index ``i`` (0-based)."""
    return f"z{i + 1}"


# --- tuple diagrams -----------------------------------------------------------


@dataclass(frozen=True)
class TupleDiagram:
    """A conjunction of atoms over variables, presenting a finite structure.

    ``atoms`` holds ``(relation, variables)`` pairs; ``("=", (x, y))``
    records an equality.  The atom set is closed under the congruence
    generated by the equalities when the diagram is built.
    """

    signature: Signature
    variables: tuple[str, ...]
    atoms: frozenset

    def __post_init__(self):
        vs = tuple(self.variables)
        object.__setattr__(self, "variables", vs)
        if len(set(vs)) != len(vs):
            raise StructureError("repeated variable in diagram")
        parent = {v: v for v in vs}

        def find(v):
            while parent[v] != v:
                v = parent[v]
            return v

        for rel, args in self.atoms:
            if any(a not in parent for a in args):
                raise StructureError(f"atom {rel}{args} uses an undeclared variable")
            if rel == EQUALITY:
                if len(args) != 2:
                    raise StructureError("equality atoms are binary")
                x, y = find(args[0]), find(args[1])
                if x != y:
                    parent[max(x, y, key=vs.index)] = min(x, y, key=vs.index)
            elif self.signature.arity(rel) != len(args):
                raise StructureError(f"arity mismatch for {rel!r}")
        cls = {v: find(v) for v in vs}
        members: dict = {}
        for v in vs:
            members.setdefault(cls[v], []).append(v)
        closed = set()
        for rel, args in self.atoms:
            if rel == EQUALITY:
                continue
            for alt in itertools.product(*(members[cls[a]] for a in args)):
                closed.add((rel, alt))
        for ms in members.values():
            for x, y in itertools.product(ms, repeat=2):
                if x != y:
                    closed.add((EQUALITY, (x, y)))
        object.__setattr__(self, "atoms", frozenset(closed))
        object.__setattr__(self, "_cls", cls)

    @property
    def representatives(self) -> tuple[str, ...]:
        return tuple(v for v in self.variables if self._cls[v] == v)

    def presented(self) -> tuple[Structure, tuple[int, ...]]:
        """The structure F⟨x̄|φ⟩ on the variable classes, and the class
        index of every variable."""
        reps = self.representatives
        idx = {r: i for i, r in enumerate(reps)}
        of = tuple(idx[self._cls[v]] for v in self.variables)
        pos = {v: i for i, v in enumerate(self.variables)}
        tables: dict = {name: set() for name in self.signature.names}
        for rel, args in self.atoms:
            if rel != EQUALITY:
                tables[rel].add(tuple(of[pos[a]] for a in args))
        return Structure(self.signature, len(reps), tables), of

    def holds(self, rel: str, args) -> bool:
        return (rel, tuple(args)) in self.atoms


def _atom(rel: str, args) -> Formula:
    if rel == EQUALITY:
        return eq(*args)
    return Atom(rel, tuple(args))


def emb_formula(d: TupleDiagram) -> Formula:
    """⋀ ¬β over the atoms β false in the presented structure, including
    the equalities between distinct variable classes."""
    reps = d.representatives
    lits = []
    for name, arity in d.signature.relations:
        for args in itertools.product(reps, repeat=arity):
            if not d.holds(name, args):
                lits.append(neg(Atom(name, args)))
    for x, y in itertools.combinations(reps, 2):
        lits.append(neg(eq(x, y)))
    return conj(lits)


def diagram_formula(d: TupleDiagram) -> Formula:
    """The positive diagram itself, as a conjunction."""
    return conj([_atom(rel, args) for rel, args in sorted(d.atoms)])


# --- Hintikka formulas ----------------------------------------------------------


@dataclass(frozen=True)
class HintikkaRequest:
    spec: ComonadSpec
    structure: Structure
    node: object
    shape: PathShape | None
    rank: int


class HintikkaSynthesizer:
    """Builds Θ[m, Q, r] for the path nodes m of the unravelling of M.

    Memo tables live on the instance, so one synthesizer per structure
    shares subformulas between nodes and ranks.
    """

    def __init__(self, spec: ComonadSpec, m: Structure, max_rank: int = 16):
        self.spec = spec
        self.m = m
        self.a = unravel(spec, m)
        self.tree = self.a.tree
        self.signature = self.a.carrier.signature
        self.identity = self.signature.identity
        self.max_rank = max_rank
        self.unary = [n for n, ar in self.signature.relations if ar == 1]
        self.binary = [n for n, ar in self.signature.relations if ar == 2]
        self._theta: dict = {}
        self._ext: dict = {}
        self._step: dict = {}

    # atoms a one-step extension may add, each touching the new index
    def _live(self, shape: PathShape) -> list[int]:
        """Old indices still live once the last index of ``shape`` is placed."""
        j = shape.length - 1
        if self.spec.kind != "pebble":
            return list(range(j))
        peb = shape.pebbles
        return [i for i in range(j) if peb[i] not in peb[i + 1:]]

    def _potential(self, shape: PathShape) -> list[tuple]:
        j = shape.length - 1
        if self.spec.kind == "modal":
            return [(u, (j,)) for u in self.unary]
        idx = self._live(shape) + [j]
        out = []
        for name, arity in self.signature.relations:
            for t in itertools.product(idx, repeat=arity):
                if j in t:
                    out.append((name, t))
        return out

    def _formula_of(self, rel: str, t) -> Formula:
        vs = tuple(var(i) for i in t)
        if rel == self.identity:
            return eq(*vs)
        return Atom(rel, vs)

    def step(self, shape: PathShape) -> Formula:
        """Profile and embedding condition for the last index of ``shape``."""
        hit = self._step.get(shape)
        if hit is not None:
            return hit
        j = shape.length - 1
        lits = []
        if self.spec.kind == "modal" and j > 0:
            labels = [r for r, t in shape.atoms if t == (j - 1, j) and r in self.binary]
            lits += [self._formula_of(r, (j - 1, j)) for r in labels]
        for rel, t in self._potential(shape):
            f = self._formula_of(rel, t)
            lits.append(f if (rel, t) in shape.atoms else neg(f))
        out = conj(lits)
        self._step[shape] = out
        return out

    def extensions(self, shape: PathShape) -> list[PathShape]:
        """One-step extensions Q' of Q, one per isomorphism type that can
        occur as a path domain of an unravelling."""
        hit = self._ext.get(shape)
        if hit is not None:
            return hit
        out: list[PathShape] = []
        j = shape.length
        if j < self.spec.bound:
            if self.spec.kind == "modal":
                for label in self.binary:
                    for bits in itertools.product((False, True), repeat=len(self.unary)):
                        new = {(label, (j - 1, j))}
                        new |= {(u, (j,)) for u, b in zip(self.unary, bits) if b}
                        out.append(shape.extend(new))
            else:
                pebbles = [None] if self.spec.kind == "ef" else range(1, self.spec.k + 1)
                for p in pebbles:
                    probe = shape.extend((), p)
                    out.extend(self._atom_extensions(shape, probe, p))
        self._ext[shape] = out
        return out

    def _atom_extensions(self, shape: PathShape, probe: PathShape, p) -> list[PathShape]:
        j = shape.length
        potential = self._potential(probe)
        if self.identity is None:
            return [
                shape.extend([a for a, b in zip(potential, bits) if b], p)
                for bits in itertools.product((False, True), repeat=len(potential))
            ]
        live = self._live(probe)
        ident = self.identity
        rep = {}
        for i in live:
            rep[i] = next((l for l in live if l <= i and (ident, (l, i)) in shape.atoms), i)
        out = []
        # the new element repeats a live one: every atom is copied
        for c in sorted(set(rep.values())):
            sub = lambda t: tuple(c if x == j else x for x in t)  # noqa: E731
            out.append(shape.extend([(r, t) for r, t in potential if (r, sub(t)) in shape.atoms], p))
        # the new element is fresh: choose atoms against class representatives
        reps = sorted(set(rep.values()))
        rep[j] = j
        free = [
            (name, t) for name, arity in self.signature.relations if name != ident
            for t in itertools.product(reps + [j], repeat=arity) if j in t
        ]
        for bits in itertools.product((False, True), repeat=len(free)):
            chosen = {a for a, b in zip(free, bits) if b}
            new = [(ident, (j, j))] + [
                (r, t) for r, t in potential
                if r != ident and (r, tuple(rep[x] for x in t)) in chosen
            ]
            out.append(shape.extend(new, p))
        return out

    def theta(self, i: int, shape: PathShape, r: int) -> Formula:
        """Θ[m, Q, r] for the tree node with index ``i``."""
        if r < 0 or r > self.max_rank:
            raise ValueError(f"rank {r} outside 0..{self.max_rank}")
        key = (i, shape, r)
        hit = self._theta.get(key)
        if hit is not None:
            return hit
        tree = self.tree
        if tree.shape[i] != shape:
            out = FALSE
        elif r == 0:
            out = TRUE
        else:
            z = var(shape.length)
            ext = self.extensions(shape)
            allowed = set(ext)
            forth = []
            for c in tree.children[i]:
                q = tree.shape[c]
                if q in allowed:
                    forth.append(exists(z, conj(self.step(q), self.theta(c, q, r - 1))))
                else:
                    forth.append(FALSE)
            back = []
            for q in ext:
                answers = [self.theta(c, q, r - 1) for c in tree.children[i] if tree.shape[c] == q]
                back.append(forall(z, disj([neg(self.step(q))] + answers)))
            out = conj(forth + back)
        self._theta[key] = out
        return out

    def theta_at(self, node, shape: PathShape | None, r: int) -> Formula:
        i = self.tree.node(node)
        return self.theta(i, self.tree.shape[i] if shape is None else shape, r)

    def root_sentence(self, r: int) -> Formula:
        root = self.tree.shape[0]
        body = self.theta(0, root, r)
        if self.spec.kind != "modal":
            return body
        # the root path is the point: pin its atoms to z1
        lits = [Atom(u, (var(0),)) if (u, (0,)) in root.atoms else neg(Atom(u, (var(0),)))
                for u in self.unary]
        return conj(lits + [body])


def hintikka_theta(req: HintikkaRequest) -> Formula:
    return HintikkaSynthesizer(req.spec, req.structure).theta_at(req.node, req.shape, req.rank)


def root_hintikka_sentence(spec: ComonadSpec, m: Structure, r: int) -> Formula:
    """Θ at the root pair.  For the modal comonad the result has the single
    free variable z1, read as the point."""
    return HintikkaSynthesizer(spec, m).root_sentence(r)


def root_assignment(spec: ComonadSpec, n: Structure) -> dict:
    return {var(0): n.point} if spec.kind == "modal" else {}


def play_tuple(spec: ComonadSpec, play) -> tuple[int, ...]:
    """Elements of a play, in order: the tuple that realizes its path."""
    if spec.kind == "ef":
        return tuple(play)
    return tuple(x for _, x in play)


def distinguishing_sentence(spec: ComonadSpec, m: Structure, n: Structure):
    """(sentence, r) with r least such that the root pair is not in Rk(r),
    or None when Duplicator wins."""
    g = Game(unravel(spec, m), unravel(spec, n))
    rho = g.rank_index(0, 0)
    if rho == TOP:
        return None
    r = rho + 1
    return root_hintikka_sentence(spec, m, r), r
