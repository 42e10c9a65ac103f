"""Forest-ordered structures and their path trees.

A path embedding into a forest-ordered structure ``a`` is always, up to
isomorphism, the inclusion of some down-set ``↓u``.  We therefore name
path embeddings by a node id: ``ROOT`` for the least one (empty domain,
except in the modal flavor where the root element itself is least) or an
element ``u`` of the carrier.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

from .structures import (
    Structure,
    StructureError,
    is_homomorphism,
    reflects,
    structure_from_dict,
    structure_to_dict,
)

ROOT = None
FLAVORS = ("plain", "E", "P", "M")


@dataclass(frozen=True)
class PathShape:
    """Isomorphism type of a path: its length, atoms by chain index and
    (pebble flavor) the pebble placed at each index."""

    length: int
    atoms: frozenset
    pebbles: tuple | None = None

    def extend(self, atoms, pebble=None) -> "PathShape":
        peb = None if self.pebbles is None else self.pebbles + (pebble,)
        return PathShape(self.length + 1, self.atoms | frozenset(atoms), peb)

    def to_dict(self) -> dict:
        out = {
            "length": self.length,
            "atoms": [[r, list(t)] for r, t in sorted(self.atoms)],
        }
        if self.pebbles is not None:
            out["pebbles"] = list(self.pebbles)
        return out

    @classmethod
    def from_dict(cls, obj) -> "PathShape":
        try:
            atoms = frozenset((str(r), tuple(int(i) for i in t)) for r, t in obj["atoms"])
            peb = obj.get("pebbles")
            shape = cls(int(obj["length"]), atoms, None if peb is None else tuple(peb))
        except (KeyError, TypeError, ValueError) as exc:
            raise StructureError(f"malformed path shape: {exc}") from None
        if any(i < 0 or i >= shape.length for _, t in atoms for i in t):
            raise StructureError("path shape atom index out of range")
        if peb is not None and len(peb) != shape.length:
            raise StructureError("path shape pebble list has the wrong length")
        return shape


@dataclass(frozen=True, eq=False)
class ForestStructure:
    carrier: Structure
    parent: tuple
    bound: int | None = None
    flavor: str = "E"
    pebbles: int | None = None
    pebbling: tuple | None = None
    # optional names for carrier elements, e.g. the plays of an unravelling
    labels: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "parent", tuple(self.parent))
        if len(self.parent) != self.carrier.size:
            raise StructureError("parent map must list every element")
        if self.flavor not in FLAVORS:
            raise StructureError(f"unknown flavor {self.flavor!r}")
        if self.bound is not None and self.bound < 1:
            raise StructureError("bound must be positive or unbounded")
        if self.pebbling is not None:
            object.__setattr__(self, "pebbling", tuple(self.pebbling))
        if self.flavor == "P":
            if self.pebbles is None or self.pebbling is None:
                raise StructureError("flavor P needs a pebble count and a pebbling")
            if len(self.pebbling) != self.carrier.size:
                raise StructureError("pebbling must be total")

    @property
    def size(self) -> int:
        return self.carrier.size

    def roots(self) -> list[int]:
        return [x for x, p in enumerate(self.parent) if p is None]

    @cached_property
    def depth(self) -> tuple[int, ...]:
        """|↓x| per element; raises on cycles or dangling parents."""
        out = [0] * self.size
        for x in range(self.size):
            seen = set()
            y, d = x, 0
            while y is not None:
                if y in seen or not 0 <= y < self.size:
                    raise StructureError("parent map is not a forest")
                seen.add(y)
                d += 1
                y = self.parent[y]
            out[x] = d
        return tuple(out)

    def down(self, x: int) -> tuple[int, ...]:
        """The chain ↓x listed from its root."""
        chain = []
        while x is not None:
            chain.append(x)
            x = self.parent[x]
        return tuple(reversed(chain))

    def leq(self, x: int, y: int) -> bool:
        d = self.depth
        if d[x] > d[y]:
            return False
        while d[y] > d[x]:
            y = self.parent[y]
        return x == y

    def comparable(self, x: int, y: int) -> bool:
        return self.leq(x, y) or self.leq(y, x)

    @cached_property
    def tree(self) -> "PathTree":
        return PathTree(self)


def gaifman_edges(m: Structure):
    for _, row in m.tuples():
        for i, x in enumerate(row):
            for y in row[i + 1:]:
                if x != y:
                    yield x, y


def validate_wooded(a: ForestStructure) -> bool:
    try:
        depth = a.depth
    except StructureError:
        return False
    if a.bound is not None and any(d > a.bound for d in depth):
        return False
    m = a.carrier
    if a.flavor in ("E", "P"):
        if any(not a.comparable(x, y) for x, y in gaifman_edges(m)):
            return False
    if a.flavor == "P":
        k = a.pebbles
        if k is None or k < 1 or any(not 1 <= p <= k for p in a.pebbling):
            return False
        for x, y in gaifman_edges(m):
            lo, hi = (x, y) if a.leq(x, y) else (y, x)
            z = hi
            while z != lo:
                if a.pebbling[z] == a.pebbling[lo]:
                    return False
                z = a.parent[z]
    if a.flavor == "M":
        sig = m.signature
        if m.size == 0 or not sig.modal:
            return False
        roots = a.roots()
        if roots != [m.point]:
            return False
        binary = [n for n, ar in sig.relations if ar == 2]
        count: dict[tuple[int, int], int] = {}
        for name in binary:
            for pair in m.relations[name]:
                count[pair] = count.get(pair, 0) + 1
        for x, p in enumerate(a.parent):
            if p is not None and count.pop((p, x), 0) != 1:
                return False
        if count:
            return False
    return True


class PathTree:
    """Nodes of the path tree, indexed 0..N-1 with node 0 the root.

    ``ident[i]`` is the public node id (``ROOT`` or an element),
    ``chain[i]`` the elements of the down-set in order, ``shape[i]`` its
    isomorphism type and ``children[i]`` the covering successors.
    """

    def __init__(self, a: ForestStructure):
        if not validate_wooded(a):
            raise StructureError("forest structure fails its flavor conditions")
        self.owner = a
        m = a.carrier
        depth = a.depth
        kids: dict = {x: [] for x in range(a.size)}
        kids[ROOT] = []
        for x, p in enumerate(a.parent):
            kids[p].append(x)
        attached: dict[int, list] = {x: [] for x in range(a.size)}
        for name, row in m.tuples():
            deep = max(row, key=lambda x: depth[x])
            if all(a.leq(x, deep) for x in row):
                attached[deep].append((name, tuple(depth[x] - 1 for x in row)))

        pebbled = a.flavor == "P"
        self.ident: list = []
        self.chain: list[tuple] = []
        self.shape: list[PathShape] = []
        self.children: list[list[int]] = []
        self.index: dict = {}
        self.parent: list = []

        def add(ident, chain, shape, parent):
            i = len(self.ident)
            self.ident.append(ident)
            self.chain.append(chain)
            self.shape.append(shape)
            self.children.append([])
            self.parent.append(parent)
            self.index[ident] = i
            if parent is not None:
                self.children[parent].append(i)
            return i

        if a.flavor == "M":
            r = m.point
            start = [(r, add(r, (r,), PathShape(1, frozenset(attached[r])), None))]
        else:
            add(ROOT, (), PathShape(0, frozenset(), () if pebbled else None), None)
            start = [(ROOT, 0)]
        queue = list(start)
        while queue:
            nxt = []
            for x, i in queue:
                for y in sorted(kids[x]):
                    sh = self.shape[i].extend(attached[y], a.pebbling[y] if pebbled else None)
                    nxt.append((y, add(y, self.chain[i] + (y,), sh, i)))
            queue = nxt
        if len(self.ident) != a.size + (0 if a.flavor == "M" else 1):
            raise StructureError("modal carrier must be a single tree rooted at the point")

    def __len__(self):
        return len(self.ident)

    def depth(self, i: int) -> int:
        return len(self.chain[i])

    def node(self, ident) -> int:
        try:
            return self.index[ident]
        except KeyError:
            raise StructureError(f"no path node {ident!r}") from None

    def leq(self, i: int, j: int) -> bool:
        ci, cj = self.chain[i], self.chain[j]
        return len(ci) <= len(cj) and cj[: len(ci)] == ci

    def is_chain(self) -> bool:
        return all(len(c) <= 1 for c in self.children)


@dataclass(frozen=True)
class PathNode:
    owner: ForestStructure
    id: object

    def __repr__(self):
        return f"PathNode({'root' if self.id is ROOT else self.id})"


def path_nodes(a: ForestStructure) -> list[PathNode]:
    """All path nodes, root first, in breadth-first order."""
    return [PathNode(a, ident) for ident in a.tree.ident]


def node_children(node: PathNode) -> list[PathNode]:
    t = node.owner.tree
    return [PathNode(node.owner, t.ident[j]) for j in t.children[t.node(node.id)]]


def path_domain(node: PathNode) -> Structure:
    """Induced substructure on ↓u, indexed along the chain."""
    a = node.owner
    m = a.carrier
    chain = a.tree.chain[a.tree.node(node.id)]
    pos = {x: i for i, x in enumerate(chain)}
    tables = {
        n: [tuple(pos[x] for x in row) for row in m.relations[n] if all(x in pos for x in row)]
        for n in m.signature.names
    }
    point = pos.get(m.point) if m.point is not None else None
    return Structure(m.signature, len(chain), tables, point)


def path_forest(node: PathNode) -> ForestStructure:
    """↓u as a path in the same wooded category."""
    a = node.owner
    chain = a.tree.chain[a.tree.node(node.id)]
    dom = path_domain(node)
    parent = (None,) + tuple(range(len(chain) - 1)) if chain else ()
    peb = tuple(a.pebbling[x] for x in chain) if a.flavor == "P" else None
    return ForestStructure(dom, parent, a.bound, a.flavor, a.pebbles, peb)


def node_shape(node: PathNode) -> PathShape:
    t = node.owner.tree
    return t.shape[t.node(node.id)]


# --- morphisms ------------------------------------------------------------


def _check_flavors(a: ForestStructure, b: ForestStructure):
    if a.flavor != b.flavor or a.carrier.signature != b.carrier.signature:
        raise StructureError("flavor or signature mismatch")


def is_forest_morphism(f: Sequence[int], a: ForestStructure, b: ForestStructure) -> bool:
    """Roots to roots and f(parent x) = parent(f x)."""
    f = tuple(f)
    if len(f) != a.size or any(not 0 <= y < b.size for y in f):
        return False
    for x, p in enumerate(a.parent):
        q = b.parent[f[x]]
        if (p is None) != (q is None):
            return False
        if p is not None and f[p] != q:
            return False
    return True


def is_morphism(f: Sequence[int], a: ForestStructure, b: ForestStructure) -> bool:
    """Morphism of the wooded category: forest morphism, homomorphism of
    carriers and, for flavor P, pebbling preserved."""
    _check_flavors(a, b)
    f = tuple(f)
    if not is_forest_morphism(f, a, b):
        return False
    if not is_homomorphism(f, a.carrier, b.carrier):
        return False
    if a.flavor == "P" and any(a.pebbling[x] != b.pebbling[f[x]] for x in range(a.size)):
        return False
    return True


def is_wooded_embedding(f: Sequence[int], a: ForestStructure, b: ForestStructure) -> bool:
    _check_flavors(a, b)
    f = tuple(f)
    if not is_morphism(f, a, b):
        return False
    return len(set(f)) == len(f) and reflects(f, a.carrier, b.carrier)


def detect_path_embedding(f: Sequence[int], p: ForestStructure, a: ForestStructure) -> bool:
    """Embedding test on the underlying structure map of a path morphism."""
    if not p.tree.is_chain():
        raise StructureError("domain is not a path")
    f = tuple(f)
    return len(set(f)) == len(f) and reflects(f, p.carrier, a.carrier)


# --- file format -----------------------------------------------------------


def forest_to_dict(a: ForestStructure) -> dict:
    out = structure_to_dict(a.carrier)
    out["parent"] = {str(x): p for x, p in enumerate(a.parent) if p is not None}
    out["bound"] = "unbounded" if a.bound is None else a.bound
    out["flavor"] = a.flavor
    if a.pebbles is not None:
        out["pebbles"] = a.pebbles
    if a.pebbling is not None:
        out["pebbling"] = list(a.pebbling)
    return out


def forest_from_dict(obj) -> ForestStructure:
    carrier = structure_from_dict(obj)
    raw = obj.get("parent", {})
    if not isinstance(raw, dict):
        raise StructureError("malformed parent map: expected an object")
    parent: list = [None] * carrier.size
    for key, p in raw.items():
        try:
            x = int(key)
        except ValueError:
            raise StructureError(f"malformed parent key {key!r}") from None
        if not 0 <= x < carrier.size or not isinstance(p, int) or not 0 <= p < carrier.size:
            raise StructureError(f"out-of-range element in parent map: {key} -> {p}")
        parent[x] = p
    bound = obj.get("bound", "unbounded")
    if bound == "unbounded":
        bound = None
    elif not isinstance(bound, int) or isinstance(bound, bool):
        raise StructureError("malformed bound")
    return ForestStructure(
        carrier, tuple(parent), bound, obj.get("flavor", "E"),
        obj.get("pebbles"), obj.get("pebbling"),
    )


def dumps_forest(a: ForestStructure) -> str:
    return json.dumps(forest_to_dict(a), separators=(",", ":"), ensure_ascii=False)


def morphisms(a: ForestStructure, b: ForestStructure):
    """Every morphism a → b of the wooded category, by tree backtracking."""
    _check_flavors(a, b)
    kids_b: dict = {}
    for y, q in enumerate(b.parent):
        kids_b.setdefault(q, []).append(y)
    order = sorted(range(a.size), key=lambda x: a.depth[x])
    f: list = [None] * a.size

    def go(i):
        if i == len(order):
            if is_morphism(f, a, b):
                yield tuple(f)
            return
        x = order[i]
        p = a.parent[x]
        for y in kids_b.get(None if p is None else f[p], []):
            if a.flavor == "P" and a.pebbling[x] != b.pebbling[y]:
                continue
            f[x] = y
            yield from go(i + 1)
        f[x] = None

    yield from go(0)
