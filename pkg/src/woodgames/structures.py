"""Finite relational structures over a mono-sorted relational signature.

Universes are always ``range(size)``; relation tables are frozensets of
int tuples.  Everything here is immutable once constructed.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Sequence

IDENTITY = "I"


class StructureError(ValueError):
    """Raised for malformed structures, signatures or structure files."""


@dataclass(frozen=True)
class Signature:
    """Relation symbols with arities.

    ``identity`` names the binary symbol read as equality (the expanded
    signature with I).  ``transition`` marks a modal vocabulary; every
    binary symbol of a modal signature is a transition relation and
    ``transition`` names the distinguished one.
    """

    relations: tuple[tuple[str, int], ...]
    identity: str | None = None
    transition: str | None = None

    def __post_init__(self):
        rels = tuple(sorted((str(n), int(a)) for n, a in self.relations))
        object.__setattr__(self, "relations", rels)
        names = [n for n, _ in rels]
        if len(set(names)) != len(names):
            raise StructureError("duplicate relation symbol")
        for name, arity in rels:
            if arity < 1:
                raise StructureError(f"arity of {name!r} must be positive")
            if not name or name in ("=", "and", "or", "not", "exists", "forall") or any(
                c in name for c in "() \t\n"
            ):
                raise StructureError(f"bad relation name {name!r}")
        ar = dict(rels)
        if self.identity is not None and ar.get(self.identity) != 2:
            raise StructureError("identity symbol must be a declared binary relation")
        if self.transition is not None:
            if ar.get(self.transition) != 2:
                raise StructureError("transition symbol must be a declared binary relation")
            if any(a > 2 for a in ar.values()):
                raise StructureError("modal signatures only allow unary and binary symbols")
            if self.identity is not None:
                raise StructureError("modal signatures carry no identity symbol")

    @classmethod
    def of(cls, identity=None, transition=None, **arities: int) -> "Signature":
        return cls(tuple(arities.items()), identity=identity, transition=transition)

    @property
    def modal(self) -> bool:
        return self.transition is not None

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.relations)

    def arity(self, name: str) -> int:
        for n, a in self.relations:
            if n == name:
                return a
        raise StructureError(f"unknown relation symbol {name!r}")

    def without_identity(self) -> "Signature":
        return Signature(
            tuple((n, a) for n, a in self.relations if n != self.identity),
            transition=self.transition,
        )

    def with_identity(self, name: str = IDENTITY) -> "Signature":
        if self.identity is not None or name in self.names:
            raise StructureError("signature already contains I")
        return Signature(self.relations + ((name, 2),), identity=name)


@dataclass(frozen=True, eq=False)
class Structure:
    signature: Signature
    size: int
    relations: Mapping[str, frozenset] = field(default_factory=dict)
    point: int | None = None

    def __post_init__(self):
        if self.size < 0:
            raise StructureError("negative size")
        tables = {}
        for name, arity in self.signature.relations:
            rows = self.relations.get(name, ())
            table = set()
            for row in rows:
                row = tuple(int(x) for x in row)
                if len(row) != arity:
                    raise StructureError(f"tuple arity mismatch in {name!r}: {list(row)}")
                if any(x < 0 or x >= self.size for x in row):
                    raise StructureError(f"out-of-range element in {name!r}: {list(row)}")
                table.add(row)
            tables[name] = frozenset(table)
        extra = set(self.relations) - set(tables)
        if extra:
            raise StructureError(f"undeclared relation symbols {sorted(extra)}")
        object.__setattr__(self, "relations", MappingProxyType(tables))
        if self.point is not None and not 0 <= self.point < self.size:
            raise StructureError("out-of-range point")
        if self.signature.modal and self.size > 0 and self.point is None:
            raise StructureError("missing point for modal structure")

    # equality is structural, so structures can key caches
    def _key(self):
        return (
            self.signature,
            self.size,
            tuple(tuple(sorted(self.relations[n])) for n in self.signature.names),
            self.point,
        )

    def __eq__(self, other):
        return isinstance(other, Structure) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        rels = ", ".join(f"{n}={sorted(self.relations[n])}" for n in self.signature.names)
        pt = f", point={self.point}" if self.point is not None else ""
        return f"Structure(size={self.size}, {rels}{pt})"

    @property
    def universe(self) -> range:
        return range(self.size)

    def holds(self, name: str, args: Sequence[int]) -> bool:
        return tuple(args) in self.relations[name]

    def tuples(self) -> Iterator[tuple[str, tuple[int, ...]]]:
        for name in self.signature.names:
            for row in sorted(self.relations[name]):
                yield name, row

    def degree_profile(self, x: int) -> tuple:
        """Per relation and argument position, how often ``x`` occurs."""
        prof = []
        for name, arity in self.signature.relations:
            counts = [0] * arity
            for row in self.relations[name]:
                for i, y in enumerate(row):
                    if y == x:
                        counts[i] += 1
            prof.append(tuple(counts))
        return tuple(prof)


def structure(signature: Signature, size: int, point=None, **tables) -> Structure:
    """Shorthand constructor: ``structure(sig, 3, R=[(0, 1)])``."""
    return Structure(signature, size, tables, point)


@dataclass(frozen=True)
class Homomorphism:
    source: Structure
    target: Structure
    mapping: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "mapping", tuple(self.mapping))
        if not is_homomorphism(self.mapping, self.source, self.target):
            raise StructureError("map is not a homomorphism")

    def __call__(self, x: int) -> int:
        return self.mapping[x]

    def then(self, other: "Homomorphism") -> "Homomorphism":
        """Composite ``other . self``."""
        return Homomorphism(self.source, other.target, tuple(other.mapping[y] for y in self.mapping))

    @property
    def injective(self) -> bool:
        return len(set(self.mapping)) == len(self.mapping)

    @property
    def surjective(self) -> bool:
        return set(self.mapping) == set(self.target.universe)

    @classmethod
    def identity(cls, m: Structure) -> "Homomorphism":
        return cls(m, m, tuple(m.universe))


@dataclass(frozen=True)
class PartialIso:
    left: Structure
    right: Structure
    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(tuple(p) for p in self.pairs))
        if not is_partial_isomorphism(self.left, self.right, self.pairs):
            raise StructureError("pairs do not form a partial isomorphism")


def _as_map(h, size: int) -> tuple[int, ...]:
    if isinstance(h, Homomorphism):
        return h.mapping
    if isinstance(h, Mapping):
        return tuple(h[x] for x in range(size))
    return tuple(h)


def _check_same_signature(m: Structure, n: Structure):
    if m.signature != n.signature:
        raise StructureError("signature mismatch")


def is_homomorphism(h, m: Structure, n: Structure) -> bool:
    _check_same_signature(m, n)
    f = _as_map(h, m.size)
    if len(f) != m.size or any(not 0 <= y < n.size for y in f):
        raise StructureError("map must be total on the source and land in the target")
    for name in m.signature.names:
        target = n.relations[name]
        for row in m.relations[name]:
            if tuple(f[x] for x in row) not in target:
                return False
    if m.point is not None and n.point is not None and f[m.point] != n.point:
        return False
    return True


def reflects(f: Sequence[int], m: Structure, n: Structure) -> bool:
    """Every tuple of ``n`` over the image comes from a tuple of ``m``."""
    inverse: dict[int, list[int]] = {}
    for x, y in enumerate(f):
        inverse.setdefault(y, []).append(x)
    for name in m.signature.names:
        source = m.relations[name]
        for row in n.relations[name]:
            if all(y in inverse for y in row):
                for pre in itertools.product(*(inverse[y] for y in row)):
                    if pre not in source:
                        return False
    return True


def is_embedding(h: Homomorphism) -> bool:
    """Injective and reflecting every relation table."""
    return h.injective and reflects(h.mapping, h.source, h.target)


def induced_substructure(m: Structure, subset: Iterable[int]) -> tuple[Structure, Homomorphism]:
    elems = sorted(set(subset))
    if any(not 0 <= x < m.size for x in elems):
        raise StructureError("subset is not contained in the universe")
    index = {x: i for i, x in enumerate(elems)}
    tables = {
        name: [tuple(index[x] for x in row) for row in rows if all(x in index for x in row)]
        for name, rows in m.relations.items()
    }
    point = index.get(m.point) if m.point is not None else None
    sig = m.signature
    if sig.modal and elems and point is None:
        # a substructure missing the point is no longer pointed
        sig = Signature(sig.relations)
    sub = Structure(sig, len(elems), tables, point)
    if sig != m.signature:
        return sub, None
    return sub, Homomorphism(sub, m, tuple(elems))


def factorize(h: Homomorphism) -> tuple[Homomorphism, Homomorphism]:
    """(quotient, embedding) factorisation through the image of ``h``.

    The middle object carries the relations of the target restricted to
    the image, so the second leg reflects them.
    """
    image = sorted(set(h.mapping))
    middle, incl = induced_substructure(h.target, image)
    if incl is None:
        raise StructureError("image misses the point of a pointed target")
    index = {y: i for i, y in enumerate(image)}
    quotient = Homomorphism(h.source, middle, tuple(index[y] for y in h.mapping))
    return quotient, incl


def is_partial_isomorphism(m: Structure, n: Structure, pairs) -> bool:
    pairs = [tuple(p) for p in pairs]
    for a, b in pairs:
        if not (0 <= a < m.size and 0 <= b < n.size):
            raise StructureError("element out of range")
    fwd: dict[int, int] = {}
    bwd: dict[int, int] = {}
    for a, b in pairs:
        if fwd.setdefault(a, b) != b or bwd.setdefault(b, a) != a:
            return False
    dom = sorted(fwd)
    for name, arity in m.signature.relations:
        for row in itertools.product(dom, repeat=arity):
            if (row in m.relations[name]) != (tuple(fwd[x] for x in row) in n.relations[name]):
                return False
    return True


def expand_identity(m: Structure, name: str = IDENTITY) -> Structure:
    sig = m.signature.with_identity(name)
    tables = dict(m.relations)
    tables[name] = [(x, x) for x in m.universe]
    return Structure(sig, m.size, tables, m.point)


def identity_classes(m: Structure) -> list[int]:
    """Class index per element for the equivalence generated by I."""
    parent = list(m.universe)

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in m.relations[m.signature.identity]:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    roots = sorted({find(x) for x in m.universe})
    index = {r: i for i, r in enumerate(roots)}
    return [index[find(x)] for x in m.universe]


def collapse_identity(m: Structure) -> Structure:
    if m.signature.identity is None:
        raise StructureError("structure has no identity symbol")
    cls = identity_classes(m)
    sig = m.signature.without_identity()
    tables = {
        name: {tuple(cls[x] for x in row) for row in m.relations[name]}
        for name in sig.names
    }
    point = cls[m.point] if m.point is not None else None
    return Structure(sig, len(set(cls)), tables, point)


def find_isomorphism(m: Structure, n: Structure) -> tuple[int, ...] | None:
    """Backtracking search for an isomorphism, pruned by degree profiles."""
    if m.signature != n.signature or m.size != n.size:
        return None
    if any(len(m.relations[r]) != len(n.relations[r]) for r in m.signature.names):
        return None
    pm = [m.degree_profile(x) for x in m.universe]
    pn = [n.degree_profile(y) for y in n.universe]
    if sorted(pm) != sorted(pn):
        return None
    candidates = [[y for y in n.universe if pn[y] == pm[x]] for x in m.universe]
    if m.point is not None or n.point is not None:
        if m.point is None or n.point is None:
            return None
        if n.point not in candidates[m.point]:
            return None
        candidates[m.point] = [n.point]
    order = sorted(m.universe, key=lambda x: len(candidates[x]))
    assign: dict[int, int] = {}
    used: set[int] = set()

    def consistent(x, y):
        assign[x] = y
        ok = True
        for name, arity in m.signature.relations:
            for row in itertools.product(assign, repeat=arity):
                if x not in row:
                    continue
                if (row in m.relations[name]) != (tuple(assign[z] for z in row) in n.relations[name]):
                    ok = False
                    break
            if not ok:
                break
        if not ok:
            del assign[x]
        return ok

    def search(i):
        if i == len(order):
            return True
        x = order[i]
        for y in candidates[x]:
            if y in used or not consistent(x, y):
                continue
            used.add(y)
            if search(i + 1):
                return True
            used.discard(y)
            del assign[x]
        return False

    if search(0):
        return tuple(assign[x] for x in m.universe)
    return None


def are_isomorphic(m: Structure, n: Structure) -> bool:
    return find_isomorphism(m, n) is not None


def homomorphisms(m: Structure, n: Structure) -> Iterator[tuple[int, ...]]:
    """All homomorphisms ``m -> n`` by brute force over total maps."""
    for f in itertools.product(range(n.size), repeat=m.size):
        if is_homomorphism(f, m, n):
            yield f


def pullback(f: Homomorphism, g: Homomorphism) -> tuple[Structure, Homomorphism, Homomorphism]:
    """Pullback of a cospan ``X -f-> Y <-g- S``, computed as in Set."""
    if f.target != g.target:
        raise StructureError("not a cospan")
    x, s = f.source, g.source
    pairs = [(a, b) for a in x.universe for b in s.universe if f(a) == g(b)]
    index = {p: i for i, p in enumerate(pairs)}
    tables = {}
    for name, arity in x.signature.relations:
        rows = []
        for row in itertools.product(range(len(pairs)), repeat=arity):
            left = tuple(pairs[i][0] for i in row)
            right = tuple(pairs[i][1] for i in row)
            if left in x.relations[name] and right in s.relations[name]:
                rows.append(row)
        tables[name] = rows
    point = None
    if x.point is not None and s.point is not None:
        point = index.get((x.point, s.point))
    sig = x.signature if (point is not None or not x.signature.modal or not pairs) else Signature(
        x.signature.relations
    )
    p = Structure(sig, len(pairs), tables, point)
    if sig != x.signature:
        raise StructureError("pullback of pointed structures lost the point")
    return (
        p,
        Homomorphism(p, x, tuple(a for a, _ in pairs)),
        Homomorphism(p, s, tuple(b for _, b in pairs)),
    )


# --- serialization -------------------------------------------------------


def structure_to_dict(m: Structure) -> dict:
    out: dict = {"size": m.size, "relations": {}}
    for name, arity in m.signature.relations:
        out["relations"][name] = {
            "arity": arity,
            "tuples": [list(row) for row in sorted(m.relations[name])],
        }
    if m.point is not None:
        out["point"] = m.point
    flags = {}
    if m.signature.identity is not None:
        flags["identity"] = m.signature.identity
    if m.signature.transition is not None:
        flags["transition"] = m.signature.transition
    if flags:
        out["signature_flags"] = flags
    return out


def structure_from_dict(obj) -> Structure:
    if not isinstance(obj, dict):
        raise StructureError("malformed structure: expected an object")
    unknown = set(obj) - {"size", "relations", "point", "signature_flags"}
    if unknown - {"parent", "bound", "flavor", "pebbles", "pebbling"}:
        raise StructureError(f"malformed structure: unknown fields {sorted(unknown)}")
    size = obj.get("size")
    if not isinstance(size, int) or isinstance(size, bool) or size < 0:
        raise StructureError("malformed structure: 'size' must be a natural number")
    rels = obj.get("relations", {})
    if not isinstance(rels, dict):
        raise StructureError("malformed structure: 'relations' must be an object")
    arities, tables = [], {}
    for name, spec in rels.items():
        if not isinstance(spec, dict) or "arity" not in spec:
            raise StructureError(f"malformed relation {name!r}")
        arity = spec["arity"]
        if not isinstance(arity, int) or isinstance(arity, bool):
            raise StructureError(f"malformed arity for {name!r}")
        rows = spec.get("tuples", [])
        if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
            raise StructureError(f"malformed tuples for {name!r}")
        for r in rows:
            if not all(isinstance(x, int) and not isinstance(x, bool) for x in r):
                raise StructureError(f"malformed tuple in {name!r}: {r}")
        arities.append((name, arity))
        tables[name] = rows
    flags = obj.get("signature_flags", {}) or {}
    if not isinstance(flags, dict) or set(flags) - {"identity", "transition"}:
        raise StructureError("malformed signature_flags")
    sig = Signature(tuple(arities), identity=flags.get("identity"), transition=flags.get("transition"))
    point = obj.get("point")
    if point is not None and (not isinstance(point, int) or isinstance(point, bool)):
        raise StructureError("malformed point")
    return Structure(sig, size, tables, point)


def dumps_structure(m: Structure) -> str:
    return json.dumps(structure_to_dict(m), separators=(",", ":"), ensure_ascii=False)


def parse_structure(text: str) -> Structure:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StructureError(f"malformed structure text: {exc}") from exc
    return structure_from_dict(obj)


# --- corpora -------------------------------------------------------------


def all_structures(signature: Signature, size: int) -> Iterator[Structure]:
    """Every structure with the given universe size, in a fixed order."""
    slots = [
        (name, row)
        for name, arity in signature.relations
        for row in itertools.product(range(size), repeat=arity)
    ]
    for bits in itertools.product((0, 1), repeat=len(slots)):
        tables: dict[str, list] = {name: [] for name in signature.names}
        for bit, (name, row) in zip(bits, slots):
            if bit:
                tables[name].append(row)
        if signature.modal and size > 0:
            yield Structure(signature, size, tables, 0)
        else:
            yield Structure(signature, size, tables)


def canonical_form(m: Structure) -> tuple:
    """Lexicographically least relabelling; equal iff isomorphic."""
    best = None
    for perm in itertools.permutations(range(m.size)):
        if m.point is not None and perm[m.point] != 0:
            continue
        key = tuple(
            tuple(sorted(tuple(perm[x] for x in row) for row in m.relations[n]))
            for n in m.signature.names
        )
        if best is None or key < best:
            best = key
    return (m.signature, m.size, best)


def isomorphism_classes(signature: Signature, max_size: int) -> list[Structure]:
    """One representative per isomorphism class, sizes 0..max_size.

    Structures are encoded as bitmasks over relation slots; each unseen
    mask contributes its whole orbit under relabelling, and the mask
    itself (the least in its orbit, by scan order) is the representative.
    """
    reps = []
    for size in range(max_size + 1):
        slots = [
            (name, row)
            for name, arity in signature.relations
            for row in itertools.product(range(size), repeat=arity)
        ]
        where = {s: i for i, s in enumerate(slots)}
        perms = [
            p for p in itertools.permutations(range(size))
            if not (signature.modal and size and p[0] != 0)
        ]
        moves = [[where[(n, tuple(p[x] for x in row))] for n, row in slots] for p in perms]
        seen = bytearray(1 << len(slots))
        for mask in range(1 << len(slots)):
            if seen[mask]:
                continue
            bits = [i for i in range(len(slots)) if mask >> i & 1]
            for mv in moves:
                img = 0
                for i in bits:
                    img |= 1 << mv[i]
                seen[img] = 1
            tables: dict = {name: [] for name in signature.names}
            for i in bits:
                name, row = slots[i]
                tables[name].append(row)
            point = 0 if signature.modal and size else None
            reps.append(Structure(signature, size, tables, point))
    return reps
