import itertools
import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import SIG_LT, SIG_R, chain, edgeless, homs, structures
from woodgames.structures import (
    Homomorphism,
    Signature,
    Structure,
    StructureError,
    all_structures,
    are_isomorphic,
    canonical_form,
    collapse_identity,
    dumps_structure,
    expand_identity,
    factorize,
    find_isomorphism,
    homomorphisms,
    induced_substructure,
    is_embedding,
    is_homomorphism,
    is_partial_isomorphism,
    isomorphism_classes,
    parse_structure,
    pullback,
)

SIG_I = Signature.of(R=2, I=2, identity="I")


# --- parsing ----------------------------------------------------------------


def test_parse_two_chain():
    m = parse_structure('{"size":2,"relations":{"<":{"arity":2,"tuples":[[0,1]]}}}')
    assert m.size == 2
    assert m.relations["<"] == {(0, 1)}
    assert m == chain(2, SIG_LT, "<")


def test_parse_empty():
    m = parse_structure('{"size":0,"relations":{}}')
    assert m.size == 0 and m.signature.relations == ()


def test_parse_out_of_range():
    with pytest.raises(StructureError, match="out-of-range element"):
        parse_structure('{"size":3,"relations":{"R":{"arity":2,"tuples":[[0,5]]}}}')


def test_parse_missing_point_for_modal():
    text = '{"size":1,"relations":{"R":{"arity":2,"tuples":[]}},"signature_flags":{"transition":"R"}}'
    with pytest.raises(StructureError, match="missing point"):
        parse_structure(text)


def test_duplicates_are_dropped():
    m = parse_structure('{"size":2,"relations":{"R":{"arity":2,"tuples":[[0,1],[0,1]]}}}')
    assert m.relations["R"] == {(0, 1)}


@given(structures(max_size=4))
def test_roundtrip_is_bit_exact(m):
    text = dumps_structure(m)
    again = parse_structure(text)
    assert again == m
    assert dumps_structure(again) == text


def test_roundtrip_pointed_and_flags():
    sig = Signature.of(R=2, P=1, transition="R")
    m = Structure(sig, 2, {"R": [(0, 1)], "P": [(1,)]}, point=0)
    obj = json.loads(dumps_structure(m))
    assert obj["point"] == 0 and obj["signature_flags"] == {"transition": "R"}
    assert parse_structure(dumps_structure(m)) == m


# --- homomorphisms and embeddings --------------------------------------------


def test_identity_is_homomorphism():
    m = chain(3)
    assert is_homomorphism(tuple(m.universe), m, m)


def test_constant_map_from_chain_to_point_fails():
    assert not is_homomorphism((0, 0), chain(2), edgeless(1))


def test_edgeless_into_chain_is_hom_but_not_embedding():
    h = Homomorphism(edgeless(2), chain(2), (0, 1))
    assert not is_embedding(h)
    assert h.injective


def test_identity_is_embedding():
    assert is_embedding(Homomorphism.identity(chain(3)))


@given(structures(max_size=4), st.data())
def test_induced_inclusion_is_embedding(m, data):
    subset = data.draw(st.sets(st.integers(0, max(m.size - 1, 0))) if m.size else st.just(set()))
    sub, incl = induced_substructure(m, subset)
    assert sub.size == len(subset)
    assert is_embedding(incl)


def test_induced_three_chain_on_ends():
    sub, incl = induced_substructure(chain(3), {0, 2})
    assert sub.relations["R"] == {(0, 1)}
    assert incl.mapping == (0, 2)


def test_induced_full_and_empty():
    m = chain(3)
    assert induced_substructure(m, range(3))[0] == m
    assert induced_substructure(m, [])[0].size == 0


# --- factorization --------------------------------------------------------------


def test_factor_constant_map_into_chain():
    h = Homomorphism(edgeless(2), chain(2), (0, 0))
    q, e = factorize(h)
    assert q.target.size == 1
    assert q.target.relations["R"] == frozenset()
    assert e.mapping == (0,)


def test_factor_of_embedding_has_iso_quotient():
    _, incl = induced_substructure(chain(3), {0, 2})
    q, e = factorize(incl)
    assert are_isomorphic(q.source, q.target) and q.injective and q.surjective


def test_factor_of_surjection_has_iso_embedding():
    h = Homomorphism(edgeless(3), edgeless(2), (0, 1, 1))
    q, e = factorize(h)
    assert e.injective and e.surjective


@given(homs(max_size=4))
def test_factorization_laws(data):
    m, n, f = data
    h = Homomorphism(m, n, f)
    q, e = factorize(h)
    assert q.then(e).mapping == h.mapping
    assert q.surjective
    assert is_embedding(e)


@given(homs(max_size=3), st.data())
def test_lemma_composites(data, draw):
    m, n, f = data
    h = Homomorphism(m, n, f)
    # pick any g: N -> P out of N
    p = draw.draw(structures(min_size=1, max_size=3))
    gs = list(homomorphisms(n, p))
    if not gs:
        return
    g = Homomorphism(n, p, draw.draw(st.sampled_from(gs)))
    gf = h.then(g)
    if is_embedding(gf):
        assert is_embedding(h)
    if gf.surjective:
        assert g.surjective


@given(homs(max_size=3), st.data())
def test_pullback_of_embedding_is_embedding(data, draw):
    m, n, f = data
    g = Homomorphism(m, n, f)
    subset = draw.draw(st.sets(st.integers(0, n.size - 1)))
    _, incl = induced_substructure(n, subset)
    p, left, right = pullback(incl, g)
    assert is_embedding(right)
    for x in p.universe:
        assert incl(left(x)) == g(right(x))


# --- partial isomorphisms ---------------------------------------------------------


def test_partial_iso_examples():
    c2 = chain(2)
    assert is_partial_isomorphism(c2, c2, [])
    assert is_partial_isomorphism(c2, c2, [(0, 0)])
    assert not is_partial_isomorphism(edgeless(2), c2, [(0, 0), (1, 1)])


def test_partial_iso_rejects_non_injective():
    assert not is_partial_isomorphism(edgeless(2), edgeless(1), [(0, 0), (1, 0)])
    assert not is_partial_isomorphism(edgeless(1), edgeless(2), [(0, 0), (0, 1)])


@given(structures(min_size=1), structures(min_size=1), st.data())
def test_partial_iso_matches_induced_iso(m, n, data):
    k = data.draw(st.integers(0, min(m.size, n.size)))
    xs = data.draw(st.permutations(range(m.size)))[:k]
    ys = data.draw(st.permutations(range(n.size)))[:k]
    pairs = list(zip(xs, ys))
    sm, _ = induced_substructure(m, xs)
    sn, _ = induced_substructure(n, ys)
    # map through the re-indexing of both substructures
    ia, ib = sorted(xs), sorted(ys)
    f = [None] * k
    for x, y in pairs:
        f[ia.index(x)] = ib.index(y)
    inv = tuple(f.index(i) for i in range(k))
    expected = is_homomorphism(tuple(f), sm, sn) and is_homomorphism(inv, sn, sm)
    assert is_partial_isomorphism(m, n, pairs) == expected


# --- identity ------------------------------------------------------------------


def test_expand_identity_examples():
    e0 = expand_identity(edgeless(0))
    assert e0.size == 0 and "I" in e0.signature.names
    assert expand_identity(edgeless(1)).relations["I"] == {(0, 0)}
    e = expand_identity(chain(2))
    assert e.relations["I"] == {(0, 0), (1, 1)}
    assert e.relations["R"] == {(0, 1)}


def test_collapse_identity_examples():
    m = Structure(SIG_I, 2, {"I": [(0, 1)]})
    assert collapse_identity(m).size == 1
    m = Structure(SIG_I, 3, {"I": [(0, 1), (1, 2)]})
    assert collapse_identity(m).size == 1
    m = Structure(SIG_I, 3, {"I": [(0, 0), (1, 1), (2, 2)], "R": [(0, 2)]})
    assert collapse_identity(m) == Structure(SIG_R, 3, {"R": [(0, 2)]})


@given(structures(max_size=4))
def test_collapse_after_expand_is_identity(m):
    assert are_isomorphic(collapse_identity(expand_identity(m)), m)


# --- isomorphism ----------------------------------------------------------------


def test_isomorphism_examples():
    m = chain(3)
    assert are_isomorphic(m, m)
    assert not are_isomorphic(chain(2), edgeless(2))
    perm = Structure(SIG_R, 3, {"R": [(2, 0), (2, 1), (0, 1)]})
    f = find_isomorphism(m, perm)
    assert f == (2, 0, 1)


@given(structures(max_size=4), st.data())
def test_relabelled_structures_are_isomorphic(m, data):
    perm = data.draw(st.permutations(range(m.size)))
    other = Structure(m.signature, m.size, {
        n: [tuple(perm[x] for x in r) for r in rows] for n, rows in m.relations.items()
    })
    f = find_isomorphism(m, other)
    assert f is not None
    assert is_homomorphism(f, m, other)
    assert is_homomorphism(tuple(f.index(y) for y in range(m.size)), other, m)


def test_iso_class_counts():
    # binary relations on n unlabelled points: 1, 2, 10, 104, 3044
    reps = isomorphism_classes(SIG_R, 4)
    counts = [sum(1 for m in reps if m.size == n) for n in range(5)]
    assert counts == [1, 2, 10, 104, 3044]


def test_iso_classes_match_brute_force():
    reps = isomorphism_classes(SIG_R, 3)
    forms = {canonical_form(m) for n in range(4) for m in all_structures(SIG_R, n)}
    assert len(forms) == len(reps)
    assert {canonical_form(m) for m in reps} == forms


def test_all_structures_count():
    assert [sum(1 for _ in all_structures(SIG_R, n)) for n in range(3)] == [1, 2, 16]


def test_homomorphisms_brute_force():
    # homs from a 2-chain into a 3-chain = pairs i < j
    assert len(list(homomorphisms(chain(2), chain(3)))) == 3
    assert all(is_homomorphism(f, chain(2), chain(3)) for f in itertools.islice(homomorphisms(chain(2), chain(3)), 3))
