import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import bisect_root, images_dict, naive_gates, naive_legal
from freedyn import catalogue
from freedyn.automorphisms import Endomorphism, compose, identity_automorphism, random_automorphism, twist
from freedyn.errors import InvalidINP, InvalidSite, ParseError, Reducible, ZeroMatrix
from freedyn.graphmaps import (
    GraphMap,
    Unresolved,
    add_shortcut,
    bh_move,
    find_inps,
    format_graph_map,
    gates,
    is_train_track,
    map_path,
    map_pf,
    parse_graph_map,
    pf_data,
    pf_length,
    represents,
    rose_from_automorphism,
    strata,
    tighten,
    transition_matrix,
    try_make_train_track,
    validate,
)
from freedyn.words import ReducedWord, all_reduced_words


def rose(*images):
    return rose_from_automorphism(Endomorphism.from_strings(images))


def test_fibonacci_matrix_and_pf():
    f = rose_from_automorphism(catalogue.get("fibonacci"))
    assert transition_matrix(f) == [[1, 1], [1, 0]]
    pf = map_pf(f)
    lo, hi = bisect_root([-1, -1, 1], 1, 2)
    assert pf.width <= 1e-9
    assert pf.lo <= hi and lo <= pf.hi


def test_pf_errors():
    with pytest.raises(ZeroMatrix):
        pf_data([[0, 0], [0, 0]])
    with pytest.raises(Reducible):
        pf_data([[1, 1], [0, 1]])


@pytest.mark.parametrize("matrix,coeffs", [
    ([[2, 1], [1, 1]], [1, -3, 1]),          # lambda^2 - 3 lambda + 1
    ([[0, 1, 0], [0, 0, 1], [1, 1, 0]], [-1, -1, 0, 1]),  # lambda^3 - lambda - 1
    ([[1, 2], [3, 0]], [-6, -1, 1]),         # roots 3, -2
])
def test_pf_against_bisection(matrix, coeffs):
    pf = pf_data(matrix, tol=1e-12)
    lo, hi = bisect_root(coeffs, 1, 4)
    assert float(pf.lo) <= float(hi) + 1e-15 and float(lo) <= float(pf.hi) + 1e-15
    assert pf.width <= 1e-12


def test_fibonacci_gates_and_train_track():
    f = rose_from_automorphism(catalogue.get("fibonacci"))
    gs = gates(f).gates()[0]
    assert sorted(sorted(g) for g in gs) == [[-2], [-1], [1, 2]]
    assert is_train_track(f)
    assert find_inps(f, 12) == []


def test_inverse_fibonacci_gates():
    f = rose_from_automorphism(catalogue.get("fibonacci").inv())
    gs = gates(f).gates()[0]
    assert sorted(sorted(g) for g in gs) == [[-2, 1], [-1, 2]]
    assert is_train_track(f)


@given(st.integers(0, 10**6))
def test_gates_match_naive(seed):
    alpha = random_automorphism(3, 6, random.Random(seed))
    if any(not w for w in alpha.images):
        return
    f = rose_from_automorphism(alpha)
    ts = gates(f)
    ng = naive_gates(images_dict([str(w) for w in alpha.images]))
    char = {1: "a", -1: "A", 2: "b", -2: "B", 3: "c", -3: "C"}
    for d1, d2 in itertools.combinations(char, 2):
        assert ts.is_illegal(d1, d2) == (ng[char[d1]] == ng[char[d2]])


def test_non_train_track():
    f = rose("ab", "Ab")
    assert not is_train_track(f)


def test_fixed_a_strata_polynomial():
    kinds = [s.kind for s in strata(rose_from_automorphism(catalogue.get("fixed-a")))]
    assert kinds == ["polynomial", "polynomial"]


def test_twist_becomes_train_track():
    alpha = twist(catalogue.get("fibonacci"), ReducedWord.parse("b", 2))
    f = try_make_train_track(rose_from_automorphism(alpha))
    assert isinstance(f, GraphMap)
    assert is_train_track(f)
    validate(f)
    assert represents(f, alpha, all_reduced_words(2, 3))


@settings(max_examples=30)
@given(st.integers(0, 10**6))
def test_train_track_search_preserves_class(seed):
    rng = random.Random(seed)
    alpha = random_automorphism(3, rng.randint(1, 8), rng)
    out = try_make_train_track(rose_from_automorphism(alpha), budget=60)
    g = out.last if isinstance(out, Unresolved) else out
    validate(g)
    assert represents(g, alpha, all_reduced_words(3, 2))
    if isinstance(out, GraphMap):
        assert is_train_track(out)


def test_moves_preserve_class():
    alpha = catalogue.get("fibonacci")
    f = rose_from_automorphism(alpha)
    g = bh_move(f, "subdivide", (1, 1))
    validate(g)
    assert g.graph.n_vertices == 2
    assert represents(g, alpha, all_reduced_words(2, 3))
    h = bh_move(g, "remove-valence-two", 1)
    assert represents(h, alpha, all_reduced_words(2, 3))
    with pytest.raises(InvalidSite):
        bh_move(f, "nonsense", None)


def test_fold_preserves_class():
    alpha = Endomorphism.from_strings(["ab", "aab"])
    f = rose_from_automorphism(alpha)
    g = bh_move(f, "fold", (1, 2))
    validate(g)
    assert represents(g, alpha, all_reduced_words(2, 3))


def test_identity_inps():
    f = rose_from_automorphism(identity_automorphism(2))
    assert len(find_inps(f, 2)) == 16


def test_shortcut():
    f = rose("a", "aab")
    assert add_shortcut(f, None) is f
    inp = (-2, 1, 2)
    assert inp in find_inps(f, 3)
    g = add_shortcut(f, inp)
    assert g.shortcut is not None and g.labels[-1] == "zero"
    assert parse_graph_map(format_graph_map(g)) == g
    h = rose_from_automorphism(catalogue.get("fibonacci"))
    with pytest.raises(InvalidINP):
        add_shortcut(h, (1, 2))


def test_text_round_trip():
    alpha = twist(catalogue.get("fibonacci"), ReducedWord.parse("b", 2))
    f = try_make_train_track(rose_from_automorphism(alpha))
    assert parse_graph_map(format_graph_map(f)) == f


@pytest.mark.parametrize("text", [
    "edge a: 0 0 stratum=top\n",
    "vertices 1\nedge a: 0 0 stratum=up\nimage a: a\n",
    "vertices 1\nedge a: 0 0 stratum=top\n",
    "vertices 2\nedge a: 0 1 stratum=top\nimage a: a\n",
    "vertices 1\nfoo\n",
])
def test_text_errors(text):
    with pytest.raises(ParseError):
        parse_graph_map(text)


# -- properties ------------------------------------------------------------------

POSITIVE = [("ab", "b", "c"), ("a", "bc", "c"), ("a", "b", "ca"), ("ba", "b", "c"),
            ("b", "a", "c"), ("c", "a", "b"), ("a", "ba", "c"), ("a", "b", "cb")]


@given(st.lists(st.sampled_from(POSITIVE), min_size=1, max_size=6))
def test_transition_matrix_of_square(moves):
    phi = Endomorphism.from_strings(moves[0])
    for m in moves[1:]:
        phi = compose(phi, Endomorphism.from_strings(m))
    f = rose_from_automorphism(phi)
    ff = rose_from_automorphism(compose(phi, phi))
    M = transition_matrix(f)
    M2 = [[sum(M[i][k] * M[k][j] for k in range(3)) for j in range(3)] for i in range(3)]
    assert transition_matrix(ff) == M2


def _paths(n, k=2):
    letters = [i for i in range(1, k + 1)] + [-i for i in range(1, k + 1)]
    for length in range(1, n + 1):
        for p in itertools.product(letters, repeat=length):
            if tighten(p) == p:
                yield p


@pytest.mark.parametrize("name,inverse", [("fibonacci", False), ("fibonacci", True)])
def test_legal_paths_stay_legal(name, inverse):
    alpha = catalogue.get(name)
    alpha = alpha.inv() if inverse else alpha
    f = rose_from_automorphism(alpha)
    ts = gates(f)
    for p in _paths(6):
        if ts.ilt_count(p):
            continue
        raw = [x for e in p for x in f.image(e)]
        assert tighten(raw) == tuple(raw)
        assert ts.ilt_count(raw) == 0


@pytest.mark.parametrize("inverse", [False, True])
def test_pf_scaling_on_edges(inverse):
    alpha = catalogue.get("fibonacci")
    f = rose_from_automorphism(alpha.inv() if inverse else alpha)
    pf = map_pf(f, tol=1e-13)
    for e in (1, 2):
        assert pf_length(pf, f.image(e)) == pytest.approx(pf.lam * pf_length(pf, (e,)), abs=1e-12)
        assert pf_length(pf, map_path(f, (e,), 5)) == pytest.approx(pf.lam ** 5 * pf_length(pf, (e,)), rel=1e-10)


@given(st.lists(st.sampled_from([1, -1, 2, -2]), min_size=1, max_size=10))
def test_ilt_inequality(raw):
    p = tighten(raw)
    if not p:
        return
    for inverse in (False, True):
        alpha = catalogue.get("fibonacci")
        f = rose_from_automorphism(alpha.inv() if inverse else alpha)
        pf = map_pf(f)
        ts = gates(f)
        m = min(pf.length_of(e) for e in f.top_edges())
        assert ts.ilt_count(p) * m <= pf_length(pf, p) + 1e-12
        char = {1: "a", -1: "A", 2: "b", -2: "B"}
        imgs = [str(w) for w in (alpha.inv() if inverse else alpha).images]
        assert ts.ilt_count(p) == naive_legal(images_dict(imgs), "".join(char[x] for x in p))


@pytest.mark.parametrize("inverse", [False, True])
def test_ilt_non_increasing_under_iteration(inverse):
    alpha = catalogue.get("fibonacci")
    f = rose_from_automorphism(alpha.inv() if inverse else alpha)
    ts = gates(f)
    for p in _paths(5):
        counts = [ts.ilt_count(map_path(f, p, m)) for m in range(5)]
        assert counts == sorted(counts, reverse=True)
