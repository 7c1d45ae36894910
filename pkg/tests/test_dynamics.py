import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import automorphisms, reduced_words
from oracles import images_dict, naive_period, naive_w_p
from freedyn import catalogue
from freedyn.automorphisms import automorphism, power, random_automorphism
from freedyn.dynamics import (
    attraction_rate,
    check_cyclic,
    classify_fixed_point,
    fixed_words,
    gamma_graph,
    omega_limit,
    omega_limit_boundary,
    orbit,
    periodic_words,
    periods_census,
    perturbations,
    point_text,
    positive_index_search,
    w_sequence,
    w_sequence_direct,
    w_sequence_limit,
    word_period,
)
from freedyn.errors import NonExponential, SequencePeriodic
from freedyn.words import BoundaryPrefixOracle, ReducedWord, known_letters, parse_ep


def W(s, k):
    return ReducedWord.parse(s, k)


def imgs(alpha):
    return [str(w) for w in alpha.images]


def test_intro_orbit_terms():
    alpha = catalogue.get("intro")
    tr = orbit(alpha, W("a", 3), 6)
    assert [str(t) for t in tr.terms] == ["a", "cb", "baa", "acbcb", "cbbaabaa", "baaacbcbacbcb"]
    assert list(tr.lengths) == [1, 2, 3, 5, 8, 13]


def test_intro_periods():
    alpha = catalogue.get("intro")
    assert omega_limit(alpha, W("a", 3)).q == 3
    assert omega_limit(alpha, W("A", 3)).q == 2


def test_intro_w_sequence():
    alpha = catalogue.get("intro")
    seq = w_sequence(alpha, W("a", 3), 3)
    assert [str(x) for x in seq] == ["a", "cba", "baacba"]
    assert w_sequence_limit(alpha, W("a", 3)).q == 3


def test_intro_has_no_short_fixed_words():
    assert [str(g) for g in fixed_words(catalogue.get("intro"), 4)] == ["1"]


def test_fixed_a_fixed_words():
    got = [str(g) for g in fixed_words(catalogue.get("fixed-a"), 3)]
    assert got == ["1", "a", "A", "aa", "AA", "aaa", "AAA"]


@pytest.mark.parametrize("seed,target", [
    ("b", "(a)^inf"), ("aab", "(a)^inf"), ("Ab", "(a)^inf"), ("abAB", "(a)^inf"),
    ("aB", "(A)^inf"), ("B", "(A)^inf"),
])
def test_fixed_a_limits(seed, target):
    lim = omega_limit(catalogue.get("fixed-a"), W(seed, 2))
    assert lim.q == 1
    assert str(lim.points[0]) == target


def test_fixed_a_half_half():
    alpha = catalogue.get("fixed-a")
    for text in ("(a)^inf", "(A)^inf"):
        assert classify_fixed_point(alpha, parse_ep(text, 2)).kind == "half-half"


def test_flip_period_two_point():
    lim = omega_limit_boundary(catalogue.get("flip"), parse_ep("(a)^inf", 2))
    assert lim.q == 2
    assert {str(p) for p in lim.points} == {"(a)^inf", "(A)^inf"}


def test_double_limit():
    gamma = catalogue.get("double-limit")
    g = W("baD", 4)
    for a in (gamma, gamma.inv()):
        lim = omega_limit(a, g)
        assert lim.q == 1
        assert str(lim.points[0]) == "b(A)^inf"
        assert lim.certificate.depth >= 32


def test_fibonacci_attracting_point():
    fib = catalogue.get("fibonacci")
    lim = omega_limit(fib, W("a", 2))
    assert lim.q == 1
    P = lim.points[0]
    assert isinstance(P, BoundaryPrefixOracle)
    assert P.stabilization_depth >= 64
    assert str(P.prefix(8)) == "abaababa"
    assert classify_fixed_point(fib, P).kind == "attracting"
    assert classify_fixed_point(fib.inv(), P).kind == "repelling"


def test_fibonacci_limit_of_word_and_its_power_agree():
    fib = catalogue.get("fibonacci")
    P = omega_limit(fib, W("a", 2)).points[0]
    Q = omega_limit_boundary(fib, parse_ep("(a)^inf", 2)).points[0]
    assert known_letters(P, 64) == known_letters(Q, 64)


def test_attraction_rate():
    fib = catalogue.get("fibonacci")
    assert attraction_rate(fib, W("a", 2)) == pytest.approx(1.6180339887, abs=1e-9)
    with pytest.raises(NonExponential):
        attraction_rate(catalogue.get("fixed-a"), W("b", 2))


def test_flip_census():
    rep = periods_census(catalogue.get("flip"), 2)
    assert rep.periods == frozenset({1, 2})


def test_census_bound_violation_reported():
    rep = periods_census(catalogue.get("perm-2-3"), 1, bound=2)
    assert rep.violations == (3,)


def test_perturbations_are_finite_prefixes():
    X = parse_ep("(a)^inf", 2)
    ps = perturbations(X, depth=8)
    assert ps and all(isinstance(w, ReducedWord) for _, w in ps)
    assert all(w.letters[:d] == (1,) * d and abs(w.letters[d]) == 2 for d, w in ps)


def test_positive_index_fixed_a():
    res = positive_index_search(catalogue.get("fixed-a"))
    assert (res.q, str(res.w), res.count, res.tried) == (1, "a", 4, 2)


def test_gamma_needs_power():
    fib = catalogue.get("fibonacci")
    g = gamma_graph(fib, [parse_ep("(b)^inf", 2)])
    assert not g.repelling and not g.attracting
    assert len(g.unresolved) == 1


def test_gamma_of_fibonacci_square():
    fib2 = power(catalogue.get("fibonacci"), 2)
    seeds = [parse_ep(s, 2) for s in ("(b)^inf", "(A)^inf", "baaB(ab)^inf", "Ba(bA)^inf")] + [W("abAAb", 2)]
    g = gamma_graph(fib2, seeds)
    assert len(g.repelling) == 2 and len(g.attracting) == 2
    assert sorted((r, a) for r, a, _ in g.edges) == [(0, 0), (0, 1), (1, 0)]
    assert "digraph" in g.to_dot()


def test_point_text_truncates():
    P = BoundaryPrefixOracle(2, W("ab" * 100, 2))
    assert len(point_text(P)) == 128 + 3


# -- properties ---------------------------------------------------------------

@given(automorphisms(max_moves=5), reduced_words(max_size=4), st.integers(1, 6))
def test_w_sequence_three_ways(alpha, w, p):
    seq = w_sequence(alpha, w, p)
    assert seq[-1] == w_sequence_direct(alpha, w, p)
    naive = naive_w_p(images_dict(imgs(alpha)), str(w).replace("1", ""), p)
    assert str(seq[-1]).replace("1", "") == naive


@given(automorphisms(max_moves=6), reduced_words(min_size=1, max_size=4))
def test_trivial_w_p_means_periodic(alpha, w):
    seq = w_sequence(alpha, w, 8)
    for p, wp in enumerate(seq, start=1):
        if not wp:
            assert power(alpha, p)(w) == w


def test_w_sequence_periodic_raises():
    # a -> A: w_2 = A a = 1, so the sequence a, 1, a, 1 ... is periodic
    alpha = automorphism("A", "b")
    with pytest.raises(SequencePeriodic):
        w_sequence_limit(alpha, W("a", 2))


@given(automorphisms(max_moves=5), reduced_words(max_size=3))
def test_word_period_matches_naive(alpha, g):
    d = images_dict(imgs(alpha))
    assert word_period(alpha, g, 6) == naive_period(d, str(g).replace("1", ""), 6) or not g


@settings(max_examples=25)
@given(st.integers(0, 10**6))
def test_limits_are_cyclic(seed):
    rng = random.Random(seed)
    alpha = random_automorphism(3, rng.randint(1, 8), rng)
    g = ReducedWord(3, (rng.choice([1, -1, 2, -2, 3, -3]),))
    lim = omega_limit(alpha, g)
    assert [p for p in check_cyclic(alpha, lim) if p[1] == "violation"] == []


@settings(max_examples=20)
@given(st.integers(0, 10**6))
def test_power_limit_points_are_limit_points(seed):
    rng = random.Random(seed)
    alpha = random_automorphism(3, rng.randint(1, 6), rng)
    g = ReducedWord(3, (rng.choice([1, -1, 2, -2, 3, -3]),))
    lim = omega_limit(alpha, g)
    q = lim.q
    lim_q = omega_limit(power(alpha, q), g)
    assert lim_q.q == 1
    P = lim_q.points[0]
    keys = [known_letters(Q, 32) for Q in lim.points]
    assert known_letters(P, 32) in keys


@given(automorphisms(max_moves=4))
def test_periodic_words_are_periodic(alpha):
    for g, p in periodic_words(alpha, 2, 6):
        assert power(alpha, p)(g) == g
