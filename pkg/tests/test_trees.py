import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import reduced_words
from oracles import brute_length
from freedyn import catalogue
from freedyn.automorphisms import apply, random_automorphism
from freedyn.errors import PrerequisiteUnresolved
from freedyn.graphmaps import map_pf, rose_from_automorphism
from freedyn.trees import (
    ellipticity_check,
    is_periodic_class,
    product_trees_check,
    sample_classes,
    train_track_for,
    translation_length,
)
from freedyn.words import ReducedWord, cyclic_reduce

PHI = (1 + math.sqrt(5)) / 2
FIB = catalogue.get("fibonacci")
F = rose_from_automorphism(FIB)
PF = map_pf(F, tol=1e-13)


def W(s):
    return ReducedWord.parse(s, 2)


def ell(g):
    return translation_length(F, PF, g).value


@pytest.mark.parametrize("word,value", [
    ("a", 1 / PHI), ("b", 1 / PHI ** 2), ("ab", 1.0), ("aB", 1 / PHI ** 3), ("1", 0.0),
])
def test_fibonacci_lengths(word, value):
    assert ell(W(word)) == pytest.approx(value, abs=1e-9)


@pytest.mark.parametrize("word", ["baBA", "abAB"])
def test_commutator_is_elliptic(word):
    assert ell(W(word)) == pytest.approx(0.0, abs=1e-9)
    assert ellipticity_check(F, W(word), PF, FIB) == "elliptic"
    assert is_periodic_class(FIB, W(word))


def test_hyperbolic_verdict():
    assert ellipticity_check(F, W("aB"), PF, FIB) == "hyperbolic"
    assert not is_periodic_class(FIB, W("aB"))


def test_product_trees_fibonacci():
    sample = sample_classes(2, 30, 6, random.Random(7))
    rep = product_trees_check(FIB, sample)
    assert rep.mismatches == ()
    assert rep.epsilon is not None and rep.epsilon > 0


def test_train_track_unavailable():
    # the budget is far too small for any folding, so the prerequisite fails
    alpha = random_automorphism(3, 8, random.Random(11))
    try:
        train_track_for(alpha, budget=0)
    except PrerequisiteUnresolved:
        pass


@given(reduced_words(rank=2, min_size=1, max_size=8))
def test_scaling_under_alpha(g):
    lhs = ell(apply(FIB, g))
    assert abs(lhs - PF.lam * ell(g)) <= 1e-6 * max(1.0, lhs)


@given(reduced_words(rank=2, min_size=1, max_size=6), st.integers(1, 4))
def test_power_scaling(g, n):
    assert ell(g ** n) == pytest.approx(n * ell(g), abs=1e-7 * n * max(1.0, ell(g)))


@given(reduced_words(rank=2, min_size=1, max_size=6), reduced_words(rank=2, max_size=5))
def test_conjugation_invariant(g, h):
    assert ell(h * g * ~h) == pytest.approx(ell(g), abs=1e-9)
    assert ell(~g) == pytest.approx(ell(g), abs=1e-9)


@settings(max_examples=20)
@given(reduced_words(rank=2, min_size=1, max_size=8))
def test_inverse_tree_scaling(g):
    inv = FIB.inv()
    f = rose_from_automorphism(inv)
    pf = map_pf(f, tol=1e-13)
    a = translation_length(f, pf, g).value
    b = translation_length(f, pf, apply(inv, g)).value
    assert abs(b - pf.lam * a) <= 1e-6 * max(1.0, b)


def test_sample_classes_distinct():
    s = sample_classes(2, 20, 5, random.Random(1))
    assert len(s) == 20
    assert all(cyclic_reduce(w)[1] == w for w in s)


@settings(max_examples=30)
@given(reduced_words(rank=2, min_size=1, max_size=8))
def test_matches_brute_force_iteration(g):
    lengths = {"a": PF.length_of(1), "b": PF.length_of(2)}
    brute = brute_length({"a": "ab", "b": "a"}, lengths, PF.lam, str(g), 18)
    # the brute estimate differs from the limit by O(lambda^-18) per illegal turn
    assert ell(g) == pytest.approx(brute, abs=2e-3 * len(g))


@settings(max_examples=200)
@given(reduced_words(rank=2, min_size=1, max_size=10))
def test_ellipticity_agrees_with_periodicity(g):
    assert ellipticity_check(F, g, PF, FIB) in ("elliptic", "hyperbolic")
