import random

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from freedyn.automorphisms import random_automorphism
from freedyn.words import ReducedWord, cyclic_reduce, ep_normalize

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def letters(rank):
    return st.sampled_from([i for i in range(1, rank + 1)] + [-i for i in range(1, rank + 1)])


@st.composite
def reduced_words(draw, rank=3, min_size=0, max_size=12):
    raw = draw(st.lists(letters(rank), min_size=min_size, max_size=max_size))
    out = []
    for x in raw:
        if out and out[-1] == -x:
            continue
        out.append(x)
    return ReducedWord(rank, tuple(out))


@st.composite
def ep_words(draw, rank=3):
    u = draw(reduced_words(rank, max_size=4))
    c = draw(reduced_words(rank, min_size=1, max_size=4))
    c = cyclic_reduce(c)[1]
    if not c:
        c = ReducedWord(rank, (1,))
    return ep_normalize(u, c)


@st.composite
def automorphisms(draw, rank=3, max_moves=8):
    seed = draw(st.integers(0, 2**32 - 1))
    n = draw(st.integers(0, max_moves))
    return random_automorphism(rank, n, random.Random(seed))


def random_word(rng, rank, lo, hi):
    n = rng.randint(lo, hi)
    out = []
    while len(out) < n:
        x = rng.choice([i for i in range(1, rank + 1)] + [-i for i in range(1, rank + 1)])
        if out and out[-1] == -x:
            continue
        out.append(x)
    return ReducedWord(rank, tuple(out))


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
