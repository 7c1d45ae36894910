"""Named automorphisms used by the CLI, the golden checks and the tests."""

from __future__ import annotations

from .automorphisms import Automorphism, automorphism

CATALOGUE = {
    "intro": (("cb", "a", "ba"), "rank 3; orbit of a has period 3, orbit of A period 2"),
    "fibonacci": (("ab", "a"), "rank 2 positive iwip, stretch factor the golden ratio"),
    "fixed-a": (("a", "aba"), "fixes a; a^inf is half attracting and half repelling"),
    "flip": (("A", "AB"), "its square is fixed-a; swaps a^inf and a^-inf"),
    "double-limit": (("a", "ba", "caa", "dca"), "forward and backward orbits of baD both converge to b(A)^inf"),
    "perm-2-3": (("b", "a", "d", "e", "c"), "rank 5 basis permutation with cycle type (2, 3)"),
}


def get(name: str) -> Automorphism:
    try:
        images, _ = CATALOGUE[name]
    except KeyError:
        raise KeyError(f"unknown example {name!r}; choose from {', '.join(sorted(CATALOGUE))}") from None
    return automorphism(*images)
