"""Independent reference implementations used to check the library.

Everything here works on plain strings (``"abA"``) with naive algorithms and
shares no code with ``freedyn``.
"""

from __future__ import annotations

import re
from fractions import Fraction


def naive_reduce(s: str) -> str:
    pair = re.compile("|".join(f"{c}{c.upper()}|{c.upper()}{c}" for c in "abcdefghijklmnopqrstuvwxyz"))
    while True:
        t = pair.sub("", s, count=1)
        if t == s:
            return s
        s = t


def naive_inverse(s: str) -> str:
    return s[::-1].swapcase()


def naive_apply(images: dict, w: str) -> str:
    out = []
    for ch in w:
        img = images[ch.lower()]
        out.append(img if ch.islower() else naive_inverse(img))
    return naive_reduce("".join(out))


def images_dict(strings) -> dict:
    return {chr(ord("a") + i): s for i, s in enumerate(strings)}


def naive_compose(outer: dict, inner: dict) -> dict:
    return {g: naive_apply(outer, w) for g, w in inner.items()}


def naive_ep_prefix(u: str, c: str, n: int) -> str:
    """First n letters of the reduced infinite word u c c c ... (c cyclically reduced)."""
    reps = n + len(u) + 2
    return naive_reduce(u + c * reps)[:n]


def naive_cyclic_reduce(s: str) -> str:
    s = naive_reduce(s)
    while len(s) >= 2 and s[0] == s[-1].swapcase():
        s = s[1:-1]
    return s


def naive_conjugacy_class(s: str) -> str:
    s = naive_cyclic_reduce(s)
    if not s:
        return ""
    return min(s[i:] + s[:i] for i in range(len(s)))


def naive_period(images: dict, w: str, p_max: int) -> int | None:
    x = w
    for p in range(1, p_max + 1):
        x = naive_apply(images, x)
        if x == w:
            return p
    return None


def naive_w_p(images: dict, w: str, p: int) -> str:
    """``alpha^(p-1)(w) ... alpha(w) w`` straight from the definition."""
    terms = [w]
    for _ in range(p - 1):
        terms.append(naive_apply(images, terms[-1]))
    return naive_reduce("".join(reversed(terms)))


def bisect_root(coeffs, lo, hi, tol=1e-13):
    """Root of the polynomial ``sum c_i x^i`` in [lo, hi] with a sign change, exact arithmetic."""
    def f(x):
        return sum(Fraction(c) * x ** i for i, c in enumerate(coeffs))
    lo, hi = Fraction(lo), Fraction(hi)
    flo = f(lo)
    while hi - lo > tol:
        mid = (lo + hi) / 2
        fm = f(mid)
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return lo, hi


def naive_gates(images: dict) -> dict:
    """Gate partition of the rose map given by ``images`` (letters as directions).

    Two directions share a gate iff some iterate of "first letter of the image"
    sends them to the same direction.
    """
    letters = [c for g in images for c in (g, g.upper())]

    def D(d):
        img = images[d] if d.islower() else naive_inverse(images[d.lower()])
        return img[0]

    n = len(letters)
    gate = {}
    for d in letters:
        x = d
        for _ in range(n):
            x = D(x)
        gate[d] = x
    return gate


def naive_legal(images: dict, path: str, cyclic: bool = False) -> int:
    """Illegal turns of a path on the rose: turn (inverse of x, y) inside one gate."""
    gate = naive_gates(images)
    n = len(path)
    pairs = [(path[i], path[i + 1]) for i in range(n - 1)]
    if cyclic and n > 1:
        pairs.append((path[-1], path[0]))
    return sum(gate[x.swapcase()] == gate[y] for x, y in pairs)


def brute_length(images: dict, lengths: dict, lam: float, w: str, p: int) -> float:
    """``PF(alpha^p(w)) / lam^p`` on the cyclically reduced class, with no shortcuts."""
    x = naive_cyclic_reduce(w)
    for _ in range(p):
        x = naive_cyclic_reduce(naive_apply(images, x))
    return sum(lengths[c.lower()] for c in x) / lam ** p
