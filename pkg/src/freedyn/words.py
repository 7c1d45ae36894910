"""Reduced words in F_k and eventually periodic points of its boundary.

Letters are nonzero integers: ``+i`` is the generator ``a_i`` (1-based) and
``-i`` its inverse.  The text form uses ``a..z`` for generators and ``A..Z``
for their inverses; the empty word is spelled ``1``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from .errors import RankError, WordSyntaxError

_LOWER = "abcdefghijklmnopqrstuvwxyz"


def letter_to_char(x: int) -> str:
    if not 1 <= abs(x) <= 26:
        raise RankError(f"letter {x} has no text form (ranks above 26 are memory-only)")
    c = _LOWER[abs(x) - 1]
    return c if x > 0 else c.upper()


def char_to_letter(c: str) -> int:
    i = _LOWER.find(c.lower())
    if i < 0:
        raise WordSyntaxError(f"not a generator symbol: {c!r}")
    return i + 1 if c.islower() else -(i + 1)


def free_reduce(letters: Iterable[int]) -> list:
    out: list = []
    for x in letters:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return out


def _check_rank(letters: Iterable[int], rank: int) -> None:
    for x in letters:
        if x == 0 or abs(x) > rank:
            raise RankError(f"letter {x} out of range for rank {rank}")


@dataclass(frozen=True)
class ReducedWord:
    """An element of F_k, stored as a freely reduced tuple of letters."""

    rank: int
    letters: tuple

    def __post_init__(self):
        if self.rank < 1:
            raise RankError("rank must be positive")
        _check_rank(self.letters, self.rank)
        for x, y in zip(self.letters, self.letters[1:]):
            if x == -y:
                raise ValueError(f"word is not reduced: {self.letters}")

    @classmethod
    def _trusted(cls, rank: int, letters: tuple) -> "ReducedWord":
        # Skips validation; callers guarantee reducedness and range.
        w = object.__new__(cls)
        object.__setattr__(w, "rank", rank)
        object.__setattr__(w, "letters", letters)
        return w

    @classmethod
    def identity(cls, rank: int) -> "ReducedWord":
        return cls._trusted(rank, ())

    @classmethod
    def generator(cls, rank: int, i: int, sign: int = 1) -> "ReducedWord":
        _check_rank((i,), rank)
        return cls._trusted(rank, (sign * i,))

    @classmethod
    def parse(cls, text: str, rank: int) -> "ReducedWord":
        """Parse ``abA``-style text; raises if the text is not already reduced."""
        text = text.strip()
        if text in ("1", ""):
            return cls.identity(rank)
        return cls(rank, tuple(char_to_letter(c) for c in text))

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return ReducedWord._trusted(self.rank, self.letters[item])
        return self.letters[item]

    def __bool__(self) -> bool:
        return bool(self.letters)

    def __str__(self) -> str:
        if not self.letters:
            return "1"
        return "".join(letter_to_char(x) for x in self.letters)

    def __repr__(self) -> str:
        try:
            return f"ReducedWord({str(self)!r}, rank={self.rank})"
        except RankError:
            return f"ReducedWord({self.letters!r}, rank={self.rank})"

    def __mul__(self, other: "ReducedWord") -> "ReducedWord":
        return multiply(self, other)

    def __invert__(self) -> "ReducedWord":
        return invert(self)

    def __pow__(self, n: int) -> "ReducedWord":
        if n < 0:
            return invert(self) ** (-n)
        s, c = cyclic_reduce(self)
        core = c.letters * n
        return ReducedWord._trusted(self.rank, tuple(free_reduce(s.letters + core + invert(s).letters)))

    def shortlex(self) -> tuple:
        """Sort key: length first, then generator order a < A < b < B < ..."""
        return (len(self.letters), tuple(2 * abs(x) + (x < 0) for x in self.letters))


def reduce(raw: Sequence[int], rank: int) -> ReducedWord:
    """Free reduction of an arbitrary letter sequence."""
    _check_rank(raw, rank)
    return ReducedWord._trusted(rank, tuple(free_reduce(raw)))


def parse_raw(text: str, rank: int) -> ReducedWord:
    """Parse text that may contain cancelling pairs and reduce it."""
    text = text.strip()
    if text in ("1", ""):
        return ReducedWord.identity(rank)
    return reduce([char_to_letter(c) for c in text], rank)


def _same_rank(u, v) -> None:
    if u.rank != v.rank:
        raise RankError(f"rank mismatch: {u.rank} vs {v.rank}")


def multiply(u: ReducedWord, v: ReducedWord) -> ReducedWord:
    _same_rank(u, v)
    a, b = u.letters, v.letters
    i = 0
    n = min(len(a), len(b))
    while i < n and a[-1 - i] == -b[i]:
        i += 1
    return ReducedWord._trusted(u.rank, a[: len(a) - i] + b[i:])


def invert(u: ReducedWord) -> ReducedWord:
    return ReducedWord._trusted(u.rank, tuple(-x for x in reversed(u.letters)))


def cyclic_reduce(u: ReducedWord):
    """Return ``(s, c)`` with ``u = s c s^-1`` and ``c`` cyclically reduced."""
    w = u.letters
    i = 0
    while 2 * i + 1 < len(w) and w[i] == -w[-1 - i]:
        i += 1
    return (ReducedWord._trusted(u.rank, w[:i]), ReducedWord._trusted(u.rank, w[i : len(w) - i]))


def primitive_root(c: tuple) -> tuple:
    n = len(c)
    for p in range(1, n + 1):
        if n % p == 0 and c[:p] * (n // p) == c:
            return c[:p]
    return c


def least_rotation(c: tuple) -> tuple:
    if not c:
        return c
    return min(c[i:] + c[:i] for i in range(len(c)))


def conjugacy_key(u: ReducedWord) -> ReducedWord:
    """Canonical representative of the conjugacy class: least rotation of the cyclic reduction."""
    _, c = cyclic_reduce(u)
    return ReducedWord._trusted(u.rank, least_rotation(c.letters))


def is_conjugate(u: ReducedWord, v: ReducedWord) -> bool:
    return conjugacy_key(u) == conjugacy_key(v)


@dataclass(frozen=True)
class EventuallyPeriodicWord:
    """The boundary point ``prefix . period^inf`` in canonical form.

    Build these with :func:`ep_normalize`; the canonical form makes structural
    equality coincide with equality of boundary points.
    """

    rank: int
    prefix: ReducedWord
    period: ReducedWord

    def __str__(self) -> str:
        u = str(self.prefix) if self.prefix else ""
        return f"{u}({self.period})^inf"

    def __repr__(self) -> str:
        try:
            return f"EventuallyPeriodicWord({str(self)!r})"
        except RankError:
            return f"EventuallyPeriodicWord({self.prefix.letters!r}, {self.period.letters!r})"

    def prefix_word(self, n: int) -> ReducedWord:
        return ep_prefix(self, n)

    @classmethod
    def parse(cls, text: str, rank: int) -> "EventuallyPeriodicWord":
        return parse_ep(text, rank)


@dataclass(frozen=True)
class BoundaryPrefixOracle:
    """A boundary point known only through a certified finite prefix.

    Used for limit points that are not eventually periodic (typically the
    attracting points of exponentially growing automorphisms).
    """

    rank: int
    known: ReducedWord

    @property
    def stabilization_depth(self) -> int:
        return len(self.known)

    def prefix(self, n: int) -> ReducedWord:
        if n > len(self.known):
            raise ValueError(f"prefix of length {n} requested beyond certified depth {len(self.known)}")
        return self.known[:n]

    prefix_fn = prefix

    def __str__(self) -> str:
        return f"{self.known}..."


Point = Union[ReducedWord, EventuallyPeriodicWord, BoundaryPrefixOracle]


def ep_normalize(u: ReducedWord, c: ReducedWord) -> EventuallyPeriodicWord:
    """Canonical form of the boundary point ``u . c^inf``."""
    _same_rank(u, c)
    if not c:
        raise ValueError("period must be a nontrivial word")
    s, core = cyclic_reduce(c)
    if not core:
        raise ValueError("period reduces to the identity")
    pre = list(multiply(u, s).letters)
    per = list(core.letters)
    while pre and pre[-1] == -per[0]:
        pre.pop()
        per = per[1:] + per[:1]
    per = list(primitive_root(tuple(per)))
    while pre and pre[-1] == per[-1]:
        pre.pop()
        per = per[-1:] + per[:-1]
    r = u.rank
    return EventuallyPeriodicWord(r, ReducedWord._trusted(r, tuple(pre)), ReducedWord._trusted(r, tuple(per)))


def ep_power(g: ReducedWord, sign: int = 1) -> EventuallyPeriodicWord:
    """``g^inf`` (or ``g^-inf`` for ``sign = -1``) for nontrivial ``g``."""
    if not g:
        raise ValueError("the identity has no limit point")
    return ep_normalize(ReducedWord.identity(g.rank), g if sign > 0 else invert(g))


def ep_prefix(X: EventuallyPeriodicWord, n: int) -> ReducedWord:
    u, c = X.prefix.letters, X.period.letters
    if n <= len(u):
        return ReducedWord._trusted(X.rank, u[:n])
    m = n - len(u)
    reps = -(-m // len(c))
    return ReducedWord._trusted(X.rank, u + (c * reps)[:m])


def ep_equal(X: EventuallyPeriodicWord, Y: EventuallyPeriodicWord) -> bool:
    _same_rank(X, Y)
    return X == Y


def _common_prefix(a: Sequence[int], b: Sequence[int]) -> int:
    n = min(len(a), len(b))
    i = 0
    while i < n and a[i] == b[i]:
        i += 1
    return i


def known_letters(X, depth: int) -> tuple:
    """First ``depth`` letters of a word, EP point or prefix oracle (fewer if unknown)."""
    if isinstance(X, ReducedWord):
        return X.letters[:depth]
    if isinstance(X, EventuallyPeriodicWord):
        return ep_prefix(X, depth).letters
    return X.prefix(min(depth, X.stabilization_depth)).letters


def gromov_product(X, Y) -> float:
    """Length of the longest common prefix; ``inf`` for equal boundary points.

    For prefix oracles the answer is a lower bound capped by the certified depth.
    """
    _same_rank(X, Y)
    if isinstance(X, ReducedWord) and isinstance(Y, ReducedWord):
        return _common_prefix(X.letters, Y.letters)
    if isinstance(X, EventuallyPeriodicWord) and isinstance(Y, EventuallyPeriodicWord):
        if X == Y:
            return math.inf
        bound = max(len(X.prefix), len(Y.prefix)) + len(X.period) + len(Y.period)
        return _common_prefix(ep_prefix(X, bound).letters, ep_prefix(Y, bound).letters)
    depth = max(_depth(X), _depth(Y))
    return _common_prefix(known_letters(X, depth), known_letters(Y, depth))


def _depth(X) -> int:
    if isinstance(X, ReducedWord):
        return len(X) + 1
    if isinstance(X, EventuallyPeriodicWord):
        return len(X.prefix) + 2 * len(X.period) + 1
    return X.stabilization_depth


_EP_RE = re.compile(r"^\s*([A-Za-z1]*)\(([A-Za-z]+)\)\^inf\s*$")


def parse_ep(text: str, rank: int) -> EventuallyPeriodicWord:
    m = _EP_RE.match(text)
    if not m:
        raise WordSyntaxError(f"expected 'prefix(period)^inf', got {text!r}")
    return ep_normalize(parse_raw(m.group(1), rank), parse_raw(m.group(2), rank))


def parse_point(text: str, rank: int) -> Point:
    """A finite word or an EP expression, whichever the text is."""
    if "(" in text:
        return parse_ep(text, rank)
    return ReducedWord.parse(text, rank)


def all_reduced_words(rank: int, max_len: int):
    """All reduced words of length <= max_len, in shortlex order."""
    alphabet = []
    for i in range(1, rank + 1):
        alphabet.extend((i, -i))
    level = [()]
    yield ReducedWord._trusted(rank, ())
    for _ in range(max_len):
        nxt = []
        for w in level:
            for x in alphabet:
                if w and w[-1] == -x:
                    continue
                nxt.append(w + (x,))
        for w in nxt:
            yield ReducedWord._trusted(rank, w)
        level = nxt
