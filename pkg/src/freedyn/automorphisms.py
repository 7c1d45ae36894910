"""Endomorphisms and certified automorphisms of F_k."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from .errors import DeterminantObstruction, NotSurjective, ParseError, RankError
from .words import (
    EventuallyPeriodicWord,
    ReducedWord,
    char_to_letter,
    ep_normalize,
    free_reduce,
    invert,
    letter_to_char,
    multiply,
)


@dataclass(frozen=True)
class Endomorphism:
    """A map of F_k given by the images of the generators."""

    rank: int
    images: tuple

    def __post_init__(self):
        if len(self.images) != self.rank:
            raise RankError(f"need {self.rank} images, got {len(self.images)}")
        for w in self.images:
            if w.rank != self.rank:
                raise RankError("image rank differs from endomorphism rank")
        table = {}
        for i, w in enumerate(self.images, start=1):
            table[i] = w.letters
            table[-i] = tuple(-x for x in reversed(w.letters))
        object.__setattr__(self, "_table", table)

    @classmethod
    def from_strings(cls, images: Sequence[str]) -> "Endomorphism":
        k = len(images)
        return cls(k, tuple(ReducedWord.parse(s, k) for s in images))

    @classmethod
    def identity(cls, rank: int) -> "Endomorphism":
        return cls(rank, tuple(ReducedWord.generator(rank, i) for i in range(1, rank + 1)))

    @property
    def forward(self) -> "Endomorphism":
        return self

    def apply_letters(self, letters) -> list:
        table = self._table
        out: list = []
        for x in letters:
            for y in table[x]:
                if out and out[-1] == -y:
                    out.pop()
                else:
                    out.append(y)
        return out

    def __call__(self, w: ReducedWord) -> ReducedWord:
        return apply(self, w)

    def lipschitz(self) -> int:
        return max(len(w) for w in self.images)

    def __str__(self) -> str:
        return ", ".join(f"{letter_to_char(i)} -> {w}" for i, w in enumerate(self.images, start=1))


@dataclass(frozen=True)
class NielsenMove:
    """Elementary Nielsen move on a tuple of words.

    ``kind`` is ``"right"`` (w_i <- w_i w_j^e), ``"left"`` (w_i <- w_j^e w_i)
    or ``"invert"`` (w_i <- w_i^-1).  Indices are 0-based.
    """

    kind: str
    i: int
    j: int = -1
    e: int = 1

    def on_tuple(self, ws: list) -> list:
        ws = list(ws)
        wi = ws[self.i]
        if self.kind == "invert":
            ws[self.i] = tuple(-x for x in reversed(wi))
            return ws
        wj = ws[self.j] if self.e > 0 else tuple(-x for x in reversed(ws[self.j]))
        if self.kind == "right":
            ws[self.i] = tuple(free_reduce(wi + wj))
        else:
            ws[self.i] = tuple(free_reduce(wj + wi))
        return ws

    def inverse(self) -> "NielsenMove":
        if self.kind == "invert":
            return self
        return NielsenMove(self.kind, self.i, self.j, -self.e)


@dataclass(frozen=True)
class Automorphism:
    """An endomorphism together with a verified two-sided inverse."""

    forward: Endomorphism
    inverse: Endomorphism
    certificate: Optional[tuple] = field(default=None, compare=False)
    method: str = field(default="nielsen", compare=False)

    @property
    def rank(self) -> int:
        return self.forward.rank

    @property
    def images(self) -> tuple:
        return self.forward.images

    def apply_letters(self, letters) -> list:
        return self.forward.apply_letters(letters)

    def __call__(self, w: ReducedWord) -> ReducedWord:
        return apply(self.forward, w)

    def inv(self) -> "Automorphism":
        return Automorphism(self.inverse, self.forward, None, "swap")

    def bcc(self) -> int:
        """Bounded cancellation constant.

        If ``u v`` is reduced then at most this many letters cancel between
        ``alpha(u)`` and ``alpha(v)``: with L = Lip(alpha), K = Lip(alpha^-1),
        a K-coarse path through 1 forces cancellation <= L * floor(K / 2).
        """
        return self.forward.lipschitz() * (self.inverse.lipschitz() // 2)

    def __str__(self) -> str:
        return str(self.forward)


Map = Union[Endomorphism, Automorphism]


def _endo(phi: Map) -> Endomorphism:
    return phi.forward


def apply(phi: Map, w: ReducedWord) -> ReducedWord:
    phi = _endo(phi)
    if w.rank != phi.rank:
        raise RankError(f"rank mismatch: word {w.rank}, map {phi.rank}")
    return ReducedWord._trusted(phi.rank, tuple(phi.apply_letters(w.letters)))


def apply_ep(alpha: Map, X: EventuallyPeriodicWord) -> EventuallyPeriodicWord:
    """Image of the boundary point ``u c^inf``: ``alpha(u) . alpha(c)^inf`` normalised."""
    phi = _endo(alpha)
    if X.rank != phi.rank:
        raise RankError("rank mismatch")
    image_c = apply(phi, X.period)
    if not image_c:
        raise ValueError("period is killed by the endomorphism")
    return ep_normalize(apply(phi, X.prefix), image_c)


def compose(phi: Map, psi: Map) -> Endomorphism:
    """``phi o psi``: first ``psi``, then ``phi``."""
    phi, psi = _endo(phi), _endo(psi)
    if phi.rank != psi.rank:
        raise RankError("rank mismatch")
    return Endomorphism(phi.rank, tuple(apply(phi, w) for w in psi.images))


def compose_aut(a: Automorphism, b: Automorphism) -> Automorphism:
    return Automorphism(compose(a.forward, b.forward), compose(b.inverse, a.inverse), None, "compose")


def identity_automorphism(rank: int) -> Automorphism:
    e = Endomorphism.identity(rank)
    return Automorphism(e, e, (), "identity")


def power(alpha: Automorphism, n: int) -> Automorphism:
    if n < 0:
        return power(alpha.inv(), -n)
    result = identity_automorphism(alpha.rank)
    base = alpha
    while n:
        if n & 1:
            result = compose_aut(result, base)
        n >>= 1
        if n:
            base = compose_aut(base, base)
    return result


def inner(w: ReducedWord) -> Automorphism:
    k = w.rank

    def conj(u: ReducedWord) -> Endomorphism:
        return Endomorphism(k, tuple(multiply(multiply(u, g), invert(u)) for g in Endomorphism.identity(k).images))

    return Automorphism(conj(w), conj(invert(w)), None, "inner")


def twist(alpha: Automorphism, w: ReducedWord, q: int = 1) -> Automorphism:
    """``i_w o alpha^q``."""
    return compose_aut(inner(w), power(alpha, q))


def abelianization(phi: Map) -> list:
    """Row i counts (with sign) each generator in the image of generator i.

    With this row convention ``abelianization(compose(phi, psi))`` equals
    ``abelianization(psi) @ abelianization(phi)``.
    """
    phi = _endo(phi)
    k = phi.rank
    rows = []
    for w in phi.images:
        row = [0] * k
        for x in w.letters:
            row[abs(x) - 1] += 1 if x > 0 else -1
        rows.append(row)
    return rows


def determinant(matrix) -> int:
    n = len(matrix)
    m = [[Fraction(x) for x in row] for row in matrix]
    det = Fraction(1)
    for c in range(n):
        pivot = next((r for r in range(c, n) if m[r][c] != 0), None)
        if pivot is None:
            return 0
        if pivot != c:
            m[c], m[pivot] = m[pivot], m[c]
            det = -det
        det *= m[c][c]
        for r in range(c + 1, n):
            f = m[r][c] / m[c][c]
            if f:
                for cc in range(c, n):
                    m[r][cc] -= f * m[c][cc]
    return int(det)


# -- Nielsen reduction ------------------------------------------------------

def _tuple_key(ws) -> tuple:
    total = sum(len(w) for w in ws)
    return (total, tuple((len(w), tuple(2 * abs(x) + (x < 0) for x in w)) for w in ws))


def _candidate_moves(k: int):
    for i in range(k):
        yield NielsenMove("invert", i)
        for j in range(k):
            if i == j:
                continue
            for e in (1, -1):
                yield NielsenMove("right", i, j, e)
                yield NielsenMove("left", i, j, e)


def nielsen_reduce(ws: list, max_steps: int = 100000):
    """Greedy Nielsen reduction: apply the move giving the smallest key, while it decreases.

    Returns the final tuple and the list of moves applied.
    """
    ws = [tuple(w) for w in ws]
    k = len(ws)
    moves = []
    key = _tuple_key(ws)
    for _ in range(max_steps):
        best = None
        for mv in _candidate_moves(k):
            cand = mv.on_tuple(ws)
            ck = _tuple_key(cand)
            if ck < key and (best is None or ck < best[0]):
                best = (ck, mv, cand)
        if best is None:
            break
        key, mv, ws = best
        moves.append(mv)
    return ws, moves


def _signed_permutation(ws) -> Optional[list]:
    if any(len(w) != 1 for w in ws):
        return None
    gens = sorted(abs(w[0]) for w in ws)
    if gens != list(range(1, len(ws) + 1)):
        return None
    return [w[0] for w in ws]


def stallings_inverse(phi: Endomorphism) -> Optional[Endomorphism]:
    """Decide surjectivity by folding the subgroup graph of the images.

    Edges carry labels in the free group on the images (so every loop at the
    base vertex reads the subgroup element it represents).  Returns the inverse
    when the folded graph is the standard rose, else ``None``.
    """
    k = phi.rank
    records = []  # [src, letter>0, dst, label-tuple]
    nxt = 1
    for i, w in enumerate(phi.images, start=1):
        if not w:
            return None
        path = [0]
        for _ in range(len(w) - 1):
            path.append(nxt)
            nxt += 1
        path.append(0)
        for pos, x in enumerate(w.letters):
            label = (i,) if pos == 0 else ()
            s, t = path[pos], path[pos + 1]
            if x > 0:
                records.append([s, x, t, label])
            else:
                records.append([t, -x, s, tuple(-y for y in reversed(label))])

    def inv(l):
        return tuple(-y for y in reversed(l))

    while True:
        seen = {}
        fold = None
        for idx, (s, x, t, lab) in enumerate(records):
            for v, sx, w, l in ((s, x, t, lab), (t, -x, s, inv(lab))):
                key = (v, sx)
                if key in seen:
                    fold = (seen[key], (idx, v, sx, w, l))
                    break
                seen[key] = (idx, v, sx, w, l)
            if fold:
                break
        if fold is None:
            break
        (i1, v, _, t1, l1), (i2, _, _, t2, l2) = fold
        if t2 == 0:
            # never merge the base vertex away
            i1, t1, l1, i2, t2, l2 = i2, t2, l2, i1, t1, l1
        delta = tuple(free_reduce(inv(l1) + l2))
        del records[i2]
        if t1 == t2:
            if delta:
                return None  # a nontrivial relation: not injective, hence not surjective
            continue
        dinv = inv(delta)
        for rec in records:
            s, x, t, lab = rec
            if s == t2:
                lab = tuple(free_reduce(delta + lab))
            if t == t2:
                lab = tuple(free_reduce(lab + dinv))
            rec[0] = t1 if s == t2 else s
            rec[2] = t1 if t == t2 else t
            rec[3] = lab
    if len(records) != k or any(r[0] != 0 or r[2] != 0 for r in records):
        return None
    if sorted(r[1] for r in records) != list(range(1, k + 1)):
        return None
    images = [None] * k
    for s, x, t, lab in records:
        images[x - 1] = ReducedWord._trusted(k, lab)
    return Endomorphism(k, tuple(images))


def _fixes_basis(phi: Endomorphism, psi: Endomorphism) -> bool:
    return all(apply(phi, apply(psi, g)) == g for g in Endomorphism.identity(phi.rank).images)


def verify_and_invert(phi: Map) -> Automorphism:
    """Certify that ``phi`` is an automorphism and build its inverse.

    Raises DeterminantObstruction when the abelianization is not unimodular and
    NotSurjective when the images do not form a basis.
    """
    phi = _endo(phi)
    k = phi.rank
    det = determinant(abelianization(phi))
    if det not in (1, -1):
        raise DeterminantObstruction(f"abelianization determinant is {det}")
    final, moves = nielsen_reduce([w.letters for w in phi.images])
    perm = _signed_permutation(final)
    if perm is not None:
        ws = [(i,) for i in range(1, k + 1)]
        for mv in moves:
            ws = mv.on_tuple(ws)
        # phi o nu_1 o ... o nu_r = sigma, so phi^-1 = (nu_1 o ... o nu_r) o sigma^-1.
        psi = Endomorphism(k, tuple(ReducedWord._trusted(k, w) for w in ws))
        sig_inv = [None] * k
        for i, x in enumerate(perm, start=1):
            sig_inv[abs(x) - 1] = ReducedWord._trusted(k, (i if x > 0 else -i,))
        inverse = compose(psi, Endomorphism(k, tuple(sig_inv)))
        method = "nielsen"
        certificate = tuple(moves)
    else:
        inverse = stallings_inverse(phi)
        if inverse is None:
            raise NotSurjective("images do not Nielsen-reduce to a basis")
        method, certificate = "stallings", None
    if not (_fixes_basis(phi, inverse) and _fixes_basis(inverse, phi)):
        raise NotSurjective("inverse failed the round-trip check")
    return Automorphism(phi, inverse, certificate, method)


def automorphism(*images: str) -> Automorphism:
    """Shorthand: ``automorphism("cb", "a", "ba")``."""
    return verify_and_invert(Endomorphism.from_strings(images))


def random_automorphism(rank: int, n_moves: int, rng: random.Random) -> Automorphism:
    """Compose ``n_moves`` random elementary Nielsen moves (invertible by construction)."""
    fwd = [(i,) for i in range(1, rank + 1)]
    moves = []
    for _ in range(n_moves):
        i, j = rng.sample(range(rank), 2)
        kind = rng.choice(("right", "left", "right", "left", "invert"))
        mv = NielsenMove(kind, i, j, rng.choice((1, -1)))
        fwd = mv.on_tuple(fwd)
        moves.append(mv)
    # fwd = nu_1 o ... o nu_n, so the inverse is nu_n^-1 o ... o nu_1^-1.
    inv = [(i,) for i in range(1, rank + 1)]
    for mv in reversed(moves):
        inv = mv.inverse().on_tuple(inv)
    f = Endomorphism(rank, tuple(ReducedWord._trusted(rank, w) for w in fwd))
    g = Endomorphism(rank, tuple(ReducedWord._trusted(rank, w) for w in inv))
    return Automorphism(f, g, None, "random")


# -- text format --------------------------------------------------------------

def parse_automorphism_text(text: str) -> Endomorphism:
    """Parse ``rank k`` followed by one ``a -> cb`` line per generator."""
    rank = None
    images = {}
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if rank is None:
            parts = line.split()
            if len(parts) != 2 or parts[0] != "rank" or not parts[1].isdigit():
                raise ParseError("expected header 'rank k'", n)
            rank = int(parts[1])
            if not 1 <= rank <= 26:
                raise ParseError("rank must be in 1..26 for text files", n)
            continue
        if "->" not in line:
            raise ParseError(f"expected 'x -> word', got {line!r}", n)
        lhs, rhs = (s.strip() for s in line.split("->", 1))
        if len(lhs) != 1 or not lhs.islower():
            raise ParseError(f"left side must be a generator, got {lhs!r}", n)
        i = char_to_letter(lhs)
        if i > rank:
            raise ParseError(f"generator {lhs} out of rank {rank}", n)
        if i in images:
            raise ParseError(f"duplicate image for {lhs}", n)
        try:
            images[i] = ReducedWord.parse(rhs, rank)
        except (ValueError, RankError) as exc:
            raise ParseError(f"bad image {rhs!r}: {exc}", n) from None
    if rank is None:
        raise ParseError("empty automorphism file")
    missing = [letter_to_char(i) for i in range(1, rank + 1) if i not in images]
    if missing:
        raise ParseError(f"missing images for {', '.join(missing)}")
    return Endomorphism(rank, tuple(images[i] for i in range(1, rank + 1)))


def format_automorphism_text(phi: Map) -> str:
    phi = _endo(phi)
    lines = [f"rank {phi.rank}"]
    lines += [f"{letter_to_char(i)} -> {w}" for i, w in enumerate(phi.images, start=1)]
    return "\n".join(lines) + "\n"
