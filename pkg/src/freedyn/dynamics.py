"""Orbits of automorphisms on F_k and its boundary.

The central routine iterates a point and watches the length-``L`` prefixes of
the iterates.  A limit cycle of period ``q`` is *certified* once, for every
residue ``r mod q``, the last ``window`` iterates in that residue class share
their first ``L`` letters.  A certificate is evidence at finite depth, not a
proof; when the budget runs out we raise :class:`NoConvergenceDetected`, which
never means the orbit diverges.

Long words are not kept in full.  Once a word outgrows ``exact_cap`` only a
prefix is kept, and each application of the automorphism discards the last
``bcc`` letters of the image of that prefix (the bounded cancellation
constant), which keeps every retained letter exact.
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .automorphisms import Automorphism, apply, apply_ep, power, twist
from .errors import (
    NoConvergenceDetected,
    NonExponential,
    NotFoundWithinBudget,
    SequencePeriodic,
)
from .words import (
    BoundaryPrefixOracle,
    EventuallyPeriodicWord,
    ReducedWord,
    all_reduced_words,
    ep_normalize,
    ep_power,
    ep_prefix,
    gromov_product,
    known_letters,
    multiply,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Budget:
    n_max: int = 400
    q_max: int = 60
    cert_depth: int = 64
    window: int = 8
    exact_cap: int = 20000
    prefix_cap: Optional[int] = None
    max_ep_period: int = 64

    def cap_for(self, bcc: int) -> int:
        if self.prefix_cap is not None:
            return self.prefix_cap
        return max(8 * self.cert_depth, 8 * bcc, 512)


DEFAULT_BUDGET = Budget()


# -- prefix tracking ----------------------------------------------------------

@dataclass(frozen=True)
class _Word:
    letters: tuple
    complete: bool


@dataclass
class _Stepper:
    """One application of the automorphism to a tracked state."""

    alpha: Automorphism
    budget: Budget
    right: tuple = ()

    def __post_init__(self):
        self.bcc = self.alpha.bcc()
        self.cap = self.budget.cap_for(self.bcc)
        self._apply = self.alpha.forward.apply_letters

    def __call__(self, state):
        if isinstance(state, EventuallyPeriodicWord):
            nxt = apply_ep(self.alpha, state)
            if len(nxt.prefix) + len(nxt.period) <= self.budget.exact_cap:
                return nxt
            return _Word(ep_prefix(nxt, self.cap).letters, False)
        if state.complete:
            out = self._apply(state.letters)
            if self.right:
                out = _right_multiply(out, self.right)
            if len(out) <= self.budget.exact_cap:
                return _Word(tuple(out), True)
            keep = len(out) - len(self.right)
            return _Word(tuple(out[: min(keep, self.cap)]), False)
        out = self._truncated_image(state.letters)
        keep = len(out) - self.bcc - len(self.right)
        if keep <= 0:
            return _Word((), False)
        return _Word(tuple(out[: min(keep, self.cap)]), False)

    def _truncated_image(self, letters: tuple) -> list:
        # Image of a prefix; stops once enough letters are certified.
        table = self.alpha.forward._table
        need = self.cap + self.bcc + len(self.right)
        out: list = []
        for x in letters:
            for y in table[x]:
                if out and out[-1] == -y:
                    out.pop()
                else:
                    out.append(y)
            if len(out) >= need:
                break
        return out


def _right_multiply(out: list, w: tuple) -> list:
    out = list(out)
    for y in w:
        if out and out[-1] == -y:
            out.pop()
        else:
            out.append(y)
    return out


def _letters_of(state, depth: int) -> tuple:
    if isinstance(state, EventuallyPeriodicWord):
        return ep_prefix(state, depth).letters
    return state.letters[:depth]


def _known_len(state, cap: int) -> int:
    if isinstance(state, EventuallyPeriodicWord):
        return cap
    return len(state.letters)


# -- limit sets -----------------------------------------------------------------

@dataclass(frozen=True)
class Certificate:
    depth: int
    start_index: int
    window: int
    iterations: int
    exact: bool = False


@dataclass(frozen=True)
class OmegaLimit:
    """A certified limit cycle.

    ``points[r]`` is the limit of the iterates with index ``r mod period``, so
    the automorphism carries ``points[r]`` to ``points[(r + 1) % period]``.
    ``kind`` is ``"limit"`` for a genuine limit set, ``"periodic_element"``
    when the start is itself a periodic element of F_k, and
    ``"periodic_point"`` when an exact cycle of boundary points was reached.
    """

    period: int
    points: tuple
    certificate: Certificate
    kind: str = "limit"

    @property
    def q(self) -> int:
        return self.period

    def to_json(self) -> dict:
        return {
            "period": self.period,
            "kind": self.kind,
            "points": [point_text(p) for p in self.points],
            "point_types": [type(p).__name__ for p in self.points],
            "certificate": {
                "depth": self.certificate.depth,
                "start_index": self.certificate.start_index,
                "window": self.certificate.window,
                "iterations": self.certificate.iterations,
                "exact": self.certificate.exact,
            },
        }


def point_text(P, depth: int = 128) -> str:
    """Text for a point; prefix oracles are cut to ``depth`` letters."""
    if isinstance(P, BoundaryPrefixOracle):
        return f"{ReducedWord._trusted(P.rank, P.known.letters[:depth])}..."
    return str(P)


def _common_prefix_len(seqs: Sequence[tuple]) -> int:
    first = seqs[0]
    n = min(len(s) for s in seqs)
    i = 0
    while i < n and all(s[i] == first[i] for s in seqs[1:]):
        i += 1
    return i


def ep_candidates(S: tuple, max_period: int = 64):
    """``(u, c)`` splittings of ``S`` whose tail repeats ``c`` at least three times."""
    N = len(S)
    for p in range(1, min(max_period, N // 3) + 1):
        i = N - p
        while i > 0 and S[i - 1] == S[i - 1 + p]:
            i -= 1
        if N - i >= 3 * p:
            yield S[:i], S[i : i + p]


def _promote(alpha: Automorphism, q: int, stable: list, budget: Budget) -> Optional[tuple]:
    """Try to recognise the limit cycle as eventually periodic words.

    A candidate for residue 0 is kept only if it is fixed by alpha^q exactly
    and its images under alpha reproduce every other residue's stable prefix.
    """
    rank = alpha.rank
    for u, c in ep_candidates(stable[0], budget.max_ep_period):
        X = ep_normalize(ReducedWord._trusted(rank, u), ReducedWord._trusted(rank, c))
        pts = [X]
        ok = True
        Y = X
        for r in range(1, q + 1):
            Y = apply_ep(alpha, Y)
            if len(Y.prefix) + len(Y.period) > budget.exact_cap:
                ok = False
                break
            if r < q:
                S = stable[r]
                if ep_prefix(Y, len(S)).letters != S:
                    ok = False
                    break
                pts.append(Y)
        if ok and Y == X:
            return tuple(pts)
    return None


def _certify(stepper: Callable, start, budget: Budget, alpha: Automorphism, *, detect_return=True) -> OmegaLimit:
    L, W = budget.cert_depth, budget.window
    cap = getattr(stepper, "cap", budget.cap_for(alpha.bcc()))
    states = [start]
    keys: list = []
    intern: dict = {}
    seen_ep: dict = {}

    def key_of(state):
        if _known_len(state, cap) < L:
            return None
        k = _letters_of(state, L)
        return intern.setdefault(k, len(intern))

    keys.append(key_of(start))
    if isinstance(start, EventuallyPeriodicWord):
        seen_ep[start] = 0
    for n in range(1, budget.n_max + 1):
        state = stepper(states[-1])
        states.append(state)
        keys.append(key_of(state))
        if isinstance(state, EventuallyPeriodicWord):
            if state in seen_ep:
                m = seen_ep[state]
                q = n - m
                cyc = states[m:n]
                pts = tuple(cyc[(r - m) % q] for r in range(q))
                kind = "periodic_point" if m == 0 else "limit"
                return OmegaLimit(q, pts, Certificate(math.inf, m, 1, n, True), kind)
            seen_ep[state] = n
        elif detect_return and state.complete and isinstance(start, _Word) and start.complete:
            if state.letters == start.letters:
                pts = tuple(ReducedWord._trusted(alpha.rank, s.letters) for s in states[:n])
                return OmegaLimit(n, pts, Certificate(math.inf, 0, 1, n, True), "periodic_element")
        if keys[n] is None:
            continue
        for q in range(1, budget.q_max + 1):
            lo = n - (W - 1) * q
            if lo - q < 0:
                break
            if all(keys[m] is not None and keys[m] == keys[m - q] for m in range(lo, n + 1)):
                return _build_limit(alpha, q, states, n, budget, cap)
    raise NoConvergenceDetected(
        f"no period <= {budget.q_max} certified at depth {L} within {budget.n_max} iterations"
    )


def _build_limit(alpha, q, states, n, budget, cap) -> OmegaLimit:
    W = budget.window
    stable = [None] * q
    for m in range(n - q + 1, n + 1):
        samples = [_letters_of(states[j], cap) for j in range(m, m - W * q, -q)]
        S = samples[0][: _common_prefix_len(samples)]
        stable[m % q] = S
    rank = alpha.rank
    cert = Certificate(budget.cert_depth, n - W * q + 1, W, n)
    pts = _promote(alpha, q, stable, budget)
    if pts is None:
        pts = tuple(BoundaryPrefixOracle(rank, ReducedWord._trusted(rank, S)) for S in stable)
    return OmegaLimit(q, pts, cert)


def omega_limit(alpha: Automorphism, g: ReducedWord, q_max: Optional[int] = None, n_max: Optional[int] = None,
                cert_depth: Optional[int] = None, budget: Budget = DEFAULT_BUDGET) -> OmegaLimit:
    """Limit cycle of ``alpha^n(g)`` for ``g`` in F_k."""
    budget = _override(budget, q_max, n_max, cert_depth)
    start = _Word(g.letters, True)
    return _certify(_Stepper(alpha, budget), start, budget, alpha)


def omega_limit_boundary(alpha: Automorphism, X, q_max: Optional[int] = None, n_max: Optional[int] = None,
                         cert_depth: Optional[int] = None, budget: Budget = DEFAULT_BUDGET) -> OmegaLimit:
    """Limit cycle of ``(d alpha)^n(X)`` for a boundary point (or a finite word, treated as interior)."""
    budget = _override(budget, q_max, n_max, cert_depth)
    if isinstance(X, ReducedWord):
        return omega_limit(alpha, X, budget=budget)
    if isinstance(X, BoundaryPrefixOracle):
        start = _Word(X.known.letters, False)
    else:
        start = X
    return _certify(_Stepper(alpha, budget), start, budget, alpha)


def _override(budget: Budget, q_max, n_max, cert_depth) -> Budget:
    changes = {k: v for k, v in (("q_max", q_max), ("n_max", n_max), ("cert_depth", cert_depth)) if v is not None}
    if not changes:
        return budget
    return Budget(**{**budget.__dict__, **changes})


def check_cyclic(alpha: Automorphism, limit: OmegaLimit, depth: int = 64) -> list:
    """Check that d(alpha) carries point r to point r+1 at the given depth.

    Returns a list of ``(r, status)`` problems, where status is ``"violation"``
    or ``"insufficient"`` (too few certified letters to decide).
    """
    problems = []
    q = limit.period
    bcc = alpha.bcc()
    for r, P in enumerate(limit.points):
        Q = limit.points[(r + 1) % q]
        if isinstance(P, ReducedWord):
            if apply(alpha, P) != Q:
                problems.append((r, "violation"))
            continue
        if isinstance(P, EventuallyPeriodicWord):
            img = apply_ep(alpha, P)
            if isinstance(Q, EventuallyPeriodicWord):
                if img != Q:
                    problems.append((r, "violation"))
                continue
            image_letters = ep_prefix(img, depth).letters
        else:
            out = alpha.apply_letters(P.known.letters)
            image_letters = tuple(out[: max(0, len(out) - bcc)])
        target = known_letters(Q, depth)
        d = min(depth, len(image_letters), len(target))
        if image_letters[:d] != target[:d]:
            problems.append((r, "violation"))
        elif d < depth:
            problems.append((r, "insufficient"))
    return problems


# -- orbits ---------------------------------------------------------------------

@dataclass(frozen=True)
class OrbitTrace:
    automorphism: str
    start: ReducedWord
    terms: tuple
    lengths: tuple

    def to_json(self) -> dict:
        return {"automorphism": self.automorphism, "start": str(self.start),
                "terms": [str(t) for t in self.terms], "lengths": list(self.lengths)}


def orbit(alpha: Automorphism, g: ReducedWord, n_max: int) -> OrbitTrace:
    """The exact terms ``g, alpha(g), ..., alpha^(n_max - 1)(g)``."""
    terms = [g]
    for _ in range(n_max - 1):
        terms.append(apply(alpha, terms[-1]))
    return OrbitTrace(str(alpha), g, tuple(terms), tuple(len(t) for t in terms))


# -- w_p sequences ----------------------------------------------------------------

def w_sequence(alpha: Automorphism, w: ReducedWord, p_max: int) -> list:
    """``[w_1, ..., w_pmax]`` with ``w_p = alpha^(p-1)(w) ... alpha(w) w``.

    Uses ``w_(p+1) = alpha(w_p) w``, which follows by expanding the product.
    """
    seq = [w]
    for _ in range(p_max - 1):
        seq.append(multiply(apply(alpha, seq[-1]), w))
    return seq


def w_sequence_direct(alpha: Automorphism, w: ReducedWord, p: int) -> ReducedWord:
    """``w_p`` straight from its definition (independent of the recursion)."""
    out = ReducedWord.identity(w.rank)
    img = w
    factors = []
    for _ in range(p):
        factors.append(img)
        img = apply(alpha, img)
    for f in reversed(factors):
        out = multiply(out, f)
    return out


def w_sequence_limit(alpha: Automorphism, w: ReducedWord, budget: Budget = DEFAULT_BUDGET) -> OmegaLimit:
    """Limit cycle of the sequence ``w_n``; raises SequencePeriodic for periodic sequences."""
    stepper = _Stepper(alpha, budget, right=w.letters)
    seen = {w.letters: 0}
    states = [_Word(w.letters, True)]
    # exact phase: look for a repeat among the complete terms
    for n in range(1, budget.q_max + 1):
        s = stepper(states[-1])
        if not s.complete:
            break
        states.append(s)
        if s.letters in seen:
            m = seen[s.letters]
            cycle = [ReducedWord._trusted(w.rank, t.letters) for t in states[m:n]]
            raise SequencePeriodic(cycle, f"w_n repeats with period {n - m} from index {m + 1}")
        seen[s.letters] = n
    return _certify(stepper, _Word(w.letters, True), budget, alpha, detect_return=False)


# -- fixed and periodic words -------------------------------------------------------

def word_period(alpha: Automorphism, g: ReducedWord, p_max: int, length_cap: int = 10000) -> Optional[int]:
    """Exact period of ``g`` if it is at most ``p_max``, else None."""
    w = g
    for p in range(1, p_max + 1):
        w = apply(alpha, w)
        if w == g:
            return p
        if len(w) > length_cap:
            return None
    return None


def fixed_words(alpha: Automorphism, L_max: int) -> list:
    """All reduced words of length <= L_max fixed by alpha (exhaustive)."""
    return [g for g in all_reduced_words(alpha.rank, L_max) if apply(alpha, g) == g]


def periodic_words(alpha: Automorphism, L_max: int, p_max: int) -> list:
    """``(word, period)`` for every periodic word of length <= L_max with period <= p_max."""
    out = []
    for g in all_reduced_words(alpha.rank, L_max):
        p = word_period(alpha, g, p_max)
        if p is not None:
            out.append((g, p))
    return out


# -- fixed point classification -------------------------------------------------------

@dataclass(frozen=True)
class FixedPointClass:
    kind: str
    evidence: tuple
    in_fix_boundary: bool = False

    def to_json(self) -> dict:
        return {"kind": self.kind, "in_fix_boundary": self.in_fix_boundary,
                "evidence": [dict(e) for e in self.evidence]}


PERTURBATION_DEPTHS = (4, 8, 16, 32)


def _limit_matches(limit: OmegaLimit, X, depth: int) -> bool:
    if limit.period != 1:
        return False
    P = limit.points[0]
    if isinstance(P, EventuallyPeriodicWord) and isinstance(X, EventuallyPeriodicWord):
        return P == X
    if isinstance(P, ReducedWord):
        return False
    return gromov_product(P, X) >= depth


def _is_fixed(alpha: Automorphism, X, depth: int) -> bool:
    if isinstance(X, EventuallyPeriodicWord):
        return apply_ep(alpha, X) == X
    out = alpha.apply_letters(X.known.letters)
    img = out[: max(0, len(out) - alpha.bcc())]
    d = min(depth, len(img), len(X.known))
    return d > 0 and tuple(img[:d]) == X.known.letters[:d]


def perturbations(X, depth: int = 32, samples: Optional[int] = None) -> list:
    """Finite seeds ``X[:d] l`` for ``d`` in 4, 8, 16, 32 up to ``depth``, with ``l != X[d]`` admissible."""
    rank = X.rank
    seeds = []
    for d in PERTURBATION_DEPTHS:
        if d > depth:
            break
        letters = known_letters(X, d + 1)
        if len(letters) < d + 1:
            continue
        pre, nxt = letters[:d], letters[d]
        row = []
        for i in range(1, rank + 1):
            for l in (i, -i):
                if l == nxt or (pre and pre[-1] == -l):
                    continue
                row.append((d, ReducedWord._trusted(rank, pre + (l,))))
        seeds.extend(row[:samples])
    return seeds


def classify_fixed_point(alpha: Automorphism, X, depth: int = 32, samples: Optional[int] = None,
                         budget: Budget = DEFAULT_BUDGET, fixed_elements: Sequence[ReducedWord] = ()) -> FixedPointClass:
    """Attracting / repelling / half-half classification by perturbation.

    Each perturbed seed is iterated forward (alpha) and backward (alpha^-1)
    with equal budgets; a seed "returns" in a direction when its certified
    limit is X itself.
    """
    L = budget.cert_depth
    if not _is_fixed(alpha, X, L):
        raise ValueError("X is not fixed by the automorphism at certificate depth")
    inv = alpha.inv()
    cmp_depth = L if not isinstance(X, BoundaryPrefixOracle) else min(L, X.stabilization_depth)
    evidence = []
    for d, seed in perturbations(X, depth, samples):
        rec = {"depth": d, "seed": str(seed)}
        for name, a in (("forward", alpha), ("backward", inv)):
            try:
                lim = omega_limit_boundary(a, seed, budget=budget)
                rec[name] = "returns" if _limit_matches(lim, X, cmp_depth) else "leaves"
            except NoConvergenceDetected:
                rec[name] = "unknown"
        evidence.append(tuple(sorted(rec.items())))
    recs = [dict(e) for e in evidence]
    in_fix = False
    if isinstance(X, EventuallyPeriodicWord):
        in_fix = any(g and X in (ep_power(g, 1), ep_power(g, -1)) for g in fixed_elements)
    fwd = [r["forward"] == "returns" for r in recs]
    bwd = [r["backward"] == "returns" for r in recs]
    if recs and all(fwd):
        kind = "attracting"
    elif recs and all(bwd):
        kind = "repelling"
    elif (recs and all(f or b for f, b in zip(fwd, bwd))
          and any(f and not b for f, b in zip(fwd, bwd)) and any(b and not f for f, b in zip(fwd, bwd))):
        kind = "half-half"
    elif in_fix:
        kind = "in-boundary-of-fixed-subgroup"
    else:
        kind = "undetermined"
    return FixedPointClass(kind, tuple(evidence), in_fix)


# -- the bipartite graph of fixed points -------------------------------------------------

@dataclass(frozen=True)
class GammaGraph:
    repelling: tuple
    attracting: tuple
    edges: tuple  # (repelling index, attracting index, witness seeds)
    unresolved: tuple  # (seed, reason)

    def to_json(self) -> dict:
        return {
            "repelling": [point_text(p) for p in self.repelling],
            "attracting": [point_text(p) for p in self.attracting],
            "edges": [{"from": i, "to": j, "witnesses": list(w)} for i, j, w in self.edges],
            "unresolved": [{"seed": s, "reason": r} for s, r in self.unresolved],
        }

    def to_dot(self, snippet: int = 12) -> str:
        def label(p):
            if isinstance(p, EventuallyPeriodicWord):
                return str(p)
            return str(ReducedWord._trusted(p.rank, known_letters(p, snippet))) + "..."
        lines = ["digraph Gamma {"]
        for i, p in enumerate(self.repelling):
            lines.append(f'  R{i} [label="{label(p)}", shape=box];')
        for j, p in enumerate(self.attracting):
            lines.append(f'  A{j} [label="{label(p)}", shape=ellipse];')
        for i, j, w in self.edges:
            lines.append(f'  R{i} -> A{j} [label="{w[0]}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _same_point(P, Q, L: int) -> bool:
    if isinstance(P, EventuallyPeriodicWord) and isinstance(Q, EventuallyPeriodicWord):
        return P == Q
    need = 2 * L
    avail = min(_avail(P), _avail(Q))
    return gromov_product(P, Q) >= min(need, max(avail, L))


def _avail(P) -> int:
    if isinstance(P, BoundaryPrefixOracle):
        return P.stabilization_depth
    return 10 ** 9


def _vertex(vs: list, P, L: int) -> int:
    for i, Q in enumerate(vs):
        if _same_point(P, Q, L):
            return i
    vs.append(P)
    return len(vs) - 1


def _two_sided(args):
    alpha, seed, budget = args
    try:
        fwd = omega_limit_boundary(alpha, seed, budget=budget)
        bwd = omega_limit_boundary(alpha.inv(), seed, budget=budget)
    except NoConvergenceDetected as exc:
        return None, None, f"no convergence: {exc}"
    if fwd.kind == "periodic_element" or bwd.kind == "periodic_element":
        return None, None, "seed is a periodic element"
    if fwd.period != 1 or bwd.period != 1:
        return None, None, f"limit periods {bwd.period}/{fwd.period}; raise alpha to a power first"
    return bwd.points[0], fwd.points[0], None


def _pmap(fn, items: list, workers: int) -> list:
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def gamma_graph(alpha: Automorphism, seeds: Sequence, budget: Budget = DEFAULT_BUDGET, workers: int = 1) -> GammaGraph:
    """Edges from repelling to attracting fixed points witnessed by the seeds."""
    results = _pmap(_two_sided, [(alpha, s, budget) for s in seeds], workers)
    rep: list = []
    att: list = []
    edges: dict = {}
    unresolved = []
    for seed, (x1, x2, why) in zip(seeds, results):
        if why is not None:
            unresolved.append((str(seed), why))
            continue
        i = _vertex(rep, x1, budget.cert_depth)
        j = _vertex(att, x2, budget.cert_depth)
        edges.setdefault((i, j), []).append(str(seed))
    return GammaGraph(tuple(rep), tuple(att),
                      tuple((i, j, tuple(w)) for (i, j), w in sorted(edges.items())), tuple(unresolved))


# -- period census ----------------------------------------------------------------------

@dataclass(frozen=True)
class CensusReport:
    periods: frozenset
    word_periods: tuple  # (word, period)
    seed_periods: tuple  # (seed, period or None)
    bound: Optional[int] = None
    violations: tuple = ()

    def to_json(self) -> dict:
        return {
            "periods": sorted(self.periods),
            "word_periods": [{"word": str(w), "period": p} for w, p in self.word_periods],
            "seed_periods": [{"seed": s, "period": p} for s, p in self.seed_periods],
            "bound": self.bound,
            "violations": list(self.violations),
        }


def _seed_period(args):
    alpha, seed, budget = args
    try:
        return omega_limit_boundary(alpha, seed, budget=budget).period
    except NoConvergenceDetected:
        return None


def _word_period_job(args):
    alpha, g, q_max = args
    return word_period(alpha, g, q_max)


def periods_census(alpha: Automorphism, word_len_max: int, seeds: Sequence = (), q_max: int = 60,
                   bound: Optional[int] = None, budget: Budget = DEFAULT_BUDGET, workers: int = 1) -> CensusReport:
    """Periods of periodic words up to a length, plus certified periods of boundary seeds."""
    budget = _override(budget, q_max, None, None)
    words = list(all_reduced_words(alpha.rank, word_len_max))
    wp = _pmap(_word_period_job, [(alpha, g, q_max) for g in words], workers)
    word_periods = tuple((g, p) for g, p in zip(words, wp) if p is not None)
    sp = _pmap(_seed_period, [(alpha, s, budget) for s in seeds], workers)
    seed_periods = tuple((str(s), p) for s, p in zip(seeds, sp))
    periods = {p for _, p in word_periods} | {p for _, p in seed_periods if p is not None}
    violations = ()
    if bound is not None:
        violations = tuple(sorted(p for p in periods if p > bound))
        if violations:
            log.warning("observed periods %s exceed the configured bound %d", violations, bound)
    return CensusReport(frozenset(periods), word_periods, seed_periods, bound, violations)


# -- growth ---------------------------------------------------------------------------

def attraction_rate(alpha: Automorphism, g: ReducedWord, n_max: int = 200, window: int = 8,
                    length_cap: int = 1_000_000) -> float:
    """Geometric-mean growth ratio ``|alpha^(n+1) g| / |alpha^n g|`` over the last window.

    Raises NonExponential when the ratio drifts to 1 (polynomial growth).
    """
    lengths = [len(g)]
    w = g
    for _ in range(n_max):
        w = apply(alpha, w)
        lengths.append(len(w))
        if len(w) > length_cap:
            break
    n = len(lengths) - 1
    if n < 2 * window or lengths[n - window] == 0 or lengths[n // 2 - window] == 0:
        raise NonExponential("orbit too short or trivial to estimate a rate")
    end = (lengths[n] / lengths[n - window]) ** (1.0 / window)
    mid = (lengths[n // 2] / lengths[n // 2 - window]) ** (1.0 / window)
    if end - 1 < 1e-3 or (end - 1) < 0.75 * (mid - 1):
        raise NonExponential(f"length ratio tends to 1 (ratio {end:.6f} at n={n})")
    return end


# -- automorphisms with many fixed points ----------------------------------------------------

@dataclass(frozen=True)
class PositiveIndexResult:
    q: int
    w: ReducedWord
    count: int
    points: tuple
    tried: int


def fixed_boundary_points(beta: Automorphism, fix_len: int = 3, seed_len: int = 1,
                          budget: Budget = DEFAULT_BUDGET) -> tuple:
    """Distinct certified fixed points of d(beta) found from short seeds.

    Sources: ``g^(+-inf)`` for fixed words g, and period-1 limits of short
    words under beta and beta^-1.  When two non-commuting fixed words exist
    the fixed subgroup has rank >= 2 and its four ends are returned.
    """
    pts: list = []

    def add(P):
        if not any(_same_point(P, Q, budget.cert_depth) for Q in pts):
            pts.append(P)

    fixed = [g for g in fixed_words(beta, fix_len) if g]
    for g in fixed:
        add(ep_power(g, 1))
        add(ep_power(g, -1))
    inv = beta.inv()
    for s in all_reduced_words(beta.rank, seed_len):
        if not s:
            continue
        for a in (beta, inv):
            try:
                lim = omega_limit(a, s, budget=budget)
            except NoConvergenceDetected:
                continue
            if lim.kind != "periodic_element" and lim.period == 1:
                add(lim.points[0])
    return tuple(pts)


def positive_index_search(alpha: Automorphism, q_max: int = 6, w_len_max: int = 2, budget: int = 200,
                          fix_len: int = 3, limit_budget: Budget = Budget(n_max=120, q_max=1)) -> PositiveIndexResult:
    """Search the twists ``i_w o alpha^q`` for one with at least four fixed boundary points."""
    tried = 0
    for q in range(1, q_max + 1):
        aq = power(alpha, q)
        for w in all_reduced_words(alpha.rank, w_len_max):
            if tried >= budget:
                raise NotFoundWithinBudget(f"no twist with >= 4 fixed points among {tried} candidates")
            tried += 1
            beta = twist(aq, w, 1) if w else aq
            pts = fixed_boundary_points(beta, fix_len=fix_len, budget=limit_budget)
            if len(pts) >= 4:
                return PositiveIndexResult(q, w, len(pts), pts, tried)
    raise NotFoundWithinBudget(f"no twist with >= 4 fixed points among {tried} candidates")


def dumps(obj) -> str:
    return json.dumps(obj.to_json() if hasattr(obj, "to_json") else obj, sort_keys=True, indent=2)
