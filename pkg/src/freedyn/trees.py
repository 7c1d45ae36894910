"""Translation lengths in the tree of a train track map.

For a loop ``g`` the tree length is ``lim lambda^-p * PF(f^p g)``.  Two exact
exits avoid the limit:

* the tightened loop ``f^p g`` is legal: the value is ``lambda^-p * PF``;
* the loop recurs up to rotation and inversion: the value is 0;
* the illegal turns fall into clusters separated by long legal segments:
  each cluster is followed through K-edge windows of the legal segments
  around it, its cancellation
  ``C_k`` (in PF units) is eventually periodic, and
  ``l = lambda^-p * (PF_p - sum_k C_(p+k) / lambda^(k+1))`` sums exactly.

Otherwise successive estimates must settle within ``tol``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional, Sequence

from .automorphisms import Automorphism, apply
from .errors import NotConverged, PrerequisiteUnresolved, Undetermined
from .graphmaps import (
    GraphMap,
    PFData,
    TurnStructure,
    Unresolved,
    cyclic_tighten,
    gates,
    invert_path,
    is_train_track,
    map_pf,
    rose_from_automorphism,
    try_make_train_track,
)
from .words import ReducedWord, conjugacy_key, cyclic_reduce, invert


@dataclass(frozen=True)
class LengthReport:
    element: ReducedWord
    estimates: tuple
    value: float
    width: float
    legal_at: Optional[int]
    method: str  # legal | nielsen-window | periodic | converged | trivial

    @property
    def key(self) -> str:
        return str(conjugacy_key(self.element)) if self.element else "1"

    def to_json(self) -> dict:
        return {"class": self.key, "value": self.value, "enclosure": [self.value - self.width, self.value + self.width],
                "legal_at": self.legal_at, "method": self.method}


class _Lengths:
    def __init__(self, f: GraphMap, pf: PFData):
        self.f = f
        self.pf = pf
        self.edge = {e: pf.length_of(e) for e in range(1, f.graph.n_edges + 1)}

    def of(self, path) -> float:
        return sum(self.edge[abs(e)] for e in path)


def _tail(costs: list, lam: float) -> float:
    """``sum_k C_k / lam^(k+1)`` for an eventually periodic cost sequence ``(prefix, period)``."""
    total = 0.0
    for pre, per in costs:
        m = len(pre)
        head = sum(c / lam ** (k + 1) for k, c in enumerate(pre))
        cyc = sum(c / lam ** (j + 1) for j, c in enumerate(per))
        total += head + cyc / lam ** m / (1 - lam ** -len(per))
    return total


def _survivors(pieces: list) -> tuple:
    """Tighten the concatenation; also report how many letters of the first piece were never cancelled."""
    out: list = []
    low = len(pieces[0])
    for i, piece in enumerate(pieces):
        for x in piece:
            if out and out[-1] == -x:
                out.pop()
                if i:
                    low = min(low, len(out))
            else:
                out.append(x)
    return tuple(out), low


def _cluster_costs(f: GraphMap, L: "_Lengths", ts: TurnStructure, path: tuple, K: int,
                   max_steps: int, max_len: int) -> Optional[tuple]:
    """Eventually periodic PF cancellation inside a cluster of illegal turns.

    ``path`` starts and ends with K legal edges.  The windows are legal and f
    is a train track, so their images are tight and cancellation stays inside
    while it does not eat a whole window.  Each step keeps the tightened image, cut back to K window edges;
    once the states repeat the costs repeat.  Returns ``(prefix, period)`` or
    None when a window is eaten or the cluster keeps growing.
    """
    seen: dict = {}
    costs: list = []
    state = path
    while len(costs) <= max_steps:
        if state in seen:
            m = seen[state]
            return costs[:m], costs[m:]
        seen[state] = len(costs)
        if state == "legal":
            costs.append(0.0)
            continue
        fl, fm, fr = f.apply(state[:K]), f.apply(state[K:-K]), f.apply(state[-K:])
        q, left = _survivors([fl, fm, fr])
        _, right = _survivors([invert_path(fr), invert_path(fm), invert_path(fl)])
        if left < K or right < K or len(q) > max_len:
            return None
        costs.append(L.of(fl) + L.of(fm) + L.of(fr) - L.of(q))
        # edges beyond the K nearest the cluster join the outer legal segments
        q = q[left - K: len(q) - right + K]
        state = q if ts.illegal_positions(q) else "legal"
    return None


def _window_costs(f: GraphMap, L: "_Lengths", ts: TurnStructure, loop: tuple, turns: list, K: int,
                  max_steps: int = 400) -> Optional[list]:
    n = len(loop)
    m = len(turns)
    gaps = [(turns[(i + 1) % m] - t) % n or n for i, t in enumerate(turns)]
    breaks = [i for i in range(m) if gaps[i] >= 2 * K]
    if not breaks:
        return None
    out = []
    for j, b in enumerate(breaks):
        first = turns[(b + 1) % m]
        last = turns[breaks[(j + 1) % len(breaks)]]
        span = (last - first) % n
        path = tuple(loop[(first - K + 1 + i) % n] for i in range(span + 2 * K))
        res = _cluster_costs(f, L, ts, path, K, max_steps, 16 * K + 4 * span)
        if res is None:
            return None
        out.append(res)
    return out


def _cyclic_key(loop: tuple) -> tuple:
    return min(loop[i:] + loop[:i] for i in range(len(loop)))


def translation_length(f: GraphMap, pf: PFData, g, p_max: int = 60, tol: float = 1e-9,
                       ts: Optional[TurnStructure] = None, length_cap: int = 2_000_000,
                       window: int = 16) -> LengthReport:
    """Tree translation length of the class of ``g`` (a word, or a loop as an edge path)."""
    if isinstance(g, ReducedWord):
        element = g
        loop = f.graph.class_loop(g)
    else:
        loop = cyclic_tighten(g)
        element = ReducedWord(f.graph.betti, ()) if not loop else None
    if not loop:
        return LengthReport(element or ReducedWord(f.graph.betti, ()), (0.0,), 0.0, 0.0, 0, "trivial")
    ts = ts or gates(f)
    L = _Lengths(f, pf)
    lam = pf.lam
    lo, hi = float(pf.lo), float(pf.hi)
    windows_ok = lam > 1 and is_train_track(f, ts=ts)
    seen: set = set()
    estimates = []
    for p in range(p_max + 1):
        pf_len = L.of(loop)
        estimates.append(pf_len / lam ** p)
        turns = ts.illegal_positions(loop, cyclic=True)
        if not turns:
            width = abs(pf_len / lo ** p - pf_len / hi ** p) + 1e-12 * max(1.0, estimates[-1])
            return LengthReport(element, tuple(estimates), estimates[-1], width, p, "legal")
        if len(loop) <= 256:
            key = min(_cyclic_key(loop), _cyclic_key(invert_path(loop)))
            if key in seen:
                # the loop recurs, so its length stays bounded while lambda^p grows
                return LengthReport(element, tuple(estimates), 0.0, 0.0, None, "periodic")
            seen.add(key)
        if windows_ok:
            costs = None
            for K in (window, 3 * window):
                costs = _window_costs(f, L, ts, loop, turns, K)
                if costs is not None:
                    break
            if costs is not None:
                vals = [(pf_len - _tail(costs, x)) / x ** p for x in (lam, lo, hi)]
                width = abs(vals[1] - vals[2]) + 1e-12 * max(1.0, estimates[-1])
                return LengthReport(element, tuple(estimates), max(0.0, vals[0]), width, None, "nielsen-window")
        if len(estimates) >= 3 and abs(estimates[-1] - estimates[-2]) < tol * max(1.0, estimates[-1]):
            return LengthReport(element, tuple(estimates), estimates[-1], abs(estimates[-1] - estimates[-2]),
                                None, "converged")
        new = cyclic_tighten([x for e in loop for x in f.image(e)])
        if len(new) > length_cap:
            break
        loop = new
    raise NotConverged(f"translation length did not settle within {len(estimates) - 1} iterations")


def is_periodic_class(alpha: Automorphism, g: ReducedWord, p_max: int = 12, length_cap: int = 100000) -> bool:
    """Whether ``alpha^p`` maps the class of g to itself or its inverse for some p <= p_max."""
    if not g:
        return True
    keys = {conjugacy_key(g), conjugacy_key(invert(g))}
    w = g
    for _ in range(p_max):
        w = cyclic_reduce(apply(alpha, w))[1]
        if conjugacy_key(w) in keys:
            return True
        if len(w) > length_cap:
            return False
    return False


def ellipticity_check(f: GraphMap, g: ReducedWord, pf: Optional[PFData] = None, alpha: Optional[Automorphism] = None,
                      p_max: int = 60, tol: float = 1e-9, ts: Optional[TurnStructure] = None) -> str:
    """``"elliptic"`` or ``"hyperbolic"``; cross-checked against class periodicity when alpha is given."""
    if not g:
        return "elliptic"
    pf = pf or map_pf(f)
    try:
        rep = translation_length(f, pf, g, p_max, tol, ts)
    except NotConverged as exc:
        raise Undetermined(str(exc)) from exc
    scale = max(1.0, rep.estimates[0])
    if rep.value <= rep.width + tol * scale:
        verdict = "elliptic"
    elif rep.value - rep.width > tol * scale:
        verdict = "hyperbolic"
    else:
        raise Undetermined("length enclosure straddles zero")
    if alpha is not None:
        periodic = is_periodic_class(alpha, g)
        if periodic != (verdict == "elliptic"):
            raise Undetermined(f"length says {verdict} but class periodicity says {periodic}")
    return verdict


# -- product of the trees of alpha and alpha^-1 -----------------------------------------------

@dataclass(frozen=True)
class ProductRow:
    key: str
    length: float
    length_inv: float
    verdict: str
    verdict_inv: str

    def to_json(self) -> dict:
        return {"class": self.key, "length": self.length, "length_inv": self.length_inv,
                "verdict": self.verdict, "verdict_inv": self.verdict_inv}


@dataclass(frozen=True)
class ProductTreesReport:
    rows: tuple
    epsilon: Optional[float]
    mismatches: tuple
    undetermined: tuple

    def to_json(self) -> dict:
        return {"rows": [r.to_json() for r in self.rows], "epsilon": self.epsilon,
                "mismatches": list(self.mismatches), "undetermined": list(self.undetermined)}


def train_track_for(alpha: Automorphism, budget: int = 100) -> GraphMap:
    f = try_make_train_track(rose_from_automorphism(alpha), budget)
    if isinstance(f, Unresolved):
        raise PrerequisiteUnresolved(f"no train track found: {f.reason}")
    return f


def product_trees_check(alpha: Automorphism, sample: Sequence[ReducedWord], eps_report: Optional[float] = None,
                        p_max: int = 60, tol: float = 1e-9) -> ProductTreesReport:
    """Compare ellipticity and lengths in the trees of alpha and alpha^-1 over a sample of classes."""
    inv = alpha.inv()
    f, f_inv = train_track_for(alpha), train_track_for(inv)
    pf, pf_inv = map_pf(f), map_pf(f_inv)
    ts, ts_inv = gates(f), gates(f_inv)
    rows, mismatches, undetermined = [], [], []
    for g in sorted(sample, key=lambda w: conjugacy_key(w).shortlex()):
        key = str(conjugacy_key(g)) if g else "1"
        try:
            v = ellipticity_check(f, g, pf, alpha, p_max, tol, ts)
            v_inv = ellipticity_check(f_inv, g, pf_inv, inv, p_max, tol, ts_inv)
            l1 = translation_length(f, pf, g, p_max, tol, ts).value
            l2 = translation_length(f_inv, pf_inv, g, p_max, tol, ts_inv).value
        except (Undetermined, NotConverged) as exc:
            undetermined.append((key, str(exc)))
            continue
        rows.append(ProductRow(key, l1, l2, v, v_inv))
        if v != v_inv:
            mismatches.append(key)
    hyper = [max(r.length, r.length_inv) for r in rows if r.verdict == r.verdict_inv == "hyperbolic"]
    eps = min(hyper) if hyper else None
    return ProductTreesReport(tuple(rows), eps, tuple(mismatches), tuple(undetermined))


def sample_classes(rank: int, n: int, max_len: int, rng: random.Random) -> list:
    """``n`` distinct nontrivial conjugacy classes, as cyclically reduced words."""
    seen: dict = {}
    attempts = 0
    while len(seen) < n and attempts < 100 * n:
        attempts += 1
        length = rng.randint(1, max_len)
        letters: list = []
        while len(letters) < length:
            x = rng.choice([i for i in range(1, rank + 1)] + [-i for i in range(1, rank + 1)])
            if letters and letters[-1] == -x:
                continue
            letters.append(x)
        w = cyclic_reduce(ReducedWord(rank, tuple(letters)))[1]
        if w:
            seen.setdefault(conjugacy_key(w), w)
    return [seen[k] for k in sorted(seen, key=lambda k: k.shortlex())]
