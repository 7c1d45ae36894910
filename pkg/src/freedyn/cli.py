"""Command line interface: ``freedyn <command> [options]``."""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path
from typing import Optional

from . import catalogue
from . import dynamics as dyn
from . import graphmaps as gm
from . import trees
from .automorphisms import (
    Automorphism,
    format_automorphism_text,
    parse_automorphism_text,
    power,
    verify_and_invert,
)
from .errors import FreeDynError, Inconclusive, NotAutomorphism
from .words import ReducedWord, parse_point

EXIT_OK, EXIT_FAIL, EXIT_BAD_INPUT, EXIT_INCONCLUSIVE = 0, 1, 2, 3


class _Run:
    """Per-invocation state: parsed automorphism, budgets and output helpers."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.fmt = args.format
        self.inconclusive = False
        self._aut: Optional[Automorphism] = None
        self._aut_text = ""

    # inputs
    def aut(self) -> Automorphism:
        if self._aut is None:
            a = self.args
            if getattr(a, "example", None):
                self._aut = catalogue.get(a.example)
            elif getattr(a, "aut", None):
                self._aut = verify_and_invert(parse_automorphism_text(Path(a.aut).read_text()))
            else:
                raise SystemExit("an automorphism is required: --aut FILE or --example NAME")
            if getattr(a, "inverse", False):
                self._aut = self._aut.inv()
            if getattr(a, "power", 1) != 1:
                self._aut = power(self._aut, a.power)
            self._aut_text = format_automorphism_text(self._aut)
        return self._aut

    def budget(self) -> dyn.Budget:
        a = self.args
        return dyn.Budget(n_max=a.nmax or 400, q_max=a.qmax, cert_depth=a.cert_depth)

    def seeds(self) -> list:
        rank = self.aut().rank
        out = []
        if getattr(self.args, "word", None):
            out.append(parse_point(self.args.word, rank))
        if getattr(self.args, "ep", None):
            out.append(parse_point(self.args.ep, rank))
        if getattr(self.args, "seeds", None):
            for line in Path(self.args.seeds).read_text().splitlines():
                line = line.split("#", 1)[0].strip()
                if line:
                    out.append(parse_point(line, rank))
        return out

    # outputs
    def provenance(self) -> dict:
        a = vars(self.args).copy()
        a.pop("func", None)
        config = {"args": {k: v for k, v in sorted(a.items())}, "automorphism": self._aut_text}
        digest = hashlib.sha256(json.dumps(config, sort_keys=True).encode()).hexdigest()[:16]
        return {"config_hash": digest, "budgets": {"n_max": a.get("nmax"), "q_max": a.get("qmax"),
                                                   "tol": a.get("tol")}, "cert_depth": a.get("cert_depth")}

    def emit(self, payload: dict, text: str, dot: Optional[str] = None) -> None:
        if self.fmt == "json":
            payload = {**payload, "provenance": self.provenance()}
            sys.stdout.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")
        elif self.fmt == "dot" and dot is not None:
            sys.stdout.write(dot)
        else:
            sys.stdout.write(text if text.endswith("\n") else text + "\n")


# -- commands -----------------------------------------------------------------------------

def cmd_verify(run: _Run) -> int:
    text = Path(run.args.aut).read_text()
    try:
        a = verify_and_invert(parse_automorphism_text(text))
    except NotAutomorphism as exc:
        run.emit({"status": "not-automorphism", "reason": type(exc).__name__, "detail": str(exc)},
                 f"not an automorphism: {type(exc).__name__}: {exc}")
        return EXIT_FAIL
    run._aut_text = format_automorphism_text(a)
    inv = format_automorphism_text(a.inverse)
    run.emit({"status": "automorphism", "method": a.method, "inverse": [str(w) for w in a.inverse.images]},
             f"automorphism (certified by {a.method}); inverse:\n{inv}")
    return EXIT_OK


def cmd_orbit(run: _Run) -> int:
    a = run.aut()
    g = ReducedWord.parse(run.args.word, a.rank)
    tr = dyn.orbit(a, g, run.args.nmax or 6)
    run.emit(tr.to_json(), "\n".join(str(t) for t in tr.terms))
    return EXIT_OK


def _limit_text(lim: dyn.OmegaLimit) -> str:
    head = f"period {lim.period} ({lim.kind}); certified at depth {lim.certificate.depth}"
    return "\n".join([head] + [f"  [{r}] {dyn.point_text(p)}" for r, p in enumerate(lim.points)])


def cmd_omega(run: _Run) -> int:
    a = run.aut()
    rows, texts = [], []
    for seed in run.seeds():
        try:
            lim = dyn.omega_limit_boundary(a, seed, budget=run.budget())
            rows.append({"seed": str(seed), "status": "certified", "limit": lim.to_json()})
            texts.append(f"{seed}: {_limit_text(lim)}")
        except Inconclusive as exc:
            run.inconclusive = True
            rows.append({"seed": str(seed), "status": "inconclusive", "detail": str(exc)})
            texts.append(f"{seed}: inconclusive ({exc})")
    run.emit({"command": "omega", "rows": rows}, "\n".join(texts))
    return EXIT_OK


def cmd_census(run: _Run) -> int:
    a = run.aut()
    rep = dyn.periods_census(a, run.args.len, run.seeds(), run.args.qmax, run.args.bound, run.budget(),
                             workers=run.args.workers)
    if any(p is None for _, p in rep.seed_periods):
        run.inconclusive = True
    text = f"periods: {sorted(rep.periods)}"
    if rep.violations:
        text += f"\nWARNING: periods above the bound {rep.bound}: {list(rep.violations)}"
    run.emit({"command": "census", **rep.to_json()}, text)
    return EXIT_OK


def cmd_gamma(run: _Run) -> int:
    a = run.aut()
    g = dyn.gamma_graph(a, run.seeds(), run.budget(), workers=run.args.workers)
    if g.unresolved:
        run.inconclusive = True
    lines = [f"repelling: {[dyn.point_text(p, 32) for p in g.repelling]}",
             f"attracting: {[dyn.point_text(p, 32) for p in g.attracting]}"]
    lines += [f"  R{i} -> A{j} via {', '.join(w)}" for i, j, w in g.edges]
    lines += [f"  unresolved {s}: {r}" for s, r in g.unresolved]
    run.emit({"command": "gamma", **g.to_json()}, "\n".join(lines), g.to_dot())
    return EXIT_OK


def _train_track(run: _Run):
    f = gm.try_make_train_track(gm.rose_from_automorphism(run.aut()), run.args.budget)
    return f


def cmd_traintrack(run: _Run) -> int:
    f = _train_track(run)
    if isinstance(f, gm.Unresolved):
        run.inconclusive = True
        run.emit({"command": "traintrack", "status": "unresolved", "reason": f.reason,
                  "trace": [list(map(str, t)) for t in f.trace]}, f"unresolved: {f.reason}")
        return EXIT_OK
    st = gm.strata(f, run.args.tol)
    ts = gm.gates(f)
    inps = gm.find_inps(f, run.args.inp_len, ts)
    payload = {
        "command": "traintrack", "status": "train-track", "graph_map": gm.format_graph_map(f),
        "strata": [{"edges": [gm.path_to_str((e,)) for e in s.edges], "kind": s.kind,
                    "lambda": [str(s.pf.lo), str(s.pf.hi)] if s.pf else None} for s in st],
        "gates": {str(v): [sorted(gm.path_to_str((d,)) for d in gate) for gate in gs] for v, gs in ts.gates().items()},
        "nielsen_paths": [gm.path_to_str(p) for p in inps],
    }
    text = gm.format_graph_map(f) + "\n".join(
        [f"stratum {''.join(gm.path_to_str((e,)) for e in s.edges)}: {s.kind}"
         + (f" lambda in [{float(s.pf.lo):.12f}, {float(s.pf.hi):.12f}]" if s.pf else "") for s in st]
        + [f"nielsen paths (length <= {run.args.inp_len}): {[gm.path_to_str(p) for p in inps]}"])
    run.emit(payload, text)
    return EXIT_OK


def _parse_matrix(text: str) -> list:
    return [[int(x) for x in row.replace(",", " ").split()] for row in text.split(";")]


def cmd_pf(run: _Run) -> int:
    if run.args.matrix:
        pf = gm.pf_data(_parse_matrix(run.args.matrix), run.args.tol)
    else:
        f = _train_track(run)
        if isinstance(f, gm.Unresolved):
            f = gm.rose_from_automorphism(run.aut())
        pf = gm.map_pf(f, run.args.tol)
    payload = {"command": "pf", "lambda_lo": str(pf.lo), "lambda_hi": str(pf.hi), "lambda": pf.lam,
               "width": pf.width, "edge_lengths": list(pf.edge_lengths)}
    text = f"lambda in [{float(pf.lo):.15f}, {float(pf.hi):.15f}] (width {pf.width:.3g})\n" \
           f"eigenvector: {', '.join(f'{x:.12f}' for x in pf.edge_lengths)}"
    run.emit(payload, text)
    return EXIT_OK


def cmd_lengths(run: _Run) -> int:
    f = _train_track(run)
    if isinstance(f, gm.Unresolved):
        run.inconclusive = True
        run.emit({"command": "lengths", "status": "unresolved", "reason": f.reason}, f"no train track: {f.reason}")
        return EXIT_OK
    pf = gm.map_pf(f, run.args.tol)
    ts = gm.gates(f)
    rows, texts = [], []
    for seed in run.seeds():
        if not isinstance(seed, ReducedWord):
            raise SystemExit("lengths takes finite words only")
        try:
            rep = trees.translation_length(f, pf, seed, run.args.pmax, run.args.tol, ts)
            rows.append(rep.to_json())
            texts.append(f"{rep.key}: {rep.value:.12g} +- {rep.width:.2g} ({rep.method})")
        except Inconclusive as exc:
            run.inconclusive = True
            rows.append({"class": str(seed), "status": "inconclusive", "detail": str(exc)})
            texts.append(f"{seed}: inconclusive ({exc})")
    run.emit({"command": "lengths", "lambda": pf.lam, "rows": rows}, "\n".join(texts))
    return EXIT_OK


# -- golden checks ------------------------------------------------------------------------

def golden_checks() -> list:
    """``(name, expected, observed)`` for the pinned examples."""
    W = ReducedWord.parse
    intro = catalogue.get("intro")
    fixed_a = catalogue.get("fixed-a")
    flip = catalogue.get("flip")
    dbl = catalogue.get("double-limit")
    perm = catalogue.get("perm-2-3")
    fib = catalogue.get("fibonacci")
    a_inf = parse_point("(a)^inf", 2)
    checks = [
        ("intro orbit of a", "a cb baa acbcb cbbaabaa baaacbcbacbcb",
         lambda: " ".join(str(t) for t in dyn.orbit(intro, W("a", 3), 6).terms)),
        ("intro limit period of a", "3", lambda: str(dyn.omega_limit(intro, W("a", 3)).period)),
        ("intro limit period of A", "2", lambda: str(dyn.omega_limit(intro, W("A", 3)).period)),
        ("intro inverse", "a -> b, b -> cB, c -> abC", lambda: str(intro.inverse)),
        ("fixed-a: fixed words up to length 3", "1 a A aa AA aaa AAA",
         lambda: " ".join(str(w) for w in dyn.fixed_words(fixed_a, 3))),
        ("fixed-a: a^inf", "half-half", lambda: dyn.classify_fixed_point(fixed_a, a_inf).kind),
        ("fixed-a: limit of b", "(a)^inf", lambda: str(dyn.omega_limit(fixed_a, W("b", 2)).points[0])),
        ("fixed-a: limit of B", "(A)^inf", lambda: str(dyn.omega_limit(fixed_a, W("B", 2)).points[0])),
        ("flip squared", "a -> a, b -> aba", lambda: str(power(flip, 2).forward)),
        ("flip: orbit of a^inf", "2: (a)^inf (A)^inf",
         lambda: (lambda L: f"{L.period}: " + " ".join(map(str, L.points)))(dyn.omega_limit_boundary(flip, a_inf))),
        ("double-limit: forward limit of baD", "b(A)^inf",
         lambda: " ".join(map(str, dyn.omega_limit(dbl, W("baD", 4)).points))),
        ("double-limit: backward limit of baD", "b(A)^inf",
         lambda: " ".join(map(str, dyn.omega_limit(dbl.inv(), W("baD", 4)).points))),
        ("perm-2-3: periods", "[1, 2, 3, 6]",
         lambda: str(sorted(dyn.periods_census(perm, 2, [parse_point(s, 5) for s in ("(a)^inf", "(c)^inf", "(ac)^inf")]).periods))),
        ("fibonacci: lambda to 10 decimals", "1.6180339887",
         lambda: (lambda pf: f"{float(pf.lo):.10f}" if f"{float(pf.lo):.10f}" == f"{float(pf.hi):.10f}" else "unsettled")(
             gm.pf_data([[1, 1], [1, 0]], 1e-10))),
        ("fibonacci: squared image of petal a", "aba",
         lambda: gm.path_to_str(gm.map_path(gm.rose_from_automorphism(fib), (1,), 2))),
    ]
    out = []
    for name, expected, fn in checks:
        try:
            observed = fn()
        except FreeDynError as exc:
            observed = f"error: {type(exc).__name__}: {exc}"
        out.append((name, expected, observed))
    return out


def cmd_examples(run: _Run) -> int:
    results = golden_checks()
    width = max(len(n) for n, _, _ in results)
    lines, rows = [], []
    for name, expected, observed in results:
        ok = expected == observed
        rows.append({"check": name, "expected": expected, "observed": observed, "pass": ok})
        line = f"{'PASS' if ok else 'FAIL'}  {name.ljust(width)}"
        if not ok:
            line += f"\n      expected: {expected}\n      observed: {observed}"
        lines.append(line)
    failed = sum(not r["pass"] for r in rows)
    lines.append(f"{len(rows) - failed}/{len(rows)} checks passed")
    run.emit({"command": "examples", "rows": rows}, "\n".join(lines))
    return EXIT_FAIL if failed else EXIT_OK


# -- argument parsing -----------------------------------------------------------------------

def _positive(text: str) -> int:
    n = int(text)
    if n <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return n


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--aut", metavar="FILE", help="automorphism file ('rank k' then 'a -> w' lines)")
    common.add_argument("--example", choices=sorted(catalogue.CATALOGUE), help="use a built-in automorphism")
    common.add_argument("--inverse", action="store_true", help="use the inverse automorphism")
    common.add_argument("--power", type=int, default=1, help="use this power of the automorphism")
    common.add_argument("--word", metavar="W", help="a reduced word such as abA (1 for the identity)")
    common.add_argument("--ep", metavar="X", help="an eventually periodic point such as b(A)^inf")
    common.add_argument("--seeds", metavar="FILE", help="file with one word or u(c)^inf point per line")
    common.add_argument("--nmax", type=_positive, default=None, help="iteration budget (orbit: number of terms, default 6; others: 400)")
    common.add_argument("--qmax", type=_positive, default=60)
    common.add_argument("--cert-depth", type=_positive, default=64)
    common.add_argument("--tol", type=float, default=1e-10)
    common.add_argument("--workers", type=_positive, default=1)
    common.add_argument("--format", choices=("text", "json", "dot"), default="text")
    common.add_argument("--strict", action="store_true", help="exit with status 3 on inconclusive results")

    p = argparse.ArgumentParser(prog="freedyn", description="Dynamics of free group automorphisms.")
    sub = p.add_subparsers(dest="command", required=True)
    sp = sub.add_parser("verify", parents=[common], help="check invertibility and print the inverse")
    sp.set_defaults(func=cmd_verify)
    sp = sub.add_parser("orbit", parents=[common], help="print the first terms of an orbit")
    sp.set_defaults(func=cmd_orbit)
    sp = sub.add_parser("omega", parents=[common], help="certify the limit cycle of a word or boundary point")
    sp.set_defaults(func=cmd_omega)
    sp = sub.add_parser("census", parents=[common], help="periods of periodic words and seeds")
    sp.add_argument("--len", type=int, default=2, help="enumerate words up to this length")
    sp.add_argument("--bound", type=int, default=None, help="warn about periods above this bound")
    sp.set_defaults(func=cmd_census)
    sp = sub.add_parser("gamma", parents=[common], help="graph from repelling to attracting fixed points")
    sp.set_defaults(func=cmd_gamma)
    for name, fn, helptext in (("traintrack", cmd_traintrack, "search for a train track representative"),
                               ("pf", cmd_pf, "Perron-Frobenius eigenvalue enclosure"),
                               ("lengths", cmd_lengths, "tree translation lengths of conjugacy classes")):
        sp = sub.add_parser(name, parents=[common], help=helptext)
        sp.add_argument("--budget", type=int, default=100, help="maximum number of folds")
        sp.set_defaults(func=fn)
        if name == "traintrack":
            sp.add_argument("--inp-len", type=int, default=8, help="length bound for the Nielsen path search")
        if name == "pf":
            sp.add_argument("--matrix", help="rows separated by ';', e.g. '1,1;1,0'")
        if name == "lengths":
            sp.add_argument("--pmax", type=int, default=60)
    sp = sub.add_parser("examples", parents=[common], help="run the pinned example checks")
    sp.set_defaults(func=cmd_examples)
    return p


def main(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    run = _Run(args)
    try:
        status = args.func(run)
    except (FreeDynError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    if status == EXIT_OK and run.inconclusive and args.strict:
        return EXIT_INCONCLUSIVE
    return status


if __name__ == "__main__":
    sys.exit(main())
