"""Command line entry point: ``permfree <subcommand> ...``.

Exit status: 0 success, 1 failed assertion or invalid input, 2 usage error.
Output is TSV by default; ``--format structured`` prints one JSON object
with the same values.  No timestamps are written, so identical arguments
give byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import __version__, bounds, extremal, perm_core, spectral, spread, verify
from .errors import PermfreeError
from .famio import emit_family, family_object, parse_family


@dataclass
class Report:
    command: str
    config: dict
    columns: list
    rows: list = field(default_factory=list)
    passed: int = 0
    failed: int = 0
    extra: dict = field(default_factory=dict)

    def check(self, ok: bool) -> bool:
        if ok:
            self.passed += 1
        else:
            self.failed += 1
        return ok

    @property
    def exit_status(self) -> int:
        return 1 if self.failed else 0

    def tsv(self) -> str:
        out = [f"# permfree {__version__}\t{self.command}",
               "# config\t" + json.dumps(self.config, sort_keys=True),
               "\t".join(self.columns)]
        out += ["\t".join(_cell(v) for v in row) for row in self.rows]
        out.append(f"# assertions\tpassed={self.passed}\tfailed={self.failed}")
        return "\n".join(out) + "\n"

    def structured(self) -> str:
        obj = {
            "header": {"tool": "permfree", "version": __version__, "command": self.command,
                       "config": self.config},
            "columns": self.columns,
            "rows": [[_json_cell(v) for v in row] for row in self.rows],
            "footer": {"passed": self.passed, "failed": self.failed},
        }
        obj.update(self.extra)
        return json.dumps(obj, sort_keys=True) + "\n"


def _cell(v) -> str:
    if v is None:
        return "NA"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _json_cell(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, int) and not isinstance(v, bool) and abs(v) >= 2 ** 53:
        return str(v)
    return v


# -- subcommands --------------------------------------------------------------

def cmd_verify(args, rep: Report):
    if args.a or args.b:
        if not (args.a and args.b and args.t):
            raise _Usage("verify --a/--b needs --a, --b and --t together")
        F, G = parse_family(args.a), parse_family(args.b)
        bad = perm_core.find_cross_violation(F, G, args.t)
        rep.check(bad is None)
        rep.rows.append(["claim.cross_free", bad is None,
                         "-" if bad is None else f"{' '.join(map(str, bad[0]))} | {' '.join(map(str, bad[1]))}"])
        return
    for name, ok in verify.run_suite(args.level, args.seed):
        rep.check(ok)
        rep.rows.append([name, ok, "-"])


def _indicator_from_args(args):
    F = parse_family(args.family)
    return F, spectral.SnFunction.indicator(F)


def cmd_decompose(args, rep: Report):
    F, f = _indicator_from_args(args)
    dec = spectral.decompose(f)
    for d, w in enumerate(dec.weights):
        rep.rows.append([d, w, "-"])
    rep.check(abs(dec.total - f.norm2()) <= 1e-8 * max(f.norm2(), 1e-300))
    if f.m >= 2:
        lo = spectral.level_one_coeffs(f)
        rep.check(abs(lo.weight() - dec.weights[1]) <= 1e-8 * max(dec.weights[1], 1e-12))
        rep.extra["level_one"] = lo.a.tolist()


def cmd_globalness(args, rep: Report):
    F = parse_family(args.family)
    g = spectral.globalness(F, args.depth)
    rep.rows.append([g.depth_cap, g.gamma_density, str(g.witness)])
    rep.rows.append([g.depth_cap, g.gamma_l2, str(g.witness)])
    rep.check(abs(g.gamma_l2 ** 2 - g.gamma_density) <= 1e-12 * g.gamma_density)
    rep.extra["report"] = {"gamma_density": g.gamma_density, "gamma_l2": g.gamma_l2,
                           "witness": str(g.witness), "witness_ratio": str(g.witness_ratio)}


def cmd_spread(args, rep: Report):
    F = parse_family(args.family)
    s = spread.spreadness(spread.embed(F), args.depth)
    rep.rows.append([s.depth_cap, s.r, " ".join(map(str, s.witness_X))])
    rep.check(s.r >= 1)


COVERAGE_COLUMNS = ["m", "delta", "samples", "hits", "estimate", "std_error", "theorem_bound",
                    "vacuous", "r", "mean_size", "seed"]


def cmd_coverage(args, rep: Report):
    F = parse_family(args.family)
    C = spread.embed(F)
    if args.delta is not None:
        deltas = [args.delta]
    else:
        deltas = [c / F.n for c in args.c]
    s = spread.spreadness(C, min(spread.SPREAD_DEPTH_CAP, F.n))
    estimates = []
    for delta in deltas:
        est = spread.coverage_mc(C, args.m, delta, args.samples, args.seed, workers=args.threads, spread=s)
        d = est.as_dict()
        rep.rows.append([d[key] for key in COVERAGE_COLUMNS])
        floor = max(0.0, est.theorem_bound or 0.0) - 3 * est.std_error
        rep.check(est.estimate >= floor)
        estimates.append(d)
    rep.extra["estimates"] = estimates


def cmd_search(args, rep: Report):
    if args.bb:
        res = extremal.bb_max_product(args.n, args.t, args.budget)
    else:
        res = extremal.exact_max_product(args.n, args.t)
    rep.check(res.validate())
    if res.status == extremal.EXACT:
        rep.check(res.product >= res.witness_bound)
    for key in ("n", "t", "product", "status", "explored", "witness_bound"):
        rep.rows.append([key, getattr(res, key)])
    rep.rows.append(["size_F", len(res.F)])
    rep.rows.append(["size_G", len(res.G)])
    rep.extra["F"] = family_object(res.F)
    rep.extra["G"] = family_object(res.G)
    if args.out_f:
        emit_family(res.F, args.out_f)
    if args.out_g:
        emit_family(res.G, args.out_g)


def cmd_reduce(args, rep: Report):
    A, B = parse_family(args.a), parse_family(args.b)
    state = extremal.initial_state(A, B, args.t)
    rep.check(state.cross_free())
    for rnd in range(1, args.rounds + 1):
        if state.terminated or state.t_remaining < 2:
            break
        state = extremal.reduction_round(state, args.gamma, args.depth)
        if state.terminated:
            rep.rows.append([rnd, state.t_remaining, "NA", "NA", "NA", "NA", "NA", state.terminated])
            break
        log = state.history[-1]
        rep.check(state.cross_free())
        muA, muB = state.densities[-1]
        rep.rows.append([rnd, state.t_remaining, len(state.A), len(state.B), muA, muB,
                         f"A:{log['A_pattern']};B:{log['B_pattern']};common:{log['common']}", "ok"])


def cmd_bounds(args, rep: Report):
    if args.table == "main":
        _need(args, "n", "t")
        tab = bounds.main_table(args.n, args.t)
    elif args.table == "tightness":
        _need(args, "n")
        tab = bounds.tightness_table(args.n)
    elif args.table == "perturbed":
        _need(args, "n", "t")
        tab = bounds.perturbed_table(args.n, args.t)
    else:
        _need(args, "n")
        tab = bounds.BoundTable()
        for r in range(0, 4):
            for j in range(0, max(0, args.n - 2 * r) + 1):
                if 2 * r > args.n:
                    continue
                f = bounds.agreement_prob_formula(args.n, r, j)
                tab.add("agreement_prob", {"n": args.n, "r": r, "j": j}, f,
                        bounds.lemma_applicable(args.n, r, j))
                if args.n <= perm_core.ENUM_CAP:
                    exact = bounds.agreement_count_exact(args.n, r, j)
                    rep.check(f * math.factorial(args.n - r) == exact)
    for row in tab.rows:
        params = ",".join(f"{k}={v}" for k, v in row.params.items())
        rep.rows.append([row.label, params, row.value_str(), row.log2,
                         "NA" if row.applicable is None else row.applicable])


def _need(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise _Usage(f"--{name} is required for this table")


class _Usage(Exception):
    pass


COMMANDS = {
    "verify": (cmd_verify, ["check", "passed", "detail"]),
    "decompose": (cmd_decompose, ["level", "weight", "witness"]),
    "globalness": (cmd_globalness, ["depth", "value", "witness"]),
    "spread": (cmd_spread, ["depth", "r", "witness"]),
    "coverage": (cmd_coverage, COVERAGE_COLUMNS),
    "search": (cmd_search, ["field", "value"]),
    "reduce": (cmd_reduce, ["round", "t_remaining", "size_A", "size_B", "mu_A", "mu_B",
                            "patterns", "status"]),
    "bounds": (cmd_bounds, ["label", "params", "value", "log2", "applicable"]),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("tsv", "structured"), default="tsv")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1)

    parser = argparse.ArgumentParser(prog="permfree", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"permfree {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[common], help="run the invariant suite or check a claim")
    p.add_argument("--level", choices=("quick", "full"), default="quick")
    p.add_argument("--a")
    p.add_argument("--b")
    p.add_argument("--t", type=int)

    p = sub.add_parser("decompose", parents=[common], help="level weights of a family indicator")
    p.add_argument("--family", required=True)

    p = sub.add_parser("globalness", parents=[common])
    p.add_argument("--family", required=True)
    p.add_argument("--depth", type=int, default=spectral.DEFAULT_DEPTH)

    p = sub.add_parser("spread", parents=[common])
    p.add_argument("--family", required=True)
    p.add_argument("--depth", type=int, default=3)

    p = sub.add_parser("coverage", parents=[common])
    p.add_argument("--family", required=True)
    p.add_argument("--m", type=int, required=True)
    rate = p.add_mutually_exclusive_group(required=True)
    rate.add_argument("--delta", type=float)
    rate.add_argument("--c", type=float, nargs="+", help="sweep delta = c / n over these values")
    p.add_argument("--samples", type=int, required=True)

    p = sub.add_parser("search", parents=[common])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true")
    mode.add_argument("--bb", action="store_true")
    p.add_argument("--budget", type=int, default=10**7)
    p.add_argument("--out-f")
    p.add_argument("--out-g")

    p = sub.add_parser("reduce", parents=[common])
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--rounds", type=int, default=1)
    p.add_argument("--depth", type=int, default=spectral.DEFAULT_DEPTH)

    p = sub.add_parser("bounds", parents=[common])
    p.add_argument("--table", choices=("main", "tightness", "perturbed", "agreement"), required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--t", type=int)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    if args.threads < 1:
        print("permfree: --threads must be >= 1", file=sys.stderr)
        return 2
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("format", "threads")}
    fn, columns = COMMANDS[args.command]
    rep = Report(args.command, config, columns)
    try:
        fn(args, rep)
    except _Usage as exc:
        print(f"permfree: {exc}", file=sys.stderr)
        return 2
    except PermfreeError as exc:
        print(f"permfree: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"permfree: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(rep.structured() if args.format == "structured" else rep.tsv())
    return rep.exit_status


if __name__ == "__main__":
    sys.exit(main())
