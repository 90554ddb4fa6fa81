"""Command-line front end: every subcommand emits one CSV or JSON document.

Exit status is 0 on success, 1 on a usage error and 2 when a parameter is
outside its domain. ``--output`` paths that are relative are resolved
against ``$USDQKD_OUTPUT_DIR`` when that variable is set.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np
from scipy.optimize import bisect

from . import __version__
from .attacks import beamsplit_report, compare_attacks
from .click_model import (
    ResendDistribution,
    kappa,
    n_curve_y,
    working_curve_y,
    working_point,
)
from .errors import DomainError
from .output import Table
from .security_region import (
    CriteriaMode,
    build_insecurity_polygon,
    classify,
    critical_eta,
    f_criterion,
    mu2_threshold,
    necessary_threshold,
    security_map,
    small_etab_f,
)
from .simulator import SimConfig, UsdAttack, run_simulation
from .usd_core import (
    SourceModel,
    coherent_coefficients,
    fock_conditional_coefficients,
    usd_probability,
    usd_probability_n,
)

OUTPUT_DIR_ENV = "USDQKD_OUTPUT_DIR"
SCHEMA_VERSION = 1


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_help()}\n{self.prog}: error: {message}")


# --- parameter validation -------------------------------------------------


def _nonneg(v):
    return math.isfinite(v) and v >= 0.0


def _unit(v):
    return math.isfinite(v) and 0.0 <= v <= 1.0


def _unit_open_low(v):
    return math.isfinite(v) and 0.0 < v <= 1.0


def _open_unit(v):
    return math.isfinite(v) and 0.0 < v < 1.0


def _count(v):
    return v >= 1


def _nonneg_int(v):
    return v >= 0


_DOMAINS = {
    "mu": (_nonneg, "a finite number >= 0"),
    "eta_l": (_unit, "a number in [0, 1]"),
    "eta_b": (_unit_open_low, "a number in (0, 1]"),
    "eta": (_unit, "a number in [0, 1]"),
    "attack_fraction": (_unit, "a number in [0, 1]"),
    "tol": (_open_unit, "a number in (0, 1)"),
    "steps": (_count, "an integer >= 1"),
    "eta_l_steps": (_count, "an integer >= 1"),
    "trials": (_count, "an integer >= 1"),
    "workers": (_count, "an integer >= 1"),
    "n": (_nonneg_int, "an integer >= 0"),
    "n_max": (_nonneg_int, "an integer >= 0"),
    "seed": (lambda v: 0 <= v < 2**64, "an integer in [0, 2^64)"),
    "from_": (_nonneg, "a finite number >= 0"),
    "to": (_nonneg, "a finite number >= 0"),
    "eta_l_from": (_unit, "a number in [0, 1]"),
    "eta_l_to": (_unit, "a number in [0, 1]"),
}


def _flag(dest: str) -> str:
    return "--" + dest.rstrip("_").replace("_", "-")


def _validate(args: argparse.Namespace) -> None:
    for dest, value in sorted(vars(args).items()):
        if dest not in _DOMAINS or value is None:
            continue
        check, text = _DOMAINS[dest]
        if not check(value):
            raise DomainError(f"{_flag(dest)} must be {text}, got {value!r}")
    if getattr(args, "log", False) and getattr(args, "from_", None) == 0.0:
        raise DomainError("--from must be > 0 with --log")
    if getattr(args, "log_eta_l", False) and getattr(args, "eta_l_from", None) == 0.0:
        raise DomainError("--eta-l-from must be > 0 with --log-eta-l")


def _grid(start: float, stop: float, steps: int, log: bool) -> np.ndarray:
    if steps == 1:
        return np.array([float(start)])
    if log:
        return np.geomspace(start, stop, steps)
    return np.linspace(start, stop, steps)


def _sweep(args) -> np.ndarray:
    return _grid(args.from_, args.to, args.steps, args.log)


def _schema(name: str) -> str:
    return f"usdqkd.{name}/v{SCHEMA_VERSION}"


def _meta(args: argparse.Namespace) -> dict:
    skip = {"func", "format", "output", "command"}
    meta = {"command": args.command, "version": __version__}
    for k, v in sorted(vars(args).items()):
        if k in skip or v is None:
            continue
        meta[f"param.{k.rstrip('_')}"] = v if not isinstance(v, bool) else str(v).lower()
    return meta


def _model(name: str) -> SourceModel:
    return SourceModel(name)


# --- subcommands ----------------------------------------------------------


def cmd_coefficients(args) -> Table:
    if args.model == "fock":
        t = Table(
            _schema("coefficients.fock"),
            ["n", "c0_sq", "c1_sq", "c2_sq", "c3_sq", "p_d_n"],
            meta=_meta(args),
        )
        ns = [args.n] if args.n is not None else range(args.n_max + 1)
        for n in ns:
            t.add(n, *fock_conditional_coefficients(n), usd_probability_n(n))
        return t
    t = Table(
        _schema("coefficients.coherent"),
        ["mu", "c0_sq", "c1_sq", "c2_sq", "c3_sq", "p_d"],
        meta=_meta(args),
    )
    mus = [args.mu] if args.mu is not None else _sweep(args)
    for mu in mus:
        c = coherent_coefficients(mu)
        t.add(mu, *c, 4.0 * c.min())
    return t


def cmd_pd(args) -> Table:
    if args.sweep or args.mu is None:
        t = Table(
            _schema("pd.sweep"),
            ["mu", "weight0", "weight1", "weight2", "weight3", "p_d_coherent", "p_d_fock"],
            meta=_meta(args),
        )
        for mu in _sweep(args):
            w = 4.0 * coherent_coefficients(mu)
            t.add(mu, *w, w.min(), usd_probability(mu, SourceModel.FOCK))
        return t
    t = Table(_schema("pd"), ["mu", "model", "p_d"], meta=_meta(args))
    models = ["coherent", "fock"] if args.model == "both" else [args.model]
    for name in models:
        t.add(args.mu, name, usd_probability(args.mu, _model(name)))
    return t


def cmd_curves(args) -> Table:
    p_d = usd_probability(args.mu, _model(args.model))
    meta = _meta(args) | {"p_d": p_d, "kappa": kappa(args.eta_b)}
    t = Table(_schema("curves"), ["curve", "x", "y"], meta=meta)
    for x in np.linspace(0.0, 1.0, args.steps):
        t.add("working", x, working_curve_y(x))
    for x in np.linspace(0.0, p_d, args.steps):
        t.add("n_curve", x, n_curve_y(min(x, p_d), args.eta_b, p_d))
    return t


def cmd_region(args) -> Table:
    p_d = usd_probability(args.mu, SourceModel.FOCK)
    poly = build_insecurity_polygon(args.eta_b, p_d, args.tol)
    meta = _meta(args) | {"p_d": p_d, "n_max": poly.n_max, "kappa": kappa(args.eta_b)}
    t = Table(_schema("region"), ["kind", "n", "x", "y"], meta=meta)
    n_vertices = len(poly.vertices)
    for i, (x, y) in enumerate(poly.vertices):
        if p_d > 0.0 and i == n_vertices - 1:
            t.add("saturation", None, x, y)
        else:
            t.add("vertex", i, x, y)
    if args.eta_l is not None:
        x_w, y_w = working_point(args.mu, args.eta_l, args.eta_b)
        t.add("working", None, x_w, y_w)
    return t


def cmd_classify(args) -> Table:
    v = classify(args.mu, args.eta_l, args.eta_b, CriteriaMode(args.mode))
    t = Table(
        _schema("classify"),
        ["mu", "eta_l", "eta_b", "mode", "verdict", "f", "mu2", "p_d", "x_w", "y_w", "margin"],
        meta=_meta(args),
    )
    t.add(v.mu, v.eta_l, v.eta_b, v.mode, v.verdict, v.f, v.mu2, v.p_d, *v.working, v.margin)
    return t


def cmd_map(args) -> Table:
    mus = _sweep(args)
    if args.necessary:
        t = Table(_schema("map.necessary"), ["mu", "total_transmission"], meta=_meta(args))
        meta_limit = 1.0 - 2.0**-0.5
        t.meta["asymptote"] = meta_limit
        for mu in mus:
            t.add(mu, necessary_threshold(mu) if mu > 0 else 0.0)
        return t
    if args.small_etab:
        t = Table(
            _schema("map.small_etab"),
            ["mu", "critical_eta_l", "critical_eta_l_approx", "mu2_eta_l"],
            meta=_meta(args),
        )
        log_ratio = math.log1p(-2.0 * args.eta_b / (4.0 - args.eta_b))
        for mu in mus:
            if mu <= 0.0:
                continue
            c = critical_eta(mu)
            t.add(mu, c.value, c.approx, -2.0 * log_ratio / (args.eta_b * mu))
        return t
    eta_ls = _grid(args.eta_l_from, args.eta_l_to, args.eta_l_steps, args.log_eta_l)
    smap = security_map(mus, eta_ls, args.eta_b, CriteriaMode(args.mode))
    t = Table(_schema("map"), ["mu", "eta_l", "verdict", "f"], meta=_meta(args))
    for i, mu in enumerate(smap.mu):
        for j, eta_l in enumerate(smap.eta_l):
            t.add(mu, eta_l, smap.verdicts[i, j], smap.f[i, j])
    return t


def _f_zero(eta_l: float, eta_b: float, lo: float, hi: float) -> float | None:
    grid = np.linspace(lo, hi, 400)
    vals = [f_criterion(m, eta_l, eta_b) for m in grid]
    for a, b, fa, fb in zip(grid, grid[1:], vals, vals[1:]):
        if fa > 0.0 >= fb:
            return bisect(f_criterion, a, b, args=(eta_l, eta_b), xtol=1e-12)
    return None


def cmd_fscan(args) -> Table:
    mu2 = mu2_threshold(args.eta_l, args.eta_b)
    stop = mu2 if args.to is None else args.to
    start = args.from_
    meta = _meta(args) | {"mu2": mu2}
    if stop > start:
        meta["zero"] = _f_zero(args.eta_l, args.eta_b, max(start, 1e-9), stop)
    t = Table(_schema("fscan"), ["mu", "f", "f_small_etab"], meta=meta)
    for mu in _grid(start, stop, args.steps, args.log):
        t.add(mu, f_criterion(mu, args.eta_l, args.eta_b), small_etab_f(mu, args.eta_l, args.eta_b))
    return t


def cmd_beamsplit(args) -> Table:
    t = Table(_schema("beamsplit"), ["mu", "eta", "p_exp", "p_split", "g_bs"], meta=_meta(args))
    mus = [args.mu] if args.mu is not None else _sweep(args)
    best = None
    for mu in mus:
        r = beamsplit_report(mu, args.eta)
        t.add(r.mu, r.eta, r.p_exp, r.p_split, r.g_bs)
        if best is None or r.g_bs > best.g_bs:
            best = r
    if len(mus) > 1:
        t.meta["optimum_mu"] = best.mu
    return t


def cmd_compare(args) -> Table:
    c = compare_attacks(args.mu, args.eta_l, args.eta_b)
    t = Table(
        _schema("compare"),
        ["mu", "eta_l", "eta_b", "eta", "p_exp", "p_split", "g_bs", "p_d", "usd_verdict", "f",
         "crossover_eta_l"],
        meta=_meta(args),
    )
    b = c.beamsplit
    t.add(args.mu, args.eta_l, args.eta_b, b.eta, b.p_exp, b.p_split, b.g_bs, c.usd_p_d,
          c.usd_verdict.verdict, c.usd_verdict.f, c.crossover_eta)
    return t


def _parse_resend(text: str) -> ResendDistribution:
    try:
        if ":" not in text:
            return ResendDistribution.point_mass(int(text))
        weights = {}
        for part in text.split(","):
            n, _, w = part.partition(":")
            weights[int(n)] = weights.get(int(n), 0.0) + float(w)
    except ValueError as exc:
        raise DomainError(f"--resend: cannot parse {text!r} ({exc})") from None
    try:
        return ResendDistribution(weights)
    except DomainError as exc:
        raise DomainError(f"--resend: {exc}") from None


def cmd_simulate(args) -> Table:
    eve = None
    if args.resend is not None:
        fraction = 1.0 if args.attack_fraction is None else args.attack_fraction
        eve = UsdAttack(_parse_resend(args.resend), fraction)
    elif args.attack_fraction is not None:
        raise DomainError("--attack-fraction requires --resend")
    config = SimConfig(args.mu, args.eta_l, args.eta_b, eve, args.trials, args.seed)
    r = run_simulation(config, workers=args.workers)
    columns = [
        "trials", "n_same_basis", "n_diff_basis", "single_clicks_same_basis",
        "double_clicks_same_basis", "single_clicks_diff_basis", "double_clicks_diff_basis",
        "eve_attacks", "eve_successes", "est_single", "est_double", "ci95_single", "ci95_double",
        "pred_single", "pred_double", "z_single", "z_double", "usd_success_rate", "usd_success_z",
    ]
    meta = _meta(args)
    meta.pop("param.workers", None)
    t = Table(_schema("simulate"), columns, meta=meta)
    t.add(
        config.trials, r.n_same_basis, r.n_diff_basis, r.single_clicks_same_basis,
        r.double_clicks_same_basis, r.single_clicks_diff_basis, r.double_clicks_diff_basis,
        r.eve_attacks, r.eve_successes, *r.est, *r.ci95, *r.predicted, *r.z_scores,
        r.usd_success_rate, r.usd_success_z,
    )
    return t


# --- parser ---------------------------------------------------------------


def _add_output(p):
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--output", "-o", default=None, help="output file (default: stdout)")


def _add_sweep(p, start=0.0, stop=10.0, steps=201):
    p.add_argument("--from", dest="from_", type=float, default=start, help="first grid value")
    p.add_argument("--to", type=float, default=stop, help="last grid value (inclusive)")
    p.add_argument("--steps", type=int, default=steps, help="number of grid points")
    p.add_argument("--log", action="store_true", help="logarithmic spacing")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="usdqkd", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("coefficients", help="canonical weights |c_j|^2 of the signal states")
    p.add_argument("--model", choices=["fock", "coherent"], default="fock")
    p.add_argument("--mu", type=float, help="single mean photon number (coherent model)")
    p.add_argument("--n", type=int, help="single photon number (fock model)")
    p.add_argument("--n-max", type=int, default=20, help="largest photon number (fock model)")
    _add_sweep(p)
    _add_output(p)
    p.set_defaults(func=cmd_coefficients)

    p = sub.add_parser("pd", help="USD success probability; --sweep for the weight/P_D curves")
    p.add_argument("--mu", type=float)
    p.add_argument("--model", choices=["fock", "coherent", "both"], default="fock")
    p.add_argument("--sweep", action="store_true")
    _add_sweep(p)
    _add_output(p)
    p.set_defaults(func=cmd_pd)

    p = sub.add_parser("curves", help="number-state and working-point curves")
    p.add_argument("--mu", type=float, default=4.0)
    p.add_argument("--eta-b", type=float, default=0.5)
    p.add_argument("--model", choices=["fock", "coherent"], default="fock")
    p.add_argument("--steps", type=int, default=201)
    _add_output(p)
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("region", help="vertices of the insecurity polygon")
    p.add_argument("--mu", type=float, default=4.0)
    p.add_argument("--eta-b", type=float, default=0.5)
    p.add_argument("--eta-l", type=float, help="also emit the working point")
    p.add_argument("--tol", type=float, default=1e-12)
    _add_output(p)
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("classify", help="security verdict for one parameter triple")
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--eta-l", type=float, required=True)
    p.add_argument("--eta-b", type=float, required=True)
    p.add_argument("--mode", choices=["geometric", "paper"], default="geometric")
    _add_output(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("map", help="verdict grid over (mu, eta_l) or boundary curves")
    _add_sweep(p, 0.1, 5.0, 50)
    p.add_argument("--eta-l-from", type=float, default=1e-4)
    p.add_argument("--eta-l-to", type=float, default=0.5)
    p.add_argument("--eta-l-steps", type=int, default=50)
    p.add_argument("--log-eta-l", action="store_true")
    p.add_argument("--eta-b", type=float, default=1e-3)
    p.add_argument("--mode", choices=["geometric", "paper"], default="geometric")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--necessary", action="store_true",
                       help="total-transmission threshold curve over mu")
    group.add_argument("--small-etab", action="store_true",
                       help="small-eta_b boundary curves over mu")
    _add_output(p)
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("fscan", help="F criterion over mu")
    p.add_argument("--eta-l", type=float, default=0.1)
    p.add_argument("--eta-b", type=float, default=0.5)
    p.add_argument("--from", dest="from_", type=float, default=0.0)
    p.add_argument("--to", type=float, default=None, help="last mu (default: mu2)")
    p.add_argument("--steps", type=int, default=201)
    p.add_argument("--log", action="store_true")
    _add_output(p)
    p.set_defaults(func=cmd_fscan)

    p = sub.add_parser("beamsplit", help="beamsplitting attack gain")
    p.add_argument("--mu", type=float)
    p.add_argument("--eta", type=float, default=0.1)
    _add_sweep(p, 0.0, 5.0, 101)
    _add_output(p)
    p.set_defaults(func=cmd_beamsplit)

    p = sub.add_parser("compare", help="beamsplitting vs USD attack")
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--eta-l", type=float, required=True)
    p.add_argument("--eta-b", type=float, required=True)
    _add_output(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("simulate", help="Monte Carlo click statistics")
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--eta-l", type=float, default=1.0)
    p.add_argument("--eta-b", type=float, default=1.0)
    p.add_argument("--trials", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--resend", help="Eve's resend photon law: 'N' or 'N:w,N:w,...'")
    p.add_argument("--attack-fraction", type=float, default=None)
    p.add_argument("--workers", type=int, default=1)
    _add_output(p)
    p.set_defaults(func=cmd_simulate)
    return parser


def _destination(path: str) -> Path:
    out = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not out.is_absolute():
        out = Path(base) / out
    return out


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _validate(args)
        doc = args.func(args).render(args.format)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except DomainError as exc:
        print(f"usdqkd: domain error: {exc}", file=sys.stderr)
        return 2
    if args.output is None:
        sys.stdout.write(doc)
    else:
        dest = _destination(args.output)
        dest.parent.mkdir(parents=True, exist_ok=True)
        dest.write_text(doc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
