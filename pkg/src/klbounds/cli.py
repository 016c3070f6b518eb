"""Command-line front end: bounds, ground truths, simulations, figures.

Subcommands
-----------
bound     every KL tail bound at (n, k) over an eps grid
thresh    eps_thresh table and the headline threshold ratio
compare   bounds next to the exact tail and a Monte Carlo estimate
oracle    exact tail curves or exact moments by type enumeration
mc-tail   Monte Carlo tail estimates with Wilson intervals
mc-var    Monte Carlo mean/variance with jackknife errors
gof       sampler goodness-of-fit diagnostics (chi-square / normal)
l1        the L1-deviation bounds over an eps grid
figures   reproducible data files for the seven standard figures
verify    the self-check suite (exact oracles vs closed forms)

Output is CSV (default) or JSON.  CSV uses LF line endings, a leading
'#' comment line recording the artifact version and the full
configuration, then a header row; floats are printed with %.17g so
identical configurations reproduce byte-identical files.  JSON mirrors
the rows as an array of objects; non-finite numbers become null.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

import klbounds
from klbounds import bounds, divergence, montecarlo, oracle
from klbounds import _kernels
from klbounds._verify import CheckResult, VerifyConfig, run_suite
from klbounds.divergence import Distribution, ValidationError, parse_distribution

__all__ = ["main", "build_parser", "DEFAULT_SEED", "DEFAULT_TRIALS"]

DEFAULT_SEED = 1729
DEFAULT_TRIALS = 10**6


class CliError(ValueError):
    """Usage errors surfaced with exit status 2."""


# ---------------------------------------------------------------------------
# Formatting and emission.
# ---------------------------------------------------------------------------


def _fmt_csv(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    s = str(v)
    if any(ch in s for ch in ',"\n'):
        s = '"' + s.replace('"', '""') + '"'
    return s


def _fmt_json(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        f = float(v)
        if not math.isfinite(f):
            return "null"
        return "%.17g" % f
    return json.dumps(str(v))


def _config_text(command: str, config: list[tuple[str, object]]) -> str:
    parts = " ".join(f"{key}={_fmt_csv(val)}" for key, val in config)
    return f"# klbounds {klbounds.__version__} | {command} | {parts}"


def _render_csv(command, config, columns, rows) -> str:
    lines = [_config_text(command, config), ",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt_csv(v) for v in row))
    return "\n".join(lines) + "\n"


def _render_json(command, config, columns, rows) -> str:
    cfg_items = [f'"{key}": {_fmt_json(val)}' for key, val in config]
    cfg_items.insert(0, f'"version": {json.dumps(klbounds.__version__)}')
    cfg_items.insert(1, f'"command": {json.dumps(command)}')
    out = ["{", '"config": {' + ", ".join(cfg_items) + "},", '"rows": [']
    body = []
    for row in rows:
        fields = ", ".join(
            f"{json.dumps(c)}: {_fmt_json(v)}" for c, v in zip(columns, row)
        )
        body.append("{" + fields + "}")
    out.append(",\n".join(body))
    out.append("]")
    out.append("}")
    return "\n".join(out) + "\n"


def _emit(args, command, config, columns, rows, path=None) -> None:
    text = (
        _render_json(command, config, columns, rows)
        if args.format == "json"
        else _render_csv(command, config, columns, rows)
    )
    target = path if path is not None else getattr(args, "out", None)
    if target in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(target, "w", encoding="ascii", newline="") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# Argument plumbing.
# ---------------------------------------------------------------------------


def _parse_eps(args) -> np.ndarray:
    eps = getattr(args, "eps", None)
    grid = getattr(args, "eps_grid", None)
    if eps is not None and grid is not None:
        raise CliError("give either --eps or --eps-grid, not both")
    if eps is not None:
        try:
            vals = [float(tok) for tok in eps.split(",") if tok.strip() != ""]
        except ValueError as exc:
            raise CliError(f"--eps: {exc}") from None
        if not vals:
            raise CliError("--eps: no values given")
        return np.asarray(vals, dtype=np.float64)
    if grid is None:
        raise CliError("an eps grid is required: --eps V[,V...] or --eps-grid START:STOP:POINTS[:linear|log]")
    parts = grid.split(":")
    if len(parts) not in (3, 4):
        raise CliError("--eps-grid: expected START:STOP:POINTS[:linear|log]")
    try:
        start, stop, points = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise CliError(f"--eps-grid: {exc}") from None
    scale = parts[3] if len(parts) == 4 else "linear"
    if points < 1:
        raise CliError("--eps-grid: POINTS must be >= 1")
    if scale == "linear":
        return np.linspace(start, stop, points)
    if scale == "log":
        if start <= 0.0 or stop <= 0.0:
            raise CliError("--eps-grid: log spacing needs positive endpoints")
        return np.logspace(math.log10(start), math.log10(stop), points)
    raise CliError(f"--eps-grid: unknown spacing {scale!r}")


def _dist_of(args) -> Distribution:
    try:
        return parse_distribution(args.dist, k=getattr(args, "k", None))
    except ValidationError as exc:
        raise CliError(str(exc)) from None


def _add_out_args(sub) -> None:
    sub.add_argument("--format", choices=("csv", "json"), default="csv",
                     help="output format (default csv)")
    sub.add_argument("--out", default=None, metavar="PATH",
                     help="output file (default stdout)")


def _add_eps_args(sub, required=True) -> None:
    sub.add_argument("--eps", default=None, metavar="V[,V...]",
                     help="explicit eps value(s)")
    sub.add_argument("--eps-grid", default=None, metavar="A:B:N[:linear|log]",
                     help="deterministic eps grid, endpoint inclusive")


def _add_mc_args(sub) -> None:
    sub.add_argument("--trials", type=int, default=DEFAULT_TRIALS,
                     help=f"Monte Carlo trials (default {DEFAULT_TRIALS})")
    sub.add_argument("--seed", type=int, default=DEFAULT_SEED,
                     help=f"64-bit stream seed (default {DEFAULT_SEED})")
    sub.add_argument("--workers", type=int, default=1,
                     help="parallel worker processes (default 1; results identical)")


# ---------------------------------------------------------------------------
# Commands.
# ---------------------------------------------------------------------------

_BOUND_COLUMNS = ("bound", "n", "k", "eps", "value", "log_value", "valid",
                  "eps_thresh", "conjectural", "note")


def _bound_row(res: bounds.BoundResult):
    return (res.name, res.n, res.k, res.eps, res.value, res.log_value,
            res.valid, res.eps_thresh, res.conjectural, res.note)


def cmd_bound(args) -> int:
    n, k = args.n, args.k
    eps = _parse_eps(args)
    rows = []
    for e in eps:
        e = float(e)
        per_eps = [bounds.method_of_types_bound(n, k, e)]
        if k == 2:
            per_eps.append(bounds.binary_bound(n, e))
        per_eps.append(bounds.recursive_bound(n, k, e))
        if k >= 3:
            per_eps.append(bounds.recursive_bound_loose(n, k, e))
            per_eps.append(bounds.recursive_bound_piecewise(n, k, e))
        per_eps.append(bounds.convex_split_bound(n, k, e))
        if k >= 3:
            per_eps.append(bounds.agrawal_bound(n, k, e))
            per_eps.append(bounds.agrawal_subgaussian_bound(n, k, e))
        per_eps.append(bounds.conjectured_tail_bound(n, k, e))
        best = bounds.best_kl_bound(n, k, e)
        rows.extend(_bound_row(r) for r in per_eps)
        rows.append(("best:" + best.name, best.n, best.k, best.eps, best.value,
                     best.log_value, best.valid, best.eps_thresh,
                     best.conjectural, best.note))
    config = [("n", n), ("k", k), ("eps", ",".join("%.17g" % e for e in eps))]
    _emit(args, "bound", config, _BOUND_COLUMNS, rows)
    return 0


def cmd_thresh(args) -> int:
    try:
        ks = [int(tok) for tok in str(args.k).split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise CliError(f"--k: {exc}") from None
    columns = ("n", "k", "method_of_types", "method_of_types_lower",
               "recursive_sum", "recursive_piecewise", "convex_split", "ratio")
    rows = []
    for k in ks:
        rep = bounds.eps_thresh_comparison(args.n, k)
        rows.append((rep.n, rep.k, rep.method_of_types, rep.method_of_types_lower,
                     rep.recursive_sum, rep.recursive_piecewise,
                     rep.convex_split, rep.ratio))
    config = [("n", args.n), ("k", ",".join(str(k) for k in ks))]
    _emit(args, "thresh", config, columns, rows)
    return 0


def _empirical_log_tail(samples: np.ndarray, eps: np.ndarray):
    """(hits, log of empirical tail) per eps from one sorted sample batch."""
    s = np.sort(samples)
    trials = len(s)
    hits = trials - np.searchsorted(s, eps, side="left")
    with np.errstate(divide="ignore"):
        log_tail = np.log(hits / trials)
    return hits, log_tail


def cmd_compare(args) -> int:
    dist = _dist_of(args)
    n, k = args.n, dist.k
    eps = _parse_eps(args)
    stat = args.stat
    exact_note = "enumerated"
    try:
        if stat == "kl":
            exact = oracle.tail_curve_kl(dist, n, eps)
        else:
            exact = oracle.tail_curve_l1(dist, n, eps)
    except oracle.CapExceeded as exc:
        exact = None
        exact_note = f"skipped ({exc})"
    if args.trials > 0:
        sampler = montecarlo.mc_samples_kl if stat == "kl" else montecarlo.mc_samples_l1
        samples = sampler(dist, n, args.trials, seed=args.seed, workers=args.workers)
        hits, _ = _empirical_log_tail(samples, eps)
    else:
        hits = None
    rows = []
    if stat == "kl":
        bound_cols = ["log_method_of_types", "log_recursive_sum", "log_convex_split"]
        if k == 2:
            bound_cols.append("log_binary")
        if k >= 3:
            bound_cols += ["log_recursive_piecewise", "log_agrawal"]
        bound_cols.append("log_best")
    else:
        bound_cols = ["log_l1_weissman", "log_l1_recursive_sum"]
        if k >= 3:
            bound_cols.append("log_l1_recursive_piecewise")
    for idx, e in enumerate(eps):
        e = float(e)
        row = [e,
               None if exact is None else float(exact[idx])]
        if hits is not None:
            h = int(hits[idx])
            lo, hi = montecarlo.wilson_interval(h, args.trials)
            row += [h / args.trials, lo, hi]
        else:
            row += [None, None, None]
        if stat == "kl":
            row.append(bounds.method_of_types_bound(n, k, e).log_value)
            row.append(bounds.recursive_bound(n, k, e).log_value)
            row.append(bounds.convex_split_bound(n, k, e).log_value)
            if k == 2:
                row.append(bounds.binary_bound(n, e).log_value)
            if k >= 3:
                row.append(bounds.recursive_bound_piecewise(n, k, e).log_value)
                agl = bounds.agrawal_bound(n, k, e)
                row.append(agl.log_value if agl.valid else None)
            row.append(bounds.best_kl_bound(n, k, e).log_value)
        else:
            row.append(bounds.l1_weissman(dist, n, e).log_value)
            row.append(bounds.l1_recursive_bound(dist, n, e, form="sum").log_value)
            if k >= 3:
                row.append(bounds.l1_recursive_bound(dist, n, e, form="piecewise").log_value)
        rows.append(tuple(row))
    columns = ("eps", "exact", "mc_estimate", "mc_ci_low", "mc_ci_high", *bound_cols)
    config = [("stat", stat), ("n", n), ("k", k), ("dist", args.dist),
              ("trials", args.trials), ("seed", args.seed),
              ("workers", args.workers), ("exact", exact_note)]
    _emit(args, "compare", config, columns, rows)
    return 0


def cmd_oracle(args) -> int:
    dist = _dist_of(args)
    n, k = args.n, dist.k
    if args.moments:
        if args.stat != "kl":
            raise CliError("--moments is defined for the KL statistic only")
        mean, var = oracle.exact_mean_var_kl(dist, n)
        audit = oracle.exact_tail_kl(dist, n, 0.0)
        columns = ("n", "k", "mean", "variance", "types", "mass_residual")
        rows = [(n, k, mean, var, audit.types_enumerated, audit.mass_residual)]
        config = [("stat", "kl-moments"), ("n", n), ("k", k), ("dist", args.dist)]
        _emit(args, "oracle", config, columns, rows)
        return 0
    eps = _parse_eps(args)
    tail_fn = oracle.exact_tail_kl if args.stat == "kl" else oracle.exact_tail_l1
    rows = []
    for e in eps:
        t = tail_fn(dist, n, float(e))
        rows.append((t.eps, t.probability, t.types_enumerated, t.mass_residual))
    columns = ("eps", "probability", "types", "mass_residual")
    config = [("stat", args.stat), ("n", n), ("k", k), ("dist", args.dist)]
    _emit(args, "oracle", config, columns, rows)
    return 0


def cmd_mc_tail(args) -> int:
    dist = _dist_of(args)
    n, k = args.n, dist.k
    eps = _parse_eps(args)
    if args.trials < 1:
        raise CliError("--trials must be >= 1 for mc-tail")
    sampler = montecarlo.mc_samples_kl if args.stat == "kl" else montecarlo.mc_samples_l1
    samples = sampler(dist, n, args.trials, seed=args.seed, workers=args.workers)
    hits, _ = _empirical_log_tail(samples, eps)
    rows = []
    low_mass_warned = False
    for idx, e in enumerate(eps):
        h = int(hits[idx])
        lo, hi = montecarlo.wilson_interval(h, args.trials)
        rows.append((float(e), h / args.trials, lo, hi, h, args.trials))
        if h < 10 and not low_mass_warned:
            low_mass_warned = True
            print(
                f"# warning: fewer than 10 hits at eps={float(e):g}; "
                "the estimate is unreliable this deep in the tail",
                file=sys.stderr,
            )
    columns = ("eps", "estimate", "ci_low", "ci_high", "hits", "trials")
    config = [("stat", args.stat), ("n", n), ("k", k), ("dist", args.dist),
              ("trials", args.trials), ("seed", args.seed),
              ("workers", args.workers), ("ci_level", 0.99)]
    _emit(args, "mc-tail", config, columns, rows)
    return 0


def cmd_mc_var(args) -> int:
    dist = _dist_of(args)
    est = montecarlo.mc_mean_var_kl(dist, args.n, args.trials,
                                    seed=args.seed, workers=args.workers)
    columns = ("n", "k", "trials", "mean", "mean_se", "var", "var_se")
    rows = [(est.n, est.k, est.trials, est.mean, est.mean_se, est.var, est.var_se)]
    config = [("n", args.n), ("k", dist.k), ("dist", args.dist),
              ("trials", args.trials), ("seed", args.seed), ("workers", args.workers)]
    _emit(args, "mc-var", config, columns, rows)
    return 0


def cmd_gof(args) -> int:
    dist = _dist_of(args)
    tests = ("chisq", "poisson") if args.test == "both" else (args.test,)
    rows = []
    for t in tests:
        if t == "chisq":
            rep = montecarlo.gof_chisq_kl(dist, args.n, args.trials,
                                          seed=args.seed, workers=args.workers)
        else:
            rep = montecarlo.gof_normal_poissonized(dist, args.n, args.trials,
                                                    seed=args.seed, workers=args.workers)
        rows.append((rep.test, rep.n, rep.k, rep.trials, rep.ks, rep.note))
    columns = ("test", "n", "k", "trials", "ks_distance", "reference")
    config = [("n", args.n), ("k", dist.k), ("dist", args.dist),
              ("trials", args.trials), ("seed", args.seed), ("workers", args.workers)]
    _emit(args, "gof", config, columns, rows)
    return 0


def cmd_l1(args) -> int:
    dist = _dist_of(args)
    n, k = args.n, dist.k
    eps = _parse_eps(args)
    pi = divergence.pi_P(dist)
    rows = []
    for e in eps:
        e = float(e)
        per_eps = [bounds.l1_weissman(dist, n, e),
                   bounds.l1_recursive_bound(dist, n, e, form="sum")]
        if k >= 3:
            per_eps.append(bounds.l1_recursive_bound(dist, n, e, form="loose"))
            per_eps.append(bounds.l1_recursive_bound(dist, n, e, form="piecewise"))
        rows.extend(_bound_row(r) for r in per_eps)
    config = [("n", n), ("k", k), ("dist", args.dist),
              ("pi_P", pi), ("phi", divergence.phi(pi)),
              ("eps", ",".join("%.17g" % e for e in eps))]
    _emit(args, "l1", config, _BOUND_COLUMNS, rows)
    return 0


# -- figures ----------------------------------------------------------------

#: Figure defaults: (kind, n, k, grid spec).  Eps sweeps take
#: (lo, hi_factor) with hi = hi_factor * k / n for KL figures and a fixed
#: [0, 2] range for L1 figures; fig5 sweeps n at fixed eps.
_FIG_DEFS = {
    "fig1": ("kl_eps", 1000, 31, 5.0),
    "fig2": ("kl_eps", 1000, 60, 4.0),
    "fig3": ("kl_eps", 1000, 1200, 2.0),
    "fig4": ("kl_eps", 20, 100, 2.0),
    "fig5": ("kl_n", None, 1000, 6.0),
    "fig6": ("l1_eps", 90, 100, 2.0),
    "fig7": ("l1_eps", 20, 40, 2.0),
}
_FIG_POINTS = 201
_FIG5_N_LO, _FIG5_N_HI, _FIG5_N_STEP = 1000, 1600, 25


def _clamp0(x: float) -> float:
    return min(0.0, x)


def _figure_rows(fig: str, n: int, k: int, dist: Distribution,
                 trials: int, seed: int, workers: int):
    kind, _, _, spec = _FIG_DEFS[fig]
    mc_col = trials > 0
    if kind == "kl_n":
        eps = spec
        xs = list(range(_FIG5_N_LO, _FIG5_N_HI + 1, _FIG5_N_STEP))
        columns = ["x", "log_bound_types", "log_bound_recursive"]
        if mc_col:
            columns.append("log_mc_estimate")
        rows = []
        for x in xs:
            row = [x,
                   _clamp0(bounds.method_of_types_bound(x, k, eps).log_value),
                   _clamp0(bounds.recursive_bound(x, k, eps).log_value)]
            if mc_col:
                samples = montecarlo.mc_samples_kl(dist, x, trials, seed=seed,
                                                   workers=workers)
                h = int(np.count_nonzero(samples >= eps))
                row.append(_clamp0(float(np.log(h / trials))) if h else -math.inf)
            rows.append(tuple(row))
        grid_note = f"n:{_FIG5_N_LO}:{_FIG5_N_HI}:{_FIG5_N_STEP}@eps{eps:g}"
        return columns, rows, grid_note
    if kind == "kl_eps":
        hi = spec * k / n
        eps = np.linspace(0.0, hi, _FIG_POINTS)
        columns = ["x", "log_bound_types", "log_bound_recursive"]
        if mc_col:
            columns.append("log_mc_estimate")
        if mc_col:
            samples = montecarlo.mc_samples_kl(dist, n, trials, seed=seed,
                                               workers=workers)
            hits, log_tail = _empirical_log_tail(samples, eps)
        rows = []
        for idx, e in enumerate(eps):
            e = float(e)
            row = [e,
                   _clamp0(bounds.method_of_types_bound(n, k, e).log_value),
                   _clamp0(bounds.recursive_bound(n, k, e).log_value)]
            if mc_col:
                row.append(_clamp0(float(log_tail[idx])))
            rows.append(tuple(row))
        return columns, rows, f"eps:0:{hi:.17g}:{_FIG_POINTS}"
    # l1_eps
    eps = np.linspace(0.0, 2.0, _FIG_POINTS)
    columns = ["x", "log_bound_l1_weissman", "log_bound_l1_recursive"]
    if mc_col:
        columns.append("log_mc_estimate")
        samples = montecarlo.mc_samples_l1(dist, n, trials, seed=seed,
                                           workers=workers)
        hits, log_tail = _empirical_log_tail(samples, eps)
    rows = []
    for idx, e in enumerate(eps):
        e = float(e)
        row = [e,
               _clamp0(bounds.l1_weissman(dist, n, e).log_value),
               _clamp0(bounds.l1_recursive_bound(dist, n, e, form="sum").log_value)]
        if mc_col:
            row.append(_clamp0(float(log_tail[idx])))
        rows.append(tuple(row))
    return columns, rows, f"eps:0:2:{_FIG_POINTS}"


def cmd_figures(args) -> int:
    wanted = args.figure
    if "all" in wanted:
        wanted = list(_FIG_DEFS)
    bad = [f for f in wanted if f not in _FIG_DEFS]
    if bad:
        raise CliError(f"unknown figure id(s): {', '.join(bad)}")
    os.makedirs(args.out_dir, exist_ok=True)
    written = []
    for fig in wanted:
        kind, def_n, def_k, _ = _FIG_DEFS[fig]
        n = args.n if args.n is not None else def_n
        k = args.k if args.k is not None else def_k
        if kind == "kl_n":
            n = None  # swept
        dist = parse_distribution(args.dist, k=k)
        if dist.k != k:
            k = dist.k
        columns, rows, grid_note = _figure_rows(
            fig, n if n is not None else _FIG5_N_LO, k, dist,
            args.trials, args.seed, args.workers,
        )
        config = [("figure", fig), ("n", "sweep" if kind == "kl_n" else n),
                  ("k", k), ("dist", args.dist), ("grid", grid_note),
                  ("trials", args.trials), ("seed", args.seed),
                  ("workers", args.workers)]
        ext = "json" if args.format == "json" else "csv"
        path = os.path.join(args.out_dir, f"{fig}.{ext}")
        _emit(args, "figures", config, columns, rows, path=path)
        written.append(path)
    for path in written:
        print(path)
    return 0


def cmd_verify(args) -> int:
    cfg = VerifyConfig(
        max_n=args.max_n,
        per_cell=args.per_cell,
        eps_points=args.eps_points,
        seed=args.seed,
        conjectures=args.conjectures,
        bug_injection=1e-3 if args.inject_bug else 0.0,
    )
    results = run_suite(cfg)
    failed = [r for r in results if not r.passed and not r.conjectural]
    for r in results:
        status = "ok  " if r.passed else "FAIL"
        tag = " [conjecture, report-only]" if r.conjectural else ""
        margin = "" if r.margin is None else f" margin={r.margin:.6g}"
        print(f"{status} {r.name}{margin}{tag}")
        print(f"     {r.detail}")
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 1 if failed else 0


# ---------------------------------------------------------------------------
# Parser.
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="klbounds",
        description="Concentration bounds for the KL/L1 deviation of an "
        "empirical discrete distribution, with exact and Monte Carlo ground truths.",
    )
    ap.add_argument("--version", action="version",
                    version=f"klbounds {klbounds.__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", help="evaluate every KL tail bound at (n, k)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    _add_eps_args(p)
    _add_out_args(p)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("thresh", help="eps_thresh table and threshold ratio")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", required=True, metavar="K[,K...]")
    _add_out_args(p)
    p.set_defaults(func=cmd_thresh)

    p = sub.add_parser("compare",
                       help="bounds next to exact tails and Monte Carlo estimates")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--dist", default="uniform")
    p.add_argument("--stat", choices=("kl", "l1"), default="kl")
    _add_eps_args(p)
    _add_mc_args(p)
    _add_out_args(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("oracle", help="exact tails or moments by enumeration")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--dist", default="uniform")
    p.add_argument("--stat", choices=("kl", "l1"), default="kl")
    p.add_argument("--moments", action="store_true",
                   help="emit exact mean/variance instead of a tail curve")
    _add_eps_args(p)
    _add_out_args(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("mc-tail", help="Monte Carlo tail estimate")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--dist", default="uniform")
    p.add_argument("--stat", choices=("kl", "l1"), default="kl")
    _add_eps_args(p)
    _add_mc_args(p)
    _add_out_args(p)
    p.set_defaults(func=cmd_mc_tail)

    p = sub.add_parser("mc-var", help="Monte Carlo mean/variance of the KL statistic")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--dist", default="uniform")
    _add_mc_args(p)
    _add_out_args(p)
    p.set_defaults(func=cmd_mc_var)

    p = sub.add_parser("gof", help="sampler goodness-of-fit diagnostics")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--dist", default="uniform")
    p.add_argument("--test", choices=("chisq", "poisson", "both"), default="both")
    _add_mc_args(p)
    _add_out_args(p)
    p.set_defaults(func=cmd_gof)

    p = sub.add_parser("l1", help="evaluate the L1-deviation bounds")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--dist", default="uniform")
    _add_eps_args(p)
    _add_out_args(p)
    p.set_defaults(func=cmd_l1)

    p = sub.add_parser("figures",
                       help="emit data files for the seven standard figures")
    p.add_argument("figure", nargs="+",
                   help="figure ids among fig1..fig7, or 'all'")
    p.add_argument("--n", type=int, default=None,
                   help="override the figure's default n (ignored by fig5)")
    p.add_argument("--k", type=int, default=None,
                   help="override the figure's default k")
    p.add_argument("--dist", default="uniform",
                   help="distribution for the Monte Carlo series (default uniform)")
    p.add_argument("--out-dir", default=".", metavar="DIR")
    p.add_argument("--trials", type=int, default=0,
                   help="Monte Carlo trials for the true-probability series "
                   "(default 0: bounds only)")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_figures)

    p = sub.add_parser("verify", help="run the exact-oracle self-check suite")
    p.add_argument("--max-n", type=int, default=14)
    p.add_argument("--per-cell", type=int, default=6)
    p.add_argument("--eps-points", type=int, default=40)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--conjectures", action="store_true",
                   help="also report the conjectured bounds (never fail the run)")
    p.add_argument("--inject-bug", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, bounds.BoundsError, oracle.OracleError,
            montecarlo.MonteCarloError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
