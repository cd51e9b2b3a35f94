"""Command-line front end.

Subcommands: remez, ellipse-norm, fit, barrier, regime, barron-check,
multid-barrier.  Global flags: --config PATH, --seed U64, --out DIR,
--format csv|csv+svg.  Exit codes: 0 ok, 1 config error, 2 numerical
failure, 3 certificate violation.

All outputs are CSV files in the output directory (plus SVG figures in
csv+svg mode); the effective seed is echoed as a `# seed=...` comment line
at the top of each CSV.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

import numpy as np

from .activations import catalog_names, get_activation
from .barrier import (
    Schedule,
    StripParams,
    analytic_params_for,
    default_gevrey_constants,
    regime_classification,
    verify_barrier,
    verify_barrier_multid,
    zero_residual_report,
)
from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .ellipse import BernsteinEllipse, ellipse_boundary, ellipse_norm, max_rho_for_strip
from .network import ConstraintSet, FitConfig, eval_real, fit_l1_constrained, save_network
from .remez import RemezConvergenceError, decay_rate_fit, remez_best_approx
from .reporting import (
    ensure_outdir,
    plot_boundary_profile,
    plot_fit,
    plot_series,
    write_csv,
)
from .targets import get_target

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_CERTIFICATE = 3

DEFAULT_CONFIG_TEXT = "[experiment]\n"


def _u64(text):
    value = int(text)
    if not (0 <= value < 2 ** 64):
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def _build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config file (key = value sections)")
    common.add_argument("--seed", type=_u64, default=None,
                        help="override the fit seed (default 42 or the config's)")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--format", choices=("csv", "csv+svg"), default="csv",
                        help="emit CSV only, or CSV plus SVG figures")

    parser = argparse.ArgumentParser(
        prog="polybarrier",
        description="Polynomial approximation barriers for constrained ridge networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("remez", parents=[common],
                       help="best polynomial approximation errors of a target")
    p.add_argument("--target", default="abs")
    p.add_argument("--m-min", type=int, default=0)
    p.add_argument("--m-max", type=int, default=16)
    p.add_argument("--tol", type=float, default=1e-10)

    p = sub.add_parser("ellipse-norm", parents=[common],
                       help="activation sup norm on a dilated Bernstein ellipse")
    p.add_argument("--activation", required=True, choices=catalog_names())
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--dilation", type=float, default=1.0)
    p.add_argument("--safety", type=float, default=0.5)
    p.add_argument("--samples", type=int, default=4096)

    p = sub.add_parser("fit", parents=[common],
                       help="fit a constrained network to a target")
    p.add_argument("--target", default="abs")
    p.add_argument("--activation", default="tanh", choices=catalog_names())
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--budget", type=float, default=1.0)
    p.add_argument("--cap", type=float, default=1.0)

    p = sub.add_parser("barrier", parents=[common],
                       help="full barrier report for the configured experiment")
    p.add_argument("--break-constant", action="store_true",
                   help="negative control: zero the residual constant")

    sub.add_parser("regime", parents=[common],
                   help="classify the configured schedule's residual regime")

    p = sub.add_parser("barron-check", parents=[common],
                       help="high-frequency remainder bound on random networks")
    p.add_argument("--activation", default="tanh", choices=catalog_names())
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--width", type=int, default=8)
    p.add_argument("--threshold", default="median",
                   help="split threshold: a number, or 'median' of alpha norms")

    p = sub.add_parser("multid-barrier", parents=[common],
                       help="barrier report over the cube (dim 2 or 3)")
    p.add_argument("--break-constant", action="store_true")

    return parser


def _load_experiment(args) -> ExperimentConfig:
    if args.config:
        cfg = load_config(args.config)
    else:
        cfg = parse_config(DEFAULT_CONFIG_TEXT)
    if args.seed is not None:
        cfg = replace(cfg, fit=replace(cfg.fit, seed=args.seed))
    return cfg


def _mode_for(cfg: ExperimentConfig, act):
    if cfg.mode == "analytic":
        L_max = max(l for _, _, l in cfg.schedule)
        return analytic_params_for(act, L_max, rho=cfg.rho, safety=cfg.safety)
    if cfg.mode == "strip":
        delta = act.strip_half_width()
        if delta is None:
            raise ConfigError(
                f"strip mode needs a strip-analytic activation, not {act.name!r}"
            )
        return StripParams(delta=delta, safety=cfg.safety)
    return default_gevrey_constants(act)


def _report_csv_rows(report):
    return [
        (r.m, r.E_m_f, r.net_error, r.residual, r.slack, r.sharpness_ratio)
        for r in report.rows
    ]


# ---------------------------------------------------------------------------
# subcommand bodies


def _cmd_remez(args) -> int:
    try:
        f = get_target(args.target)
        if args.m_min < 0 or args.m_max < args.m_min:
            raise ValueError(f"bad degree range [{args.m_min}, {args.m_max}]")
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    seed = args.seed if args.seed is not None else 42
    out = ensure_outdir(args.out)
    rows = []
    errors = []
    try:
        for m in range(args.m_min, args.m_max + 1):
            sol = remez_best_approx(f, m, tol=args.tol)
            errors.append((m, sol.error))
            positive = [(mm, e) for mm, e in errors if e > 0]
            if len(positive) >= 3:
                rho_hat = decay_rate_fit(positive)
            else:
                rho_hat = float("nan")
            rows.append((m, sol.error, rho_hat))
    except RemezConvergenceError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    write_csv(os.path.join(out, "remez.csv"), ("m", "E_m", "rho_hat"), rows, seed=seed)
    if args.format == "csv+svg":
        plot_series(
            os.path.join(out, "remez.svg"),
            [r[0] for r in rows],
            {"E_m": [r[1] for r in rows]},
            xlabel="m", ylabel="error",
            title=f"best approximation error: {args.target}",
        )
    return EXIT_OK


def _cmd_ellipse_norm(args) -> int:
    act = get_activation(args.activation)
    try:
        rho = args.rho
        if rho is None:
            hw = act.strip_half_width()
            rho = (max_rho_for_strip(hw, max(args.dilation, 1.0), args.safety)
                   if hw is not None else 2.0)
        e = BernsteinEllipse(rho, max(args.dilation, 1.0))
        if not act.covers_ellipse(e.rho, e.dilation):
            raise ValueError(
                f"activation {act.name!r} is not analytic on {e.dilation} * E_{e.rho}"
            )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    seed = args.seed if args.seed is not None else 42
    out = ensure_outdir(args.out)
    try:
        value = ellipse_norm(act.eval_complex, e, args.samples)
    except ValueError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    write_csv(
        os.path.join(out, "ellipse_norm.csv"),
        ("activation", "rho", "dilation", "norm"),
        [(act.name, e.rho, e.dilation, value)],
        seed=seed,
    )
    print(f"M_(rho={e.rho:g}, L={e.dilation:g})({act.name}) = {value:.12g}")
    if args.format == "csv+svg":
        thetas = 2 * np.pi * np.arange(args.samples) / args.samples
        vals = np.abs(act.eval_complex(ellipse_boundary(e, args.samples)))
        plot_boundary_profile(
            os.path.join(out, "ellipse_norm.svg"), thetas, vals,
            title=f"|{act.name}| on {e.dilation:g} x E_{e.rho:g}",
        )
    return EXIT_OK


def _cmd_fit(args) -> int:
    try:
        cfg = _load_experiment(args)
        f = get_target(args.target)
        act = get_activation(args.activation)
        cs = ConstraintSet(args.budget, args.cap)
        if args.m < 1:
            raise ValueError(f"width must be >= 1, got {args.m}")
    except (ConfigError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = ensure_outdir(args.out)
    net, err = fit_l1_constrained(f, args.m, cs, cfg.fit, act)
    write_csv(
        os.path.join(out, "fit.csv"),
        ("m", "B", "L", "l_inf_error"),
        [(args.m, cs.B, cs.L, err)],
        seed=cfg.fit.seed,
    )
    save_network(net, cs, os.path.join(out, "fit_network.txt"))
    print(f"width {args.m} {act.name} network: sup error {err:.6g}")
    if args.format == "csv+svg":
        xs = np.linspace(-1, 1, 1001)
        plot_fit(
            os.path.join(out, "fit.svg"), xs, f(xs), eval_real(net, xs),
            title=f"{args.target} vs width-{args.m} {act.name} network",
        )
    return EXIT_OK


def _run_barrier(args, multid: bool) -> int:
    try:
        cfg = _load_experiment(args)
        act = get_activation(cfg.activation)
        if multid and cfg.dim not in (2, 3):
            raise ConfigError(f"multid-barrier needs dim 2 or 3, got {cfg.dim}")
        if not multid and cfg.dim != 1:
            raise ConfigError(f"barrier is univariate; got dim {cfg.dim} "
                              "(use multid-barrier)")
        f = get_target(cfg.target, dim=cfg.dim)
        mode = None if multid else _mode_for(cfg, act)
    except (ConfigError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = ensure_outdir(args.out)
    try:
        if multid:
            report = verify_barrier_multid(
                f, act, cfg.schedule, cfg.dim, cfg.fit,
                safety=cfg.safety, grid_per_axis=cfg.e_grid_per_axis,
            )
        else:
            report = verify_barrier(f, act, cfg.schedule, mode, cfg.fit)
    except RemezConvergenceError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if args.break_constant:
        report = zero_residual_report(report)
    name = "multid_barrier" if multid else "barrier"
    write_csv(
        os.path.join(out, f"{name}.csv"),
        ("m", "E_m_f", "net_error", "residual", "slack", "sharpness_ratio"),
        _report_csv_rows(report),
        seed=cfg.fit.seed,
    )
    if args.format == "csv+svg":
        ms = [r.m for r in report.rows]
        plot_series(
            os.path.join(out, f"{name}.svg"),
            ms,
            {
                "E_m(f)": [r.E_m_f for r in report.rows],
                "net_error": [r.net_error for r in report.rows],
                "residual": [r.residual for r in report.rows],
            },
            xlabel="m", ylabel="error",
            title=f"{cfg.target} / {cfg.activation} ({cfg.mode})",
        )
    if not report.passes:
        worst = min(r.slack for r in report.rows)
        print(f"certificate violation: worst slack {worst:.3e}", file=sys.stderr)
        return EXIT_CERTIFICATE
    print(f"barrier report: {len(report.rows)} rows, all slacks >= -1e-9")
    return EXIT_OK


def _cmd_regime(args) -> int:
    try:
        cfg = _load_experiment(args)
        act = get_activation(cfg.activation)
        mode = _mode_for(cfg, act)
        result = regime_classification(cfg.schedule, mode, act)
    except (ConfigError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = ensure_outdir(args.out)
    rows = [
        (m, x, r)
        for (m, _, _), x, r in zip(cfg.schedule, result.trend, result.residuals)
    ]
    write_csv(os.path.join(out, "regime.csv"), ("m", "x_m", "residual"),
              rows, seed=cfg.fit.seed)
    print(result.label)
    if args.format == "csv+svg":
        plot_series(
            os.path.join(out, "regime.svg"),
            [r[0] for r in rows],
            {"|x_m|": [abs(r[1]) for r in rows],
             "residual": [r[2] for r in rows]},
            xlabel="m", ylabel="value",
            title=f"regime: {result.label}",
        )
    return EXIT_OK


def _cmd_barron_check(args) -> int:
    from .barrier import barron_remainder_check
    from .network import NetworkParams

    act = get_activation(args.activation)
    try:
        if act.sup_real is None:
            raise ValueError(
                f"activation {act.name!r} is unbounded; pick a bounded one"
            )
        if args.count < 1 or args.width < 1:
            raise ValueError("count and width must be positive")
        threshold = None if args.threshold == "median" else float(args.threshold)
        if threshold is not None and threshold <= 0:
            raise ValueError("threshold must be positive")
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    seed = args.seed if args.seed is not None else 42
    out = ensure_outdir(args.out)
    rows = []
    all_pass = True
    rng = np.random.default_rng(seed)
    for k in range(args.count):
        lam = rng.uniform(-1.0, 1.0, args.width)
        alphas = rng.uniform(-4.0, 4.0, args.width)
        net = NetworkParams(lam, alphas, act, 1)
        L = threshold if threshold is not None else float(np.median(np.abs(alphas)))
        check = barron_remainder_check(net, L)
        all_pass &= check.passed
        rows.append((k, L, check.bound, check.measured, int(check.passed)))
    write_csv(
        os.path.join(out, "barron.csv"),
        ("net", "L", "bound", "measured", "pass"),
        rows,
        seed=seed,
    )
    if args.format == "csv+svg":
        plot_series(
            os.path.join(out, "barron.svg"),
            [r[0] for r in rows],
            {"bound": [r[2] for r in rows],
             "measured": [max(r[3], 1e-300) for r in rows]},
            xlabel="network", ylabel="sup of high part",
            title=f"remainder bound: {act.name}",
        )
    if not all_pass:
        print("certificate violation: remainder bound exceeded", file=sys.stderr)
        return EXIT_CERTIFICATE
    print(f"{args.count} networks: all remainder bounds hold")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; map onto the config error code
        return EXIT_CONFIG if exc.code not in (0, None) else 0
    handlers = {
        "remez": _cmd_remez,
        "ellipse-norm": _cmd_ellipse_norm,
        "fit": _cmd_fit,
        "barrier": lambda a: _run_barrier(a, multid=False),
        "regime": _cmd_regime,
        "barron-check": _cmd_barron_check,
        "multid-barrier": lambda a: _run_barrier(a, multid=True),
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RemezConvergenceError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
