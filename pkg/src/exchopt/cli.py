"""Command-line interface.

Subcommands: price, sweep, simulate, moments, analyze.  Outputs are JSON and
CSV files plus a run manifest per invocation.  Exit codes: 0 success,
2 usage or config error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from . import manifest as manifest_mod
from . import moments as moments_mod
from .margrabe import SingularInputError
from .mc import (RealizabilityError, ResourceLimitError, SimConfig,
                 estimate_integrated_moments, price_mc, simulate)
from .moments.ode import MomentOdeFailure
from .params import (MarketState, config_dict, default_params, default_state,
                     load_config)
from .taylor import margrabe_const, price_taylor

EXIT_USAGE = 2
EXIT_NUMERICAL = 3


class UsageError(Exception):
    pass


def _load(args):
    if args.config:
        return load_config(args.config)
    return default_params(), default_state()


def _outdir(args):
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    return out


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


_BACKEND_MAP = {"closed-form": "closed_form", "ode": "ode",
                "paper-verbatim": "paper_verbatim"}
_DISCOUNT_MAP = {"standard": "standard", "paper-eq9": "paper_eq9"}


def _sim_config(args, defaults=SimConfig()):
    return SimConfig(
        n_paths=args.paths if args.paths is not None else defaults.n_paths,
        n_steps=args.steps if args.steps is not None else defaults.n_steps,
        seed=args.seed if args.seed is not None else defaults.seed,
        scheme=getattr(args, "scheme", "auto") or "auto",
        antithetic=bool(getattr(args, "antithetic", False)),
    )


def cmd_price(args):
    params, state = _load(args)
    backend = _BACKEND_MAP[args.backend]
    mode = _DISCOUNT_MAP[args.discount_mode]
    out = _outdir(args)
    seeds = []
    if args.method == "taylor":
        rep = price_taylor(params, state, backend=backend, discount_mode=mode)
        payload = rep.to_dict()
    elif args.method == "margrabe-const":
        rep = margrabe_const(params, state, backend=backend, discount_mode=mode)
        payload = rep.to_dict()
    else:
        cfg = _sim_config(args)
        seeds = [cfg.seed]
        est = price_mc(params, state, cfg=cfg)
        payload = {
            "schema_version": 1,
            "price": est.mean,
            "method": "mc",
            "discount_mode": mode,
            "std_error": est.std_error,
            "n_paths": est.n,
            "inputs": config_dict(params, state),
        }
        payload.update(est.extra)
    if mode == "paper_eq9":
        # both legs carry e^{-rT} in this mode, unlike the exchange-parity
        # (undiscounted-prefactor) form the simulation reproduces
        payload["divergence_note"] = (
            "discount mode paper_eq9 multiplies each leg by exp(-r*T) "
            f"= {math.exp(-state.rate * state.maturity):.12g} relative to "
            "standard mode; the Monte Carlo oracle matches standard mode")
    path = os.path.join(out, "price_report.json")
    _write_json(path, payload)
    man = manifest_mod.build_manifest(
        "price", {"config": config_dict(params, state), "method": args.method,
                  "discount_mode": mode, "backend": backend,
                  "mc": _sim_config(args).__dict__ if args.method == "mc" else None},
        [path], seeds)
    manifest_mod.write_manifest(man, os.path.join(out, "manifest_price.json"))
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def _parse_grid(spec):
    try:
        a, b, n = spec.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError as exc:
        raise UsageError(f"bad grid {spec!r}; expected a:b:n") from exc
    if n < 1:
        raise UsageError("grid needs at least one point")
    if n > 1 and not b > a:
        raise UsageError("grid requires b > a")
    return np.linspace(a, b, n)


def cmd_sweep(args):
    params, state = _load(args)
    grid = _parse_grid(args.grid)
    backend = _BACKEND_MAP[args.backend]
    mode = _DISCOUNT_MAP[args.discount_mode]
    out = _outdir(args)
    rows = []
    for val in grid:
        if args.vary == "corr":
            if not -1.0 <= val <= 1.0:
                raise UsageError(f"correlation grid value {val} outside [-1,1]")
            st = MarketState(s0=state.s0, v0=state.v0, rho0=float(val),
                             rate=state.rate, maturity=state.maturity,
                             units=state.units)
        else:
            if val <= 0:
                raise UsageError(f"squared-volatility grid value {val} must be positive")
            st = MarketState(s0=state.s0, v0=(float(val), float(val)),
                             rho0=state.rho0, rate=state.rate,
                             maturity=state.maturity, units=state.units)
        if args.method == "taylor":
            rows.append((float(val), price_taylor(params, st, backend=backend,
                                                  discount_mode=mode).price, ""))
        elif args.method == "margrabe-const":
            rows.append((float(val), margrabe_const(params, st, backend=backend,
                                                    discount_mode=mode).price, ""))
        else:
            est = price_mc(params, st, cfg=_sim_config(args))
            rows.append((float(val), est.mean, est.std_error))
    path = os.path.join(out, f"sweep_{args.vary}.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([args.vary, "price", "std_error"])
        for r in rows:
            w.writerow(r)
    man = manifest_mod.build_manifest(
        "sweep", {"config": config_dict(params, state), "vary": args.vary,
                  "grid": args.grid, "method": args.method,
                  "discount_mode": mode, "backend": backend,
                  "mc": _sim_config(args).__dict__ if args.method == "mc" else None},
        [path], [args.seed] if args.seed is not None else [])
    manifest_mod.write_manifest(man, os.path.join(out, "manifest_sweep.json"))
    print(f"wrote {path} ({len(rows)} rows)")
    return 0


def cmd_simulate(args):
    params, state = _load(args)
    if args.paths is not None and args.paths < 1:
        raise UsageError("need at least one path")
    cfg = _sim_config(args, SimConfig(n_paths=1, n_steps=2000))
    batch = simulate(params, state, cfg=cfg)
    out = _outdir(args)
    paths = []

    def dump(name, header, cols):
        p = os.path.join(out, name)
        with open(p, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for i, t in enumerate(batch.times):
                w.writerow([f"{t:.10g}"] + [f"{c[i]:.12g}" for c in cols])
        paths.append(p)

    for k in range(cfg.n_paths):
        sfx = f"_p{k}" if cfg.n_paths > 1 else ""
        dump(f"prices{sfx}.csv", ["time", "s1", "s2"],
             [batch.s[k, 0], batch.s[k, 1]])
        dump(f"squared_vols{sfx}.csv", ["time", "v1", "v2"],
             [batch.sigma[k, 0] ** 2, batch.sigma[k, 1] ** 2])
        dump(f"correlation{sfx}.csv", ["time", "rho"], [batch.rho[k]])
    man = manifest_mod.build_manifest(
        "simulate", {"config": config_dict(params, state), "mc": cfg.__dict__},
        paths, [cfg.seed],
        extra={"rng": batch.rng_provenance, "scheme": batch.scheme,
               "clamp_fraction": batch.clamp_fraction})
    manifest_mod.write_manifest(man, os.path.join(out, "manifest_simulate.json"))
    print(f"wrote {len(paths)} trajectory files to {out}")
    return 0


def cmd_moments(args):
    params, state = _load(args)
    backend = _BACKEND_MAP[args.backend]
    out = _outdir(args)
    ms = moments_mod.moment_summary(params, state, backend=backend)
    payload = {
        "schema_version": 1,
        "x0": list(ms.x0), "var": list(ms.var), "cov12": ms.cov12,
        "backend": ms.backend, "t": ms.t,
        "inputs": config_dict(params, state),
    }
    path = os.path.join(out, "moment_summary.json")
    _write_json(path, payload)
    outputs = [path]
    seeds = []
    if args.compare:
        cfg = _sim_config(args, SimConfig(n_paths=100_000, n_steps=200))
        seeds = [cfg.seed]
        emp = estimate_integrated_moments(params, state, cfg=cfg)
        cf = moments_mod.moment_summary(params, state, backend="closed_form")
        od = moments_mod.moment_summary(params, state, backend="ode")
        pv = moments_mod.moment_summary(params, state, backend="paper_verbatim")
        stats = [
            ("mean_v1_plus", cf.x0[0], od.x0[0], pv.x0[0],
             emp["mean_v1_plus"], emp["se_mean_v1_plus"]),
            ("mean_v2_plus", cf.x0[1], od.x0[1], pv.x0[1],
             emp["mean_v2_plus"], emp["se_mean_v2_plus"]),
            ("mean_rho_plus", cf.x0[2], od.x0[2], pv.x0[2],
             emp["mean_rho_plus"], emp["se_mean_rho_plus"]),
            ("var_v1_plus", cf.var[0], od.var[0], pv.var[0],
             emp["var_v1_plus"], emp["se_var_v1_plus"]),
            ("var_v2_plus", cf.var[1], od.var[1], pv.var[1],
             emp["var_v2_plus"], emp["se_var_v2_plus"]),
            ("var_rho_plus", cf.var[2], od.var[2], pv.var[2],
             emp["var_rho_plus"], emp["se_var_rho_plus"]),
            ("cov12", cf.cov12, od.cov12, pv.cov12,
             emp["cov12"], emp["se_cov12"]),
        ]
        cpath = os.path.join(out, "moment_comparison.csv")
        with open(cpath, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["statistic", "closed_form", "ode", "paper_verbatim",
                        "mc", "mc_se", "rel_gap_cf_ode", "z_cf_mc",
                        "rel_gap_verbatim_cf"])
            for name, a, b, v, m, se in stats:
                rel = abs(a - b) / max(1e-300, abs(b))
                z = (a - m) / se if se > 0 else math.nan
                relv = (abs(v - a) / max(1e-300, abs(a))
                        if math.isfinite(v) else math.inf)
                w.writerow([name, f"{a:.12g}", f"{b:.12g}", f"{v:.12g}",
                            f"{m:.12g}", f"{se:.3g}", f"{rel:.3g}",
                            f"{z:.3f}", f"{relv:.3g}"])
        outputs.append(cpath)
    man = manifest_mod.build_manifest(
        "moments", {"config": config_dict(params, state), "backend": backend,
                    "compare": bool(args.compare),
                    "mc": _sim_config(args, SimConfig(n_paths=100_000, n_steps=200)).__dict__
                    if args.compare else None},
        outputs, seeds)
    manifest_mod.write_manifest(man, os.path.join(out, "manifest_moments.json"))
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def cmd_analyze(args):
    from . import market_data as md
    series = md.load_csv(args.csv)
    if args.window < 3:
        raise UsageError("window must be at least 3")
    n_inputs = len(series) if args.on == "prices" else len(series) - 1
    if n_inputs < args.window:
        raise UsageError(f"window {args.window} longer than series ({n_inputs})")
    out = _outdir(args)
    summ = md.summary(series)
    jpath = os.path.join(out, "summary.json")
    _write_json(jpath, summ.to_dict())
    dates, corr = md.rolling_correlation(series, args.window, on=args.on)
    cpath = os.path.join(out, f"rolling_corr_{args.on}.csv")
    with open(cpath, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["date", "corr"])
        for d, c in zip(dates, corr):
            w.writerow([d.isoformat(), "" if math.isnan(c) else f"{c:.12g}"])
    man = manifest_mod.build_manifest(
        "analyze", {"csv": os.fspath(args.csv), "window": args.window,
                    "on": args.on}, [jpath, cpath])
    manifest_mod.write_manifest(man, os.path.join(out, "manifest_analyze.json"))
    print(json.dumps(summ.to_dict(), indent=2, sort_keys=True))
    return 0


def build_parser():
    ap = argparse.ArgumentParser(
        prog="exchopt",
        description="Exchange-option pricing under stochastic volatility "
                    "and stochastic correlation")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(p, mc=True):
        p.add_argument("--config", help="JSON parameter file (defaults: the "
                       "reference experiment)")
        p.add_argument("--out", help="output directory (default: cwd)")
        if mc:
            p.add_argument("--paths", type=int, default=None)
            p.add_argument("--steps", type=int, default=None,
                           help="time steps per year")
            p.add_argument("--seed", type=int, default=None)
            p.add_argument("--scheme", choices=["auto", "qe", "exact_ou",
                                                "full_euler"], default="auto")
            p.add_argument("--antithetic", action="store_true")

    p = sub.add_parser("price", help="price the exchange option")
    common(p)
    p.add_argument("--method", choices=["taylor", "mc", "margrabe-const"],
                   default="taylor")
    p.add_argument("--discount-mode", choices=["standard", "paper-eq9"],
                   default="standard", dest="discount_mode")
    p.add_argument("--backend", choices=list(_BACKEND_MAP), default="closed-form")
    p.set_defaults(func=cmd_price)

    p = sub.add_parser("sweep", help="price along a parameter grid")
    common(p)
    p.add_argument("--vary", choices=["vol", "corr"], required=True)
    p.add_argument("--grid", required=True, help="a:b:n inclusive grid")
    p.add_argument("--method", choices=["taylor", "mc", "margrabe-const"],
                   default="mc")
    p.add_argument("--discount-mode", choices=["standard", "paper-eq9"],
                   default="standard", dest="discount_mode")
    p.add_argument("--backend", choices=list(_BACKEND_MAP), default="closed-form")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", help="export simulated trajectories")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("moments", help="integrated-moment summary")
    common(p)
    p.add_argument("--backend", choices=list(_BACKEND_MAP), default="closed-form")
    p.add_argument("--compare", action="store_true",
                   help="also write a closed-form/ODE/MC comparison table")
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("analyze", help="summarize a paired daily price CSV")
    p.add_argument("csv")
    p.add_argument("--window", type=int, default=50)
    p.add_argument("--on", choices=["prices", "returns"], default="prices")
    p.add_argument("--out", help="output directory (default: cwd)")
    p.set_defaults(func=cmd_analyze)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (SingularInputError, RealizabilityError, MomentOdeFailure,
            ResourceLimitError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (UsageError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
