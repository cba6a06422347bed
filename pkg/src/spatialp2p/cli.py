"""Command-line front end.

Subcommands: analytic, simulate, sweep, capacity, toy, ode.
Exit codes: 0 success, 1 invalid configuration, 2 runtime failure
(instability, population cap, non-convergence), 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import rates
from .analytic import (
    AnalyticError,
    ConvergenceError,
    OdeInstabilityError,
    abandonment_metrics,
    fluid_metrics,
    fluid_ode_run,
    hardcore_metrics,
    heuristic_m,
    seeder_latency,
    server_latency,
    toy_bessel_mean,
    toy_chain_mean,
)
from .capacity import NetworkModel, feasibility, line_flux, linear_capacity, min_dimensioning
from .experiments import (
    ConfigError,
    SweepSpec,
    load_config,
    run_sweep,
    summarize_run,
    write_density_trace,
    write_latency_cdf,
    write_nn_cdf,
)
from .rates import RateModelError
from .simulator import SimulationError, estimate_M, nn_distance_stats, run

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2
EXIT_IO = 3


def _parse_number(text: str) -> float:
    """Accept plain floats and fractions like 1/32."""
    if "/" in text:
        num, den = text.split("/", 1)
        return float(num) / float(den)
    return float(text)


def _number_list(text: str) -> list:
    return [_parse_number(tok) for tok in text.replace(",", " ").split()]


def cmd_analytic(args) -> int:
    loaded = load_config(args.config)
    p = loaded.params
    fm = fluid_metrics(p)
    out = {
        "fluid": {
            "gamma": fm.gamma, "beta_f": fm.beta_f, "mu_f": fm.mu_f,
            "W_f": fm.W_f, "N_f": fm.N_f, "rho": fm.rho, "R_tilde": fm.R_tilde,
        }
    }
    if p.rate.finite_range:
        hc = hardcore_metrics(p)
        out["hardcore"] = {"beta_h": hc.beta_h, "W_h": hc.W_h}
    if p.rate.kind in (rates.TCP, rates.UDP):
        m_hat = heuristic_m(p.rate.kind, fm.N_f)
        out["heuristic"] = {"M": m_hat, "W_predicted": m_hat * fm.W_f}
    ext = _extensions_from_config(args.config)
    if ext.get("T_S", 0.0) > 0:
        out["seeding"] = {"T_S": ext["T_S"], "W_f_seeded": seeder_latency(fm.W_f, ext["T_S"])}
    if ext.get("U_C", 0.0) > 0 and p.rate.finite_range:
        sm = server_latency(p, ext["U_C"])
        out["servers"] = {
            "chi_C": sm.chi_C,
            "W_fluid_assisted": sm.W_fluid_assisted,
            "W_server_dominated": sm.W_server_dominated,
        }
    if ext.get("a", 0.0) > 0:
        am = abandonment_metrics(p, ext["a"])
        out["abandonment"] = {"mu_f": am.mu_f, "ratio": am.abandonment_ratio}
    if args.json:
        print(json.dumps(out, indent=2))
    else:
        for section, values in out.items():
            print(f"[{section}]")
            for key, val in values.items():
                print(f"  {key} = {val}")
    return EXIT_OK


def _extensions_from_config(path) -> dict:
    with Path(path).open() as fh:
        doc = json.load(fh)
    ext = doc.get("extensions", {}) or {}
    return {k: float(v) for k, v in ext.items()}


def cmd_simulate(args) -> int:
    loaded = load_config(args.config, need_sim=True)
    cfg = loaded.sim
    stats = run(cfg)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = summarize_run(stats, cfg)
    with (out_dir / "run_summary.json").open("w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    p = cfg.params
    fm = fluid_metrics(p)
    w_h = hardcore_metrics(p).W_h
    write_latency_cdf(stats.latency_samples, fm.W_f, w_h, out_dir / "latency_cdf.csv")
    if stats.snapshots:
        nn = nn_distance_stats(stats, p)
        pooled = np.concatenate([s.nn_distances for s in stats.snapshots])
        write_nn_cdf(pooled, nn.measured_density, p.rate.R, out_dir / "nn_cdf.csv")
    write_density_trace(stats.density_trace, out_dir / "density_trace.csv")
    est = estimate_M(stats, p)
    print(f"recorded {est.n_samples} departures; M_sim = {est.m_sim:.4f} "
          f"(stderr {est.stderr:.4f}); outputs in {out_dir}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = SweepSpec(
        n_f_values=tuple(args.nf),
        runs=args.runs,
        W_f=args.wf,
        R=args.r,
        C=args.c,
        kind=args.kind,
        target_departures=args.target_departures,
        base_seed=args.base_seed,
        jobs=args.jobs,
    )
    out_path = Path(args.out)
    result = run_sweep(spec, out_dir=out_path.parent if args.detail else None)
    from .experiments import emit_csv, emit_json  # local to keep module load light

    if out_path.suffix == ".json":
        emit_json(result.rows, out_path)
    else:
        emit_csv(result.rows, out_path)
    for n_f, seed, msg in result.failures:
        print(f"warning: run failed at N_f={n_f} seed={seed}: {msg}", file=sys.stderr)
    print(f"wrote {len(result.rows)} rows to {out_path}")
    return EXIT_OK


def cmd_capacity(args) -> int:
    loaded = load_config(args.config)
    p = loaded.params
    net = NetworkModel(theta=args.theta, K=args.k)
    rep = feasibility(p, net)
    out = {
        "psi": rep.psi,
        "xi": rep.xi,
        "network_ok": rep.network_ok,
        "access_threshold": rep.access_threshold,
        "min_K_at_theta": min_dimensioning(p, theta=args.theta),
        "min_theta_at_K": min_dimensioning(p, K=args.k),
    }
    if args.json:
        print(json.dumps(out, indent=2))
    else:
        for key, val in out.items():
            print(f"{key} = {val}")
    return EXIT_OK


def cmd_toy(args) -> int:
    if args.mode == "pairwise":
        print(f"{'rho':>12} {'chain_mean':>18} {'bessel_mean':>18} {'abs_diff':>12}")
        for rho in args.rho:
            chain = toy_chain_mean(rho, "pairwise")
            bessel = toy_bessel_mean(rho)
            print(f"{rho:>12g} {chain:>18.12g} {bessel:>18.12g} {abs(chain - bessel):>12.3e}")
    else:
        print(f"{'rho':>12} {'chain_mean':>18}")
        for rho in args.rho:
            print(f"{rho:>12g} {toy_chain_mean(rho, 'proportional'):>18.12g}")
    return EXIT_OK


def cmd_ode(args) -> int:
    loaded = load_config(args.config)
    p = loaded.params
    fm = fluid_metrics(p)
    n = args.grid
    init = None
    if args.perturb:
        x = np.arange(n) / n
        init = fm.beta_f * (1.0 + args.perturb * np.sin(2 * math.pi * x)[:, None] * np.ones(n))
    res = fluid_ode_run(p, grid_n=n, dt=args.dt, t_end=args.tmax, init_field=init)
    print(f"converged = {res.converged}")
    print(f"residual = {res.residual:.3e}")
    print(f"t_end = {res.t_end}, dt = {res.dt}")
    print(f"field mean = {res.field.mean():.6g} (fluid density {fm.beta_f:.6g}), "
          f"min = {res.field.min():.6g}, max = {res.field.max():.6g}")
    if args.out:
        import csv as _csv

        with Path(args.out).open("w", newline="") as fh:
            writer = _csv.writer(fh)
            writer.writerow(("i", "j", "beta"))
            for i in range(n):
                for j in range(n):
                    writer.writerow((i, j, f"{res.field[i, j]:.17g}"))
        print(f"final field written to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spatialp2p",
        description="Spatial peer swarm: closed-form laws, simulator, sweeps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analytic", help="closed-form metrics for a configuration")
    pa.add_argument("--config", required=True)
    pa.add_argument("--json", action="store_true")
    pa.set_defaults(func=cmd_analytic)

    ps = sub.add_parser("simulate", help="run the simulator, write summary and CDFs")
    ps.add_argument("--config", required=True)
    ps.add_argument("--out-dir", required=True)
    ps.set_defaults(func=cmd_simulate)

    pw = sub.add_parser("sweep", help="sample the slowdown curve M(N_f)")
    pw.add_argument("--nf", type=_number_list,
                    default=[2.0**k for k in range(-5, 7)],
                    help="space/comma separated list; fractions like 1/32 allowed")
    pw.add_argument("--runs", type=int, default=10)
    pw.add_argument("--wf", type=float, default=100.0)
    pw.add_argument("--r", type=float, default=0.1)
    pw.add_argument("--c", type=float, default=1.0)
    pw.add_argument("--kind", choices=[rates.TCP, rates.UDP], default=rates.TCP)
    pw.add_argument("--target-departures", type=int, default=5000)
    pw.add_argument("--base-seed", type=int, default=1)
    pw.add_argument("--jobs", type=int, default=1)
    pw.add_argument("--detail", action="store_true",
                    help="also write detail-point CDF files next to --out")
    pw.add_argument("--out", required=True)
    pw.set_defaults(func=cmd_sweep)

    pc = sub.add_parser("capacity", help="line flux vs linear network capacity")
    pc.add_argument("--config", required=True)
    pc.add_argument("--theta", type=float, required=True)
    pc.add_argument("--k", type=float, required=True)
    pc.add_argument("--json", action="store_true")
    pc.set_defaults(func=cmd_capacity)

    pt = sub.add_parser("toy", help="complete-graph chain vs Bessel closed form")
    pt.add_argument("--rho", type=_number_list, required=True)
    pt.add_argument("--mode", choices=["pairwise", "proportional"], default="pairwise")
    pt.set_defaults(func=cmd_toy)

    po = sub.add_parser("ode", help="spatial density evolution to equilibrium")
    po.add_argument("--config", required=True)
    po.add_argument("--grid", type=int, default=64)
    po.add_argument("--tmax", type=float, default=None)
    po.add_argument("--dt", type=float, default=None)
    po.add_argument("--perturb", type=float, default=0.0,
                    help="relative amplitude of a sinusoidal initial perturbation")
    po.add_argument("--out", default=None, help="write the final field as CSV")
    po.set_defaults(func=cmd_ode)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, RateModelError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AnalyticError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SimulationError, OdeInstabilityError, ConvergenceError, rates.QuadratureError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
