"""Scenario construction, sweeps over the dimensionless working point, and
file emission.

A sweep samples the latency slowdown M at a grid of neighbor counts N_f,
holding (W_f, R, C) fixed so the fluid prediction is the same for every
point and the measured mean latency reads off M directly. Results land in
one CSV/JSON table plus, for designated detail points, empirical CDF files
for latency and nearest-neighbor distance with the model overlays baked in
as columns.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import rates
from .analytic import (
    AnalyticError,
    SystemParams,
    fluid_metrics,
    hardcore_metrics,
    heuristic_m,
    scenario_from_dimensionless,
)
from .geometry import Torus
from .rates import RateModel, RateModelError
from .simulator import (
    SimConfig,
    SimStats,
    SimulationError,
    estimate_M,
    nn_distance_stats,
    run,
)


class ConfigError(ValueError):
    pass


DEFAULT_NF_GRID = tuple(2.0**k for k in range(-5, 7))
DETAIL_POINTS = (1.0 / 32.0, 1.0, 64.0)

RESULT_COLUMNS = (
    "N_f", "rho", "lambda", "F", "C", "R", "W_f", "W_sim", "M_sim",
    "stderr", "M_heuristic", "M_hardcore", "n_latency_samples", "seeds_used",
)


@dataclass(frozen=True)
class SweepSpec:
    n_f_values: tuple = DEFAULT_NF_GRID
    runs: int = 10
    W_f: float = 100.0
    R: float = 0.1
    C: float = 1.0
    kind: str = rates.TCP
    target_departures: int = 5000
    base_seed: int = 1
    detail_points: tuple = DETAIL_POINTS
    jobs: int = 1

    def __post_init__(self):
        if any(v <= 0 for v in self.n_f_values):
            raise ConfigError("N_f values must be positive")
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if self.kind not in (rates.TCP, rates.UDP):
            raise ConfigError("sweeps support the tcp and udp kinds")

    def seed_for(self, point_index: int, run_index: int) -> int:
        # any single run is reproducible in isolation from these three numbers
        return self.base_seed + point_index * 10_000 + run_index


@dataclass
class ResultRow:
    N_f: float
    rho: float
    lam: float
    F: float
    C: float
    R: float
    W_f: float
    W_sim: float
    M_sim: float
    stderr: float
    M_heuristic: float
    M_hardcore: float
    n_latency_samples: int
    seeds_used: str

    def as_mapping(self) -> dict:
        return {
            "N_f": self.N_f, "rho": self.rho, "lambda": self.lam, "F": self.F,
            "C": self.C, "R": self.R, "W_f": self.W_f, "W_sim": self.W_sim,
            "M_sim": self.M_sim, "stderr": self.stderr,
            "M_heuristic": self.M_heuristic, "M_hardcore": self.M_hardcore,
            "n_latency_samples": self.n_latency_samples,
            "seeds_used": self.seeds_used,
        }


def build_scenario(
    n_f: float,
    W_f: float = 100.0,
    R: float = 0.1,
    C: float = 1.0,
    kind: str = rates.TCP,
    target_departures: int = 5000,
    seed: int = 0,
    tau: float = 1.0,
) -> SimConfig:
    """Simulation configuration realizing one dimensionless working point.

    The torus has unit side. Warmup spans several expected sojourn times,
    and the measurement window is sized so the expected number of recorded
    departures reaches the target. Snapshot cadence is capped so a run
    keeps a bounded number of snapshots regardless of its length.
    """
    sc = scenario_from_dimensionless(n_f, W_f, R, C, kind)
    p = sc.params()
    w_hat = heuristic_m(kind, n_f) * W_f
    area = 1.0
    warmup = _ceil_to(8.0 * w_hat, tau)
    measure = _ceil_to(target_departures / (p.lam * area), tau)
    snapshot_every = max(tau, measure / 400.0)
    return SimConfig(
        params=p,
        torus=Torus(1.0),
        tau=tau,
        warmup=warmup,
        measure=measure,
        seed=seed,
        snapshot_every=snapshot_every,
    )


def expected_population(cfg: SimConfig) -> float:
    """Stationary population the slowdown-corrected law predicts."""
    fm = fluid_metrics(cfg.params)
    m_hat = heuristic_m(cfg.params.rate.kind, fm.N_f)
    return cfg.params.lam * cfg.torus.area * m_hat * fm.W_f


def _ceil_to(value: float, step: float) -> float:
    return math.ceil(value / step) * step


@dataclass
class _RunPayload:
    point_index: int
    run_index: int
    seed: int
    latencies: np.ndarray
    nn_values: Optional[np.ndarray]
    measured_density: float
    little_ratio: float
    censored: int


def _execute_run(args) -> _RunPayload:
    (point_index, run_index, n_f, spec_dict, want_detail) = args
    spec = SweepSpec(**spec_dict)
    seed = spec.seed_for(point_index, run_index)
    cfg = build_scenario(
        n_f, spec.W_f, spec.R, spec.C, spec.kind,
        target_departures=spec.target_departures, seed=seed,
    )
    stats = run(cfg)
    est = estimate_M(stats, cfg.params)
    little = stats.avg_leecher_population / (
        cfg.params.lam * cfg.torus.area * est.mean_latency
    )
    nn_values = None
    density = math.nan
    if stats.snapshots:
        nn = nn_distance_stats(stats, cfg.params)
        density = nn.measured_density
        if want_detail:
            nn_values = np.concatenate([s.nn_distances for s in stats.snapshots])
    return _RunPayload(
        point_index=point_index,
        run_index=run_index,
        seed=seed,
        latencies=stats.latency_samples,
        nn_values=nn_values,
        measured_density=density,
        little_ratio=little,
        censored=stats.censored,
    )


def _execute_run_safe(args):
    try:
        return "ok", _execute_run(args)
    except (SimulationError, AnalyticError, RateModelError) as exc:
        point_index, run_index, n_f, spec_dict, _ = args
        seed = SweepSpec(**spec_dict).seed_for(point_index, run_index)
        return "err", (n_f, seed, str(exc))


@dataclass
class SweepResult:
    rows: list
    detail: dict            # n_f -> {"latency": ndarray, "nn": ndarray, "density": float}
    failures: list          # (n_f, seed, message)


def run_sweep(spec: SweepSpec, out_dir: Optional[Path] = None) -> SweepResult:
    """Run every (point, seed) combination, aggregate one row per point, and
    optionally write the sweep table plus detail-point CDF files.

    Individual run failures are recorded and the sweep continues; the
    aggregation then uses the surviving runs of that point.
    """
    spec_dict = {
        "n_f_values": tuple(spec.n_f_values), "runs": spec.runs, "W_f": spec.W_f,
        "R": spec.R, "C": spec.C, "kind": spec.kind,
        "target_departures": spec.target_departures, "base_seed": spec.base_seed,
        "detail_points": tuple(spec.detail_points), "jobs": 1,
    }
    tasks = []
    for i, n_f in enumerate(spec.n_f_values):
        want_detail = any(math.isclose(n_f, d) for d in spec.detail_points)
        for j in range(spec.runs):
            tasks.append((i, j, n_f, spec_dict, want_detail))

    failures: list = []
    payloads: dict = {}
    if spec.jobs > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            results = list(pool.map(_execute_run_safe, tasks, chunksize=1))
    else:
        results = [_execute_run_safe(task) for task in tasks]
    for task, (status, value) in zip(tasks, results):
        if status == "ok":
            payloads[(task[0], task[1])] = value
        else:
            failures.append(value)

    rows = []
    detail: dict = {}
    for i, n_f in enumerate(spec.n_f_values):
        got = [payloads[(i, j)] for j in range(spec.runs) if (i, j) in payloads]
        if not got:
            continue
        sc = scenario_from_dimensionless(n_f, spec.W_f, spec.R, spec.C, spec.kind)
        fm = fluid_metrics(sc.params())
        lat = np.concatenate([g.latencies for g in got])
        w_sim = float(lat.mean())
        se = float(lat.std(ddof=1) / math.sqrt(lat.size)) if lat.size > 1 else math.nan
        rows.append(ResultRow(
            N_f=n_f,
            rho=fm.rho,
            lam=sc.lam,
            F=sc.F,
            C=spec.C,
            R=spec.R,
            W_f=spec.W_f,
            W_sim=w_sim,
            M_sim=w_sim / spec.W_f,
            stderr=se / spec.W_f,
            M_heuristic=heuristic_m(spec.kind, n_f),
            M_hardcore=1.0 / n_f,
            n_latency_samples=int(lat.size),
            seeds_used=";".join(str(g.seed) for g in got),
        ))
        if any(math.isclose(n_f, d) for d in spec.detail_points):
            nn_parts = [g.nn_values for g in got if g.nn_values is not None]
            detail[n_f] = {
                "latency": lat,
                "nn": np.concatenate(nn_parts) if nn_parts else np.empty(0),
                "density": float(np.nanmean([g.measured_density for g in got])),
            }

    result = SweepResult(rows=rows, detail=detail, failures=failures)
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        for n_f, data in detail.items():
            tag = _nf_tag(n_f)
            sc = scenario_from_dimensionless(n_f, spec.W_f, spec.R, spec.C, spec.kind)
            p = sc.params()
            w_h = hardcore_metrics(p).W_h
            write_latency_cdf(data["latency"], spec.W_f, w_h, out_dir / f"latency_cdf_nf_{tag}.csv")
            write_nn_cdf(data["nn"], data["density"], spec.R, out_dir / f"nn_cdf_nf_{tag}.csv")
    return result


def _nf_tag(n_f: float) -> str:
    if n_f >= 1 and float(n_f).is_integer():
        return str(int(n_f))
    inv = 1.0 / n_f
    if inv.is_integer():
        return f"1over{int(inv)}"
    return f"{n_f:g}".replace(".", "p")


# -- file emission -----------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def emit_csv(rows, path) -> None:
    """Sweep table with the exact documented header; floats carry 17
    significant digits so a read-back is bit-exact."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULT_COLUMNS)
        for row in rows:
            mapping = row.as_mapping()
            writer.writerow(_fmt(mapping[c]) for c in RESULT_COLUMNS)


def emit_json(rows, path) -> None:
    path = Path(path)
    with path.open("w") as fh:
        json.dump([row.as_mapping() for row in rows], fh, indent=2)
        fh.write("\n")


def read_csv_rows(path) -> list:
    """Read a sweep table back into ResultRow objects (round-trip exact)."""
    out = []
    with Path(path).open() as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != RESULT_COLUMNS:
            raise ConfigError(f"unexpected sweep columns {reader.fieldnames}")
        for rec in reader:
            out.append(ResultRow(
                N_f=float(rec["N_f"]), rho=float(rec["rho"]),
                lam=float(rec["lambda"]), F=float(rec["F"]), C=float(rec["C"]),
                R=float(rec["R"]), W_f=float(rec["W_f"]), W_sim=float(rec["W_sim"]),
                M_sim=float(rec["M_sim"]), stderr=float(rec["stderr"]),
                M_heuristic=float(rec["M_heuristic"]),
                M_hardcore=float(rec["M_hardcore"]),
                n_latency_samples=int(rec["n_latency_samples"]),
                seeds_used=rec["seeds_used"],
            ))
    return out


CDF_COLUMNS = ("value", "ecdf", "model_fluid", "model_hardcore")
_CDF_MAX_ROWS = 2000


def _downsample(sorted_values: np.ndarray) -> np.ndarray:
    if sorted_values.size <= _CDF_MAX_ROWS:
        return np.arange(sorted_values.size)
    idx = np.linspace(0, sorted_values.size - 1, _CDF_MAX_ROWS)
    return np.unique(idx.astype(int))


def write_latency_cdf(latencies: np.ndarray, w_f: float, w_h: float, path) -> None:
    """Empirical latency CDF with the fluid (exponential) and hard-core
    (half atom + exponential of mean 2*W_h) overlays."""
    values = np.sort(np.asarray(latencies, dtype=float))
    if values.size == 0:
        raise ConfigError("no latency samples to write")
    ecdf = np.arange(1, values.size + 1) / values.size
    keep = _downsample(values)
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CDF_COLUMNS)
        for i in keep:
            t = values[i]
            fluid = 1.0 - math.exp(-t / w_f)
            hard = 1.0 - 0.5 * math.exp(-t / (2.0 * w_h))
            writer.writerow(map(_fmt, (t, ecdf[i], fluid, hard)))


def write_nn_cdf(nn_values: np.ndarray, density: float, R: float, path) -> None:
    """Nearest-neighbor distance CDF truncated at the range, with the Poisson
    reference at the measured density and the exclusion-ball reference."""
    pooled = np.asarray(nn_values, dtype=float)
    if pooled.size == 0:
        raise ConfigError("no nearest-neighbor samples to write")
    inside = np.sort(pooled[pooled <= R])
    ecdf = np.arange(1, inside.size + 1) / pooled.size
    keep = _downsample(inside)
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CDF_COLUMNS)
        for i in keep:
            d = inside[i]
            fluid = -math.expm1(-density * math.pi * d * d)
            hard = 0.0 if d < R else -math.expm1(-density * math.pi * (d * d - R * R))
            writer.writerow(map(_fmt, (d, ecdf[i], fluid, hard)))


def write_density_trace(trace: np.ndarray, path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("time", "leechers", "seeders"))
        for row in trace:
            writer.writerow(map(_fmt, row))


# -- config files -------------------------------------------------------------

_RATE_FIELDS = {
    rates.TCP: ("C", "R"),
    rates.UDP: ("C", "R"),
    rates.AFFINE_RTT: ("C", "q", "R"),
    rates.OVERHEAD: ("C", "c", "R"),
    rates.PER_FLOW_CAP: ("C", "U", "R"),
    rates.SNR_RANGE: ("C", "alpha", "R"),
    rates.SNR_INFINITE: ("C", "alpha"),
}


def parse_rate_model(section: dict) -> RateModel:
    if "kind" not in section:
        raise ConfigError("rate section needs a 'kind'")
    kind = str(section["kind"]).lower()
    if kind not in _RATE_FIELDS:
        raise ConfigError(f"unknown rate kind {kind!r}; choose from {sorted(_RATE_FIELDS)}")
    required = _RATE_FIELDS[kind]
    missing = [f for f in required if f not in section]
    if missing:
        raise ConfigError(f"rate kind {kind!r} needs fields {missing}")
    kwargs = {f: float(section[f]) for f in required}
    if kind == rates.SNR_INFINITE:
        kwargs["R"] = math.inf
    try:
        return RateModel(kind, **kwargs)
    except RateModelError as exc:
        raise ConfigError(str(exc)) from exc


@dataclass
class LoadedConfig:
    params: SystemParams
    sim: Optional[SimConfig]


def load_config(path, need_sim: bool = False) -> LoadedConfig:
    """Read the self-describing JSON document with sections
    rate / arrivals / file / sim / extensions."""
    try:
        with Path(path).open() as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be an object")
    for section in ("rate", "arrivals", "file"):
        if section not in doc:
            raise ConfigError(f"{path}: missing section {section!r}")
    model = parse_rate_model(doc["rate"])
    arrivals = doc["arrivals"]
    if "lambda" not in arrivals:
        raise ConfigError("arrivals section needs 'lambda'")
    if "F" not in doc["file"]:
        raise ConfigError("file section needs 'F'")
    try:
        params = SystemParams(lam=float(arrivals["lambda"]), F=float(doc["file"]["F"]), rate=model)
    except AnalyticError as exc:
        raise ConfigError(str(exc)) from exc

    sim_cfg = None
    if need_sim:
        sim = doc.get("sim")
        if sim is None:
            raise ConfigError(f"{path}: missing 'sim' section required for simulation")
        ext = doc.get("extensions", {})
        try:
            sim_cfg = SimConfig(
                params=params,
                torus=Torus(float(sim.get("torus_side", 1.0))),
                tau=float(sim.get("tau", 1.0)),
                warmup=float(sim["warmup"]),
                measure=float(sim["measure"]),
                seed=int(sim.get("seed", 0)),
                service_mode=str(sim.get("service_mode", "accumulate")),
                neighbor_rule=str(sim.get("neighbor_rule", "fixed_range")),
                L=int(sim.get("L", 0)),
                snapshot_every=float(sim.get("snapshot_every", 0.0)),
                T_S=float(ext.get("T_S", 0.0)),
                U_C=float(ext.get("U_C", 0.0)),
                a=float(ext.get("a", 0.0)),
            )
        except (KeyError, SimulationError, ValueError) as exc:
            raise ConfigError(f"{path}: invalid sim section ({exc})") from exc
    return LoadedConfig(params=params, sim=sim_cfg)


def summarize_run(stats: SimStats, cfg: SimConfig) -> dict:
    """The run_summary.json payload."""
    p = cfg.params
    fm = fluid_metrics(p)
    est = estimate_M(stats, p)
    little = stats.avg_leecher_population / (p.lam * cfg.torus.area * est.mean_latency)
    summary = {
        "n_latency_samples": est.n_samples,
        "mean_latency": est.mean_latency,
        "M_sim": est.m_sim,
        "stderr": est.stderr,
        "W_f": fm.W_f,
        "N_f": fm.N_f,
        "gamma": fm.gamma,
        "little_ratio": little,
        "counts": {
            "arrivals": stats.n_arrivals,
            "exits": stats.n_exits,
            "abandons": stats.n_abandons,
            "censored": stats.censored,
        },
        "avg_population": stats.avg_population,
        "avg_leecher_population": stats.avg_leecher_population,
        "total_time": stats.total_time,
        "low_sample_warning": stats.low_sample_warning,
    }
    if stats.snapshots:
        palm = float(np.mean([s.palm_mean for s in stats.snapshots]))
        stationary = float(np.mean([s.stationary_mean for s in stats.snapshots]))
        summary["repulsion"] = {
            "palm_mean": palm,
            "stationary_mean": stationary,
            "ratio": stationary / palm if palm else math.nan,
        }
        summary["flux"] = {
            "mean_estimate": float(np.mean([s.flux_estimate for s in stats.snapshots])),
        }
    return summary
