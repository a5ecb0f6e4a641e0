"""Experiment orchestration: scenario configs, seeded replications, the
observed-vs-simulated validation, scheme comparison with post-hoc letter
groups, volume sweeps with linear fits, and report export.

A scenario config is one JSON document; replicate ``r`` always runs with
seed ``base_seed + r``, so any replication can be replayed in isolation
and reruns are byte-identical.  Replications may execute on a thread
pool (the compiled kernel releases the GIL); results are merged by
replicate index so the output never depends on scheduling.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from . import demand as demand_mod
from . import kernel, net, schemes, stats
from .metrics import MetricsError, ReplicationResult, TripRecord, replication_summary

ALPHA = 0.05
RESULTS_HEADER = [
    "scheme",
    "vplus",
    "replicate",
    "seed",
    "delta_s",
    "sigma_kph",
    "trips",
    "unfinished",
]
OBSERVED_HEADER = ["replicate", "delta_s", "sigma_kph"]


class ConfigError(ValueError):
    """Malformed or inconsistent scenario configuration."""


class SimulationAborted(RuntimeError):
    """A replication aborted (collision); carries replay information."""

    def __init__(self, scheme_id: str, replicate: int, seed: int, cause: Exception):
        self.scheme_id = scheme_id
        self.replicate = replicate
        self.seed = seed
        self.cause = cause
        super().__init__(
            f"replication {replicate} of {scheme_id} (seed {seed}) aborted: {cause}"
        )


# ---------------------------------------------------------------------------
# scenario configuration


@dataclass(frozen=True)
class ScenarioConfig:
    scheme: str = "t0"
    demand: Optional[dict] = None  # {"rates", "od", "types"}
    observations: Optional[str] = None  # CSV path, relative to the config file
    observation_horizon_s: float = 3600.0
    volume_increase: float = 0.0  # V+ as a fraction (1.0 = +100%)
    duration_s: float = 3600.0
    warmup_s: float = 300.0
    dt_s: float = 0.1
    replications: int = 10
    base_seed: int = 20131213
    geometry: Optional[dict] = None
    vehicle_types: Optional[dict] = None  # per-type field overrides
    engine: Optional[dict] = None
    lane_window_s: Optional[tuple] = None  # (start, end); None = whole horizon

    def __post_init__(self):
        if self.duration_s <= 0:
            raise ConfigError("duration must be > 0")
        if self.warmup_s < 0:
            raise ConfigError("warm-up must be >= 0")
        if self.duration_s <= self.warmup_s:
            raise ConfigError("duration must exceed the warm-up")
        if self.dt_s <= 0:
            raise ConfigError("dt must be > 0")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if self.volume_increase < 0:
            raise ConfigError("volume increase must be >= 0")
        if self.demand is None and self.observations is None:
            raise ConfigError("config needs either an embedded demand or an observations CSV")
        if self.scheme not in schemes.SCHEME_IDS:
            raise ConfigError(f"unknown scheme {self.scheme!r}")

    @property
    def horizon_s(self) -> float:
        return self.warmup_s + self.duration_s

    def replaced(self, **kw) -> "ScenarioConfig":
        d = asdict(self)
        d.update(kw)
        if d.get("lane_window_s") is not None:
            d["lane_window_s"] = tuple(d["lane_window_s"])
        return ScenarioConfig(**d)

    def to_json_dict(self) -> dict:
        d = asdict(self)
        if d["lane_window_s"] is not None:
            d["lane_window_s"] = list(d["lane_window_s"])
        return d

    @classmethod
    def from_json_dict(cls, d: Mapping) -> "ScenarioConfig":
        d = dict(d)
        unknown = set(d) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if d.get("lane_window_s") is not None:
            d["lane_window_s"] = tuple(float(x) for x in d["lane_window_s"])
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc))

    def render(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def parse(cls, text: str) -> "ScenarioConfig":
        try:
            return cls.from_json_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}")

    @classmethod
    def from_file(cls, path: str) -> "ScenarioConfig":
        with open(path, "r", encoding="utf-8") as fh:
            cfg = cls.parse(fh.read())
        if cfg.observations is not None and not os.path.isabs(cfg.observations):
            base = os.path.dirname(os.path.abspath(path))
            cfg = cfg.replaced(observations=os.path.join(base, cfg.observations))
        return cfg

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.render())

    def config_hash(self) -> str:
        payload = json.dumps(self.to_json_dict(), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()[:16]


# ---------------------------------------------------------------------------
# scenario assembly


def build_network(config: ScenarioConfig) -> net.RoadNetwork:
    geo = net.NetworkGeometryConfig.from_dict(config.geometry) if config.geometry else None
    return net.build_bicutan_network(geo)


def build_profile(config: ScenarioConfig) -> demand_mod.DemandProfile:
    if config.demand is not None:
        profile = demand_mod.DemandProfile.from_dict(config.demand)
    else:
        records = demand_mod.ingest_observations(config.observations)
        profile = demand_mod.estimate_demand(records, config.observation_horizon_s)
    return profile.scaled(config.volume_increase)


def build_vehicle_types(config: ScenarioConfig) -> Dict[str, kernel.VehicleTypeParams]:
    types = dict(kernel.DEFAULT_VEHICLE_TYPES)
    if config.vehicle_types:
        for name, over in config.vehicle_types.items():
            if name not in types:
                raise ConfigError(f"unknown vehicle type {name!r}")
            base = asdict(types[name])
            ghr = base.pop("ghr")
            over = dict(over)
            ghr.update(over.pop("ghr", {}))
            bad = set(over) - set(base)
            if bad:
                raise ConfigError(f"unknown fields for {name!r}: {sorted(bad)}")
            base.update(over)
            types[name] = kernel.VehicleTypeParams(ghr=kernel.GhrParams(**ghr), **base)
    return types


def build_engine_params(config: ScenarioConfig) -> kernel.EngineParams:
    fields = {"dt_s": config.dt_s}
    if config.engine:
        bad = set(config.engine) - set(kernel.EngineParams.__dataclass_fields__)
        if bad:
            raise ConfigError(f"unknown engine parameters: {sorted(bad)}")
        fields.update(config.engine)
        fields["dt_s"] = config.dt_s
    return kernel.EngineParams(**fields)


def build_scheme(config: ScenarioConfig, scheme_id: Optional[str] = None) -> schemes.TrafficScheme:
    scheme = schemes.get_scheme(scheme_id or config.scheme)
    if config.lane_window_s is not None:
        scheme = scheme.with_window(tuple(config.lane_window_s))
    return scheme


# ---------------------------------------------------------------------------
# replications


@dataclass
class ReplicationOutput:
    result: ReplicationResult
    trips: List[TripRecord]
    audits: dict


def run_replication(
    config: ScenarioConfig, replicate: int, scheme_id: Optional[str] = None
) -> ReplicationOutput:
    """Run one seeded replication; seed = base_seed + replicate index."""
    scheme = build_scheme(config, scheme_id)
    seed = config.base_seed + replicate
    network = build_network(config)
    profile = build_profile(config)
    arrivals = demand_mod.generate_arrivals(profile, seed=seed, duration_s=config.horizon_s)
    world = kernel.WorldState(
        network,
        scheme,
        arrivals,
        vehicle_types=build_vehicle_types(config),
        params=build_engine_params(config),
    )
    try:
        world.run(config.horizon_s)
    except kernel.CollisionError as exc:
        raise SimulationAborted(scheme.scheme_id, replicate, seed, exc)
    trips = world.trips()
    result = replication_summary(
        trips,
        scheme_id=scheme.scheme_id,
        seed=seed,
        volume_scale=config.volume_increase,
        warmup_s=config.warmup_s,
    )
    return ReplicationOutput(result=result, trips=trips, audits=world.audits)


@dataclass
class RunSet:
    scheme_id: str
    results: List[ReplicationResult]
    warnings: List[str] = field(default_factory=list)

    @property
    def deltas(self) -> List[float]:
        return [r.mean_delay_s for r in self.results]

    @property
    def sigmas(self) -> List[float]:
        return [r.mean_speed_kph for r in self.results]


def run_replications(
    config: ScenarioConfig,
    scheme_id: Optional[str] = None,
    jobs: int = 1,
    keep_trips: bool = False,
) -> RunSet:
    """All replications of one scenario, merged by replicate index."""
    n = config.replications
    sid = scheme_id or config.scheme

    def one(r):
        return run_replication(config, r, scheme_id=sid)

    if jobs > 1 and n > 1:
        one(0)  # warm the compiled kernel before fanning out
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outputs = list(pool.map(one, range(n)))
    else:
        outputs = [one(r) for r in range(n)]

    warnings = []
    if n < 2:
        warnings.append("insufficient replications for ANOVA (need >= 2)")
    runset = RunSet(scheme_id=sid, results=[o.result for o in outputs], warnings=warnings)
    if keep_trips:
        runset.trips = [o.trips for o in outputs]
    return runset


# ---------------------------------------------------------------------------
# validation against observed data


@dataclass
class HypothesisVerdict:
    name: str
    description: str
    p_value: float
    alpha: float
    accepted: bool  # True = null retained

    def line(self) -> str:
        word = "accepted" if self.accepted else "rejected"
        return (
            f"{self.name}: {self.description} -> null {word} "
            f"(p = {stats.format_p(self.p_value)}, alpha = {self.alpha:.2f})"
        )


@dataclass
class ValidationReport:
    anova_delta: stats.AnovaTable
    anova_sigma: stats.AnovaTable
    verdict_delta: HypothesisVerdict
    verdict_sigma: HypothesisVerdict

    @property
    def model_validated(self) -> bool:
        return self.verdict_delta.accepted and self.verdict_sigma.accepted


def read_observed_csv(path: str) -> List[Tuple[float, float]]:
    """Observed per-replication (delta_s, sigma_kph) samples."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != OBSERVED_HEADER:
            raise ConfigError(
                f"observed CSV must have header {','.join(OBSERVED_HEADER)}"
            )
        rows = []
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            rows.append((float(row[1]), float(row[2])))
    return rows


def validate_against_observed(
    observed: Sequence[Tuple[float, float]], simulated: Sequence[ReplicationResult]
) -> ValidationReport:
    """Observed condition vs simulated baseline as an RCBD (replications
    as blocks, two treatments); the model is accepted when neither metric
    differs significantly at the 5% level."""
    if len(observed) != len(simulated):
        raise ConfigError(
            f"observed ({len(observed)}) and simulated ({len(simulated)}) sample "
            "counts must match (paired as blocks)"
        )
    if len(observed) < 2:
        raise ConfigError("validation needs at least 2 paired samples")
    obs_d = [o[0] for o in observed]
    obs_s = [o[1] for o in observed]
    sim_d = [r.mean_delay_s for r in simulated]
    sim_s = [r.mean_speed_kph for r in simulated]
    table_d = stats.rcbd_anova(np.column_stack([obs_d, sim_d]))
    table_s = stats.rcbd_anova(np.column_stack([obs_s, sim_s]))
    p_d = table_d.row("Treatment").p
    p_s = table_s.row("Treatment").p
    return ValidationReport(
        anova_delta=table_d,
        anova_sigma=table_s,
        verdict_delta=HypothesisVerdict(
            name="validation_delay",
            description="observed and simulated mean total delay are equal",
            p_value=p_d,
            alpha=ALPHA,
            accepted=p_d > ALPHA,
        ),
        verdict_sigma=HypothesisVerdict(
            name="validation_speed",
            description="observed and simulated mean speed are equal",
            p_value=p_s,
            alpha=ALPHA,
            accepted=p_s > ALPHA,
        ),
    )


# ---------------------------------------------------------------------------
# scheme comparison


@dataclass
class SchemeComparison:
    anova_delta: stats.AnovaTable
    anova_sigma: stats.AnovaTable
    dmrt_delta: stats.DmrtGrouping
    dmrt_sigma: stats.DmrtGrouping
    best_scheme: str
    decision_rule: str
    verdict_delta: HypothesisVerdict
    verdict_sigma: HypothesisVerdict


def compare_schemes(runsets: Mapping[str, RunSet]) -> SchemeComparison:
    """Joint comparison: one-way ANOVAs over both metrics, DMRT letter
    groups, and the best-scheme selection.

    Best = member of the lowest-delay letter group that also belongs to
    the highest-speed letter group; ties (and an empty intersection) fall
    back to the lowest mean delay, and the applied rule is recorded.
    """
    ids = list(runsets)
    if len(ids) < 2:
        raise ConfigError("scheme comparison needs at least 2 schemes")
    n = None
    for sid, rs in runsets.items():
        if n is None:
            n = len(rs.results)
        elif len(rs.results) != n:
            raise ConfigError("all schemes must have the same replication count")
    if n < 2:
        raise ConfigError("scheme comparison needs at least 2 replications per scheme")

    groups_d = [(sid, runsets[sid].deltas) for sid in ids]
    groups_s = [(sid, runsets[sid].sigmas) for sid in ids]
    anova_d = stats.one_way_anova(groups_d)
    anova_s = stats.one_way_anova(groups_s)

    means_d = [(sid, float(np.mean(runsets[sid].deltas))) for sid in ids]
    means_s = [(sid, float(np.mean(runsets[sid].sigmas))) for sid in ids]
    dmrt_d = stats.dmrt(
        means_d, n=n, ms_error=anova_d.error.ms, df_error=anova_d.error.df, alpha=ALPHA
    )
    dmrt_s = stats.dmrt(
        means_s, n=n, ms_error=anova_s.error.ms, df_error=anova_s.error.df, alpha=ALPHA
    )

    best_delay_group = set(dmrt_d.bottom_group())  # lowest delay
    best_speed_group = set(dmrt_s.top_group())  # highest speed
    joint = best_delay_group & best_speed_group
    mean_d = dict(means_d)
    if joint:
        best = min(joint, key=lambda sid: (mean_d[sid], sid))
        if len(joint) == 1:
            rule = "unique member of both the lowest-delay and highest-speed groups"
        else:
            rule = (
                "tie inside the joint lowest-delay/highest-speed group "
                f"({', '.join(sorted(joint))}); broken by lower mean delay"
            )
    else:
        best = min(ids, key=lambda sid: (mean_d[sid], sid))
        rule = (
            "lowest-delay and highest-speed groups are disjoint; "
            "fell back to the lowest mean delay"
        )
    p_d = anova_d.row("T").p
    p_s = anova_s.row("T").p
    return SchemeComparison(
        anova_delta=anova_d,
        anova_sigma=anova_s,
        dmrt_delta=dmrt_d,
        dmrt_sigma=dmrt_s,
        best_scheme=best,
        decision_rule=rule,
        verdict_delta=HypothesisVerdict(
            name="scheme_effect_delay",
            description="all schemes share the same mean total delay",
            p_value=p_d,
            alpha=ALPHA,
            accepted=p_d > ALPHA,
        ),
        verdict_sigma=HypothesisVerdict(
            name="scheme_effect_speed",
            description="all schemes share the same mean speed",
            p_value=p_s,
            alpha=ALPHA,
            accepted=p_s > ALPHA,
        ),
    )


# ---------------------------------------------------------------------------
# volume sweeps


@dataclass
class SweepFits:
    scheme_id: str
    delta_fit: stats.RegressionFit
    sigma_fit: stats.RegressionFit

    def equations(self) -> List[str]:
        return [
            self.delta_fit.equation(f"delay({self.scheme_id})"),
            self.sigma_fit.equation(f"speed({self.scheme_id})"),
        ]


def fit_sweep(points_delta, points_sigma, scheme_id: str) -> SweepFits:
    """Linear fits of per-replication delay/speed against V+ in percent."""
    return SweepFits(
        scheme_id=scheme_id,
        delta_fit=stats.linear_regression(points_delta),
        sigma_fit=stats.linear_regression(points_sigma),
    )


def volume_sweep(
    config: ScenarioConfig,
    scheme_ids: Sequence[str],
    volumes_pct: Sequence[float] = (0.0, 10.0, 50.0, 100.0),
    jobs: int = 1,
) -> "SweepReport":
    """Replicated runs over volume levels with per-scheme linear fits."""
    if len(volumes_pct) < 2:
        raise ConfigError("volume sweep needs at least 2 volume levels")
    levels = [float(v) for v in volumes_pct]
    runsets: Dict[str, Dict[float, RunSet]] = {}
    fits: Dict[str, SweepFits] = {}
    for sid in scheme_ids:
        per_level: Dict[float, RunSet] = {}
        pts_d = []
        pts_s = []
        for pct in levels:
            cfg = config.replaced(scheme=sid, volume_increase=pct / 100.0)
            rs = run_replications(cfg, jobs=jobs)
            per_level[pct] = rs
            pts_d.extend((pct, d) for d in rs.deltas)
            pts_s.extend((pct, s) for s in rs.sigmas)
        runsets[sid] = per_level
        fits[sid] = fit_sweep(pts_d, pts_s, sid)
    return SweepReport(volumes_pct=levels, runsets=runsets, fits=fits)


@dataclass
class SweepReport:
    volumes_pct: List[float]
    runsets: Dict[str, Dict[float, RunSet]]
    fits: Dict[str, SweepFits]


# ---------------------------------------------------------------------------
# reports and export


@dataclass
class ExperimentReport:
    config: ScenarioConfig
    runsets: Dict[str, RunSet] = field(default_factory=dict)
    comparison: Optional[SchemeComparison] = None
    validation: Optional[ValidationReport] = None
    sweep: Optional[SweepReport] = None

    def all_results(self) -> List[ReplicationResult]:
        rows: List[ReplicationResult] = []
        for sid in self.runsets:
            rows.extend(self.runsets[sid].results)
        if self.sweep:
            for sid in self.sweep.runsets:
                for pct in self.sweep.volumes_pct:
                    rows.extend(self.sweep.runsets[sid][pct].results)
        return rows


def results_csv_text(results: Sequence[ReplicationResult], base_seed: int) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RESULTS_HEADER)
    for r in results:
        writer.writerow(
            [
                r.scheme_id,
                f"{r.volume_scale:.4f}",
                r.seed - base_seed,
                r.seed,
                f"{r.mean_delay_s:.6f}",
                f"{r.mean_speed_kph:.6f}",
                r.completed_trips,
                r.unfinished,
            ]
        )
    return buf.getvalue()


def parse_results_csv(text: str) -> List[ReplicationResult]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header != RESULTS_HEADER:
        raise ConfigError(f"unexpected results header {header!r}")
    out = []
    for row in reader:
        if not row:
            continue
        out.append(
            ReplicationResult(
                scheme_id=row[0],
                volume_scale=float(row[1]),
                seed=int(row[3]),
                mean_delay_s=float(row[4]),
                mean_speed_kph=float(row[5]),
                completed_trips=int(row[6]),
                unfinished=int(row[7]),
            )
        )
    return out


def render_report_text(report: ExperimentReport) -> str:
    """Human-readable report: ANOVA tables, DMRT groups, fits, verdicts."""
    cfg = report.config
    lines = [
        "Bicutan Roundabout scheme experiment",
        f"config hash: {cfg.config_hash()}",
        f"replications per scenario: {cfg.replications} "
        f"(seeds {cfg.base_seed}..{cfg.base_seed + cfg.replications - 1})",
        f"horizon: {cfg.duration_s:.0f} s after {cfg.warmup_s:.0f} s warm-up, dt = {cfg.dt_s} s",
        "",
    ]
    for sid, rs in report.runsets.items():
        d = np.mean(rs.deltas)
        s = np.mean(rs.sigmas)
        lines.append(
            f"scheme {sid}: mean delay {d:.2f} s, mean speed {s:.2f} kph "
            f"over n = {len(rs.results)}"
        )
        for w in rs.warnings:
            lines.append(f"  warning: {w}")
    if report.validation is not None:
        v = report.validation
        lines += [
            "",
            stats.render_anova(v.anova_delta, "ANOVA: observed vs simulated mean total delay"),
            "",
            stats.render_anova(v.anova_sigma, "ANOVA: observed vs simulated mean speed"),
            "",
            v.verdict_delta.line(),
            v.verdict_sigma.line(),
            (
                "model reproduces the observed condition"
                if v.model_validated
                else "model does NOT reproduce the observed condition"
            ),
        ]
    if report.comparison is not None:
        c = report.comparison
        lines += [
            "",
            stats.render_anova(c.anova_delta, "ANOVA: mean total delay across schemes"),
            "",
            stats.render_anova(c.anova_sigma, "ANOVA: mean speed across schemes"),
            "",
            stats.render_dmrt(c.dmrt_delta, "Mean total delay (s)", "s"),
            "",
            stats.render_dmrt(c.dmrt_sigma, "Mean speed (kph)", "kph"),
            "",
            c.verdict_delta.line(),
            c.verdict_sigma.line(),
            f"best scheme: {c.best_scheme} ({c.decision_rule})",
        ]
    if report.sweep is not None:
        lines += ["", "volume sweep linear fits (x = V+ in percent):"]
        for sid in report.sweep.fits:
            for eq in report.sweep.fits[sid].equations():
                lines.append(f"  {eq}")
    lines.append("")
    return "\n".join(lines)


def _plot_rows_by_scheme(comparison: SchemeComparison, which: str) -> List[tuple]:
    grouping = comparison.dmrt_delta if which == "delta" else comparison.dmrt_sigma
    stderr = math.sqrt(grouping.ms_error / grouping.n_per_group)
    return [
        (label, f"{mean:.6f}", f"{stderr:.6f}", letters)
        for label, mean, letters in zip(grouping.labels, grouping.means, grouping.letters)
    ]


def export_report(report: ExperimentReport, out_dir: str) -> List[str]:
    """Write the report bundle; returns the created file paths.

    Everything except provenance.json is byte-deterministic for a given
    config; timestamps live only in the provenance file.
    """
    os.makedirs(out_dir, exist_ok=True)
    written = []

    def emit(name: str, text: str) -> None:
        path = os.path.join(out_dir, name)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        written.append(path)

    emit("report.txt", render_report_text(report))
    rows = sorted(
        report.all_results(), key=lambda r: (r.scheme_id, r.volume_scale, r.seed)
    )
    emit("results.csv", results_csv_text(rows, report.config.base_seed))

    if report.comparison is not None:
        for which in ("delta", "sigma"):
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["scheme", f"mean_{which}", "stderr", "letters"])
            for row in _plot_rows_by_scheme(report.comparison, which):
                w.writerow(row)
            emit(f"plot_{which}_by_scheme.csv", buf.getvalue())

    if report.sweep is not None:
        for which in ("delta", "sigma"):
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["scheme", "vplus_pct", f"mean_{which}", "stderr"])
            for sid in report.sweep.runsets:
                for pct in report.sweep.volumes_pct:
                    rs = report.sweep.runsets[sid][pct]
                    vals = rs.deltas if which == "delta" else rs.sigmas
                    mean = float(np.mean(vals))
                    se = float(np.std(vals, ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0
                    w.writerow([sid, f"{pct:.1f}", f"{mean:.6f}", f"{se:.6f}"])
            emit(f"plot_{which}_vs_volume.csv", buf.getvalue())

    provenance = {
        "config": report.config.to_json_dict(),
        "config_hash": report.config.config_hash(),
        "seeds": [
            report.config.base_seed + r for r in range(report.config.replications)
        ],
        "generated_unix_time": time.time(),
        "package": "bicutan 0.1.0",
    }
    path = os.path.join(out_dir, "provenance.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(provenance, fh, indent=2)
        fh.write("\n")
    written.append(path)
    return written
