"""Demand: field-observation ingestion and seeded arrival generation.

Observations are plate-matched trips reduced to a CSV with header
``plate,vtype,entry,exit,entry_time_s,exit_time_s``.  From them we
estimate per-origin Poisson rates, origin->destination splits and the
vehicle-type mix.  Arrival streams are generated per origin from
independent seeded substreams so that replications are reproducible and
the type distribution is preserved under volume scaling.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from typing import Iterable, List, Mapping, Sequence

import numpy as np

from .net import APPROACHES

VEHICLE_TYPE_NAMES = (
    "jeepney",
    "bus",
    "truck",
    "taxi",
    "AUV",
    "motorcycle",
    "tricycle",
    "bicycle",
)

OBSERVATION_HEADER = ["plate", "vtype", "entry", "exit", "entry_time_s", "exit_time_s"]

_PROB_TOL = 1e-9


class ObservationError(ValueError):
    """Malformed or invariant-violating observation rows."""


class DemandError(ValueError):
    """Demand profile cannot be estimated or is inconsistent."""


@dataclass(frozen=True)
class ObservationRecord:
    plate: str
    vtype: str
    entry: str
    exit: str
    entry_time_s: float
    exit_time_s: float

    @property
    def travel_time_s(self) -> float:
        return self.exit_time_s - self.entry_time_s


@dataclass(frozen=True)
class DemandProfile:
    """Arrival rates, OD splits and type mix, plus a volume scale.

    ``volume_scale`` is the fractional increase over the observed volume
    (0.0 = observed, 1.0 = +100%); it multiplies every origin's rate.
    """

    rates: Mapping[str, float]  # veh/s per origin
    od_split: Mapping[str, Mapping[str, float]]
    type_probs: Mapping[str, float]
    volume_scale: float = 0.0

    def __post_init__(self):
        for a in APPROACHES:
            if a not in self.rates or self.rates[a] <= 0:
                raise DemandError(f"origin {a}: arrival rate must be > 0")
            split = self.od_split.get(a)
            if not split:
                raise DemandError(f"origin {a}: missing OD split")
            if abs(sum(split.values()) - 1.0) > _PROB_TOL:
                raise DemandError(f"origin {a}: OD split must sum to 1")
            for d in split:
                if d == a or d not in APPROACHES:
                    raise DemandError(f"origin {a}: invalid destination {d!r}")
        if abs(sum(self.type_probs.values()) - 1.0) > _PROB_TOL:
            raise DemandError("type probabilities must sum to 1")
        for name in self.type_probs:
            if name not in VEHICLE_TYPE_NAMES:
                raise DemandError(f"unknown vehicle type {name!r}")
        if self.volume_scale < 0:
            raise DemandError("volume_scale must be >= 0")

    def scaled(self, volume_scale: float) -> "DemandProfile":
        return replace(self, volume_scale=volume_scale)

    def effective_rate(self, origin: str) -> float:
        return self.rates[origin] * (1.0 + self.volume_scale)

    def to_dict(self) -> dict:
        return {
            "rates": dict(self.rates),
            "od": {o: dict(s) for o, s in self.od_split.items()},
            "types": dict(self.type_probs),
        }

    @classmethod
    def from_dict(cls, d: Mapping, volume_scale: float = 0.0) -> "DemandProfile":
        return cls(
            rates=dict(d["rates"]),
            od_split={o: dict(s) for o, s in d["od"].items()},
            type_probs=dict(d["types"]),
            volume_scale=volume_scale,
        )


@dataclass(frozen=True)
class Arrival:
    time_s: float
    origin: str
    destination: str
    vtype: str


@dataclass(frozen=True)
class ArrivalStream:
    """Time-ordered arrivals, also exposed as columnar numpy arrays."""

    times: np.ndarray
    origins: np.ndarray  # indices into APPROACHES
    destinations: np.ndarray
    vtypes: np.ndarray  # indices into VEHICLE_TYPE_NAMES

    def __len__(self) -> int:
        return len(self.times)

    def __iter__(self):
        for i in range(len(self.times)):
            yield Arrival(
                float(self.times[i]),
                APPROACHES[self.origins[i]],
                APPROACHES[self.destinations[i]],
                VEHICLE_TYPE_NAMES[self.vtypes[i]],
            )


def ingest_observations(source) -> List[ObservationRecord]:
    """Parse an observation CSV from a path, file object or text.

    All invariant-violating rows are rejected together in one
    :class:`ObservationError` that cites their row numbers (header = row
    0, first data row = row 1).
    """
    if isinstance(source, str) and "\n" not in source:
        with open(source, "r", encoding="utf-8", newline="") as fh:
            return ingest_observations(fh)
    if isinstance(source, str):
        source = io.StringIO(source)

    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise ObservationError("empty observation stream (missing header)")
    if [h.strip() for h in header] != OBSERVATION_HEADER:
        raise ObservationError(
            f"bad header {header!r}; expected {','.join(OBSERVATION_HEADER)}"
        )

    records: List[ObservationRecord] = []
    problems: List[str] = []
    for row_no, row in enumerate(reader, start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(OBSERVATION_HEADER):
            problems.append(f"row {row_no}: expected {len(OBSERVATION_HEADER)} fields")
            continue
        plate, vtype, entry, exit_, t_in, t_out = (c.strip() for c in row)
        errs = []
        if vtype not in VEHICLE_TYPE_NAMES:
            errs.append(f"unknown vehicle type {vtype!r}")
        if entry not in APPROACHES:
            errs.append(f"unknown entry point {entry!r}")
        if exit_ not in APPROACHES:
            errs.append(f"unknown exit point {exit_!r}")
        try:
            entry_time = float(t_in)
            exit_time = float(t_out)
        except ValueError:
            errs.append(f"malformed timestamp {t_in!r}/{t_out!r}")
            entry_time = exit_time = 0.0
        if not errs:
            if entry == exit_:
                errs.append("exit point equals entry point")
            elif exit_time <= entry_time:
                errs.append("exit time not after entry time")
        if errs:
            problems.append(f"row {row_no}: " + "; ".join(errs))
        else:
            records.append(
                ObservationRecord(plate, vtype, entry, exit_, entry_time, exit_time)
            )
    if problems:
        raise ObservationError("rejected observation rows: " + " | ".join(problems))
    return records


def estimate_demand(records: Sequence[ObservationRecord], horizon_s: float) -> DemandProfile:
    """Empirical rates, OD splits and type mix over an observation horizon."""
    if horizon_s <= 0:
        raise DemandError("horizon must be > 0")
    if not records:
        raise DemandError("no observation records")
    by_origin = {a: [r for r in records if r.entry == a] for a in APPROACHES}
    for a, rs in by_origin.items():
        if not rs:
            raise DemandError(f"origin {a}: no observations; profile must cover all origins")
    rates = {a: len(rs) / horizon_s for a, rs in by_origin.items()}
    od_split = {}
    for a, rs in by_origin.items():
        od_split[a] = {
            d: sum(1 for r in rs if r.exit == d) / len(rs)
            for d in APPROACHES
            if d != a and any(r.exit == d for r in rs)
        }
    type_probs = {}
    for name in VEHICLE_TYPE_NAMES:
        k = sum(1 for r in records if r.vtype == name)
        if k:
            type_probs[name] = k / len(records)
    return DemandProfile(rates=rates, od_split=od_split, type_probs=type_probs)


def _origin_rng(seed: int, origin_idx: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, origin_idx))))


def generate_arrivals(profile: DemandProfile, seed: int, duration_s: float) -> ArrivalStream:
    """Seeded Poisson arrival stream over ``[0, duration_s)``.

    Each origin draws from its own substream, so streams for one origin
    do not depend on the other origins' rates.  Destinations and types
    are i.i.d. from the profile; the same seed always yields the same
    stream.
    """
    if duration_s <= 0:
        raise DemandError("duration must be > 0")
    all_times = []
    all_origins = []
    all_dests = []
    all_types = []
    type_names = [n for n in VEHICLE_TYPE_NAMES if n in profile.type_probs]
    type_idx = np.array([VEHICLE_TYPE_NAMES.index(n) for n in type_names])
    type_p = np.array([profile.type_probs[n] for n in type_names])
    type_p = type_p / type_p.sum()

    for oi, origin in enumerate(APPROACHES):
        rng = _origin_rng(seed, oi)
        lam = profile.effective_rate(origin)
        # oversample the expected count, then extend in the rare shortfall
        n_guess = max(16, int(lam * duration_s * 1.5) + 8)
        gaps = rng.exponential(1.0 / lam, size=n_guess)
        times = np.cumsum(gaps)
        while times[-1] < duration_s:
            more = rng.exponential(1.0 / lam, size=n_guess)
            times = np.concatenate([times, times[-1] + np.cumsum(more)])
        times = times[times < duration_s]
        n = len(times)

        dest_names = [d for d in APPROACHES if d != origin and d in profile.od_split[origin]]
        dest_p = np.array([profile.od_split[origin][d] for d in dest_names])
        dest_p = dest_p / dest_p.sum()
        dest_choices = np.array([APPROACHES.index(d) for d in dest_names])
        dests = dest_choices[rng.choice(len(dest_names), size=n, p=dest_p)]
        vtypes = type_idx[rng.choice(len(type_names), size=n, p=type_p)]

        all_times.append(times)
        all_origins.append(np.full(n, oi, dtype=np.int64))
        all_dests.append(dests.astype(np.int64))
        all_types.append(vtypes.astype(np.int64))

    times = np.concatenate(all_times)
    origins = np.concatenate(all_origins)
    dests = np.concatenate(all_dests)
    vtypes = np.concatenate(all_types)
    order = np.lexsort((origins, times))  # stable: time, then origin
    return ArrivalStream(
        times=times[order],
        origins=origins[order],
        destinations=dests[order],
        vtypes=vtypes[order],
    )
