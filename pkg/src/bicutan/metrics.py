"""Per-vehicle and per-replication metrics: mean total delay and mean speed.

Delay is travel time in excess of the route's free-flow time, clamped at
zero; speed is the journey speed (route distance over travel time) in
kph.  Replication summaries average over completed trips only; vehicles
still in the network at the horizon are reported separately, and trips
that started during the warm-up are excluded.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence

MS_TO_KPH = 3.6


class MetricsError(ValueError):
    """Replication has no usable trips."""


@dataclass(frozen=True)
class TripRecord:
    agent_id: int
    vtype: str
    origin: str
    destination: str
    entry_time_s: float
    exit_time_s: Optional[float]  # None while still in the network
    distance_m: float
    free_flow_s: float

    @property
    def completed(self) -> bool:
        return self.exit_time_s is not None

    @property
    def travel_time_s(self) -> float:
        if self.exit_time_s is None:
            raise MetricsError(f"trip {self.agent_id} has not completed")
        return self.exit_time_s - self.entry_time_s


@dataclass(frozen=True)
class ReplicationResult:
    scheme_id: str
    seed: int
    volume_scale: float
    mean_delay_s: float
    mean_speed_kph: float
    completed_trips: int
    unfinished: int


def vehicle_delay(trip: TripRecord, free_flow_s: Optional[float] = None) -> float:
    """Travel time minus free-flow time, clamped at zero."""
    ff = trip.free_flow_s if free_flow_s is None else free_flow_s
    if ff <= 0:
        raise MetricsError("free-flow time must be > 0")
    return max(0.0, trip.travel_time_s - ff)


def vehicle_speed(trip: TripRecord) -> float:
    """Journey speed over the route, in kph."""
    return trip.distance_m / trip.travel_time_s * MS_TO_KPH


def replication_summary(
    trips: Sequence[TripRecord],
    scheme_id: str = "",
    seed: int = 0,
    volume_scale: float = 0.0,
    warmup_s: float = 0.0,
) -> ReplicationResult:
    """Aggregate a replication's trips into mean delay and mean speed.

    Trips entering before ``warmup_s`` are dropped from the statistics;
    an otherwise-empty replication raises :class:`MetricsError`.
    """
    considered = [t for t in trips if t.entry_time_s >= warmup_s]
    completed = [t for t in considered if t.completed]
    if not completed:
        raise MetricsError("empty replication: no completed trips after warm-up")
    delays = [vehicle_delay(t) for t in completed]
    speeds = [vehicle_speed(t) for t in completed]
    return ReplicationResult(
        scheme_id=scheme_id,
        seed=seed,
        volume_scale=volume_scale,
        mean_delay_s=sum(delays) / len(delays),
        mean_speed_kph=sum(speeds) / len(speeds),
        completed_trips=len(completed),
        unfinished=len(considered) - len(completed),
    )


TRIP_CSV_HEADER = [
    "agent_id",
    "vtype",
    "origin",
    "destination",
    "entry_s",
    "exit_s",
    "delay_s",
    "speed_kph",
]


def write_trip_csv(trips: Iterable[TripRecord], path: str) -> None:
    """Per-trip export; unfinished trips carry empty exit/delay/speed."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRIP_CSV_HEADER)
        for t in trips:
            if t.completed:
                writer.writerow(
                    [
                        t.agent_id,
                        t.vtype,
                        t.origin,
                        t.destination,
                        f"{t.entry_time_s:.3f}",
                        f"{t.exit_time_s:.3f}",
                        f"{vehicle_delay(t):.3f}",
                        f"{vehicle_speed(t):.3f}",
                    ]
                )
            else:
                writer.writerow(
                    [t.agent_id, t.vtype, t.origin, t.destination, f"{t.entry_time_s:.3f}", "", "", ""]
                )
