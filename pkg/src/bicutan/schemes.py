"""Traffic-scheme catalog for the roundabout.

Eight schemes: the current priority-roundabout baseline t0; alternating
one-way stops t1 (60 s cycle) and t2 (120 s cycle); the lane
re-designation t3 (1 lane A->B, 3 lanes B->A); the combinations t4 =
t1+t3 and t5 = t2+t3; and the signalized re-designation variants t3_s15
and t3_s45 with controlled stops of 15 s / 45 s.

Approach A carries the priority flow and is never stopped; signals
alternate between stopping B and stopping C with instantaneous
transitions.  Signal state is a pure function of (scheme, time).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

from . import net

SCHEME_IDS = ("t0", "t1", "t2", "t3", "t4", "t5", "t3_s15", "t3_s45")

GO = "Go"
STOP = "Stop"


class SchemeError(ValueError):
    """Unknown scheme id or malformed cycle."""


@dataclass(frozen=True)
class SignalCycle:
    """Fixed-time cycle: ordered phases of (stopped approaches, duration)."""

    phases: Tuple[Tuple[frozenset, float], ...]

    @property
    def length_s(self) -> float:
        return sum(dur for _, dur in self.phases)

    def stopped_at(self, sim_time: float) -> frozenset:
        pos = sim_time % self.length_s
        acc = 0.0
        for stopped, dur in self.phases:
            acc += dur
            if pos < acc:
                return stopped
        return self.phases[-1][0]


@dataclass(frozen=True)
class LaneRedesignation:
    link_id: str
    forward: int
    backward: int
    # active time window (start, end) in sim seconds; None = always active
    window: Optional[Tuple[float, float]] = None


@dataclass(frozen=True)
class TrafficScheme:
    scheme_id: str
    cycle: Optional[SignalCycle] = None
    lane_redesignation: Optional[LaneRedesignation] = None
    stop_duration_s: Optional[float] = None

    def __post_init__(self):
        if self.cycle is not None:
            total = self.cycle.length_s
            if total <= 0:
                raise SchemeError(f"{self.scheme_id}: cycle length must be > 0")

    def with_window(self, window: Optional[Tuple[float, float]]) -> "TrafficScheme":
        """Copy of the scheme with the lane-redesignation window replaced."""
        if self.lane_redesignation is None:
            return self
        redes = LaneRedesignation(
            self.lane_redesignation.link_id,
            self.lane_redesignation.forward,
            self.lane_redesignation.backward,
            window,
        )
        return TrafficScheme(self.scheme_id, self.cycle, redes, self.stop_duration_s)


@dataclass(frozen=True)
class SignalState:
    """Per-approach Go/Stop flags at one instant."""

    flags: dict = field(default_factory=lambda: {a: GO for a in net.APPROACHES})

    def __getitem__(self, approach: str) -> str:
        return self.flags[approach]

    @property
    def stopped(self) -> frozenset:
        return frozenset(a for a, f in self.flags.items() if f == STOP)


def _alternating_cycle(stop_s: float) -> SignalCycle:
    return SignalCycle(
        phases=(
            (frozenset({"B"}), stop_s),
            (frozenset({"C"}), stop_s),
        )
    )


_T3_REDESIGNATION = LaneRedesignation("AB", forward=1, backward=3, window=None)


def scheme_catalog() -> list:
    """All eight schemes, in canonical order."""
    return [
        TrafficScheme("t0"),
        TrafficScheme("t1", cycle=_alternating_cycle(30.0)),
        TrafficScheme("t2", cycle=_alternating_cycle(60.0)),
        TrafficScheme("t3", lane_redesignation=_T3_REDESIGNATION),
        TrafficScheme("t4", cycle=_alternating_cycle(30.0), lane_redesignation=_T3_REDESIGNATION),
        TrafficScheme("t5", cycle=_alternating_cycle(60.0), lane_redesignation=_T3_REDESIGNATION),
        TrafficScheme(
            "t3_s15",
            cycle=_alternating_cycle(15.0),
            lane_redesignation=_T3_REDESIGNATION,
            stop_duration_s=15.0,
        ),
        TrafficScheme(
            "t3_s45",
            cycle=_alternating_cycle(45.0),
            lane_redesignation=_T3_REDESIGNATION,
            stop_duration_s=45.0,
        ),
    ]


def get_scheme(scheme_id: str) -> TrafficScheme:
    for s in scheme_catalog():
        if s.scheme_id == scheme_id:
            return s
    raise SchemeError(f"unknown scheme id {scheme_id!r} (expected one of {SCHEME_IDS})")


def signal_state(scheme: TrafficScheme, sim_time: float) -> SignalState:
    """Signal flags at ``sim_time``; all Go for non-signalized schemes."""
    if sim_time < 0:
        raise ValueError("sim_time must be >= 0")
    flags = {a: GO for a in net.APPROACHES}
    if scheme.cycle is not None:
        for a in scheme.cycle.stopped_at(sim_time):
            flags[a] = STOP
    return SignalState(flags)


def scheme_lane_config(network: net.RoadNetwork, scheme: TrafficScheme, sim_time: float) -> net.LaneConfig:
    """Lane configuration under ``scheme`` at ``sim_time``."""
    return net.active_lane_config(network, scheme, sim_time)
