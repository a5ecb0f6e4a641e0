"""Static road-network model of the Bicutan Roundabout.

The roundabout is modeled as a circular single-lane ring (34 m inscribed
diameter) with three approaches: A (PNR crossing, west), B (PNCC/East
Service Road, north) and C (DOST gate, east).  Circulation is
counterclockwise (right-hand traffic).  The PNR-PNCC road through the
junction is represented as a single bidirectional link "AB" whose forward
direction is A->B; the DOST spur is link "C".  Lane re-designations (e.g.
1 lane A->B / 3 lanes B->A) are expressed as per-link overrides that the
kernel projects onto per-approach lane counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from typing import Mapping, Optional

APPROACHES = ("A", "B", "C")
APPROACH_NAMES = {"A": "PNR", "B": "PNCC", "C": "DOST"}

# The kernel allocates three lane slots per approach per direction.
MAX_LANES_PER_DIRECTION = 3


class NetworkError(ValueError):
    """Invalid geometry or an unroutable lane configuration."""


@dataclass(frozen=True)
class NetworkGeometryConfig:
    """Geometry knobs for the default Bicutan network.

    Distances are from the roundabout center to the outer end of each
    approach road.  Azimuths use math convention (east = 0°, counter-
    clockwise positive), so A sits west, B north, C east.

    Lane counts on the B (ESR) and C (DOST) sides are not published for
    the site; 2+2 is the repo default.
    """

    ring_diameter_m: float = 34.0
    approach_distance_m: Mapping[str, float] = field(
        default_factory=lambda: {"A": 106.0, "B": 150.0, "C": 100.0}
    )
    approach_azimuth_deg: Mapping[str, float] = field(
        default_factory=lambda: {"A": 180.0, "B": 90.0, "C": 0.0}
    )
    ab_lanes_forward: int = 2  # A->B direction of the PNR-PNCC road
    ab_lanes_backward: int = 2
    c_lanes_forward: int = 2  # C->ring
    c_lanes_backward: int = 2
    approach_speed_limit_kph: float = 50.0
    ring_speed_limit_kph: float = 25.0
    stopline_setback_m: float = 5.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["approach_distance_m"] = dict(self.approach_distance_m)
        d["approach_azimuth_deg"] = dict(self.approach_azimuth_deg)
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "NetworkGeometryConfig":
        return cls(**d)


@dataclass(frozen=True)
class Link:
    link_id: str
    from_node: str
    to_node: str
    length_m: float
    lanes_forward: int
    lanes_backward: int
    speed_limit_kph: float

    def __post_init__(self):
        if self.length_m <= 0:
            raise NetworkError(f"link {self.link_id}: length must be > 0")
        if self.lanes_forward + self.lanes_backward < 1:
            raise NetworkError(f"link {self.link_id}: needs at least one lane")
        if self.speed_limit_kph <= 0:
            raise NetworkError(f"link {self.link_id}: speed limit must be > 0")


@dataclass(frozen=True)
class RouteSegment:
    segment_id: str
    from_node: str
    to_node: str
    length_m: float
    speed_limit_kph: float


@dataclass(frozen=True)
class Route:
    origin: str
    destination: str
    segments: tuple

    @property
    def route_id(self) -> str:
        return f"{self.origin}->{self.destination}"

    @property
    def distance_m(self) -> float:
        return sum(seg.length_m for seg in self.segments)


@dataclass(frozen=True)
class LaneConfig:
    """Per-link lane-count overrides active at some instant.

    ``overrides`` maps link id to (lanes_forward, lanes_backward); links
    not present keep their physical defaults.
    """

    overrides: Mapping[str, tuple] = field(default_factory=dict)

    def lanes(self, link: Link) -> tuple:
        if link.link_id in self.overrides:
            return tuple(self.overrides[link.link_id])
        return (link.lanes_forward, link.lanes_backward)


@dataclass(frozen=True)
class RoadNetwork:
    geometry: NetworkGeometryConfig
    links: tuple
    routes: tuple
    stop_lines: Mapping[str, float]  # per approach, meters from approach origin
    approach_length_m: Mapping[str, float]
    ring_arc_m: Mapping[tuple, float]  # (origin, dest) -> circulating distance
    entry_azimuth_deg: Mapping[str, float]

    @property
    def ring_diameter_m(self) -> float:
        return self.geometry.ring_diameter_m

    @property
    def ring_circumference_m(self) -> float:
        return math.pi * self.geometry.ring_diameter_m

    def link(self, link_id: str) -> Link:
        for ln in self.links:
            if ln.link_id == link_id:
                return ln
        raise NetworkError(f"unknown link id {link_id!r}")

    def route(self, origin: str, destination: str) -> Route:
        for r in self.routes:
            if r.origin == origin and r.destination == destination:
                return r
        raise NetworkError(f"unknown route {origin!r}->{destination!r}")

    def route_distance_m(self, origin: str, destination: str) -> float:
        return self.route(origin, destination).distance_m

    def lane_counts(self, config: Optional[LaneConfig] = None) -> dict:
        """Project link lane counts onto per-approach (inbound, outbound).

        The AB link's forward direction (A->B) supplies A's inbound lanes
        and B's outbound lanes; its backward direction the reverse.  Link C
        is oriented C->ring, so forward is C's inbound side.
        """
        if config is None:
            config = LaneConfig()
        ab_f, ab_b = config.lanes(self.link("AB"))
        c_f, c_b = config.lanes(self.link("C"))
        return {
            "A": (ab_f, ab_b),
            "B": (ab_b, ab_f),
            "C": (c_f, c_b),
        }


def _ccw_arc_deg(az_from: float, az_to: float) -> float:
    arc = (az_to - az_from) % 360.0
    return 360.0 if arc == 0.0 else arc


def build_bicutan_network(geometry: Optional[NetworkGeometryConfig] = None) -> RoadNetwork:
    """Construct the Bicutan Roundabout network from a geometry config.

    Raises :class:`NetworkError` on nonpositive lengths/diameter, lane
    counts outside the supported range, or a lane assignment that leaves
    some route without a usable lane.
    """
    geo = geometry or NetworkGeometryConfig()

    if geo.ring_diameter_m <= 0:
        raise NetworkError("ring diameter must be > 0")
    if geo.stopline_setback_m < 0:
        raise NetworkError("stop line setback must be >= 0")
    radius = geo.ring_diameter_m / 2.0

    approach_len = {}
    for a in APPROACHES:
        if a not in geo.approach_distance_m or a not in geo.approach_azimuth_deg:
            raise NetworkError(f"missing geometry for approach {a}")
        dist = float(geo.approach_distance_m[a])
        if dist <= radius:
            raise NetworkError(
                f"approach {a}: center distance {dist} m must exceed ring radius {radius} m"
            )
        approach_len[a] = dist - radius

    for label, count in (
        ("AB forward", geo.ab_lanes_forward),
        ("AB backward", geo.ab_lanes_backward),
        ("C forward", geo.c_lanes_forward),
        ("C backward", geo.c_lanes_backward),
    ):
        if not 0 <= count <= MAX_LANES_PER_DIRECTION:
            raise NetworkError(
                f"{label} lane count {count} outside supported range 0..{MAX_LANES_PER_DIRECTION}"
            )

    links = (
        Link(
            "AB",
            "A",
            "B",
            approach_len["A"] + approach_len["B"],
            geo.ab_lanes_forward,
            geo.ab_lanes_backward,
            geo.approach_speed_limit_kph,
        ),
        Link(
            "C",
            "C",
            "ring_C",
            approach_len["C"],
            geo.c_lanes_forward,
            geo.c_lanes_backward,
            geo.approach_speed_limit_kph,
        ),
    )

    ring_arc = {}
    routes = []
    for o in APPROACHES:
        for d in APPROACHES:
            if o == d:
                continue
            arc_deg = _ccw_arc_deg(geo.approach_azimuth_deg[o], geo.approach_azimuth_deg[d])
            arc_m = math.radians(arc_deg) * radius
            ring_arc[(o, d)] = arc_m
            segments = (
                RouteSegment(
                    f"{o}:in", o, f"ring_{o}", approach_len[o], geo.approach_speed_limit_kph
                ),
                RouteSegment(
                    f"ring:{o}->{d}", f"ring_{o}", f"ring_{d}", arc_m, geo.ring_speed_limit_kph
                ),
                RouteSegment(
                    f"{d}:out", f"ring_{d}", d, approach_len[d], geo.approach_speed_limit_kph
                ),
            )
            routes.append(Route(o, d, segments))

    stop_lines = {}
    for a in APPROACHES:
        pos = approach_len[a] - geo.stopline_setback_m
        if pos <= 0:
            raise NetworkError(f"approach {a}: stop line setback exceeds approach length")
        stop_lines[a] = pos

    network = RoadNetwork(
        geometry=geo,
        links=links,
        routes=tuple(routes),
        stop_lines=stop_lines,
        approach_length_m=approach_len,
        ring_arc_m=ring_arc,
        entry_azimuth_deg={a: float(geo.approach_azimuth_deg[a]) % 360.0 for a in APPROACHES},
    )
    _validate_network(network)
    return network


def _validate_network(network: RoadNetwork) -> None:
    if len(network.routes) != 6:
        raise NetworkError(f"expected 6 routes, got {len(network.routes)}")
    for r in network.routes:
        for seg, nxt in zip(r.segments, r.segments[1:]):
            if seg.to_node != nxt.from_node:
                raise NetworkError(f"route {r.route_id}: disconnected at {seg.segment_id}")
    _check_routable(network, LaneConfig())


def _check_routable(network: RoadNetwork, config: LaneConfig) -> None:
    counts = network.lane_counts(config)
    for r in network.routes:
        n_in, _ = counts[r.origin]
        _, n_out = counts[r.destination]
        if n_in < 1:
            raise NetworkError(f"route {r.route_id} unroutable: no inbound lane at {r.origin}")
        if n_out < 1:
            raise NetworkError(f"route {r.route_id} unroutable: no outbound lane at {r.destination}")


def active_lane_config(network: RoadNetwork, scheme, sim_time: float) -> LaneConfig:
    """Lane configuration in force at ``sim_time`` under ``scheme``.

    Schemes without a lane re-designation (and re-designating schemes
    outside their active window) yield the physical defaults.  The result
    is piecewise-constant in time with transitions only at the window
    boundaries.
    """
    if sim_time < 0:
        raise ValueError("sim_time must be >= 0")
    redes = getattr(scheme, "lane_redesignation", None)
    if redes is None:
        return LaneConfig()
    if redes.window is not None:
        start, end = redes.window
        if not (start <= sim_time < end):
            return LaneConfig()
    link = network.link(redes.link_id)
    total_physical = link.lanes_forward + link.lanes_backward
    if redes.forward + redes.backward > total_physical:
        raise NetworkError(
            f"re-designation {redes.forward}+{redes.backward} exceeds "
            f"{link.link_id}'s physical {total_physical} lanes"
        )
    config = LaneConfig(overrides={redes.link_id: (redes.forward, redes.backward)})
    _check_routable(network, config)
    return config


def free_flow_time(network: RoadNetwork, route, vtype) -> float:
    """Unimpeded travel time over a route: sum of length / min(goal, limit).

    ``route`` may be a Route or an (origin, destination) pair; ``vtype``
    needs a ``v_goal_kph`` attribute.
    """
    if not isinstance(route, Route):
        origin, destination = route
        route = network.route(origin, destination)
    v_goal_ms = vtype.v_goal_kph / 3.6
    total = 0.0
    for seg in route.segments:
        v = min(v_goal_ms, seg.speed_limit_kph / 3.6)
        total += seg.length_m / v
    return total
