"""Driver-agent model and the discrete-time simulation world.

Agents are in one of three states: free driving toward their goal speed,
normal following under an asymmetric stimulus-response law fed by a
reaction-delayed perception buffer, or emergency deceleration under a
Gipps-style safe-braking bound.  Ring entry is governed by gap acceptance
(critical gap / follow-up time); red signals act as stationary virtual
leaders at the stop line.

The object-level operations here share their scalar cores with the packed
array engine in :mod:`bicutan._engine`; :class:`WorldState` wraps the
engine state and is deterministic given (arrivals, dt).
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace
from enum import IntEnum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import _engine as eng
from . import net
from .demand import VEHICLE_TYPE_NAMES, ArrivalStream
from .metrics import TripRecord

RING_LANE = eng.RING_LANE


class DriverState(IntEnum):
    FREE_DRIVING = eng.ST_FREE
    NORMAL_FOLLOWING = eng.ST_FOLLOW
    EMERGENCY_DECELERATION = eng.ST_EMERGENCY


class LaneChange(IntEnum):
    STAY = 0
    LEFT = 1
    RIGHT = -1


class KernelError(RuntimeError):
    pass


class CollisionError(KernelError):
    """A bumper-to-bumper gap went negative; the replication is aborted."""

    def __init__(self, agent_i: int, agent_j: int, sim_time: float):
        self.agent_i = agent_i
        self.agent_j = agent_j
        self.sim_time = sim_time
        super().__init__(
            f"collision between agents {agent_i} and {agent_j} at t={sim_time:.2f} s"
        )


@dataclass(frozen=True)
class GhrParams:
    """Stimulus-response sensitivities: c_acc when the leader is faster,
    c_dec when closing; exponents on own speed and spacing."""

    c_acc: float = 0.6
    c_dec: float = 1.0
    m_exp: float = 0.0
    l_exp: float = 1.0

    def __post_init__(self):
        if self.c_acc <= 0 or self.c_dec <= 0:
            raise ValueError("GHR sensitivities must be > 0")
        if self.l_exp < 0:
            raise ValueError("spacing exponent must be >= 0")


@dataclass(frozen=True)
class VehicleTypeParams:
    name: str
    length_m: float
    a_max: float  # m/s^2
    a_norm: float  # normal deceleration, stored positive
    b_emerg: float  # emergency deceleration, stored positive
    v_goal_kph: float
    reaction_time_s: float = 1.0
    ghr: GhrParams = field(default_factory=GhrParams)
    critical_gap_s: float = 3.5
    follow_up_s: float = 2.5

    def __post_init__(self):
        for label, value in (
            ("length", self.length_m),
            ("a_max", self.a_max),
            ("a_norm", self.a_norm),
            ("b_emerg", self.b_emerg),
            ("v_goal", self.v_goal_kph),
            ("reaction time", self.reaction_time_s),
            ("critical gap", self.critical_gap_s),
            ("follow-up time", self.follow_up_s),
        ):
            if value <= 0:
                raise ValueError(f"{self.name}: {label} must be > 0")
        if self.b_emerg < self.a_norm:
            raise ValueError(f"{self.name}: b_emerg must be >= a_norm")

    @property
    def v_goal_ms(self) -> float:
        return self.v_goal_kph / 3.6


def _vt(name, length, a_max, a_norm, b_emerg, v_goal) -> VehicleTypeParams:
    return VehicleTypeParams(name, length, a_max, a_norm, b_emerg, v_goal)


# Repo defaults; every value is overridable through scenario config.
DEFAULT_VEHICLE_TYPES: Dict[str, VehicleTypeParams] = {
    "jeepney": _vt("jeepney", 7.0, 1.5, 2.0, 4.0, 40.0),
    "bus": _vt("bus", 12.0, 1.0, 1.5, 3.5, 40.0),
    "truck": _vt("truck", 10.0, 0.8, 1.5, 3.5, 35.0),
    "taxi": _vt("taxi", 5.0, 2.0, 2.5, 5.0, 50.0),
    "AUV": _vt("AUV", 5.0, 2.0, 2.5, 5.0, 50.0),
    "motorcycle": _vt("motorcycle", 2.0, 2.5, 3.0, 6.0, 50.0),
    "tricycle": _vt("tricycle", 3.0, 1.0, 2.0, 4.0, 25.0),
    "bicycle": _vt("bicycle", 2.0, 0.8, 1.5, 3.0, 15.0),
}


@dataclass(frozen=True)
class EngineParams:
    """Integrator and interaction tuning knobs (engine-wide)."""

    dt_s: float = 0.1
    standstill_gap_m: float = 2.0
    h_free_s: float = 4.0  # headway separating free driving from following
    entry_signal_margin_s: float = 1.5
    ring_lookahead_m: float = 30.0
    exit_lookahead_m: float = 25.0
    gap_scan_m: float = 60.0
    lc_cooldown_s: float = 5.0
    lc_gap_bonus_m: float = 5.0
    lc_gap_factor: float = 1.5
    lc_speed_margin_ms: float = 1.0
    insert_margin_m: float = 0.3

    def __post_init__(self):
        if self.dt_s <= 0:
            raise ValueError("dt must be > 0")


@dataclass
class LeaderView:
    """What an agent can see of its constraint ahead."""

    gap_m: float  # bumper-to-bumper
    speed_ms: float
    b_emerg: Optional[float] = None  # assumed braking ability; None = own


@dataclass
class LaneGaps:
    lead_gap_m: float = math.inf
    lead_speed_ms: float = 0.0
    lag_gap_m: float = math.inf
    lag_speed_ms: float = 0.0


@dataclass
class NeighborView:
    leader: Optional[LeaderView] = None
    left: Optional[LaneGaps] = None
    right: Optional[LaneGaps] = None
    required_direction: int = 0  # +1 left / -1 right mandated by the route


class PerceptionBuffer:
    """Ring buffer of (own speed, leader speed, gap) samples; reading it
    returns the sample one reaction time old (or the oldest available)."""

    def __init__(self, reaction_time_s: float, dt_s: float):
        self.steps = max(1, round(reaction_time_s / dt_s))
        self._buf = deque(maxlen=self.steps + 1)

    def push(self, v_self: float, v_lead: float, gap: float) -> None:
        self._buf.append((v_self, v_lead, gap))

    def reset(self) -> None:
        self._buf.clear()

    def delayed(self) -> Optional[Tuple[float, float, float]]:
        if not self._buf:
            return None
        return self._buf[0]


@dataclass
class DriverAgent:
    agent_id: int
    vtype: VehicleTypeParams
    route: Optional[Tuple[str, str]] = None
    s: float = 0.0
    v: float = 0.0
    a: float = 0.0
    state: DriverState = DriverState.FREE_DRIVING
    entry_time_s: float = 0.0
    exit_time_s: Optional[float] = None
    perception: Optional[PerceptionBuffer] = None

    def __post_init__(self):
        if self.perception is None:
            self.perception = PerceptionBuffer(self.vtype.reaction_time_s, 0.1)


# ---------------------------------------------------------------------------
# object-level operations (same cores as the engine)


def classify_state(agent: DriverAgent, leader: Optional[LeaderView]) -> DriverState:
    """Free driving, normal following or emergency deceleration."""
    if leader is None:
        return DriverState.FREE_DRIVING
    p = agent.vtype
    b_lead = leader.b_emerg if leader.b_emerg is not None else p.b_emerg
    state = eng.classify(
        agent.v,
        leader.gap_m,
        leader.speed_ms,
        EngineParams().standstill_gap_m,
        p.reaction_time_s,
        p.a_norm,
        b_lead,
        EngineParams().h_free_s,
    )
    return DriverState(state)


def free_driving_accel(
    agent: DriverAgent, speed_limit_kph: Optional[float] = None, dt_s: float = 0.1
) -> float:
    """Acceleration toward min(goal speed, limit), clipped to land exactly."""
    v_target = agent.vtype.v_goal_ms
    if speed_limit_kph is not None:
        v_target = min(v_target, speed_limit_kph / 3.6)
    return eng.free_accel(agent.v, v_target, agent.vtype.a_max, agent.vtype.a_norm, dt_s)


def ghr_accel(
    agent: DriverAgent, leader: LeaderView, params: Optional[GhrParams] = None
) -> float:
    """Following acceleration from the (delayed) perceived leader state."""
    if leader.gap_m <= 0:
        raise CollisionError(agent.agent_id, -1, 0.0)
    p = params or agent.vtype.ghr
    sample = agent.perception.delayed() if agent.perception else None
    if sample is None:
        v_self, v_lead, gap = agent.v, leader.speed_ms, leader.gap_m
    else:
        v_self, v_lead, gap = sample
    return eng.ghr(
        v_self,
        v_lead,
        gap,
        p.c_acc,
        p.c_dec,
        p.m_exp,
        p.l_exp,
        agent.vtype.a_max,
        agent.vtype.b_emerg,
    )


def emergency_decel(agent: DriverAgent, leader: LeaderView) -> float:
    """Deceleration keeping the stopping distance inside the available gap."""
    p = agent.vtype
    b_lead = leader.b_emerg if leader.b_emerg is not None else p.b_emerg
    return eng.emergency_brake(
        agent.v,
        leader.gap_m,
        leader.speed_ms,
        EngineParams().standstill_gap_m,
        p.a_norm,
        p.b_emerg,
        b_lead,
    )


def gap_acceptance_entry(
    agent: DriverAgent, circulating_gaps_s: Sequence[float], follow_up: bool = False
) -> bool:
    """Accept iff the tightest circulating time gap clears the threshold."""
    nearest = min(circulating_gaps_s) if len(circulating_gaps_s) else math.inf
    return bool(
        eng.accept_entry_gap(
            nearest, agent.vtype.critical_gap_s, agent.vtype.follow_up_s, follow_up
        )
    )


def lane_change_decision(
    agent: DriverAgent, neighbors: NeighborView, speed_limit_kph: Optional[float] = None
) -> LaneChange:
    """Mandatory change toward the route-required lane wins; otherwise a
    discretionary change needs a constraining leader, a clearly better
    target gap and safe lead/lag gaps."""
    p = agent.vtype
    ep = EngineParams()
    v_target = p.v_goal_ms
    if speed_limit_kph is not None:
        v_target = min(v_target, speed_limit_kph / 3.6)
    lead_gap = neighbors.leader.gap_m if neighbors.leader else 1e18
    lead_v = neighbors.leader.speed_ms if neighbors.leader else 0.0
    left = neighbors.left
    right = neighbors.right
    decision = eng.lc_decide(
        agent.v,
        v_target,
        lead_gap,
        lead_v,
        left is not None,
        left.lead_gap_m if left else 0.0,
        left.lead_speed_ms if left else 0.0,
        left.lag_gap_m if left else 0.0,
        left.lag_speed_ms if left else 0.0,
        right is not None,
        right.lead_gap_m if right else 0.0,
        right.lead_speed_ms if right else 0.0,
        right.lag_gap_m if right else 0.0,
        right.lag_speed_ms if right else 0.0,
        neighbors.required_direction,
        ep.standstill_gap_m,
        p.reaction_time_s,
        p.a_norm,
        p.b_emerg,
        ep.h_free_s,
        ep.lc_gap_bonus_m,
        ep.lc_gap_factor,
        ep.lc_speed_margin_ms,
    )
    return LaneChange(decision)


# ---------------------------------------------------------------------------
# world state


def lane_id_in(approach: str, slot: int = 0) -> int:
    return net.APPROACHES.index(approach) * 3 + slot


def lane_id_out(approach: str, slot: int = 0) -> int:
    return 9 + net.APPROACHES.index(approach) * 3 + slot


@dataclass
class Placement:
    """Scripted vehicle placement for tests and scenario studies."""

    origin: str
    destination: str
    vtype: str
    lane: int
    s: float
    v: float
    entry_time_s: float = 0.0
    cleared: bool = False
    ring_dist: float = 0.0


@dataclass(frozen=True)
class AgentView:
    agent_id: int
    vtype: str
    origin: str
    destination: str
    lane: int
    phase: int
    s: float
    v: float
    state: DriverState
    cleared: bool


class WorldState:
    """All simulation state for one replication.

    Owns the packed arrays the engine operates on.  Not safe to share
    across threads mid-run; replications each build their own world.
    """

    def __init__(
        self,
        network: net.RoadNetwork,
        scheme,
        arrivals: ArrivalStream,
        vehicle_types: Optional[Dict[str, VehicleTypeParams]] = None,
        params: Optional[EngineParams] = None,
    ):
        self.network = network
        self.scheme = scheme
        self.params = params or EngineParams()
        self.vehicle_types = dict(vehicle_types or DEFAULT_VEHICLE_TYPES)
        for name in VEHICLE_TYPE_NAMES:
            if name not in self.vehicle_types:
                raise KernelError(f"missing vehicle type parameters for {name!r}")

        ep = self.params
        dt = ep.dt_s
        n = len(arrivals)
        self.n_vehicles = n

        # vehicle-type table
        tt = np.zeros((len(VEHICLE_TYPE_NAMES), eng.N_TT), dtype=np.float64)
        for k, name in enumerate(VEHICLE_TYPE_NAMES):
            p = self.vehicle_types[name]
            tt[k, eng.TT_LEN] = p.length_m
            tt[k, eng.TT_AMAX] = p.a_max
            tt[k, eng.TT_ANORM] = p.a_norm
            tt[k, eng.TT_BEMERG] = p.b_emerg
            tt[k, eng.TT_VGOAL] = p.v_goal_ms
            tt[k, eng.TT_CACC] = p.ghr.c_acc
            tt[k, eng.TT_CDEC] = p.ghr.c_dec
            tt[k, eng.TT_MEXP] = p.ghr.m_exp
            tt[k, eng.TT_LEXP] = p.ghr.l_exp
            tt[k, eng.TT_TC] = p.critical_gap_s
            tt[k, eng.TT_TF] = p.follow_up_s
            tt[k, eng.TT_REACT_S] = p.reaction_time_s
            tt[k, eng.TT_REACT_STEPS] = max(1, round(p.reaction_time_s / dt))
        self.TT = tt
        bufcap = int(tt[:, eng.TT_REACT_STEPS].max()) + 2

        # lane tables
        geo = network.geometry
        ll = np.zeros((eng.N_LANES, eng.N_LL), dtype=np.float64)
        for oi, a in enumerate(net.APPROACHES):
            for slot in range(3):
                ln = oi * 3 + slot
                ll[ln, eng.LL_LEN] = network.approach_length_m[a]
                ll[ln, eng.LL_LIM] = geo.approach_speed_limit_kph / 3.6
                ll[ln, eng.LL_STOP] = network.stop_lines[a]
                lx = 9 + oi * 3 + slot
                ll[lx, eng.LL_LEN] = network.approach_length_m[a]
                ll[lx, eng.LL_LIM] = geo.approach_speed_limit_kph / 3.6
                ll[lx, eng.LL_STOP] = -1.0
        ll[eng.RING_LANE, eng.LL_LEN] = network.ring_circumference_m
        ll[eng.RING_LANE, eng.LL_LIM] = geo.ring_speed_limit_kph / 3.6
        ll[eng.RING_LANE, eng.LL_STOP] = -1.0
        self.LL = ll

        radius = geo.ring_diameter_m / 2.0
        self.entry_arc = np.array(
            [math.radians(network.entry_azimuth_deg[a]) * radius for a in net.APPROACHES]
        )
        arc = np.zeros((3, 3), dtype=np.float64)
        for (o, d), val in network.ring_arc_m.items():
            arc[net.APPROACHES.index(o), net.APPROACHES.index(d)] = val
        self.arc_need = arc

        # engine parameter blocks
        epv = np.zeros(eng.N_EP, dtype=np.float64)
        epv[eng.EP_DT] = dt
        epv[eng.EP_S0] = ep.standstill_gap_m
        epv[eng.EP_HFREE] = ep.h_free_s
        epv[eng.EP_RING_LEN] = network.ring_circumference_m
        epv[eng.EP_ENTRY_MARGIN] = ep.entry_signal_margin_s
        epv[eng.EP_RING_LOOKAHEAD] = ep.ring_lookahead_m
        epv[eng.EP_EXIT_LOOKAHEAD] = ep.exit_lookahead_m
        epv[eng.EP_TGAP_SCAN] = ep.gap_scan_m
        epv[eng.EP_LC_COOLDOWN] = ep.lc_cooldown_s
        epv[eng.EP_LC_GAP_BONUS] = ep.lc_gap_bonus_m
        epv[eng.EP_LC_GAP_FACTOR] = ep.lc_gap_factor
        epv[eng.EP_LC_SPEED_MARGIN] = ep.lc_speed_margin_ms
        epv[eng.EP_INSERT_MARGIN] = ep.insert_margin_m

        cycle = getattr(scheme, "cycle", None)
        if cycle is not None:
            phases = cycle.phases
            if (
                len(phases) != 2
                or phases[0][0] != frozenset({"B"})
                or phases[1][0] != frozenset({"C"})
            ):
                raise KernelError(
                    f"engine supports alternating B/C stop cycles only, got {phases!r}"
                )
            epv[eng.EP_CYC_LEN] = phases[0][1] + phases[1][1]
            epv[eng.EP_STOP_B_END] = phases[0][1]

        redes = getattr(scheme, "lane_redesignation", None)
        if redes is not None and redes.window is not None:
            epv[eng.EP_WIN_START] = redes.window[0]
            epv[eng.EP_WIN_END] = redes.window[1]
        else:
            epv[eng.EP_WIN_START] = -1.0
            epv[eng.EP_WIN_END] = 1e18
        self.ep = epv

        ipv = np.zeros(eng.N_IP, dtype=np.int64)
        base_counts = network.lane_counts(net.LaneConfig())
        if redes is not None:
            over = net.LaneConfig(
                overrides={redes.link_id: (redes.forward, redes.backward)}
            )
            win_counts = network.lane_counts(over)
        else:
            win_counts = base_counts
        for oi, a in enumerate(net.APPROACHES):
            ipv[eng.IP_IN_BASE + oi] = base_counts[a][0]
            ipv[eng.IP_IN_WIN + oi] = win_counts[a][0]
            ipv[eng.IP_OUT_BASE + oi] = base_counts[a][1]
            ipv[eng.IP_OUT_WIN + oi] = win_counts[a][1]
        self.ip = ipv

        # per-vehicle arrays
        times = np.asarray(arrivals.times, dtype=np.float64)
        if n and np.any(np.diff(times) < 0):
            raise KernelError("arrival stream must be time-ordered")
        self.VI = np.zeros((n, eng.N_IV), dtype=np.int64)
        self.VF = np.zeros((n, eng.N_FV), dtype=np.float64)
        self.VI[:, eng.IV_LANE] = -1
        self.VI[:, eng.IV_PHASE] = eng.PH_UNBORN
        self.VI[:, eng.IV_PREVLEAD] = -1
        self.VI[:, eng.IV_TYPE] = arrivals.vtypes
        self.VI[:, eng.IV_ORIG] = arrivals.origins
        self.VI[:, eng.IV_DEST] = arrivals.destinations
        self.VF[:, eng.FV_ARR] = times
        self.VF[:, eng.FV_EXIT] = np.nan

        self.pbuf = np.zeros((max(n, 1), bufcap, 3), dtype=np.float64)
        self.next_ahead = np.full(max(n, 1), -1, dtype=np.int64)
        self.next_behind = np.full(max(n, 1), -1, dtype=np.int64)
        self.lane_head = np.full(eng.N_LANES, -1, dtype=np.int64)
        self.lane_tail = np.full(eng.N_LANES, -1, dtype=np.int64)
        self.vq = np.zeros((3, max(n, 1)), dtype=np.int64)
        self.vq_start = np.zeros(3, dtype=np.int64)
        self.vq_end = np.zeros(3, dtype=np.int64)
        self.ent_last_clear = np.full(9, -1e18, dtype=np.float64)
        self.ent_gap_leader = np.full(9, -9, dtype=np.int64)
        self.counters = np.zeros(eng.N_CNT, dtype=np.int64)
        self.aud = np.zeros(eng.N_AUD, dtype=np.float64)
        self.aud[eng.AUD_MIN_GAP] = 1e18
        self.scr = np.zeros((max(n, 1), 4), dtype=np.float64)
        self.st = np.zeros(2, dtype=np.float64)

        # free-flow times per (origin, dest, type), for trip records
        self._free_flow = {}
        for o in net.APPROACHES:
            for d in net.APPROACHES:
                if o == d:
                    continue
                for name in VEHICLE_TYPE_NAMES:
                    self._free_flow[(o, d, name)] = net.free_flow_time(
                        network, (o, d), self.vehicle_types[name]
                    )

    # -- scripted worlds ----------------------------------------------------

    @classmethod
    def scripted(
        cls,
        network: net.RoadNetwork,
        scheme,
        placements: Sequence[Placement],
        vehicle_types: Optional[Dict[str, VehicleTypeParams]] = None,
        params: Optional[EngineParams] = None,
    ) -> "WorldState":
        """World with vehicles placed directly on lanes (no arrival queue)."""
        order = sorted(range(len(placements)), key=lambda k: (placements[k].entry_time_s, k))
        placed = [placements[k] for k in order]
        stream = ArrivalStream(
            times=np.array([p.entry_time_s for p in placed], dtype=np.float64),
            origins=np.array([net.APPROACHES.index(p.origin) for p in placed], dtype=np.int64),
            destinations=np.array(
                [net.APPROACHES.index(p.destination) for p in placed], dtype=np.int64
            ),
            vtypes=np.array(
                [VEHICLE_TYPE_NAMES.index(p.vtype) for p in placed], dtype=np.int64
            ),
        )
        world = cls(network, scheme, stream, vehicle_types, params)
        world.counters[eng.CNT_ARR] = len(placed)
        world.counters[eng.CNT_NET] = len(placed)
        for i, p in enumerate(placed):
            world.VI[i, eng.IV_LANE] = p.lane
            world.VI[i, eng.IV_CLEARED] = 1 if p.cleared else 0
            world.VI[i, eng.IV_PREVLEAD] = -3
            if p.lane == eng.RING_LANE:
                world.VI[i, eng.IV_PHASE] = eng.PH_RING
                world.VF[i, eng.FV_RINGD] = p.ring_dist
                world.VF[i, eng.FV_ARCNEED] = world.arc_need[
                    net.APPROACHES.index(p.origin), net.APPROACHES.index(p.destination)
                ]
            elif p.lane >= 9:
                world.VI[i, eng.IV_PHASE] = eng.PH_EXIT
            else:
                world.VI[i, eng.IV_PHASE] = eng.PH_APPROACH
            world.VF[i, eng.FV_S] = p.s
            world.VF[i, eng.FV_V] = p.v
            eng._insert_sorted(
                p.lane,
                i,
                p.s,
                world.VI[:, eng.IV_LANE],
                world.VF[:, eng.FV_S],
                world.next_ahead,
                world.next_behind,
                world.lane_head,
                world.lane_tail,
            )
        return world

    # -- stepping -----------------------------------------------------------

    @property
    def time(self) -> float:
        return float(self.st[0])

    @property
    def dt(self) -> float:
        return self.params.dt_s

    def step(self, n: int = 1) -> "WorldState":
        """Advance n time steps; raises on collision or conservation breach."""
        if n < 1:
            raise ValueError("n must be >= 1")
        status = eng.advance(
            n,
            self.st,
            self.ep,
            self.ip,
            self.LL,
            self.entry_arc,
            self.arc_need,
            self.TT,
            self.VI,
            self.VF,
            self.pbuf,
            self.next_ahead,
            self.next_behind,
            self.lane_head,
            self.lane_tail,
            self.vq,
            self.vq_start,
            self.vq_end,
            self.ent_last_clear,
            self.ent_gap_leader,
            self.counters,
            self.aud,
            self.scr,
        )
        if status == eng.STATUS_COLLISION:
            raise CollisionError(
                int(self.aud[eng.AUD_COL_I]),
                int(self.aud[eng.AUD_COL_J]),
                float(self.aud[eng.AUD_COL_T]),
            )
        if status == eng.STATUS_CONSERVATION:
            raise KernelError(f"vehicle conservation violated at t={self.time:.2f} s")
        return self

    def run(self, duration_s: float) -> "WorldState":
        steps = int(round(duration_s / self.dt))
        if steps > 0:
            self.step(steps)
        return self

    # -- inspection ---------------------------------------------------------

    def agent(self, i: int) -> AgentView:
        return AgentView(
            agent_id=i,
            vtype=VEHICLE_TYPE_NAMES[self.VI[i, eng.IV_TYPE]],
            origin=net.APPROACHES[self.VI[i, eng.IV_ORIG]],
            destination=net.APPROACHES[self.VI[i, eng.IV_DEST]],
            lane=int(self.VI[i, eng.IV_LANE]),
            phase=int(self.VI[i, eng.IV_PHASE]),
            s=float(self.VF[i, eng.FV_S]),
            v=float(self.VF[i, eng.FV_V]),
            state=DriverState(int(self.VI[i, eng.IV_STATE])),
            cleared=bool(self.VI[i, eng.IV_CLEARED]),
        )

    def agents_in_network(self) -> List[AgentView]:
        return [
            self.agent(i)
            for i in range(self.n_vehicles)
            if self.VI[i, eng.IV_PHASE] in (eng.PH_APPROACH, eng.PH_RING, eng.PH_EXIT)
        ]

    @property
    def counts(self) -> dict:
        n_arr = int(self.counters[eng.CNT_ARR])
        return {
            "unborn": self.n_vehicles - n_arr,
            "queued": int(self.counters[eng.CNT_QUEUED]),
            "in_network": int(self.counters[eng.CNT_NET]),
            "done": int(self.counters[eng.CNT_DONE]),
        }

    @property
    def audits(self) -> dict:
        return {
            "min_gap_m": float(self.aud[eng.AUD_MIN_GAP]),
            "red_crossings": int(self.aud[eng.AUD_RED_COUNT]),
            "red_excess_m": float(self.aud[eng.AUD_RED_EXCESS]),
            "entry_holds": int(self.aud[eng.AUD_HOLDS]),
            "max_in_network": int(self.aud[eng.AUD_MAX_NET]),
        }

    def trips(self) -> List[TripRecord]:
        """One record per vehicle, exit time missing while unfinished."""
        out = []
        for i in range(self.n_vehicles):
            o = net.APPROACHES[self.VI[i, eng.IV_ORIG]]
            d = net.APPROACHES[self.VI[i, eng.IV_DEST]]
            name = VEHICLE_TYPE_NAMES[self.VI[i, eng.IV_TYPE]]
            done = self.VI[i, eng.IV_PHASE] == eng.PH_DONE
            out.append(
                TripRecord(
                    agent_id=i,
                    vtype=name,
                    origin=o,
                    destination=d,
                    entry_time_s=float(self.VF[i, eng.FV_ARR]),
                    exit_time_s=float(self.VF[i, eng.FV_EXIT]) if done else None,
                    distance_m=self.network.route_distance_m(o, d),
                    free_flow_s=self._free_flow[(o, d, name)],
                )
            )
        return out


def step(world: WorldState, n: int = 1) -> WorldState:
    """Module-level alias for :meth:`WorldState.step`."""
    return world.step(n)
