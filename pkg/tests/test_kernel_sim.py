"""Integration tests of the stepping engine on small worlds."""

import os
import subprocess
import sys

import numpy as np
import pytest

from bicutan import _engine as eng
from bicutan import kernel, net, schemes
from bicutan._jit import NUMBA_ENABLED
from bicutan.demand import ArrivalStream, DemandProfile, generate_arrivals

JEEPNEY = kernel.DEFAULT_VEHICLE_TYPES["jeepney"]


def arrivals_from(list_of_tuples):
    times, origins, dests, types = [], [], [], []
    from bicutan.demand import VEHICLE_TYPE_NAMES

    for t, o, d, vt in list_of_tuples:
        times.append(t)
        origins.append(net.APPROACHES.index(o))
        dests.append(net.APPROACHES.index(d))
        types.append(VEHICLE_TYPE_NAMES.index(vt))
    return ArrivalStream(
        times=np.array(times, dtype=float),
        origins=np.array(origins),
        destinations=np.array(dests),
        vtypes=np.array(types),
    )


def light_profile(vplus=0.0):
    return DemandProfile(
        rates={"A": 0.06, "B": 0.05, "C": 0.05},
        od_split={
            "A": {"B": 0.35, "C": 0.65},
            "B": {"A": 0.55, "C": 0.45},
            "C": {"A": 0.6, "B": 0.4},
        },
        type_probs={
            "jeepney": 0.4,
            "bus": 0.1,
            "motorcycle": 0.2,
            "tricycle": 0.2,
            "taxi": 0.1,
        },
        volume_scale=vplus,
    )


def test_cruising_agent_advances_exactly_v_dt(network):
    v = JEEPNEY.v_goal_ms
    placements = [
        kernel.Placement("A", "C", "jeepney", kernel.lane_id_in("A"), 10.0, v, cleared=True)
    ]
    world = kernel.WorldState.scripted(network, schemes.get_scheme("t0"), placements)
    world.step()
    assert world.agent(0).s == pytest.approx(10.0 + v * world.dt)
    assert world.agent(0).v == pytest.approx(v)
    world.step()
    assert world.agent(0).s == pytest.approx(10.0 + 2 * v * world.dt)


def test_red_signal_brakes_first_vehicle_before_the_line(network):
    # under the 60 s cycle approach B is stopped during [0, 30)
    scheme = schemes.get_scheme("t1")
    v = JEEPNEY.v_goal_ms
    stop = network.stop_lines["B"]
    placements = [
        kernel.Placement("B", "A", "jeepney", kernel.lane_id_in("B"), stop - 60.0, v)
    ]
    world = kernel.WorldState.scripted(network, scheme, placements)
    world.run(10.0)
    a = world.agent(0)
    assert a.v < v  # braking toward the line
    assert a.s < stop
    world.run(15.0)  # t = 25, still red
    a = world.agent(0)
    assert a.v == pytest.approx(0.0, abs=1e-9)
    assert a.s <= stop
    assert world.audits["red_crossings"] == 0
    # green at t = 30: the vehicle clears, enters and eventually exits
    world.run(60.0)
    assert world.counts["done"] == 1
    assert world.audits["red_crossings"] == 0


def test_signal_anticipation_prevents_red_crossing_near_flip(network):
    # a vehicle arriving just before B's red must hold, not sneak across
    scheme = schemes.get_scheme("t1")
    v = JEEPNEY.v_goal_ms
    stop = network.stop_lines["B"]
    placements = [
        kernel.Placement("B", "A", "jeepney", kernel.lane_id_in("B"), stop - 40.0, v,
                         entry_time_s=56.0)
    ]
    world = kernel.WorldState.scripted(network, scheme, placements)
    world.st[0] = 56.0  # 4 s of green left in the cycle
    world.run(40.0)
    assert world.audits["red_crossings"] == 0


def test_deterministic_replay_is_bit_identical(network):
    arr = generate_arrivals(light_profile(), seed=77, duration_s=400.0)
    worlds = []
    for _ in range(2):
        w = kernel.WorldState(network, schemes.get_scheme("t1"), arr)
        w.run(500.0)
        worlds.append(w)
    a, b = worlds
    assert np.array_equal(a.VF, b.VF)
    assert np.array_equal(a.VI, b.VI)
    assert a.counts == b.counts


def test_conservation_every_step(network):
    arr = generate_arrivals(light_profile(), seed=5, duration_s=200.0)
    world = kernel.WorldState(network, schemes.get_scheme("t0"), arr)
    n = world.n_vehicles
    for _ in range(2500):
        world.step()
        c = world.counts
        assert c["unborn"] + c["queued"] + c["in_network"] + c["done"] == n


def test_ring_traversal_wraps_and_exits(network):
    # A -> B circulates three quarters of the ring, wrapping past arc zero
    arr = arrivals_from([(1.0, "A", "B", "jeepney")])
    world = kernel.WorldState(network, schemes.get_scheme("t0"), arr)
    world.run(80.0)
    assert world.counts["done"] == 1
    trip = world.trips()[0]
    travel = trip.exit_time_s - trip.entry_time_s
    assert travel == pytest.approx(trip.free_flow_s, abs=1.0)


def test_all_routes_complete_on_empty_network(network):
    routes = [(o, d) for o in "ABC" for d in "ABC" if o != d]
    arr = arrivals_from([(1.0 + 40 * k, o, d, "taxi") for k, (o, d) in enumerate(routes)])
    world = kernel.WorldState(network, schemes.get_scheme("t0"), arr)
    world.run(300.0)
    assert world.counts["done"] == 6
    for trip in world.trips():
        assert trip.exit_time_s - trip.entry_time_s <= trip.free_flow_s + 1.0


def test_follower_keeps_a_nonnegative_gap_behind_a_slow_leader(network):
    placements = [
        kernel.Placement("A", "C", "tricycle", kernel.lane_id_in("A"), 40.0, 6.9),
        kernel.Placement("A", "C", "taxi", kernel.lane_id_in("A"), 5.0, 13.9),
    ]
    world = kernel.WorldState.scripted(network, schemes.get_scheme("t0"), placements)
    world.run(20.0)
    assert world.audits["min_gap_m"] >= 0.0


def test_queue_forms_and_discharges_with_entry_metering(network):
    # a burst of arrivals on one approach: all eventually served, no collisions
    arr = arrivals_from([(float(k), "B", "A", "jeepney") for k in range(12)])
    world = kernel.WorldState(network, schemes.get_scheme("t0"), arr)
    world.run(220.0)
    assert world.counts["done"] == 12
    assert world.audits["min_gap_m"] >= 0.0
    # entry clearances are spaced by at least the follow-up time: with
    # twelve vehicles the last exit cannot precede 11 * t_f
    exits = sorted(t.exit_time_s for t in world.trips())
    assert exits[-1] - 1.0 > 11 * JEEPNEY.follow_up_s


def test_lane_redesignation_limits_spawn_lanes(network):
    # t3 leaves a single inbound lane at A: a simultaneous burst stacks up
    arr = arrivals_from([(float(k) * 0.5, "A", "C", "jeepney") for k in range(10)])
    w_t0 = kernel.WorldState(network, schemes.get_scheme("t0"), arr)
    w_t3 = kernel.WorldState(network, schemes.get_scheme("t3"), arr)
    for w in (w_t0, w_t3):
        w.run(12.0)
    lanes_used_t0 = {w_t0.agent(i).lane for i in range(10) if w_t0.agent(i).lane >= 0}
    lanes_used_t3 = {w_t3.agent(i).lane for i in range(10) if w_t3.agent(i).lane >= 0}
    assert kernel.lane_id_in("A", 1) in lanes_used_t0
    assert lanes_used_t3 <= {kernel.lane_id_in("A", 0), eng.RING_LANE, kernel.lane_id_out("C"), kernel.lane_id_out("C", 1)}


def test_world_rejects_unsorted_arrivals(network):
    arr = ArrivalStream(
        times=np.array([5.0, 1.0]),
        origins=np.array([0, 1]),
        destinations=np.array([1, 0]),
        vtypes=np.array([0, 0]),
    )
    with pytest.raises(kernel.KernelError):
        kernel.WorldState(network, schemes.get_scheme("t0"), arr)


def test_collision_error_carries_diagnostics():
    err = kernel.CollisionError(4, 9, 123.4)
    assert err.agent_i == 4 and err.agent_j == 9
    assert "123.4" in str(err)


def test_unsupported_cycle_shape_rejected(network):
    bad = schemes.TrafficScheme(
        "t9x",
        cycle=schemes.SignalCycle(phases=((frozenset({"A"}), 10.0), (frozenset({"C"}), 10.0))),
    )
    arr = arrivals_from([(1.0, "A", "C", "jeepney")])
    with pytest.raises(kernel.KernelError):
        kernel.WorldState(network, bad, arr)


@pytest.mark.skipif(not NUMBA_ENABLED, reason="numba disabled in this session")
def test_fallback_path_matches_numba_bit_for_bit(network, tmp_path):
    """The same scenario stepped through the interpreted kernels must give
    byte-identical trajectories."""
    arr = generate_arrivals(light_profile(), seed=123, duration_s=240.0)
    world = kernel.WorldState(network, schemes.get_scheme("t1"), arr)
    world.run(300.0)
    ref = tmp_path / "vf.npy"
    np.save(ref, world.VF)

    script = f"""
import numpy as np
from bicutan import kernel, net, schemes
from bicutan.demand import DemandProfile, generate_arrivals
profile = DemandProfile(
    rates={{"A": 0.06, "B": 0.05, "C": 0.05}},
    od_split={{"A": {{"B": 0.35, "C": 0.65}}, "B": {{"A": 0.55, "C": 0.45}}, "C": {{"A": 0.6, "B": 0.4}}}},
    type_probs={{"jeepney": 0.4, "bus": 0.1, "motorcycle": 0.2, "tricycle": 0.2, "taxi": 0.1}},
)
arr = generate_arrivals(profile, seed=123, duration_s=240.0)
world = kernel.WorldState(net.build_bicutan_network(), schemes.get_scheme("t1"), arr)
world.run(300.0)
ref = np.load({str(ref)!r})
assert np.array_equal(world.VF, ref, equal_nan=True), "fallback trajectories diverged"
from bicutan._jit import NUMBA_ENABLED
assert not NUMBA_ENABLED
print("fallback identical")
"""
    env = dict(os.environ, BICUTAN_NO_NUMBA="1")
    proc = subprocess.run(
        [sys.executable, "-c", script], env=env, capture_output=True, text=True
    )
    assert proc.returncode == 0, proc.stderr
    assert "fallback identical" in proc.stdout
