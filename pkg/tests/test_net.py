import math

import pytest

from bicutan import net, schemes
from bicutan.kernel import DEFAULT_VEHICLE_TYPES


def test_default_network_geometry(network):
    assert network.ring_diameter_m == 34.0
    radius = 17.0
    # center distances recovered from approach length + ring radius
    assert network.approach_length_m["A"] + radius == pytest.approx(106.0)
    assert network.approach_length_m["B"] + radius == pytest.approx(150.0)
    assert network.approach_length_m["C"] + radius == pytest.approx(100.0)


def test_exactly_six_routes_all_ordered_pairs(network):
    pairs = {(r.origin, r.destination) for r in network.routes}
    assert len(network.routes) == 6
    assert pairs == {(o, d) for o in "ABC" for d in "ABC" if o != d}


def test_routes_are_connected_end_to_end(network):
    for r in network.routes:
        assert r.segments[0].from_node == r.origin
        assert r.segments[-1].to_node == r.destination
        for seg, nxt in zip(r.segments, r.segments[1:]):
            assert seg.to_node == nxt.from_node


def test_ring_arcs_are_ccw_arc_lengths(network):
    radius = 17.0
    # B -> A is the quarter turn, A -> C the half, A -> B the three-quarter
    assert network.ring_arc_m[("B", "A")] == pytest.approx(math.pi * radius / 2)
    assert network.ring_arc_m[("A", "C")] == pytest.approx(math.pi * radius)
    assert network.ring_arc_m[("A", "B")] == pytest.approx(3 * math.pi * radius / 2)


def test_stop_lines_sit_upstream_of_the_ring(network):
    for a in net.APPROACHES:
        assert network.stop_lines[a] == pytest.approx(network.approach_length_m[a] - 5.0)


def test_ab_link_defaults_to_two_plus_two(network):
    link = network.link("AB")
    assert (link.lanes_forward, link.lanes_backward) == (2, 2)
    counts = network.lane_counts()
    assert counts["A"] == (2, 2)
    assert counts["B"] == (2, 2)
    assert counts["C"] == (2, 2)


def test_zero_lane_ab_link_is_unroutable():
    geo = net.NetworkGeometryConfig(ab_lanes_forward=0, ab_lanes_backward=0)
    with pytest.raises(net.NetworkError, match="at least one lane|unroutable"):
        net.build_bicutan_network(geo)
    # a one-way AB road leaves every route toward A without an outbound lane
    geo = net.NetworkGeometryConfig(ab_lanes_forward=1, ab_lanes_backward=0)
    with pytest.raises(net.NetworkError, match="unroutable"):
        net.build_bicutan_network(geo)


@pytest.mark.parametrize(
    "field,value",
    [
        ("ring_diameter_m", 0.0),
        ("ring_diameter_m", -3.0),
        ("ab_lanes_forward", 7),
    ],
)
def test_bad_geometry_rejected(field, value):
    geo = net.NetworkGeometryConfig(**{field: value})
    with pytest.raises(net.NetworkError):
        net.build_bicutan_network(geo)


def test_approach_shorter_than_ring_radius_rejected():
    geo = net.NetworkGeometryConfig(approach_distance_m={"A": 10.0, "B": 150.0, "C": 100.0})
    with pytest.raises(net.NetworkError):
        net.build_bicutan_network(geo)


class _Goal:
    def __init__(self, kph):
        self.v_goal_kph = kph


def test_free_flow_time_single_segment(network):
    route = net.Route(
        "A", "C", (net.RouteSegment("seg", "A", "C", 100.0, 60.0),)
    )
    assert net.free_flow_time(network, route, _Goal(36.0)) == pytest.approx(10.0)


def test_free_flow_time_limit_binds(network):
    route = net.Route(
        "A", "C", (net.RouteSegment("seg", "A", "C", 100.0, 36.0),)
    )
    # goal above the limit: the limit binds
    assert net.free_flow_time(network, route, _Goal(80.0)) == pytest.approx(10.0)


def test_free_flow_time_default_route_matches_hand_sum(network):
    # independent sum over the shipped geometry table
    jeepney = DEFAULT_VEHICLE_TYPES["jeepney"]
    v_goal = 40.0 / 3.6
    v_ring = 25.0 / 3.6  # ring limit binds below the jeepney goal speed
    expected = (
        network.approach_length_m["A"] / v_goal
        + network.ring_arc_m[("A", "C")] / v_ring
        + network.approach_length_m["C"] / v_goal
    )
    got = net.free_flow_time(network, ("A", "C"), jeepney)
    assert got == pytest.approx(expected, rel=1e-12)
    assert got > 0


def test_free_flow_time_monotone_in_goal_speed_and_length(network):
    times = [
        net.free_flow_time(network, ("A", "C"), _Goal(kph)) for kph in (10, 20, 40, 80)
    ]
    assert all(a >= b for a, b in zip(times, times[1:]))
    short = net.free_flow_time(network, ("B", "A"), _Goal(40.0))  # 89+26.7+... shortest arc
    long = net.free_flow_time(network, ("B", "C"), _Goal(40.0))  # same legs, longer arc
    assert long > short


def test_free_flow_time_unknown_route(network):
    with pytest.raises(net.NetworkError):
        net.free_flow_time(network, ("A", "A"), _Goal(40.0))


def test_active_lane_config_baseline_schemes(network):
    for sid in ("t0", "t1", "t2"):
        scheme = schemes.get_scheme(sid)
        cfg = net.active_lane_config(network, scheme, 100.0)
        assert cfg.lanes(network.link("AB")) == (2, 2)


def test_active_lane_config_t3_redesignates(network):
    scheme = schemes.get_scheme("t3")
    cfg = net.active_lane_config(network, scheme, 1000.0)
    assert cfg.lanes(network.link("AB")) == (1, 3)
    counts = network.lane_counts(cfg)
    assert counts["A"] == (1, 3)
    assert counts["B"] == (3, 1)
    assert counts["C"] == (2, 2)


def test_active_lane_config_respects_window(network):
    scheme = schemes.get_scheme("t3").with_window((600.0, 1200.0))
    assert net.active_lane_config(network, scheme, 599.9).lanes(network.link("AB")) == (2, 2)
    assert net.active_lane_config(network, scheme, 600.0).lanes(network.link("AB")) == (1, 3)
    assert net.active_lane_config(network, scheme, 1199.9).lanes(network.link("AB")) == (1, 3)
    assert net.active_lane_config(network, scheme, 1200.0).lanes(network.link("AB")) == (2, 2)


def test_lane_config_piecewise_constant_between_boundaries(network):
    scheme = schemes.get_scheme("t4").with_window((100.0, 200.0))
    inside = [net.active_lane_config(network, scheme, t) for t in (100.0, 150.0, 199.9)]
    outside = [net.active_lane_config(network, scheme, t) for t in (0.0, 99.9, 200.0, 500.0)]
    assert all(c == inside[0] for c in inside)
    assert all(c == outside[0] for c in outside)


def test_routes_stay_connected_under_every_scheme_config(network):
    for scheme in schemes.scheme_catalog():
        for t in (0.0, 30.0, 61.0, 3599.0):
            cfg = net.active_lane_config(network, scheme, t)
            counts = network.lane_counts(cfg)
            for r in network.routes:
                assert counts[r.origin][0] >= 1
                assert counts[r.destination][1] >= 1


def test_geometry_config_round_trips():
    geo = net.NetworkGeometryConfig(ring_diameter_m=40.0)
    assert net.NetworkGeometryConfig.from_dict(geo.to_dict()) == geo
