import collections
import io
import os

import numpy as np
import pytest

from bicutan import demand
from bicutan.demand import (
    DemandError,
    DemandProfile,
    ObservationError,
    estimate_demand,
    generate_arrivals,
    ingest_observations,
)

OBSERVATIONS_SAMPLE = os.path.join(
    os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
    "data",
    "observations_sample.csv",
)

HEADER = "plate,vtype,entry,exit,entry_time_s,exit_time_s\n"


def make_profile(rate_a=0.1, rate_b=0.1, rate_c=0.1, vplus=0.0):
    return DemandProfile(
        rates={"A": rate_a, "B": rate_b, "C": rate_c},
        od_split={
            "A": {"B": 0.4, "C": 0.6},
            "B": {"A": 0.5, "C": 0.5},
            "C": {"A": 0.7, "B": 0.3},
        },
        type_probs={"jeepney": 0.5, "bus": 0.2, "motorcycle": 0.3},
        volume_scale=vplus,
    )


def test_ingest_single_row():
    records = ingest_observations(HEADER + "JPX123,jeepney,A,C,120.0,236.0\n")
    assert len(records) == 1
    r = records[0]
    assert r.travel_time_s == pytest.approx(116.0)
    assert (r.entry, r.exit, r.vtype) == ("A", "C", "jeepney")


def test_ingest_rejects_same_entry_exit_with_row_number():
    text = HEADER + "AAA111,jeepney,A,C,1.0,5.0\nBBB222,bus,B,B,2.0,9.0\n"
    with pytest.raises(ObservationError, match="row 2"):
        ingest_observations(text)


def test_ingest_rejects_malformed_timestamp():
    with pytest.raises(ObservationError, match="row 1.*timestamp"):
        ingest_observations(HEADER + "AAA,jeepney,A,C,noon,236.0\n")


def test_ingest_rejects_unknown_point_and_type():
    with pytest.raises(ObservationError, match="row 1"):
        ingest_observations(HEADER + "AAA,jeepney,X,C,1.0,2.0\n")
    with pytest.raises(ObservationError, match="unknown vehicle type"):
        ingest_observations(HEADER + "AAA,carabao,A,C,1.0,2.0\n")


def test_ingest_rejects_exit_before_entry():
    with pytest.raises(ObservationError, match="row 1"):
        ingest_observations(HEADER + "AAA,jeepney,A,C,100.0,90.0\n")


def test_ingest_requires_header():
    with pytest.raises(ObservationError, match="header"):
        ingest_observations(io.StringIO("JPX123,jeepney,A,C,120.0,236.0\n"))


def test_ingest_shipped_sample_fixture():
    records = ingest_observations(OBSERVATIONS_SAMPLE)
    assert len(records) == 3
    counts = collections.Counter(r.vtype for r in records)
    assert counts["jeepney"] / len(records) == pytest.approx(2 / 3)
    assert counts["bus"] / len(records) == pytest.approx(1 / 3)


def _records(origin_counts, vtype="jeepney"):
    rows = []
    k = 0
    for origin, n in origin_counts.items():
        dest = "B" if origin != "B" else "C"
        for _ in range(n):
            rows.append(
                demand.ObservationRecord(f"P{k}", vtype, origin, dest, float(k), float(k) + 30.0)
            )
            k += 1
    return rows


def test_estimate_rates_are_counts_over_horizon():
    records = _records({"A": 360, "B": 10, "C": 10})
    profile = estimate_demand(records, horizon_s=3600.0)
    assert profile.rates["A"] == pytest.approx(0.1)


def test_estimate_all_jeepney_type_distribution():
    profile = estimate_demand(_records({"A": 5, "B": 5, "C": 5}), horizon_s=100.0)
    assert profile.type_probs == {"jeepney": 1.0}


def test_estimate_matches_hand_count_oracle():
    rows = [
        demand.ObservationRecord("p1", "jeepney", "A", "B", 0.0, 30.0),
        demand.ObservationRecord("p2", "jeepney", "A", "C", 1.0, 31.0),
        demand.ObservationRecord("p3", "bus", "A", "C", 2.0, 32.0),
        demand.ObservationRecord("p4", "taxi", "B", "A", 3.0, 33.0),
        demand.ObservationRecord("p5", "jeepney", "B", "C", 4.0, 34.0),
        demand.ObservationRecord("p6", "tricycle", "C", "A", 5.0, 35.0),
    ]
    profile = estimate_demand(rows, horizon_s=600.0)
    # independent hand count
    assert profile.rates == {"A": 3 / 600, "B": 2 / 600, "C": 1 / 600}
    assert profile.od_split["A"] == {"B": 1 / 3, "C": 2 / 3}
    assert profile.od_split["B"] == {"A": 1 / 2, "C": 1 / 2}
    assert profile.od_split["C"] == {"A": 1.0}
    counter = collections.Counter(r.vtype for r in rows)
    for name, k in counter.items():
        assert profile.type_probs[name] == pytest.approx(k / 6)


def test_estimate_requires_every_origin():
    with pytest.raises(DemandError, match="origin C"):
        estimate_demand(_records({"A": 5, "B": 5}), horizon_s=100.0)
    with pytest.raises(DemandError):
        estimate_demand([], horizon_s=100.0)


def test_profile_validates_probabilities():
    with pytest.raises(DemandError):
        DemandProfile(
            rates={"A": 0.1, "B": 0.1, "C": 0.1},
            od_split={"A": {"B": 0.6, "C": 0.6}, "B": {"A": 1.0}, "C": {"A": 1.0}},
            type_probs={"jeepney": 1.0},
        )
    with pytest.raises(DemandError):
        make_profile(rate_a=0.0)


def test_generate_same_seed_identical():
    p = make_profile()
    a = generate_arrivals(p, seed=11, duration_s=500.0)
    b = generate_arrivals(p, seed=11, duration_s=500.0)
    assert np.array_equal(a.times, b.times)
    assert np.array_equal(a.origins, b.origins)
    assert np.array_equal(a.destinations, b.destinations)
    assert np.array_equal(a.vtypes, b.vtypes)
    c = generate_arrivals(p, seed=12, duration_s=500.0)
    assert not np.array_equal(a.times, c.times)


def test_generate_sorted_and_bounded():
    arr = generate_arrivals(make_profile(), seed=3, duration_s=800.0)
    assert np.all(np.diff(arr.times) >= 0)
    assert arr.times[-1] < 800.0
    assert arr.times[0] >= 0.0


def test_generate_poisson_mean_scales_with_volume():
    # V+ = 0 vs V+ = 1 at lambda = 0.1 veh/s per origin over 3600 s
    n0, n1 = [], []
    for seed in range(200):
        n0.append(len(generate_arrivals(make_profile(), seed=seed, duration_s=3600.0)))
        n1.append(
            len(generate_arrivals(make_profile(vplus=1.0), seed=seed, duration_s=3600.0))
        )
    mean0, mean1 = np.mean(n0), np.mean(n1)
    # three origins at 0.1 veh/s -> 1080 and 2160 expected
    assert abs(mean0 - 1080) < 3 * np.sqrt(1080)
    assert abs(mean1 - 2160) < 3 * np.sqrt(2160)


def test_generate_preserves_type_distribution_under_scaling():
    p0 = make_profile(vplus=0.0)
    p1 = make_profile(vplus=1.0)
    # run until ~1e5 draws each
    a0 = generate_arrivals(p0, seed=5, duration_s=1e5 / 0.3)
    a1 = generate_arrivals(p1, seed=6, duration_s=1e5 / 0.6)
    assert len(a0) > 90_000 and len(a1) > 90_000
    for stream in (a0, a1):
        freqs = np.bincount(stream.vtypes, minlength=8) / len(stream)
        for name, prob in p0.type_probs.items():
            idx = demand.VEHICLE_TYPE_NAMES.index(name)
            assert abs(freqs[idx] - prob) < 0.01
    f0 = np.bincount(a0.vtypes, minlength=8) / len(a0)
    f1 = np.bincount(a1.vtypes, minlength=8) / len(a1)
    assert np.max(np.abs(f0 - f1)) < 0.01


def test_estimate_recovers_generated_profile():
    profile = make_profile(rate_a=0.15, rate_b=0.08, rate_c=0.1)
    arr = generate_arrivals(profile, seed=21, duration_s=20_000.0)
    records = [
        demand.ObservationRecord(str(i), a.vtype, a.origin, a.destination, a.time_s, a.time_s + 25.0)
        for i, a in enumerate(arr)
    ]
    est = estimate_demand(records, horizon_s=20_000.0)
    for o in "ABC":
        assert est.rates[o] == pytest.approx(profile.rates[o], rel=0.05)
        for d, p in profile.od_split[o].items():
            assert est.od_split[o][d] == pytest.approx(p, abs=0.02)
    for name, p in profile.type_probs.items():
        assert est.type_probs[name] == pytest.approx(p, abs=0.02)


def test_profile_round_trips_through_dict():
    p = make_profile(vplus=0.5)
    assert DemandProfile.from_dict(p.to_dict(), volume_scale=0.5) == p
