"""Acceptance suite: one test per release criterion.

Run with ``pytest -v -s tests/test_acceptance.py`` to see the per-criterion
PASS lines.  The simulation grid (8 schemes x 4 volume levels x 10
replications at the full horizon) is executed once and shared.
"""

import math
import os
import shutil
import subprocess
import sys
import time

import numpy as np
import pytest

from bicutan import harness, kernel, net, schemes, stats
from bicutan._jit import NUMBA_ENABLED
from bicutan.demand import DemandProfile, generate_arrivals
from bicutan.metrics import vehicle_delay

from conftest import REFERENCE_CONFIG_PATH

ALL_SCHEMES = list(schemes.SCHEME_IDS)
VOLUME_LEVELS = (0.0, 0.1, 0.5, 1.0)


def ok(criterion: str) -> None:
    print(f"\nACCEPTANCE {criterion}: PASS")


@pytest.fixture(scope="module")
def reference_config():
    return harness.ScenarioConfig.from_file(REFERENCE_CONFIG_PATH)


@pytest.fixture(scope="module")
def grid(reference_config):
    """The full scenario suite: every scheme at every volume level, n = 10."""
    results = {}
    audits = {}
    wall_times = []
    for sid in ALL_SCHEMES:
        for vol in VOLUME_LEVELS:
            cfg = reference_config.replaced(scheme=sid, volume_increase=vol)
            outs = []
            for r in range(cfg.replications):
                t0 = time.perf_counter()
                outs.append(harness.run_replication(cfg, r))
                wall_times.append(time.perf_counter() - t0)
            results[(sid, vol)] = [o.result for o in outs]
            audits[(sid, vol)] = [o.audits for o in outs]
    return {"results": results, "audits": audits, "wall_times": wall_times}


# ---------------------------------------------------------------------------
# 1. statistics exactness: the observed-vs-simulated table


def test_criterion_1_rcbd_table_reproduction():
    # 10x2 data constructed to carry SS_block 1633.05, SS_treat 0.80,
    # SS_error 41.65 (see test_harness for the construction identities)
    z = np.arange(10) - 4.5
    block = math.sqrt(1633.05 / (2 * 82.5)) * z
    resid = math.sqrt((41.65 / 2) / 82.5) * z
    col_a = 50.0 + block - 0.2 + resid
    col_b = 50.0 + block + 0.2 - resid
    data = np.column_stack([col_a, col_b])

    table = stats.rcbd_anova(data)
    assert [r.df for r in table.rows] == [9, 1, 9, 19]
    assert table.row("Replication").ss == pytest.approx(1633.05, abs=1e-9)
    assert table.row("Treatment").ss == pytest.approx(0.80, abs=1e-9)
    assert table.error.ss == pytest.approx(41.65, abs=1e-9)
    assert table.row("Treatment").f == pytest.approx(0.173, abs=0.005)
    assert table.row("Treatment").p == pytest.approx(0.6873, abs=0.0005)

    stats.rcbd_anova(data)  # warm
    best = min(
        _timed(lambda: stats.rcbd_anova(data)) for _ in range(20)
    )
    assert best < 1e-3, f"rcbd_anova took {best * 1e3:.3f} ms"
    ok("1 (statistics exactness, rcbd < 1 ms)")


def _timed(fn):
    t0 = time.perf_counter()
    fn()
    return time.perf_counter() - t0


# ---------------------------------------------------------------------------
# 2. published ANOVA arithmetic


def test_criterion_2_anova_arithmetic():
    f1 = (37354.14 / 5) / (1264.61 / 54)
    assert f1 == pytest.approx(319.0, abs=0.2)
    assert stats.f_pvalue(f1, 5, 54) < 1e-4
    f2 = (917.46 / 5) / (20.49 / 54)
    assert f2 == pytest.approx(483.6, abs=0.5)
    assert stats.f_pvalue(f2, 5, 54) < 1e-4
    ok("2 (scheme-comparison ANOVA arithmetic)")


# ---------------------------------------------------------------------------
# 3. F/t identity


def test_criterion_3_f_t_identity():
    rng = np.random.default_rng(20131213)
    worst = 0.0
    for _ in range(1000):
        f = float(rng.exponential(2.5))
        d = int(rng.integers(1, 200))
        gap = abs(stats.f_pvalue(f, 1, d) - stats.t_pvalue(math.sqrt(f), d))
        worst = max(worst, gap)
    assert worst < 1e-10, f"identity gap {worst:.2e}"
    ok(f"3 (F/t identity, worst gap {worst:.1e})")


# ---------------------------------------------------------------------------
# 4. regression recovery of the published volume-response lines


VOLUME_RESPONSE_LINES = [
    (4.58, -2.69),
    (0.47, 21.92),
    (0.91, 34.82),
    (-0.15, 18.43),
    (-0.08, 21.02),
    (-0.11, 18.47),
]


def test_criterion_4_regression_recovery():
    xs = (0.0, 10.0, 50.0, 100.0)
    for slope, intercept in VOLUME_RESPONSE_LINES:
        fit = stats.linear_regression([(x, slope * x + intercept) for x in xs])
        assert fit.slope == pytest.approx(slope, abs=1e-9)
        assert fit.intercept == pytest.approx(intercept, abs=1e-9)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-9)
    # noisy data against the closed-form normal-equations oracle
    rng = np.random.default_rng(77)
    x = np.repeat(xs, 10)
    for slope, intercept in VOLUME_RESPONSE_LINES:
        y = slope * x + intercept + rng.normal(0, 2.0, x.size)
        fit = stats.linear_regression(list(zip(x, y)))
        X = np.column_stack([x, np.ones_like(x)])
        beta = np.linalg.solve(X.T @ X, X.T @ y)
        assert fit.slope == pytest.approx(beta[0], abs=1e-9)
        assert fit.intercept == pytest.approx(beta[1], abs=1e-9)
    ok("4 (regression recovery of all six published fits)")


# ---------------------------------------------------------------------------
# 5. DMRT properties


def test_criterion_5_dmrt_properties():
    t0 = time.perf_counter()
    g = stats.dmrt([(f"m{k}", 7.0) for k in range(6)], n=10, ms_error=3.0, df_error=54)
    assert set(g.letters) == {"a"}

    rng = np.random.default_rng(5)
    for _ in range(100):
        k = int(rng.integers(2, 9))
        vals = rng.normal(0, 4, k)
        ms = float(rng.uniform(0.3, 5))
        base = stats.dmrt([(f"g{j}", float(v)) for j, v in enumerate(vals)], 10, ms, 54)
        moved = stats.dmrt(
            [(f"g{j}", float(v + 777.7)) for j, v in enumerate(vals)], 10, ms, 54
        )
        assert base.letters == moved.letters

    hand = stats.dmrt(
        [("m1", 50.0), ("m2", 48.5), ("m3", 43.0), ("m4", 42.5), ("m5", 42.0), ("m6", 30.0)],
        n=10, ms_error=10.0, df_error=54,
    )
    assert hand.letters == ("a", "a", "b", "b", "b", "c")
    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0, f"DMRT checks took {elapsed:.2f} s"
    ok(f"5 (DMRT properties in {elapsed * 1e3:.0f} ms)")


# ---------------------------------------------------------------------------
# 6. kernel physics over the full scenario suite


def test_criterion_6_kernel_physics(grid, network):
    # lone vehicle from rest reaches its goal speed within t_min +- dt
    placements = [
        kernel.Placement("B", "A", "jeepney", kernel.lane_id_in("B"), 0.0, 0.0, cleared=False)
    ]
    world = kernel.WorldState.scripted(network, schemes.get_scheme("t0"), placements)
    goal = kernel.DEFAULT_VEHICLE_TYPES["jeepney"].v_goal_ms
    t_min = goal / kernel.DEFAULT_VEHICLE_TYPES["jeepney"].a_max
    steps = 0
    while world.agent(0).v < goal - 1e-9:
        world.step()
        steps += 1
        assert steps < 1000
    assert abs(steps * world.dt - t_min) <= world.dt + 1e-9

    # across all 8 schemes x 4 volumes x 10 replications: no collision
    # abort happened (the fixture would have raised), every red stop line
    # held, bumper gaps stayed nonnegative, and conservation held
    total_red = 0
    min_gap = math.inf
    for key, audit_list in grid["audits"].items():
        for aud in audit_list:
            total_red += aud["red_crossings"]
            min_gap = min(min_gap, aud["min_gap_m"])
    assert total_red == 0, f"{total_red} red-line crossings"
    assert min_gap >= 0.0, f"negative bumper gap {min_gap:.3f} m"

    walls = grid["wall_times"]
    mean_wall = float(np.mean(walls))
    if NUMBA_ENABLED:
        assert mean_wall < 10.0, f"mean {mean_wall:.1f} s per replication"
    ok(
        "6 (kernel physics: goal-speed convergence, zero red crossings, "
        f"zero collisions over {len(walls)} replications, "
        f"{mean_wall:.2f} s mean wall per replication)"
    )


# ---------------------------------------------------------------------------
# 7. end-to-end determinism of the compare pipeline


def test_criterion_7_compare_is_byte_deterministic(tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        proc = subprocess.run(
            [
                sys.executable,
                "-m",
                "bicutan.cli",
                "compare",
                "--config",
                REFERENCE_CONFIG_PATH,
                "--out",
                str(out),
            ],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0, proc.stderr
        outs.append(out)
    for name in (
        "results.csv",
        "report.txt",
        "plot_delta_by_scheme.csv",
        "plot_sigma_by_scheme.csv",
    ):
        a = (outs[0] / name).read_bytes()
        b = (outs[1] / name).read_bytes()
        assert a == b, f"{name} differs between identical runs"
    ok("7 (two compare runs byte-identical)")


# ---------------------------------------------------------------------------
# 8. qualitative findings on the shipped reference scenario


def test_criterion_8a_volume_trends_monotone(grid):
    for sid in ALL_SCHEMES:
        mean_d = [
            np.mean([r.mean_delay_s for r in grid["results"][(sid, v)]])
            for v in VOLUME_LEVELS
        ]
        mean_s = [
            np.mean([r.mean_speed_kph for r in grid["results"][(sid, v)]])
            for v in VOLUME_LEVELS
        ]
        assert all(a <= b + 1e-9 for a, b in zip(mean_d, mean_d[1:])), (
            f"{sid}: delay trend not nondecreasing: {mean_d}"
        )
        assert all(a >= b - 1e-9 for a, b in zip(mean_s, mean_s[1:])), (
            f"{sid}: speed trend not nonincreasing: {mean_s}"
        )
    ok("8a (delay nondecreasing and speed nonincreasing in volume, all schemes)")


def test_criterion_8b_signal_schemes_differ_from_baseline(grid):
    groups = [
        (sid, [r.mean_delay_s for r in grid["results"][(sid, 0.0)]])
        for sid in ("t0", "t1", "t2")
    ]
    table = stats.one_way_anova(groups)
    p = table.row("T").p
    assert p < 0.05, f"scheme effect not detected (p = {p})"
    ok(f"8b (signal schemes differ from the baseline, p = {stats.format_p(p)})")


def test_criterion_8c_best_scheme_rule_executes(grid):
    runsets = {
        sid: harness.RunSet(scheme_id=sid, results=grid["results"][(sid, 0.0)])
        for sid in ("t0", "t1", "t2", "t3", "t4", "t5")
    }
    cmp = harness.compare_schemes(runsets)
    assert cmp.best_scheme in runsets
    assert cmp.decision_rule
    assert ("unique" in cmp.decision_rule) or ("tie" in cmp.decision_rule) or (
        "disjoint" in cmp.decision_rule
    )
    ok(f"8c (best scheme {cmp.best_scheme}: {cmp.decision_rule})")


# ---------------------------------------------------------------------------
# 9. type-mix preservation under volume scaling


def test_criterion_9_type_mix_preserved(reference_config):
    profile = DemandProfile.from_dict(reference_config.demand)
    total_rate = sum(profile.rates.values())
    n_target = 100_000
    stream0 = generate_arrivals(profile, seed=1, duration_s=n_target / total_rate)
    stream1 = generate_arrivals(
        profile.scaled(1.0), seed=2, duration_s=n_target / (2 * total_rate)
    )
    assert len(stream0) >= 95_000 and len(stream1) >= 95_000
    f0 = np.bincount(stream0.vtypes, minlength=8) / len(stream0)
    f1 = np.bincount(stream1.vtypes, minlength=8) / len(stream1)
    worst = float(np.max(np.abs(f0 - f1)))
    assert worst < 0.01, f"type-mix deviation {worst:.4f}"
    ok(f"9 (type mix preserved under +100% volume, max deviation {worst:.4f})")
