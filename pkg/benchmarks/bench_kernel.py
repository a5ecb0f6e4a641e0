#!/usr/bin/env python3
"""Benchmark the stepping engine: numba JIT vs the pure-numpy fallback.

Runs the same reference replication through both paths (the fallback in a
subprocess with BICUTAN_NO_NUMBA=1), checks that the trajectories agree
bit for bit, and reports the speedup.

Usage: python benchmarks/bench_kernel.py [--duration 600] [--repeats 3]
"""

import argparse
import json
import os
import subprocess
import sys
import tempfile
import time

REPO = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, os.path.join(REPO, "src"))

_WORKER = r"""
import json, sys, time
import numpy as np
from bicutan import harness, kernel
from bicutan._jit import NUMBA_ENABLED
from bicutan.demand import generate_arrivals

spec = json.loads(sys.argv[1])
cfg = harness.ScenarioConfig.from_file(spec["config"]).replaced(
    duration_s=spec["duration"], warmup_s=0.0
)
network = harness.build_network(cfg)
profile = harness.build_profile(cfg)
arrivals = generate_arrivals(profile, seed=cfg.base_seed, duration_s=cfg.horizon_s)

def build():
    return kernel.WorldState(network, harness.build_scheme(cfg), arrivals)

build().step(1)  # warm-up / JIT compile
times = []
world = None
for _ in range(spec["repeats"]):
    world = build()
    t0 = time.perf_counter()
    world.run(cfg.horizon_s)
    times.append(time.perf_counter() - t0)

np.save(spec["out"], world.VF)
print(json.dumps({"numba": NUMBA_ENABLED, "best_s": min(times), "times": times,
                  "done": world.counts["done"]}))
"""


def run_worker(config, duration, repeats, out_npy, disable_numba):
    env = dict(os.environ)
    if disable_numba:
        env["BICUTAN_NO_NUMBA"] = "1"
    else:
        env.pop("BICUTAN_NO_NUMBA", None)
    spec = json.dumps(
        {"config": config, "duration": duration, "repeats": repeats, "out": out_npy}
    )
    proc = subprocess.run(
        [sys.executable, "-c", _WORKER, spec],
        env=env,
        capture_output=True,
        text=True,
        cwd=REPO,
    )
    if proc.returncode != 0:
        raise RuntimeError(proc.stderr)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--duration", type=float, default=600.0, help="simulated seconds")
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument(
        "--config", default=os.path.join(REPO, "configs", "reference.json")
    )
    args = parser.parse_args()

    import numpy as np

    print("=" * 64)
    print("KERNEL BENCHMARK: numba JIT vs pure-numpy fallback")
    print(f"scenario: {args.config}")
    print(f"simulated horizon: {args.duration:.0f} s, best of {args.repeats}")
    print("=" * 64)

    with tempfile.TemporaryDirectory() as tmp:
        jit_npy = os.path.join(tmp, "jit.npy")
        ic_npy = os.path.join(tmp, "interp.npy")
        jit = run_worker(args.config, args.duration, args.repeats, jit_npy, False)
        interp = run_worker(args.config, args.duration, args.repeats, ic_npy, True)
        # exit times of unfinished vehicles are NaN placeholders
        identical = np.array_equal(np.load(jit_npy), np.load(ic_npy), equal_nan=True)

    label_jit = "numba JIT" if jit["numba"] else "numba unavailable (interpreted)"
    print(f"{label_jit:34s} {jit['best_s'] * 1e3:10.1f} ms  ({jit['done']} trips)")
    print(f"{'pure-numpy fallback':34s} {interp['best_s'] * 1e3:10.1f} ms  ({interp['done']} trips)")
    if jit["numba"]:
        print(f"{'speedup':34s} {interp['best_s'] / jit['best_s']:10.1f} x")
    print(f"{'trajectories bit-identical':34s} {str(identical):>10s}")
    if not identical:
        sys.exit(1)


if __name__ == "__main__":
    main()
