import os
import sys
import time

sys.path.insert(0, "tests")
sys.path.insert(0, "src")

import numpy as np

from ecsplan.model import build_extensive_model, solve_model
from generators import random_planning_instance

n_wind = int(os.environ.get("WIND", "2"))
limit = float(os.environ.get("LIMIT", "30"))
times = []
for seed in range(1000, 1020):
    rng = np.random.default_rng(seed)
    n_wt = int(rng.integers(3, 7))
    inst = random_planning_instance(rng, n_wt=n_wt, max_cables=14, n_wind=n_wind)
    handle = build_extensive_model(inst)
    t0 = time.perf_counter()
    res = solve_model(handle, gap_tol=1e-6, time_limit=limit)
    dt = time.perf_counter() - t0
    times.append(dt)
    obj = "none" if res.objective is None else f"{res.objective:.4f}"
    print(
        f"seed={seed} n_wt={n_wt} cables={len(inst.cables)} "
        f"{res.status:10s} obj={obj:>12s} gap={res.gap:.1e} "
        f"nodes={res.nodes:5d} {dt:6.1f}s",
        flush=True,
    )
print(f"max {max(times):.1f}s  total {sum(times):.1f}s")
