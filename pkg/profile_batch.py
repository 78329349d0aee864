import sys
import time

sys.path.insert(0, "tests")
sys.path.insert(0, "src")

import numpy as np

from ecsplan.model import build_extensive_model, solve_model
from generators import random_planning_instance

rng = np.random.default_rng(20260825)
times = []
for trial in range(25):
    n_wt = int(rng.integers(3, 7))
    inst = random_planning_instance(rng, n_wt=n_wt, max_cables=14, n_wind=2)
    handle = build_extensive_model(inst)
    t0 = time.perf_counter()
    res = solve_model(handle, gap_tol=1e-6, time_limit=90.0)
    dt = time.perf_counter() - t0
    times.append(dt)
    obj = "none" if res.objective is None else f"{res.objective:.4f}"
    print(
        f"trial={trial:2d} n_wt={n_wt} cables={len(inst.cables)} "
        f"{res.status:10s} obj={obj:>12s} nodes={res.nodes:5d} {dt:6.1f}s",
        flush=True,
    )
print(f"max {max(times):.1f}s  total {sum(times):.1f}s")
