import os
import sys
import time

sys.path.insert(0, "tests")
sys.path.insert(0, "src")

import numpy as np

from ecsplan.model import build_extensive_model, warm_completion
from ecsplan.solver.lp import solve_lp
from ecsplan.solver.milp import _with_fixes
from generators import random_planning_instance

seed = int(os.environ.get("SEED", "1003"))
for n_wind in (2, 3):
    rng = np.random.default_rng(seed)
    n_wt = int(rng.integers(3, 7))
    inst = random_planning_instance(rng, n_wt=n_wt, max_cables=14, n_wind=n_wind)
    handle = build_extensive_model(inst)
    lp = handle.problem.lp
    t0 = time.perf_counter()
    root = solve_lp(lp)
    dt = time.perf_counter() - t0
    ws = warm_completion(handle)
    if ws is None:
        print(f"wind={n_wind}: warm None")
        continue
    t1 = time.perf_counter()
    fixed = solve_lp(_with_fixes(lp, ws))
    dt_fixed = time.perf_counter() - t1
    gap = (fixed.objective - root.objective) / fixed.objective
    print(
        f"wind={n_wind} n_wt={n_wt} cables={len(inst.cables)} "
        f"rows={lp.n_rows} cols={lp.n_cols}: root={root.objective:.3f} "
        f"({root.iterations} it, {dt*1000:.0f}ms) warm={fixed.objective:.3f} "
        f"({dt_fixed*1000:.0f}ms) root-gap={gap:.2%}"
    )
    # one re-solve from root basis with a single binary fixed (node cost probe)
    j = int(handle.problem.binary[0])
    t2 = time.perf_counter()
    child = solve_lp(_with_fixes(lp, {j: 0.0}), warm_basis=root.basis)
    dt2 = time.perf_counter() - t2
    print(f"  child re-solve: {child.status} {child.iterations} it {dt2*1000:.0f}ms")
