import sys
import time

sys.path.insert(0, "tests")
sys.path.insert(0, "src")

import numpy as np

from ecsplan.model import build_extensive_model, solve_model, warm_completion
from ecsplan.solver.lp import solve_lp
from generators import random_planning_instance

for n_wt, seed in ((3, 7), (4, 7), (5, 7), (5, 11), (6, 3), (6, 7)):
    rng = np.random.default_rng(seed)
    inst = random_planning_instance(rng, n_wt=n_wt)
    handle = build_extensive_model(inst)
    ws = warm_completion(handle)
    if ws is None:
        print(f"n_wt={n_wt} seed={seed}: warm_completion None")
    else:
        # check LP feasibility of the fully fixed assignment
        lp = handle.problem.lp
        lo = lp.var_lower.copy()
        hi = lp.var_upper.copy()
        for j, v in ws.items():
            lo[j] = hi[j] = v
        from dataclasses import replace

        res = solve_lp(replace(lp, var_lower=lo, var_upper=hi))
        obj = "-" if res.objective is None else f"{res.objective:.4f}"
        print(f"n_wt={n_wt} seed={seed}: warm {res.status} obj={obj}")
    from ecsplan.solver.settings import SolverSettings

    import os
    probes = int(os.environ.get("PROBES", "0"))
    t0 = time.perf_counter()
    res = solve_model(
        handle, gap_tol=1e-6, time_limit=120.0,
        settings=SolverSettings(probe_limit=probes),
    )
    dt = time.perf_counter() - t0
    obj = "none" if res.objective is None else f"{res.objective:.4f}"
    print(
        f"  solve: {res.status} obj={obj} gap={res.gap:.2e} "
        f"nodes={res.nodes} {dt:.1f}s"
    )
