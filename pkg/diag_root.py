import sys
import time

sys.path.insert(0, "tests")
sys.path.insert(0, "src")

import numpy as np

from ecsplan.model import build_extensive_model, warm_completion
from ecsplan.solver.lp import solve_lp
from ecsplan.solver.milp import _with_fixes
from generators import random_planning_instance

for n_wt, seed in ((5, 7), (6, 3)):
    rng = np.random.default_rng(seed)
    inst = random_planning_instance(rng, n_wt=n_wt)
    handle = build_extensive_model(inst)
    lp = handle.problem.lp
    t0 = time.perf_counter()
    root = solve_lp(lp)
    dt = time.perf_counter() - t0
    print(f"=== n_wt={n_wt} seed={seed}: root obj={root.objective:.4f} "
          f"iters={root.iterations} {dt*1000:.0f}ms rows={lp.n_rows} cols={lp.n_cols}")
    ws = warm_completion(handle)
    fixed = solve_lp(_with_fixes(lp, ws))
    print(f"  incumbent obj={fixed.objective:.4f} -> root gap "
          f"{(fixed.objective-root.objective)/fixed.objective:.3%}")

    names = lp.var_names
    c = lp.c
    x, xi = root.x, fixed.x
    # cost split by variable-name prefix
    for tag, pick in (("invest l/lt", ("l[", "lt[")),
                      ("curtail", ("P", "q", "curt"))):
        pass
    groups = {}
    for j in range(lp.n_cols):
        if c[j] == 0.0:
            continue
        stem = names[j].split("[")[0] if names else str(j)
        g = groups.setdefault(stem, [0.0, 0.0])
        g[0] += c[j] * x[j]
        g[1] += c[j] * xi[j]
    for stem, (rv, iv) in sorted(groups.items()):
        print(f"  cost[{stem}]: root={rv:10.3f} incumbent={iv:10.3f} diff={iv-rv:9.3f}")

    # fractional census by prefix
    prob = handle.problem
    frac = {}
    for j in prob.binary:
        v = x[int(j)]
        if min(v, 1 - v) > 1e-6:
            stem = names[int(j)].split("[")[0]
            frac[stem] = frac.get(stem, 0) + 1
    print(f"  fractional: {frac}")

    # worst fractional n/m variables with名称
    worst = sorted(
        ((min(x[int(j)], 1 - x[int(j)]), names[int(j)], x[int(j)])
         for j in prob.binary if min(x[int(j)], 1 - x[int(j)]) > 1e-6),
        reverse=True,
    )[:12]
    for f, nm, v in worst:
        print(f"    {nm} = {v:.4f}")
