"""Which norm detects which alternative?

Runs two small power experiments against mean shifts delta * v: a dense
direction (v = all ones) and a sparse one (a handful of unit coordinates).
The l1 test wins on dense signals, the sup-norm test on sparse ones.
"""

import math

import numpy as np

from lpboot import ExperimentConfig, LpExponent, run_experiment

n, d = 120, 100

for kind, span in (("power-dense", 9.0 / math.sqrt(n * d)),
                   ("power-sparse", 3.0 * math.sqrt(math.log(d) / n))):
    cfg = ExperimentConfig(
        kind=kind, n=n, d=d, mc_reps=60, B=400, block=2,
        cv_folds=4, cv_grid_size=10, seed=21,
        p_list=(LpExponent.finite(1), LpExponent.infinity()),
        delta_grid=tuple(np.linspace(0.0, span, 7)),
    )
    rows = run_experiment(cfg)
    table = {}
    for row in rows:
        delta, p, power, _ = row.split(",")
        table.setdefault(float(delta), {})[p] = float(power)
    print(f"\n{kind} (n={n}, d={d}, {cfg.mc_reps} replicates):")
    print(f"{'delta':>10} {'power p=1':>10} {'power p=inf':>12}")
    for delta in sorted(table):
        print(f"{delta:>10.4f} {table[delta]['1']:>10.2f} {table[delta]['inf']:>12.2f}")

print("\nAt delta=0 both tests sit near the 5% level; as delta grows the")
print("norm matched to the signal geometry pulls ahead.")
