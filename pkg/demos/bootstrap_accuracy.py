"""How close is each bootstrap to the real sampling distribution?

Simulates the law of the lp-statistic ||n^{-1/2} sum X_i||_p under a sparse
block covariance with uniform marginals, then measures the KS distance of
each engine's draws to that simulated truth: the oracle that knows the true
covariance, the multiplier bootstrap, the naive plug-in, and the
cross-validated thresholded plug-in.
"""

import numpy as np

from lpboot import ExperimentConfig, LpExponent, run_experiment

cfg = ExperimentConfig(
    kind="ks", n=120, d=100, mc_reps=30, B=500, truth_reps=800,
    block=2, cv_folds=4, cv_grid_size=10, seed=5,
    p_list=(LpExponent.finite(1), LpExponent.finite(2),
            LpExponent.log_dim(), LpExponent.infinity()),
)
rows = run_experiment(cfg)

acc = {}
for row in rows:
    _, p, est, ks = row.split(",")
    acc.setdefault((est, p), []).append(float(ks))

print(f"median KS to the simulated truth over {cfg.mc_reps} replicates "
      f"(n={cfg.n}, d={cfg.d}):\n")
print(f"{'engine':>10} " + " ".join(f"{p}" for p in ("p=1  ", "p=2  ", "p=logd", "p=inf")))
for est in cfg.estimators:
    meds = [np.median(acc[(est, p.label)]) for p in cfg.p_list]
    print(f"{est:>10} " + " ".join(f"{m:.3f}" for m in meds))

print("\nFor small p the thresholded estimate closes most of the gap between")
print("the naive plug-in and the oracle; at p=logd and p=inf the statistic")
print("depends on far fewer covariance entries and all engines agree.")
