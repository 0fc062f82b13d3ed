"""
Residual correlation and optimal TTA weights
============================================

A model is evaluated under four test-time augmentations.  Two of them
(identity and a horizontal flip) make almost the same mistakes, one is
independent, and one is noisy.  We estimate the residual co-moment matrix,
compare plain averaging against the optimal weights, and look at how close
to singular the matrix is.
"""

# %%
import numpy as np

from tta_lab import (
    PredictionSet,
    SolverOptions,
    condition_diagnostics,
    estimate_gamma,
    solve_closed_form,
    solve_projected,
    uniform_weights,
    weighted_risk,
)

rng = np.random.default_rng(0)
n = 500
y = rng.normal(size=n)
shared = rng.normal(size=n)
preds = np.column_stack(
    [
        y + shared,
        y + shared + 0.05 * rng.normal(size=n),
        y + rng.normal(size=n),
        y + 2.5 * rng.normal(size=n),
    ]
)
data = PredictionSet(y, preds, ("identity", "hflip", "crop", "color_jitter"))

# %%
# Gamma[i, j] is the mean of (y - p_i)(y - p_j) over the calibration set.
gamma = estimate_gamma(data)
print(np.round(gamma.entries, 3))
print("condition number:", f"{condition_diagnostics(gamma):.3g}")

# %%
# Plain averaging vs the unconstrained optimum vs the simplex-constrained optimum.
raw = solve_closed_form(gamma)
proj = solve_projected(gamma)
print("uniform risk  :", weighted_risk(gamma, uniform_weights(4)))
print("raw weights   :", np.round(raw.weights.weights, 4), "risk", raw.achieved_risk)
print("simplex weights:", np.round(proj.weights.weights, 4), "risk", proj.achieved_risk)

# %%
# Near-duplicate augmentations make Gamma ill-conditioned.  Without a ridge the
# raw weights become large and of opposite sign; the relative ridge tames them.
dup = PredictionSet(y, np.column_stack([y + shared, y + shared + 1e-7 * rng.normal(size=n)]))
g2 = estimate_gamma(dup)
print("condition:", f"{condition_diagnostics(g2):.3g}")
for ridge in (0.0, 1e-8, 1e-4):
    r = solve_closed_form(g2, SolverOptions(ridge_lambda=ridge))
    print(f"ridge={ridge:g}: weights {np.round(r.weights.weights, 4)}, ill-conditioned={r.ill_conditioned}")
