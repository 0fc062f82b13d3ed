"""
Redundant augmentations and the error/ambiguity split
=====================================================

Under uniform weighting, dropping augmentation k helps exactly when its
removal inequality holds.  We run the greedy pruner, then decompose the
risk of the surviving ensemble into member error minus ambiguity.
"""

# %%
import numpy as np

from tta_lab import (
    PredictionSet,
    decompose,
    direct_risk,
    estimate_gamma,
    greedy_prune,
    prune_check,
    uniform_weights,
)

rng = np.random.default_rng(1)
n = 1000
y = rng.normal(size=n)
common = rng.normal(size=n)
cols = [y + common + 0.1 * rng.normal(size=n) for _ in range(3)]
cols += [y + 0.9 * rng.normal(size=n), y + 3.0 * rng.normal(size=n)]
data = PredictionSet(y, np.column_stack(cols), ("id", "flip", "shift", "crop", "noise"))
gamma = estimate_gamma(data)

# %%
for k, name in enumerate(data.augmentation_names):
    d = prune_check(gamma, k)
    print(f"{name:6s} lhs={d.lhs:9.3f} rhs={d.rhs:9.3f} removable={d.removable} "
          f"risk {d.risk_before:.4f} -> {d.risk_after:.4f}")

# %%
steps = greedy_prune(gamma, min_keep=2)
for d in steps:
    print("drop", data.augmentation_names[d.index_k], f"risk {d.risk_before:.4f} -> {d.risk_after:.4f}")
kept = [i for i in range(data.n_augmentations) if i not in {d.index_k for d in steps}]

# %%
# The surviving ensemble: average member error minus ambiguity equals the TTA risk.
sub = PredictionSet(y, data.predictions[:, kept], [data.augmentation_names[i] for i in kept])
rep = decompose(sub)
print("per-member error    :", np.round(rep.per_aug_error, 4))
print("per-member ambiguity:", np.round(rep.per_aug_ambiguity, 4))
print(f"{rep.weighted_error:.6f} - {rep.weighted_ambiguity:.6f} = {rep.total_risk:.6f}")
print("direct risk:", direct_risk(sub, uniform_weights(sub.n_augmentations)))
