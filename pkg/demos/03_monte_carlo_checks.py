"""
Monte Carlo checks on equicorrelated errors
===========================================

Synthetic residuals with pairwise correlation rho let us watch the averaging
results directly: averaging never hurts, with independent errors it divides
the risk by m, the chance that dropping one strategy is harmless rises with
rho, and the augmentation-averaged empirical risk settles at sigma^2.
"""

# %%
import numpy as np

from tta_lab import (
    SimulationConfig,
    fig1_config_search,
    fig1_experiment,
    verify_consistency,
    verify_theorem1,
    verify_theorem2,
)

# %%
rep = verify_theorem1(SimulationConfig(m=8, rho=0.5, n_samples=200, n_trials=500))
print("averaging never worse:", rep.passed, "| mean risk ratio", round(rep.mean_ratio, 4))

# %%
rep = verify_theorem2(SimulationConfig(m=5, n_samples=100_000, n_trials=1))
print(f"ratio {rep.ratio:.4f} (expected {rep.expected_ratio}), SE {rep.standard_error:.4f}, pass={rep.passed}")

# %%
# Frequency with which removing strategy 0 does not increase the risk.
grid = tuple(np.round(np.linspace(0.0, 1.0, 11), 2)) + (0.33, 0.99)
out = fig1_experiment(SimulationConfig(m=10, n_samples=100, n_trials=1000, rho_grid=tuple(sorted(grid))))
for o in out:
    print(f"rho={o.rho:4.2f}  P(removable)={o.probability_holds:.3f}  " + "#" * int(50 * o.probability_holds))

# %%
# The experiment's strategy count and sequence length are free parameters;
# the frequencies depend on them strongly.
search = fig1_config_search(SimulationConfig(n_samples=100, n_trials=1000), m_values=(2, 5, 10, 20))
for m, probs in search.attempts:
    print("m =", m, {r: round(p, 3) for r, p in probs.items()})
for m in (2, 5, 20):
    probs = {o.rho: o.probability_holds
             for o in fig1_experiment(SimulationConfig(m=m, n_trials=1000, rho_grid=(0.33, 0.99)))}
    print("m =", m, {r: round(p, 3) for r, p in probs.items()})

# %%
rep = verify_consistency(SimulationConfig(m=4, rho=0.3, n_trials=100), [100, 400, 1600, 6400])
for n, d in zip(rep.n_grid, rep.mean_abs_deviation):
    print(f"N={n:5d}  mean |risk - sigma^2| = {d:.4f}   sqrt(N)*dev = {np.sqrt(n) * d:.3f}")
