"""Detect redundant augmentation strategies under uniform averaging.

With equal weights the TTA risk is ``sum(Gamma) / m**2``.  Dropping strategy
``k`` does not increase it exactly when

    (2m - 1) * sum(Gamma) <= 2 m**2 * sum_{i != k} Gamma[i, k] + m**2 * Gamma[k, k]

Both sides differ by ``m**2 (m-1)**2 (risk_before - risk_after)``, so the
inequality and the direct risk comparison are the same test.  Indices are
0-based.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .core import GammaMatrix
from .errors import InvalidInput

RISK_TOL = 1e-12


@dataclass(frozen=True)
class PruneDecision:
    index_k: int
    lhs: float
    rhs: float
    removable: bool
    risk_before: float
    risk_after: float

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    def to_dict(self) -> dict:
        return asdict(self)


def _entries(gamma) -> np.ndarray:
    return gamma.entries if isinstance(gamma, GammaMatrix) else np.asarray(gamma, dtype=float)


def prune_check(gamma: GammaMatrix, k: int) -> PruneDecision:
    g = _entries(gamma)
    m = g.shape[0]
    if m < 2:
        raise InvalidInput("pruning needs at least two strategies")
    if not 0 <= k < m:
        raise IndexError(f"strategy index {k} out of range for m={m}")
    total = float(g.sum())
    col_k = float(g[:, k].sum())
    diag_k = float(g[k, k])
    off_k = col_k - diag_k
    lhs = (2 * m - 1) * total
    rhs = 2 * m * m * off_k + m * m * diag_k
    remaining = total - 2.0 * off_k - diag_k
    risk_before = total / m**2
    risk_after = remaining / (m - 1) ** 2
    # rhs - lhs is the risk gain scaled by m^2 (m-1)^2; keep ties on the removable side
    removable = rhs - lhs >= -RISK_TOL * m * m * (m - 1) ** 2
    return PruneDecision(
        index_k=k,
        lhs=lhs,
        rhs=rhs,
        removable=bool(removable),
        risk_before=risk_before,
        risk_after=risk_after,
    )


def greedy_prune(gamma: GammaMatrix, min_keep: int = 1) -> list[PruneDecision]:
    """Repeatedly drop the strategy whose removal helps most.

    At every step all surviving strategies are checked; the removable one
    with the largest ``rhs - lhs`` margin goes (lowest index on ties).  Stops
    when nothing is removable or ``min_keep`` strategies remain.  Returned
    decisions carry indices into the original matrix.
    """
    g = _entries(gamma)
    m = g.shape[0]
    if not 1 <= min_keep <= m:
        raise InvalidInput(f"min_keep must lie in [1, {m}], got {min_keep}")
    alive = list(range(m))
    removed: list[PruneDecision] = []
    while len(alive) > max(min_keep, 1) and len(alive) >= 2:
        sub = g[np.ix_(alive, alive)]
        checks = [prune_check(sub, j) for j in range(len(alive))]
        best = None
        for d in checks:
            if d.removable and (best is None or d.margin > best.margin):
                best = d
        if best is None:
            break
        original = alive.pop(best.index_k)
        removed.append(
            PruneDecision(
                index_k=original,
                lhs=best.lhs,
                rhs=best.rhs,
                removable=True,
                risk_before=best.risk_before,
                risk_after=best.risk_after,
            )
        )
    return removed


def surviving_indices(m: int, decisions: list[PruneDecision]) -> list[int]:
    dropped = {d.index_k for d in decisions}
    return [i for i in range(m) if i not in dropped]
