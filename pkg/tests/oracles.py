"""Independent reference implementations used to certify the library.

Nothing here shares code with the package: the projection oracles use
Michelot's finite active-set scheme and plain bisection on the dual
threshold, the prox oracle is a grid search with local refinement, and
spectral questions go to dense SVD.  Keeping these separate is the
point; they stay deliberately naive.
"""

import numpy as np


def project_l1_michelot(a, radius):
    """Projection onto the l1 ball via Michelot's simplex algorithm.

    Reduces to simplex projection of the magnitudes, then restores the
    signs.  Finite: each sweep removes at least one index or stops.
    """
    a = np.asarray(a, dtype=float)
    if np.sum(np.abs(a)) <= radius:
        return a.copy()
    if radius == 0.0:
        return np.zeros_like(a)
    mag = np.abs(a)
    active = np.ones(a.size, dtype=bool)
    while True:
        count = int(active.sum())
        shift = (mag[active].sum() - radius) / count
        keep = mag > shift
        keep &= active
        if int(keep.sum()) == count:
            break
        active = keep
    out = np.sign(a) * np.maximum(mag - shift, 0.0)
    return out


def project_l1_bisection(a, radius, iters=200):
    """Projection via bisection on the threshold of the dual equation.

    Solves ``sum_i max(|a_i| - mu, 0) = radius`` for ``mu`` by pure
    interval halving; no sorting, no cumulative sums.
    """
    a = np.asarray(a, dtype=float)
    mag = np.abs(a)
    if mag.sum() <= radius:
        return a.copy()
    lo, hi = 0.0, float(mag.max())
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if np.maximum(mag - mid, 0.0).sum() > radius:
            lo = mid
        else:
            hi = mid
    mu = 0.5 * (lo + hi)
    return np.sign(a) * np.maximum(mag - mu, 0.0)


def scalar_shrink_oracle(a_i, tau, width=None, coarse=20001, refine_rounds=3):
    """Brute-force argmin of ``(x - a_i)^2 + 2*tau*|x|`` on a refined grid."""
    if width is None:
        width = abs(a_i) + 2.0 * tau + 1.0
    center, half = 0.0, width
    best = None
    for _ in range(refine_rounds):
        grid = np.linspace(center - half, center + half, coarse)
        values = (grid - a_i) ** 2 + 2.0 * tau * np.abs(grid)
        best = grid[np.argmin(values)]
        center, half = best, 4.0 * (2.0 * half / (coarse - 1))
    return float(best)


def dense_singular_values(matrix):
    return np.linalg.svd(np.asarray(matrix, dtype=float), compute_uv=False)


def dense_spectral_norm(matrix):
    return float(dense_singular_values(matrix)[0])
