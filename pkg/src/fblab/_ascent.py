"""Derivative-free local ascent on the dual unit sphere."""

from __future__ import annotations

import numpy as np

from .spaces import Space, dual_norm


def sphere_ascent(space: Space, objective, starts, steps: int, rng, proposals: int = 6,
                  sigma0: float = 0.3, sigma_min: float = 1e-7):
    """Hill-climb ``objective`` over the dual sphere from each start.

    ``objective`` maps a ``(k, dim)`` batch to ``(k,)`` values.  Each step draws
    ``proposals`` Gaussian perturbations per start with a geometrically
    shrinking radius, renormalizes them to the sphere, and keeps improvements.
    Returns ``(points, values)`` of the final iterates.
    """
    X = np.array(starts, dtype=float)
    X = X / dual_norm(space, X)[:, None]
    vals = objective(X)
    r, n = X.shape
    if steps <= 0:
        return X, vals
    decay = (sigma_min / sigma0) ** (1.0 / max(steps - 1, 1))
    sigma = sigma0
    for _ in range(steps):
        cand = X[:, None, :] + sigma * rng.standard_normal((r, proposals, n))
        cand = cand.reshape(r * proposals, n)
        nrm = dual_norm(space, cand)
        nrm[nrm == 0] = 1.0
        cand = cand / nrm[:, None]
        cv = objective(cand).reshape(r, proposals)
        best = np.argmax(cv, axis=1)
        bv = cv[np.arange(r), best]
        better = bv > vals
        if np.any(better):
            X[better] = cand.reshape(r, proposals, n)[better, best[better]]
            vals = np.where(better, bv, vals)
        sigma *= decay
    return X, vals
