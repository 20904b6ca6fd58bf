"""Brackets for the FBL^p norm of a positively homogeneous function.

The norm is the supremum of ``(sum_j |f(x_j*)|^p)^(1/p)`` over tuples with
weak p-summing norm at most one.  Lower bounds come from explicit feasible
witness tuples; upper bounds from structural inequalities on the tree.
"""

from __future__ import annotations

import math

import numpy as np

from . import homfn as H
from ._search import ratio_search
from .estimate import Budget, ConsistencyError, NormEstimate
from .spaces import DimensionError, Space, dual_norm, extreme_points, norm
from .summing import lp_sum, reweight_tuple

__all__ = ["fbl_lower", "fbl_upper", "fbl_bracket", "witness_value", "normfn_upper"]


def witness_value(f: H.HomFn, T, p: float) -> float:
    """``(sum_j |f(x_j*)|^p)^(1/p)`` for a tuple ``T``."""
    T = np.atleast_2d(np.asarray(T, dtype=float))
    if T.shape[0] == 0:
        return 0.0
    return float(lp_sum(f.eval_batch(T), p))


def fbl_lower(space: Space, f: H.HomFn, p: float, budget: Budget | None = None, seed: int = 0,
              inject=()) -> NormEstimate:
    """Certified lower bound with a feasible witness tuple.

    The witness always competes against the singleton built from the
    uniform-norm maximizer, so the result dominates ``sup |f|`` on the ball.
    ``inject`` adds caller tuples (or ``(tuple, weak_upper)`` pairs).
    """
    budget = budget or Budget()
    if f.dim != space.dim:
        raise DimensionError(f"function dim {f.dim} != space dim {space.dim}")
    p = float(p)
    unif = H.uniform_norm_ball(f, space, budget, seed)
    extra = [unif.witness]

    def num_rows(Y):
        return (np.abs(f.eval_batch(Y)) ** p)[:, None]

    def num_cert(T):
        return witness_value(f, T, p)

    inj = [np.atleast_2d(unif.witness), *inject]
    res = ratio_search(space, p, num_rows, num_cert, budget, seed, extra, inj)
    if res.value == 0.0:
        return NormEstimate(0.0, math.inf, "search_lower", [], False)
    return NormEstimate(res.value, math.inf, "search_lower", res.witness, False)


def normfn_upper(space: Space, p: float) -> float:
    """Upper bound for the norm function via ``||x*|| <= sum_i |x*(e_i)| c_i``.

    With ``C = sup_{x in B_E} ||x||_{p'}`` (coordinates in the standard basis)
    one gets ``||nu|| <= C (sum_i ||e_i||^p)^(1/p)``; this is tight for
    ``l1^n`` at ``p = 1`` and for ``l2^n`` at ``p = 2``.
    """
    n = space.dim
    E = np.eye(n)
    ne = norm(space, E)
    if space.kind == "l2":
        # Euclidean unit vectors have l_{p'} norm at most n^{max(0, 1/p' - 1/2)}
        C = n ** max(0.0, 0.5 - 1.0 / p)
    else:
        V = extreme_points(space)
        C = float(np.max(np.max(np.abs(V), axis=1))) if p == 1 else float(
            np.max(lp_sum(V, p / (p - 1), axis=1))
        )
    return float(C * lp_sum(ne, p))


def _upper(space: Space, f: H.HomFn, p: float) -> float:
    from . import phmaps

    if isinstance(f, H.Delta):
        return float(norm(space, f.vec))
    if isinstance(f, H.Scale):
        return abs(f.c) * _upper(space, f.child, p)
    if isinstance(f, H.Abs):
        return _upper(space, f.child, p)
    if isinstance(f, (H.Sum, H.Sup)):
        return float(sum(_upper(space, a, p) for a in f.args))
    if isinstance(f, H.Inf):
        # |g ^ h| <= |g| + |h| always; |g ^ h| <= min when both are positive
        ups = [_upper(space, a, p) for a in f.args]
        if all(_is_nonneg(a) for a in f.args):
            return min(ups)
        return float(sum(ups))
    if isinstance(f, H.SupAbsDeltas):
        R = f.rows.toarray() if hasattr(f.rows, "toarray") else f.rows
        return float(np.sum(norm(space, R)))
    if isinstance(f, H.MuInduced):
        if f.weights.size == 0:
            return 0.0
        return float(lp_sum(norm(space, f.points) * f.weights ** (1.0 / p), p))
    if isinstance(f, H.RayIndicator):
        # a weak-p feasible tuple meets the ray at most through its total mass
        return float(1.0 / dual_norm(space, f.direction))
    if isinstance(f, H.NormFn):
        return normfn_upper(space, p)
    if isinstance(f, H.Composed):
        up = phmaps.phi_upper(f.map, p)
        return up * _upper(f.map.target, f.child, p) if math.isfinite(up) else math.inf
    return math.inf


def _is_nonneg(f: H.HomFn) -> bool:
    if isinstance(f, (H.Abs, H.NormFn, H.MuInduced, H.SupAbsDeltas, H.RayIndicator)):
        return True
    if isinstance(f, H.Scale):
        return f.c >= 0 and _is_nonneg(f.child)
    if isinstance(f, (H.Sum, H.Inf)):
        return all(_is_nonneg(a) for a in f.args)
    if isinstance(f, H.Sup):
        return any(_is_nonneg(a) for a in f.args)
    return False


def fbl_upper(space: Space, f: H.HomFn, p: float) -> NormEstimate:
    """Structural upper bound; ``inf`` when no pattern applies."""
    up = _upper(space, f, float(p))
    return NormEstimate(0.0, up, "structural_upper", None, True)


def fbl_bracket(space: Space, f: H.HomFn, p: float, budget: Budget | None = None, seed: int = 0,
                inject=()) -> NormEstimate:
    """Joint bracket; raises :class:`ConsistencyError` on ``lower > upper``."""
    up = fbl_upper(space, f, p).upper
    if up == 0.0:
        return NormEstimate(0.0, 0.0, "structural_upper", [], True)
    lo = fbl_lower(space, f, p, budget, seed, inject)
    unif = H.uniform_norm_ball(f, space, budget, seed)
    if lo.lower < unif.lower - 1e-9:
        raise ConsistencyError(f"FBL lower {lo.lower!r} below uniform norm {unif.lower!r}")
    if lo.lower > up * (1 + 1e-6):
        raise ConsistencyError(f"lower {lo.lower!r} exceeds upper {up!r}")
    return NormEstimate(min(lo.lower, up), up, "search_lower", lo.witness, math.isfinite(up))


def reweighted_injection(f: H.HomFn, witness_q, p: float, q: float):
    """A p-feasible tuple from a q-feasible witness, for p < q comparisons."""
    W = np.atleast_2d(np.asarray(witness_q, dtype=float))
    return reweight_tuple(W, f.eval_batch(W), p, q), 1.0
