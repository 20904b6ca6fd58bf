"""Weak p-summing norms of finite tuples of functionals.

For a tuple ``(x_1*, ..., x_m*)`` in ``E*``::

    ||(x_j*)||_{p,weak} = sup_{x in B_E} (sum_j |x_j*(x)|^p)^(1/p)

The objective is convex in ``x``, so on polyhedral balls (including l1 and
linf) it is maximized at a vertex and the value is exact.  On the Euclidean
ball the case ``p = 2`` is the top singular value, ``p = 1`` reduces to a
finite maximum over sign patterns, and tuples with orthogonal rows have a
closed form; everything else is searched.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .estimate import Budget, ConsistencyError, NormEstimate
from .spaces import DimensionError, Space, dual_norm, extreme_points

__all__ = [
    "FuncTuple",
    "SignCapError",
    "weak_p_norm",
    "weak_1_norm_signs",
    "weak_p_monotonicity_check",
    "weak_p_upper_batch",
    "witness_point",
    "lp_sum",
    "reweight_tuple",
    "NormEstimate",
    "Budget",
    "ConsistencyError",
]

_ORTHO_TOL = 1e-13
_SIGN_CHUNK = 1 << 14
# on l2 with p = 1 the sign formula is used up to this tuple length
_L2_SIGN_LIMIT = 16


class SignCapError(ValueError):
    """The tuple is too long for sign-pattern enumeration."""


@dataclass(frozen=True, eq=False)
class FuncTuple:
    """An immutable tuple of functionals over a common space.

    Estimates are cached per ``(p, method-relevant budget, seed)``; since the
    array is read-only the cache never goes stale.
    """

    space: Space
    funcs: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        X = np.array(self.funcs, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.ndim != 2 or X.shape[0] == 0:
            raise ValueError("a tuple needs at least one functional")
        if X.shape[1] != self.space.dim:
            raise DimensionError(f"functionals have length {X.shape[1]}, space has dim {self.space.dim}")
        if not np.all(np.isfinite(X)):
            raise ValueError("functionals must be finite")
        X.setflags(write=False)
        object.__setattr__(self, "funcs", X)

    def __len__(self):
        return self.funcs.shape[0]

    def weak(self, p: float, budget: Budget | None = None, seed: int = 0) -> NormEstimate:
        key = (float(p), budget, seed)
        if key not in self._cache:
            self._cache[key] = weak_p_norm(self.space, self, p, budget, seed)
        return self._cache[key]


def _as_matrix(space: Space, t) -> np.ndarray:
    if isinstance(t, FuncTuple):
        if t.space.dim != space.dim:
            raise DimensionError("tuple and space dimensions differ")
        return t.funcs
    return FuncTuple(space, t).funcs


def lp_sum(A: np.ndarray, p: float, axis: int = -1) -> np.ndarray:
    """``(sum |a|^p)^(1/p)`` along ``axis`` with the largest entry factored out.

    Factoring keeps one-term sums exact and avoids overflow.
    """
    A = np.abs(np.asarray(A, dtype=float))
    M = np.max(A, axis=axis, keepdims=True)
    safe = np.where(M > 0, M, 1.0)
    s = np.sum((A / safe) ** p, axis=axis) ** (1.0 / p)
    return np.squeeze(M, axis=axis) * s


def _check_p(p):
    if not (isinstance(p, (int, float)) and math.isfinite(p) and p >= 1):
        raise ValueError(f"p must be a finite real >= 1, got {p!r}")
    return float(p)


def weak_p_norm(space: Space, t, p: float, budget: Budget | None = None, seed: int = 0) -> NormEstimate:
    """The weak p-summing norm of a tuple as a certified interval."""
    p = _check_p(p)
    X = _as_matrix(space, t)
    budget = budget or Budget()
    if space.has_extreme_points:
        V = extreme_points(space)
        vals = lp_sum(X @ V.T, p, axis=0)
        i = int(np.argmax(vals))
        return NormEstimate(vals[i], vals[i], "exact_vertices", V[i])
    return _weak_l2(X, p, budget, seed)


def _weak_l2(X, p, budget, seed):
    m = X.shape[0]
    _, sv, vt = np.linalg.svd(X, full_matrices=False)
    sigma = float(sv[0])
    if sigma == 0:
        return NormEstimate(0.0, 0.0, "exact_svd", np.eye(X.shape[1])[0])
    if p == 2:
        v = vt[0]
        return NormEstimate(min(lp_sum(X @ v, 2), sigma), sigma, "exact_svd", v)
    G = X @ X.T
    r = np.sqrt(np.diag(G))
    off = G - np.diag(np.diag(G))
    if np.max(np.abs(off), initial=0.0) <= _ORTHO_TOL * sigma * sigma:
        return _weak_l2_orthogonal(X, r, p)
    if p == 1 and m <= min(_L2_SIGN_LIMIT, budget.sign_cap):
        return weak_1_norm_signs(Space(X.shape[1], "l2"), X, budget.sign_cap)
    return _weak_l2_search(X, p, budget, seed, sigma)


def _weak_l2_orthogonal(X, r, p):
    # rows x_j = r_j u_j with (u_j) orthonormal
    if p >= 2:
        j = int(np.argmax(r))
        value = float(r[j])
        v = X[j] / r[j]
    else:
        s = 2 * p / (2 - p)
        value = float(lp_sum(r, s))
        c = np.zeros_like(r)
        nz = r > 0
        c[nz] = r[nz] ** (p / (2 - p))
        c /= np.linalg.norm(c)
        v = (c[nz] / r[nz]) @ X[nz]
        v /= np.linalg.norm(v)
    lower = min(float(lp_sum(X @ v, p)), value)
    return NormEstimate(lower, value, "exact_svd", v)


def _structural_upper_l2(X, p, sigma, budget):
    m = X.shape[0]
    if p >= 2:
        return sigma
    up = m ** (1.0 / p - 0.5) * sigma
    if m <= budget.sign_cap:
        up = min(up, weak_1_norm_signs(Space(X.shape[1], "l2"), X, budget.sign_cap).upper)
    return up


def _weak_l2_search(X, p, budget, seed, sigma):
    """Multistart projected ascent of ``sum |x_j*(v)|^p`` on the sphere."""
    rng = np.random.default_rng(seed)
    n = X.shape[1]
    _, _, vt = np.linalg.svd(X, full_matrices=False)
    r = np.linalg.norm(X, axis=1)
    starts = [vt[0], *(X[r > 0] / r[r > 0, None])]
    k = max(budget.restarts - len(starts), 0)
    starts.extend(rng.standard_normal((k, n)))
    V = np.array(starts[: max(budget.restarts, 1)])
    V /= np.linalg.norm(V, axis=1, keepdims=True)

    def g(V):
        return np.sum(np.abs(V @ X.T) ** p, axis=1)

    vals = g(V)
    eta = np.full(len(V), budget.step)
    for _ in range(budget.steps):
        A = V @ X.T
        grad = (p * np.abs(A) ** (p - 1) * np.sign(A)) @ X
        gn = np.linalg.norm(grad, axis=1, keepdims=True)
        gn[gn == 0] = 1.0
        cand = V + eta[:, None] * grad / gn
        cand /= np.linalg.norm(cand, axis=1, keepdims=True)
        cv = g(cand)
        ok = cv > vals
        V[ok] = cand[ok]
        vals[ok] = cv[ok]
        eta = np.where(ok, np.minimum(eta * 1.5, 1.0), eta * 0.5)
        if np.all(eta < 1e-12):
            break
    i = int(np.argmax(vals))
    v = V[i]
    lower = float(lp_sum(X @ v, p))
    upper = max(_structural_upper_l2(X, p, sigma, budget), lower)
    return NormEstimate(lower, upper, "search_lower", v)


def _sign_patterns(m: int, start: int, stop: int) -> np.ndarray:
    """Patterns with first sign -1 in lexicographic order (``-1 < +1``)."""
    idx = np.arange(start, stop)
    bits = (idx[:, None] >> np.arange(m - 2, -1, -1)) & 1
    E = np.empty((len(idx), m))
    E[:, 0] = -1.0
    E[:, 1:] = 2.0 * bits - 1.0
    return E


def weak_1_norm_signs(space: Space, t, cap: int = 20) -> NormEstimate:
    """``sup_eps || sum_j eps_j x_j* ||`` by enumeration of sign patterns.

    Only patterns with ``eps_1 = -1`` are visited (``eps`` and ``-eps`` give
    the same norm), in lexicographic order, so the witness is the
    lexicographically smallest maximizing pattern.
    """
    X = _as_matrix(space, t)
    m = X.shape[0]
    if m > cap:
        raise SignCapError(f"tuple of length {m} exceeds the sign-pattern cap {cap}")
    total = 1 << (m - 1)
    best, best_eps = -1.0, None
    for a in range(0, total, _SIGN_CHUNK):
        E = _sign_patterns(m, a, min(a + _SIGN_CHUNK, total))
        vals = dual_norm(space, E @ X)
        i = int(np.argmax(vals))
        if vals[i] > best:
            best, best_eps = float(vals[i]), E[i].astype(int).tolist()
    return NormEstimate(best, best, "exact_signs", best_eps)


def witness_point(space: Space, t, est: NormEstimate) -> np.ndarray:
    """A point of ``B_E`` at which the tuple realizes ``est.lower``.

    Sign-pattern witnesses are turned into the maximizer of the signed sum.
    """
    X = _as_matrix(space, t)
    w = np.asarray(est.witness, dtype=float)
    if est.method != "exact_signs":
        return w
    s = w @ X
    if space.has_extreme_points:
        V = extreme_points(space)
        return V[int(np.argmax(V @ s))]
    ns = np.linalg.norm(s)
    return s / ns if ns > 0 else np.eye(space.dim)[0]


def weak_p_upper_batch(space: Space, T: np.ndarray, p: float, budget: Budget | None = None) -> np.ndarray:
    """Certified upper bounds on the weak p-norm for a batch ``(c, m, n)`` of tuples.

    Exact for spaces with extreme points and for ``l2`` with ``p = 2``.
    """
    T = np.asarray(T, dtype=float)
    if space.has_extreme_points:
        V = extreme_points(space)
        return np.max(lp_sum(T @ V.T, p, axis=1), axis=1)
    sig = np.linalg.norm(T, 2, axis=(1, 2))
    if p >= 2:
        return sig
    budget = budget or Budget()
    return np.array([_structural_upper_l2(X, p, s, budget) for X, s in zip(T, sig)])


def reweight_tuple(Y: np.ndarray, values: np.ndarray, p: float, q: float) -> np.ndarray:
    """Rescale a tuple so a ``q``-witness becomes a ``p``-witness (``p < q``).

    With ``v_j`` the values a q-witness realizes, the weights
    ``l_j = |v_j|^(q/r)`` (``1/r = 1/p - 1/q``), normalized in ``l_r``,
    turn a tuple of weak q-norm at most one into one of weak p-norm at most
    one (Hoelder) whose p-sum of the reweighted values equals the q-sum of
    the originals.
    """
    if not 1 <= p < q:
        raise ValueError("need 1 <= p < q")
    v = np.abs(np.asarray(values, dtype=float))
    r = 1.0 / (1.0 / p - 1.0 / q)
    lam = v ** (q / r)
    s = lp_sum(lam, r)
    if s == 0:
        return np.asarray(Y, dtype=float) * 0.0
    return np.asarray(Y, dtype=float) * (lam / s)[:, None]


def weak_p_monotonicity_check(space: Space, t, p: float, q: float, budget: Budget | None = None,
                              seed: int = 0, tol: float = 1e-9) -> dict:
    """Compare weak norms at ``p < q``; the larger exponent must not win.

    ``status`` is ``"pass"`` when both sides are exact and ordered, ``"fail"``
    when the q-lower bound exceeds the p-upper bound, and ``"inconclusive"``
    when only lower bounds are available.
    """
    if not 1 <= p < q:
        raise ValueError("need 1 <= p < q")
    ep = weak_p_norm(space, t, p, budget, seed)
    eq = weak_p_norm(space, t, q, budget, seed)
    exact = ep.method != "search_lower" and eq.method != "search_lower"
    if eq.lower > ep.upper + tol:
        status = "fail"
    elif exact:
        status = "pass" if eq.upper <= ep.lower + tol else "fail"
    else:
        status = "inconclusive"
    return {"status": status, "p": p, "q": q, "weak_p": ep.to_json(), "weak_q": eq.to_json()}


def all_sign_patterns(m: int):
    """Every sign pattern of length ``m`` (test helper)."""
    return [np.array(e, dtype=float) for e in itertools.product((-1.0, 1.0), repeat=m)]
