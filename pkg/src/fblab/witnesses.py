"""Finite realizations of the separating functions used to tell sublattices apart.

Each construction returns a :class:`WitnessReport`: the function, the inputs,
and a list of labelled numbers that can be recomputed from raw evaluations.
Infinite sequences are truncated at ``N``; certificates are phrased as
partial sums and explicit tuple bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import homfn as H
from .spaces import DimensionError, Space, make_space, norm
from .summing import lp_sum, weak_p_norm

__all__ = [
    "WitnessReport",
    "sup_deltas",
    "divergence_sequences",
    "divergence_witness",
    "divergence_tuple",
    "series_witness",
    "kernel_witness",
    "gap_witness",
    "gap_functionals",
    "mu_induced",
    "RankError",
]


class RankError(ValueError):
    """Vectors that must be independent are numerically dependent."""


@dataclass
class WitnessReport:
    construction: str
    f: H.HomFn
    certificate: list
    parameters: dict = field(default_factory=dict)

    def value(self, label: str) -> float:
        for k, v in self.certificate:
            if k == label:
                return v
        raise KeyError(label)

    def to_json(self, include_f: bool = True) -> dict:
        out = {
            "construction": self.construction,
            "parameters": self.parameters,
            "certificate": [[k, v] for k, v in self.certificate],
        }
        if include_f:
            out["f"] = H.to_json(self.f)
        return out


def sup_deltas(space: Space, vectors, scales) -> H.HomFn:
    """``max_n s_n |x*(x_n)|`` as a Sup/Abs/Delta tree."""
    V = np.atleast_2d(np.asarray(vectors, dtype=float))
    s = np.asarray(scales, dtype=float).reshape(-1)
    if V.shape[0] != s.size:
        raise ValueError(f"{V.shape[0]} vectors but {s.size} scales")
    if V.shape[1] != space.dim:
        raise DimensionError(f"vectors have length {V.shape[1]}, space has dim {space.dim}")
    if np.any(s < 0):
        raise ValueError("scales must be nonnegative")
    terms = [H.Abs(H.Delta(c * v)) for c, v in zip(s, V)]
    return terms[0] if len(terms) == 1 else H.Sup(tuple(terms))


# ---------------------------------------------------------------------------
# divergence witness


def divergence_sequences(N: int, p: float):
    """Default ``(c_n, s_n)`` with ``x_n* = c_n e_n``, ``x_n = e_n`` in ``l2^N``.

    ``p >= 2``: ``c_n = 1`` and ``s_n = n^(-1/(2p))``.  ``p < 2``:
    ``c_n = n^(-1/p)`` and ``s_n = log(n+1)^(-1/p)``.  In both cases the weak
    p-norm of ``(x_n*)`` stays bounded while ``sum (s_n c_n)^p`` diverges.
    """
    n = np.arange(1, N + 1, dtype=float)
    if p >= 2:
        return np.ones(N), n ** (-1.0 / (2 * p))
    return n ** (-1.0 / p), np.log(n + 1) ** (-1.0 / p)


def _orthogonal_weak(c: np.ndarray, p: float) -> float:
    """Weak p-norm in l2 of ``(c_n e_n)``: orthogonal rows have a closed form."""
    if p >= 2:
        return float(np.max(np.abs(c)))
    return float(lp_sum(c, 2 * p / (2 - p)))


def divergence_witness(N: int, p: float, seed: int = 0, checkpoints=None) -> WitnessReport:
    """The function ``max_n s_n |delta_{x_n}|`` over ``l2^N``.

    Its FBL^p norm is at least ``L(m) / K`` for every ``m``, where ``K`` is the
    weak p-norm of ``(x_n*)`` and ``L(m) = (sum_{k<=m} (s_k x_k*(x_k))^p)^(1/p)``.
    ``seed`` is unused (the construction is deterministic) and kept for a
    uniform interface.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    if p < 1:
        raise ValueError("p must be >= 1")
    c, s = divergence_sequences(N, p)
    K = _orthogonal_weak(c, p)
    terms = (s * c) ** p
    partial = np.cumsum(terms) ** (1.0 / p)
    if checkpoints is None:
        checkpoints = [10, 100, 1000, N]
    checkpoints = sorted({int(m) for m in checkpoints if 1 <= m <= N} | {N})
    cert = [("K", K)]
    cert += [(f"L({m})", float(partial[m - 1])) for m in checkpoints]
    cert += [(f"L({m})/K", float(partial[m - 1] / K)) for m in checkpoints]
    f = H.SupAbsDeltas(sp.diags(s, format="csr"))
    params = {"N": N, "p": p, "seed": seed, "checkpoints": checkpoints}
    rep = WitnessReport("divergence", f, cert, params)
    rep.partial_sums = partial
    return rep


def divergence_tuple(N: int, p: float, m: int) -> np.ndarray:
    """The feasible tuple ``(x_1*, ..., x_m*) / K`` as an ``(m, N)`` array."""
    c, _ = divergence_sequences(N, p)
    K = _orthogonal_weak(c, p)
    T = np.zeros((m, N))
    T[np.arange(m), np.arange(m)] = c[:m] / K
    return T


# ---------------------------------------------------------------------------
# series and kernel witnesses


def series_witness(space: Space, basis) -> H.HomFn:
    """``sum_n |delta_{b_n}| / 2^n`` for independent vectors ``b_n``."""
    B = np.atleast_2d(np.asarray(basis, dtype=float))
    if B.shape[1] != space.dim:
        raise DimensionError(f"basis vectors have length {B.shape[1]}, space has dim {space.dim}")
    if np.linalg.matrix_rank(B, tol=1e-9) < B.shape[0]:
        raise RankError("basis vectors are linearly dependent")
    terms = [H.Scale(2.0 ** -(k + 1), H.Abs(H.Delta(b))) for k, b in enumerate(B)]
    return terms[0] if len(terms) == 1 else H.Sum(tuple(terms))


def kernel_witness(space: Space, obstacles, basis_funcs, tol: float = 1e-9) -> np.ndarray:
    """A nonzero ``x* = sum_k t_k b_k*`` vanishing on every obstacle ``x_j``.

    ``t`` spans the null space of ``A[j, k] = b_k*(x_j)`` (taken from the
    SVD), has Euclidean norm one and its largest entry positive.
    """
    Bf = np.atleast_2d(np.asarray(basis_funcs, dtype=float))
    X = np.asarray(obstacles, dtype=float).reshape(-1, space.dim)
    m = X.shape[0]
    if Bf.shape != (m + 1, space.dim):
        raise ValueError(f"need {m + 1} basis functionals of length {space.dim}, got shape {Bf.shape}")
    if m == 0:
        t = np.array([1.0])
    else:
        A = X @ Bf.T
        _, _, vt = np.linalg.svd(A)
        t = vt[-1]
        t = t / np.linalg.norm(t)
    if t[np.argmax(np.abs(t))] < 0:
        t = -t
    xstar = t @ Bf
    scale = max(1.0, float(np.max(np.linalg.norm(Bf, axis=1))) * max(1.0, float(np.max(np.abs(X), initial=0.0))))
    if not np.any(xstar) or np.linalg.norm(xstar) <= tol:
        raise RankError("basis functionals are dependent: the combination vanishes")
    if m and np.max(np.abs(X @ xstar)) > tol * scale:
        raise RankError("null-space solve failed the residual check")
    return xstar


# ---------------------------------------------------------------------------
# gap witness


def gap_functionals(N: int, p: float, q: float, m: int):
    """``x_1*`` and the witness functionals ``z_j*`` (rows) in ``l2^N``."""
    x1 = np.zeros(N)
    x1[0] = 1.0
    Z = np.zeros((m, N))
    for j in range(1, m + 1):
        Z[j - 1, 0] = m ** (-1.0 / p)
        Z[j - 1, m + j - 1] = (m + j - 1) ** (-1.0 / q)
    return x1, Z


def _gap_f(N, p, q):
    n = np.arange(1, N, dtype=float)
    s = n ** (1.0 / q - 1.0 / p)
    rows = sp.csr_matrix((s, (np.arange(N - 1), np.arange(1, N))), shape=(N - 1, N))
    e0 = np.zeros(N)
    e0[0] = 1.0
    return H.Inf((H.Abs(H.Delta(e0)), H.SupAbsDeltas(rows)))


def _check_lattice_on_W(h: H.HomFn, N: int, m: int, tol: float = 1e-12):
    """Reject ``h`` unless it is a lattice expression in deltas of ``W_m``."""
    lo = 0 if m == 1 else m - 1
    for node in H.walk(h):
        if isinstance(node, H.Delta):
            if node.dim != N:
                raise DimensionError(f"h lives in dimension {node.dim}, expected {N}")
            bad = np.abs(node.vec[lo:])
            if np.any(bad > tol):
                k = lo + int(np.argmax(bad))
                raise ValueError(f"h uses a vector outside W_{m}: coordinate {k} is {node.vec[k]!r}")
        elif not isinstance(node, (H.Sup, H.Inf, H.Abs, H.Sum, H.Scale)):
            raise ValueError(f"h must be a lattice expression in deltas, found {type(node).__name__}")


def gap_witness(N: int, p: float, q: float, m: int, h: H.HomFn | None = None) -> WitnessReport:
    """Lower bound on ``||f - h||_{FBL^p}`` for ``h`` built from ``W_m``.

    Over ``l2^N`` with ``x_1 = e_1`` the function is
    ``f = |delta_{e_1}| ^ max_n s_n |delta_{e_{n+1}}|`` with
    ``s_n = n^(1/q - 1/p)``, and the feasible-up-to-``K+2`` tuple
    ``z_j* = m^(-1/p) e_1* + (m+j-1)^(-1/q) e_{m+j}*`` yields

        (K+2) ||f - h|| >= (sum_j |f(z_j*) - m^(-1/p) f(x_1*)|^p)^(1/p).

    ``h`` defaults to zero and must be a lattice expression in ``delta_w``
    with ``w`` vanishing on ``x_n*`` for ``n >= m``.
    """
    if not (isinstance(m, int) and m >= 1):
        raise ValueError("m must be a positive integer")
    if N < 2 * m + 2:
        raise ValueError(f"N must be >= 2m + 2 = {2 * m + 2}")
    if not 1 <= p < q:
        raise ValueError("need 1 <= p < q")
    f = _gap_f(N, p, q)
    if h is None:
        h = H.Scale(0.0, H.Delta(np.eye(N)[0]))
    _check_lattice_on_W(h, N, m)
    g = H.Sum((f, H.Scale(-1.0, h)))

    x1, Z = gap_functionals(N, p, q, m)
    n = np.arange(1, N, dtype=float)
    c = n ** (-1.0 / q)
    K = _orthogonal_weak(c, p)
    fz = f.eval_batch(Z)
    fx1 = float(H.evaluate(f, x1))
    gz = g.eval_batch(Z)
    gx1 = float(H.evaluate(g, x1))
    hz, hx1 = h.eval_batch(Z), float(H.evaluate(h, x1))
    chain = float(lp_sum(gz - m ** (-1.0 / p) * gx1, p)) / (K + 2)

    space = make_space(N, "l2")
    wz = weak_p_norm(space, Z, p).upper
    direct = max(float(lp_sum(gz, p)) / wz, abs(gx1))

    cert = [("K", K), ("weak_p(z)", wz), ("f(x1*)", fx1)]
    for j in range(m):
        cert.append((f"f(z_{j + 1}*)", float(fz[j])))
        cert.append((f"floor_{j + 1}", min(m ** (-1.0 / p), (m + j) ** (-1.0 / p))))
    cert += [
        ("eq9_defect", float(np.max(np.abs(hz - m ** (-1.0 / p) * hx1)))),
        ("chain_bound", chain),
        ("direct_bound", direct),
        ("worst_case_floor", 2 ** (-(p + 1) / p) / (K + 2)),
        ("realized_floor", 2 ** (-1.0 / p) / (K + 2)),
    ]
    params = {"N": N, "p": p, "q": q, "m": m, "h": H.to_json(h)}
    rep = WitnessReport("gap", f, cert, params)
    rep.z = Z
    rep.x1 = x1
    return rep


# ---------------------------------------------------------------------------
# measures


def mu_induced(space: Space, measure, p: float) -> H.MuInduced:
    """``x* -> (sum_i w_i |x*(p_i)|^p)^(1/p)`` for atoms ``(w_i, p_i)``."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    ws, pts = [], []
    for w, pt in measure:
        if w < 0:
            raise ValueError(f"negative weight {w}")
        v = np.asarray(pt, dtype=float).reshape(-1)
        if v.size != space.dim:
            raise DimensionError(f"atom has length {v.size}, space has dim {space.dim}")
        if norm(space, v) > 1 + 1e-12:
            raise ValueError(f"atom {v.tolist()} lies outside the unit ball")
        ws.append(float(w))
        pts.append(v)
    P = np.array(pts).reshape(len(ws), space.dim)
    return H.MuInduced(np.array(ws), P, p, space.dim)


def measure_mass(measure) -> float:
    return float(math.fsum(w for w, _ in measure))
