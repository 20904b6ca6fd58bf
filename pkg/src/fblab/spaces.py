"""Finite-dimensional normed spaces and their duals.

A :class:`Space` is ``R^n`` with one of the norms ``l1``, ``l2``, ``linf`` or a
polyhedral norm whose unit ball is the convex hull of a centrally symmetric
vertex list.  Vectors of ``E`` and functionals of ``E*`` are both plain
numpy arrays of length ``dim``; functionals act by the standard pairing.

Every norm routine accepts either a single vector of shape ``(dim,)`` or a
batch of shape ``(k, dim)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.spatial import ConvexHull, QhullError

__all__ = [
    "Space",
    "DimensionError",
    "UnsupportedError",
    "make_space",
    "norm",
    "dual_norm",
    "pairing",
    "extreme_points",
    "dual_extreme_points",
    "dual_space",
    "sample_dual_sphere",
    "sample_sphere",
    "space_to_json",
    "space_from_json",
]

_KINDS = ("l1", "l2", "linf", "polyhedral")
_SYMMETRY_TOL = 1e-12


class DimensionError(ValueError):
    """A vector or functional does not match the dimension of its space."""


class UnsupportedError(ValueError):
    """The requested operation has no finite answer for this norm."""


@dataclass(frozen=True)
class Space:
    """``R^dim`` with an ``l1``/``l2``/``linf`` or polyhedral norm.

    Use :func:`make_space` to build one; the constructor does not validate.
    """

    dim: int
    kind: str
    vertices: tuple | None = None

    def __repr__(self):
        if self.kind == "polyhedral":
            return f"Space(dim={self.dim}, polyhedral, {len(self.vertices)} vertices)"
        return f"Space(dim={self.dim}, {self.kind})"

    @cached_property
    def vertex_array(self) -> np.ndarray:
        if self.vertices is None:
            raise UnsupportedError(f"{self.kind} has no vertex list")
        return np.array(self.vertices, dtype=float)

    @cached_property
    def facet_normals(self) -> np.ndarray:
        """Rows ``a`` with ``a . x <= 1`` describing the polyhedral unit ball.

        These are the vertices of the polar body, i.e. the extreme points of
        the dual unit ball.
        """
        V = self.vertex_array
        if self.dim == 1:
            r = np.max(np.abs(V[:, 0]))
            return np.array([[1.0 / r], [-1.0 / r]])
        try:
            hull = ConvexHull(V)
        except QhullError as exc:  # pragma: no cover - degenerate lists rejected earlier
            raise ValueError(f"cannot build hull of vertex list: {exc}") from exc
        normals = []
        for simplex in hull.simplices:
            P = V[simplex]
            try:
                a = np.linalg.solve(P, np.ones(self.dim))
            except np.linalg.LinAlgError:
                continue
            normals.append(a)
        normals = np.array(normals)
        # triangulated facets repeat the same normal
        _, keep = np.unique(np.round(normals, 10), axis=0, return_index=True)
        return normals[np.sort(keep)]

    @property
    def has_extreme_points(self) -> bool:
        return self.kind != "l2"


def make_space(dim: int, norm_spec) -> Space:
    """Build a validated space.

    ``norm_spec`` may be ``"l1"``, ``"l2"``, ``"linf"`` (also ``1``, ``2``,
    ``inf``), a vertex list, or ``{"polyhedral": vertex_list}``.
    """
    if isinstance(dim, bool) or int(dim) != dim or dim < 1:
        raise ValueError(f"dim must be a positive integer, got {dim!r}")
    dim = int(dim)
    if isinstance(norm_spec, dict):
        if set(norm_spec) != {"polyhedral"}:
            raise ValueError(f"unknown norm spec keys {sorted(norm_spec)}")
        norm_spec = norm_spec["polyhedral"]
    if isinstance(norm_spec, (int, float)) and not isinstance(norm_spec, bool):
        names = {1: "l1", 2: "l2", float("inf"): "linf"}
        if norm_spec not in names:
            raise ValueError(f"only q in {{1, 2, inf}} is supported, got {norm_spec}")
        norm_spec = names[norm_spec]
    if isinstance(norm_spec, str):
        if norm_spec not in _KINDS[:3]:
            raise ValueError(f"unknown norm {norm_spec!r}")
        return Space(dim, norm_spec)

    V = np.asarray(norm_spec, dtype=float)
    if V.ndim != 2 or V.shape[0] == 0 or V.shape[1] != dim:
        raise ValueError(f"polyhedral vertex list must have shape (k, {dim})")
    if not np.all(np.isfinite(V)):
        raise ValueError("polyhedral vertex list has non-finite entries")
    for v in V:
        if not np.any(np.all(np.abs(V + v) <= _SYMMETRY_TOL, axis=1)):
            raise ValueError(f"vertex list is not closed under negation: -{v.tolist()} missing")
    if np.linalg.matrix_rank(V) < dim:
        raise ValueError("vertex list does not span the space (degenerate unit ball)")
    return Space(dim, "polyhedral", tuple(tuple(map(float, v)) for v in V))


def _check(space: Space, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (space.dim,) or x.ndim > 2:
        raise DimensionError(f"expected last axis of length {space.dim}, got shape {x.shape}")
    return x


def pairing(f, v):
    """Standard pairing ``sum_i f_i v_i`` (batched over leading axes)."""
    return np.sum(np.asarray(f, dtype=float) * np.asarray(v, dtype=float), axis=-1)


def norm(space: Space, v):
    """Norm of ``v`` in ``space``; polyhedral norms use the Minkowski gauge."""
    v = _check(space, v)
    if space.kind == "l1":
        return np.sum(np.abs(v), axis=-1)
    if space.kind == "l2":
        return np.sqrt(np.sum(v * v, axis=-1))
    if space.kind == "linf":
        return np.max(np.abs(v), axis=-1)
    return np.max(v @ space.facet_normals.T, axis=-1)


def dual_norm(space: Space, f):
    """Norm of a functional: ``sup`` of ``|f(x)|`` over the unit ball."""
    f = _check(space, f)
    if space.kind == "l1":
        return np.max(np.abs(f), axis=-1)
    if space.kind == "l2":
        return np.sqrt(np.sum(f * f, axis=-1))
    if space.kind == "linf":
        return np.sum(np.abs(f), axis=-1)
    return np.max(np.abs(f @ space.vertex_array.T), axis=-1)


def extreme_points(space: Space) -> np.ndarray:
    """Extreme points of the unit ball as rows of an array."""
    n = space.dim
    if space.kind == "l1":
        eye = np.eye(n)
        return np.concatenate([eye, -eye])
    if space.kind == "linf":
        return np.array(list(itertools.product((1.0, -1.0), repeat=n)))
    if space.kind == "polyhedral":
        return space.vertex_array.copy()
    raise UnsupportedError("the Euclidean ball has infinitely many extreme points")


def dual_space(space: Space) -> Space:
    """The dual ``E*`` as a space in its own right."""
    if space.kind == "l1":
        return Space(space.dim, "linf")
    if space.kind == "linf":
        return Space(space.dim, "l1")
    if space.kind == "l2":
        return space
    A = space.facet_normals
    return Space(space.dim, "polyhedral", tuple(tuple(map(float, a)) for a in A))


def dual_extreme_points(space: Space) -> np.ndarray:
    """Extreme points of the dual unit ball."""
    return extreme_points(dual_space(space))


def sample_dual_sphere(space: Space, count: int, seed: int) -> np.ndarray:
    """``count`` functionals of dual norm one, from normalized Gaussians."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((count, space.dim))
    # a zero Gaussian draw has probability zero but would divide by zero
    G[np.all(G == 0, axis=1)] = 1.0
    return G / dual_norm(space, G)[:, None]


def sample_sphere(space: Space, count: int, seed: int) -> np.ndarray:
    """``count`` vectors of norm one in ``space``."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((count, space.dim))
    G[np.all(G == 0, axis=1)] = 1.0
    return G / norm(space, G)[:, None]


def space_to_json(space: Space) -> dict:
    if space.kind == "polyhedral":
        return {"dim": space.dim, "norm": {"polyhedral": [list(v) for v in space.vertices]}}
    return {"dim": space.dim, "norm": space.kind}


def space_from_json(obj) -> Space:
    if not isinstance(obj, dict) or "dim" not in obj or "norm" not in obj:
        raise ValueError('space JSON needs "dim" and "norm" keys')
    return make_space(obj["dim"], obj["norm"])
