"""Positively homogeneous functions on a dual space, as expression trees.

Nodes evaluate on batches: ``f.eval_batch(X)`` takes an ``(k, dim)`` array of
functionals and returns ``k`` values.  Lattice operations are pointwise, so
``f | g``, ``f & g`` and ``abs(f)`` build :class:`Sup`, :class:`Inf` and
:class:`Abs` nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ._ascent import sphere_ascent
from .estimate import Budget, NormEstimate
from .spaces import (
    DimensionError,
    Space,
    dual_extreme_points,
    dual_norm,
    norm,
    sample_dual_sphere,
)

__all__ = [
    "HomFn",
    "Delta",
    "NormFn",
    "Scale",
    "Sum",
    "Sup",
    "Inf",
    "Abs",
    "RayIndicator",
    "MuInduced",
    "SupAbsDeltas",
    "Composed",
    "ASTError",
    "evaluate",
    "homogeneity_defect",
    "uniform_norm_ball",
    "dim1_representation",
    "classify_finite_dim",
    "Probe",
    "Classification",
    "to_json",
    "from_json",
    "walk",
    "is_sublinear",
    "random_lattice_expression",
]

RAY_TOL = 1e-12
# vertex enumeration for certification stays below this many points
_MAX_CERT_POINTS = 1 << 16


class ASTError(ValueError):
    """A malformed expression; the message names the offending node path."""


class HomFn:
    """Base class; subclasses set ``dim`` and implement ``eval_batch``."""

    dim: int

    def eval_batch(self, X: np.ndarray) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def children(self) -> tuple:
        return ()

    def __call__(self, x):
        return evaluate(self, x)

    def __or__(self, other):
        return Sup((self, other))

    def __and__(self, other):
        return Inf((self, other))

    def __abs__(self):
        return Abs(self)

    def __add__(self, other):
        return Sum((self, other))

    def __neg__(self):
        return Scale(-1.0, self)

    def __sub__(self, other):
        return Sum((self, Scale(-1.0, other)))

    def __mul__(self, c):
        return Scale(float(c), self)

    __rmul__ = __mul__


def _vec(v, name="vector") -> np.ndarray:
    a = np.array(v, dtype=float).reshape(-1)
    if a.size == 0:
        raise ValueError(f"{name} must be nonempty")
    a.setflags(write=False)
    return a


def _same_dim(children, what):
    if not children:
        raise ValueError(f"{what} needs at least one argument")
    d = children[0].dim
    for c in children[1:]:
        if c.dim != d:
            raise DimensionError(f"{what} mixes dimensions {d} and {c.dim}")
    return d


@dataclass(frozen=True, eq=False)
class Delta(HomFn):
    """Point evaluation ``x* -> x*(x)``."""

    vec: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "vec", _vec(self.vec))

    @property
    def dim(self):
        return self.vec.size

    def eval_batch(self, X):
        return X @ self.vec


@dataclass(frozen=True, eq=False)
class NormFn(HomFn):
    """The norm function ``x* -> ||x*||``."""

    space: Space

    @property
    def dim(self):
        return self.space.dim

    def eval_batch(self, X):
        return dual_norm(self.space, X)


@dataclass(frozen=True, eq=False)
class Scale(HomFn):
    c: float
    child: HomFn

    def __post_init__(self):
        object.__setattr__(self, "c", float(self.c))

    @property
    def dim(self):
        return self.child.dim

    def children(self):
        return (self.child,)

    def eval_batch(self, X):
        return self.c * self.child.eval_batch(X)


@dataclass(frozen=True, eq=False)
class _Nary(HomFn):
    args: tuple

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        _same_dim(self.args, type(self).__name__)

    @property
    def dim(self):
        return self.args[0].dim

    def children(self):
        return self.args

    def _stack(self, X):
        return np.stack([a.eval_batch(X) for a in self.args])


class Sum(_Nary):
    def eval_batch(self, X):
        return np.sum(self._stack(X), axis=0)


class Sup(_Nary):
    def eval_batch(self, X):
        return np.max(self._stack(X), axis=0)


class Inf(_Nary):
    def eval_batch(self, X):
        return np.min(self._stack(X), axis=0)


@dataclass(frozen=True, eq=False)
class Abs(HomFn):
    child: HomFn

    @property
    def dim(self):
        return self.child.dim

    def children(self):
        return (self.child,)

    def eval_batch(self, X):
        return np.abs(self.child.eval_batch(X))


@dataclass(frozen=True, eq=False)
class RayIndicator(HomFn):
    """``t`` on the open ray ``{t d : t > 0}`` and ``0`` elsewhere.

    Ray membership compares Euclidean-normalized directions with tolerance
    ``RAY_TOL``; exact ray tests are meaningless in floating point.
    """

    direction: np.ndarray

    def __post_init__(self):
        d = _vec(self.direction, "ray direction")
        if not np.any(d):
            raise ValueError("ray direction must be nonzero")
        object.__setattr__(self, "direction", d)

    @property
    def dim(self):
        return self.direction.size

    def eval_batch(self, X):
        d = self.direction
        t = (X @ d) / (d @ d)
        xn = np.linalg.norm(X, axis=1)
        safe = np.where(xn > 0, xn, 1.0)
        off = np.linalg.norm(X / safe[:, None] - d / np.linalg.norm(d), axis=1)
        on = (t > 0) & (xn > 0) & (off <= RAY_TOL)
        return np.where(on, t, 0.0)


@dataclass(frozen=True, eq=False)
class MuInduced(HomFn):
    """``x* -> (sum_i w_i |x*(p_i)|^p)^(1/p)`` for a discrete measure."""

    weights: np.ndarray
    points: np.ndarray
    p: float
    n: int

    def __post_init__(self):
        if self.p < 1:
            raise ValueError(f"p must be >= 1, got {self.p}")
        w = np.array(self.weights, dtype=float).reshape(-1)
        P = np.array(self.points, dtype=float).reshape(len(w), self.n)
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("measure weights must be finite and nonnegative")
        w.setflags(write=False)
        P.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "points", P)
        object.__setattr__(self, "p", float(self.p))

    @property
    def dim(self):
        return self.n

    @property
    def mass(self) -> float:
        return float(np.sum(self.weights))

    def eval_batch(self, X):
        if self.weights.size == 0:
            return np.zeros(X.shape[0])
        A = np.abs(X @ self.points.T)
        # factoring out the largest term keeps single-atom measures exact
        M = np.max(A, axis=1)
        safe = np.where(M > 0, M, 1.0)
        R = A / safe[:, None]
        return M * np.sum(self.weights * R ** self.p, axis=1) ** (1.0 / self.p)


class SupAbsDeltas(HomFn):
    """``max_n |x*(x_n)|`` for the rows ``x_n`` of a (possibly sparse) matrix.

    A flat equivalent of ``Sup(Abs(Delta(x_n)) ...)`` that scales to long
    sequences in high dimension.
    """

    def __init__(self, rows):
        if sp.issparse(rows):
            rows = sp.csr_matrix(rows, dtype=float)
        else:
            rows = np.array(rows, dtype=float)
            if rows.ndim != 2:
                raise ValueError("rows must be a 2-d array")
        if rows.shape[0] == 0:
            raise ValueError("need at least one vector")
        self.rows = rows

    @property
    def dim(self):
        return self.rows.shape[1]

    def eval_batch(self, X):
        V = self.rows @ X.T
        if sp.issparse(V):
            V = V.toarray()
        return np.max(np.abs(np.asarray(V)), axis=0)

    def deltas(self):
        """The equivalent explicit ``Sup``/``Abs``/``Delta`` tree."""
        R = self.rows.toarray() if sp.issparse(self.rows) else self.rows
        return Sup(tuple(Abs(Delta(r)) for r in R))


@dataclass(frozen=True, eq=False)
class Composed(HomFn):
    """``y* -> child(map(y*))``; the map goes from the source to the child's space."""

    child: HomFn
    map: object

    def __post_init__(self):
        if self.map.target.dim != self.child.dim:
            raise DimensionError(
                f"map lands in dimension {self.map.target.dim} but function lives in {self.child.dim}"
            )

    @property
    def dim(self):
        return self.map.source.dim

    def children(self):
        return (self.child,)

    def eval_batch(self, X):
        return self.child.eval_batch(self.map.apply_batch(X))


def walk(f: HomFn):
    """Yield every node of the tree, parents first."""
    stack = [f]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children()))


def evaluate(f: HomFn, x):
    """Evaluate at one functional (returns a float) or a batch (an array)."""
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.ndim != 2 or X.shape[1] != f.dim:
        raise DimensionError(f"function lives on dimension {f.dim}, got shape {np.shape(x)}")
    out = f.eval_batch(X)
    return float(out[0]) if single else out


def homogeneity_defect(f: HomFn, space: Space, samples: int, seed: int, evaluator=None) -> float:
    """Max of ``|f(l x*) - l f(x*)|`` over seeded ``l in [0, 10]`` and sphere points.

    The first sample always uses ``l = 0``.  ``evaluator(f, X)`` replaces
    batch evaluation, which lets tests plug in a faulty evaluator.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    ev = evaluator or (lambda g, X: evaluate(g, X))
    X = sample_dual_sphere(space, samples, seed)
    lam = np.random.default_rng(seed + 1).uniform(0.0, 10.0, samples)
    lam[0] = 0.0
    lhs = np.asarray(ev(f, lam[:, None] * X), dtype=float)
    rhs = lam * np.asarray(ev(f, X), dtype=float)
    return float(np.max(np.abs(lhs - rhs)))


# ---------------------------------------------------------------------------
# structure tests used to certify suprema


def _is_adjoint(m) -> bool:
    return type(m).__name__ == "Adjoint"


def is_linear(f: HomFn) -> bool:
    if isinstance(f, Delta):
        return True
    if isinstance(f, Scale):
        return is_linear(f.child)
    if isinstance(f, Sum):
        return all(is_linear(a) for a in f.args)
    if isinstance(f, Composed):
        return _is_adjoint(f.map) and is_linear(f.child)
    return False


def is_sublinear(f: HomFn) -> bool:
    """True when the tree is visibly convex (subadditive and homogeneous)."""
    if is_linear(f) or isinstance(f, (NormFn, MuInduced, SupAbsDeltas)):
        return True
    if isinstance(f, Abs):
        return is_linear(f.child)
    if isinstance(f, (Sup, Sum)):
        return all(is_sublinear(a) for a in f.args)
    if isinstance(f, Scale):
        return f.c >= 0 and is_sublinear(f.child)
    if isinstance(f, Composed):
        return _is_adjoint(f.map) and is_sublinear(f.child)
    return False


def _certified_sup_abs(f: HomFn, space: Space):
    """``(value, witness)`` with ``value = sup |f|`` on the dual ball, or None."""
    if isinstance(f, Delta):
        x = f.vec
        nx = float(norm(space, x))
        if nx == 0:
            return 0.0, _unit_functional(space, 0)
        if space.kind == "l2":
            return nx, x / nx
    if isinstance(f, NormFn):
        return 1.0, _unit_functional(space, 0)
    if isinstance(f, RayIndicator):
        d = f.direction
        w = d / dual_norm(space, d)
        return float(evaluate(f, w)), w
    if isinstance(f, Scale):
        inner = _certified_sup_abs(f.child, space)
        return None if inner is None else (abs(f.c) * inner[0], inner[1])
    if isinstance(f, Abs):
        return _certified_sup_abs(f.child, space)
    if is_sublinear(f) and space.has_extreme_points and _ext_count(space) <= _MAX_CERT_POINTS:
        D = dual_extreme_points(space)
        vals = f.eval_batch(D)
        i = int(np.argmax(vals))
        return max(float(vals[i]), 0.0), D[i]
    return None


def _ext_count(space: Space) -> int:
    if space.kind == "l1":
        return 2 ** space.dim
    if space.kind == "linf":
        return 2 * space.dim
    return len(space.facet_normals)


def _unit_functional(space: Space, i: int) -> np.ndarray:
    e = np.zeros(space.dim)
    e[i] = 1.0
    return e / dual_norm(space, e)


def uniform_norm_ball(f: HomFn, space: Space, budget: Budget | None = None, seed: int = 0) -> NormEstimate:
    """``sup |f|`` over the dual unit ball.

    Trees whose supremum is provably attained at a dual extreme point (or has
    a closed form) come back certified and exact.  Otherwise the value is the
    best of seeded sphere samples refined by local ascent; ``upper`` equals
    ``lower`` but ``certified`` is False, and ``upper`` is ``inf`` when the tree
    contains a ray indicator that sampling can miss entirely.
    """
    budget = budget or Budget()
    if f.dim != space.dim:
        raise DimensionError(f"function dim {f.dim} != space dim {space.dim}")
    cert = _certified_sup_abs(f, space)
    if cert is not None:
        val, w = cert
        method = "exact_vertices" if space.has_extreme_points else "exact_closed_form"
        return NormEstimate(val, val, method, np.asarray(w, dtype=float), True)

    rng = np.random.default_rng(seed)
    pools = [sample_dual_sphere(space, budget.samples, seed)]
    pools.append(np.eye(space.dim) / dual_norm(space, np.eye(space.dim))[:, None])
    pools.append(-pools[-1])
    if space.has_extreme_points and _ext_count(space) <= _MAX_CERT_POINTS:
        pools.append(dual_extreme_points(space))
    C = np.concatenate(pools)

    def obj(Y):
        return np.abs(f.eval_batch(Y))

    vals = obj(C)
    order = np.argsort(-vals, kind="stable")[: budget.restarts]
    P, pv = sphere_ascent(space, obj, C[order], budget.steps, rng)
    allX = np.concatenate([C, P])
    allv = np.concatenate([vals, pv])
    i = int(np.argmax(allv))
    w = allX[i]
    lower = float(abs(evaluate(f, w)))
    has_ray = any(isinstance(n, RayIndicator) for n in walk(f))
    return NormEstimate(lower, math.inf if has_ray else lower, "search_lower", w, False)


def dim1_representation(f1: float, fm1: float) -> HomFn:
    """Lattice expression in ``delta`` for the homogeneous ``f`` on ``R`` with
    ``f(1) = f1`` and ``f(-1) = fm1``."""
    a, b = float(f1), -float(fm1)
    if a == b:
        return Delta([a])
    if a > b:
        return Sup((Delta([a]), Delta([b])))
    return Inf((Delta([a]), Delta([b])))


# ---------------------------------------------------------------------------
# continuity probe


@dataclass(frozen=True)
class Probe:
    """Settings for :func:`classify_finite_dim`.

    ``points`` are probe locations (default: sphere samples plus the unit
    points of every ray in the tree); ``directions`` are perturbation
    directions (default: seeded random ones).  ``jump_threshold`` is relative
    to the sampled ``sup |f|``.
    """

    samples: int = 2000
    radii: tuple = (1e-1, 1e-2, 1e-3, 1e-4)
    jump_threshold: float = 1e-3
    bound_cap: float = 1e8
    seed: int = 0
    points: tuple | None = None
    directions: tuple | None = None
    n_directions: int = 24
    n_points: int = 64


@dataclass
class Classification:
    label: str
    jump: float
    sup_abs: float
    modulus: dict = field(default_factory=dict)
    point: list | None = None

    def to_json(self):
        return {
            "label": self.label,
            "jump": self.jump,
            "sup_abs": self.sup_abs,
            "modulus": {repr(r): v for r, v in self.modulus.items()},
            "point": self.point,
        }


def classify_finite_dim(f: HomFn, space: Space, probe: Probe | None = None) -> Classification:
    """Empirical continuity class of ``f`` restricted to the dual sphere.

    A numerical probe, not a proof: the label reflects what the sampled
    modulus of continuity does along the radii schedule.
    """
    probe = probe or Probe()
    rng = np.random.default_rng(probe.seed)
    U = sample_dual_sphere(space, probe.samples, probe.seed)
    vals = f.eval_batch(U)
    sup_abs = float(np.max(np.abs(vals))) if np.all(np.isfinite(vals)) else math.inf
    if not sup_abs <= probe.bound_cap:
        return Classification("unbounded_flag", math.inf, sup_abs)

    if probe.points is not None:
        P = np.atleast_2d(np.array(probe.points, dtype=float))
    else:
        rays = [n.direction / dual_norm(space, n.direction) for n in walk(f) if isinstance(n, RayIndicator)]
        P = np.concatenate([np.array(rays).reshape(-1, space.dim), U[: probe.n_points]])
    if probe.directions is not None:
        W = np.atleast_2d(np.array(probe.directions, dtype=float))
    else:
        W = rng.standard_normal((probe.n_directions, space.dim))
    W = W / dual_norm(space, W)[:, None]

    base = f.eval_batch(P)
    modulus = {}
    best_pt = 0
    for r in probe.radii:
        Q = P[:, None, :] + r * W[None, :, :]
        fq = f.eval_batch(Q.reshape(-1, space.dim)).reshape(len(P), len(W))
        jumps = np.max(np.abs(fq - base[:, None]), axis=1)
        modulus[float(r)] = float(np.max(jumps))
        best_pt = int(np.argmax(jumps))
    omega = list(modulus.values())
    last = omega[-1]
    scale = max(sup_abs, float(np.max(np.abs(base))))
    if last <= probe.jump_threshold * scale or last < 0.5 * omega[0]:
        label = "continuous_on_sphere"
    else:
        label = "bounded_discontinuous"
    return Classification(label, last, sup_abs, modulus, P[best_pt].tolist())


# ---------------------------------------------------------------------------
# JSON AST


def _vec_json(v: np.ndarray):
    nz = np.flatnonzero(v)
    if v.size > 64 and nz.size * 4 < v.size:
        return {"dim": int(v.size), "index": nz.tolist(), "value": v[nz].tolist()}
    return v.tolist()


def to_json(f: HomFn) -> dict:
    """Serialize a tree to the JSON AST."""
    if isinstance(f, Delta):
        return {"op": "delta", "vec": _vec_json(f.vec)}
    if isinstance(f, NormFn):
        return {"op": "normfn"}
    if isinstance(f, Scale):
        return {"op": "scale", "c": f.c, "arg": to_json(f.child)}
    if isinstance(f, (Sum, Sup, Inf)):
        return {"op": type(f).__name__.lower(), "args": [to_json(a) for a in f.args]}
    if isinstance(f, Abs):
        return {"op": "abs", "arg": to_json(f.child)}
    if isinstance(f, RayIndicator):
        return {"op": "ray", "dir": f.direction.tolist()}
    if isinstance(f, MuInduced):
        return {
            "op": "mu",
            "p": f.p,
            "dim": f.dim,
            "atoms": [[float(w), pt.tolist()] for w, pt in zip(f.weights, f.points)],
        }
    if isinstance(f, SupAbsDeltas):
        R = sp.csr_matrix(f.rows)
        args = []
        for i in range(R.shape[0]):
            lo, hi = R.indptr[i], R.indptr[i + 1]
            vec = {"dim": int(R.shape[1]), "index": R.indices[lo:hi].tolist(), "value": R.data[lo:hi].tolist()}
            args.append({"op": "abs", "arg": {"op": "delta", "vec": vec}})
        return {"op": "sup", "args": args}
    if isinstance(f, Composed):
        return {"op": "compose", "map": f.map.to_json(), "arg": to_json(f.child)}
    raise TypeError(f"cannot serialize {type(f).__name__}")


def _need(ast, key, path):
    if key not in ast:
        raise ASTError(f"{path}: missing key {key!r}")
    return ast[key]


def _parse_vec(v, dim, path):
    try:
        if isinstance(v, dict):
            n = int(v["dim"])
            out = np.zeros(n)
            out[np.asarray(v["index"], dtype=int)] = np.asarray(v["value"], dtype=float)
        else:
            out = np.array(v, dtype=float)
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ASTError(f"{path}: bad vector ({exc})") from None
    if out.ndim != 1 or out.size != dim:
        raise ASTError(f"{path}: vector must have length {dim}, got shape {out.shape}")
    if not np.all(np.isfinite(out)):
        raise ASTError(f"{path}: vector has non-finite entries")
    return out


def _number(x, path, key):
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
        raise ASTError(f"{path}: {key!r} must be a finite number, got {x!r}")
    return float(x)


def from_json(ast, space: Space, path: str = "f") -> HomFn:
    """Parse a JSON AST over ``space``; errors name the bad node path."""
    if not isinstance(ast, dict):
        raise ASTError(f"{path}: expected an object, got {type(ast).__name__}")
    op = _need(ast, "op", path)
    if op == "delta":
        return Delta(_parse_vec(_need(ast, "vec", path), space.dim, path + ".vec"))
    if op == "normfn":
        return NormFn(space)
    if op == "scale":
        c = _number(_need(ast, "c", path), path, "c")
        return Scale(c, from_json(_need(ast, "arg", path), space, path + ".arg"))
    if op == "abs":
        return Abs(from_json(_need(ast, "arg", path), space, path + ".arg"))
    if op in ("sup", "inf", "sum"):
        args = _need(ast, "args", path)
        if not isinstance(args, list) or not args:
            raise ASTError(f"{path}: 'args' must be a nonempty list")
        kids = [from_json(a, space, f"{path}.args[{i}]") for i, a in enumerate(args)]
        if op == "sup" and len(kids) > 16 and all(
            isinstance(k, Abs) and isinstance(k.child, Delta) for k in kids
        ):
            return SupAbsDeltas(sp.csr_matrix(np.array([k.child.vec for k in kids])))
        return {"sup": Sup, "inf": Inf, "sum": Sum}[op](tuple(kids))
    if op == "ray":
        d = _parse_vec(_need(ast, "dir", path), space.dim, path + ".dir")
        if not np.any(d):
            raise ASTError(f"{path}: ray direction must be nonzero")
        return RayIndicator(d)
    if op == "mu":
        p = _number(_need(ast, "p", path), path, "p")
        if p < 1:
            raise ASTError(f"{path}: p must be >= 1, got {p}")
        atoms = _need(ast, "atoms", path)
        if not isinstance(atoms, list):
            raise ASTError(f"{path}: 'atoms' must be a list")
        ws, pts = [], []
        for i, atom in enumerate(atoms):
            apath = f"{path}.atoms[{i}]"
            if not isinstance(atom, list) or len(atom) != 2:
                raise ASTError(f"{apath}: atom must be [weight, point]")
            w = _number(atom[0], apath, "weight")
            if w < 0:
                raise ASTError(f"{apath}: negative weight {w}")
            pt = _parse_vec(atom[1], space.dim, apath + ".point")
            if norm(space, pt) > 1 + 1e-12:
                raise ASTError(f"{apath}: point lies outside the unit ball")
            ws.append(w)
            pts.append(pt)
        return MuInduced(np.array(ws), np.array(pts).reshape(len(ws), space.dim), p, space.dim)
    if op == "compose":
        from .phmaps import map_from_json

        m = map_from_json(_need(ast, "map", path), space, None, path + ".map")
        child = from_json(_need(ast, "arg", path), m.target, path + ".arg")
        return Composed(child, m)
    raise ASTError(f"{path}: unknown op {op!r}")


# ---------------------------------------------------------------------------
# random trees for tests and experiments


def random_lattice_expression(dim: int, rng, depth: int = 3, vectors=None, allow_scale: bool = True) -> HomFn:
    """A seeded random lattice expression in ``delta``s.

    Leaves are ``Delta`` of rows of ``vectors`` (random Gaussians by default)
    combined with Sup, Inf, Abs, Sum and Scale.
    """
    if vectors is None:
        vectors = rng.standard_normal((3, dim))
    vectors = np.atleast_2d(np.asarray(vectors, dtype=float))

    def build(d):
        if d == 0 or rng.random() < 0.25:
            return Delta(vectors[rng.integers(len(vectors))])
        kind = rng.integers(5 if allow_scale else 4)
        if kind == 0:
            return Abs(build(d - 1))
        if kind in (1, 2, 3):
            k = int(rng.integers(2, 4))
            cls = (Sup, Inf, Sum)[kind - 1]
            return cls(tuple(build(d - 1) for _ in range(k)))
        return Scale(float(rng.uniform(-2, 2)), build(d - 1))

    return build(depth)
