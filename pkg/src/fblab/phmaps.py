"""Positively homogeneous maps between dual spaces.

A map ``Phi: F* -> E*`` has a ``source`` space ``F`` and a ``target`` space
``E``; it acts on functionals of ``F``.  The composition operator
``C_Phi f = f o Phi`` sends functions on ``E*`` to functions on ``F*`` and its
norm on FBL^p equals

    ||Phi||_p = sup { ||(Phi y_j*)||_{p,weak} : ||(y_j*)||_{p,weak} <= 1 }.
"""

from __future__ import annotations

import math

import numpy as np

from . import homfn as H
from ._ascent import sphere_ascent
from ._search import probe_points, ratio_search
from .estimate import Budget, ConsistencyError, NormEstimate
from .spaces import (
    DimensionError,
    Space,
    dual_extreme_points,
    dual_norm,
    extreme_points,
    make_space,
    norm,
    sample_dual_sphere,
    space_from_json,
    space_to_json,
)
from .summing import weak_p_norm, witness_point

__all__ = [
    "PHMap",
    "Adjoint",
    "Modulus",
    "RankOneTimesFn",
    "Composite",
    "Tabulated",
    "apply",
    "phi_upper",
    "phi_p_norm",
    "compose_op",
    "extract_phi",
    "induced_action",
    "linearity_report",
    "comp_norm_identity_check",
    "p_monotonicity_check",
    "injectivity_probe",
    "map_from_json",
    "random_map",
]


class PHMap:
    """Base class; subclasses provide ``source``, ``target`` and ``apply_batch``."""

    source: Space
    target: Space

    def apply_batch(self, Y: np.ndarray) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def __call__(self, y):
        return apply(self, y)

    def to_json(self) -> dict:  # pragma: no cover - abstract
        raise NotImplementedError

    def _spaces_json(self):
        return {"source": space_to_json(self.source), "target": space_to_json(self.target)}


class Adjoint(PHMap):
    """``y* -> S* y*`` for a linear ``S: E -> F``.

    ``matrix`` is ``S*`` as a ``dim E x dim F`` array (the transpose of ``S``).
    """

    def __init__(self, matrix, source: Space, target: Space):
        M = np.array(matrix, dtype=float)
        if M.ndim != 2 or M.shape != (target.dim, source.dim):
            raise DimensionError(f"adjoint matrix must be {target.dim} x {source.dim}, got {M.shape}")
        M.setflags(write=False)
        self.matrix, self.source, self.target = M, source, target

    @classmethod
    def of_operator(cls, S, E: Space, F: Space) -> "Adjoint":
        """The adjoint of ``S: E -> F`` given as a ``dim F x dim E`` matrix."""
        return cls(np.asarray(S, dtype=float).T, F, E)

    @property
    def operator(self) -> np.ndarray:
        return self.matrix.T

    def apply_batch(self, Y):
        return Y @ self.matrix.T

    def inverse(self) -> "Adjoint":
        return Adjoint(np.linalg.inv(self.matrix), self.target, self.source)

    def to_json(self):
        return {"map": "adjoint", "matrix": self.matrix.tolist(), **self._spaces_json()}


class Modulus(PHMap):
    """Coordinatewise absolute value in the standard basis (basis dependent)."""

    def __init__(self, space: Space):
        self.source = self.target = space

    def apply_batch(self, Y):
        return np.abs(Y)

    def actions(self):
        return [H.Abs(H.Delta(e)) for e in np.eye(self.source.dim)]

    def to_json(self):
        return {"map": "modulus", **self._spaces_json()}


class RankOneTimesFn(PHMap):
    """``y* -> f(y*) x0*``."""

    def __init__(self, f: H.HomFn, x0star, source: Space, target: Space):
        x0 = np.array(x0star, dtype=float).reshape(-1)
        if f.dim != source.dim or x0.size != target.dim:
            raise DimensionError("rank-one map dimensions do not match its spaces")
        x0.setflags(write=False)
        self.f, self.x0star, self.source, self.target = f, x0, source, target

    def apply_batch(self, Y):
        return self.f.eval_batch(Y)[:, None] * self.x0star[None, :]

    def to_json(self):
        return {"map": "rank1", "fn": H.to_json(self.f), "x0star": self.x0star.tolist(), **self._spaces_json()}


class Composite(PHMap):
    """``outer o inner``: apply ``inner`` first."""

    def __init__(self, outer: PHMap, inner: PHMap):
        if inner.target.dim != outer.source.dim:
            raise DimensionError("inner map lands outside the outer map's domain")
        self.outer, self.inner = outer, inner
        self.source, self.target = inner.source, outer.target

    def apply_batch(self, Y):
        return self.outer.apply_batch(self.inner.apply_batch(Y))

    def to_json(self):
        return {"map": "compose", "outer": self.outer.to_json(), "inner": self.inner.to_json()}


class Tabulated(PHMap):
    """The map with ``Phi(y*)(e_i) = g_i(y*)``, extended linearly in ``x``."""

    def __init__(self, actions, source: Space, target: Space):
        actions = tuple(actions)
        if len(actions) != target.dim:
            raise ValueError(f"need one function per basis vector of E ({target.dim}), got {len(actions)}")
        for i, g in enumerate(actions):
            if g.dim != source.dim:
                raise DimensionError(f"action on e_{i} lives in dimension {g.dim}, expected {source.dim}")
        self.actions, self.source, self.target = actions, source, target

    def apply_batch(self, Y):
        return np.stack([g.eval_batch(Y) for g in self.actions], axis=1)

    def to_json(self):
        return {
            "map": "tabulated",
            "action": {str(i): H.to_json(g) for i, g in enumerate(self.actions)},
            **self._spaces_json(),
        }


def apply(phi: PHMap, y):
    """Image of one functional (or a batch)."""
    Y = np.asarray(y, dtype=float)
    single = Y.ndim == 1
    Y = np.atleast_2d(Y)
    if Y.shape[1] != phi.source.dim:
        raise DimensionError(f"map acts on dimension {phi.source.dim}, got shape {np.shape(y)}")
    out = phi.apply_batch(Y)
    return out[0] if single else out


def compose_op(phi: PHMap, f: H.HomFn) -> H.HomFn:
    """``C_Phi f = f o Phi`` as a function on the source dual."""
    if f.dim != phi.target.dim:
        raise DimensionError(f"function lives on dimension {f.dim}, map lands in {phi.target.dim}")
    return H.Composed(f, phi)


def extract_phi(space_E: Space, space_F: Space, generator_action) -> Tabulated:
    """The induced map of a lattice homomorphism known on generators.

    ``generator_action`` maps each basis index ``i`` of ``E`` (an int, a
    string, or the position in a list) to the image function of ``delta_{e_i}``
    on ``F*``.
    """
    if isinstance(generator_action, dict):
        acts = []
        for i in range(space_E.dim):
            g = generator_action.get(i, generator_action.get(str(i)))
            if g is None:
                raise ValueError(f"generator action missing basis vector e_{i}")
            acts.append(g)
    else:
        acts = list(generator_action)
        if len(acts) != space_E.dim:
            raise ValueError(f"generator action covers {len(acts)} of {space_E.dim} basis vectors")
    return Tabulated(acts, space_F, space_E)


def induced_action(phi: PHMap):
    """Images ``C_Phi delta_{e_i}`` of the generators."""
    return [compose_op(phi, H.Delta(e)) for e in np.eye(phi.target.dim)]


# ---------------------------------------------------------------------------
# norms


def operator_norm(S: np.ndarray, E: Space, F: Space) -> float:
    """``||S: E -> F||`` exactly, by extreme points or singular values."""
    S = np.asarray(S, dtype=float)
    if E.has_extreme_points:
        return float(np.max(norm(F, extreme_points(E) @ S.T)))
    if F.has_extreme_points:
        return float(np.max(dual_norm(E, dual_extreme_points(F) @ S)))
    return float(np.linalg.norm(S, 2))


def _sup_weighted(E: Space, U: np.ndarray) -> float:
    """``sup_{x in B_E} sum_i |x_i| U_i``."""
    if not np.all(np.isfinite(U)):
        return math.inf
    if E.has_extreme_points:
        return float(np.max(np.abs(extreme_points(E)) @ U))
    return float(np.linalg.norm(U))


def phi_upper(phi: PHMap, p: float) -> float:
    """Structural upper bound on ``||Phi||_p`` (``inf`` if none applies)."""
    from .fblnorm import fbl_upper

    if isinstance(phi, Adjoint):
        return operator_norm(phi.operator, phi.target, phi.source)
    if isinstance(phi, Modulus):
        return _sup_weighted(phi.target, norm(phi.source, np.eye(phi.source.dim)))
    if isinstance(phi, Tabulated):
        U = np.array([fbl_upper(phi.source, g, p).upper for g in phi.actions])
        return _sup_weighted(phi.target, U)
    if isinstance(phi, RankOneTimesFn):
        return fbl_upper(phi.source, phi.f, p).upper * float(dual_norm(phi.target, phi.x0star))
    if isinstance(phi, Composite):
        a, b = phi_upper(phi.outer, p), phi_upper(phi.inner, p)
        return a * b if math.isfinite(a) and math.isfinite(b) else math.inf
    return math.inf


def _singleton_maximizers(phi: PHMap, budget: Budget, seed: int) -> np.ndarray:
    F, E = phi.source, phi.target
    rng = np.random.default_rng(seed + 5)

    def obj(Y):
        return dual_norm(E, phi.apply_batch(Y))

    C = [sample_dual_sphere(F, budget.samples, seed + 7), np.eye(F.dim), -np.eye(F.dim)]
    if F.has_extreme_points and len(dual_extreme_points(F)) <= 4096:
        C.append(dual_extreme_points(F))
    C = np.concatenate(C)
    C = C / dual_norm(F, C)[:, None]
    v = obj(C)
    starts = C[np.argsort(-v, kind="stable")[: max(1, budget.restarts // 4)]]
    X, _ = sphere_ascent(F, obj, starts, budget.steps // 2, rng)
    return X


def _adjoint_maximizer(phi: Adjoint) -> np.ndarray:
    """Unit ``y`` in ``F*`` maximizing ``||M y||`` in ``E*``."""
    F, E, M = phi.source, phi.target, phi.matrix
    if F.has_extreme_points:
        Y = dual_extreme_points(F)
        return Y[int(np.argmax(dual_norm(E, Y @ M.T)))]
    if E.has_extreme_points:
        G = extreme_points(E) @ M  # y -> max_v |(M^T v) . y|
        g = G[int(np.argmax(np.linalg.norm(G, axis=1)))]
        ng = np.linalg.norm(g)
        return g / ng if ng > 0 else np.eye(F.dim)[0]
    return np.linalg.svd(M, full_matrices=False)[2][0]


def phi_p_norm(phi: PHMap, p: float, budget: Budget | None = None, seed: int = 0, inject=()) -> NormEstimate:
    """Bracket for ``||Phi||_p``: a witness source tuple and a structural upper."""
    budget = budget or Budget()
    p = float(p)
    E = phi.target
    U = probe_points(E, budget.samples, seed + 11)

    def num_rows(Y):
        return np.abs(phi.apply_batch(Y) @ U.T) ** p

    def num_cert(T):
        return weak_p_norm(E, phi.apply_batch(T), p, budget, seed).lower

    extra = _singleton_maximizers(phi, budget, seed)
    if isinstance(phi, Adjoint):
        extra = np.vstack([extra, _adjoint_maximizer(phi)])
    res = ratio_search(phi.source, p, num_rows, num_cert, budget, seed, extra, inject)
    up = phi_upper(phi, p)
    if res.value > up * (1 + 1e-6) + 1e-12:
        raise ConsistencyError(f"||Phi||_p lower {res.value!r} exceeds upper {up!r}")
    return NormEstimate(min(res.value, up), up, "search_lower", res.witness, math.isfinite(up))


# ---------------------------------------------------------------------------
# diagnostics


def _pairs(space: Space, samples: int, seed: int):
    rng = np.random.default_rng(seed)
    U = sample_dual_sphere(space, samples, seed) * rng.uniform(0.1, 2.0, (samples, 1))
    V = sample_dual_sphere(space, samples, seed + 1) * rng.uniform(0.1, 2.0, (samples, 1))
    eye = np.eye(space.dim)
    U[: space.dim] = eye[: min(space.dim, samples)]
    return U, V


def linearity_report(phi: PHMap, samples: int = 1000, seed: int = 0, p: float = 1.0, upper: float | None = None) -> dict:
    """Additivity, full homogeneity and the quasi-linearity ratio on seeded pairs.

    ``quasilinearity_ok`` compares the ratio with ``2 ||Phi||_p`` whenever a
    structural upper bound is known.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    F, E = phi.source, phi.target
    U, V = _pairs(F, samples, seed)
    add = dual_norm(E, phi.apply_batch(U + V) - phi.apply_batch(U) - phi.apply_batch(V))
    hom = dual_norm(E, phi.apply_batch(-U) + phi.apply_batch(U))
    ratio = add / (dual_norm(F, U) + dual_norm(F, V))
    if upper is None:
        upper = phi_upper(phi, p)
    q = float(np.max(ratio))
    i = int(np.argmax(hom))
    rep = {
        "additivity_defect": float(np.max(add)),
        "homogeneity_defect": float(hom[i]),
        "homogeneity_point": U[i].tolist(),
        "quasilinearity_ratio": q,
        "phi_upper": upper if math.isfinite(upper) else "inf",
        "samples": samples,
    }
    rep["quasilinearity_ok"] = None if not math.isfinite(upper) else bool(q <= 2 * upper + 1e-9)
    return rep


def injectivity_probe(phi: PHMap, samples: int = 200, seed: int = 0, tol: float = 1e-12) -> dict:
    """Smallest ``||Phi u - Phi v|| / ||u - v||`` over sampled and antipodal pairs."""
    if samples < 2:
        raise ValueError("samples must be >= 2")
    F, E = phi.source, phi.target
    S = sample_dual_sphere(F, samples, seed)
    eye = np.eye(F.dim)
    half = samples // 2
    U = np.concatenate([eye, S[:half], S[half:]])
    V = np.concatenate([-eye, -S[:half], S[half:][::-1]])
    keep = dual_norm(F, U - V) > 0
    U, V = U[keep], V[keep]
    ratios = dual_norm(E, phi.apply_batch(U) - phi.apply_batch(V)) / dual_norm(F, U - V)
    coll = np.flatnonzero(ratios <= tol)
    return {
        "min_ratio": float(np.min(ratios)),
        "pairs": int(len(U)),
        "collisions": int(len(coll)),
        "collision_pairs": [[U[k].tolist(), V[k].tolist()] for k in coll[:10]],
        "injective_on_samples": bool(len(coll) == 0),
    }


def comp_norm_identity_check(phi: PHMap, p: float, budget: Budget | None = None, seed: int = 0,
                             n_functions: int = 4, rtol: float = 1e-3) -> dict:
    """Check ``||C_Phi|| = ||Phi||_p`` from both sides.

    (a) ``||C_Phi f||`` lower bounds never beat ``||Phi||_p`` upper times the
    upper bound on ``||f||``; (b) feeding the map's witness tuple through
    ``delta_x`` for ``x`` on the unit sphere of ``E`` yields a lower bound on
    ``||C_Phi||`` that matches the ``||Phi||_p`` lower bound.
    """
    from .fblnorm import fbl_lower, fbl_upper

    budget = budget or Budget()
    F, E = phi.source, phi.target
    est = phi_p_norm(phi, p, budget, seed)
    W = np.atleast_2d(est.witness)

    rng = np.random.default_rng(seed + 23)
    side_a = []
    for k in range(n_functions):
        f = H.random_lattice_expression(E.dim, rng, depth=2)
        lo = fbl_lower(F, compose_op(phi, f), p, budget, seed + k).lower
        rhs = est.upper * fbl_upper(E, f, p).upper
        side_a.append({"lower": lo, "bound": rhs, "ok": bool(lo <= rhs * (1 + 1e-9) + 1e-9)})

    if E.has_extreme_points and len(extreme_points(E)) <= 64:
        xs = extreme_points(E)
    else:
        img = phi.apply_batch(W)
        xs = np.atleast_2d(witness_point(E, img, weak_p_norm(E, img, p, budget, seed)))
    comp_lower = 0.0
    for x in xs:
        g = compose_op(phi, H.Delta(x))
        comp_lower = max(comp_lower, fbl_lower(F, g, p, budget, seed, inject=[W]).lower / float(norm(E, x)))
    ok_b = comp_lower >= est.lower - 1e-6
    agree = None
    if math.isfinite(est.upper) and est.upper > 0:
        agree = bool(abs(est.upper - comp_lower) <= rtol * est.upper and abs(est.upper - est.lower) <= rtol * est.upper)
    return {
        "phi_lower": est.lower,
        "phi_upper": est.upper if math.isfinite(est.upper) else "inf",
        "comp_lower": comp_lower,
        "side_a": side_a,
        "side_a_ok": all(s["ok"] for s in side_a),
        "side_b_ok": bool(ok_b),
        "agree": agree,
    }


def p_monotonicity_check(phi: PHMap, p: float, q: float, budget: Budget | None = None, seed: int = 0,
                         tol: float = 1e-6) -> dict:
    """``||Phi||_q <= ||Phi||_p`` for ``p < q``.

    The q-witness is reweighted into a p-feasible tuple and injected into the
    p-search, so the lower bounds are comparable too.
    """
    from .summing import reweight_tuple

    if not 1 <= p < q:
        raise ValueError("need 1 <= p < q")
    budget = budget or Budget()
    eq = phi_p_norm(phi, q, budget, seed)
    W = np.atleast_2d(eq.witness)
    inject = []
    if W.size:
        img = phi.apply_batch(W)
        x = witness_point(phi.target, img, weak_p_norm(phi.target, img, q, budget, seed))
        vals = img @ x
        inject.append((reweight_tuple(W, vals, p, q), 1.0))
    ep = phi_p_norm(phi, p, budget, seed, inject)
    violation = bool(math.isfinite(ep.upper) and eq.lower > ep.upper + tol)
    return {
        "p": p,
        "q": q,
        "lower_q": eq.lower,
        "lower_p": ep.lower,
        "upper_p": ep.upper if math.isfinite(ep.upper) else "inf",
        "violation": violation,
        "lower_vs_lower_ok": bool(eq.lower <= ep.lower + tol),
        "status": "fail" if violation else ("pass" if math.isfinite(ep.upper) else "inconclusive"),
    }


# ---------------------------------------------------------------------------
# JSON


def map_from_json(obj, source: Space | None = None, target: Space | None = None, path: str = "map") -> PHMap:
    """Parse a map.  ``source``/``target`` keys in the JSON override the defaults."""
    if not isinstance(obj, dict) or "map" not in obj:
        raise H.ASTError(f"{path}: expected an object with a 'map' key")
    try:
        if "source" in obj:
            source = space_from_json(obj["source"])
        if "target" in obj:
            target = space_from_json(obj["target"])
    except ValueError as exc:
        raise H.ASTError(f"{path}: bad space ({exc})") from None
    kind = obj["map"]
    if kind == "compose":
        if "outer" not in obj or "inner" not in obj:
            raise H.ASTError(f"{path}: compose needs 'outer' and 'inner'")
        inner = map_from_json(obj["inner"], source, None, path + ".inner")
        outer = map_from_json(obj["outer"], inner.target, target, path + ".outer")
        return Composite(outer, inner)
    if source is None:
        raise H.ASTError(f"{path}: source space unknown")
    if kind == "adjoint":
        try:
            M = np.array(obj["matrix"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise H.ASTError(f"{path}: bad matrix ({exc})") from None
        if M.ndim != 2 or M.shape[1] != source.dim:
            raise H.ASTError(f"{path}: matrix must have {source.dim} columns")
        target = target or _like(source, M.shape[0], path)
        try:
            return Adjoint(M, source, target)
        except DimensionError as exc:
            raise H.ASTError(f"{path}: {exc}") from None
    if kind == "modulus":
        return Modulus(source)
    if kind == "rank1":
        if "fn" not in obj or "x0star" not in obj:
            raise H.ASTError(f"{path}: rank1 needs 'fn' and 'x0star'")
        x0 = np.array(obj["x0star"], dtype=float).reshape(-1)
        target = target or _like(source, x0.size, path)
        f = H.from_json(obj["fn"], source, path + ".fn")
        try:
            return RankOneTimesFn(f, x0, source, target)
        except DimensionError as exc:
            raise H.ASTError(f"{path}: {exc}") from None
    if kind == "tabulated":
        act = obj.get("action")
        if not isinstance(act, dict):
            raise H.ASTError(f"{path}: tabulated needs an 'action' object")
        target = target or _like(source, len(act), path)
        gens = {}
        for i in range(target.dim):
            if str(i) not in act:
                raise H.ASTError(f"{path}.action: missing basis vector {i}")
            gens[i] = H.from_json(act[str(i)], source, f"{path}.action[{i}]")
        return extract_phi(target, source, gens)
    raise H.ASTError(f"{path}: unknown map kind {kind!r}")


def _like(space: Space, dim: int, path: str) -> Space:
    if space.kind == "polyhedral":
        if dim != space.dim:
            raise H.ASTError(f"{path}: give an explicit 'target' space for a polyhedral source")
        return space
    return make_space(dim, space.kind)


# ---------------------------------------------------------------------------
# seeded families for tests and the verify suite


def random_map(kind: str, space: Space, rng, target: Space | None = None) -> PHMap:
    """A seeded map of the given kind on ``space`` (``target`` defaults to ``space``)."""
    target = target or space
    if kind == "adjoint":
        return Adjoint(rng.standard_normal((target.dim, space.dim)), space, target)
    if kind == "modulus":
        return Modulus(space)
    if kind == "rank1":
        f = H.random_lattice_expression(space.dim, rng, depth=2)
        return RankOneTimesFn(f, rng.standard_normal(target.dim), space, target)
    if kind == "tabulated":
        acts = [H.random_lattice_expression(space.dim, rng, depth=2) for _ in range(target.dim)]
        return Tabulated(acts, space, target)
    if kind == "composite":
        return Composite(Modulus(target), Adjoint(rng.standard_normal((target.dim, space.dim)), space, target))
    raise ValueError(f"unknown map kind {kind!r}")
