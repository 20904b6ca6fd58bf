"""Witness-tuple search for suprema of the form ``N(T) / ||T||_{p,weak}``.

Both the FBL^p norm of a function and the p-norm of a homogeneous map are
suprema over tuples ``T`` of a ratio whose numerator is homogeneous of degree
one in ``T``.  Candidates are ranked with cheap additive surrogates
(``|.|^p`` contributions at a finite set of test points) and the best few are
then certified: the tuple is divided by a certified upper bound on its weak
norm, which makes it feasible, and the numerator is recomputed on the
feasible tuple.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .estimate import Budget
from .spaces import Space, dual_extreme_points, dual_norm, extreme_points, sample_dual_sphere, sample_sphere
from .summing import weak_p_norm

_MAX_EXT = 4096


@dataclass
class SearchResult:
    value: float
    witness: np.ndarray
    source: str


def probe_points(space: Space, count: int, seed: int) -> np.ndarray:
    """Points of the unit ball at which weak norms are evaluated for ranking.

    All extreme points when they are few enough; otherwise sphere samples.
    """
    if space.has_extreme_points:
        V = extreme_points(space)
        if len(V) <= _MAX_EXT:
            return V
    pts = [np.eye(space.dim), sample_sphere(space, count, seed)]
    P = np.concatenate(pts)
    return P / np.linalg.norm(P, axis=1, keepdims=True) if space.kind == "l2" else P


def candidate_pool(space: Space, budget: Budget, seed: int, extra=()) -> np.ndarray:
    """Functionals of dual norm one that seed the tuple search."""
    rng = np.random.default_rng(seed + 17)
    parts = [np.atleast_2d(np.asarray(e, dtype=float)) for e in extra if e is not None and np.size(e)]
    eye = np.eye(space.dim)
    eye = eye / dual_norm(space, eye)[:, None]
    parts += [eye, -eye]
    if space.has_extreme_points:
        D = dual_extreme_points(space)
        if len(D) > 4 * budget.pool:
            D = D[rng.choice(len(D), 4 * budget.pool, replace=False)]
        parts.append(D)
    parts.append(sample_dual_sphere(space, budget.pool, seed + 1))
    P = np.concatenate(parts)
    keep = dual_norm(space, P) > 0
    return P[keep]


def _tighten(T: np.ndarray, weak_upper: float) -> np.ndarray:
    """Make a tuple feasible by dividing out a certified bound on its weak norm."""
    return T / weak_upper


def ratio_search(space: Space, p: float, num_rows, num_cert, budget: Budget, seed: int,
                 extra_pool=(), inject=()) -> SearchResult:
    """Maximize ``num_cert(T) / ||T||_{p,weak}`` over tuples in ``space*``.

    ``num_rows(Y)`` returns, for a batch of functionals, a ``(k, s)`` array of
    nonnegative contributions whose column sums over a tuple, maxed over
    columns and raised to ``1/p``, rank the numerator.  ``num_cert(T)`` is a
    certified lower bound of the numerator of one tuple.  ``inject`` holds
    tuples (or ``(tuple, weak_upper)`` pairs with a known bound on the weak
    norm) to evaluate alongside the search; they win ties.
    """
    rng = np.random.default_rng(seed)
    Vt = probe_points(space, budget.samples, seed + 3)

    def den_rows(Y):
        return np.abs(Y @ Vt.T) ** p

    def ratio(Sn, Sd):
        dn = np.max(Sd, axis=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = (np.max(Sn, axis=-1) / dn) ** (1.0 / p)
        return np.where(dn > 0, r, 0.0)

    cands = []  # (approx_ratio, order, tuple, known_upper)

    def add(T, r, known=None):
        cands.append((float(r), len(cands), np.array(T, dtype=float), known))

    for item in inject:
        T, known = item if isinstance(item, tuple) else (item, None)
        T = np.atleast_2d(np.asarray(T, dtype=float))
        add(T, ratio(num_rows(T).sum(0), den_rows(T).sum(0)), known)

    P = candidate_pool(space, budget, seed, extra_pool)
    Cn, Cd = num_rows(P), den_rows(P)
    # a singleton's weak norm is its dual norm, so rank singletons exactly
    single = np.max(Cn, axis=-1) ** (1.0 / p) / dual_norm(space, P)
    order = np.argsort(-single, kind="stable")
    always = set(range(len(cands)))
    for i in order[:3]:
        always.add(len(cands))
        add(P[i : i + 1], single[i])

    # greedy growth from the best singletons
    for i in order[: min(4, len(order))]:
        idx = [int(i)]
        Sn, Sd = Cn[i].copy(), Cd[i].copy()
        best_r, best_idx = single[i], list(idx)
        for _ in range(budget.tuple_max - 1):
            r = ratio(Sn + Cn, Sd + Cd)
            j = int(np.argmax(r))
            idx.append(j)
            Sn, Sd = Sn + Cn[j], Sd + Cd[j]
            if r[j] > best_r:
                best_r, best_idx = r[j], list(idx)
        add(P[best_idx], best_r)

    # random tuples of the scheduled sizes
    for m in budget.tuple_sizes:
        if m > budget.tuple_max or m < 1:
            continue
        I = rng.integers(len(P), size=(budget.restarts, m))
        r = ratio(Cn[I].sum(1), Cd[I].sum(1))
        j = int(np.argmax(r))
        add(P[I[j]], r[j])

    # coordinate perturbation of the leading candidate
    cands.sort(key=lambda c: (-c[0], c[1]))
    lead = cands[0]
    if budget.refine_steps > 0 and lead[3] is None:
        T = lead[2].copy()
        Rn, Rd = num_rows(T), den_rows(T)
        cur = float(ratio(Rn.sum(0), Rd.sum(0)))
        sig = 0.3 * np.mean(dual_norm(space, T)) if np.any(T) else 0.3
        decay = (1e-4) ** (1.0 / max(budget.refine_steps - 1, 1))
        for _ in range(budget.refine_steps):
            k = 32
            rows = rng.integers(len(T), size=k)
            new = T[rows] + sig * rng.standard_normal((k, space.dim))
            nn, nd = num_rows(new), den_rows(new)
            Sn = Rn.sum(0)[None, :] - Rn[rows] + nn
            Sd = Rd.sum(0)[None, :] - Rd[rows] + nd
            r = ratio(Sn, Sd)
            j = int(np.argmax(r))
            if r[j] > cur:
                T[rows[j]] = new[j]
                Rn[rows[j]], Rd[rows[j]] = nn[j], nd[j]
                cur = float(r[j])
            sig *= decay
        add(T, cur)

    # certify the best few, every injected tuple and the leading singletons
    cands.sort(key=lambda c: (-c[0], c[1]))
    n_inj = len(inject)
    chosen = [c for c in cands if c[1] in always] + [c for c in cands if c[1] not in always][:6]
    chosen.sort(key=lambda c: c[1])
    best = None
    for _, order_id, T, known in chosen:
        if not np.any(T):
            continue
        up = weak_p_norm(space, T, p, budget, seed).upper
        if known is not None:
            up = min(up, known)
        if not up > 0:
            continue
        Tw = _tighten(T, up)
        val = float(num_cert(Tw))
        if best is None or val > best.value:
            best = SearchResult(val, Tw, "inject" if order_id < n_inj else "search")
    if best is None:
        return SearchResult(0.0, np.zeros((0, space.dim)), "none")
    return best
