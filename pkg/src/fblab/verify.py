"""The invariant battery behind ``fblab verify``.

Every check returns ``(ok, detail)``; on failure ``detail`` carries a concrete
counterexample.  Checks are seeded and sized to finish in seconds.
"""

from __future__ import annotations

import numpy as np

from . import homfn as H
from . import phmaps as PM
from . import summing as S
from . import witnesses as W
from .estimate import Budget, ConsistencyError
from .fblnorm import fbl_lower, fbl_upper, witness_value
from .spaces import dual_norm, extreme_points, make_space, norm, pairing

__all__ = ["CHECKS", "verify_suite", "run_checks"]

FAST = Budget(samples=96, restarts=8, steps=60, pool=24, refine_steps=10)

_SPACES = [
    make_space(2, "l1"),
    make_space(3, "linf"),
    make_space(3, "l2"),
    make_space(2, [[1, 0], [-1, 0], [0.5, 1], [-0.5, -1], [1, 1], [-1, -1]]),
]


def _rng(seed, k):
    return np.random.default_rng([seed, k])


def _short(a):
    return np.round(np.asarray(a, dtype=float), 6).tolist()


# -- spaces -----------------------------------------------------------------


def check_pairing_bound(seed):
    rng = _rng(seed, 1)
    for sp_ in _SPACES:
        F = rng.standard_normal((1000, sp_.dim))
        V = rng.standard_normal((1000, sp_.dim))
        lhs = np.abs(pairing(F, V))
        rhs = dual_norm(sp_, F) * norm(sp_, V)
        bad = np.flatnonzero(lhs > rhs * (1 + 1e-9))
        if bad.size:
            i = bad[0]
            return False, f"{sp_}: f={_short(F[i])} v={_short(V[i])}"
    return True, ""


def check_dual_by_vertices(seed):
    rng = _rng(seed, 2)
    for sp_ in _SPACES:
        if not sp_.has_extreme_points:
            continue
        F = rng.standard_normal((200, sp_.dim))
        via = np.max(np.abs(F @ extreme_points(sp_).T), axis=1)
        d = np.max(np.abs(via - dual_norm(sp_, F)) / np.maximum(1, via))
        if d > 1e-12:
            return False, f"{sp_}: deviation {d:.3g}"
    return True, ""


# -- homfn ------------------------------------------------------------------


def check_lattice_pointwise(seed):
    rng = _rng(seed, 3)
    X = rng.standard_normal((200, 3))
    for _ in range(20):
        f = H.random_lattice_expression(3, rng, depth=2)
        g = H.random_lattice_expression(3, rng, depth=2)
        fv, gv = f.eval_batch(X), g.eval_batch(X)
        for node, ref in ((H.Sup((f, g)), np.maximum(fv, gv)), (H.Inf((f, g)), np.minimum(fv, gv)),
                          (H.Abs(f), np.abs(fv))):
            got = node.eval_batch(X)
            bad = np.flatnonzero(got != ref)
            if bad.size:
                i = bad[0]
                return False, (f"{type(node).__name__}: f={H.to_json(f)} g={H.to_json(g)} "
                               f"x*={_short(X[i])} got {got[i]!r} expected {ref[i]!r}")
    return True, ""


def check_homogeneity(seed):
    rng = _rng(seed, 4)
    for sp_ in _SPACES:
        for _ in range(5):
            f = H.random_lattice_expression(sp_.dim, rng)
            d = H.homogeneity_defect(f, sp_, 2000, seed)
            if d > 1e-9:
                return False, f"{H.to_json(f)} on {sp_}: defect {d:.3g}"
    d = H.homogeneity_defect(H.NormFn(_SPACES[0]), _SPACES[0], 2000, seed)
    return (d <= 1e-12, f"norm function defect {d:.3g}")


def check_dim1(seed):
    rng = _rng(seed, 5)
    grid = np.linspace(-10, 10, 1000)[:, None]
    for _ in range(100):
        a, b = rng.standard_normal(2)
        f = H.dim1_representation(a, b)
        ext = np.where(grid[:, 0] >= 0, grid[:, 0] * a, -grid[:, 0] * b)
        dev = np.max(np.abs(f.eval_batch(grid) - ext))
        if dev > 1e-12:
            return False, f"(f(1), f(-1)) = ({a!r}, {b!r}) deviation {dev:.3g}"
    return True, ""


def check_mu_dirac(seed):
    rng = _rng(seed, 6)
    sp_ = make_space(3, "l2")
    X = rng.standard_normal((500, 3))
    for p in (1.0, 1.5, 2.0, 3.0):
        x0 = rng.standard_normal(3)
        x0 /= np.linalg.norm(x0) * 1.5
        mu = W.mu_induced(sp_, [(1.0, x0)], p)
        ref = H.Abs(H.Delta(x0))
        if not np.array_equal(mu.eval_batch(X), ref.eval_batch(X)):
            return False, f"p={p} x0={_short(x0)}"
    return True, ""


def check_zero_at_origin(seed):
    rng = _rng(seed, 7)
    for sp_ in _SPACES:
        f = H.random_lattice_expression(sp_.dim, rng) | H.NormFn(sp_)
        v = H.evaluate(f, np.zeros(sp_.dim))
        if v != 0:
            return False, f"{H.to_json(f)} gives {v!r} at 0"
    return True, ""


# -- summing ----------------------------------------------------------------


def check_sign_oracle(seed):
    rng = _rng(seed, 8)
    for k in range(60):
        sp_ = make_space(int(rng.integers(1, 6)), "l1" if k % 2 else "linf")
        T = rng.standard_normal((int(rng.integers(1, 5)), sp_.dim))
        a = S.weak_1_norm_signs(sp_, T).lower
        b = S.weak_p_norm(sp_, T, 1).lower
        if abs(a - b) > 1e-9:
            return False, f"{sp_} tuple {_short(T)}: signs {a!r} vertices {b!r}"
    return True, ""


def check_l2_svd(seed):
    rng = _rng(seed, 9)
    sp_ = make_space(4, "l2")
    for _ in range(30):
        T = rng.standard_normal((int(rng.integers(1, 6)), 4))
        a = S.weak_p_norm(sp_, T, 2).lower
        b = np.linalg.svd(T, compute_uv=False)[0]
        if abs(a - b) > 1e-9:
            return False, f"tuple {_short(T)}: {a!r} vs sigma {b!r}"
    return True, ""


def check_tuple_norm_axioms(seed):
    rng = _rng(seed, 10)
    for sp_ in _SPACES:
        if not sp_.has_extreme_points:
            continue
        for p in (1.0, 2.0, 3.0):
            A = rng.standard_normal((3, sp_.dim))
            B = rng.standard_normal((3, sp_.dim))
            lam = float(rng.uniform(-3, 3))
            wa = S.weak_p_norm(sp_, A, p).lower
            if abs(S.weak_p_norm(sp_, lam * A, p).lower - abs(lam) * wa) > 1e-9 * max(1, wa):
                return False, f"scaling fails on {sp_} p={p}"
            if S.weak_p_norm(sp_, A + B, p).lower > wa + S.weak_p_norm(sp_, B, p).lower + 1e-9:
                return False, f"subadditivity fails on {sp_} p={p}"
            ext = np.vstack([A, B[:1]])
            if S.weak_p_norm(sp_, ext, p).lower < wa - 1e-12:
                return False, f"appending decreased the norm on {sp_} p={p}"
    return True, ""


def check_sign_cap(seed):
    sp_ = make_space(3, "l1")
    T = _rng(seed, 11).standard_normal((25, 3))
    try:
        S.weak_1_norm_signs(sp_, T)
    except S.SignCapError as exc:
        return True, str(exc)
    return False, "25 functionals enumerated without hitting the cap"


# -- fblnorm ----------------------------------------------------------------


def check_delta_isometry(seed):
    rng = _rng(seed, 12)
    for sp_ in _SPACES[:3]:
        x = rng.standard_normal(sp_.dim)
        f = H.Delta(x)
        for p in (1.0, 2.0):
            up = fbl_upper(sp_, f, p).upper
            lo = fbl_lower(sp_, f, p, FAST, seed).lower
            nx = float(norm(sp_, x))
            if abs(up - nx) > 1e-12 * max(1, nx) or lo < 0.99 * nx:
                return False, f"{sp_} x={_short(x)} p={p}: [{lo!r}, {up!r}] vs {nx!r}"
    return True, ""


def check_domination_and_soundness(seed):
    rng = _rng(seed, 13)
    for k in range(16):
        sp_ = _SPACES[k % len(_SPACES)]
        f = H.random_lattice_expression(sp_.dim, rng, depth=2)
        p = (1.0, 2.0)[k % 2]
        lo = fbl_lower(sp_, f, p, FAST, seed + k)
        un = H.uniform_norm_ball(f, sp_, FAST, seed + k)
        up = fbl_upper(sp_, f, p).upper
        if lo.lower < un.lower - 1e-9:
            return False, f"{H.to_json(f)} on {sp_}: FBL lower {lo.lower!r} < uniform {un.lower!r}"
        if lo.lower > up * (1 + 1e-6):
            return False, f"{H.to_json(f)} on {sp_}: lower {lo.lower!r} > upper {up!r}"
    return True, ""


def check_witness_feasible(seed):
    rng = _rng(seed, 14)
    for k in range(10):
        sp_ = _SPACES[k % len(_SPACES)]
        p = (1.0, 2.0)[k % 2]
        f = H.random_lattice_expression(sp_.dim, rng, depth=2) if k % 3 else H.NormFn(sp_)
        est = fbl_lower(sp_, f, p, FAST, seed + k)
        Wt = np.atleast_2d(est.witness)
        w = S.weak_p_norm(sp_, Wt, p, FAST, seed).upper
        v = witness_value(f, Wt, p)
        if w > 1 + 1e-9 or abs(v - est.lower) > 1e-9 * max(1, v):
            return False, f"{H.to_json(f)} on {sp_} p={p}: weak norm {w!r}, value {v!r} vs {est.lower!r}"
    return True, ""


def check_injection_scale(seed):
    sp_ = make_space(2, "l1")
    f = H.NormFn(sp_)
    base = np.eye(2)
    for c in (0.25, 1.0, 5.0):
        lo = fbl_lower(sp_, f, 1.0, FAST, seed, inject=[c * base]).lower
        if abs(lo - 2.0) > 1e-9:
            return False, f"norm function on {sp_}, injected {c} * (e1*, e2*): lower {lo!r}, expected 2"
    return True, ""


def check_lattice_norm_symmetries(seed):
    rng = _rng(seed, 15)
    sp_ = make_space(3, "linf")
    for _ in range(4):
        f = H.random_lattice_expression(3, rng, depth=2)
        a = fbl_lower(sp_, f, 1.0, FAST, seed).lower
        b = fbl_lower(sp_, H.Abs(f), 1.0, FAST, seed).lower
        c = fbl_lower(sp_, H.Scale(-3.0, f), 1.0, FAST, seed).lower
        if a != b or abs(c - 3 * a) > 1e-9 * max(1, c):
            return False, f"{H.to_json(f)}: |f| gives {b!r}, f gives {a!r}, -3f gives {c!r}"
    return True, ""


# -- witnesses --------------------------------------------------------------


def check_divergence(seed):
    for p in (1.0, 2.0):
        rep = W.divergence_witness(60, p)
        L = rep.partial_sums
        if np.any(np.diff(L) <= 0):
            return False, f"p={p}: L not strictly increasing"
        sp_ = make_space(60, "l2")
        m = 20
        lo = fbl_lower(sp_, rep.f, p, FAST, seed, inject=[W.divergence_tuple(60, p, m)]).lower
        if lo < L[m - 1] / rep.value("K") - 1e-9:
            return False, f"p={p}: injected lower {lo!r} < L({m})/K"
    return True, ""


def check_kernel(seed):
    rng = _rng(seed, 16)
    for _ in range(30):
        n = int(rng.integers(2, 13))
        m = int(rng.integers(0, n))
        B = rng.standard_normal((n, n))
        B /= np.linalg.norm(B, axis=1, keepdims=True)
        Bstar = np.linalg.inv(B).T
        sp_ = make_space(n, "l2")
        X = rng.standard_normal((m, n))
        xs = W.kernel_witness(sp_, X, Bstar[: m + 1])
        f = W.series_witness(sp_, B)
        res = float(np.max(np.abs(X @ xs), initial=0.0))
        if res > 1e-9 or H.evaluate(f, xs) <= 1e-6:
            return False, f"n={n} m={m}: residual {res:.3g}, f(x*)={H.evaluate(f, xs)!r}"
    return True, ""


def check_gap(seed):
    rng = _rng(seed, 17)
    for m in (2, 4):
        N = 2 * m + 4
        for _ in range(5):
            V = np.zeros((3, N))
            V[:, : m - 1] = rng.standard_normal((3, m - 1))
            h = H.random_lattice_expression(N, rng, depth=2, vectors=V)
            rep = W.gap_witness(N, 1.0, 2.0, m, h)
            K = rep.value("K")
            if rep.value("chain_bound") < 0.25 / (K + 2) - 1e-6 or rep.value("eq9_defect") > 1e-9:
                return False, f"m={m} h={H.to_json(h)}: {rep.certificate}"
    return True, ""


# -- phmaps -----------------------------------------------------------------


def check_compose_lattice(seed):
    rng = _rng(seed, 18)
    sp_ = make_space(3, "l2")
    X = rng.standard_normal((200, 3))
    for kind in ("adjoint", "modulus", "rank1", "tabulated"):
        phi = PM.random_map(kind, sp_, rng)
        f = H.random_lattice_expression(3, rng, depth=2)
        g = H.random_lattice_expression(3, rng, depth=2)
        lhs = PM.compose_op(phi, H.Sup((f, g))).eval_batch(X)
        rhs = np.maximum(PM.compose_op(phi, f).eval_batch(X), PM.compose_op(phi, g).eval_batch(X))
        if not np.array_equal(lhs, rhs):
            i = int(np.flatnonzero(lhs != rhs)[0])
            return False, f"{kind}: f={H.to_json(f)} g={H.to_json(g)} y*={_short(X[i])}"
    return True, ""


def check_adjoint_delta(seed):
    rng = _rng(seed, 19)
    E, F = make_space(3, "l1"), make_space(3, "linf")
    Sop = rng.standard_normal((3, 3))
    phi = PM.Adjoint.of_operator(Sop, E, F)
    Y = rng.standard_normal((100, 3))
    for x in np.eye(3):
        a = PM.compose_op(phi, H.Delta(x)).eval_batch(Y)
        b = H.Delta(Sop @ x).eval_batch(Y)
        d = float(np.max(np.abs(a - b)))
        if d > 1e-12:
            return False, f"S={_short(Sop)} x={x.tolist()}: deviation {d:.3g}"
    return True, ""


def check_extract_recovers(seed):
    rng = _rng(seed, 20)
    E, F = make_space(3, "l2"), make_space(2, "l1")
    Sop = rng.standard_normal((2, 3))
    phi = PM.Adjoint.of_operator(Sop, E, F)
    tab = PM.extract_phi(E, F, PM.induced_action(phi))
    M = tab.apply_batch(np.eye(2)).T
    acts = [H.Delta(Sop @ e) for e in np.eye(3)]
    M2 = PM.extract_phi(E, F, acts).apply_batch(np.eye(2)).T
    d = max(float(np.max(np.abs(M - Sop.T))), float(np.max(np.abs(M2 - Sop.T))))
    return (d <= 1e-12, f"S={_short(Sop)}: recovered adjoint off by {d:.3g}")


def check_inverse(seed):
    rng = _rng(seed, 21)
    sp_ = make_space(3, "l2")
    phi = PM.Adjoint(rng.standard_normal((3, 3)) + 3 * np.eye(3), sp_, sp_)
    f = H.random_lattice_expression(3, rng)
    g = PM.compose_op(phi, PM.compose_op(phi.inverse(), f))
    X = rng.standard_normal((200, 3))
    d = float(np.max(np.abs(g.eval_batch(X) - f.eval_batch(X)) / (1 + np.abs(f.eval_batch(X)))))
    return (d <= 1e-9, f"matrix {_short(phi.matrix)}: deviation {d:.3g}")


def check_quasilinear(seed):
    rng = _rng(seed, 22)
    for sp_ in _SPACES[:3]:
        for kind in ("adjoint", "modulus", "rank1", "tabulated", "composite"):
            phi = PM.random_map(kind, sp_, rng)
            rep = PM.linearity_report(phi, 2000, seed)
            if rep["quasilinearity_ok"] is False:
                return False, f"{kind} on {sp_}: ratio {rep['quasilinearity_ratio']!r} > 2 * {rep['phi_upper']!r}"
            if kind == "adjoint" and rep["homogeneity_defect"] > 1e-12:
                return False, f"adjoint on {sp_}: homogeneity defect {rep['homogeneity_defect']!r}"
    return True, ""


def check_p_monotone(seed):
    rng = _rng(seed, 23)
    sp_ = make_space(2, "l1")
    for kind in ("adjoint", "modulus", "rank1"):
        phi = PM.random_map(kind, sp_, rng)
        rep = PM.p_monotonicity_check(phi, 1.0, 2.0, FAST, seed)
        if rep["violation"]:
            return False, f"{kind}: {rep}"
    return True, ""


def check_comp_identity(seed):
    rng = _rng(seed, 24)
    E, F = make_space(2, "l1"), make_space(2, "linf")
    phi = PM.Adjoint.of_operator(rng.standard_normal((2, 2)), E, F)
    rep = PM.comp_norm_identity_check(phi, 1.0, FAST, seed, n_functions=2)
    ok = rep["side_a_ok"] and rep["side_b_ok"] and rep["agree"]
    return (bool(ok), f"{rep}")


CHECKS = [
    ("spaces.pairing_bound", check_pairing_bound),
    ("spaces.dual_norm_by_vertices", check_dual_by_vertices),
    ("homfn.lattice_pointwise", check_lattice_pointwise),
    ("homfn.positive_homogeneity", check_homogeneity),
    ("homfn.dim1_completeness", check_dim1),
    ("homfn.mu_single_atom", check_mu_dirac),
    ("homfn.zero_at_origin", check_zero_at_origin),
    ("summing.sign_oracle", check_sign_oracle),
    ("summing.l2_singular_value", check_l2_svd),
    ("summing.tuple_norm_axioms", check_tuple_norm_axioms),
    ("summing.sign_cap_guard", check_sign_cap),
    ("fblnorm.delta_isometry", check_delta_isometry),
    ("fblnorm.domination_and_soundness", check_domination_and_soundness),
    ("fblnorm.witness_feasible", check_witness_feasible),
    ("fblnorm.injection_scale_invariance", check_injection_scale),
    ("fblnorm.lattice_norm_symmetries", check_lattice_norm_symmetries),
    ("witnesses.divergence", check_divergence),
    ("witnesses.kernel", check_kernel),
    ("witnesses.gap_floor", check_gap),
    ("phmaps.compose_lattice_hom", check_compose_lattice),
    ("phmaps.adjoint_delta", check_adjoint_delta),
    ("phmaps.extract_recovers_adjoint", check_extract_recovers),
    ("phmaps.inverse_composition", check_inverse),
    ("phmaps.quasilinearity", check_quasilinear),
    ("phmaps.p_monotonicity", check_p_monotone),
    ("phmaps.comp_norm_identity", check_comp_identity),
]


def run_checks(seed: int = 0):
    """Run every check; exceptions count as failures."""
    out = []
    for name, fn in CHECKS:
        try:
            ok, detail = fn(seed)
        except (ConsistencyError, ValueError, ArithmeticError) as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append((name, bool(ok), detail))
    return out


def verify_suite(seed: int = 0, stream=None) -> bool:
    """Print one PASS/FAIL line per invariant; True iff everything passed."""
    import sys

    stream = stream or sys.stdout
    results = run_checks(seed)
    for name, ok, detail in results:
        line = f"PASS {name}" if ok else f"FAIL {name}: {detail}"
        print(line, file=stream)
    n_fail = sum(not ok for _, ok, _ in results)
    print(f"{len(results) - n_fail}/{len(results)} invariants passed", file=stream)
    return n_fail == 0
