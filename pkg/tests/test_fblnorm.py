import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fblab import Budget, ConsistencyError, make_space
from fblab import fblnorm
from fblab import homfn as H
from fblab.fblnorm import fbl_bracket, fbl_lower, fbl_upper, normfn_upper, reweighted_injection, witness_value
from fblab.spaces import norm
from fblab.summing import weak_p_norm
from strategies import HEX, seeds, space_and_tuple, spaces

L1, L2 = make_space(2, "l1"), make_space(2, "l2")
SMALL = Budget(samples=48, restarts=4, steps=30, pool=12, refine_steps=4)


def e(i, n=2):
    v = np.zeros(n)
    v[i] = 1.0
    return v


# the bounds behind the norm-function values, checked on arbitrary tuples


@given(space_and_tuple(max_dim=2, max_len=6).filter(lambda s: s[0].kind == "l1" and s[0].dim == 2))
def test_column_sum_bound_l1(st_):
    _, T = st_
    weak = np.max(np.sum(np.abs(T), axis=0))  # vertices of the l1 ball are +-e_i
    obj = np.sum(np.max(np.abs(T), axis=1))
    assert obj <= 2 * weak + 1e-9


@given(space_and_tuple(max_dim=2, max_len=6).filter(lambda s: s[0].kind == "l2" and s[0].dim == 2))
def test_trace_bound_l2(st_):
    _, T = st_
    weak2 = np.max(np.linalg.eigvalsh(T.T @ T))
    assert np.sum(T * T) <= 2 * weak2 * (1 + 1e-9) + 1e-12


def test_normfn_brackets():
    a = fbl_bracket(L1, H.NormFn(L1), 1)
    assert 1.99 <= a.lower <= a.upper <= 2.0
    assert witness_value(H.NormFn(L1), np.eye(2), 1) == 2
    b = fbl_bracket(L2, H.NormFn(L2), 2)
    assert 1.40 <= b.lower <= b.upper <= 1.4143


@pytest.mark.parametrize("sp_, p, expected", [(L1, 1, 2.0), (L2, 2, np.sqrt(2)), (make_space(3, "l2"), 2, np.sqrt(3))])
def test_normfn_upper_tight_cases(sp_, p, expected):
    assert normfn_upper(sp_, p) == pytest.approx(expected, rel=1e-12)


# examples


@pytest.mark.parametrize("p", [1, 1.5, 2, 3])
def test_delta_isometry_example(p):
    f = H.Delta([1, -2])
    assert fbl_upper(L1, f, p).upper == 3
    est = fbl_bracket(L1, f, p)
    assert 3 * 0.99 <= est.lower <= est.upper == 3


def test_sup_of_moduli_upper():
    f = H.Sup((H.Abs(H.Delta(e(0))), H.Abs(H.Delta(e(1)))))
    assert fbl_upper(L1, f, 1).upper == 2


def test_unit_mass_measure_upper():
    f = H.MuInduced([0.25, 0.75], [e(0), [0.6, 0.8]], 2, 2)
    assert fbl_upper(L2, f, 2).upper == pytest.approx(1, abs=1e-12)


def test_zero_function():
    est = fbl_bracket(L1, H.Scale(0.0, H.Delta([1, 1])), 1)
    assert est.lower == est.upper == 0
    lo = fbl_lower(L1, H.Delta([0, 0]), 1, SMALL)
    assert lo.lower == 0 and len(lo.witness) == 0


def test_unrecognized_nodes_have_infinite_upper():
    class Odd(H.HomFn):
        dim = 2

        def eval_batch(self, X):
            return np.abs(X[:, 0])

    assert fbl_upper(L1, Odd(), 1).upper == np.inf


def test_ray_indicator_upper():
    f = H.RayIndicator([0.5, 0.0])
    est = fbl_bracket(L2, f, 1, SMALL)
    assert est.upper == 2 and est.lower == pytest.approx(2, rel=1e-12)


# witnesses


@given(spaces(max_dim=3), seeds, st.sampled_from([1.0, 1.5, 2.0]))
def test_witness_is_feasible_and_reproduces(sp_, seed, p):
    rng = np.random.default_rng(seed)
    f = H.random_lattice_expression(sp_.dim, rng, depth=2)
    est = fbl_lower(sp_, f, p, SMALL, seed)
    W = np.atleast_2d(est.witness)
    assert weak_p_norm(sp_, W, p).upper <= 1 + 1e-9
    assert witness_value(f, W, p) == pytest.approx(est.lower, rel=1e-9, abs=1e-12)


@given(spaces(max_dim=3), seeds, st.sampled_from([1.0, 2.0]))
def test_domination_of_uniform_norm(sp_, seed, p):
    rng = np.random.default_rng(seed)
    f = H.random_lattice_expression(sp_.dim, rng, depth=2)
    unif = H.uniform_norm_ball(f, sp_, SMALL, seed)
    assert fbl_lower(sp_, f, p, SMALL, seed).lower >= unif.lower - 1e-9


def test_bracket_soundness_regression():
    rng = np.random.default_rng(500)
    spaces_ = [L1, L2, make_space(3, "linf"), make_space(2, HEX), make_space(3, "l2")]
    for k in range(500):
        sp_ = spaces_[k % len(spaces_)]
        f = H.random_lattice_expression(sp_.dim, rng, depth=2)
        if k % 7 == 0:
            f = f | H.NormFn(sp_)
        est = fbl_bracket(sp_, f, (1.0, 1.5, 2.0)[k % 3], Budget(samples=24, restarts=2, steps=10, pool=6,
                                                                   refine_steps=2, tuple_sizes=(1, 2)), k)
        assert est.lower <= est.upper * (1 + 1e-6)


# lattice-norm symmetries


@given(spaces(max_dim=3), seeds)
def test_modulus_has_equal_witness_values(sp_, seed):
    rng = np.random.default_rng(seed)
    f = H.random_lattice_expression(sp_.dim, rng, depth=2)
    for g in (f, H.Abs(f)):
        W = fbl_lower(sp_, g, 1.5, SMALL, seed).witness
        assert witness_value(f, W, 1.5) == witness_value(H.Abs(f), W, 1.5)
    a = fbl_lower(sp_, f, 1.5, SMALL, seed).lower
    b = fbl_lower(sp_, H.Abs(f), 1.5, SMALL, seed).lower
    assert a == pytest.approx(b, rel=1e-9)


@given(spaces(max_dim=3), seeds, st.floats(-4, 4).filter(lambda c: abs(c) > 1e-3))
def test_scaling(sp_, seed, c):
    rng = np.random.default_rng(seed)
    f = H.random_lattice_expression(sp_.dim, rng, depth=2)
    a = fbl_lower(sp_, H.Scale(c, f), 2.0, SMALL, seed).lower
    b = fbl_lower(sp_, f, 2.0, SMALL, seed).lower
    assert a == pytest.approx(abs(c) * b, rel=1e-9)


@given(spaces(max_dim=3), seeds)
def test_p_monotone_with_reweighting(sp_, seed):
    rng = np.random.default_rng(seed)
    f = H.random_lattice_expression(sp_.dim, rng, depth=2)
    hi = fbl_lower(sp_, f, 2.0, SMALL, seed)
    inj = reweighted_injection(f, hi.witness, 1.0, 2.0)
    assert weak_p_norm(sp_, inj[0], 1.0).upper <= 1 + 1e-9
    lo = fbl_lower(sp_, f, 1.0, SMALL, seed, inject=[inj])
    assert hi.lower <= lo.lower + 1e-9


# ideal bound


@given(spaces(max_dim=3), seeds)
def test_clamped_function_below_dominator_norms(sp_, seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((3, sp_.dim))
    D = H.Sum(tuple(H.Abs(H.Delta(x)) for x in X))
    g = H.random_lattice_expression(sp_.dim, rng, depth=2, vectors=X) * 5.0
    f = H.Sup((H.Inf((g, D)), -D))
    bound = float(np.sum(norm(sp_, X)))
    assert fbl_lower(sp_, f, 1.0, SMALL, seed).lower <= bound + 1e-9


def test_bracket_raises_on_inconsistent_upper(monkeypatch):
    monkeypatch.setattr(fblnorm, "_upper", lambda space, f, p: 0.5)
    with pytest.raises(ConsistencyError):
        fbl_bracket(L1, H.Delta([1, -2]), 1, SMALL)
