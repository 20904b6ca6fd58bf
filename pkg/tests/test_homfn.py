import json

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given
from hypothesis import strategies as st

from fblab import Budget, make_space
from fblab import homfn as H
from fblab import phmaps as PM
from fblab.spaces import DimensionError, dual_extreme_points, sample_dual_sphere
from strategies import seeds, spaces

L1 = make_space(2, "l1")
L2 = make_space(2, "l2")


def e(i, n=2):
    v = np.zeros(n)
    v[i] = 1.0
    return v


# evaluation examples


def test_delta_example():
    assert H.evaluate(H.Delta([1, 2]), [3, -1]) == 1


def test_sup_of_moduli_example():
    f = H.Sup((H.Abs(H.Delta(e(0))), H.Abs(H.Delta(e(1)))))
    assert H.evaluate(f, [0.3, -0.8]) == 0.8


def test_ray_indicator_example():
    f = H.RayIndicator([0.5, 0])
    assert H.evaluate(f, [1, 0]) == 2
    assert H.evaluate(f, [1, 0.001]) == 0
    assert H.evaluate(f, [-1, 0]) == 0
    assert H.evaluate(f, [0, 0]) == 0


def test_mu_induced_example():
    f = H.MuInduced([1, 1], [e(0), e(1)], 2, 2)
    assert H.evaluate(f, [3, 4]) == pytest.approx(5, abs=1e-12)


def test_mu_rejects_small_p():
    with pytest.raises(ValueError):
        H.MuInduced([1], [e(0)], 0.5, 2)


def test_normfn_is_dual_norm():
    f = H.NormFn(make_space(2, "linf"))
    assert H.evaluate(f, [1, -2]) == 3


def test_operators_build_the_right_nodes():
    a, b = H.Delta(e(0)), H.Delta(e(1))
    x = np.array([0.3, -0.8])
    assert H.evaluate(a | b, x) == 0.3
    assert H.evaluate(a & b, x) == -0.8
    assert H.evaluate(abs(b), x) == 0.8
    assert H.evaluate(a + b, x) == pytest.approx(-0.5)
    assert H.evaluate(a - b, x) == pytest.approx(1.1)
    assert H.evaluate(-a, x) == -0.3
    assert H.evaluate(a * 2, x) == 0.6


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        H.evaluate(H.Delta([1, 2]), [1, 2, 3])
    with pytest.raises(DimensionError):
        H.Sup((H.Delta([1, 2]), H.Delta([1, 2, 3])))


def test_sup_abs_deltas_matches_tree():
    rng = np.random.default_rng(0)
    R = rng.standard_normal((7, 3))
    flat = H.SupAbsDeltas(sp.csr_matrix(R))
    X = rng.standard_normal((100, 3))
    # sparse products may sum in a different order
    assert np.allclose(flat.eval_batch(X), flat.deltas().eval_batch(X), rtol=1e-14, atol=0)
    assert np.array_equal(H.SupAbsDeltas(R).eval_batch(X), np.max(np.abs(X @ R.T), axis=1))


# invariants


@given(seeds)
def test_lattice_operations_are_pointwise(seed):
    rng = np.random.default_rng(seed)
    f = H.random_lattice_expression(3, rng, depth=2)
    g = H.random_lattice_expression(3, rng, depth=2)
    X = rng.standard_normal((50, 3))
    fv, gv = f.eval_batch(X), g.eval_batch(X)
    assert np.array_equal(H.Sup((f, g)).eval_batch(X), np.maximum(fv, gv))
    assert np.array_equal(H.Inf((f, g)).eval_batch(X), np.minimum(fv, gv))
    assert np.array_equal(H.Abs(f).eval_batch(X), np.abs(fv))


@given(spaces(), seeds)
def test_homogeneity(sp_, seed):
    rng = np.random.default_rng(seed)
    f = H.random_lattice_expression(sp_.dim, rng) | H.NormFn(sp_)
    assert H.homogeneity_defect(f, sp_, 500, seed) <= 1e-9


def test_homogeneity_over_ten_thousand_samples():
    rng = np.random.default_rng(1)
    sp_ = make_space(3, "l2")
    for _ in range(5):
        f = H.random_lattice_expression(3, rng)
        assert H.homogeneity_defect(f, sp_, 10_000, 1) <= 1e-9
    assert H.homogeneity_defect(H.NormFn(sp_), sp_, 10_000, 1) <= 1e-12
    mu = H.MuInduced([0.5, 2.0], rng.standard_normal((2, 3)) / 3, 1.5, 3)
    assert H.homogeneity_defect(mu, sp_, 10_000, 1) <= 1e-9


def test_homogeneity_defect_catches_a_corrupted_evaluator():
    def bad(g, X):
        return H.evaluate(g, X) + 1.0

    assert H.homogeneity_defect(H.Delta([1, 2]), L2, 10, 0, evaluator=bad) >= 0.9


@given(spaces(), seeds)
def test_zero_at_origin(sp_, seed):
    rng = np.random.default_rng(seed)
    f = H.random_lattice_expression(sp_.dim, rng) + H.NormFn(sp_)
    f = H.Sup((f, H.RayIndicator(rng.standard_normal(sp_.dim))))
    assert H.evaluate(f, np.zeros(sp_.dim)) == 0


@given(seeds)
def test_single_unit_atom_is_abs_delta(seed):
    rng = np.random.default_rng(seed)
    x0 = rng.standard_normal(3)
    X = rng.standard_normal((200, 3))
    for p in (1.0, 1.5, 2.0, 3.0):
        mu = H.MuInduced([1.0], [x0], p, 3)
        assert np.array_equal(mu.eval_batch(X), np.abs(X @ x0))


# dimension one


@pytest.mark.parametrize("f1, fm1", [(2, 1), (1, -1), (0, 0), (-3, 2), (0.5, -4)])
def test_dim1_examples(f1, fm1):
    g = H.dim1_representation(f1, fm1)
    assert H.evaluate(g, [1]) == f1
    assert H.evaluate(g, [-1]) == fm1


def test_dim1_node_shapes():
    assert isinstance(H.dim1_representation(2, 1), H.Sup)
    assert isinstance(H.dim1_representation(1, -1), H.Delta)
    assert isinstance(H.dim1_representation(-3, 2), H.Inf)


@given(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3))
def test_dim1_reproduces_homogeneous_extension(f1, fm1):
    t = np.linspace(-10, 10, 1001)
    expected = np.where(t >= 0, t * f1, -t * fm1)
    got = H.dim1_representation(f1, fm1).eval_batch(t[:, None])
    assert np.max(np.abs(got - expected)) <= 1e-12 * max(1.0, abs(f1), abs(fm1)) * 10


# uniform norm


def test_uniform_norm_examples():
    est = H.uniform_norm_ball(H.Delta([1, -2]), L1)
    assert est.lower == pytest.approx(3, rel=1e-2) and est.upper == pytest.approx(3, rel=1e-2)
    assert H.uniform_norm_ball(H.NormFn(L1), L1).lower == pytest.approx(1, abs=1e-9)
    f = H.Sup((H.Abs(H.Delta(e(0))), H.Abs(H.Delta(e(1)))))
    est = H.uniform_norm_ball(f, L1)
    assert est.certified and est.lower == est.upper == pytest.approx(1, abs=1e-9)


@given(spaces(), seeds)
def test_uniform_norm_against_vertex_brute_force(sp_, seed):
    if not sp_.has_extreme_points:
        return
    rng = np.random.default_rng(seed)
    f = H.random_lattice_expression(sp_.dim, rng, depth=2)
    est = H.uniform_norm_ball(f, sp_, Budget(samples=64, restarts=4, steps=40), seed)
    # sampled sup over many dual-sphere points is a lower bound on the truth
    U = sample_dual_sphere(sp_, 4000, seed)
    sampled = float(np.max(np.abs(f.eval_batch(U))))
    assert est.lower >= sampled * (1 - 1e-3) - 1e-12
    assert est.lower <= est.upper
    if est.certified:
        D = dual_extreme_points(sp_)
        assert est.lower >= float(np.max(np.abs(f.eval_batch(D)))) - 1e-12


def test_uniform_norm_l2_delta_closed_form():
    est = H.uniform_norm_ball(H.Delta([3, 4]), L2)
    assert est.method == "exact_closed_form" and est.lower == 5


def test_uniform_norm_ray_flags_infinite_upper():
    f = H.Sup((H.Abs(H.Delta([1, 1])), H.RayIndicator([0.1, 0.3])))
    est = H.uniform_norm_ball(f, L2, Budget(samples=64, restarts=4, steps=20))
    assert est.upper == np.inf and not est.certified


# continuity probe


def test_classify_delta_and_normfn_continuous():
    probe = H.Probe(samples=500)
    assert H.classify_finite_dim(H.Delta([1, -2]), L2, probe).label == "continuous_on_sphere"
    assert H.classify_finite_dim(H.NormFn(L2), L2, probe).label == "continuous_on_sphere"


def test_classify_ray_indicator_jump_one():
    x0 = np.array([0.5, 0.0])
    y0 = np.array([0.0, 1.0])
    probe = H.Probe(samples=500, points=(tuple(x0),), directions=(tuple(y0),))
    c = H.classify_finite_dim(H.RayIndicator(x0), L2, probe)
    assert c.label == "bounded_discontinuous"
    assert c.jump == pytest.approx(1.0, abs=1e-12)


def test_classify_unbounded():
    f = H.Scale(1e12, H.Delta([1, 0]))
    assert H.classify_finite_dim(f, L2, H.Probe(samples=100)).label == "unbounded_flag"


# JSON


@given(seeds)
def test_json_roundtrip(seed):
    rng = np.random.default_rng(seed)
    sp_ = make_space(3, "l2")
    f = H.Sup((H.random_lattice_expression(3, rng), H.NormFn(sp_), H.RayIndicator([1.0, 2.0, 0.0])))
    f = H.Sum((f, H.MuInduced([0.5], [[0.1, 0.2, 0.3]], 2.0, 3)))
    g = H.from_json(json.loads(json.dumps(H.to_json(f))), sp_)
    X = rng.standard_normal((50, 3))
    X[0] = [2.0, 4.0, 0.0]
    assert np.array_equal(f.eval_batch(X), g.eval_batch(X))


def test_json_compose_roundtrip():
    sp_ = make_space(2, "l1")
    phi = PM.Adjoint([[1, 2], [3, 4]], sp_, sp_)
    f = H.Composed(H.Abs(H.Delta([1, -1])), phi)
    g = H.from_json(H.to_json(f), sp_)
    X = np.random.default_rng(0).standard_normal((20, 2))
    assert np.array_equal(f.eval_batch(X), g.eval_batch(X))


def test_json_sparse_vectors_and_flat_sup():
    n = 100
    args = [{"op": "abs", "arg": {"op": "delta", "vec": {"dim": n, "index": [i], "value": [1.0 / (i + 1)]}}}
            for i in range(20)]
    f = H.from_json({"op": "sup", "args": args}, make_space(n, "l2"))
    assert isinstance(f, H.SupAbsDeltas)
    x = np.ones(n)
    assert H.evaluate(f, x) == 1.0


@pytest.mark.parametrize(
    "ast, where",
    [
        ({"op": "sup", "args": [{"op": "delta", "vec": [1]}]}, "f.args[0].vec"),
        ({"op": "abs"}, "f"),
        ({"op": "scale", "c": "x", "arg": {"op": "normfn"}}, "f"),
        ({"op": "nope"}, "f"),
        ({"op": "sup", "args": []}, "f"),
        ({"op": "mu", "p": 2, "atoms": [[1, [3, 0]]]}, "f.atoms[0]"),
        ({"op": "mu", "p": 0.5, "atoms": []}, "f"),
        ({"op": "ray", "dir": [0, 0]}, "f"),
        ({"op": "abs", "arg": {"op": "delta", "vec": [1, "a"]}}, "f.arg.vec"),
        ([1, 2], "f"),
    ],
)
def test_json_errors_name_the_node(ast, where):
    with pytest.raises(H.ASTError) as info:
        H.from_json(ast, L2)
    assert str(info.value).startswith(where)


def test_walk_visits_every_node():
    f = H.Sup((H.Abs(H.Delta([1, 0])), H.Scale(2.0, H.Delta([0, 1]))))
    kinds = [type(n).__name__ for n in H.walk(f)]
    assert kinds == ["Sup", "Abs", "Delta", "Scale", "Delta"]
