import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from finslerlab import DomainError, NormSpec, verify_properties
from finslerlab.anisotropy import (
    dual_grad,
    dual_norm,
    eval_norm,
    grad_norm,
    hess_norm,
    kappa0_estimate,
    wulff_volume,
)

E2 = NormSpec.euclidean(2)
D41 = NormSpec.ellipsoidal(np.diag([4.0, 1.0]))


def random_spd(n, seed):
    rng = np.random.default_rng(seed)
    Q = rng.normal(size=(n, n))
    return Q @ Q.T + n * np.eye(n)


def specs():
    return [
        E2,
        NormSpec.euclidean(3),
        D41,
        NormSpec.ellipsoidal(random_spd(3, 5)),
        NormSpec.perturbed(E2, 0.05),
    ]


def central_grad(fun, x, h):
    g = np.zeros_like(x)
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (fun(x + e) - fun(x - e)) / (2 * h)
    return g


def test_values():
    assert eval_norm(E2, [3.0, 4.0]) == pytest.approx(5.0, abs=1e-15)
    assert eval_norm(D41, [1.0, 0.0]) == pytest.approx(2.0, abs=1e-15)
    assert eval_norm(D41, [1.0, 1.0]) == pytest.approx(math.sqrt(5.0), abs=1e-15)
    assert eval_norm(D41, [0.0, 0.0]) == 0.0


def test_gradients_and_hessians():
    assert np.allclose(grad_norm(E2, [0.0, 1.0]), [0.0, 1.0])
    assert np.allclose(grad_norm(D41, [1.0, 0.0]), [2.0, 0.0])
    H = hess_norm(E2, [1.0, 0.0])
    assert np.allclose(H, [[0.0, 0.0], [0.0, 1.0]])
    assert np.allclose(hess_norm(D41, [1.0, 0.0]) @ [1.0, 0.0], 0.0, atol=1e-15)
    assert hess_norm(D41, [0.0, 1.0])[0, 0] == pytest.approx(4.0)


def test_gradient_of_ellipsoid_matches_differences():
    x = np.array([0.3, -0.7])
    fd = central_grad(lambda v: float(D41.value(v)), x, 1e-6)
    assert np.allclose(grad_norm(D41, x), fd, atol=1e-9)
    fdh = np.array([central_grad(lambda v: grad_norm(D41, v)[i], x, 1e-6) for i in range(2)])
    assert np.allclose(hess_norm(D41, x), fdh, atol=1e-7)


def test_dual_norm_closed_forms():
    assert dual_norm(E2, [3.0, 4.0]) == pytest.approx(5.0)
    assert dual_norm(D41, [1.0, 0.0]) == pytest.approx(0.5)
    assert np.allclose(dual_grad(E2, [1.0, 0.0]), [1.0, 0.0])
    # A^-1 x / F0(x) = (1/4, 0) / (1/2)
    assert np.allclose(dual_grad(D41, [1.0, 0.0]), [0.5, 0.0])
    x = np.array([0.4, 1.1])
    fd = central_grad(lambda v: float(D41.dual(v)), x, 1e-6)
    assert np.allclose(dual_grad(D41, x), fd, atol=1e-9)


def test_dual_norm_against_brute_force_support():
    rng = np.random.default_rng(3)
    for spec in (D41, NormSpec.ellipsoidal(random_spd(2, 9))):
        t = np.linspace(0, 2 * np.pi, 200_000, endpoint=False)
        om = np.stack([np.cos(t), np.sin(t)], axis=-1)
        xi = om / spec.value(om)[:, None]  # points of {F = 1}
        x = rng.normal(size=(100, 2))
        brute = np.max(x @ xi.T, axis=1)
        assert np.allclose(spec.dual(x), brute, rtol=1e-6)


def test_generic_dual_agrees_with_closed_form():
    # a perturbed norm with zero amplitude goes through the optimiser
    spec = NormSpec.perturbed(D41, 0.0)
    x = np.random.default_rng(1).normal(size=(50, 2))
    assert np.allclose(spec.dual(x), D41.dual(x), rtol=1e-9)


def test_zero_vector_errors():
    for f in (grad_norm, hess_norm, dual_grad):
        with pytest.raises(DomainError):
            f(D41, [0.0, 0.0])


def test_construction_errors():
    with pytest.raises(DomainError):
        NormSpec.ellipsoidal([[1.0, 2.0], [2.0, 1.0]])
    with pytest.raises(DomainError):
        NormSpec.ellipsoidal([[1.0, 0.5], [0.0, 1.0]])
    with pytest.raises(DomainError):
        NormSpec.perturbed(E2, 10 * NormSpec.perturbed(E2, 0.0).convexity_threshold)
    with pytest.raises(DomainError):
        NormSpec.euclidean(1)


def test_bounds():
    a, b = D41.bounds
    assert (a, b) == pytest.approx((1.0, 2.0))


def test_wulff_volume():
    assert wulff_volume(E2, 1.0) == pytest.approx(math.pi)
    assert wulff_volume(D41, 1.0) == pytest.approx(2 * math.pi)
    for spec in specs():
        assert wulff_volume(spec, 2.0) / wulff_volume(spec, 1.0) == pytest.approx(2.0**spec.dim, rel=1e-14)


def test_kappa0_estimate_brackets_closed_form():
    spec = NormSpec.ellipsoidal(random_spd(3, 2))
    est, err = kappa0_estimate(spec, "mc", samples=200_000, seed=4)
    assert err > 0
    assert abs(est - spec.kappa0) <= err


def test_json_round_trip():
    for spec in specs():
        again = NormSpec.from_json(spec.to_json())
        x = np.array([[0.3, -0.2, 0.5][: spec.dim]])
        assert again.value(x) == pytest.approx(spec.value(x))


@pytest.mark.parametrize("spec", [E2, D41, NormSpec.ellipsoidal(random_spd(2, 7))])
def test_verify_properties_closed_forms(spec):
    rep = verify_properties(spec, 1000, seed=0)
    assert rep.passed, rep.failed
    assert rep["compatibility"].residual <= 1e-12


def test_perturbed_violates_compatibility():
    rep = verify_properties(NormSpec.perturbed(E2, 0.05), 1000, seed=0)
    rec = rep["compatibility"]
    assert not rec.passed and rec.residual > 1e-3
    assert rec.worst_point is not None
    assert "compatibility" in rep.failed


def test_fd_gradient_is_second_order():
    x = np.array([0.8, -0.35])
    spec = NormSpec.perturbed(E2, 0.05)
    g = grad_norm(spec, x)
    e1 = np.max(np.abs(central_grad(lambda v: float(spec.value(v)), x, 1e-4) - g))
    e2 = np.max(np.abs(central_grad(lambda v: float(spec.value(v)), x, 5e-5) - g))
    assert 3.5 <= e1 / e2 <= 4.5


vec = st.lists(st.floats(-5, 5, allow_nan=False), min_size=2, max_size=2).filter(
    lambda v: math.hypot(*v) > 1e-3
)


@settings(max_examples=60, deadline=None)
@given(vec, st.floats(-4, 4).filter(lambda t: abs(t) > 1e-3))
def test_homogeneity_and_euler(v, t):
    x = np.array(v)
    for spec in (D41, NormSpec.perturbed(E2, 0.05)):
        F = float(spec.value(x))
        assert float(spec.value(t * x)) == pytest.approx(abs(t) * F, rel=1e-12)
        g = grad_norm(spec, x)
        assert float(x @ g) == pytest.approx(F, rel=1e-8)
        assert np.allclose(grad_norm(spec, 2 * x), g, atol=1e-12)
        H = hess_norm(spec, x)
        assert np.linalg.norm(H @ x) <= 1e-8 * np.linalg.norm(H) * np.linalg.norm(x)


@settings(max_examples=60, deadline=None)
@given(vec)
def test_unit_gradients_and_reconstruction(v):
    x = np.array(v)
    for spec in (E2, D41):
        assert float(spec.dual(grad_norm(spec, x))) == pytest.approx(1.0, abs=1e-8)
        assert float(spec.value(dual_grad(spec, x))) == pytest.approx(1.0, abs=1e-8)
        rec = float(spec.dual(x)) * grad_norm(spec, dual_grad(spec, x))
        assert np.allclose(rec, x, atol=1e-8 * np.linalg.norm(x))
