import numpy as np
import pytest

from finslerlab import DomainError, NonConvergenceError, NormSpec
from finslerlab.bvp import (
    DiscreteSolution2D,
    GridDomain2D,
    ball_mean,
    discrete_operator,
    harmonic_replacement,
    residual_norm,
    solve_semilinear,
)
from finslerlab.radial import Nonlinearity, explicit_liouville

EUC = NormSpec.euclidean(2)
ELL = NormSpec.ellipsoidal(np.diag([4.0, 1.0]))
TILT = NormSpec.ellipsoidal([[2.0, 0.7], [0.7, 1.0]])
PER = NormSpec.perturbed(EUC, 0.05)
EXP = Nonlinearity.exponential()
LIOUVILLE = explicit_liouville(1.0)


def liouville_trace(norm):
    return lambda X, Y: LIOUVILLE.evaluate(norm.dual(np.stack([X, Y], axis=-1)))[0]


def random_trace(rng):
    a = rng.normal(size=(4, 4))
    return lambda X, Y: sum(a[i, j] * np.cos(2 * i * X + 2 * j * Y + a[j, i]) for i in range(4) for j in range(4))


def test_domain_invariants():
    d = GridDomain2D.wulff_ball(ELL, 1.0, 1 / 16)
    assert d.interior.any() and not (d.interior & d.boundary).any()
    X, Y = d.mesh()
    assert np.all(ELL.dual(np.stack([X, Y], axis=-1))[d.interior] < 1.0)
    with pytest.raises(DomainError):
        GridDomain2D.wulff_ball(ELL, 1.0, 0.5)
    with pytest.raises(DomainError):
        GridDomain2D.wulff_ball(NormSpec.euclidean(3), 1.0, 0.1)
    bad = np.zeros((5, 5), bool)
    bad[1:4, 1:4] = True
    with pytest.raises(DomainError):
        GridDomain2D(np.arange(5.0), np.arange(5.0), 1.0, bad, np.zeros((5, 5), bool), np.zeros((5, 5)))


@pytest.mark.parametrize("norm", [EUC, ELL, TILT, PER])
def test_affine_data_reproduced(norm):
    g = lambda X, Y: 0.3 + 2 * X - Y  # noqa: E731
    d = GridDomain2D.wulff_ball(norm, 1.0, 1 / 16, g=g)
    sol = solve_semilinear(d, norm)
    assert sol.converged and sol.residual <= 1e-10
    assert np.max(np.abs(sol.u - g(*d.mesh()))[d.interior]) <= 1e-10


def test_constant_trace():
    d = GridDomain2D.wulff_ball(TILT, 1.0, 1 / 16)
    w = harmonic_replacement(d, TILT, lambda X, Y: 0 * X + 1.7)
    assert np.allclose(w.u[d.interior], 1.7, atol=1e-12)


def test_manufactured_liouville_second_order():
    errs = []
    for h in (1 / 16, 1 / 32):
        d = GridDomain2D.wulff_ball(EUC, 2.0, h, g=liouville_trace(EUC))
        sol = solve_semilinear(d, EUC, EXP)
        ref = liouville_trace(EUC)(*d.mesh())
        errs.append(np.max(np.abs(sol.u - ref)[d.interior]))
    # frozen values of this discretisation
    assert errs[0] == pytest.approx(3.28e-4, rel=0.02)
    assert np.log2(errs[0] / errs[1]) >= 1.8


def test_operator_on_quadratic_is_exact():
    # phi = r^2 gives Q = 2N = 4; the face-flux scheme is exact on quadratics
    d = GridDomain2D.wulff_ball(ELL, 1.0, 1 / 32)
    Q = discrete_operator(d, ELL, ELL.dual(d.points()) ** 2)
    assert np.nanmax(np.abs(Q - 4.0)) <= 1e-9
    assert np.all(np.isnan(Q[~d.interior]))


def test_operator_second_order_on_quartic():
    # phi = r^4: Q = phi'' + phi'/r = 16 r^2
    errs = []
    for h in (1 / 32, 1 / 64):
        d = GridDomain2D.wulff_ball(ELL, 1.0, h)
        r = ELL.dual(d.points())
        errs.append(np.nanmax(np.abs(discrete_operator(d, ELL, r**4) - 16 * r**2)))
    assert 3.5 <= errs[0] / errs[1] <= 4.5


def test_residual_norm_cases():
    d = GridDomain2D.wulff_ball(EUC, 1.0, 1 / 16)
    zero = DiscreteSolution2D(d, np.zeros(d.shape), np.nan, 0, EUC, EXP)
    assert residual_norm(zero) == pytest.approx(1.0)
    res = []
    for h in (1 / 16, 1 / 32):
        d = GridDomain2D.wulff_ball(EUC, 2.0, h)
        u = liouville_trace(EUC)(*d.mesh())
        res.append(residual_norm(DiscreteSolution2D(d, u, np.nan, 0, EUC, EXP)))
    assert 3.5 <= res[0] / res[1] <= 4.5


def test_perturbed_exponential_converges():
    d = GridDomain2D.wulff_ball(PER, 1.0, 1 / 32)
    sol = solve_semilinear(d, PER, EXP)
    assert sol.converged and residual_norm(sol) <= 1e-10
    assert sol.history[-1] == sol.residual and len(sol.history) == sol.iterations + 1


@pytest.mark.parametrize("norm", [EUC, ELL, TILT, PER])
def test_maximum_principle(norm):
    rng = np.random.default_rng(11)
    d = GridDomain2D.wulff_ball(norm, 1.0, 1 / 20)
    for _ in range(5):
        w = harmonic_replacement(d, norm, random_trace(rng))
        b = w.u[d.boundary]
        assert w.u[d.interior].max() <= b.max() + 1e-9
        assert w.u[d.interior].min() >= b.min() - 1e-9


def test_replacement_decomposition():
    d = GridDomain2D.wulff_ball(EUC, 1.0, 1 / 32)
    u = solve_semilinear(d.with_trace(liouville_trace(EUC)), EUC, EXP).u
    w = harmonic_replacement(d, EUC, reference=u)
    assert np.all(w.v[d.interior] >= -1e-10)
    assert np.allclose(w.v[d.boundary], 0.0)
    assert w.u[d.interior].max() <= w.u[d.boundary].max() + 1e-9


@pytest.mark.parametrize("norm", [EUC, TILT])
def test_mean_value_inequality(norm):
    rng = np.random.default_rng(5)
    d = GridDomain2D.wulff_ball(norm, 1.0, 1 / 32)
    w = harmonic_replacement(d, norm, random_trace(rng))
    X, Y = d.mesh()
    for y in ([0.0, 0.0], [0.1, -0.05]):
        i = np.argmin((X - y[0]) ** 2 + (Y - y[1]) ** 2)
        y_node = (X.ravel()[i], Y.ravel()[i])
        mean, count = ball_mean(d, np.exp(w.u), norm, y_node, 0.4)
        assert count > 50
        assert np.exp(w.u.ravel()[i]) <= mean * (1 + 1e-3)


def test_ball_mean_rejects_outside():
    d = GridDomain2D.wulff_ball(EUC, 1.0, 1 / 16)
    with pytest.raises(DomainError):
        ball_mean(d, np.ones(d.shape), EUC, (0.8, 0.0), 0.5)


def test_negative_power_positivity():
    d = GridDomain2D.wulff_ball(EUC, 1.0, 1 / 16)
    with pytest.raises(DomainError):
        solve_semilinear(d, EUC, Nonlinearity.negative_power(2.0))
    # Delta u = u^-2 with trace 1 has a positive solution only on small balls
    pos = GridDomain2D.wulff_ball(EUC, 0.5, 1 / 32, g=lambda X, Y: 0 * X + 1.0)
    sol = solve_semilinear(pos, EUC, Nonlinearity.negative_power(2.0))
    assert sol.converged and np.all(sol.u[pos.interior] > 0) and sol.u[pos.interior].max() < 1.0


def test_non_convergence_reports_history():
    d = GridDomain2D.wulff_ball(EUC, 2.0, 1 / 16, g=liouville_trace(EUC))
    with pytest.raises(NonConvergenceError) as exc:
        solve_semilinear(d, EUC, EXP, max_iter=1)
    assert len(exc.value.history) >= 2


def test_serialisation():
    d = GridDomain2D.wulff_ball(ELL, 1.0, 1 / 16)
    sol = solve_semilinear(d, ELL, EXP)
    doc = sol.to_dict()
    assert doc["domain"]["kind"] == "wulff-ball"
    assert doc["norm"]["kind"] == "ellipsoidal" and doc["nonlinearity"]["kind"] == "exponential"
