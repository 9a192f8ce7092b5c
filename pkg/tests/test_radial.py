import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from finslerlab import BlowUpError, DomainError
from finslerlab.radial import (
    Nonlinearity,
    RadialProfile,
    explicit_critical_power,
    explicit_liouville,
    radial_operator,
    residual,
    shoot,
    singular_log_solution,
)

EXP = Nonlinearity.exponential()


def reference_exponential(N, u0, r_end):
    """phi(r_end) for phi'' + (N-1) phi'/r = -e^phi by DOP853 from a series start."""
    a = -math.exp(u0) / (2 * N)
    b = -math.exp(u0) * a / (4 * (N + 2))
    r0 = 1e-3
    y0 = [u0 + a * r0**2 + b * r0**4, 2 * a * r0 + 4 * b * r0**3]
    sol = solve_ivp(lambda r, y: [y[1], -(N - 1) * y[1] / r - math.exp(y[0])], (r0, r_end), y0,
                    method="DOP853", rtol=1e-13, atol=1e-14)
    return sol.y[0, -1]


def test_liouville_values():
    p = explicit_liouville(1.0, np.array([0.0, 2 * math.sqrt(2)]))
    assert p.phi[0] == 0.0
    assert p.phi[1] == pytest.approx(-2 * math.log(2), abs=1e-14)
    assert explicit_liouville(2.0, np.array([0.0, 1.0])).phi[0] == pytest.approx(2 * math.log(2))
    with pytest.raises(DomainError):
        explicit_liouville(0.0)


def test_critical_power_values():
    assert explicit_critical_power(1.0, 3, np.array([0.0, 1.0])).phi[0] == pytest.approx(3**0.25)
    far = explicit_critical_power(1.0, 4, np.array([1e3, 2e3]))
    assert far.phi[0] / far.phi[1] == pytest.approx(4.0, rel=1e-5)
    with pytest.raises(DomainError):
        explicit_critical_power(1.0, 2)


def test_singular_log_values():
    p = singular_log_solution(10, np.array([0.5, 1.0, 3.0]))
    assert p.phi[1] == pytest.approx(math.log(16))
    assert np.allclose(np.exp(p.phi) * p.r**2, 16.0)
    with pytest.raises(DomainError):
        singular_log_solution(10, np.array([0.0, 1.0]))


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
def test_liouville_residual(lam):
    assert residual(explicit_liouville(lam), EXP) <= 1e-10
    q = radial_operator(explicit_liouville(lam))
    assert np.max(np.abs(q + np.exp(explicit_liouville(lam).phi))) <= 1e-10 * lam**2


@pytest.mark.parametrize("N", [3, 4, 5])
def test_critical_residual(N):
    assert residual(explicit_critical_power(1.0, N), Nonlinearity.power((N + 2) / (N - 2))) <= 1e-8


@pytest.mark.parametrize("N", [3, 6, 10, 12])
def test_singular_log_residual(N):
    assert residual(singular_log_solution(N), EXP) <= 1e-12


def test_operator_on_polynomials():
    r = np.linspace(0, 2, 101)
    sq = RadialProfile.from_function(lambda s: s**2, 3, r)
    assert np.allclose(radial_operator(sq), 6.0, atol=1e-9)
    c = RadialProfile.from_function(lambda s: 0 * s + 3.0, 3, r)
    assert np.allclose(radial_operator(c), 0.0, atol=1e-10)
    zero = RadialProfile.from_function(lambda s: 0 * s, 2, r)
    assert residual(zero, EXP) == pytest.approx(0.5)
    with pytest.raises(DomainError):
        radial_operator(RadialProfile.from_function(lambda s: s, 2, np.linspace(1, 2, 4)))


def test_profile_invariants():
    with pytest.raises(DomainError):
        RadialProfile(np.array([0.0, 0.0, 1.0]), np.zeros(3), np.zeros(3), 2)
    with pytest.raises(DomainError):
        RadialProfile(np.array([0.0, 1.0]), np.array([0.0, np.nan]), np.zeros(2), 2)
    with pytest.raises(DomainError):
        RadialProfile(np.array([0.0, 1.0]), np.zeros(2), np.array([1.0, 0.0]), 2, origin_regular=True)


def test_profile_serialisation():
    p = explicit_critical_power(1.0, 3, np.linspace(0, 1, 5))
    doc = json.loads(p.to_json())
    assert doc["N"] == 3 and doc["provenance"] == "explicit-critical"
    lines = p.to_csv().splitlines()
    assert lines[0] == "r,phi,dphi" and len(lines) == 6
    assert float(lines[1].split(",")[1]) == pytest.approx(3**0.25, rel=1e-15)


def test_nonlinearity():
    assert EXP(np.array([0.0]))[0] == 1.0
    pw = Nonlinearity.power(3.0)
    assert pw(np.array([-2.0]))[0] == -8.0
    assert pw.derivative(np.array([-2.0]))[0] == 12.0
    ng = Nonlinearity.negative_power(2.0)
    assert ng(np.array([2.0]))[0] == -0.25
    assert ng.derivative(np.array([2.0]))[0] == pytest.approx(0.25)
    with pytest.raises(DomainError):
        ng(np.array([-1.0]))
    with pytest.raises(DomainError):
        Nonlinearity.negative_power(-1.0)
    assert Nonlinearity.from_dict(pw.to_dict()) == pw
    with pytest.raises(DomainError):
        Nonlinearity.from_dict({"kind": "power", "p": 3, "q": 1})


def test_shoot_series_start():
    p = shoot(EXP, 3, 0.0)
    assert p.provenance == "shot" and p.origin_regular
    assert p.second_derivative()[0] == pytest.approx(-1.0 / 3.0, abs=1e-6)


def test_shoot_matches_liouville():
    p = shoot(EXP, 2, 0.0)
    ref = explicit_liouville(1.0, p.r)
    m = p.r <= 5.0
    assert np.max(np.abs(p.phi[m] - ref.phi[m])) <= 1e-6


def test_shoot_against_reference_integrator():
    ref = reference_exponential(3, 0.0, 1.0)
    coarse = shoot(EXP, 3, 0.0, r_max=1.0)
    fine = shoot(EXP, 3, 0.0, r_max=1.0, steps=2 * (len(coarse.r) - 1))
    assert abs(coarse.phi[-1] - ref) <= 1e-7
    assert abs(coarse.phi[-1] - fine.phi[-1]) <= 1e-7


def test_shoot_fourth_order():
    ref = reference_exponential(3, 0.0, 10.0)
    err = [abs(shoot(EXP, 3, 0.0, 10.0, n).phi[-1] - ref) for n in (400, 800, 1600)]
    for a, b in zip(err, err[1:]):
        assert 14.0 <= a / b <= 18.0


def test_shoot_scale_covariance():
    # psi(r) = phi(2r) + 2 log 2 solves the same equation
    phi = shoot(EXP, 3, 0.0, r_max=10.0, steps=1000)
    psi = shoot(EXP, 3, 2 * math.log(2), r_max=5.0, steps=1000)
    assert np.allclose(psi.phi, phi.phi + 2 * math.log(2), atol=1e-10)


def test_shoot_blow_up():
    with pytest.raises(BlowUpError) as exc:
        shoot(Nonlinearity.linear(-1.0), 3, 1.0, r_max=100.0, steps=4000)
    assert exc.value.radius < 100.0
    with pytest.raises(DomainError):
        shoot(EXP, 3, 0.0, steps=50)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.2, 5.0))
def test_liouville_family_residual(lam):
    assert residual(explicit_liouville(lam, np.linspace(0, 30, 1000)), EXP) <= 1e-8
