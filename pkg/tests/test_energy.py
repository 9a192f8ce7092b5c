import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from finslerlab import DomainError, NormSpec
from finslerlab.energy import (
    energy_exponential,
    energy_exponential_rescaled,
    energy_negative_power,
    energy_power,
    homogeneous_negative_power_profile,
    homogeneous_power_profile,
    monotonicity_scan,
    spherical_mean_identity,
)
from finslerlab.radial import (
    Nonlinearity,
    RadialProfile,
    explicit_critical_power,
    explicit_liouville,
    shoot,
)

EXP = Nonlinearity.exponential()
LIOUVILLE = explicit_liouville(1.0, np.linspace(0.0, 20.0, 4001))
D41 = NormSpec.ellipsoidal(np.diag([4.0, 1.0]))


def constant(c, N, r_max=10.0):
    return RadialProfile.from_function(lambda s: 0 * s + c, N, np.linspace(0.0, r_max, 201))


def test_liouville_scan():
    s = monotonicity_scan("exponential", LIOUVILLE, lam_grid=np.geomspace(0.1, 20.0, 100))
    assert s.passed and s.min_difference >= -1e-7
    assert len(s.lam) == 100 and len(s.dE) == 99


def test_negated_control_fails():
    s = monotonicity_scan("exponential", LIOUVILLE, lam_grid=np.geomspace(0.1, 20.0, 100), negate=True)
    assert not s.passed and s.min_difference < 0
    assert s.first_violation[0] == pytest.approx(0.1)


def test_critical_power_scan():
    prof = explicit_critical_power(1.0, 3, np.linspace(0.0, 10.0, 4001))
    s = monotonicity_scan("power", prof, {"p": 5}, np.geomspace(0.1, 10.0, 100))
    assert s.passed


def test_negative_power_scan():
    prof = shoot(Nonlinearity.negative_power(2.0), 4, 1.0, r_max=10.0)
    s = monotonicity_scan("negative-power", prof, {"p": 2}, np.geomspace(0.1, 10.0, 100))
    assert s.passed
    assert not monotonicity_scan("negative-power", prof, {"p": 2}, np.geomspace(0.1, 10.0, 100), negate=True).passed


def test_default_grid_is_logarithmic():
    s = monotonicity_scan("exponential", LIOUVILLE)
    assert len(s.lam) == 100
    assert np.allclose(np.diff(np.log(s.lam)), np.log(s.lam[1] / s.lam[0]))


def test_scan_errors():
    with pytest.raises(DomainError):
        monotonicity_scan("cubic", LIOUVILLE)
    with pytest.raises(DomainError):
        monotonicity_scan("power", LIOUVILLE)
    with pytest.raises(DomainError):
        monotonicity_scan("exponential", LIOUVILLE, lam_grid=[1.0, 1.0])
    with pytest.raises(DomainError):
        energy_exponential(shoot(EXP, 3, 0.0, r_max=2.0), 3.0)


def test_homogeneous_power_constant():
    prof = homogeneous_power_profile(5, 4)
    # frozen: A = (g (N - 2 - g))^(1/4) with g = 1/2, E_1 identical at every scale
    vals = [energy_power(prof, 5, lam) for lam in (1.0, 2.0, 3.0, 4.0)]
    assert np.allclose(vals, 4.27366406832304, rtol=1e-12)
    assert prof.params["A"] == pytest.approx(0.75**0.25)


def test_homogeneous_negative_power_constant():
    prof = homogeneous_negative_power_profile(2, 4)
    vals = [energy_negative_power(prof, 2, lam) for lam in (1.0, 2.0, 3.0, 4.0)]
    assert np.allclose(vals, -10.7605568401957, rtol=1e-12)
    b = 2 / 3
    assert prof.params["B"] ** -3 == pytest.approx(b * (2 + b))


def test_homogeneous_profiles_solve_their_equations():
    r = np.linspace(0.5, 5.0, 7)
    v, d, d2 = homogeneous_power_profile(3, 5).exact(r)
    assert np.allclose(d2 + 4 * d / r, -v**3, rtol=1e-12)
    v, d, d2 = homogeneous_negative_power_profile(2, 4).exact(r)
    assert np.allclose(d2 + 3 * d / r, v**-2, rtol=1e-12)
    with pytest.raises(DomainError):
        homogeneous_power_profile(3, 3)


def test_constant_field_closed_forms():
    c, lam = 0.7, 3.0
    k = math.pi
    closed = -math.exp(c) * k * lam**2 + 4 * k * (c + 2 * math.log(lam))
    assert energy_exponential(constant(c, 2), lam) == pytest.approx(closed, abs=1e-10)
    closed = -k * lam ** (2 / 3) - (2 / 3) * k * lam ** (-4 / 3)
    assert energy_negative_power(constant(1.0, 2), 2, lam) == pytest.approx(closed, abs=1e-10)
    assert energy_power(constant(0.0, 3), 3, lam) == 0.0


def test_constant_power_scan_completes():
    s = monotonicity_scan("power", constant(1.0, 3), {"p": 5}, np.geomspace(0.1, 10.0, 100))
    assert np.all(np.isfinite(s.E))


def test_negative_power_needs_positive_profile():
    with pytest.raises(DomainError):
        energy_negative_power(constant(-1.0, 3), 2, 1.0)
    with pytest.raises(DomainError):
        energy_power(LIOUVILLE, 1.0, 1.0)


def test_log_density_at_p_one():
    # phi = 1 makes log phi vanish, leaving only the boundary term
    lam = 2.0
    expected = -0.5 * lam ** (-1 - 2) * 2 * math.pi * lam * 1.0
    assert energy_negative_power(constant(1.0, 2), 1, lam) == pytest.approx(expected, abs=1e-12)


def test_quadrature_converged():
    for lam in (0.3, 2.0, 15.0):
        a = energy_exponential(LIOUVILLE, lam)
        b = energy_exponential(LIOUVILLE, lam, cells=512)
        assert abs(a - b) <= 1e-9


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 19.0))
def test_rescaled_identity(lam):
    a = energy_exponential(LIOUVILLE, lam)
    b = energy_exponential_rescaled(LIOUVILLE, lam)
    assert a == pytest.approx(b, rel=1e-10, abs=1e-10)


def test_norm_enters_through_kappa0():
    for lam in (0.5, 3.0):
        assert energy_exponential(LIOUVILLE, lam, norm=D41) == pytest.approx(2 * energy_exponential(LIOUVILLE, lam))


def test_spherical_mean_identity():
    assert spherical_mean_identity(LIOUVILLE, EXP, 1.0) <= 1e-8
    assert spherical_mean_identity(constant(2.0, 3), Nonlinearity.zero(), 1.5) == 0.0
    assert spherical_mean_identity(shoot(EXP, 3, 0.0, r_max=4.0), EXP, 2.0) <= 1e-9


def test_scan_serialisation():
    s = monotonicity_scan("exponential", LIOUVILLE, lam_grid=np.geomspace(0.1, 20.0, 10))
    doc = s.to_dict()
    assert doc["passed"] and doc["points"] == 10 and doc["first_violation"] is None
    lines = s.to_csv().splitlines()
    assert lines[0] == "lambda,E,dE" and len(lines) == 11
    assert lines[-1].endswith(",nan")
