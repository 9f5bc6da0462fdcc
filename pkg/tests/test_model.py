import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dmquench.errors import GaplessModeError
from dmquench.model import (
    ModelParams,
    QuenchSetup,
    bogoliubov_angle,
    bogoliubov_cos_sin,
    build_mode_table,
    epsilon,
    k_grid,
    zeta,
)

from .conftest import small_setups


@pytest.mark.parametrize(
    "L, expected",
    [(2, [math.pi / 2]), (4, [math.pi / 4, 3 * math.pi / 4])],
)
def test_k_grid_small(L, expected):
    np.testing.assert_allclose(k_grid(ModelParams(L, 0.5, 0.0)), expected, rtol=0, atol=1e-15)


def test_k_grid_large_endpoints():
    k = k_grid(ModelParams(5000, 0.5, 0.0))
    assert len(k) == 2500
    assert k[0] == pytest.approx(math.pi / 5000, rel=1e-15)
    assert k[-1] == pytest.approx(4999 * math.pi / 5000, rel=1e-15)
    assert np.all(np.diff(k) > 0)
    assert k[0] > 0 and k[-1] < math.pi


@pytest.mark.parametrize("L", [0, 3, 7, -2, 2.5])
def test_odd_or_invalid_L_rejected(L):
    with pytest.raises(ValueError):
        ModelParams(L, 0.5, 0.1)


@pytest.mark.parametrize("gamma", [1.0001, -1.5])
def test_gamma_range(gamma):
    with pytest.raises(ValueError):
        ModelParams(4, gamma, 0.1)


@pytest.mark.parametrize("beta", [0.0, -1.0, float("nan"), float("inf")])
def test_beta_must_be_positive(beta):
    with pytest.raises(ValueError):
        QuenchSetup(ModelParams(4, 0.5, 0.1), 0.5, 0.6, beta)


def test_reversed_swaps_fields():
    s = QuenchSetup(ModelParams(4, 0.5, 0.1), 0.5, 0.6, 2.0)
    r = s.reversed()
    assert (r.h0, r.hf, r.beta) == (0.6, 0.5, 2.0)
    assert s.dh == pytest.approx(0.1)


@pytest.mark.parametrize(
    "k, h, gamma, expected",
    [
        (math.pi / 2, 1.0, 0.5, math.sqrt(1.25)),
        (math.pi / 2, 0.0, 1.0, 1.0),
        (math.pi / 3, 0.5, 0.5, math.sqrt(0.25 * 0.75)),
    ],
)
def test_epsilon_values(k, h, gamma, expected):
    assert epsilon(k, h, gamma) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize(
    "D, expected",
    [(0.5, 2.1180339887498949), (-0.7, -0.2819660112501051), (0.0, 1.1180339887498949)],
)
def test_zeta_values(D, expected):
    assert zeta(math.pi / 2, 1.0, 0.5, D) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize(
    "k, h, gamma, expected",
    [
        (math.pi / 2, 1.0, 0.5, 0.4636476090008061),
        (math.pi / 2, 0.0, 1.0, math.pi / 2),
        (math.pi / 4, 0.0, 0.5, 2.677945044588987),
    ],
)
def test_bogoliubov_angle_values(k, h, gamma, expected):
    assert bogoliubov_angle(k, h, gamma) == pytest.approx(expected, rel=1e-12)


def test_naive_branch_loses_quadrant():
    k, h, g = math.pi / 4, 0.0, 0.5
    assert bogoliubov_angle(k, h, g, "naive") == pytest.approx(bogoliubov_angle(k, h, g) - math.pi, abs=1e-14)


def test_angle_in_half_open_interval():
    # gamma sin k = 0 with h < cos k puts the angle on the branch cut
    phi = bogoliubov_angle(np.array([0.5]), 0.0, 0.0)
    assert phi[0] == math.pi


def test_gapless_mode_is_an_error():
    with pytest.raises(GaplessModeError, match="gapless mode"):
        bogoliubov_angle(math.pi / 3, math.cos(math.pi / 3), 0.0)
    with pytest.raises(GaplessModeError):
        bogoliubov_cos_sin(math.pi / 3, math.cos(math.pi / 3), 0.0)


def test_unknown_branch():
    with pytest.raises(ValueError, match="unknown branch"):
        bogoliubov_angle(1.0, 0.5, 0.5, "principal")


def test_theta_two_site_chain_matches_high_precision():
    with mpmath.workdps(30):
        g = mpmath.mpf("0.5")
        ref = float((mpmath.atan2(g, mpmath.mpf("1.01")) - mpmath.atan2(g, 1)) / 2)
    t = build_mode_table(QuenchSetup(ModelParams(2, 0.5, 0.0), 1.0, 1.01, 1.0))
    assert len(t) == 1
    assert t.k[0] == pytest.approx(math.pi / 2)
    assert t.theta[0] == pytest.approx(ref, rel=1e-13)
    assert t.theta[0] == pytest.approx(-1.98411657e-3, rel=1e-8)


def test_identity_quench_has_zero_theta():
    t = build_mode_table(QuenchSetup(ModelParams(64, 0.7, 0.2), 0.9, 0.9, 3.0))
    assert np.all(t.theta == 0.0)


@pytest.mark.parametrize("h0, hf", [(1.5, 2.0), (0.0, -0.5)])
def test_gamma_zero_same_side_has_zero_theta(h0, hf):
    # k = pi/2 is avoided so that h - cos k never vanishes
    t = build_mode_table(QuenchSetup(ModelParams(6, 0.0, 0.3), h0, hf, 1.0))
    np.testing.assert_array_equal(t.theta, 0.0)


@given(small_setups())
def test_angle_consistency(setup):
    t = build_mode_table(setup)
    g = setup.params.gamma
    for h, eps, phi in ((setup.h0, t.eps0, t.phi0), (setup.hf, t.epsf, t.phif)):
        assert np.max(np.abs(eps * np.cos(phi) - (h - np.cos(t.k)))) <= 1e-12
        assert np.max(np.abs(eps * np.sin(phi) - g * np.sin(t.k))) <= 1e-12
    assert np.all((t.phi0 > -math.pi) & (t.phi0 <= math.pi))
    # the accurate difference form agrees with the plain one up to rounding
    assert np.max(np.abs(t.theta - 0.5 * (t.phif - t.phi0))) <= 1e-12


@given(small_setups(), st.floats(-1, 1))
def test_states_do_not_depend_on_D(setup, D2):
    other = QuenchSetup(ModelParams(setup.params.L, setup.params.gamma, D2), setup.h0, setup.hf, setup.beta)
    a, b = build_mode_table(setup), build_mode_table(other)
    for name in ("phi0", "phif", "theta", "eps0", "epsf"):
        np.testing.assert_array_equal(getattr(a, name), getattr(b, name))


@given(st.floats(0.01, 3.1), st.floats(-2, 2), st.floats(-1, 1))
def test_epsilon_even_in_gamma(k, h, g):
    assert epsilon(k, h, g) == epsilon(k, h, -g)


def test_dsin_symmetric_about_half_pi():
    t = build_mode_table(QuenchSetup(ModelParams(40, 0.5, 0.7), 0.3, 0.4, 1.0))
    np.testing.assert_allclose(t.dsin, t.dsin[::-1], rtol=1e-14)


def test_table_is_read_only():
    t = build_mode_table(QuenchSetup(ModelParams(8, 0.5, 0.7), 0.3, 0.4, 1.0))
    with pytest.raises(ValueError):
        t.eps0[0] = 1.0


def test_deps_without_cancellation():
    s = QuenchSetup(ModelParams(8, 0.5, 0.7), 0.3, 0.3 + 1e-12, 1.0)
    t = build_mode_table(s)
    with mpmath.workdps(40):
        ref = [
            float(
                mpmath.sqrt((mpmath.mpf(s.h0) - mpmath.cos(k)) ** 2 + (mpmath.mpf(0.5) * mpmath.sin(k)) ** 2)
                - mpmath.sqrt((mpmath.mpf(s.hf) - mpmath.cos(k)) ** 2 + (mpmath.mpf(0.5) * mpmath.sin(k)) ** 2)
            )
            for k in map(mpmath.mpf, t.k)
        ]
    np.testing.assert_allclose(t.deps, ref, rtol=1e-9)
