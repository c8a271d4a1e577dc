"""Weights, moment problem, G matrix, unity reconstruction, kernels."""

import math

import numpy as np
import pytest

from msf.landau import FieldConfig
from msf.specfun import DomainError, erf, ln_gamma
from msf.completeness import (
    KernelParams,
    WeightSpec,
    angular_delta_smear,
    g_matrix,
    moment_check,
    propagator_closed,
    propagator_series,
    radial_delta_smear,
    unity_reconstruction,
    weight_fn,
    weight_half_closed,
)


# ---------------------------------------------------------------------------
# weights
# ---------------------------------------------------------------------------


def test_weight_half_flux_closed_form_grid():
    grid = np.linspace(0.0, 9.0, 10)
    for u in grid:
        for v in grid:
            for j in (0, 1):
                series = weight_fn(WeightSpec(j=j, mu=0.5), float(u), float(v))
                closed = weight_half_closed(j, float(u), float(v))
                assert abs(series - closed) < 1e-12


def test_weight_half_closed_spot_values():
    # frozen: erf(2) / (2 pi^2)
    assert weight_half_closed(0, 1.0, 1.0) == pytest.approx(0.050423614998646447,
                                                            rel=1e-13)
    # u = v makes both branches coincide (erf(0) = 0)
    assert weight_half_closed(0, 2.3, 2.3) == pytest.approx(
        weight_half_closed(1, 2.3, 2.3), rel=1e-15)
    # u = 0: odd error function doubles
    assert weight_half_closed(0, 0.0, 1.7) == pytest.approx(
        erf(math.sqrt(1.7)) / math.pi ** 2, rel=1e-14)


def test_zero_flux_weight_sum_constant():
    grid = np.linspace(0.0, 9.0, 10)
    for u in grid:
        for v in grid:
            total = (weight_fn(WeightSpec(0, 0.0), float(u), float(v))
                     + weight_fn(WeightSpec(1, 0.0), float(u), float(v)))
            assert total == pytest.approx(1.0 / math.pi ** 2, abs=1e-10)


def test_weight_positivity_sampled():
    for mu in (0.1, 0.3, 0.5, 0.7, 0.9):
        for u in np.linspace(0.2, 8.0, 5):
            for v in np.linspace(0.2, 8.0, 5):
                for j in (0, 1):
                    assert weight_fn(WeightSpec(j, mu), float(u), float(v)) > 0.0


def test_weight_vanishing_edge():
    # v = 0 kills the branch-0 weight for mu > 0
    assert weight_fn(WeightSpec(0, 0.3), 2.0, 0.0) == 0.0


# ---------------------------------------------------------------------------
# moments
# ---------------------------------------------------------------------------


def test_moment_trivial():
    mc = moment_check(0.0)
    assert mc.quadrature_value == pytest.approx(1.0, rel=1e-14)


def test_moment_frozen_value():
    mc = moment_check(2.5)
    assert mc.gamma_value == pytest.approx(3.3233509704478425512, rel=1e-14)
    assert mc.abs_err < 1e-12


def test_moment_fractional_flux_exponent():
    # exponent of the kind m - l - mu = 2.7
    mc = moment_check(2.7)
    assert mc.quadrature_value == pytest.approx(
        math.exp(ln_gamma(3.7).real), rel=1e-12)


def test_moment_dense_grid():
    for n in np.linspace(-0.85, 12.0, 50):
        mc = moment_check(float(n))
        assert mc.abs_err / mc.gamma_value < 1e-10


def test_moment_domain():
    with pytest.raises(DomainError):
        moment_check(-1.0)


# ---------------------------------------------------------------------------
# G matrix
# ---------------------------------------------------------------------------


def test_g_matrix_offdiagonal_exact_zero():
    assert g_matrix(1, 2, -1, -1, 0.5) == 0.0
    assert g_matrix(1, 1, -1, -2, 0.5) == 0.0


def test_g_matrix_frozen_value():
    # Gamma(2) Gamma(2.5), frozen
    assert g_matrix(1, 1, -1, -1, 0.5, j=0) == pytest.approx(
        1.3293403881791370205, rel=1e-12)
    assert g_matrix(0, 0, -1, -1, 0.0, j=0) == pytest.approx(1.0, rel=1e-13)


@pytest.mark.parametrize("mu", [0.25, 0.5, 0.75])
def test_g_matrix_vs_closed_form(mu):
    for m in range(0, 7):
        for l in range(-4, 0):
            closed = math.exp(ln_gamma(1.0 + m).real + ln_gamma(1.0 + m - l - mu).real)
            assert g_matrix(m, m, l, l, mu, j=0) == pytest.approx(closed, rel=1e-9)
        for l in range(0, 5):
            closed = math.exp(ln_gamma(1.0 + m + l + mu).real + ln_gamma(1.0 + m).real)
            assert g_matrix(m, m, l, l, mu, j=1) == pytest.approx(closed, rel=1e-9)


# ---------------------------------------------------------------------------
# unity reconstruction
# ---------------------------------------------------------------------------


def test_unity_reconstruction_identity():
    pairs0 = [(l, m) for l in range(-4, 0) for m in range(0, 5)]
    g0 = unity_reconstruction(pairs0, mu=0.5, j=0, n_nodes=80)
    assert np.max(np.abs(g0 - np.eye(len(pairs0)))) < 1e-6
    pairs1 = [(l, m) for l in range(0, 5) for m in range(0, 5)]
    g1 = unity_reconstruction(pairs1, mu=0.5, j=1, n_nodes=80)
    assert np.max(np.abs(g1 - np.eye(len(pairs1)))) < 1e-6


def test_unity_reconstruction_offdiagonal_zero():
    pairs = [(-1, 0), (-2, 0), (-1, 1)]
    g = unity_reconstruction(pairs, mu=0.25, j=0, n_nodes=60)
    off = g - np.diag(np.diag(g))
    assert np.max(np.abs(off)) == 0.0


def test_unity_reconstruction_zero_flux_limit():
    # at mu = 0 the weights sum to the flat measure and the diagonal is 1
    pairs = [(l, m) for l in range(0, 3) for m in range(0, 3)]
    g = unity_reconstruction(pairs, mu=0.0, j=1, n_nodes=80)
    assert np.max(np.abs(g - np.eye(len(pairs)))) < 1e-8


# ---------------------------------------------------------------------------
# propagator kernels
# ---------------------------------------------------------------------------


def test_kernel_params_validation():
    cfg = FieldConfig(mu=0.3)
    with pytest.raises(DomainError):
        KernelParams(j=0, l=1, mu=0.3, delta_t=-0.1j, cfg=cfg)
    with pytest.raises(DomainError):
        KernelParams(j=0, l=-1, mu=0.3, delta_t=+0.1j, cfg=cfg)


def test_series_single_term_limit():
    # large Wick time: the m = 0 state dominates the mode sum
    cfg = FieldConfig(mu=0.3)
    p = KernelParams(j=0, l=-1, mu=0.3, delta_t=-40.0j, cfg=cfg)
    from msf.landau import resolve_qnums, stationary_state, energy_nonrel
    q = resolve_qnums(0, -1, 0, cfg)
    e0 = energy_nonrel(q, cfg)
    direct = 1j * math.exp(-40.0 * e0) * stationary_state(q, 0.7, 1.0, cfg) * np.conj(
        stationary_state(q, 0.0, 2.0, cfg))
    val = propagator_series(p, 0.7, 1.0, 2.0)
    assert val == pytest.approx(direct, rel=1e-10)


@pytest.mark.parametrize("j,l", [(0, -1), (0, -3), (1, 0), (1, 2)])
def test_closed_equals_series_wick(j, l):
    cfg = FieldConfig(gamma=1.0, l0=0, mu=0.3)
    for tau in (0.05, 0.1, 0.2, 0.5, 1.0):
        p = KernelParams(j=j, l=l, mu=0.3, delta_t=-1j * tau, cfg=cfg)
        a = propagator_closed(p, 0.7, 1.0, 2.0)
        b = propagator_series(p, 0.7, 1.0, 2.0)
        assert abs(a - b) / abs(a) < 1e-8


def test_closed_serial_general_complex_time():
    # off-axis complex time with negative imaginary part
    cfg = FieldConfig(gamma=1.0, l0=0, mu=0.3)
    p = KernelParams(j=1, l=1, mu=0.3, delta_t=0.4 - 0.3j, cfg=cfg)
    a = propagator_closed(p, 0.2, 1.0, 2.0)
    b = propagator_series(p, 0.2, 1.0, 2.0)
    assert abs(a - b) / abs(a) < 1e-8


def test_closed_phase_factor():
    cfg = FieldConfig(gamma=1.0, l0=2, mu=0.3)
    p = KernelParams(j=0, l=-1, mu=0.3, delta_t=-0.2j, cfg=cfg)
    a = propagator_closed(p, 0.0, 1.0, 2.0)
    b = propagator_closed(p, 0.7, 1.0, 2.0)
    # angular dependence is exactly exp(i (l - l0) dtheta)
    assert b / a == pytest.approx(np.exp(1j * (-1 - 2) * 0.7), rel=1e-12)


def test_closed_rejects_real_axis_singularity():
    cfg = FieldConfig(gamma=1.0, mu=0.3)
    p = KernelParams(j=0, l=-1, mu=0.3, delta_t=2.0 * math.pi, cfg=cfg)
    with pytest.raises(DomainError):
        propagator_closed(p, 0.0, 1.0, 2.0)


def test_series_rejects_real_time():
    cfg = FieldConfig(mu=0.3)
    p = KernelParams(j=0, l=-1, mu=0.3, delta_t=0.5, cfg=cfg)
    with pytest.raises(DomainError):
        propagator_series(p, 0.0, 1.0, 2.0)


def test_radial_delta_smearing_monotone():
    cfg = FieldConfig(gamma=1.0, mu=0.3)
    errs = []
    for tau in np.geomspace(0.2, 0.02, 6):
        p = KernelParams(j=0, l=-1, mu=0.3, delta_t=-1j * float(tau), cfg=cfg)
        errs.append(radial_delta_smear(p, rho=1.5))
    assert all(a > b for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 0.6 * errs[0]


def test_angular_delta_smearing_converges():
    e10 = angular_delta_smear(10)
    e25 = angular_delta_smear(25)
    e40 = angular_delta_smear(40)
    assert e25 < e10 and e40 <= e25 * 1.5
    assert e40 < 1e-10
