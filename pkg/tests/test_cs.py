"""Coherent states: amplitudes, normalization, overlaps, zero-flux limit.

The zero-flux superposition has two independent oracles: the free
double series over the level lattice and the closed-form Gaussian
exponential (derived by resumming the generating function and checked
against 30-digit arithmetic during development).
"""

import cmath
import math

import numpy as np
import pytest
from scipy import special as sp

from msf.landau import FieldConfig, make_quadrature, resolve_qnums, stationary_state
from msf.specfun import DomainError, SeriesControl, laguerre_fn_table
from msf.cs import (
    CSLabel,
    cs_branch,
    cs_coefficient,
    cs_expansion,
    cs_normalization,
    cs_overlap,
    cs_state,
    mm_superpose,
    mm_weight_sum,
)

CTL = SeriesControl()


def test_label_validation():
    with pytest.raises(DomainError):
        CSLabel(complex("inf"), 0.0)


def test_coefficient_formula():
    cfg = FieldConfig(mu=0.5)
    lab = CSLabel(0.7 + 0.2j, -0.4j)
    q = resolve_qnums(0, -1, 1, cfg)
    manual = (cmath.exp(q.n1 * cmath.log(lab.z1))
              * cmath.exp(q.n2 * cmath.log(lab.z2))
              * math.exp(-0.5 * (sp.gammaln(1 + q.n1) + sp.gammaln(1 + q.n2))))
    assert cs_coefficient(0, -1, 1, lab, cfg) == pytest.approx(manual, rel=1e-14)


def test_zero_label_single_term():
    cfg = FieldConfig(mu=0.0)
    term = cs_branch(1, 0, CSLabel(0.0, 0.0), cfg, CTL)
    assert term.coeffs[0] == 1.0
    assert np.all(term.coeffs[1:] == 0.0)


def test_branch_weight_matches_q_term():
    # sum_m |c_m|^2 at fixed l equals one term of the Q series
    from msf.specfun import q_term

    cfg = FieldConfig(mu=0.5)
    lab = CSLabel(1.0, 1.0)  # |z1| = |z2| = 1
    term = cs_branch(0, -1, lab, cfg, CTL)
    expect = q_term(1.0 - cfg.mu, 0, math.sqrt(lab.u), math.sqrt(lab.v))
    assert term.weight() == pytest.approx(expect, rel=1e-12)


def test_expansion_weight_equals_normalization():
    cfg = FieldConfig(mu=0.3)
    lab = CSLabel(0.7 + 0.2j, -0.4j)
    for j in (0, 1):
        exp_ = cs_expansion(j, lab, cfg, CTL)
        n = cs_normalization(j, lab.u, lab.v, cfg.mu)
        assert exp_.norm_const == pytest.approx(n, rel=1e-12)


def test_normalization_against_exponential_rule_mu0():
    for (u, v) in [(0.0, 0.0), (2.0, 3.0), (7.5, 1.0)]:
        n0 = cs_normalization(0, u, v, 0.0)
        n1 = cs_normalization(1, u, v, 0.0)
        assert n0 + n1 == pytest.approx(math.exp(u + v), rel=1e-12)


def test_normalization_symmetry_half_flux():
    # mu = 1/2, u = v: the two branches coincide
    n0 = cs_normalization(0, 1.0, 1.0, 0.5)
    n1 = cs_normalization(1, 1.0, 1.0, 0.5)
    assert n0 == pytest.approx(n1, rel=1e-14)
    # frozen value e^2 erf(2) / 2 (dual-checked against the erf form)
    assert n0 == pytest.approx(3.677246026369880839, rel=1e-13)


def test_normalization_degenerate_edges():
    # z2 = 0 on branch 1 keeps only the m = 0 column of the series:
    # sum_l u^(l+mu) / Gamma(1 + l + mu), evaluated independently here
    direct = sum(1.0 ** (l + 0.3) * math.exp(-sp.gammaln(1.3 + l)) for l in range(80))
    assert cs_normalization(1, 1.0, 0.0, 0.3) == pytest.approx(direct, rel=1e-12)
    # z1 = 0 on branch 1 with mu > 0 kills every term (all u-powers positive)
    assert cs_normalization(1, 0.0, 1.0, 0.3) == 0.0
    assert cs_normalization(0, 0.0, 0.0, 0.3) == 0.0
    # zero-label edge at mu = 0: only the branch-1 ground cell survives
    assert cs_normalization(1, 0.0, 0.0, 0.0) == 1.0


def test_cs_state_unit_norm_by_quadrature():
    cfg = FieldConfig(mu=0.5)
    lab = CSLabel(0.7 + 0.2j, -0.4j)
    for j in (0, 1):
        total = 0.0
        lgen = range(-1, -30, -1) if j == 0 else range(0, 29)
        for l in lgen:
            term = cs_branch(j, l, lab, cfg, CTL)
            alpha = (-l - cfg.mu) if j == 0 else (l + cfg.mu)
            quad = make_quadrature(alpha, 48)
            tab = laguerre_fn_table(alpha, len(term.coeffs) - 1, quad.nodes)
            prof = term.coeffs @ tab
            total += float(quad.integrate(np.abs(prof) ** 2).real)
        n = cs_normalization(j, lab.u, lab.v, cfg.mu)
        assert total / n == pytest.approx(1.0, abs=1e-9)


def test_overlap_diagonal_and_conjugate_symmetry():
    mu = 0.25
    a = CSLabel(0.7 + 0.2j, -0.4j)
    b = CSLabel(-0.3 + 1.1j, 0.5 - 0.2j)
    assert cs_overlap(0, a, 0, a, mu) == pytest.approx(1.0, rel=1e-12)
    oab = cs_overlap(1, a, 1, b, mu)
    oba = cs_overlap(1, b, 1, a, mu)
    assert oab == pytest.approx(np.conj(oba), rel=1e-12)


def test_overlap_cross_branch_zero():
    a = CSLabel(0.7, 0.4j)
    b = CSLabel(0.1 - 0.9j, 1.2)
    assert cs_overlap(0, a, 1, b, 0.3) == 0.0


def test_overlap_closed_form_vs_coefficient_contraction():
    mu = 0.25
    cfg = FieldConfig(mu=mu)
    a = CSLabel(0.7 + 0.2j, -0.4j)
    b = CSLabel(-0.3 + 1.1j, 0.5 - 0.2j)
    for j in (0, 1):
        closed = cs_overlap(j, a, j, b, mu)
        ea, eb = cs_expansion(j, a, cfg, CTL), cs_expansion(j, b, cfg, CTL)
        contraction = sum(np.conj(ca) * eb.coeffs.get(k, 0.0)
                          for k, ca in ea.coeffs.items())
        contraction /= math.sqrt(ea.norm_const * eb.norm_const)
        assert abs(abs(closed) - abs(contraction)) < 1e-10


def test_reproducing_coefficients_by_quadrature():
    # the coefficient of each stationary state inside the coherent state
    # equals the projection computed by radial quadrature
    mu = 0.5
    cfg = FieldConfig(mu=mu)
    lab = CSLabel(0.7 + 0.2j, -0.4j)
    n0 = cs_normalization(0, lab.u, lab.v, mu)
    for (l, m) in [(-1, 0), (-1, 2), (-2, 1), (-3, 0), (-2, 3)]:
        term = cs_branch(0, l, lab, cfg, CTL)
        alpha = -l - mu
        quad = make_quadrature(alpha, 48)
        tab = laguerre_fn_table(alpha, len(term.coeffs) - 1, quad.nodes)
        prof = term.coeffs @ tab  # radial profile of the l block
        proj = quad.integrate(tab[m] * prof)
        assert proj / math.sqrt(n0) == pytest.approx(
            term.coeffs[m] / math.sqrt(n0), rel=1e-11)


# ---------------------------------------------------------------------------
# zero-flux limit
# ---------------------------------------------------------------------------


def mm_lattice_series_oracle(lab, theta, rho, cfg, nmax=36):
    """Free double series over the level lattice (n1, n2).

    Cell (r1, r2) maps to the branch-0 state (m, l) = (r1, r1 - r2) when
    r2 > r1 and to the branch-1 state (m, l) = (r2, r1 - r2) otherwise;
    all amplitudes are z1^r1 z2^r2 / sqrt(r1! r2!).
    """
    total = 0.0 + 0.0j
    for r1 in range(nmax):
        for r2 in range(nmax):
            c = (lab.z1 ** r1) * (lab.z2 ** r2) * math.exp(
                -0.5 * (sp.gammaln(r1 + 1.0) + sp.gammaln(r2 + 1.0)))
            if abs(c) < 1e-22:
                continue
            if r2 > r1:
                q = resolve_qnums(0, r1 - r2, r1, cfg)
            else:
                q = resolve_qnums(1, r1 - r2, r2, cfg)
            total += c * stationary_state(q, theta, rho, cfg)
    return total


def mm_closed_form_oracle(lab, theta, rho, cfg):
    w = math.sqrt(rho) * cmath.exp(1j * theta)
    return (math.sqrt(cfg.gamma / (2.0 * math.pi)) * cmath.exp(-rho / 2.0)
            * cmath.exp(lab.z1 * lab.z2 - lab.z1 * w + lab.z2 * np.conj(w)))


def test_mm_superpose_requires_zero_flux():
    with pytest.raises(DomainError):
        mm_superpose(CSLabel(0.1, 0.1), 0.0, 1.0, FieldConfig(mu=0.2))
    with pytest.raises(DomainError):
        mm_superpose(CSLabel(0.1, 0.1), 0.0, 1.0, FieldConfig(mu=0.0, l0=2))


def test_mm_superpose_ground_state_at_zero_labels():
    cfg = FieldConfig(mu=0.0)
    q = resolve_qnums(1, 0, 0, cfg)
    for rho in (0.3, 1.5):
        assert mm_superpose(CSLabel(0.0, 0.0), 0.4, rho, cfg) == pytest.approx(
            stationary_state(q, 0.4, rho, cfg), rel=1e-12)


def test_mm_superpose_pointwise_against_both_oracles(rng):
    cfg = FieldConfig(mu=0.0)
    for _ in range(20):
        theta = float(rng.uniform(0.0, 2.0 * math.pi))
        rho = float(rng.uniform(0.05, 8.0))
        lab = CSLabel(complex(*rng.uniform(-1.5, 1.5, 2)),
                      complex(*rng.uniform(-1.5, 1.5, 2)))
        val = mm_superpose(lab, theta, rho, cfg)
        lattice = mm_lattice_series_oracle(lab, theta, rho, cfg)
        closed = mm_closed_form_oracle(lab, theta, rho, cfg)
        assert abs(val - lattice) / abs(closed) < 1e-10
        assert abs(val - closed) / abs(closed) < 1e-10


def test_mm_superpose_norm_is_exponential():
    # squared norm of the unnormalized superposition = e^{u+v}
    for lab in (CSLabel(0.7 + 0.2j, -0.4j), CSLabel(1.2, 0.9j)):
        n0 = cs_normalization(0, lab.u, lab.v, 0.0)
        n1 = cs_normalization(1, lab.u, lab.v, 0.0)
        assert n0 + n1 == pytest.approx(math.exp(lab.u + lab.v), rel=1e-12)


def test_mm_weight_sum_constant():
    # frozen: 1/pi^2 = 0.10132118364233777
    assert mm_weight_sum(0.0, 0.0) == pytest.approx(0.10132118364233777, rel=1e-12)
    assert mm_weight_sum(3.0, 7.0) == pytest.approx(0.10132118364233777, rel=1e-10)
    grid = np.linspace(0.0, 9.0, 10)
    worst = max(abs(mm_weight_sum(float(u), float(v)) - 1.0 / math.pi ** 2)
                for u in grid for v in grid)
    assert worst < 1e-10
