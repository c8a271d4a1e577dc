"""Machinery for machine-checking the resolutions of unity.

Contents:

* weight functions of the coherent-state measure and their mu = 1/2
  closed form,
* the Stieltjes moment checks (moments of exp(-x) against Gamma),
* the auxiliary G matrix (angular integrals analytic, radial by
  quadrature) and the reconstruction of the Gram matrix from the
  coherent-state measure,
* the fixed-angular-number propagator kernel: spectral mode sum and its
  Bessel closed form of Hille-Hardy type, with the smeared
  delta-function limits used to verify completeness numerically.

All delta-type statements are tested in smeared form only: the kernels
are paired with smooth concentrated test functions (Gaussians in rho,
Fourier modes in the angle).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

from .specfun import (
    DEFAULT_CONTROL,
    DomainError,
    SeriesControl,
    TruncationError,
    bessel_i,
    erf,
    laguerre_fn_table,
    ln_gamma,
    q_sum,
)
from .landau import FieldConfig, make_quadrature, resolve_qnums

__all__ = [
    "WeightSpec",
    "KernelParams",
    "weight_fn",
    "weight_half_closed",
    "moment_check",
    "g_matrix",
    "unity_reconstruction",
    "propagator_closed",
    "propagator_series",
    "radial_delta_smear",
    "angular_delta_smear",
]


@dataclass(frozen=True)
class WeightSpec:
    """Branch and flux fraction selecting one weight function."""

    j: int
    mu: float

    def __post_init__(self):
        if self.j not in (0, 1):
            raise DomainError("branch j must be 0 or 1")
        if not (0.0 <= self.mu < 1.0):
            raise DomainError("mu must lie in [0, 1)")


def weight_fn(spec: WeightSpec, u: float, v: float,
              ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Measure density W_j(u, v) on squared label moduli.

    W_0 = pi^-2 exp(-(u+v)) Q_{1-mu}(sqrt u, sqrt v)
    W_1 = pi^-2 exp(-(u+v)) Q_mu(sqrt v, sqrt u)
    """
    if u < 0 or v < 0:
        raise DomainError("u, v must be non-negative")
    if spec.j == 0:
        q = q_sum(1.0 - spec.mu, math.sqrt(u), math.sqrt(v), ctl)
    else:
        q = q_sum(spec.mu, math.sqrt(v), math.sqrt(u), ctl)
    return math.exp(-(u + v)) * q / math.pi**2


def weight_half_closed(j: int, u: float, v: float) -> float:
    """Closed form of the weight at mu = 1/2.

    W_j = [erf(sqrt u + sqrt v) -+ erf(sqrt u - sqrt v)] / (2 pi^2),
    minus sign for j = 0.
    """
    if j not in (0, 1):
        raise DomainError("branch j must be 0 or 1")
    su, sv = math.sqrt(u), math.sqrt(v)
    sign = -1.0 if j == 0 else 1.0
    return (erf(su + sv) + sign * erf(su - sv)) / (2.0 * math.pi**2)


@dataclass(frozen=True)
class MomentCheck:
    quadrature_value: float
    gamma_value: float
    abs_err: float


def moment_check(n: float, n_nodes: int = 80) -> MomentCheck:
    """Moment of exp(-x) on (0, inf): quadrature vs Gamma(1+n), n > -1.

    The fractional part of the exponent is moved into the quadrature
    weight so the remaining integrand is a polynomial and the Gauss rule
    is exact up to rounding.
    """
    if not n > -1.0:
        raise DomainError("moment exponent must exceed -1")
    k = max(0, math.floor(n))
    frac = n - k
    quad = make_quadrature(frac, max(n_nodes, k + 2))
    qval = float(quad.integrate_weighted(quad.nodes**k))
    gval = math.exp(ln_gamma(1.0 + n).real)
    return MomentCheck(quadrature_value=qval, gamma_value=gval, abs_err=abs(qval - gval))


def _branch_exponents(j: int, l: int, m: int, mu: float) -> tuple[float, float]:
    """(u-exponent, v-exponent) of the radial measure integrand."""
    if j == 0:
        if l >= 0:
            raise DomainError("branch j=0 requires l < 0")
        return float(m), m - l - mu
    if l < 0:
        raise DomainError("branch j=1 requires l >= 0")
    return m + l + mu, float(m)


def g_matrix(m: int, n: int, l: int, k: int, mu: float, j: int = 0,
             n_nodes: int = 80) -> float:
    """Radial measure integral G(m, n; l, k) for the exponential density.

    The two angular integrals reduce to Kronecker deltas, so the value
    vanishes exactly unless m = n and l = k; the surviving double
    integral factorizes into two one-dimensional moments of exp(-x),
    each evaluated by a fractional-weight Gauss rule.  The closed form
    is Gamma(1+m) Gamma(1+m-l-mu) on branch 0 and
    Gamma(1+m+l+mu) Gamma(1+m) on branch 1.
    """
    if m != n or l != k:
        return 0.0
    pu, pv = _branch_exponents(j, l, m, mu)
    return (moment_check(pu, n_nodes).quadrature_value
            * moment_check(pv, n_nodes).quadrature_value)


def _ln_q_grid(nu: float, su: np.ndarray, sv: np.ndarray, l_max: int | None = None,
               rel_tol: float = 1e-15) -> np.ndarray:
    """Elementwise ln Q_nu(su, sv) via the scaled-Bessel route.

    Works for arguments far beyond the overflow range of Q itself; both
    arrays must be strictly positive.
    """
    su = np.asarray(su, dtype=float)
    sv = np.asarray(sv, dtype=float)
    if np.any(su <= 0) or np.any(sv <= 0):
        raise DomainError("grid Q evaluation requires positive arguments")
    zarg = 2.0 * su * sv
    if l_max is None:
        # terms start decaying only past l ~ 2 u v
        l_max = int(2.0 * float(np.max(zarg))) + 600
    ln_ratio = np.log(sv) - np.log(su)
    ln_total = np.full(np.broadcast(su, sv).shape, -np.inf)
    for l in range(l_max):
        p = nu + l
        scaled = _sp.ive(p, zarg)
        with np.errstate(divide="ignore"):
            ln_term = np.where(scaled > 0,
                               p * ln_ratio + zarg + np.log(np.where(scaled > 0, scaled, 1.0)),
                               -np.inf)
        ln_total = np.logaddexp(ln_total, ln_term)
        if l > 4 and float(np.max(ln_term - ln_total)) < math.log(rel_tol):
            return ln_total
    raise TruncationError("grid Q series did not converge",
                          float(np.max(ln_total)), float(np.max(ln_term)))


def _ln_q_grid_series(nu: float, su: np.ndarray, sv: np.ndarray,
                      rel_tol: float = 1e-15, k_cap: int = 40_000) -> np.ndarray:
    """Elementwise ln Q_nu(su, sv) via the truncated-exponential form.

    Collapsing the double power series along diagonals l + m = k gives

        Q_nu = sum_k  B^(nu+k) e_k(A) / Gamma(nu+k+1),
        e_k(A) = sum_{m<=k} A^m / m!,   A = su^2, B = sv^2,

    with e_k accumulated iteratively in log space.  Independent of the
    Bessel-function route, used as its cross-check on grids.
    """
    su = np.asarray(su, dtype=float)
    sv = np.asarray(sv, dtype=float)
    if np.any(su <= 0) or np.any(sv <= 0):
        raise DomainError("grid Q evaluation requires positive arguments")
    ln_a = 2.0 * np.log(su)
    ln_b = 2.0 * np.log(sv)
    ln_ek = np.zeros(np.broadcast(su, sv).shape)
    ln_total = nu * ln_b - _sp.gammaln(nu + 1.0) + ln_ek
    k = 0
    while True:
        k += 1
        ln_ek = np.logaddexp(ln_ek, k * ln_a - _sp.gammaln(k + 1.0))
        ln_term = (nu + k) * ln_b - _sp.gammaln(nu + k + 1.0) + ln_ek
        ln_total = np.logaddexp(ln_total, ln_term)
        if k > 4 and float(np.max(ln_term - ln_total)) < math.log(rel_tol):
            return ln_total
        if k >= k_cap:
            raise TruncationError("grid Q series did not converge",
                                  float(np.max(ln_total)), float(np.max(ln_term)))


def unity_reconstruction(
    basis_pairs: list[tuple[int, int]],
    mu: float,
    j: int = 0,
    n_nodes: int = 140,
    ctl: SeriesControl = DEFAULT_CONTROL,
) -> np.ndarray:
    """Gram matrix reconstructed from the coherent-state measure.

    basis_pairs lists (l, m) on branch j.  The four z integrals reduce
    analytically to two radial ones; the remaining (u, v) integral of

        pi^2 [W_j(u, v) / N_j(u, v)] u^{p_u} v^{p_v} / (Gamma(1+p_u) Gamma(1+p_v))

    is evaluated on a tensor Gauss grid.  Both the weight and the
    normalization are evaluated numerically as independent Bessel
    series, so a matrix close to the identity is a genuine check of the
    measure.  Off-diagonal entries between different l vanish exactly.
    """
    cfg = FieldConfig(mu=mu)
    for (l, m) in basis_pairs:
        resolve_qnums(j, l, m, cfg)  # validates branch domains
    # shared fractional parts of the exponents within one branch
    frac_u = 0.0 if j == 0 else mu
    frac_v = (1.0 - mu if mu > 0 else 0.0) if j == 0 else 0.0
    # branch 0: v-exponents are m - l - mu = integer - mu; the fractional
    # weight v^(1-mu) leaves integer powers v^(m-l-1).
    qu = make_quadrature(frac_u, n_nodes)
    qv = make_quadrature(frac_v, n_nodes)
    U = qu.nodes[:, None] * np.ones((1, n_nodes))
    V = qv.nodes[None, :] * np.ones((n_nodes, 1))
    # pi^2 W_j exp(u+v) through the scaled-Bessel grid route and N_j
    # through the independent scalar power-series route; their ratio is
    # the exponential density, reproduced numerically rather than by
    # construction.
    nu = (1.0 - mu) if j == 0 else mu
    sa, sb = (np.sqrt(U), np.sqrt(V)) if j == 0 else (np.sqrt(V), np.sqrt(U))
    ln_w = _ln_q_grid(nu, sa, sb)
    ln_n = _ln_q_grid_series(nu, sa, sb)
    ratio = np.exp(ln_w - ln_n)
    n = len(basis_pairs)
    out = np.zeros((n, n))
    wu = qu.weights[:, None]
    wv = qv.weights[None, :]
    for a, (la, ma) in enumerate(basis_pairs):
        for b, (lb, mb) in enumerate(basis_pairs):
            if la != lb or ma != mb:
                continue  # angular Kronecker deltas
            pu, pv = _branch_exponents(j, la, ma, mu)
            poly = U ** (pu - frac_u) * V ** (pv - frac_v)
            integral = float(np.sum(wu * wv * ratio * poly))
            out[a, b] = integral * math.exp(
                -(ln_gamma(1.0 + pu).real + ln_gamma(1.0 + pv).real)
            )
    return out


@dataclass(frozen=True)
class KernelParams:
    """Parameters of the fixed-l propagator kernel.

    delta_t may be complex with non-positive imaginary part; the purely
    imaginary axis delta_t = -i tau is the absolutely convergent
    (Wick-rotated) regime.  On the real axis only the closed form is
    defined, away from the zeros of sin(gamma t / 2).
    """

    j: int
    l: int
    mu: float
    delta_t: complex
    cfg: FieldConfig

    def __post_init__(self):
        if self.j not in (0, 1):
            raise DomainError("branch j must be 0 or 1")
        if self.j == 0 and self.l >= 0:
            raise DomainError("branch j=0 requires l < 0")
        if self.j == 1 and self.l < 0:
            raise DomainError("branch j=1 requires l >= 0")
        if complex(self.delta_t).imag > 1e-15:
            raise DomainError("delta_t must have non-positive imaginary part")


def _nu_index(p: KernelParams) -> float:
    return -(p.l + p.mu) if p.j == 0 else (p.l + p.mu)


def propagator_closed(p: KernelParams, dtheta: float, rho: float, rho_p: float) -> complex:
    """Closed form of the fixed-l kernel (Hille-Hardy type).

    S_l = (gamma / 4 pi) exp[i (l - l0) dtheta - i (gamma/2)(l + mu) dt]
          * exp[(i/2)(rho + rho') cot(gamma dt / 2)] / sin(gamma dt / 2)
          * I_nu( sqrt(rho rho') / (i sin(gamma dt / 2)) ),

    nu = -(l + mu) on branch 0 and +(l + mu) on branch 1.  Wick-rotated
    times are evaluated through real hyperbolic factors with the scaled
    Bessel function, so small tau does not overflow.
    """
    g = p.cfg.gamma
    dt = complex(p.delta_t)
    nu = _nu_index(p)
    phase = cmath.exp(1j * (p.l - p.cfg.l0) * dtheta - 1j * (g / 2.0) * (p.l + p.mu) * dt)
    if dt.real == 0.0 and dt.imag < 0.0:
        # Wick axis: everything real apart from the carried phase
        tau = -dt.imag
        ph = g * tau / 2.0
        sh, ch = math.sinh(ph), math.cosh(ph)
        zarg = math.sqrt(rho * rho_p) / sh
        ln_mag = -0.5 * (rho + rho_p) * ch / sh + zarg
        scaled = bessel_i(nu, zarg, scaled=True)
        if scaled <= 0.0:
            radial = 0.0
        else:
            radial = math.exp(ln_mag + math.log(scaled)) / sh
        return (g / (4.0 * math.pi)) * phase * 1j * radial
    phi_t = g * dt / 2.0
    s = cmath.sin(phi_t)
    if abs(s) < 1e-12:
        raise DomainError("kernel singular: sin(gamma dt / 2) vanishes")
    c = cmath.cos(phi_t)
    zarg = cmath.sqrt(rho * rho_p) / (1j * s)
    val = cmath.exp(0.5j * (rho + rho_p) * c / s) * bessel_i(nu, zarg) / s
    return (g / (4.0 * math.pi)) * phase * val


def propagator_series(p: KernelParams, dtheta: float, rho: float, rho_p: float,
                      ctl: SeriesControl = DEFAULT_CONTROL) -> complex:
    """Spectral mode sum i sum_m exp(-i E_m dt) phi(x) conj(phi(x')).

    Absolutely convergent only for Im(dt) < 0; rejected otherwise.  The
    tail is bounded geometrically by the factor |exp(-i gamma dt)| per
    step.
    """
    dt = complex(p.delta_t)
    if not dt.imag < 0.0:
        raise DomainError("mode sum requires Im(delta_t) < 0")
    g = p.cfg.gamma
    ratio = abs(cmath.exp(-1j * g * dt))  # < 1
    alpha = abs(_nu_index(p))
    phase_l = cmath.exp(1j * (p.l - p.cfg.l0) * dtheta)
    # branch phases of phi(x) phi*(x') cancel; N^2 = gamma / 2 pi
    block = 48
    m_max = block - 1
    total = 0.0 + 0.0j
    while True:
        tab = laguerre_fn_table(alpha, m_max, np.asarray([rho, rho_p]))
        prods = tab[:, 0] * tab[:, 1]
        n1 = np.arange(m_max + 1) + (0.0 if p.j == 0 else alpha)
        energies = g * (n1 + 0.5)
        weights = np.exp(-1j * energies * dt)
        total = 1j * (g / (2.0 * math.pi)) * phase_l * np.dot(weights, prods)
        tail = abs(weights[-1] * prods[-1]) * ratio / (1.0 - ratio)
        scale = max(abs(total), 1e-300)
        if tail * g / (2.0 * math.pi) <= ctl.rel_tol * scale:
            return complex(total)
        if m_max + block >= ctl.max_terms:
            raise TruncationError("propagator mode sum did not converge",
                                  abs(total), tail)
        m_max += block


def radial_delta_smear(p: KernelParams, rho: float, width: float = 0.35) -> float:
    """Relative error of the smeared radial delta limit at Wick time.

    Integrates the closed kernel against a Gaussian test function g
    centered at rho and compares with i (gamma / 2 pi) g(rho); returns
    the relative deviation at dtheta = 0.
    """
    from .radial import make_radial_grid

    dt = complex(p.delta_t)
    if not (dt.real == 0.0 and dt.imag < 0.0):
        raise DomainError("smearing check runs on the Wick axis")
    grid = make_radial_grid(rho_max=rho + 14.0 * width + 6.0, tail_step=0.5)
    rp = grid.nodes
    gvals = np.exp(-((rp - rho) ** 2) / (2.0 * width**2))
    kvals = np.array([propagator_closed(p, 0.0, rho, x) for x in rp])
    smeared = grid.integrate(kvals * gvals)
    target = 1j * p.cfg.gamma / (2.0 * math.pi)  # times g(rho) = 1
    return float(abs(smeared - target) / abs(target))


def angular_delta_smear(l_max: int, test_width: float = 0.5, n_theta: int = 801) -> float:
    """Smeared check of sum_l e^{i l dtheta} / 2 pi -> delta(dtheta).

    Pairs the truncated Fourier comb with a smooth periodic Gaussian and
    returns |integral - h(0)| / |h(0)|.  Convergence in l_max verifies
    the angular part of the completeness statement.
    """
    theta = np.linspace(-math.pi, math.pi, n_theta)
    h = np.exp(-(theta**2) / (2.0 * test_width**2))
    comb = np.zeros_like(theta)
    for l in range(-l_max, l_max + 1):
        comb += np.cos(l * theta)  # imaginary parts cancel pairwise
    comb /= 2.0 * math.pi
    integral = np.trapezoid(comb * h, theta)
    return float(abs(integral - h[theta.size // 2]) / abs(h[theta.size // 2]))
