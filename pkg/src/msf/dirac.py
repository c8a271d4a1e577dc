"""Dirac states in the magnetic-solenoid field, planar and embedded.

The planar (2+1) Hamiltonian is H = sigma.P + M sigma3 (units
hbar = c = e = 1, charge -e).  It admits a one-parameter family of
self-adjoint boundary conditions at the flux line; the two natural ones
are labeled vartheta = +-1 and select which spin component may carry
the irregular-at-origin radial profile in the l = 0 channel.

Scalar building blocks (spin-shifted stationary functions):

    branch 0:  exp(i (l_s - l0) theta) I_{n2,n1},
               n1 = m, n2 = m - l_s - mu,      l <= -(1 - vartheta)/2
    branch 1:  exp(i (l_s - l0) theta - i pi l_s) I_{n1,n2},
               n1 = m + l_s + mu, n2 = m,      l >= (1 + vartheta)/2

with l_s = l - (1 + sigma)/2.  Transverse energy squared is
2 gamma [n1 + (1 + sigma)/2]; the positive operator Pi0 has eigenvalues
E = sqrt(M^2 + E_perp^2) and is always applied spectrally.

Spinor eigenstates of H are built by the operator string

    psi = C { sigma3 [ +- Pi0 - sigma.P ] + M } u,     u = phi_sigma v_sigma,

with sigma = +1 for particles (+) and -1 for antiparticles (-), and C
fixed by unit norm under the spinor inner product.

sigma.P acts by an exact angular shift plus the first-order radial
ladder operator, applied through numerical differentiation on a
composite grid (see :mod:`msf.radial`).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np

from .specfun import DEFAULT_CONTROL, DomainError, SeriesControl, laguerre_fn_table, ln_gamma
from .landau import FieldConfig
from .radial import RadialGrid, make_radial_grid
from .cs import CSLabel, _cpow

__all__ = [
    "DiracConfig",
    "RelQuantumNumbers",
    "Spinor2",
    "Spinor4",
    "SpectralBoundaryError",
    "resolve_rel_qnums",
    "rel_basis_fn",
    "basis_spinor_component",
    "apply_sigma_p",
    "apply_pi0",
    "dirac_spinor",
    "hamiltonian_apply",
    "d_inner",
    "rel_cs",
    "rel_cs_overlap_closed",
    "embed_3p1",
    "h3p1_apply",
    "sz_apply",
    "d_inner4",
    "xi_flip",
    "green_kernel_rel",
]


class SpectralBoundaryError(RuntimeError):
    """Spinor construction collapsed to zero norm (spectral boundary)."""


@dataclass(frozen=True)
class DiracConfig:
    """Field configuration, mass, and self-adjoint extension label."""

    field: FieldConfig
    mass: float = 1.0
    vartheta: int = 1

    def __post_init__(self):
        if self.vartheta not in (-1, 1):
            raise DomainError("vartheta must be +1 or -1")
        if self.mass < 0:
            raise DomainError("mass must be non-negative")


@dataclass(frozen=True)
class RelQuantumNumbers:
    j: int
    l: int
    m: int
    sigma: int
    l_sigma: int
    n1: float
    n2: float


def _l_range_ok(j: int, l: int, vartheta: int) -> bool:
    if j == 0:
        return l <= -(1 - vartheta) // 2
    return l >= (1 + vartheta) // 2


def resolve_rel_qnums(j: int, l: int, m: int, sigma: int, dc: DiracConfig) -> RelQuantumNumbers:
    """Validate (j, l, m, sigma) against the vartheta-dependent ranges."""
    if j not in (0, 1):
        raise DomainError("branch j must be 0 or 1")
    if sigma not in (-1, 1):
        raise DomainError("sigma must be +1 or -1")
    if m < 0 or m != int(m):
        raise DomainError("m must be a non-negative integer")
    if not _l_range_ok(j, l, dc.vartheta):
        raise DomainError(
            f"l = {l} outside branch-{j} range for vartheta = {dc.vartheta}"
        )
    mu = dc.field.mu
    l_s = l - (1 + sigma) // 2
    if j == 0:
        n1, n2 = float(m), m - l_s - mu
    else:
        n1, n2 = m + l_s + mu, float(m)
    # Laguerre domain: order alpha = +-(n1 - n2) must exceed -1
    alpha = (n2 - n1) if j == 0 else (n1 - n2)
    if not alpha > -1.0:
        raise DomainError("radial profile outside the Laguerre domain")
    return RelQuantumNumbers(j=j, l=int(l), m=int(m), sigma=sigma, l_sigma=int(l_s),
                             n1=n1, n2=n2)


def e_perp_sq(q: RelQuantumNumbers, dc: DiracConfig) -> float:
    """Transverse energy squared 2 gamma [n1 + (1 + sigma)/2]."""
    return 2.0 * dc.field.gamma * (q.n1 + (1 + q.sigma) / 2.0)


def e_energy(q: RelQuantumNumbers, dc: DiracConfig) -> float:
    """sqrt(M^2 + E_perp^2), the eigenvalue of Pi0."""
    return math.sqrt(dc.mass**2 + e_perp_sq(q, dc))


def _rel_alpha(q: RelQuantumNumbers) -> float:
    return (q.n2 - q.n1) if q.j == 0 else (q.n1 - q.n2)


def _rel_radial(q: RelQuantumNumbers, rho: np.ndarray) -> np.ndarray:
    alpha = _rel_alpha(q)
    return laguerre_fn_table(alpha, q.m, rho)[q.m]


def rel_basis_fn(q: RelQuantumNumbers, dc: DiracConfig, theta, rho):
    """Scalar component function, including sqrt(gamma/2 pi) and phases.

    Supports the irregular-at-origin l = 0 profiles selected by
    vartheta (order alpha in (-1, 0)); these are square integrable but
    unbounded as rho -> 0.
    """
    cfg = dc.field
    norm = math.sqrt(cfg.gamma / (2.0 * math.pi))
    phase = np.exp(1j * (q.l_sigma - cfg.l0) * np.asarray(theta, dtype=float))
    if q.j == 1:
        phase = phase * np.exp(-1j * math.pi * q.l_sigma)
    out = norm * phase * _rel_radial(q, np.asarray(rho, dtype=float))
    return complex(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class Spinor2:
    """Two-component spinor on a shared radial grid.

    Component values are radial profiles; the angular factors
    exp(i (L - l0) theta) are carried through the indices (l_up, l_dn).
    Consistent total angular momentum requires l_dn = l_up + 1.
    """

    grid: RadialGrid
    l_up: int
    up: np.ndarray
    dn: np.ndarray

    def __post_init__(self):
        if self.up.shape != self.grid.nodes.shape or self.dn.shape != self.grid.nodes.shape:
            raise DomainError("component shape must match the grid")

    @property
    def l_dn(self) -> int:
        return self.l_up + 1

    def scale(self, c: complex) -> "Spinor2":
        return replace(self, up=c * self.up, dn=c * self.dn)

    def add(self, other: "Spinor2") -> "Spinor2":
        if other.grid is not self.grid or other.l_up != self.l_up:
            raise DomainError("spinor addition requires a shared grid and angular index")
        return replace(self, up=self.up + other.up, dn=self.dn + other.dn)

    def sigma3(self) -> "Spinor2":
        return replace(self, dn=-self.dn)


def d_inner(a: Spinor2, b: Spinor2, dc: DiracConfig, origin_tail: bool = True) -> complex:
    """Spinor inner product (1/gamma) int drho dtheta a^dag b.

    The grid covers [rho_min, rho_max].  With ``origin_tail`` the
    segment (0, rho_min) is added analytically from the power-law
    behavior of each spin slot's eigenfamily (two-term fit through the
    first nodes); without it, pairs involving the irregular vartheta
    profiles lose O(rho_min^(1-mu)) of orthogonality.  Residual fields
    produced by grid differentiation do not follow the family power law
    and should be measured with ``origin_tail=False``.
    """
    if a.grid is not b.grid:
        raise DomainError("spinors must share one grid")
    total = 0.0 + 0.0j
    if a.l_up == b.l_up:
        delta = a.grid.rho_min
        r1, r2 = float(a.grid.nodes[0]), float(a.grid.nodes[1])
        for av, bv, sigma, L in ((a.up, b.up, 1, a.l_up), (a.dn, b.dn, -1, a.l_dn)):
            total += a.grid.integrate(np.conj(av) * bv)
            if not origin_tail:
                continue
            w1 = complex(np.conj(av[0]) * bv[0])
            w2 = complex(np.conj(av[1]) * bv[1])
            if w1 != 0.0 or w2 != 0.0:
                alpha, _, _, _ = _component_family(sigma, L, dc)
                # two-term fit w = rho^alpha (c0 + c1 rho) through the
                # first two nodes, integrated over (0, rho_min)
                h1, h2 = w1 * r1 ** (-alpha), w2 * r2 ** (-alpha)
                c1 = (h2 - h1) / (r2 - r1)
                c0 = h1 - c1 * r1
                total += delta ** (alpha + 1.0) * (c0 / (alpha + 1.0)
                                                   + c1 * delta / (alpha + 2.0))
    return complex(2.0 * math.pi / dc.field.gamma * total)


def d_norm(a: Spinor2, dc: DiracConfig, origin_tail: bool = True) -> float:
    return math.sqrt(max(d_inner(a, a, dc, origin_tail).real, 0.0))


def basis_spinor_component(q: RelQuantumNumbers, dc: DiracConfig, grid: RadialGrid) -> Spinor2:
    """u = phi_sigma v_sigma: the scalar profile in the sigma slot."""
    cfg = dc.field
    norm = math.sqrt(cfg.gamma / (2.0 * math.pi))
    prof = norm * _rel_radial(q, grid.nodes).astype(complex)
    if q.j == 1:
        prof = prof * cmath.exp(-1j * math.pi * q.l_sigma)
    zero = np.zeros_like(prof)
    if q.sigma == 1:
        return Spinor2(grid=grid, l_up=q.l_sigma, up=prof, dn=zero)
    return Spinor2(grid=grid, l_up=q.l_sigma - 1, up=zero, dn=prof)


def _ladder(vals: np.ndarray, sigma: int, L: int, raising: bool,
            dc: DiracConfig, grid: RadialGrid) -> np.ndarray:
    """Radial ladder action of P_+ (raising) or P_- on one spin slot.

    The slot's eigenfamily fixes the origin exponent alpha (profiles are
    rho^(alpha/2) times an entire function h); the prefactor is peeled
    off analytically, so the 1/sqrt(rho)-singular pieces either cancel
    exactly or are carried explicitly, and only the smooth factor h is
    differentiated numerically:

        P_+- [rho^(a/2) h] = -i sqrt(2 gamma) { rho^((a+1)/2) (h' -+ h/2)
                             + ((a -+ (L + mu))/2) rho^((a-1)/2) h }.
    """
    mu = dc.field.mu
    alpha, _, _, _ = _component_family(sigma, L, dc)
    rho = grid.nodes
    with np.errstate(divide="ignore", invalid="ignore"):
        h = vals * rho ** (-alpha / 2.0)
    dh = grid.derivative(h)
    sgn = -1.0 if raising else 1.0
    coeff = 0.5 * (alpha + sgn * (L + mu))
    out = rho ** ((alpha + 1.0) / 2.0) * (dh + sgn * 0.5 * h)
    if coeff != 0.0:
        out = out + coeff * rho ** ((alpha - 1.0) / 2.0) * h
    return -1j * math.sqrt(2.0 * dc.field.gamma) * out


def apply_sigma_p(s: Spinor2, dc: DiracConfig) -> Spinor2:
    """sigma.P: exact angular shifts, numerical radial ladder action.

    The upper output slot receives P_- applied to the lower component
    (angular index drops by one), the lower receives P_+ of the upper.
    Total angular momentum is preserved.
    """
    new_up = _ladder(s.dn, -1, s.l_dn, False, dc, s.grid)
    new_dn = _ladder(s.up, 1, s.l_up, True, dc, s.grid)
    return Spinor2(grid=s.grid, l_up=s.l_up, up=new_up, dn=new_dn)


def _component_family(sigma: int, L: int, dc: DiracConfig):
    """Scalar eigenfamily for a spin slot with angular index L.

    Returns (alpha, j, l, n1_of_m) describing the orthonormal radial
    family I_{...}(rho) at that angular index under the vartheta
    boundary condition.
    """
    l = L + (1 + sigma) // 2
    mu = dc.field.mu
    j0_ok = _l_range_ok(0, l, dc.vartheta)
    j1_ok = _l_range_ok(1, l, dc.vartheta)
    if j0_ok and not j1_ok:
        j = 0
    elif j1_ok and not j0_ok:
        j = 1
    else:
        raise DomainError(f"angular index l = {l} not in either branch range")
    if j == 0:
        alpha = -(L + mu)

        def n1_of_m(m):
            return float(m)
    else:
        alpha = L + mu

        def n1_of_m(m):
            return m + L + mu
    if not alpha > -1.0:
        raise DomainError("profile family outside the Laguerre domain")
    return alpha, j, l, n1_of_m


def _expand_component(vals: np.ndarray, sigma: int, L: int, dc: DiracConfig,
                      grid: RadialGrid, m_max: int) -> tuple[np.ndarray, float, object]:
    """Project a radial profile on the scalar eigenfamily of its slot.

    Returns (coefficients, residual norm, n1_of_m).  Profiles are
    expanded against sqrt(gamma/2 pi)-normalized functions so that
    coefficients are the spinor-product amplitudes.
    """
    alpha, j, l, n1_of_m = _component_family(sigma, L, dc)
    norm = math.sqrt(dc.field.gamma / (2.0 * math.pi))
    tab = norm * laguerre_fn_table(alpha, m_max, grid.nodes)
    if j == 1:
        tab = tab.astype(complex) * cmath.exp(-1j * math.pi * L)
    scale = 2.0 * math.pi / dc.field.gamma
    coeffs = np.array([scale * grid.integrate(np.conj(tab[m]) * vals)
                       for m in range(m_max + 1)])
    recon = coeffs @ tab
    resid = math.sqrt(abs(scale * grid.integrate(np.abs(vals - recon) ** 2)))
    return coeffs, resid, (tab, n1_of_m)


def apply_pi0(s: Spinor2, dc: DiracConfig, m_max: int = 48,
              resid_tol: float = 1e-7) -> Spinor2:
    """Spectral action of the positive operator Pi0 = sqrt(M^2 + (sigma.P)^2).

    Each component is expanded in the scalar eigenfamily of its slot and
    the coefficients are scaled by sqrt(M^2 + 2 gamma [n1 + (1+sigma)/2]).
    Raises DomainError (with the residual) if the expansion does not
    capture the profile.
    """
    out = {}
    norms = {}
    for slot, vals, L in (("up", s.up, s.l_up), ("dn", s.dn, s.l_dn)):
        sigma = 1 if slot == "up" else -1
        nrm = math.sqrt(abs(2.0 * math.pi / dc.field.gamma
                            * s.grid.integrate(np.abs(vals) ** 2)))
        norms[slot] = nrm
        if nrm == 0.0:
            out[slot] = np.zeros_like(vals)
            continue
        coeffs, resid, (tab, n1_of_m) = _expand_component(vals, sigma, L, dc, s.grid, m_max)
        if resid > resid_tol * nrm:
            raise DomainError(
                f"profile not in the spectral family (residual {resid:.3e} vs norm {nrm:.3e})"
            )
        energies = np.array([
            math.sqrt(dc.mass**2 + 2.0 * dc.field.gamma * (n1_of_m(m) + (1 + sigma) / 2.0))
            for m in range(coeffs.size)
        ])
        out[slot] = (coeffs * energies) @ tab
    return Spinor2(grid=s.grid, l_up=s.l_up, up=out["up"], dn=out["dn"])


def hamiltonian_apply(s: Spinor2, dc: DiracConfig) -> Spinor2:
    """H = sigma.P + M sigma3, applied on the grid."""
    hp = apply_sigma_p(s, dc)
    return Spinor2(grid=s.grid, l_up=s.l_up,
                   up=hp.up + dc.mass * s.up,
                   dn=hp.dn - dc.mass * s.dn)


def _fix_phase(s: Spinor2, dc: DiracConfig) -> Spinor2:
    """Deterministic overall phase: first nonvanishing component real
    and positive at the smallest grid node."""
    for comp in (s.up, s.dn):
        ref = complex(comp[0])
        if abs(ref) > 0:
            return s.scale(abs(ref) / ref)
    return s


def dirac_spinor(q: RelQuantumNumbers, dc: DiracConfig, charge: int,
                 grid: RadialGrid) -> tuple[Spinor2, float]:
    """Normalized H eigenspinor and its |energy| E = sqrt(M^2 + E_perp^2).

    charge = +1 builds the positive-energy state from the sigma = +1
    scalar, charge = -1 the negative-energy state from sigma = -1; the
    Hamiltonian eigenvalue is charge * E.  Raises SpectralBoundaryError
    when the operator string annihilates the seed (massless zero mode).
    """
    if charge not in (-1, 1):
        raise DomainError("charge must be +1 or -1")
    if q.sigma != charge:
        raise DomainError("seed spin label must match the charge branch")
    u = basis_spinor_component(q, dc, grid)
    au = apply_sigma_p(u, dc)
    energy = e_energy(q, dc)
    # sigma3 [charge*E - sigma.P] u + M u
    combo = Spinor2(grid=grid, l_up=u.l_up,
                    up=(charge * energy * u.up - au.up),
                    dn=-(charge * energy * u.dn - au.dn))
    psi = Spinor2(grid=grid, l_up=u.l_up,
                  up=combo.up + dc.mass * u.up,
                  dn=combo.dn + dc.mass * u.dn)
    nrm = d_norm(psi, dc)
    seed_nrm = d_norm(u, dc)
    if nrm <= 1e-10 * max(seed_nrm * max(energy, dc.mass, 1.0), 1e-30):
        raise SpectralBoundaryError(
            "operator string annihilated the seed state (zero-norm spinor)"
        )
    return _fix_phase(psi.scale(1.0 / nrm), dc), energy


def _rel_l_values(j: int, vartheta: int):
    if j == 0:
        l = -(1 - vartheta) // 2
        while True:
            yield l
            l -= 1
    else:
        l = (1 + vartheta) // 2
        while True:
            yield l
            l += 1


def _rel_coeff(q: RelQuantumNumbers, label: CSLabel) -> complex:
    c = _cpow(label.z1, q.n1) * _cpow(label.z2, q.n2)
    if c == 0:
        return 0.0 + 0.0j
    return c * math.exp(-0.5 * (ln_gamma(1.0 + q.n1) + ln_gamma(1.0 + q.n2)).real)


@dataclass(frozen=True)
class RelCS:
    """Truncated relativistic coherent state on one branch.

    states maps (l, m) to (coefficient, energy); norm_const is the
    numerically accumulated normalization (diagonal of the overlap
    form), and spinor holds the assembled grid representation, unit
    norm under the spinor product.
    """

    j: int
    charge: int
    label: CSLabel
    states: dict
    norm_const: float
    spinors: dict
    grid: RadialGrid


def rel_cs(j: int, label: CSLabel, dc: DiracConfig, charge: int,
           grid: RadialGrid | None = None,
           ctl: SeriesControl = DEFAULT_CONTROL,
           l_blocks: int = 14, m_max: int = 14) -> RelCS:
    """Relativistic coherent state: the (l, m) series of eigenspinors.

    Per-state weights follow the convention that fixes the overlap form
    to 2 M (E + M) on the diagonal, i.e. the series is

        sum c_{lm} sqrt(2 M (E_lm + M)) psihat_{lm} / sqrt(Mcal),
        Mcal = sum |c_{lm}|^2 2 M (E_lm + M),

    with psihat the unit-norm spinors.  Requires M > 0 (the weight
    degenerates in the massless limit).
    """
    if dc.mass <= 0.0:
        raise DomainError("relativistic coherent states require M > 0")
    if grid is None:
        grid = make_radial_grid(rho_max=60.0)
    states: dict = {}
    total = 0.0
    small = 0
    for count, l in enumerate(_rel_l_values(j, dc.vartheta)):
        block = 0.0
        for m in range(m_max + 1):
            q = resolve_rel_qnums(j, l, m, charge, dc)
            c = _rel_coeff(q, label)
            if c == 0:
                continue
            e = e_energy(q, dc)
            w = abs(c) ** 2 * 2.0 * dc.mass * (e + dc.mass)
            block += w
            states[(l, m)] = (complex(c), e)
        total += block
        if total > 0 and block <= ctl.rel_tol * total:
            small += 1
            if small >= 3:
                break
        else:
            small = 0
        if count + 1 >= l_blocks:
            break
    # assemble the grid representation, one Spinor2 per angular sector
    acc: dict[int, Spinor2] = {}
    for (l, m), (c, e) in states.items():
        q = resolve_rel_qnums(j, l, m, charge, dc)
        psi, _ = dirac_spinor(q, dc, charge, grid)
        wgt = c * math.sqrt(2.0 * dc.mass * (e + dc.mass))
        if psi.l_up in acc:
            acc[psi.l_up] = acc[psi.l_up].add(psi.scale(wgt))
        else:
            acc[psi.l_up] = psi.scale(wgt)
    norm_const = total
    scale = 1.0 / math.sqrt(norm_const)
    spinors = {lu: sp.scale(scale) for lu, sp in acc.items()}
    return RelCS(j=j, charge=charge, label=label, states=states,
                 norm_const=norm_const, spinors=spinors, grid=grid)


def rel_cs_inner(a: RelCS, b: RelCS, dc: DiracConfig) -> complex:
    """Spinor-quadrature overlap of two assembled coherent states."""
    if a.grid is not b.grid:
        raise DomainError("states must share one grid")
    total = 0.0 + 0.0j
    for lu, sa in a.spinors.items():
        sb = b.spinors.get(lu)
        if sb is not None:
            total += d_inner(sa, sb, dc)
    return complex(total)


def rel_cs_overlap_closed(j: int, label_a: CSLabel, label_b: CSLabel,
                          dc: DiracConfig, charge: int,
                          l_blocks: int = 14, m_max: int = 14) -> complex:
    """Overlap via the scalar route: 2M sum conj(c) c' (E + M) / sqrt(Mcal Mcal')."""
    num = 0.0 + 0.0j
    na = nb = 0.0
    for l in _take_l(j, dc.vartheta, l_blocks):
        for m in range(m_max + 1):
            q = resolve_rel_qnums(j, l, m, charge, dc)
            ca = _rel_coeff(q, label_a)
            cb = _rel_coeff(q, label_b)
            e = e_energy(q, dc)
            w = 2.0 * dc.mass * (e + dc.mass)
            num += np.conj(ca) * cb * w
            na += abs(ca) ** 2 * w
            nb += abs(cb) ** 2 * w
    return complex(num / math.sqrt(na * nb))


def _take_l(j: int, vartheta: int, count: int):
    gen = _rel_l_values(j, vartheta)
    return [next(gen) for _ in range(count)]


@dataclass(frozen=True)
class Spinor4:
    """Four-component spinor: upper/lower Spinor2 blocks on one grid."""

    upper: Spinor2
    lower: Spinor2

    def scale(self, c: complex) -> "Spinor4":
        return Spinor4(upper=self.upper.scale(c), lower=self.lower.scale(c))


def d_inner4(a: Spinor4, b: Spinor4, dc: DiracConfig) -> complex:
    return d_inner(a.upper, b.upper, dc) + d_inner(a.lower, b.lower, dc)


def embed_3p1(j: int, l: int, m: int, charge: int, s: int, p3: float,
              dc: DiracConfig, grid: RadialGrid | None = None) -> Spinor4:
    """Stationary four-spinor with longitudinal momentum p3 and spin s.

    The construction substitutes the boosted mass Mt = sqrt(M^2 + p3^2)
    into the planar spinors and stacks

        upper = (p3 + s Mt + M) psi_charge(Mt),
        lower = (p3 + s Mt - M) sigma3 psi_{-charge}(Mt),

    both blocks sharing (j, l, m), then normalizes jointly (the overall
    1/M of the textbook factors is absorbed, so M = 0 is regular).  The
    energy is charge * sqrt(Mt^2 + E_perp^2).
    """
    if s not in (-1, 1):
        raise DomainError("spin label s must be +1 or -1")
    if grid is None:
        grid = make_radial_grid(rho_max=60.0)
    m_tilde = math.sqrt(dc.mass**2 + p3 * p3)
    dct = replace(dc, mass=m_tilde)
    q_up = resolve_rel_qnums(j, l, m, charge, dct)
    q_dn = resolve_rel_qnums(j, l, m, -charge, dct)
    psi_up, _ = dirac_spinor(q_up, dct, charge, grid)
    psi_dn, _ = dirac_spinor(q_dn, dct, -charge, grid)
    f_up = p3 + s * m_tilde + dc.mass
    f_dn = p3 + s * m_tilde - dc.mass
    four = Spinor4(upper=psi_up.scale(f_up), lower=psi_dn.sigma3().scale(f_dn))
    nrm = math.sqrt(max(d_inner4(four, four, dc).real, 0.0))
    if nrm == 0.0:
        raise SpectralBoundaryError("embedded spinor has zero norm")
    return four.scale(1.0 / nrm)


def h3p1_apply(psi: Spinor4, p3: float, dc: DiracConfig) -> Spinor4:
    """Hamiltonian in the longitudinally boosted block representation.

    H = diag( sigma.P + Mt sigma3,  sigma.P - Mt sigma3 ),
    Mt = sqrt(M^2 + p3^2).  In this representation the embedded states
    are exact eigenstates for every p3.
    """
    m_tilde = math.sqrt(dc.mass**2 + p3 * p3)
    dct = replace(dc, mass=m_tilde)
    up = hamiltonian_apply(psi.upper, dct)
    hp = apply_sigma_p(psi.lower, dct)
    low = Spinor2(grid=psi.lower.grid, l_up=psi.lower.l_up,
                  up=hp.up - m_tilde * psi.lower.up,
                  dn=hp.dn + m_tilde * psi.lower.dn)
    return Spinor4(upper=up, lower=low)


def sz_apply(psi: Spinor4, p3: float, dc: DiracConfig) -> Spinor4:
    """Spin operator (H Sigma_z + Sigma_z H) / (2 Mt c^2) on the grid.

    Sigma_z is the standard block-diagonal spin matrix diag(s3, s3).
    The embedded states are exact eigenstates at p3 = 0; at p3 != 0 the
    eigenvalue property depends on the (unspecified) spin-matrix
    convention and is not asserted.
    """
    m_tilde = math.sqrt(dc.mass**2 + p3 * p3)
    sig = Spinor4(upper=psi.upper.sigma3(), lower=psi.lower.sigma3())
    a = h3p1_apply(sig, p3, dc)
    hb = h3p1_apply(psi, p3, dc)
    b = Spinor4(upper=hb.upper.sigma3(), lower=hb.lower.sigma3())
    return Spinor4(
        upper=Spinor2(grid=psi.upper.grid, l_up=psi.upper.l_up,
                      up=(a.upper.up + b.upper.up) / (2 * m_tilde),
                      dn=(a.upper.dn + b.upper.dn) / (2 * m_tilde)),
        lower=Spinor2(grid=psi.lower.grid, l_up=psi.lower.l_up,
                      up=(a.lower.up + b.lower.up) / (2 * m_tilde),
                      dn=(a.lower.dn + b.lower.dn) / (2 * m_tilde)),
    )


def xi_flip(s: Spinor2) -> Spinor2:
    """Map to the opposite polarization sector: psi -> sigma2 psi.

    Relates the two inequivalent planar representations; exposed as a
    transformation on outputs only.
    """
    return Spinor2(grid=s.grid, l_up=s.l_up, up=-1j * s.dn, dn=1j * s.up)


def _rel_bessel_index(sigma: int, l: int, mu: float, vartheta: int) -> float:
    if l != 0:
        l_s = l - (1 + sigma) // 2
        return abs(l_s + mu)
    if vartheta == 1:
        return (1 + sigma) / 2.0 - mu
    return mu - (1 + sigma) / 2.0


def green_kernel_rel(sigma: int, l: int, dc: DiracConfig, s: complex,
                     dtheta: float, dt: float, rho: float, rho_p: float) -> np.ndarray:
    """Proper-time kernel block f_{sigma,l}(x, x', s), a 2x2 matrix.

    f = A B Xi_sigma with

      A = gamma / (8 pi^{3/2} s^{1/2} sin(gamma s))
          * exp{ i pi/4 - i M^2 s + i (l_s - l0) dtheta
                 - i (l_s + sigma + mu) gamma s
                 - i (dt)^2 / (4 s) + (i/2)(rho + rho') cot(gamma s) }
      B = I_nu( e^{-i pi/2} sqrt(rho rho') / sin(gamma s) )

    and nu = |l_s + mu| for l != 0; in the l = 0 channel the order is
    (1+sigma)/2 - mu for vartheta = +1 and its negative for
    vartheta = -1 (the irregular channel).  Xi_sigma = (1 + sigma s3)/2.
    Wick-rotated s = -i tau is evaluated on a stable real path.  Raises
    near the singular real points s_k = k pi / gamma.
    """
    from .specfun import bessel_i

    if sigma not in (-1, 1):
        raise DomainError("sigma must be +1 or -1")
    g = dc.field.gamma
    mu = dc.field.mu
    sc = complex(s)
    l_s = l - (1 + sigma) // 2
    nu = _rel_bessel_index(sigma, l, mu, dc.vartheta)
    proj = np.zeros((2, 2), dtype=complex)
    if sigma == 1:
        proj[0, 0] = 1.0
    else:
        proj[1, 1] = 1.0
    phase = cmath.exp(1j * (l_s - dc.field.l0) * dtheta
                      - 1j * dc.mass**2 * sc
                      - 1j * (l_s + sigma + mu) * g * sc)
    if sc.real == 0.0 and sc.imag < 0.0:
        tau = -sc.imag
        sh = math.sinh(g * tau)
        zarg = math.sqrt(rho * rho_p) / sh
        # i pi/4 phase, sqrt(-i tau) and 1/(-i sinh) combine to -1/(sqrt(tau) sinh)
        ln_mag = -0.5 * (rho + rho_p) * math.cosh(g * tau) / sh + zarg
        scaled = bessel_i(nu, zarg, scaled=True)
        radial = math.exp(ln_mag + math.log(scaled)) / sh if scaled > 0 else 0.0
        amp = -(g / (8.0 * math.pi**1.5 * math.sqrt(tau))) * radial
        tpart = cmath.exp(-1j * dt * dt / (4.0 * sc))
        return amp * phase * tpart * proj
    sin_gs = cmath.sin(g * sc)
    if abs(sin_gs) < 1e-12:
        raise DomainError("kernel singular: sin(gamma s) vanishes")
    zarg = cmath.exp(-0.5j * math.pi) * cmath.sqrt(rho * rho_p) / sin_gs
    a = (g / (8.0 * math.pi**1.5 * cmath.sqrt(sc) * sin_gs)) * cmath.exp(
        0.25j * math.pi
        - 1j * dt * dt / (4.0 * sc)
        + 0.5j * (rho + rho_p) * cmath.cos(g * sc) / sin_gs
    )
    return a * phase * bessel_i(nu, zarg) * proj
