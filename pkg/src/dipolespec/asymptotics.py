"""Axisymmetric solution fields on the punctured ball and their limit functionals.

Fields are sampled on the product of a polar grid (angular) and a geometric
radial grid.  Two constructions are provided: mode sums u = sum phi_k psi_k
with a common radial perturbation, and the manufactured nonradial family
u = rho^sigma psi_1 (1 + rho^eps g) whose compatible perturbation
q = -(Delta u + a rho^{-2} u)/u is assembled from the discrete angular
operator, with the radial powers handled analytically.  Everything the
limit functionals need about the source is rank-structured: a known
power of rho times a bounded factor, so the power-law quadrature of the
radial module applies columnwise and the discrete identities (value 1,
independence of the evaluation radius) hold to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import hardy
from .angular import AngularSpectrum, assemble_polar_operator
from .errors import InputError, NumericalError, ResolutionError
from .exponents import sigma_pair
from .radial import (
    RadialGrid,
    RadialPerturbation,
    _power_cell_weights,
    solve_mode_bvp,
)


def _cumulative_power_2d(rho: np.ndarray, alpha: float, data: np.ndarray) -> np.ndarray:
    """Columnwise cumulative int_0^{rho_j} s^alpha data(s, t_i) ds."""
    from .errors import DivergentIntegralError

    if alpha + 1.0 <= 0:
        raise DivergentIntegralError(f"power s^{alpha} is not integrable at zero")
    wl, wr = _power_cell_weights(rho, alpha)
    out = np.empty_like(data)
    out[0] = rho[0] ** (alpha + 1) / (alpha + 1) * data[0]
    cells = wl[:, None] * data[:-1] + wr[:, None] * data[1:]
    out[1:] = out[0] + np.cumsum(cells, axis=0)
    return out


@dataclass(frozen=True)
class SolutionField:
    """Samples u(rho_j, t_i) with the source F of -Delta u = a rho^{-2} u + F."""

    spectrum: AngularSpectrum
    radial: RadialGrid
    u: np.ndarray = field(repr=False)
    source: np.ndarray = field(repr=False)
    sigma: float = 0.0
    source_power: float = 0.0     # F / rho^{source_power} stays bounded at zero
    tag: str = "mode-sum"
    defect_power: float | None = None
    eps: float | None = None
    q_bound: float | None = None  # sup of |q| rho^{2-eps} for manufactured fields
    g: np.ndarray | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.spectrum.grid.dim

    def psi_1(self) -> np.ndarray:
        return self.spectrum.psi_1.psi(self.spectrum.grid)


def synthesize_solution(modes, spectrum: AngularSpectrum) -> SolutionField:
    """Mode sum u = sum_k phi_k psi_k over the m = 0 tower.

    All profiles must share one radial grid and one perturbation; the source
    is then F = h u.  The Parseval identity between sum_k phi_k(rho)^2 and
    the angular quadrature of u(rho, .)^2 holds to rounding because the
    discrete modes are orthonormal in exactly that quadrature.
    """
    if not modes:
        raise InputError("need at least one mode")
    grid = spectrum.grid
    rgrid = modes[0][1].grid
    h = modes[0][1].perturbation
    u = np.zeros((rgrid.size, grid.size))
    lead = math.inf
    for k, prof in modes:
        if prof.grid is not rgrid and not np.array_equal(prof.grid.points, rgrid.points):
            raise InputError("all modes must share the radial grid")
        if prof.perturbation is not h and prof.perturbation != h:
            raise InputError("all modes must share the radial perturbation")
        psi_k = spectrum.axisymmetric_mode(k).psi(grid)
        u += np.outer(prof.values, psi_k)
        lead = min(lead, prof.exponents.sigma_plus)
    hvals = h.values(rgrid.points)
    F = hvals[:, None] * u
    sig = sigma_pair(grid.dim, spectrum.mu_1).sigma_plus
    exps = sorted(sigma_pair(grid.dim, spectrum.axisymmetric_mode(k).mu).sigma_plus
                  for k, _ in modes)
    defect = exps[1] - exps[0] if len(exps) > 1 else None
    return SolutionField(
        spectrum=spectrum, radial=rgrid, u=u, source=F, sigma=sig,
        source_power=lead + h.singular_power, tag="mode-sum",
        defect_power=defect,
    )


def parseval_residual(field: SolutionField, modes) -> float:
    """Max over radii of |sum_k phi_k^2 - angular quadrature of u^2|."""
    grid = field.spectrum.grid
    sq = sum(prof.values**2 for _, prof in modes)
    quad = np.array([grid.integrate(row**2) for row in field.u])
    return float(np.max(np.abs(sq - quad)))


def manufactured_nonradial(
    N: int,
    spectrum: AngularSpectrum,
    eps: float,
    g: np.ndarray,
    grid: RadialGrid,
) -> SolutionField:
    """u = rho^sigma psi_1(t) (1 + rho^eps g(t)) with its compatible source.

    The perturbation q = -(Delta u + a rho^{-2} u)/u is exactly
    -rho^{eps-2} W / (psi_1 (1 + rho^eps g)) with the angular vector
    W = (eps(eps + 2 sigma + N - 2) + mu_1) psi_1 g - L[psi_1 g], where L is
    the discrete angular operator of the spectrum.  The ground-mode part of
    u annihilates identically, so q = O(rho^{eps-2}) with the verified bound
    stored as q_bound; in particular g = 0 gives q = 0 exactly.
    """
    if eps <= 0:
        raise InputError(f"eps must be positive, got {eps}")
    pgrid = spectrum.grid
    if pgrid.dim != N:
        raise InputError("spectrum dimension mismatch")
    g = np.asarray(g, dtype=float)
    if g.shape != pgrid.nodes.shape:
        raise InputError("g must be sampled on the polar grid nodes")
    rho = grid.points
    mu1 = spectrum.mu_1
    sig = sigma_pair(N, mu1).sigma_plus
    gap = sigma_pair(N, mu1).gap
    psi1 = spectrum.psi_1.psi(pgrid)

    angular_factor = 1.0 + rho[:, None] ** eps * g[None, :]
    if np.min(angular_factor) <= 0.0:
        raise InputError(
            "1 + rho^eps g changes sign on the sampled set; scale g down"
        )
    u = rho[:, None] ** sig * psi1[None, :] * angular_factor

    # discrete angular operator applied to G = psi_1 g, in psi coordinates
    mat = assemble_polar_operator(N, spectrum.potential, 0, pgrid, spectrum.sampling)
    half_weight = np.sqrt(pgrid.weights)
    G = psi1 * g
    LG = mat.matvec(G * half_weight) / half_weight
    W = (eps * (eps + gap) + mu1) * G - LG

    F = -(rho[:, None] ** (sig + eps - 2.0)) * W[None, :]
    q_scaled = np.abs(W[None, :] / (psi1[None, :] * angular_factor))
    return SolutionField(
        spectrum=spectrum, radial=grid, u=u, source=F, sigma=sig,
        source_power=sig + eps - 2.0, tag="manufactured-nonradial",
        defect_power=eps, eps=eps, q_bound=float(np.max(q_scaled)), g=g,
    )


def cauchy_functional(
    field: SolutionField,
    R: float,
    sigma: float | None = None,
    psi_1: np.ndarray | None = None,
) -> float:
    """Limit functional of u/(rho^sigma psi_1) evaluated from data at radius R.

    Quadrature of

      int_S [ R^{-sigma} u(R theta)
              + int_0^R s^{1-sigma} F /(2 sigma + N - 2) ds
              - R^{-2 sigma-N+2} int_0^R s^{N-1+sigma} F /(2 sigma + N - 2) ds
            ] psi_1 dV,

    independent of R for solution/source pairs of the perturbed problem.
    """
    grid = field.spectrum.grid
    N = grid.dim
    sig = field.sigma if sigma is None else sigma
    psi1 = field.psi_1() if psi_1 is None else psi_1
    gap = 2.0 * sig + N - 2.0
    if gap <= 0:
        raise InputError("2 sigma + N - 2 must be positive")
    rho = field.radial.points
    j = field.radial.nearest_index(R)
    r = rho[j]
    data = field.source / rho[:, None] ** field.source_power
    I1 = _cumulative_power_2d(rho, 1.0 - sig + field.source_power, data)[j]
    I2 = _cumulative_power_2d(rho, N - 1.0 + sig + field.source_power, data)[j]
    bracket = r ** (-sig) * field.u[j] + I1 / gap - r ** (-gap) * I2 / gap
    return float(grid.integrate(bracket * psi1))


def cauchy_coefficient_mode(
    field: SolutionField,
    h: RadialPerturbation,
    r: float,
    k: int,
    spectrum: AngularSpectrum,
) -> float:
    """Mode-k limit coefficient for sign-changing fields with radial h.

    Same bracket as the ground functional but built from the k-th
    axisymmetric mode's exponents and eigenfunction:

      int_S [ r^{-s_k^+} u + int_0^r s^{1-s_k^+} h u ds / (s_k^+ - s_k^-)
              - r^{s_k^- - s_k^+} int_0^r s^{1-s_k^-} h u ds / (s_k^+ - s_k^-)
            ] psi_k dV.
    """
    grid = spectrum.grid
    mode = spectrum.axisymmetric_mode(k)
    exps = sigma_pair(grid.dim, mode.mu)
    rho = field.radial.points
    j = field.radial.nearest_index(r)
    rs = rho[j]
    data = field.source / rho[:, None] ** field.source_power
    Ip = _cumulative_power_2d(rho, 1.0 - exps.sigma_plus + field.source_power, data)[j]
    Im = _cumulative_power_2d(rho, 1.0 - exps.sigma_minus + field.source_power, data)[j]
    bracket = (
        rs ** (-exps.sigma_plus) * field.u[j]
        + Ip / exps.gap
        - rs ** (exps.sigma_minus - exps.sigma_plus) * Im / exps.gap
    )
    return float(grid.integrate(bracket * mode.psi(grid)))


@dataclass(frozen=True)
class LimitTable:
    estimate: float
    rows: tuple  # (rho, angular average, uniformity defect), smallest radius first


def measured_limit(field: SolutionField) -> LimitTable:
    """Limit of u/(rho^sigma psi_1) measured at the three smallest radii.

    Each row carries the spherical average of the ratio and the sup deviation
    from it; the averages are Richardson-extrapolated to rho = 0 with the
    field's known defect power when available.
    """
    grid = field.spectrum.grid
    psi1 = field.psi_1()
    rho = field.radial.points[:3]
    if np.any(psi1 <= 0):
        raise NumericalError("ground-mode samples must be positive")
    if np.any(field.u[:3] <= 0):
        raise NumericalError("field is not positive near the origin")
    rows = []
    cs = []
    for j in range(3):
        ratio = field.u[j] / (rho[j] ** field.sigma * psi1)
        c = grid.average(ratio)
        rows.append((float(rho[j]), float(c), float(np.max(np.abs(ratio - c)))))
        cs.append(c)
    if field.defect_power is not None:
        q = (rho[1] / rho[0]) ** field.defect_power
        estimate = cs[0] - (cs[1] - cs[0]) / (q - 1.0)
    else:
        d1, d2 = cs[1] - cs[0], cs[2] - cs[1]
        if abs(d2) > 1e-300 and 0 < d1 / d2 < 1:
            estimate = cs[0] - d1 * (d1 / d2) / (1.0 - d1 / d2)
        else:
            estimate = cs[0]
    return LimitTable(estimate=float(estimate), rows=tuple(rows))


@dataclass(frozen=True)
class SandwichReport:
    ordered: bool
    max_lower_violation: float
    max_upper_violation: float
    slack: float
    collapse_gap: float | None     # sup |upper - lower| when the bound is zero
    power_lower: float             # min over samples of lower / rho^sigma
    power_upper: float             # max over samples of upper / rho^sigma
    trace_residual: float
    radius: float
    admissible_radius: float
    modes_used: int


def sandwich_check(
    field: SolutionField,
    c_bound: float,
    eps: float,
    r: float,
    spectrum: AngularSpectrum,
    n_modes: int = 16,
    tol: float = 1e-10,
) -> SandwichReport:
    """Trap a manufactured field between radial sub/supersolutions.

    The boundary trace at radius r is expanded over the m = 0 tower; each
    coefficient is propagated inward with perturbation -c_bound s^{eps-2}
    (subsolution) and +c_bound s^{eps-2} (supersolution).  The field must
    sit between the two reconstructions at every common sample, up to
    1e-6 absolute plus five times the worst per-mode solver residual.
    Requires r at most the admissible radius of the coercivity gate.
    """
    if field.tag != "manufactured-nonradial":
        raise InputError("sandwich check expects a manufactured nonradial field")
    grid = spectrum.grid
    N = grid.dim
    lam = hardy.lambda_n(N, spectrum.potential, grid, spectrum.sampling).lambda_n
    r_adm = hardy.admissible_radius(N, lam, c_bound, eps)
    if r > r_adm:
        raise InputError(
            f"radius {r} exceeds the admissible radius {r_adm:.6g} of the "
            "coercivity gate"
        )
    j = field.radial.nearest_index(r)
    r_snap = field.radial.points[j]
    sub_grid = field.radial.restricted(r_snap)
    trace = field.u[j]

    tower = spectrum.tower(0)
    n_modes = min(n_modes, len(tower))
    coeffs = []
    recon = np.zeros_like(trace)
    for k in range(1, n_modes + 1):
        psi_k = spectrum.axisymmetric_mode(k).psi(grid)
        c_k = grid.integrate(trace * psi_k)
        coeffs.append(c_k)
        recon += c_k * psi_k
    trace_residual = float(np.max(np.abs(trace - recon)))
    if trace_residual > 5e-7:
        raise ResolutionError(
            f"boundary trace truncation {trace_residual:.2e} is too coarse "
            "for the comparison; provide a spectrum with more axisymmetric "
            "modes"
        )

    h_lo = RadialPerturbation.power(-c_bound, eps) if c_bound else RadialPerturbation.zero()
    h_hi = RadialPerturbation.power(+c_bound, eps) if c_bound else RadialPerturbation.zero()
    lower = np.zeros((sub_grid.size, grid.size))
    upper = np.zeros((sub_grid.size, grid.size))
    worst_residual = 0.0
    for k, c_k in enumerate(coeffs, start=1):
        mode = spectrum.axisymmetric_mode(k)
        psi_k = mode.psi(grid)
        for h, target in ((h_lo, lower), (h_hi, upper)):
            prof = solve_mode_bvp(N, mode.mu, h, c_k, sub_grid, tol, mode_index=k)
            target += np.outer(prof.values, psi_k)
            worst_residual = max(worst_residual, prof.residual)

    slack = 1e-6 + 5.0 * worst_residual
    u_cut = field.u[: sub_grid.size]
    low_viol = float(np.max(lower - u_cut))
    up_viol = float(np.max(u_cut - upper))
    rho_scale = sub_grid.points[:, None] ** field.sigma
    report = SandwichReport(
        ordered=(low_viol <= slack) and (up_viol <= slack),
        max_lower_violation=low_viol,
        max_upper_violation=up_viol,
        slack=slack,
        collapse_gap=float(np.max(np.abs(upper - lower))) if c_bound == 0 else None,
        power_lower=float(np.min(lower / rho_scale)),
        power_upper=float(np.max(upper / rho_scale)),
        trace_residual=trace_residual,
        radius=r_snap,
        admissible_radius=r_adm,
        modes_used=n_modes,
    )
    return report
