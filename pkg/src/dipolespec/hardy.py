"""Best constant of the Hardy-type inequality and the critical dipole coupling.

The best constant Lambda_N(a) is the largest eigenvalue of the matrix pencil
B w = Lambda A w per azimuthal tower, maximized over towers, where A
discretizes the denominator form int(|w'|^2 + [(N-2)(N-4)/4 + nu_m] w^2 /
sin^2) of the reduced one-dimensional characterization (the ((N-2)/2)^2 mass
term of the spherical form is absorbed exactly by the w-transform) and
B = diag(a(t_i)).

Two independent routes to the critical dipole coupling are provided: the
reciprocal of the pencil value at unit coupling, and monotone bisection on
the coupling for the first sphere eigenvalue crossing -((N-2)/2)^2.  At the
discrete level both characterize the same singularity of A - lambda B, so
they agree to solver tolerance on a common grid.

Deterministic throughout: the pencil is solved by Lanczos iteration on
L^{-1} B L^{-T} (A = L L^T banded Cholesky) started from the normalized
all-ones vector with full reorthogonalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import (
    cholesky_banded,
    eigvalsh_tridiagonal,
    solve_banded,
)

from .angular import (
    AngularPotential,
    PolarGrid,
    TridiagonalMatrix,
    assemble_polar_operator,
)
from .errors import BracketError, EigenSolveError, IndefiniteFormError, InputError

_LANCZOS_CAP = 500
_LANCZOS_TOL = 1e-13


def _denominator_matrix(N, m, grid, sampling) -> TridiagonalMatrix:
    """A = (discrete tower operator at a = 0) + ((N-2)/2)^2 I."""
    zero = AngularPotential.constant(0.0)
    return assemble_polar_operator(N, zero, m, grid, sampling).shifted(((N - 2) / 2.0) ** 2)


class _PencilOperator:
    """y -> L^{-1} B L^{-T} y for A = U^T U (banded upper Cholesky)."""

    def __init__(self, A: TridiagonalMatrix, b_diag: np.ndarray):
        ab = np.zeros((2, A.size))
        ab[0, 1:] = A.off
        ab[1, :] = A.diag
        try:
            self.U = cholesky_banded(ab, lower=False)
        except np.linalg.LinAlgError as exc:
            raise IndefiniteFormError(
                "denominator form is numerically indefinite at this grid "
                "resolution; refine the polar grid"
            ) from exc
        self.UT = np.vstack([self.U[1], np.append(self.U[0][1:], 0.0)])
        self.b = b_diag
        self.size = A.size

    def __call__(self, y: np.ndarray) -> np.ndarray:
        x = solve_banded((0, 1), self.U, y)        # L^{-T} y = U^{-1} y
        x = self.b * x
        return solve_banded((1, 0), self.UT, x)    # L^{-1} x = U^{-T} x


def _lanczos_largest(op, n: int, tol=_LANCZOS_TOL, cap=_LANCZOS_CAP):
    """Largest eigenvalue and Ritz vector; deterministic all-ones start."""
    q = np.ones(n) / math.sqrt(n)
    basis = [q]
    alphas: list[float] = []
    betas: list[float] = []
    prev = math.inf
    for _ in range(cap):
        v = op(basis[-1])
        alpha = float(basis[-1] @ v)
        alphas.append(alpha)
        v = v - alpha * basis[-1]
        if len(basis) > 1:
            v = v - betas[-1] * basis[-2]
        for qq in basis:  # full reorthogonalization keeps the run reproducible
            v -= (qq @ v) * qq
        d = np.array(alphas)
        e = np.array(betas)
        if d.size == 1:
            ritz = d[0]
        else:
            ritz = eigvalsh_tridiagonal(d, e, select="i", select_range=(d.size - 1, d.size - 1))[0]
        beta = float(np.linalg.norm(v))
        if abs(ritz - prev) <= tol * max(1.0, abs(ritz)) or beta < 1e-14:
            from scipy.linalg import eigh_tridiagonal

            if d.size == 1:
                y = np.array([1.0])
            else:
                _, vec = eigh_tridiagonal(d, e, select="i", select_range=(d.size - 1, d.size - 1))
                y = vec[:, 0]
            ritz_vec = np.zeros(n)
            for coef, qq in zip(y, basis):
                ritz_vec += coef * qq
            return float(ritz), ritz_vec
        prev = ritz
        betas.append(beta)
        basis.append(v / beta)
    raise EigenSolveError(f"Lanczos did not converge within {cap} iterations")


@dataclass(frozen=True)
class HardyResult:
    lambda_n: float
    critical_coupling: float | None
    maximizer: np.ndarray
    maximizer_tower: int
    method: str
    grid_size: int
    nonpositive: bool = False
    richardson: float | None = None


def lambda_n(
    N: int,
    potential: AngularPotential,
    grid: PolarGrid,
    sampling: str = "flux",
    towers: int = 4,
    richardson: bool = False,
) -> HardyResult:
    """Best constant Lambda_N(a), maximized over the first `towers` azimuthal towers.

    For potentials with ess sup <= 0 the computed maximum is still returned,
    flagged `nonpositive` (the constant is then <= 0 and the inequality
    carries no content).  The dipole maximizer is axisymmetric, but the tower
    scan removes that assumption for tabulated potentials.
    """
    a_samples = potential.sample(grid)
    best = -math.inf
    best_vec = None
    best_m = 0
    for m in range(max(1, towers)):
        A = _denominator_matrix(N, m, grid, sampling)
        op = _PencilOperator(A, a_samples)
        val, y = _lanczos_largest(op, A.size)
        if val > best:
            best, best_m = val, m
            # pencil eigenvector in w coordinates: w = L^{-T} y
            best_vec = solve_banded((0, 1), op.U, y)
    psi = best_vec / np.sin(grid.nodes) ** ((N - 2) / 2.0)
    norm = math.sqrt(grid.integrate(psi**2)) if best_m == 0 else float(np.linalg.norm(psi))
    psi = psi / norm
    rich = None
    if richardson:
        half = PolarGrid.build(N, grid.size // 2)
        coarse = lambda_n(N, potential, half, sampling, towers, richardson=False)
        rich = best + (best - coarse.lambda_n) / 3.0  # second-order extrapolation
    lam_crit = None
    if potential.kind == "dipole" and best > 0:
        lam_crit = potential.coupling / best
    return HardyResult(
        lambda_n=best,
        critical_coupling=lam_crit,
        maximizer=psi,
        maximizer_tower=best_m,
        method="pencil",
        grid_size=grid.size,
        nonpositive=potential.ess_sup <= 0,
        richardson=rich,
    )


def _mu1_m0(N, potential, grid, sampling) -> float:
    mat = assemble_polar_operator(N, potential, 0, grid, sampling)
    return float(
        eigvalsh_tridiagonal(mat.diag, mat.off, select="i", select_range=(0, 0))[0]
    )


def critical_dipole_coupling(
    N: int,
    grid: PolarGrid,
    method: str = "pencil",
    sampling: str = "flux",
    tol: float = 1e-8,
) -> float:
    """Coupling lambda* at which the dipole quadratic form loses positivity.

    pencil: reciprocal of Lambda_N(cos).  bisection: the lambda solving
    mu_1(lambda cos) = -((N-2)/2)^2; mu_1 is nonincreasing in lambda and
    always comes from the m = 0 tower (higher towers sit above it by at
    least nu_m), so plain bisection on [0, 4(N-2)^2] applies, with geometric
    expansion of the bracket on failure.
    """
    if N < 3:
        raise InputError(f"dimension must be >= 3, got {N}")
    if method == "pencil":
        res = lambda_n(N, AngularPotential.dipole(1.0), grid, sampling)
        if res.lambda_n <= 0:
            raise EigenSolveError("pencil returned a nonpositive best constant")
        return 1.0 / res.lambda_n
    if method != "bisection":
        raise InputError(f"unknown method {method!r}")
    target = -(((N - 2) / 2.0) ** 2)
    lo, hi = 0.0, 4.0 * (N - 2) ** 2
    for _ in range(8):
        if _mu1_m0(N, AngularPotential.dipole(hi), grid, sampling) < target:
            break
        hi *= 2.0
    else:
        raise BracketError(
            f"mu_1 stayed above the threshold on [0, {hi}]; no crossing found"
        )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _mu1_m0(N, AngularPotential.dipole(mid), grid, sampling) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class PositivityReport:
    lambda_n: float
    mu_1: float
    lambda_lt_1: bool | None
    mu1_gt_threshold: bool | None
    consistent: bool | None
    lambda_margin: float
    mu1_margin: float
    indeterminate: bool


def positivity_equivalences(
    N: int,
    potential: AngularPotential,
    grid: PolarGrid,
    sampling: str = "flux",
) -> PositivityReport:
    """Check Lambda_N(a) < 1  <=>  mu_1 > -((N-2)/2)^2 on one grid.

    Values within 1e-9 of either threshold yield the indeterminate flag
    instead of booleans.
    """
    lam = lambda_n(N, potential, grid, sampling).lambda_n
    mu1 = _mu1_m0(N, potential, grid, sampling)
    threshold = -(((N - 2) / 2.0) ** 2)
    lam_margin = 1.0 - lam
    mu_margin = mu1 - threshold
    if abs(lam_margin) < 1e-9 or abs(mu_margin) < 1e-9:
        return PositivityReport(
            lambda_n=lam, mu_1=mu1, lambda_lt_1=None, mu1_gt_threshold=None,
            consistent=None, lambda_margin=lam_margin, mu1_margin=mu_margin,
            indeterminate=True,
        )
    lam_ok = lam < 1.0
    mu_ok = mu1 > threshold
    return PositivityReport(
        lambda_n=lam, mu_1=mu1, lambda_lt_1=lam_ok, mu1_gt_threshold=mu_ok,
        consistent=lam_ok == mu_ok, lambda_margin=lam_margin, mu1_margin=mu_margin,
        indeterminate=False,
    )


def admissible_radius(N: int, lam: float, C: float, eps: float) -> float:
    """Largest ball radius on which the perturbed form stays coercive.

    r_max = [ (N-2)^2 (1 - Lambda) / (4 C^+) ]^{1/eps} for C > 0, +inf for
    C <= 0.
    """
    if eps <= 0:
        raise InputError(f"eps must be positive, got {eps}")
    if lam >= 1.0:
        raise InputError(
            f"operator not positive: Lambda = {lam} >= 1"
        )
    if C <= 0:
        return math.inf
    return ((N - 2) ** 2 * (1.0 - lam) / (4.0 * C)) ** (1.0 / eps)
