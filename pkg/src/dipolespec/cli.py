"""Batch command-line front end.

Everything is seedless and deterministic: identical invocations produce
byte-identical primary output.  Numeric values print with 10 significant
digits.  Exit codes: 0 success, 2 input error (including unknown flags,
which argparse reports with usage text on stderr), 3 numerical failure as
defined by the operation contracts.

The default polar grid size is 10000 and can be overridden with the
DIPOLESPEC_GRID_M environment variable.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import angular, asymptotics, brezis_kato, hardy, radial
from .errors import InputError, NumericalError
from .exponents import sigma_pair

GRID_ENV = "DIPOLESPEC_GRID_M"


def fmt(x) -> str:
    """10-significant-digit rendering used for every number we print."""
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{float(x):.10g}"


def default_grid_size() -> int:
    raw = os.environ.get(GRID_ENV, "10000")
    try:
        return int(raw)
    except ValueError as exc:
        raise InputError(f"{GRID_ENV} must be an integer, got {raw!r}") from exc


@dataclass(frozen=True)
class RunConfig:
    """Parsed run parameters; rendering and reparsing round-trips."""

    dim: int = 3
    potential: str = "dipole:1.0"
    grid_m: int = 10000
    radial_points: int = 400
    radial_rmin: float = 1e-8
    output_format: str = "csv"
    output_path: str | None = None

    def render(self) -> str:
        return (
            f"dim={self.dim};potential={self.potential};grid={self.grid_m};"
            f"radial={self.radial_points},{fmt(self.radial_rmin)};"
            f"format={self.output_format};out={self.output_path or '-'}"
        )

    @classmethod
    def parse(cls, text: str) -> "RunConfig":
        fields = dict(part.split("=", 1) for part in text.split(";"))
        rp, rmin = fields["radial"].split(",")
        out = fields["out"]
        return cls(
            dim=int(fields["dim"]),
            potential=fields["potential"],
            grid_m=int(fields["grid"]),
            radial_points=int(rp),
            radial_rmin=float(rmin),
            output_format=fields["format"],
            output_path=None if out == "-" else out,
        )


def parse_potential(spec: str, grid: angular.PolarGrid) -> angular.AngularPotential:
    """'constant:K' | 'dipole:L' | 'table:PATH' (one sample per line)."""
    kind, _, arg = spec.partition(":")
    if kind == "constant":
        return angular.AngularPotential.constant(float(arg))
    if kind == "dipole":
        return angular.AngularPotential.dipole(float(arg))
    if kind == "table":
        try:
            values = np.loadtxt(arg, ndmin=1)
        except OSError as exc:
            raise InputError(f"cannot read potential table {arg!r}: {exc}") from exc
        return angular.AngularPotential.tabulated(values, grid)
    raise InputError(f"unknown potential spec {spec!r}")


def parse_perturbation(spec: str, N: int, sigma: float) -> radial.RadialPerturbation:
    """'zero' | 'power:C,EPS' | 'manufactured:BETA[,SIGMA]'."""
    kind, _, arg = spec.partition(":")
    if kind == "zero":
        return radial.RadialPerturbation.zero()
    if kind == "power":
        c, eps = (float(x) for x in arg.split(","))
        return radial.RadialPerturbation.power(c, eps)
    if kind == "manufactured":
        parts = arg.split(",")
        beta = float(parts[0])
        sig = float(parts[1]) if len(parts) > 1 else sigma
        return radial.RadialPerturbation.manufactured(beta, sig, N)
    raise InputError(f"unknown perturbation spec {spec!r}")


def parse_dims(spec: str):
    """Inclusive range syntax 'a..b' or a single dimension."""
    if ".." in spec:
        a, b = spec.split("..")
        lo, hi = int(a), int(b)
        if hi < lo:
            raise InputError(f"empty dimension range {spec!r}")
        return list(range(lo, hi + 1))
    return [int(spec)]


def _emit(lines: list[str], path: str | None) -> None:
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _emit_doc(doc: dict, header: str, rows: list, args) -> None:
    if args.format == "json":
        _emit([json.dumps(doc, indent=2, sort_keys=True)], args.out)
    else:
        _emit([header] + [",".join(fmt(v) for v in row) for row in rows], args.out)


def cmd_spectrum(args) -> int:
    grid = angular.PolarGrid.build(args.dim, args.grid)
    potential = parse_potential(args.potential, grid)
    spec = angular.full_spectrum(args.dim, potential, args.count, grid, args.sampling)
    flat = spec.flattened()[: args.count]
    rows = [(k + 1, mu) for k, mu in enumerate(flat)]
    results = {
        "eigenvalues": [float(v) for v in flat],
        "mu_1": spec.mu_1,
        "weyl": None,
        "sup_ratio": None,
    }
    if flat.size >= 100:
        try:
            wf = angular.weyl_fit(spec)
            results["weyl"] = {
                "exponent": wf.exponent,
                "constant": wf.constant,
                "max_rel_residual": wf.max_rel_residual,
            }
        except NumericalError:
            pass
    try:
        results["sup_ratio"] = angular.eigenfunction_sup_ratio(spec)
    except InputError:
        pass
    doc = {
        "command": "spectrum",
        "inputs": {"dim": args.dim, "potential": args.potential,
                   "grid": args.grid, "count": args.count, "sampling": args.sampling},
        "results": results,
    }
    _emit_doc(doc, "k,mu", rows, args)
    return 0


def cmd_hardy(args) -> int:
    if args.table is not None:
        return _hardy_table(args)
    grid = angular.PolarGrid.build(args.dim, args.grid)
    potential = parse_potential(args.potential, grid)
    res = hardy.lambda_n(args.dim, potential, grid, args.sampling)
    doc = {
        "command": "hardy",
        "inputs": {"dim": args.dim, "potential": args.potential,
                   "grid": args.grid, "sampling": args.sampling},
        "results": {
            "lambda_n": res.lambda_n,
            "critical_coupling": res.critical_coupling,
            "maximizer_tower": res.maximizer_tower,
            "nonpositive": res.nonpositive,
        },
    }
    rows = [(res.lambda_n, res.critical_coupling, res.maximizer_tower)]
    _emit_doc(doc, "lambda_n,critical_coupling,maximizer_tower", rows, args)
    return 0


def _hardy_table(args) -> int:
    dims = parse_dims(args.table)
    methods = ["pencil", "bisection"] if args.method == "both" else [args.method]
    rows = []
    for N in dims:  # buffered, deterministic row order
        grid = angular.PolarGrid.build(N, args.grid)
        for method in methods:
            lam_star = hardy.critical_dipole_coupling(N, grid, method, args.sampling)
            rows.append((N, (N - 2) ** 2 / 4.0, lam_star, method, args.grid))
    doc = {
        "command": "hardy-table",
        "inputs": {"dims": args.table, "grid": args.grid,
                   "method": args.method, "sampling": args.sampling},
        "results": {
            "rows": [
                {"N": r[0], "classical": r[1], "dipole_inverse_lambda": r[2],
                 "method": r[3], "grid": r[4]}
                for r in rows
            ]
        },
    }
    _emit_doc(doc, "N,classical,dipole_inverse_lambda,method,grid", rows, args)
    return 0


def cmd_sigma(args) -> int:
    exps = sigma_pair(args.dim, args.mu)
    doc = {
        "command": "sigma",
        "inputs": {"dim": args.dim, "mu": args.mu},
        "results": {
            "sigma_plus": exps.sigma_plus,
            "sigma_minus": exps.sigma_minus,
            "discriminant": exps.discriminant,
            "degenerate": exps.degenerate,
        },
    }
    if args.format == "json":
        _emit([json.dumps(doc, indent=2, sort_keys=True)], args.out)
    else:
        _emit([f"{fmt(exps.sigma_plus)}, {fmt(exps.sigma_minus)}"], args.out)
    return 0


def cmd_radial(args) -> int:
    exps = sigma_pair(args.dim, args.mu)
    pert = parse_perturbation(args.perturbation, args.dim, exps.sigma_plus)
    grid = radial.RadialGrid.geometric(args.points, args.rmin, 1.0)
    prof = radial.solve_mode_picard(args.dim, args.mu, pert, args.c1, grid, args.tol)
    est = radial.limit_coefficient(prof)
    scaled = prof.values / grid.points**exps.sigma_plus
    rows = list(zip(grid.points, prof.values, scaled))
    doc = {
        "command": "radial",
        "inputs": {"dim": args.dim, "mu": args.mu, "perturbation": args.perturbation,
                   "c1": args.c1, "points": args.points, "rmin": args.rmin},
        "results": {
            "limit_coefficient": est.value,
            "measured_limit": est.measured,
            "discrepancy": est.discrepancy,
            "c1_representation": prof.c1,
            "c2": prof.c2,
            "iterations": prof.iterations,
            "profile": [
                {"rho": float(r), "phi": float(p), "phi_over_rho_sigma": float(s)}
                for r, p, s in rows
            ],
        },
    }
    _emit_doc(doc, "rho,phi,phi_over_rho_sigma", rows, args)
    return 0


def _cauchy_scenario(args):
    grid = angular.PolarGrid.build(args.dim, args.grid)
    potential = parse_potential(args.potential, grid)
    spec = angular.full_spectrum(args.dim, potential, args.modes, grid)
    rgrid = radial.RadialGrid.geometric(args.points, args.rmin, 1.0)
    sig = sigma_pair(args.dim, spec.mu_1).sigma_plus
    if args.scenario == "manufactured-radial":
        pert = radial.RadialPerturbation.manufactured(args.beta, sig, args.dim)
        prof = radial.solve_mode_picard(args.dim, spec.mu_1, pert, 1.0, rgrid)
        field = asymptotics.synthesize_solution([(1, prof)], spec)
        return spec, field, None, None
    if args.scenario == "manufactured-nonradial":
        g = args.gscale * spec.axisymmetric_mode(2).psi(grid)
        field = asymptotics.manufactured_nonradial(args.dim, spec, args.eps, g, rgrid)
        return spec, field, None, None
    if args.scenario.startswith("mode:"):
        k = int(args.scenario.split(":", 1)[1])
        mode = spec.axisymmetric_mode(k)
        sk = sigma_pair(args.dim, mode.mu).sigma_plus
        pert = radial.RadialPerturbation.manufactured(args.beta, sk, args.dim)
        prof = radial.solve_mode_picard(args.dim, mode.mu, pert, 1.0, rgrid,
                                        mode_index=k)
        field = asymptotics.synthesize_solution([(k, prof)], spec)
        return spec, field, k, pert
    raise InputError(f"unknown scenario {args.scenario!r}")


def cmd_cauchy(args) -> int:
    radii = [float(x) for x in args.radii.split(",")]
    if not radii:
        raise InputError("need at least one radius")
    spec, field, mode_k, pert = _cauchy_scenario(args)
    values = []
    for r in radii:
        if mode_k is None:
            values.append(asymptotics.cauchy_functional(field, r))
        else:
            values.append(asymptotics.cauchy_coefficient_mode(field, pert, r, mode_k, spec))
    ref = values[0]
    spread = max(abs(v - ref) for v in values)
    rel_spread = spread / abs(ref) if ref != 0 else spread
    results = {
        "values": [float(v) for v in values],
        "spread": spread,
        "relative_spread": rel_spread,
        "limit_table": None,
    }
    table_rows = None
    if mode_k is None:
        table = asymptotics.measured_limit(field)
        table_rows = list(table.rows)
        results["limit_table"] = {
            "estimate": table.estimate,
            "rows": [{"rho": r, "estimate": c, "defect": d} for r, c, d in table.rows],
        }
    doc = {
        "command": "cauchy",
        "inputs": {"scenario": args.scenario, "radii": radii, "dim": args.dim,
                   "potential": args.potential},
        "results": results,
    }
    if args.limit_table:
        if table_rows is None:
            raise InputError("the convergence table applies to ground-mode scenarios")
        _emit_doc(doc, "rho,estimate,defect", table_rows, args)
    else:
        _emit_doc(doc, "R,value", list(zip(radii, values)), args)
    return 0


def cmd_sandwich(args) -> int:
    grid = angular.PolarGrid.build(args.dim, args.grid)
    potential = parse_potential(args.potential, grid)
    spec = angular.full_spectrum(args.dim, potential, args.modes, grid)
    rgrid = radial.RadialGrid.geometric(args.points, args.rmin, 1.0)
    g = args.gscale * spec.axisymmetric_mode(2).psi(grid)
    field = asymptotics.manufactured_nonradial(args.dim, spec, args.eps, g, rgrid)
    lam = hardy.lambda_n(args.dim, potential, grid).lambda_n
    r_adm = hardy.admissible_radius(args.dim, lam, field.q_bound, args.eps)
    r = args.radius_fraction * min(r_adm, rgrid.r_out)
    rep = asymptotics.sandwich_check(field, field.q_bound, args.eps, r, spec)
    doc = {
        "command": "sandwich",
        "inputs": {"dim": args.dim, "potential": args.potential, "eps": args.eps,
                   "gscale": args.gscale, "radius_fraction": args.radius_fraction},
        "results": {
            "ordered": rep.ordered,
            "max_lower_violation": rep.max_lower_violation,
            "max_upper_violation": rep.max_upper_violation,
            "slack": rep.slack,
            "trace_residual": rep.trace_residual,
            "power_lower": rep.power_lower,
            "power_upper": rep.power_upper,
            "radius": rep.radius,
            "admissible_radius": rep.admissible_radius,
            "modes_used": rep.modes_used,
        },
    }
    _emit([json.dumps(doc, indent=2, sort_keys=True)], args.out)
    return 0


def cmd_bk(args) -> int:
    params = brezis_kato.BKParameters(
        dim=args.dim, s=args.s, v_norm=args.vnorm, ckn_constant=args.ckn,
        dist=args.dist, diam=args.diam, sigma=args.sigma,
    )
    table = brezis_kato.iteration_constants(params, args.n, args.printed_variant)
    doc = {
        "command": "bk",
        "inputs": {"dim": args.dim, "s": args.s, "vnorm": args.vnorm,
                   "ckn": args.ckn, "dist": args.dist, "diam": args.diam,
                   "sigma": args.sigma, "n": args.n},
        "results": {
            "limit_constant": table.limit_constant,
            "sum_b": table.sum_b,
            "sum_inv_q": table.sum_inv_q,
            "sum_inv_q_closed": table.sum_inv_q_closed,
            "rows": [
                {"n": r[0], "q_n": r[1], "r_n": r[2], "b_n": r[3],
                 "partial_sum": r[4], "partial_product": r[5]}
                for r in table.rows
            ],
        },
    }
    _emit_doc(doc, "n,q_n,r_n,b_n,partial_sum,partial_product", list(table.rows), args)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dipolespec",
        description="Spectral quantities of anisotropic inverse-square "
        "Schrodinger operators: sphere eigenvalues, Hardy-type best "
        "constants, characteristic exponents, radial profiles and limit "
        "functionals.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, grid=True):
        p.add_argument("--dim", type=int, default=3)
        p.add_argument("--potential", default="dipole:1.0",
                       help="constant:K | dipole:L | table:PATH")
        if grid:
            p.add_argument("--grid", type=int, default=default_grid_size(),
                           help=f"polar grid size (default from ${GRID_ENV} or 10000)")
        p.add_argument("--format", choices=["csv", "json"], default="csv")
        p.add_argument("--out", default=None, help="output file (default stdout)")
        p.add_argument("--sampling", choices=["flux", "node"], default=None,
                       help="treatment of the singular polar coefficient "
                            "(default flux; hardy table defaults to node, the "
                            "convention of the reference table)")

    p = sub.add_parser("spectrum", help="sphere eigenvalues, counting fit, sup-norm ratio")
    common(p)
    p.add_argument("--count", type=int, default=20)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("hardy", help="best constant; 'table' mode sweeps dimensions")
    common(p)
    p.add_argument("--table", default=None, metavar="DIMS",
                   help="emit the critical-coupling table for dims 'a..b'")
    p.add_argument("--method", choices=["pencil", "bisection", "both"],
                   default="pencil")
    p.set_defaults(func=cmd_hardy)

    p = sub.add_parser("sigma", help="characteristic exponents for (dim, mu)")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sigma)

    p = sub.add_parser("radial", help="radial profile and limit coefficient")
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--perturbation", default="zero",
                   help="zero | power:C,EPS | manufactured:BETA[,SIGMA]")
    p.add_argument("--c1", type=float, default=1.0)
    p.add_argument("--points", type=int, default=400)
    p.add_argument("--rmin", type=float, default=1e-8)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_radial)

    p = sub.add_parser("cauchy", help="limit-functional independence of the radius")
    common(p)
    p.add_argument("--scenario", required=True,
                   help="manufactured-radial | manufactured-nonradial | mode:K")
    p.add_argument("--radii", default="0.3,0.6,0.9")
    p.add_argument("--modes", type=int, default=40)
    p.add_argument("--points", type=int, default=400)
    p.add_argument("--rmin", type=float, default=1e-8)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--gscale", type=float, default=0.2)
    p.add_argument("--limit-table", action="store_true",
                   help="emit the small-radius convergence table "
                        "(rho, estimate, defect) instead of the R sweep")
    p.set_defaults(func=cmd_cauchy)

    p = sub.add_parser("sandwich", help="sub/supersolution trapping report (json)")
    common(p)
    p.add_argument("--modes", type=int, default=80)
    p.add_argument("--points", type=int, default=400)
    p.add_argument("--rmin", type=float, default=1e-8)
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--gscale", type=float, default=0.2)
    p.add_argument("--radius-fraction", type=float, default=0.5)
    p.set_defaults(func=cmd_sandwich)

    p = sub.add_parser("bk", help="bootstrap constants table")
    p.add_argument("--dim", type=int, default=4)
    p.add_argument("--s", type=float, default=3.0)
    p.add_argument("--vnorm", type=float, default=1.0)
    p.add_argument("--ckn", type=float, default=1.0)
    p.add_argument("--dist", type=float, default=1.0)
    p.add_argument("--diam", type=float, default=2.0)
    p.add_argument("--sigma", type=float, default=0.5)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--printed-variant", action="store_true",
                   help="use the 1/2 prefactor exponent sequence")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bk)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "sampling", "flux") is None:
        table_mode = args.command == "hardy" and args.table is not None
        args.sampling = "node" if table_mode else "flux"
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
