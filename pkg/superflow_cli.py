#!/usr/bin/env python3
"""
Superflow command-line front end

Each subcommand runs library operations and prints one JSON report with
per-check outcomes. Exit codes: 0 success, 1 a check failed or a
numerical failure stopped the run, 2 usage or input error.
"""

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
import sympy

from closedform import DIXON_FIELD, OCTA_FIELD, SERIES_ORDER, TETRA_FIELD, THEOREMS, verify_theorem
from config_manager import RunConfig, RunConfigManager
from elliptic import d5_constants, d5_context, dixon_period, weierstrass_context
from exactalg import VectorField, parse_poly
from firstint import derivative_along, first_integral_counts, polynomial_first_integrals, q_field
from flows import (
    RESIDUAL_FREE,
    TRIG_FIELDS,
    beltrami_probe,
    integrate_orbit,
    pde_residual,
    planar_projection,
    ray_series,
    semigroup_check,
    taylor_general,
    taylor_projective,
    write_planar_csv,
    write_trace_csv,
)
from groups import parse_group_spec
from hyperoct import (
    RESIDUAL_TOLERANCE,
    XiVector,
    admissibility_check,
    compare_d5_transcription,
    discriminant_polynomial,
    discriminant_reduction,
    genus2_identities,
    hyperoct_summary,
    singular_factor_check,
    triple_reduction_integrate,
    weighted_degrees,
    write_reduction_csv,
    xi_from_point,
)
from reynolds import (
    DIM_FAMILIES,
    closed_form_dims,
    find_superflow,
    invariant_vf_basis,
    solenoidal_and_sphere_dims,
)
from spherical import extremal_ratio_2_4, octa_sphere_field, spherical_constants
from superflow_logging import (
    OperationContext,
    get_component_logger,
    log_check,
    setup_detailed_logging,
    warn_if_tight,
)

logger = get_component_logger("CLI")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2

SEMIGROUP_TOLERANCE = 1e-8
BELTRAMI_TOLERANCE = 1e-12

PRESET_FIELDS: Dict[str, Callable[[], VectorField]] = {
    "tetra": lambda: TETRA_FIELD,
    "octa": lambda: OCTA_FIELD,
    "dixon": lambda: DIXON_FIELD,
    "octa_sphere": octa_sphere_field,
    "jouanolou": lambda: VectorField.from_texts(["y^2", "z^2", "x^2"]),
    "q3": lambda: q_field(3),
}

# family -> (group, index into (total, solenoidal, sphere-tangent, both))
DIM_SOURCES = {
    "tetra_full": ("tetrahedral", 0),
    "tetra_full_solenoidal": ("tetrahedral", 1),
    "octa": ("octahedral", 0),
    "octa_sphere": ("octahedral", 2),
    "octa_solenoidal_sphere": ("octahedral", 3),
}

PUBLISHED_CONSTANTS = {
    "Omega": (1.7162590512, 1e-8),
    "Xi": (2.4439543584, 1e-8),
    "omega": (2.1131881555, 1e-9),
}

EXTREMAL_REFERENCES = {"max": 4.0, "min": 1.455668946}
EXTREMAL_TOLERANCE = 1e-6


# ----------------------------------------------------------------------
# report

@dataclass
class Check:
    name: str
    passed: bool
    measured: Any
    reference: Any = None
    provenance: str = "computed"
    tolerance: Any = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "status": "PASS" if self.passed else "FAIL",
            "measured": self.measured,
            "reference": self.reference,
            "provenance": self.provenance,
            "tolerance": self.tolerance,
        }


@dataclass
class Report:
    command: List[str]
    result: Dict[str, Any] = field(default_factory=dict)
    checks: List[Check] = field(default_factory=list)
    artifacts: List[str] = field(default_factory=list)
    wall_time: Optional[float] = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add_check(self, name: str, passed: bool, measured: Any, reference: Any = None,
                  provenance: str = "computed", tolerance: Any = None) -> Check:
        check = Check(name, bool(passed), measured, reference, provenance, tolerance)
        self.checks.append(check)
        log_check(logger, name, check.passed, measured, reference, tolerance)
        if (check.passed and isinstance(measured, float) and isinstance(tolerance, float)
                and isinstance(reference, (int, float))):
            warn_if_tight(logger, name, abs(measured - reference), tolerance)
        return check

    def to_dict(self) -> Dict[str, Any]:
        payload = {
            "schema": 1,
            "command": list(self.command),
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
            "artifacts": list(self.artifacts),
            "result": self.result,
        }
        if self.wall_time is not None:
            payload["wall_time"] = self.wall_time
        return payload

    def to_json(self) -> str:
        return json.dumps(_jsonable(self.to_dict()), indent=2, sort_keys=True)


def _jsonable(value: Any) -> Any:
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, Fraction):
        return str(value) if value.denominator != 1 else value.numerator
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(f"{float(value):.17g}")
    if isinstance(value, complex):
        return [float(f"{value.real:.17g}"), float(f"{value.imag:.17g}")]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set)):
        items = sorted(value, key=str) if isinstance(value, set) else value
        return [_jsonable(v) for v in items]
    if isinstance(value, sympy.Basic):
        return str(value)
    return str(value)


# ----------------------------------------------------------------------
# argument helpers

def _parse_number(text: str) -> Any:
    text = text.strip()
    try:
        return Fraction(text)
    except ValueError:
        return float(text)


def _parse_numbers(text: str) -> List[Any]:
    try:
        return [_parse_number(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ValueError(f"expected comma-separated numbers, got {text!r}") from None


def _parse_floats(text: str) -> List[float]:
    return [float(v) for v in _parse_numbers(text)]


def _field_from_args(args: argparse.Namespace) -> VectorField:
    if getattr(args, "components", None):
        names = args.names.split(",") if args.names else None
        return VectorField.from_texts(args.components, names, args.denominator)
    preset = args.field or "tetra"
    if preset not in PRESET_FIELDS:
        raise ValueError(f"unknown field preset: {preset}; choose from {', '.join(PRESET_FIELDS)}")
    return PRESET_FIELDS[preset]()


def _field_label(args: argparse.Namespace) -> str:
    if getattr(args, "components", None):
        return "custom"
    return args.field or "tetra"


def _artifact_path(config: RunConfig, name: str) -> Path:
    path = Path(config.output_dir) / name
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _xi_from_args(args: argparse.Namespace) -> Optional[XiVector]:
    if args.xi:
        return admissibility_check(XiVector(args.n, tuple(_parse_numbers(args.xi))))
    if args.point:
        return admissibility_check(xi_from_point(_parse_numbers(args.point)))
    return None


# ----------------------------------------------------------------------
# subcommands

def cmd_find(args: argparse.Namespace, config: RunConfig, report: Report):
    group = parse_group_spec(args.group)
    found = find_superflow(group, args.mode, args.max_degree, args.include_odd)
    report.result = found.to_dict()
    if args.expect_degree is not None:
        report.add_check("superflow_degree", found.unique and found.degree == args.expect_degree,
                         found.degree, args.expect_degree, "published", 0)


def cmd_dims(args: argparse.Namespace, config: RunConfig, report: Report):
    if args.family not in DIM_FAMILIES:
        raise ValueError(f"unknown family: {args.family}; choose from {', '.join(DIM_FAMILIES)}")
    degrees = list(range(2, args.max + 1, 2))
    rows = [{"degree": d, "closed_form": closed_form_dims(args.family, d)} for d in degrees]

    if args.compute:
        group_name, index = DIM_SOURCES[args.family]
        group = parse_group_spec(group_name)
        for row in rows:
            d = row["degree"]
            dim = invariant_vf_basis(group, d).dim
            row["computed"] = dim if index == 0 else solenoidal_and_sphere_dims(group, d)[index - 1]
        mismatched = [r["degree"] for r in rows if r["computed"] != r["closed_form"]]
        report.add_check(f"{args.family}_dims", not mismatched, mismatched, [], "published", 0)

    frame = pd.DataFrame(rows)
    if args.csv:
        path = _artifact_path(config, args.csv)
        frame.to_csv(path, index=False)
        report.artifacts.append(str(path))
    report.result = {"family": args.family, "table": rows}


def cmd_integrals(args: argparse.Namespace, config: RunConfig, report: Report):
    vf = _field_from_args(args)
    result: Dict[str, Any] = {"field": vf.to_json(), "preset": _field_label(args)}
    failures = 0
    if args.degree:
        basis = polynomial_first_integrals(vf, args.degree)
        result["degree"] = args.degree
        result["basis"] = [p.to_text() for p in basis.basis]
        failures = sum(not derivative_along(p, vf.numerators).is_zero for p in basis.basis)
    else:
        counts = first_integral_counts(vf, args.max_degree)
        result["counts"] = counts
        if args.expect_none:
            report.add_check("no_polynomial_integrals", all(v == 0 for v in counts.values()),
                             sum(counts.values()), 0, "published", 0)
    report.add_check("integrals_annihilated", failures == 0, failures, 0, "derived", 0)
    report.result = result


def cmd_taylor(args: argparse.Namespace, config: RunConfig, report: Report):
    vf = _field_from_args(args)
    if args.order > config.max_order:
        raise ValueError(f"order {args.order} exceeds max_order {config.max_order}")
    result: Dict[str, Any] = {"field": vf.to_json(), "order": args.order}
    if args.ray:
        exprs = [sympy.nsimplify(sympy.sympify(t)) for t in args.ray.split(",")]
        surd = any(not e.is_Rational for e in exprs)
        start = exprs if surd else [Fraction(int(e.p), int(e.q)) for e in exprs]
        coeffs = ray_series(vf, start, args.order, exact_surds=surd)
        result["ray"] = [str(e) for e in exprs]
        result["coefficients"] = [[str(c) for c in comp] for comp in coeffs]
    elif args.kind == "general":
        series = taylor_general(vf, args.order)
        result["series"] = json.loads(series.to_json())
    else:
        series = taylor_projective(vf, args.order)
        result["series"] = json.loads(series.to_json())
        lowest = pde_residual(series, vf)
        report.add_check("pde_residual", lowest > args.order,
                         None if lowest == RESIDUAL_FREE else lowest,
                         f"> {args.order}", "derived", 0)
    report.result = result


def cmd_orbit(args: argparse.Namespace, config: RunConfig, report: Report):
    vf = _field_from_args(args)
    names = args.names.split(",") if args.names else None
    monitors = [parse_poly(t, names) if names else parse_poly(t) for t in args.monitor or []]
    x0 = _parse_floats(args.x0)
    trace = integrate_orbit(vf, x0, args.t_end, config.rtol, monitors=monitors, reverse=args.reverse)
    for name, drift in trace.integral_drift.items():
        report.add_check(f"drift[{name}]", drift < config.tau_v, drift, 0.0, "derived", config.tau_v)
    if args.semigroup:
        s, t = _parse_floats(args.semigroup)
        deviation = semigroup_check(vf, x0, s, t, config.rtol)
        report.add_check("semigroup", deviation < SEMIGROUP_TOLERANCE, deviation, 0.0,
                         "derived", SEMIGROUP_TOLERANCE)
    if args.csv:
        path = _artifact_path(config, args.csv)
        write_trace_csv(trace, str(path), names)
        report.artifacts.append(str(path))
    report.result = {
        "field": vf.to_json(),
        "x0": x0,
        "t_end": args.t_end,
        "reverse": args.reverse,
        "final_state": trace.final_state,
        "accepted_steps": trace.accepted,
        "rejected_steps": trace.rejected,
        "integral_drift": trace.integral_drift,
    }


def cmd_project(args: argparse.Namespace, config: RunConfig, report: Report):
    vf = _field_from_args(args)
    values = _parse_floats(args.grid)
    if len(values) != 5:
        raise ValueError("grid needs alpha_min,alpha_max,beta_min,beta_max,resolution")
    grid = (values[0], values[1], values[2], values[3], int(values[4]))
    planar = planar_projection(vf, args.mode, grid)
    if planar.closed_form_error is not None:
        report.add_check(f"{args.mode}_closed_form", planar.closed_form_error < config.tau_v,
                         planar.closed_form_error, 0.0, "derived", config.tau_v)
    if args.csv:
        path = _artifact_path(config, args.csv)
        write_planar_csv(planar, str(path))
        report.artifacts.append(str(path))
    report.result = {
        "field": vf.to_json(),
        "mode": args.mode,
        "samples": int(len(planar.samples)),
        "closed_form": None if planar.closed_form is None else [str(e) for e in planar.closed_form],
        "closed_form_error": planar.closed_form_error,
    }


def _published(report: Report, name: str, value: float):
    reference, tolerance = PUBLISHED_CONSTANTS[name]
    report.add_check(name, abs(value - reference) < tolerance, value, reference, "published", tolerance)


def cmd_constants(args: argparse.Namespace, config: RunConfig, report: Report):
    kinds = ["spherical", "d5", "weierstrass", "dixon"] if args.kind == "all" else [args.kind]
    result: Dict[str, Any] = {}
    if "spherical" in kinds:
        vf = _field_from_args(args) if (args.field or args.components) else octa_sphere_field()
        constants = spherical_constants(vf, radius=args.radius, order=args.quadrature_order,
                                        threads=config.threads)
        chain = constants.Omega0 < constants.Omega1 < 1 < constants.OmegaInf
        report.add_check("cauchy_schwarz_chain", chain,
                         [constants.Omega0, constants.Omega1, constants.OmegaInf], None, "derived")
        result["spherical"] = constants.to_dict()
    if "d5" in kinds:
        values = d5_constants(d5_context(config.quadrature_target))
        _published(report, "Omega", values["Omega"])
        _published(report, "Xi", values["Xi"])
        result["d5"] = values
    if "weierstrass" in kinds:
        ctx = weierstrass_context()
        _published(report, "omega", ctx.omega)
        result["weierstrass"] = {"g2": ctx.g2, "g3": ctx.g3, "omega": ctx.omega, "e1": ctx.e1}
    if "dixon" in kinds:
        result["dixon"] = {"period": dixon_period()}
    report.result = result


def _verify_one(name: str, order: int) -> Dict[str, Any]:
    with OperationContext(f"verify_{name}", "CLI", logger, log_start=False):
        return verify_theorem(name, order).to_dict()


def cmd_verify(args: argparse.Namespace, config: RunConfig, report: Report):
    result: Dict[str, Any] = {}
    if args.theorem:
        names = list(THEOREMS) if args.theorem == "all" else [args.theorem]
        # map keeps submission order regardless of completion order
        with ThreadPoolExecutor(max_workers=max(1, min(config.threads, len(names)))) as pool:
            outcomes = list(pool.map(lambda n: _verify_one(n, args.order), names))
        for name, outcome in zip(names, outcomes):
            report.add_check(f"{name}_series", outcome["passed"], outcome["max_mismatch"], 0,
                             "published", outcome["tolerance"])
        result["theorems"] = dict(zip(names, outcomes))
    if args.probe:
        probe = beltrami_probe(args.probe, args.points, config.seed)
        if args.probe == "T_tetra":
            worst = max(probe["max_div"], probe["max_curl_minus_field"])
            report.add_check("beltrami_T_tetra", worst < BELTRAMI_TOLERANCE, worst, 0.0,
                             "derived", BELTRAMI_TOLERANCE)
        elif args.probe == "D_dihedral":
            report.add_check("helmholtz_D_dihedral", probe["max_helmholtz"] < BELTRAMI_TOLERANCE,
                             probe["max_helmholtz"], 0.0, "derived", BELTRAMI_TOLERANCE)
        result["probe"] = probe
    if not result:
        raise ValueError("verify needs --theorem or --probe")
    report.result = result


def cmd_hyperoct(args: argparse.Namespace, config: RunConfig, report: Report):
    n = args.n
    task = args.task
    if task == "summary":
        summary = hyperoct_summary(n)
        report.add_check("solenoidal", summary["solenoidal"], summary["solenoidal"], True, "published")
        report.add_check("power_sum_integrals", summary["power_sum_integrals"],
                         summary["power_sum_integrals"], True, "published")
        report.result = summary
    elif task == "admissible":
        xi = _xi_from_args(args)
        if xi is None:
            raise ValueError("admissible needs --xi or --point")
        report.result = xi.to_dict()
    elif task == "discriminant":
        xi = _xi_from_args(args)
        if xi is None:
            poly = discriminant_polynomial(n)
            weights = weighted_degrees(poly, tuple(range(1, n + 1)))
            report.add_check("weighted_homogeneous", weights == {n * n}, weights, n * n, "derived", 0)
            report.result = {"n": n, "D": poly.to_text()}
        else:
            reduced = discriminant_reduction(n, xi)
            report.result = {"n": n, "xi": xi.to_dict(), "D": reduced.to_text(),
                             "coefficients": reduced.coeffs}
    elif task == "transcription":
        mismatches = compare_d5_transcription()
        report.result = {"mismatches": mismatches, "count": len(mismatches)}
    elif task == "singular":
        found = singular_factor_check(_parse_number(args.q))
        report.add_check("double_factor", found.has_double_factor, found.has_double_factor,
                         True, "published")
        report.result = found.to_dict()
    elif task == "genus2":
        identities = genus2_identities()
        for name, ok in identities.items():
            report.add_check(f"genus2_{name}", ok, ok, True, "published")
        report.result = identities
    elif task == "reduce":
        xi = _xi_from_args(args) if args.xi else None
        point = _parse_numbers(args.point) if args.point else None
        run = triple_reduction_integrate(n, xi, args.t_end, rtol=config.rtol, point=point,
                                         samples=args.samples)
        worst = max(run.max_residuals.values())
        report.add_check("reduction_residuals", run.passed(RESIDUAL_TOLERANCE), worst, 0.0,
                         "derived", RESIDUAL_TOLERANCE)
        if args.csv:
            path = _artifact_path(config, args.csv)
            write_reduction_csv(run, str(path))
            report.artifacts.append(str(path))
        report.result = run.to_dict()
    else:
        raise ValueError(f"unknown hyperoct task: {task}")


def cmd_extremal(args: argparse.Namespace, config: RunConfig, report: Report):
    modes = ["max", "min"] if args.mode == "both" else [args.mode]
    result = {}
    for mode in modes:
        found = extremal_ratio_2_4(mode, seed=config.seed, threads=config.threads)
        reference = EXTREMAL_REFERENCES[mode]
        report.add_check(f"extremal_{mode}", abs(found.value - reference) < EXTREMAL_TOLERANCE,
                         found.value, reference, "published", EXTREMAL_TOLERANCE)
        report.add_check(f"stationary_{mode}", found.stationary, found.certificate, 0.0, "derived")
        result[mode] = found.to_dict()
    report.result = result


def cmd_config(args: argparse.Namespace, config: RunConfig, report: Report):
    manager = RunConfigManager(args.config)
    if args.init:
        report.result["created"] = manager.create_default_config(args.force)
    report.result["summary"] = manager.get_configuration_summary()
    report.result["effective"] = config.to_dict()


COMMANDS = {
    "find": cmd_find,
    "dims": cmd_dims,
    "integrals": cmd_integrals,
    "taylor": cmd_taylor,
    "orbit": cmd_orbit,
    "project": cmd_project,
    "constants": cmd_constants,
    "verify": cmd_verify,
    "hyperoct": cmd_hyperoct,
    "extremal": cmd_extremal,
    "config": cmd_config,
}


# ----------------------------------------------------------------------
# parser

def _add_field_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--field", choices=sorted(PRESET_FIELDS), help="Preset vector field")
    parser.add_argument("--components", nargs="+", help="Component polynomials, e.g. 'y*z' 'x*z' 'x*y'")
    parser.add_argument("--denominator", help="Shared denominator polynomial")
    parser.add_argument("--names", help="Comma-separated variable names")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="superflow", description="Superflow discovery and verification")
    parser.add_argument("--seed", type=int, help="Seed for randomized checks")
    parser.add_argument("--log-dir", help="Write rotating main/debug/error logs here")
    parser.add_argument("--verbose", "-v", action="count", default=0, help="More console logging")
    parser.add_argument("--config", help="Directory holding superflow_config.json")
    parser.add_argument("--output", help="Write the JSON report to this file instead of stdout")
    parser.add_argument("--timing", action="store_true", help="Include wall time in the report")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("find", help="Lowest-degree invariant vector field of a group")
    p.add_argument("--group", required=True, help="Group name, e.g. octahedral or hyperoct:5")
    p.add_argument("--mode", choices=("polynomial", "projective"), default="polynomial")
    p.add_argument("--max-degree", type=int, default=16)
    p.add_argument("--include-odd", action="store_true")
    p.add_argument("--expect-degree", type=int)

    p = sub.add_parser("dims", help="Invariant field dimension tables")
    p.add_argument("--family", required=True, choices=DIM_FAMILIES)
    p.add_argument("--max", type=int, default=16)
    p.add_argument("--compute", action="store_true", help="Cross-check against computed dimensions")
    p.add_argument("--csv", help="CSV file name under the output directory")

    p = sub.add_parser("integrals", help="Polynomial first integrals")
    _add_field_arguments(p)
    p.add_argument("--degree", type=int)
    p.add_argument("--max-degree", type=int, default=8)
    p.add_argument("--expect-none", action="store_true")

    p = sub.add_parser("taylor", help="Exact Taylor coefficients of a flow")
    _add_field_arguments(p)
    p.add_argument("--order", type=int, default=8)
    p.add_argument("--ray", help="Comma-separated direction, e.g. 'sqrt(2),1,0'")
    p.add_argument("--kind", choices=("projective", "general"), default="projective")

    p = sub.add_parser("orbit", help="Integrate an orbit")
    _add_field_arguments(p)
    p.add_argument("--x0", required=True)
    p.add_argument("--t-end", type=float, default=10.0)
    p.add_argument("--reverse", action="store_true")
    p.add_argument("--monitor", action="append", help="First integral to monitor (repeatable)")
    p.add_argument("--semigroup", help="s,t for the semigroup check")
    p.add_argument("--csv", help="CSV file name under the output directory")

    p = sub.add_parser("project", help="Planar projection of a tangent field")
    _add_field_arguments(p)
    p.add_argument("--mode", choices=("stereographic", "orthogonal"), default="stereographic")
    p.add_argument("--grid", default="-2,2,-2,2,21")
    p.add_argument("--csv", help="CSV file name under the output directory")

    p = sub.add_parser("constants", help="Special-function and spherical constants")
    _add_field_arguments(p)
    p.add_argument("--kind", choices=("spherical", "d5", "weierstrass", "dixon", "all"), default="all")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--quadrature-order", type=int, default=6)

    p = sub.add_parser("verify", help="Closed forms against exact series, Beltrami probes")
    p.add_argument("--theorem", choices=tuple(THEOREMS) + ("all",))
    p.add_argument("--order", type=int, default=SERIES_ORDER)
    p.add_argument("--probe", choices=TRIG_FIELDS)
    p.add_argument("--points", type=int, default=1000)

    p = sub.add_parser("hyperoct", help="Hyperoctahedral fields and the triple reduction")
    p.add_argument("--task", choices=("summary", "admissible", "discriminant", "transcription",
                                      "singular", "genus2", "reduce"), default="summary")
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--xi", help="Comma-separated xi_1..xi_{n-1}")
    p.add_argument("--point", help="Comma-separated seed point")
    p.add_argument("--q", default="3")
    p.add_argument("--t-end", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=201)
    p.add_argument("--csv", help="CSV file name under the output directory")

    p = sub.add_parser("extremal", help="Extremal circle ratio of cubic forms")
    p.add_argument("--mode", choices=("min", "max", "both"), default="both")

    p = sub.add_parser("config", help="Show or initialise superflow_config.json")
    p.add_argument("--init", action="store_true")
    p.add_argument("--force", action="store_true")

    return parser


# ----------------------------------------------------------------------
# entry point

def _console_level(verbose: int) -> int:
    return {0: logging.WARNING, 1: logging.INFO}.get(verbose, logging.DEBUG)


def _emit(report: Report, output: Optional[str]):
    text = report.to_json() + "\n"
    if output:
        path = Path(output)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    else:
        sys.stdout.write(text)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse argv, run one subcommand and return the process exit code"""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    setup_detailed_logging(args.log_dir, _console_level(args.verbose))

    try:
        config = RunConfigManager(args.config).resolve({"seed": args.seed})
    except ValueError as e:
        logger.error(f"Invalid configuration: {e}")
        print(f"superflow: {e}", file=sys.stderr)
        return EXIT_USAGE

    report = Report(command=argv)
    try:
        with OperationContext(args.command, "CLI", logger) as ctx:
            COMMANDS[args.command](args, config, report)
    except ValueError as e:
        print(f"superflow: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, RuntimeError) as e:
        report.add_check(args.command, False, f"{type(e).__name__}: {e}")
        _emit(report, args.output)
        return EXIT_CHECK_FAILED

    if args.timing:
        report.wall_time = ctx.duration
    _emit(report, args.output)
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
