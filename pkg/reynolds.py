#!/usr/bin/env python3
"""
Invariant Vector Fields and Superflow Discovery

Group averaging of polynomial vector fields, exact bases of invariant
fields and forms, the superflow search in polynomial and projective mode,
closed-form dimension families and the dihedral superflow fields.
"""

import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from exactalg import (
    Exponent,
    MPoly,
    VectorField,
    compose_linear,
    divergence,
    monomials_of_degree,
    radial_pairing,
    rank,
    rref,
    nullspace,
)
from groups import (
    FiniteGroup,
    apply_signed_permutation,
    invariant_form_rows,
    rows_to_polys,
)
from superflow_logging import get_component_logger

logger = get_component_logger("REYNOLDS")

Coordinate = Tuple[int, Exponent]

VERIFY_TOLERANCE = 1e-9
VERIFY_SAMPLES = 20


class NoInvariantFieldError(RuntimeError):
    """Raised when no invariant field exists up to the scanned degree"""

    def __init__(self, message: str, reason: str = "none_found"):
        super().__init__(message)
        self.reason = reason


@dataclass
class VFSpace:
    group: FiniteGroup
    degree: int
    basis: List[VectorField]
    coordinates: List[Coordinate] = field(repr=False, default_factory=list)

    @property
    def dim(self) -> int:
        return len(self.basis)


@dataclass
class SuperflowReport:
    group: str
    mode: str
    degree: Optional[int]
    dim: int
    vector_field: Optional[VectorField] = None
    denominator: Optional[MPoly] = None
    solenoidal: Optional[bool] = None
    sphere_tangent: Optional[bool] = None
    form_dim: Optional[int] = None
    failure: Optional[str] = None
    basis: List[VectorField] = field(default_factory=list)

    @property
    def unique(self) -> bool:
        return self.dim == 1 and self.vector_field is not None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema": 1,
            "group": self.group,
            "mode": self.mode,
            "degree": self.degree,
            "dim": self.dim,
            "unique": self.unique,
            "field": self.vector_field.to_json() if self.vector_field is not None else None,
            "denominator": self.denominator.to_text() if self.denominator is not None else None,
            "solenoidal": self.solenoidal,
            "sphere_tangent": self.sphere_tangent,
            "form_dim": self.form_dim,
            "failure": self.failure,
            "basis": [b.to_json() for b in self.basis],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


# ----------------------------------------------------------------------
# projection

def vf_coordinates(n: int, degree: int) -> List[Coordinate]:
    """Coordinates (component, monomial) ordered by component, then grlex"""
    monos = monomials_of_degree(n, degree)
    return [(i, m) for i in range(n) for m in monos]


def _transform(numerators: Sequence[MPoly], g_rows: List[List[Any]],
               inv_rows: List[List[Any]]) -> List[MPoly]:
    n = len(numerators)
    moved = [compose_linear(p, g_rows) for p in numerators]
    out = []
    for i in range(n):
        acc = MPoly.zero(n)
        for j in range(n):
            if inv_rows[i][j]:
                acc = acc + moved[j] * inv_rows[i][j]
        out.append(acc)
    return out


def reynolds_project(group: FiniteGroup, field_in: VectorField) -> VectorField:
    """
    Average g^-1 V(g x) over the group

    Raises:
        ApproxGroupError: float group
        ValueError: non-polynomial or inhomogeneous field
    """
    group.require_exact("reynolds_project")
    if not field_in.is_polynomial():
        raise ValueError("reynolds_project takes polynomial fields")
    comps = field_in.polynomial_components()
    if not field_in.is_zero() and field_in.degree() is None:
        raise ValueError("reynolds_project takes homogeneous fields")
    n = field_in.nvars
    if field_in.is_zero():
        return VectorField([MPoly.zero(n) for _ in range(n)])
    totals = [MPoly.zero(n) for _ in range(n)]
    for g in group.elements:
        image = _transform(comps, g.rows(), g.inverse().rows())
        totals = [a + b for a, b in zip(totals, image)]
    return VectorField([p / group.order for p in totals])


def _rows_to_fields(n: int, coords: Sequence[Coordinate],
                    rows: Sequence[Dict[int, Fraction]]) -> List[VectorField]:
    fields = []
    for row in rows:
        comps: List[Dict[Exponent, Fraction]] = [{} for _ in range(n)]
        for idx, c in row.items():
            i, e = coords[idx]
            comps[i][e] = c
        fields.append(VectorField([MPoly(n, t) for t in comps]))
    return fields


def _orbit_basis(group: FiniteGroup, degree: int) -> Tuple[List[Coordinate], List[Dict[int, Fraction]]]:
    """Orbit sums over (component, monomial) coordinates for signed-permutation groups"""
    n = group.dim
    coords = vf_coordinates(n, degree)
    position = {c: k for k, c in enumerate(coords)}
    actions = group.signed_permutations(generators_only=True)
    visited = set()
    rows: List[Dict[int, Fraction]] = []
    for start in coords:
        if start in visited:
            continue
        signs_of: Dict[Coordinate, int] = {start: 1}
        queue = deque([start])
        vanishes = False
        while queue:
            i, a = queue.popleft()
            for perm, signs in actions:
                image, s = apply_signed_permutation(a, perm, signs)
                target = (perm[i], image)
                total = signs[i] * s * signs_of[(i, a)]
                known = signs_of.get(target)
                if known is None:
                    signs_of[target] = total
                    queue.append(target)
                elif known != total:
                    vanishes = True
        visited.update(signs_of)
        if vanishes:
            continue
        lead = min(signs_of, key=lambda c: position[c])
        lead_sign = signs_of[lead]
        rows.append({position[c]: Fraction(s * lead_sign) for c, s in signs_of.items()})
    rows.sort(key=lambda r: min(r))
    return coords, rows


def _averaged_basis(group: FiniteGroup, degree: int) -> Tuple[List[Coordinate], List[Dict[int, Fraction]]]:
    n = group.dim
    coords = vf_coordinates(n, degree)
    position = {c: k for k, c in enumerate(coords)}
    monos = monomials_of_degree(n, degree)
    elements = [(g.rows(), g.inverse().rows()) for g in group.elements]
    images: Dict[Exponent, List[MPoly]] = {
        m: [compose_linear(MPoly.monomial(m), g_rows) for g_rows, _ in elements] for m in monos
    }
    dense = []
    for i, m in coords:
        acc: Dict[int, Fraction] = {}
        for (_, inv_rows), moved in zip(elements, images[m]):
            for j in range(n):
                w = inv_rows[j][i]
                if not w:
                    continue
                for e, c in moved.terms.items():
                    k = position[(j, e)]
                    acc[k] = acc.get(k, 0) + w * c
        row = [Fraction(0)] * len(coords)
        for k, v in acc.items():
            row[k] = v / group.order
        dense.append(row)
    reduced, _ = rref(dense)
    return coords, [{k: v for k, v in enumerate(r) if v != 0} for r in reduced]


def invariant_vf_basis(group: FiniteGroup, degree: int) -> VFSpace:
    """
    Exact basis of degree-l invariant polynomial vector fields

    Basis rows are in reduced echelon form over (component, monomial)
    coordinates, components first and monomials in grlex order.
    """
    group.require_exact("invariant_vf_basis")
    if degree < 1:
        raise ValueError("field degree must be at least 1")
    if group.signed_permutations(generators_only=True) is not None:
        coords, rows = _orbit_basis(group, degree)
    else:
        coords, rows = _averaged_basis(group, degree)
    basis = _rows_to_fields(group.dim, coords, rows)
    logger.debug(f"{group.name} degree {degree}: invariant field dim {len(basis)}")
    return VFSpace(group, degree, basis, coords)


def invariant_form_basis(group: FiniteGroup, degree: int) -> List[MPoly]:
    monos, rows = invariant_form_rows(group, degree)
    return rows_to_polys(group.dim, monos, rows)


# ----------------------------------------------------------------------
# divergence and sphere-tangency restrictions

def _poly_vector(p: MPoly, monos: Sequence[Exponent]) -> List[Fraction]:
    return [p.coefficient(m) for m in monos]


def _restriction_rows(space: VFSpace) -> Tuple[List[List[Fraction]], List[List[Fraction]]]:
    n = space.group.dim
    div_monos = monomials_of_degree(n, space.degree - 1)
    rad_monos = monomials_of_degree(n, space.degree + 1)
    div_rows, rad_rows = [], []
    for b in space.basis:
        div_rows.append(_poly_vector(divergence(b).num, div_monos))
        rad_rows.append(_poly_vector(radial_pairing(b), rad_monos))
    return div_rows, rad_rows


def solenoidal_and_sphere_dims(group: FiniteGroup, degree: int) -> Tuple[int, int, int]:
    """(dim solenoidal, dim sphere-tangent, dim both) inside the invariant space"""
    space = invariant_vf_basis(group, degree)
    m = space.dim
    if m == 0:
        return 0, 0, 0
    div_rows, rad_rows = _restriction_rows(space)
    both = [d + r for d, r in zip(div_rows, rad_rows)]
    # rank of the map = rank of its transpose; rows here are images of basis fields
    return m - rank(div_rows), m - rank(rad_rows), m - rank(both)


def _kernel_fields(space: VFSpace, rows: List[List[Fraction]]) -> List[VectorField]:
    columns = [list(col) for col in zip(*rows)] if rows and rows[0] else []
    if not columns:
        kernel = [[Fraction(int(i == j)) for j in range(space.dim)] for i in range(space.dim)]
    else:
        kernel = nullspace(columns)
    out = []
    for vec in kernel:
        acc = VectorField.zero(space.group.dim)
        for c, b in zip(vec, space.basis):
            if c:
                acc = acc + b.scale(c)
        out.append(acc)
    return out


def solenoidal_members(space: VFSpace) -> List[VectorField]:
    """Basis of the divergence-free subspace"""
    div_rows, _ = _restriction_rows(space)
    return _kernel_fields(space, div_rows)


def sphere_tangent_members(space: VFSpace) -> List[VectorField]:
    _, rad_rows = _restriction_rows(space)
    return _kernel_fields(space, rad_rows)


# ----------------------------------------------------------------------
# discovery

def _flags(field_out: VectorField) -> Tuple[bool, bool]:
    return divergence(field_out).is_zero, radial_pairing(field_out).is_zero


def find_superflow(group: FiniteGroup, mode: str = "polynomial", max_degree: int = 16,
                   include_odd: bool = False) -> SuperflowReport:
    """
    Scan degrees for the lowest invariant vector field

    Args:
        group: exact group
        mode: polynomial or projective
        max_degree: largest degree scanned
        include_odd: also scan odd degrees from 3

    Returns:
        SuperflowReport for the first degree with a non-zero invariant space

    Raises:
        NoInvariantFieldError: nothing invariant up to max_degree
    """
    if mode not in ("polynomial", "projective"):
        raise ValueError(f"unknown mode: {mode}")
    group.require_exact("find_superflow")
    name = group.name or "group"
    minus_identity = group.contains_minus_identity()
    if minus_identity and not include_odd:
        raise NoInvariantFieldError(
            f"{name} contains -I: every even-degree invariant field vanishes",
            reason="minus_identity")

    degrees = range(2, max_degree + 1) if include_odd else range(2, max_degree + 1, 2)
    for degree in degrees:
        if degree % 2 == 0 and minus_identity:
            continue
        space = invariant_vf_basis(group, degree)
        if space.dim == 0:
            continue
        logger.info(f"{name}: first invariant fields at degree {degree}, dim {space.dim}")
        report = SuperflowReport(group=name, mode=mode, degree=degree, dim=space.dim)
        if space.dim > 1:
            report.failure = f"non-unique: {space.dim}-dimensional invariant space at degree {degree}"
            report.basis = space.basis
            return report
        numerator = space.basis[0]
        if mode == "polynomial":
            report.vector_field = numerator
            report.solenoidal, report.sphere_tangent = _flags(numerator)
            return report
        forms = invariant_form_basis(group, degree - 2)
        report.form_dim = len(forms)
        if len(forms) != 1:
            report.failure = (f"projective failure: invariant forms of degree {degree - 2} "
                              f"span dimension {len(forms)}")
            report.basis = space.basis
            return report
        denominator = forms[0]
        report.denominator = denominator
        report.vector_field = VectorField(list(numerator.numerators), denominator)
        report.solenoidal, report.sphere_tangent = _flags(report.vector_field)
        return report
    raise NoInvariantFieldError(f"{name}: no invariant field up to degree {max_degree}")


# ----------------------------------------------------------------------
# closed-form dimension families

def _round_half_up(value: Fraction) -> int:
    return int((value + Fraction(1, 2)) // 1)


def closed_form_dims(family: str, degree: int) -> int:
    if degree % 2:
        raise ValueError("closed-form dimension families are defined for even degrees")
    l = degree
    if family == "tetra_full":
        return (l + 2) ** 2 // 16
    if family == "tetra_full_solenoidal":
        return (l * l + 4 * l + 12) // 24
    if family == "octa":
        return l * l // 16
    if family == "octa_solenoidal_sphere":
        return (l * l + 12 * l + 16) // 48
    if family == "octa_sphere":
        return _round_half_up(Fraction(l * l, 48)) + _round_half_up(Fraction((l + 2) ** 2, 48))
    raise ValueError(f"unknown dimension family: {family}")


DIM_FAMILIES = ("tetra_full", "tetra_full_solenoidal", "octa",
                "octa_solenoidal_sphere", "octa_sphere")


# ----------------------------------------------------------------------
# dihedral fields and approx-group verification

def harmonic_pair(m: int) -> Tuple[MPoly, MPoly]:
    """Real and imaginary parts of (x + iy)^m"""
    re: Dict[Exponent, int] = {}
    im: Dict[Exponent, int] = {}
    for k in range(m + 1):
        c = comb(m, k)
        if k % 2 == 0:
            re[(m - k, k)] = c * (-1) ** (k // 2)
        else:
            im[(m - k, k)] = c * (-1) ** ((k - 1) // 2)
    return MPoly(2, re), MPoly(2, im)


def dihedral_field(d: int, mode: str = "projective") -> VectorField:
    """Superflow field of the dihedral group of order 4d+2"""
    if d < 1:
        raise ValueError("d must be at least 1")
    p, q = harmonic_pair(2 * d)
    sign = (-1) ** d
    nums = [p + q * sign, p * sign - q]
    if mode == "polynomial":
        return VectorField(nums)
    if mode != "projective":
        raise ValueError(f"unknown mode: {mode}")
    r2 = MPoly(2, {(2, 0): 1, (0, 2): 1})
    return VectorField(nums, r2 ** (d - 1))


def dihedral_orbit_form(d: int) -> MPoly:
    p, q = harmonic_pair(2 * d + 1)
    return p - q * ((-1) ** d)


def verify_candidate_field(group: FiniteGroup, candidate: VectorField,
                           samples: int = VERIFY_SAMPLES, tol: float = VERIFY_TOLERANCE,
                           seed: int = 20240607) -> Tuple[bool, float]:
    """
    Check g^-1 V(g x) = V(x) at random points for every group element

    Returns:
        (passed, max deviation)
    """
    evaluate = candidate.to_numeric()
    rng = np.random.default_rng(seed)
    points = rng.normal(size=(samples, group.dim))
    base = evaluate(points)
    worst = 0.0
    for g in group.elements:
        mat = g.as_array()
        moved = evaluate(points @ mat.T)
        pulled = moved @ np.linalg.inv(mat).T
        worst = max(worst, float(np.max(np.abs(pulled - base))))
    logger.debug(f"candidate check on {group.name}: max deviation {worst:.3e}")
    return worst < tol, worst
