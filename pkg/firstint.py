#!/usr/bin/env python3
"""
First Integrals of Homogeneous Vector Fields

Exact kernels of W -> sum W_{x_i} V_i on homogeneous forms, rational
first-integral checks, the Lagrange interpolation identity and the
permutation-group fields Q_n with their cyclic integrals.
"""

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Sequence

from exactalg import MPoly, VectorField, monomials_of_degree, nullspace
from superflow_logging import get_component_logger

logger = get_component_logger("FIRSTINT")

NEGATIVE_SEARCH_DEGREE = 8


@dataclass
class IntegralBasis:
    field: VectorField
    degree: int
    basis: List[MPoly]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def to_json(self) -> str:
        return json.dumps({
            "schema": 1,
            "field": self.field.to_json(),
            "degree": self.degree,
            "dim": self.dim,
            "basis": [p.to_text() for p in self.basis],
        }, indent=2, sort_keys=True)


def derivative_along(w: MPoly, numerators: Sequence[MPoly]) -> MPoly:
    """sum_i dW/dx_i * N_i"""
    total = MPoly.zero(w.nvars)
    for i, p in enumerate(numerators):
        dw = w.diff(i)
        if not dw.is_zero:
            total = total + dw * p
    return total


def polynomial_first_integrals(field: VectorField, degree: int) -> IntegralBasis:
    """
    Degree-d homogeneous polynomial first integrals of a field

    The shared denominator is cleared, so only the numerators enter.
    The basis is returned in reduced echelon form over grlex monomials.
    """
    if degree < 1:
        raise ValueError("first-integral degree must be at least 1")
    n = field.nvars
    monos = monomials_of_degree(n, degree)
    images = [derivative_along(MPoly.monomial(m), field.numerators) for m in monos]
    out_monos = sorted({e for img in images for e in img.terms})
    if not out_monos:
        kernel = [[Fraction(int(i == j)) for j in range(len(monos))] for i in range(len(monos))]
    else:
        matrix = [[img.coefficient(e) for img in images] for e in out_monos]
        kernel = nullspace(matrix)
    basis = [MPoly(n, {m: c for m, c in zip(monos, vec) if c != 0}) for vec in kernel]
    logger.debug(f"degree {degree}: {len(basis)} first integral(s) among {len(monos)} monomials")
    return IntegralBasis(field, degree, basis)


def first_integral_counts(field: VectorField, max_degree: int = NEGATIVE_SEARCH_DEGREE) -> Dict[int, int]:
    """Number of independent integrals per degree 1..max_degree"""
    return {d: polynomial_first_integrals(field, d).dim for d in range(1, max_degree + 1)}


def rational_first_integral_check(w_num: MPoly, w_den: MPoly, field: VectorField) -> bool:
    """
    True iff W = w_num / w_den is constant along the field

    Clears denominators: w_den * D(w_num) - w_num * D(w_den) == 0 where D
    is differentiation along the field numerators.
    """
    if w_den.is_zero:
        raise ZeroDivisionError("first integral with zero denominator")
    if not (w_num.is_homogeneous() and w_den.is_homogeneous()):
        raise ValueError("first integrals are checked one homogeneous degree at a time")
    lhs = w_den * derivative_along(w_num, field.numerators)
    rhs = w_num * derivative_along(w_den, field.numerators)
    return (lhs - rhs).is_zero


# ----------------------------------------------------------------------
# Lagrange interpolation identity

def _difference(n: int, i: int, k: int) -> MPoly:
    return MPoly.variable(n, i) - MPoly.variable(n, k)


def vandermonde(n: int, skip: int = -1) -> MPoly:
    """prod_{i<k}(y_i - y_k), omitting every factor that involves index skip"""
    result = MPoly.constant(n, 1)
    for i in range(n):
        for k in range(i + 1, n):
            if skip in (i, k):
                continue
            result = result * _difference(n, i, k)
    return result


def lagrange_identity_sum(n: int, s: int) -> MPoly:
    """
    Vandermonde times sum_j y_j^s / p'(y_j), with p(t) = prod (t - y_j)

    Equals 0 for s <= n-2 and the Vandermonde itself for s = n-1.
    """
    total = MPoly.zero(n)
    for j in range(n):
        term = MPoly.variable(n, j) ** s * vandermonde(n, skip=j)
        total = total + (term if j % 2 == 0 else -term)
    return total


def lagrange_identity_check(n: int) -> bool:
    if not 3 <= n <= 8:
        raise ValueError("Lagrange identity check covers 3 <= n <= 8")
    for s in range(n - 1):
        if not lagrange_identity_sum(n, s).is_zero:
            logger.error(f"Lagrange sum nonzero for n={n}, s={s}")
            return False
    return lagrange_identity_sum(n, n - 1) == vandermonde(n)


# ----------------------------------------------------------------------
# permutation-group fields

def q_field(n: int) -> VectorField:
    """Components (n+1) x_i^2 - 2 x_i (x_1 + ... + x_n)"""
    if n < 2:
        raise ValueError("q_field needs n >= 2")
    xs = [MPoly.variable(n, i) for i in range(n)]
    total = MPoly.zero(n)
    for x in xs:
        total = total + x
    return VectorField([x * x * (n + 1) - x * total * 2 for x in xs])


def sn1_first_integrals(n: int) -> List[MPoly]:
    """Cyclic forms x_l^(n-2) * prod_{i<j; i,j != l}(x_i - x_j), l = 1..n"""
    if n < 3:
        raise ValueError("cyclic integrals need n >= 3")
    return [MPoly.variable(n, l) ** (n - 2) * vandermonde(n, skip=l) for l in range(n)]


def sn1_integral_relation(n: int) -> MPoly:
    """Alternating sum of the cyclic integrals; identically zero"""
    total = MPoly.zero(n)
    for l, q in enumerate(sn1_first_integrals(n)):
        total = total + (q if l % 2 == 0 else -q)
    return total
