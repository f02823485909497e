#!/usr/bin/env python3
"""
Finite Matrix Groups

Closure of generator sets, the builtin symmetry groups (tetrahedral,
octahedral, permutation-with-kappa, hyperoctahedral, dihedral, icosahedral),
scalar invariant spaces and per-degree invariant dimensions.
"""

import json
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from exactalg import (
    DimensionMismatchError,
    Exponent,
    MPoly,
    compose_linear,
    mat_det,
    monomials_of_degree,
    rref,
)
from superflow_logging import get_component_logger

logger = get_component_logger("GROUPS")

DEFAULT_MAX_ORDER = 10000
APPROX_TOLERANCE = 1e-9


class GroupClosureError(RuntimeError):
    """Raised when closure exceeds max_order"""


class UnknownGroupError(ValueError):
    """Raised for an unknown builtin group name or bad parameters"""


class ApproxGroupError(ValueError):
    """Raised when an exact-only operation receives a float group"""


@dataclass(frozen=True)
class MatrixRep:
    """Square matrix with Fraction entries (exact) or float entries (approx)"""

    entries: Tuple[Tuple[Any, ...], ...]
    kind: str = "exact"

    @classmethod
    def exact(cls, rows: Sequence[Sequence[Any]]) -> "MatrixRep":
        return cls(tuple(tuple(Fraction(v) for v in row) for row in rows), "exact")

    @classmethod
    def approx(cls, rows: Sequence[Sequence[Any]]) -> "MatrixRep":
        return cls(tuple(tuple(float(v) for v in row) for row in rows), "approx")

    @classmethod
    def identity(cls, n: int, kind: str = "exact") -> "MatrixRep":
        rows = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
        return cls.exact(rows) if kind == "exact" else cls.approx(rows)

    def __post_init__(self):
        n = len(self.entries)
        if n == 0 or any(len(row) != n for row in self.entries):
            raise DimensionMismatchError("group elements must be non-empty square matrices")

    @property
    def dim(self) -> int:
        return len(self.entries)

    @property
    def is_exact(self) -> bool:
        return self.kind == "exact"

    def __matmul__(self, other: "MatrixRep") -> "MatrixRep":
        if other.dim != self.dim:
            raise DimensionMismatchError("matrix dimensions differ")
        n = self.dim
        if self.is_exact and other.is_exact:
            rows = [[sum((self.entries[i][k] * other.entries[k][j] for k in range(n)), Fraction(0))
                     for j in range(n)] for i in range(n)]
            return MatrixRep(tuple(tuple(r) for r in rows), "exact")
        product = self.as_array() @ other.as_array()
        return MatrixRep.approx(product)

    def as_array(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.entries])

    def transpose(self) -> "MatrixRep":
        return MatrixRep(tuple(zip(*self.entries)), self.kind)

    def inverse(self) -> "MatrixRep":
        # every builtin group element is orthogonal
        if self.is_orthogonal():
            return self.transpose()
        if self.is_exact:
            from exactalg import mat_inverse
            return MatrixRep.exact(mat_inverse([list(r) for r in self.entries]))
        return MatrixRep.approx(np.linalg.inv(self.as_array()))

    def is_orthogonal(self) -> bool:
        product = self @ self.transpose()
        if product.is_exact:
            return product == MatrixRep.identity(self.dim)
        return bool(np.allclose(product.as_array(), np.eye(self.dim), atol=APPROX_TOLERANCE))

    def determinant(self) -> Any:
        if self.is_exact:
            return mat_det([list(r) for r in self.entries])
        return float(np.linalg.det(self.as_array()))

    def rows(self) -> List[List[Any]]:
        return [list(r) for r in self.entries]

    def signed_permutation(self) -> Optional[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
        """(perm, signs) with (Mx)_k = signs[k] * x_perm[k], or None"""
        if not self.is_exact:
            return None
        perm, signs = [], []
        for row in self.entries:
            nonzero = [(j, v) for j, v in enumerate(row) if v != 0]
            if len(nonzero) != 1 or abs(nonzero[0][1]) != 1:
                return None
            perm.append(nonzero[0][0])
            signs.append(int(nonzero[0][1]))
        if sorted(perm) != list(range(self.dim)):
            return None
        return tuple(perm), tuple(signs)

    def close_to(self, other: "MatrixRep", tol: float = APPROX_TOLERANCE) -> bool:
        return float(np.max(np.abs(self.as_array() - other.as_array()))) < tol

    def to_json(self) -> List[List[str]]:
        return [[str(v) if self.is_exact else repr(v) for v in row] for row in self.entries]


@dataclass
class FiniteGroup:
    elements: List[MatrixRep]
    generators: List[MatrixRep]
    kind: str
    name: Optional[str] = None
    _index: Dict[Any, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.kind == "exact":
            self._index = {m.entries: i for i, m in enumerate(self.elements)}

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def dim(self) -> int:
        return self.elements[0].dim

    @property
    def is_exact(self) -> bool:
        return self.kind == "exact"

    def require_exact(self, operation: str):
        if not self.is_exact:
            raise ApproxGroupError(f"{operation} needs an exact group, got {self.name or 'approx group'}")

    def contains(self, matrix: MatrixRep, tol: float = APPROX_TOLERANCE) -> bool:
        if self.is_exact and matrix.is_exact:
            return matrix.entries in self._index
        return any(matrix.close_to(g, tol) for g in self.elements)

    def intersection(self, other: "FiniteGroup") -> "FiniteGroup":
        common = [g for g in self.elements if other.contains(g)]
        kind = "exact" if self.is_exact and other.is_exact else "approx"
        return FiniteGroup(common, common, kind, f"{self.name}&{other.name}")

    def is_subgroup_of(self, other: "FiniteGroup") -> bool:
        return all(other.contains(g) for g in self.elements)

    def contains_minus_identity(self) -> bool:
        minus = MatrixRep.exact([[-1 if i == j else 0 for j in range(self.dim)]
                                 for i in range(self.dim)])
        if not self.is_exact:
            minus = MatrixRep.approx(minus.rows())
        return self.contains(minus)

    def signed_permutations(self, generators_only: bool = False
                            ) -> Optional[List[Tuple[Tuple[int, ...], Tuple[int, ...]]]]:
        """Actions as (perm, signs) when every element is a signed permutation"""
        actions = []
        for g in (self.generators if generators_only else self.elements):
            sp = g.signed_permutation()
            if sp is None:
                return None
            actions.append(sp)
        return actions

    def is_inverse_closed(self) -> bool:
        return all(self.contains(g.inverse()) for g in self.elements)

    def summary(self) -> Dict[str, Any]:
        return {"name": self.name, "dim": self.dim, "kind": self.kind, "order": self.order}


def close_group(generators: Sequence[MatrixRep], max_order: int = DEFAULT_MAX_ORDER,
                name: Optional[str] = None, tol: float = APPROX_TOLERANCE) -> FiniteGroup:
    """
    Breadth-first closure of a generator set

    Args:
        generators: square matrices of equal dimension
        max_order: abort threshold
        name: label stored on the group
        tol: entrywise dedup tolerance for approx groups

    Returns:
        FiniteGroup containing the identity

    Raises:
        GroupClosureError: closure would exceed max_order
    """
    if max_order <= 0:
        raise ValueError("max_order must be positive")
    if not generators:
        raise ValueError("at least one generator is required")
    n = generators[0].dim
    if any(g.dim != n for g in generators):
        raise DimensionMismatchError("generators have different dimensions")
    kind = "exact" if all(g.is_exact for g in generators) else "approx"
    gens = list(generators) if kind == "exact" else [MatrixRep.approx(g.rows()) for g in generators]

    identity = MatrixRep.identity(n, kind)
    elements: List[MatrixRep] = [identity]
    queue = deque([identity])

    if kind == "exact":
        seen = {identity.entries}
        while queue:
            current = queue.popleft()
            for g in gens:
                product = current @ g
                if product.entries not in seen:
                    seen.add(product.entries)
                    elements.append(product)
                    queue.append(product)
                    if len(elements) > max_order:
                        raise GroupClosureError(
                            f"closure of {name or 'group'} exceeds max_order {max_order}")
    else:
        stacked = [identity.as_array()]
        while queue:
            current = queue.popleft()
            for g in gens:
                product = current @ g
                arr = product.as_array()
                if not any(np.max(np.abs(arr - s)) < tol for s in stacked):
                    stacked.append(arr)
                    elements.append(product)
                    queue.append(product)
                    if len(elements) > max_order:
                        raise GroupClosureError(
                            f"closure of {name or 'group'} exceeds max_order {max_order}")

    logger.debug(f"closed {name or 'group'}: order {len(elements)} ({kind})")
    return FiniteGroup(elements, list(gens), kind, name)


# ----------------------------------------------------------------------
# builtin groups

def _diag(*values) -> MatrixRep:
    n = len(values)
    return MatrixRep.exact([[values[i] if i == j else 0 for j in range(n)] for i in range(n)])


def _perm_matrix(perm: Sequence[int], signs: Optional[Sequence[int]] = None) -> MatrixRep:
    """Matrix with (Mx)_k = signs[k] * x_perm[k]"""
    n = len(perm)
    signs = signs or [1] * n
    return MatrixRep.exact([[signs[k] if j == perm[k] else 0 for j in range(n)] for k in range(n)])


def _tetra_full_generators() -> List[MatrixRep]:
    return [
        _diag(1, -1, -1),
        _diag(-1, 1, -1),
        _perm_matrix([1, 0, 2]),
        MatrixRep.exact([[0, 1, 0], [0, 0, 1], [1, 0, 0]]),
    ]


def _octa_generators() -> List[MatrixRep]:
    return [
        MatrixRep.exact([[0, 1, 0], [1, 0, 0], [0, 0, -1]]),
        MatrixRep.exact([[0, 0, 1], [0, -1, 0], [1, 0, 0]]),
        MatrixRep.exact([[-1, 0, 0], [0, 0, 1], [0, 1, 0]]),
    ]


def kappa_matrix(n: int) -> MatrixRep:
    """First column all -1, identity elsewhere"""
    return MatrixRep.exact([[-1 if j == 0 else (1 if i == j else 0) for j in range(n)]
                            for i in range(n)])


def _sn1_generators(n: int) -> List[MatrixRep]:
    swap = list(range(n))
    swap[0], swap[1] = 1, 0
    cycle = [(k + 1) % n for k in range(n)]
    return [kappa_matrix(n), _perm_matrix(swap), _perm_matrix(cycle)]


def _hyperoct_generators(n: int) -> List[MatrixRep]:
    gens = []
    for i in range(n - 1):
        signs = [1] * n
        signs[i] = signs[i + 1] = -1
        gens.append(_perm_matrix(list(range(n)), signs))
    swap = list(range(n))
    swap[0], swap[1] = 1, 0
    signs = [1] * n
    signs[0] = -1
    gens.append(_perm_matrix(swap, signs))
    cycle = [(k + 1) % n for k in range(n)]
    cycle_matrix = _perm_matrix(cycle)
    if cycle_matrix.determinant() < 0:
        signs = [1] * n
        signs[0] = -1
        cycle_matrix = _perm_matrix(cycle, signs)
    gens.append(cycle_matrix)
    return gens


def _dihedral_generators(order: int) -> List[MatrixRep]:
    theta = 2 * math.pi / order
    rotation = MatrixRep.approx([[math.cos(theta), -math.sin(theta)],
                                 [math.sin(theta), math.cos(theta)]])
    reflection = MatrixRep.approx([[0, 1], [1, 0]])
    return [rotation, reflection]


def _icosa_generators() -> List[MatrixRep]:
    phi = (1 + math.sqrt(5)) / 2
    return [
        MatrixRep.approx([[-1, 0, 0], [0, -1, 0], [0, 0, 1]]),
        MatrixRep.approx([[0, 0, 1], [1, 0, 0], [0, 1, 0]]),
        MatrixRep.approx([[0.5, -phi / 2, 1 / (2 * phi)],
                          [phi / 2, 1 / (2 * phi), -0.5],
                          [1 / (2 * phi), 0.5, phi / 2]]),
    ]


GROUP_ALIASES = {
    "tetrahedral": "That",
    "full_tetrahedral": "That",
    "rotation_tetrahedral": "T",
    "octahedral": "O",
    "full_octahedral": "Ohat",
}

BUILTIN_NAMES = ("klein4", "T", "That", "O", "Ohat", "Sn1", "dihedral",
                 "hyperoct", "hyperoct_full", "icosa")


def builtin_group(name: str, *params: int, max_order: int = DEFAULT_MAX_ORDER) -> FiniteGroup:
    """
    Construct one of the named groups

    Args:
        name: klein4, T, That, O, Ohat, Sn1, dihedral, hyperoct, hyperoct_full,
            icosa, or an alias such as octahedral
        params: n for Sn1/hyperoct/hyperoct_full, the odd order 2d+1 for dihedral

    Raises:
        UnknownGroupError: unknown name or bad parameters
    """
    canonical = GROUP_ALIASES.get(name, name)

    def need_params(count: int):
        if len(params) != count:
            raise UnknownGroupError(f"group {name} takes {count} parameter(s), got {len(params)}")

    if canonical == "klein4":
        need_params(0)
        return close_group([_diag(1, -1, -1), _diag(-1, 1, -1)], max_order, "klein4")
    if canonical == "That":
        need_params(0)
        return close_group(_tetra_full_generators(), max_order, "That")
    if canonical == "T":
        need_params(0)
        alpha, beta, _, delta = _tetra_full_generators()
        return close_group([alpha, beta, delta], max_order, "T")
    if canonical == "O":
        need_params(0)
        return close_group(_octa_generators(), max_order, "O")
    if canonical == "Ohat":
        need_params(0)
        return close_group(_tetra_full_generators() + _octa_generators(), max_order, "Ohat")
    if canonical == "Sn1":
        need_params(1)
        n = params[0]
        if n < 2:
            raise UnknownGroupError("Sn1 needs n >= 2")
        return close_group(_sn1_generators(n), max_order, f"Sn1({n})")
    if canonical in ("hyperoct", "hyperoct_full"):
        need_params(1)
        n = params[0]
        if n < 2:
            raise UnknownGroupError(f"{canonical} needs n >= 2")
        gens = _hyperoct_generators(n)
        if canonical == "hyperoct_full":
            gens.append(_diag(*([-1] * n)))
        return close_group(gens, max_order, f"{canonical}({n})")
    if canonical == "dihedral":
        need_params(1)
        order = params[0]
        if order < 3 or order % 2 == 0:
            raise UnknownGroupError("dihedral takes an odd rotation order 2d+1 >= 3")
        return close_group(_dihedral_generators(order), max_order, f"dihedral({order})")
    if canonical == "icosa":
        need_params(0)
        return close_group(_icosa_generators(), max_order, "icosa")
    raise UnknownGroupError(f"unknown group: {name}")


def parse_group_spec(spec: str) -> FiniteGroup:
    """Build a group from CLI text such as 'octahedral', 'Sn1:3' or 'hyperoct:5'"""
    name, _, rest = spec.partition(":")
    params = [int(p) for p in rest.split(",") if p] if rest else []
    return builtin_group(name, *params)


# ----------------------------------------------------------------------
# scalar invariants

def apply_signed_permutation(exps: Exponent, perm: Sequence[int],
                              signs: Sequence[int]) -> Tuple[Exponent, int]:
    """Image of x^a under x -> g x for (g x)_k = s_k x_perm[k]"""
    image = [0] * len(exps)
    sign = 1
    for k, a in enumerate(exps):
        image[perm[k]] += a
        if signs[k] < 0 and a % 2:
            sign = -sign
    return tuple(image), sign


def invariant_form_rows(group: FiniteGroup, degree: int) -> Tuple[List[Exponent], List[List[Fraction]]]:
    """
    Canonical RREF basis of degree-d invariants as coefficient rows

    Returns:
        (monomial list in grlex order, rows over that list)
    """
    group.require_exact("invariant forms")
    n = group.dim
    monos = monomials_of_degree(n, degree)
    position = {m: i for i, m in enumerate(monos)}
    actions = group.signed_permutations(generators_only=True)
    rows: List[List[Fraction]] = []

    if actions is not None:
        visited = set()
        for start in monos:
            if start in visited:
                continue
            # orbit with signs; a sign clash means the average vanishes
            signs_of: Dict[Exponent, int] = {start: 1}
            queue = deque([start])
            vanishes = False
            while queue:
                m = queue.popleft()
                for perm, signs in actions:
                    image, s = apply_signed_permutation(m, perm, signs)
                    total = s * signs_of[m]
                    if image in signs_of:
                        if signs_of[image] != total:
                            vanishes = True
                    else:
                        signs_of[image] = total
                        queue.append(image)
            visited.update(signs_of)
            if vanishes:
                continue
            row = [Fraction(0)] * len(monos)
            lead = min(signs_of, key=lambda e: position[e])
            lead_sign = signs_of[lead]
            for m, s in signs_of.items():
                row[position[m]] = Fraction(s * lead_sign)
            rows.append(row)
        rows.sort(key=lambda r: next(i for i, v in enumerate(r) if v != 0))
        return monos, rows

    averaged: List[List[Fraction]] = []
    order = Fraction(group.order)
    for m in monos:
        mono = MPoly.monomial(m)
        acc: Dict[Exponent, Fraction] = {}
        for g in group.elements:
            image = compose_linear(mono, g.rows())
            for e, c in image.terms.items():
                acc[e] = acc.get(e, 0) + c
        averaged.append([acc.get(e, Fraction(0)) / order for e in monos])
    reduced, _ = rref(averaged)
    return monos, reduced


def rows_to_polys(nvars: int, monos: Sequence[Exponent], rows: Sequence[Sequence[Fraction]]) -> List[MPoly]:
    return [MPoly(nvars, {m: c for m, c in zip(monos, row) if c != 0}) for row in rows]


def molien_dims(group: FiniteGroup, max_degree: int) -> List[int]:
    """Dimensions of degree-d scalar invariants for d = 0..max_degree"""
    group.require_exact("molien_dims")
    dims = []
    for d in range(max_degree + 1):
        _, rows = invariant_form_rows(group, d)
        dims.append(len(rows))
    logger.debug(f"molien dims of {group.name}: {dims}")
    return dims


def is_invariant_form(group: FiniteGroup, p: MPoly) -> bool:
    group.require_exact("invariance check")
    return all(compose_linear(p, g.rows()) == p for g in group.elements)


# ----------------------------------------------------------------------
# serialization

def group_to_json(group: FiniteGroup) -> str:
    payload = {
        "name": group.name,
        "dim": group.dim,
        "kind": group.kind,
        "generators": [g.to_json() for g in group.generators],
        "order": group.order,
    }
    return json.dumps(payload, indent=2)


def group_from_json(text: str, max_order: int = DEFAULT_MAX_ORDER) -> FiniteGroup:
    payload = json.loads(text)
    if payload["kind"] == "exact":
        gens = [MatrixRep.exact([[Fraction(v) for v in row] for row in g])
                for g in payload["generators"]]
    else:
        gens = [MatrixRep.approx([[float(v) for v in row] for row in g])
                for g in payload["generators"]]
    group = close_group(gens, max_order, payload.get("name"))
    if "order" in payload and payload["order"] != group.order:
        raise GroupClosureError(
            f"stored order {payload['order']} differs from re-derived order {group.order}")
    return group
