#!/usr/bin/env python3
"""
Exact Algebra Kernel for Superflows
Sparse multivariate polynomials over the rationals, unreduced rational
functions, homogeneous vector fields, exact linear algebra and truncated
univariate power series.
"""

import re
from fractions import Fraction
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import sympy

Exponent = Tuple[int, ...]
Matrix = List[List[Fraction]]

MAX_EXPONENT = 2 ** 31


class PolySyntaxError(ValueError):
    """Raised when polynomial text does not follow the grammar"""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class UnknownVariableError(ValueError):
    """Raised when polynomial text names a variable outside the declared list"""


class DimensionMismatchError(ValueError):
    """Raised when matrix or vector dimensions do not agree"""


class SingularMatrixError(ArithmeticError):
    """Raised when an exact matrix inverse does not exist"""


def grlex_key(exponent: Exponent) -> Tuple[int, Tuple[int, ...]]:
    """Sort key putting higher total degree first, then lexicographically larger"""
    return (-sum(exponent), tuple(-e for e in exponent))


def default_vars(n: int) -> List[str]:
    """Variable names used when none are given"""
    if n == 1:
        return ["x"]
    if n == 2:
        return ["x", "y"]
    if n == 3:
        return ["x", "y", "z"]
    return [f"x{i + 1}" for i in range(n)]


def monomials_of_degree(n: int, d: int) -> List[Exponent]:
    """All exponent vectors of total degree d in n variables, in grlex order"""
    if d < 0:
        return []
    result: List[Exponent] = []

    def build(prefix: List[int], remaining: int, slots: int):
        if slots == 1:
            result.append(tuple(prefix + [remaining]))
            return
        for e in range(remaining, -1, -1):
            build(prefix + [e], remaining - e, slots - 1)

    build([], d, n)
    return result


def _to_fraction(value: Any) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, sympy.Rational):
        return Fraction(int(value.p), int(value.q))
    raise TypeError(f"exact coefficient expected, got {type(value).__name__}")


def _coefficient_text(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


class MPoly:
    """Sparse polynomial in nvars variables with Fraction coefficients"""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Optional[Dict[Exponent, Any]] = None):
        if nvars < 1:
            raise ValueError("a polynomial needs at least one variable")
        self.nvars = nvars
        clean: Dict[Exponent, Fraction] = {}
        for exps, coeff in (terms or {}).items():
            if len(exps) != nvars:
                raise DimensionMismatchError(
                    f"exponent {exps} does not match {nvars} variables")
            c = _to_fraction(coeff)
            if c != 0:
                clean[tuple(exps)] = c
        self.terms = clean

    @classmethod
    def zero(cls, nvars: int) -> "MPoly":
        return cls(nvars)

    @classmethod
    def constant(cls, nvars: int, value: Any) -> "MPoly":
        return cls(nvars, {(0,) * nvars: value})

    @classmethod
    def variable(cls, nvars: int, index: int) -> "MPoly":
        exps = [0] * nvars
        exps[index] = 1
        return cls(nvars, {tuple(exps): 1})

    @classmethod
    def monomial(cls, exps: Sequence[int], coeff: Any = 1) -> "MPoly":
        return cls(len(exps), {tuple(exps): coeff})

    @classmethod
    def _raw(cls, nvars: int, terms: Dict[Exponent, Fraction]) -> "MPoly":
        # caller guarantees Fraction values and no zeros
        poly = cls.__new__(cls)
        poly.nvars = nvars
        poly.terms = terms
        return poly

    # ------------------------------------------------------------------
    # structure

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        """Maximal total degree, -1 for the zero polynomial"""
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def is_homogeneous(self) -> bool:
        return len({sum(e) for e in self.terms}) <= 1

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self.terms)

    def constant_value(self) -> Fraction:
        return self.terms.get((0,) * self.nvars, Fraction(0))

    def sorted_terms(self) -> List[Tuple[Exponent, Fraction]]:
        return sorted(self.terms.items(), key=lambda item: grlex_key(item[0]))

    def coefficient(self, exps: Sequence[int]) -> Fraction:
        return self.terms.get(tuple(exps), Fraction(0))

    def homogeneous_part(self, d: int) -> "MPoly":
        return MPoly._raw(self.nvars, {e: c for e, c in self.terms.items() if sum(e) == d})

    def truncate(self, max_degree: int) -> "MPoly":
        return MPoly._raw(self.nvars,
                          {e: c for e, c in self.terms.items() if sum(e) <= max_degree})

    # ------------------------------------------------------------------
    # arithmetic

    def _coerce(self, other: Any) -> "MPoly":
        if isinstance(other, MPoly):
            if other.nvars != self.nvars:
                raise DimensionMismatchError(
                    f"polynomials in {self.nvars} and {other.nvars} variables")
            return other
        return MPoly.constant(self.nvars, other)

    def __add__(self, other: Any) -> "MPoly":
        other = self._coerce(other)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            s = terms.get(e, 0) + c
            if s:
                terms[e] = s
            else:
                terms.pop(e, None)
        return MPoly._raw(self.nvars, terms)

    __radd__ = __add__

    def __neg__(self) -> "MPoly":
        return MPoly._raw(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: Any) -> "MPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other: Any) -> "MPoly":
        return self._coerce(other) - self

    def __mul__(self, other: Any) -> "MPoly":
        if not isinstance(other, MPoly):
            c = _to_fraction(other)
            if c == 0:
                return MPoly.zero(self.nvars)
            return MPoly._raw(self.nvars, {e: v * c for e, v in self.terms.items()})
        other = self._coerce(other)
        terms: Dict[Exponent, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                terms[e] = terms.get(e, 0) + c1 * c2
        return MPoly._raw(self.nvars, {e: c for e, c in terms.items() if c})

    __rmul__ = __mul__

    def mul_truncated(self, other: "MPoly", max_degree: int) -> "MPoly":
        """Product with every term of total degree above max_degree dropped"""
        other = self._coerce(other)
        terms: Dict[Exponent, Fraction] = {}
        for e1, c1 in self.terms.items():
            d1 = sum(e1)
            if d1 > max_degree:
                continue
            for e2, c2 in other.terms.items():
                if d1 + sum(e2) > max_degree:
                    continue
                e = tuple(a + b for a, b in zip(e1, e2))
                terms[e] = terms.get(e, 0) + c1 * c2
        return MPoly._raw(self.nvars, {e: c for e, c in terms.items() if c})

    def __truediv__(self, other: Any) -> "MPoly":
        if isinstance(other, MPoly):
            if not other.is_constant() or other.is_zero:
                raise TypeError("use RatFunc for division by a non-constant polynomial")
            other = other.constant_value()
        c = _to_fraction(other)
        return self * (1 / c)

    def __pow__(self, k: int) -> "MPoly":
        if k < 0:
            raise ValueError("negative powers are not polynomials")
        result = MPoly.constant(self.nvars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other: Any) -> bool:
        if isinstance(other, MPoly):
            return self.nvars == other.nvars and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.terms == MPoly.constant(self.nvars, other).terms
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.nvars, frozenset(self.terms.items())))

    def __repr__(self) -> str:
        return f"MPoly({self.to_text()!r})"

    # ------------------------------------------------------------------
    # calculus and substitution

    def diff(self, index: int) -> "MPoly":
        terms: Dict[Exponent, Fraction] = {}
        for e, c in self.terms.items():
            k = e[index]
            if k:
                ne = list(e)
                ne[index] = k - 1
                terms[tuple(ne)] = c * k
        return MPoly._raw(self.nvars, terms)

    def gradient(self) -> List["MPoly"]:
        return [self.diff(i) for i in range(self.nvars)]

    def evaluate(self, values: Sequence[Any]) -> Any:
        """Evaluate at values of any type supporting + and * with Fractions"""
        if len(values) != self.nvars:
            raise DimensionMismatchError(
                f"{len(values)} values for {self.nvars} variables")
        powers: List[Dict[int, Any]] = [{} for _ in range(self.nvars)]
        total: Any = 0
        for e, c in self.terms.items():
            term: Any = c
            for i, k in enumerate(e):
                if k:
                    cache = powers[i]
                    if k not in cache:
                        cache[k] = values[i] ** k
                    term = term * cache[k]
            total = total + term
        return total

    def evaluate_float(self, values: Sequence[float]) -> float:
        return float(sum(float(c) * float(np.prod([v ** k for v, k in zip(values, e)]))
                         for e, c in self.terms.items()))

    def to_numeric(self) -> Callable[[np.ndarray], np.ndarray]:
        """Vectorised float evaluator accepting points of shape (..., nvars)"""
        if not self.terms:
            return lambda pts: np.zeros(np.asarray(pts, dtype=float).shape[:-1])
        exps = np.array(list(self.terms.keys()), dtype=float)
        coeffs = np.array([float(c) for c in self.terms.values()])

        def evaluate(points: np.ndarray) -> np.ndarray:
            pts = np.asarray(points, dtype=float)
            monos = np.prod(pts[..., None, :] ** exps, axis=-1)
            return monos @ coeffs

        return evaluate

    def substitute(self, polys: Sequence["MPoly"]) -> "MPoly":
        """Replace variable i by polys[i] (all in a common variable count)"""
        if len(polys) != self.nvars:
            raise DimensionMismatchError("one replacement per variable is required")
        target = polys[0].nvars if polys else self.nvars
        return self.evaluate(list(polys)) + MPoly.zero(target)

    def compose_linear(self, matrix: Sequence[Sequence[Any]]) -> "MPoly":
        return compose_linear(self, matrix)

    # ------------------------------------------------------------------
    # conversion

    def to_text(self, names: Optional[Sequence[str]] = None) -> str:
        names = list(names) if names is not None else default_vars(self.nvars)
        if len(names) != self.nvars:
            raise DimensionMismatchError("one name per variable is required")
        if not self.terms:
            return "0"
        pieces: List[str] = []
        for idx, (e, c) in enumerate(self.sorted_terms()):
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            factors = [names[i] if k == 1 else f"{names[i]}^{k}"
                       for i, k in enumerate(e) if k]
            if not factors:
                body = _coefficient_text(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = _coefficient_text(mag) + "*" + "*".join(factors)
            if idx == 0:
                pieces.append(("-" if sign == "-" else "") + body)
            else:
                pieces.append(f" {sign} {body}")
        return "".join(pieces)

    def to_sympy(self, symbols: Sequence[sympy.Symbol]) -> sympy.Expr:
        expr = sympy.Integer(0)
        for e, c in self.terms.items():
            term = sympy.Rational(c.numerator, c.denominator)
            for s, k in zip(symbols, e):
                term *= s ** k
            expr += term
        return expr

    @classmethod
    def from_sympy(cls, expr: sympy.Expr, symbols: Sequence[sympy.Symbol]) -> "MPoly":
        poly = sympy.Poly(sympy.expand(expr), *symbols)
        return cls(len(symbols), {tuple(m): _to_fraction(sympy.Rational(c))
                                  for m, c in poly.terms()})


# ----------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\S))")


class _Parser:
    def __init__(self, text: str, names: Sequence[str]):
        self.text = text
        self.names = list(names)
        self.index = {name: i for i, name in enumerate(self.names)}
        self.tokens: List[Tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            match = _TOKEN.match(text, pos)
            if match is None or match.end() == pos:
                break
            start = match.start(match.lastindex) if match.lastindex else pos
            if match.group(1) is not None:
                self.tokens.append(("num", match.group(1), start))
            elif match.group(2) is not None:
                self.tokens.append(("name", match.group(2), start))
            elif match.group(3) is not None:
                self.tokens.append(("op", match.group(3), start))
            pos = match.end()
        self.tokens.append(("end", "", len(text)))
        self.pos = 0

    def peek(self) -> Tuple[str, str, int]:
        return self.tokens[self.pos]

    def take(self) -> Tuple[str, str, int]:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op: str):
        kind, value, where = self.take()
        if kind != "op" or value != op:
            raise PolySyntaxError(f"expected '{op}'", where)

    def parse(self) -> MPoly:
        if self.peek()[0] == "end":
            raise PolySyntaxError("empty expression", 0)
        result = self.expr()
        kind, value, where = self.peek()
        if kind != "end":
            raise PolySyntaxError(f"unexpected '{value}'", where)
        return result

    def expr(self) -> MPoly:
        n = len(self.names)
        kind, value, _ = self.peek()
        negate = False
        if kind == "op" and value in "+-":
            self.take()
            negate = value == "-"
        result = self.term()
        if negate:
            result = -result
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value in "+-":
                self.take()
                rhs = self.term()
                result = result + rhs if value == "+" else result - rhs
            else:
                return result + MPoly.zero(n)

    def term(self) -> MPoly:
        result = self.factor()
        while True:
            kind, value, _ = self.peek()
            if kind == "op" and value == "*":
                self.take()
                result = result * self.factor()
            else:
                return result

    def factor(self) -> MPoly:
        base = self.primary()
        kind, value, where = self.peek()
        if kind == "op" and value == "^":
            self.take()
            kind, value, where = self.take()
            if kind != "num":
                raise PolySyntaxError("exponent must be a non-negative integer", where)
            k = int(value)
            if k >= MAX_EXPONENT:
                raise PolySyntaxError("exponent too large", where)
            return base ** k
        return base

    def primary(self) -> MPoly:
        n = len(self.names)
        kind, value, where = self.take()
        if kind == "num":
            nxt = self.peek()
            if nxt[0] == "op" and nxt[1] == "/":
                self.take()
                dkind, dvalue, dwhere = self.take()
                if dkind != "num":
                    raise PolySyntaxError("denominator must be an integer", dwhere)
                if int(dvalue) == 0:
                    raise PolySyntaxError("zero denominator", dwhere)
                return MPoly.constant(n, Fraction(int(value), int(dvalue)))
            return MPoly.constant(n, int(value))
        if kind == "name":
            if value not in self.index:
                raise UnknownVariableError(f"unknown variable '{value}' at position {where}")
            return MPoly.variable(n, self.index[value])
        if kind == "op" and value == "(":
            inner = self.expr()
            self.expect_op(")")
            return inner
        if kind == "end":
            raise PolySyntaxError("unexpected end of input", where)
        raise PolySyntaxError(f"unexpected '{value}'", where)


def parse_poly(text: str, names: Optional[Sequence[str]] = None) -> MPoly:
    """
    Parse polynomial text such as "3/2*x^2*y - z^3"

    Args:
        text: expression in the polynomial grammar
        names: ordered variable names (defaults to x, y, z)

    Returns:
        canonical MPoly
    """
    names = list(names) if names is not None else default_vars(3)
    return _Parser(text, names).parse()


# ----------------------------------------------------------------------
# linear substitutions

def _signed_permutation(matrix: Sequence[Sequence[Any]]) -> Optional[Tuple[List[int], List[int]]]:
    """(perm, signs) with row i equal to signs[i] * e_perm[i], or None"""
    perm: List[int] = []
    signs: List[int] = []
    for row in matrix:
        nonzero = [(j, v) for j, v in enumerate(row) if v != 0]
        if len(nonzero) != 1 or nonzero[0][1] not in (1, -1):
            return None
        perm.append(nonzero[0][0])
        signs.append(int(nonzero[0][1]))
    if sorted(perm) != list(range(len(perm))):
        return None
    return perm, signs


def compose_linear(p: MPoly, matrix: Sequence[Sequence[Any]]) -> MPoly:
    """
    Return p(Mx): variable i is replaced by the i-th row of M applied to x
    """
    n = p.nvars
    if len(matrix) != n or any(len(row) != n for row in matrix):
        raise DimensionMismatchError(
            f"matrix must be {n}x{n} for a polynomial in {n} variables")
    sp = _signed_permutation(matrix)
    if sp is not None:
        perm, signs = sp
        terms: Dict[Exponent, Fraction] = {}
        for e, c in p.terms.items():
            ne = [0] * n
            sign = 1
            for i, k in enumerate(e):
                ne[perm[i]] += k
                if signs[i] < 0 and k % 2:
                    sign = -sign
            terms[tuple(ne)] = c if sign > 0 else -c
        return MPoly._raw(n, terms)
    rows = [MPoly(n, {tuple(1 if j == k else 0 for k in range(n)): _to_fraction(v)
                      for j, v in enumerate(row) if v != 0}) for row in matrix]
    return p.evaluate(rows) + MPoly.zero(n)


# ----------------------------------------------------------------------
# rational functions

class RatFunc:
    """Unreduced quotient num/den of polynomials; equality by cross-multiplication"""

    __slots__ = ("num", "den")

    def __init__(self, num: MPoly, den: Optional[MPoly] = None):
        if den is None:
            den = MPoly.constant(num.nvars, 1)
        if den.is_zero:
            raise ZeroDivisionError("rational function with zero denominator")
        if den.nvars != num.nvars:
            raise DimensionMismatchError("numerator and denominator variable counts differ")
        self.num = num
        self.den = den

    @property
    def nvars(self) -> int:
        return self.num.nvars

    def _coerce(self, other: Any) -> "RatFunc":
        if isinstance(other, RatFunc):
            return other
        if isinstance(other, MPoly):
            return RatFunc(other)
        return RatFunc(MPoly.constant(self.nvars, other))

    def __add__(self, other: Any) -> "RatFunc":
        other = self._coerce(other)
        if self.den == other.den:
            return RatFunc(self.num + other.num, self.den)
        return RatFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> "RatFunc":
        return RatFunc(-self.num, self.den)

    def __sub__(self, other: Any) -> "RatFunc":
        return self + (-self._coerce(other))

    def __rsub__(self, other: Any) -> "RatFunc":
        return self._coerce(other) - self

    def __mul__(self, other: Any) -> "RatFunc":
        other = self._coerce(other)
        return RatFunc(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> "RatFunc":
        other = self._coerce(other)
        if other.num.is_zero:
            raise ZeroDivisionError("division by the zero rational function")
        return RatFunc(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other: Any) -> "RatFunc":
        return self._coerce(other) / self

    def __pow__(self, k: int) -> "RatFunc":
        if k < 0:
            return RatFunc(self.den ** (-k), self.num ** (-k))
        return RatFunc(self.num ** k, self.den ** k)

    def __eq__(self, other: Any) -> bool:
        if isinstance(other, (RatFunc, MPoly, int, Fraction)):
            other = self._coerce(other)
            return self.num * other.den == other.num * self.den
        return NotImplemented

    def __hash__(self):
        raise TypeError("RatFunc equality is not representation based")

    def __repr__(self) -> str:
        return f"RatFunc(({self.num.to_text()}) / ({self.den.to_text()}))"

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def as_polynomial(self) -> MPoly:
        if not self.den.is_constant():
            raise TypeError("rational function has a non-constant denominator")
        return self.num / self.den.constant_value()

    def degree(self) -> Optional[int]:
        """Homogeneity degree num - den, None when either side is inhomogeneous"""
        if self.num.is_zero:
            return None
        if not (self.num.is_homogeneous() and self.den.is_homogeneous()):
            return None
        return self.num.degree() - self.den.degree()

    def diff(self, index: int) -> "RatFunc":
        if self.den.is_constant():
            return RatFunc(self.num.diff(index), self.den)
        return RatFunc(self.num.diff(index) * self.den - self.num * self.den.diff(index),
                       self.den * self.den)

    def evaluate(self, values: Sequence[Any]) -> Any:
        return self.num.evaluate(values) / self.den.evaluate(values)

    def to_text(self, names: Optional[Sequence[str]] = None) -> str:
        if self.den == 1:
            return self.num.to_text(names)
        return f"({self.num.to_text(names)})/({self.den.to_text(names)})"


# ----------------------------------------------------------------------
# vector fields

class VectorField:
    """
    Vector field with polynomial numerators over one shared denominator
    """

    __slots__ = ("numerators", "denominator")

    def __init__(self, numerators: Sequence[MPoly], denominator: Optional[MPoly] = None):
        if not numerators:
            raise ValueError("a vector field needs at least one component")
        n = numerators[0].nvars
        if any(p.nvars != n for p in numerators):
            raise DimensionMismatchError("components use different variable counts")
        if denominator is None:
            denominator = MPoly.constant(n, 1)
        if denominator.is_zero:
            raise ZeroDivisionError("vector field with zero denominator")
        if denominator.nvars != n:
            raise DimensionMismatchError("denominator variable count differs")
        self.numerators = tuple(numerators)
        self.denominator = denominator

    @classmethod
    def from_texts(cls, texts: Sequence[str], names: Optional[Sequence[str]] = None,
                   denominator: Optional[str] = None) -> "VectorField":
        names = list(names) if names is not None else default_vars(len(texts))
        nums = [parse_poly(t, names) for t in texts]
        den = parse_poly(denominator, names) if denominator is not None else None
        return cls(nums, den)

    @classmethod
    def zero(cls, n: int) -> "VectorField":
        return cls([MPoly.zero(n) for _ in range(n)])

    @property
    def dim(self) -> int:
        return len(self.numerators)

    @property
    def nvars(self) -> int:
        return self.numerators[0].nvars

    def is_polynomial(self) -> bool:
        return self.denominator.is_constant()

    def is_zero(self) -> bool:
        return all(p.is_zero for p in self.numerators)

    def components(self) -> List[RatFunc]:
        return [RatFunc(p, self.denominator) for p in self.numerators]

    def polynomial_components(self) -> List[MPoly]:
        if not self.is_polynomial():
            raise TypeError("vector field has a non-constant denominator")
        c = self.denominator.constant_value()
        return [p / c for p in self.numerators]

    def degree(self) -> Optional[int]:
        """Common homogeneity degree, None when components disagree or are inhomogeneous"""
        if not self.denominator.is_homogeneous():
            return None
        degrees = set()
        for p in self.numerators:
            if p.is_zero:
                continue
            if not p.is_homogeneous():
                return None
            degrees.add(p.degree())
        if len(degrees) > 1:
            return None
        if not degrees:
            return None
        return degrees.pop() - self.denominator.degree()

    def euler_check(self) -> bool:
        """Euler identity sum x_j d_j f = d f for every component"""
        d = self.degree()
        if d is None:
            return self.is_zero()
        xs = [MPoly.variable(self.nvars, j) for j in range(self.nvars)]
        for f in self.components():
            lhs = RatFunc(MPoly.zero(self.nvars))
            for j in range(self.nvars):
                lhs = lhs + f.diff(j) * xs[j]
            if lhs != f * d:
                return False
        return True

    def scale(self, c: Any) -> "VectorField":
        return VectorField([p * c for p in self.numerators], self.denominator)

    def __add__(self, other: "VectorField") -> "VectorField":
        if self.denominator == other.denominator:
            return VectorField([a + b for a, b in zip(self.numerators, other.numerators)],
                               self.denominator)
        return VectorField([a * other.denominator + b * self.denominator
                            for a, b in zip(self.numerators, other.numerators)],
                           self.denominator * other.denominator)

    def __sub__(self, other: "VectorField") -> "VectorField":
        return self + other.scale(-1)

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, VectorField):
            return NotImplemented
        if self.dim != other.dim:
            return False
        return all(a * other.denominator == b * self.denominator
                   for a, b in zip(self.numerators, other.numerators))

    def __hash__(self):
        raise TypeError("VectorField equality is not representation based")

    def __repr__(self) -> str:
        return f"VectorField({self.to_text()!r})"

    def evaluate(self, point: Sequence[Any]) -> List[Any]:
        den = self.denominator.evaluate(point)
        return [p.evaluate(point) / den for p in self.numerators]

    def to_numeric(self) -> Callable[[np.ndarray], np.ndarray]:
        """Vectorised float evaluator returning shape (..., dim)"""
        nums = [p.to_numeric() for p in self.numerators]
        den = self.denominator.to_numeric()

        def evaluate(points: np.ndarray) -> np.ndarray:
            pts = np.asarray(points, dtype=float)
            d = den(pts)
            return np.stack([f(pts) / d for f in nums], axis=-1)

        return evaluate

    def to_text(self, names: Optional[Sequence[str]] = None) -> str:
        body = " • ".join(p.to_text(names) for p in self.numerators)
        if self.denominator == 1:
            return body
        return f"[{body}] / ({self.denominator.to_text(names)})"

    def to_json(self, names: Optional[Sequence[str]] = None) -> Dict[str, Any]:
        return {
            "numerators": [p.to_text(names) for p in self.numerators],
            "denominator": self.denominator.to_text(names),
        }


def radial_pairing(field: VectorField) -> MPoly:
    """Numerator of sum x_i V_i; zero iff the field is tangent to every sphere"""
    total = MPoly.zero(field.nvars)
    for i, p in enumerate(field.numerators):
        total = total + MPoly.variable(field.nvars, i) * p
    return total


def conjugate_field(field: VectorField, matrix: Sequence[Sequence[Any]]) -> VectorField:
    """
    Return M^-1 V(Mx)

    Args:
        field: vector field in n variables
        matrix: invertible n x n matrix of exact rationals

    Returns:
        conjugated field, equal to the input iff M is a symmetry
    """
    n = field.nvars
    if len(matrix) != n or any(len(row) != n for row in matrix):
        raise DimensionMismatchError(f"matrix must be {n}x{n}")
    exact = [[_to_fraction(v) for v in row] for row in matrix]
    inverse = mat_inverse(exact)
    moved = [compose_linear(p, exact) for p in field.numerators]
    den = compose_linear(field.denominator, exact)
    nums = []
    for i in range(n):
        acc = MPoly.zero(n)
        for j in range(n):
            if inverse[i][j]:
                acc = acc + moved[j] * inverse[i][j]
        nums.append(acc)
    return VectorField(nums, den)


def divergence(field: VectorField) -> RatFunc:
    """Exact divergence of a shared-denominator field"""
    n = field.nvars
    d = field.denominator
    if d.is_constant():
        total = MPoly.zero(n)
        for i, p in enumerate(field.numerators):
            total = total + p.diff(i)
        return RatFunc(total, d)
    total = MPoly.zero(n)
    for i, p in enumerate(field.numerators):
        total = total + p.diff(i) * d - p * d.diff(i)
    return RatFunc(total, d * d)


def curl3(field: VectorField) -> VectorField:
    """Curl of a polynomial field in three variables"""
    if field.dim != 3 or field.nvars != 3:
        raise DimensionMismatchError("curl is defined for three-dimensional fields")
    f1, f2, f3 = field.polynomial_components()
    return VectorField([f3.diff(1) - f2.diff(2),
                        f1.diff(2) - f3.diff(0),
                        f2.diff(0) - f1.diff(1)])


def reduce_mod_sphere(p: MPoly) -> MPoly:
    """
    Reduce p modulo x^2+y^2+z^2-1 by rewriting z^2 as 1-x^2-y^2

    The remainder has z-degree at most one; it is zero iff the sphere
    polynomial divides p.
    """
    if p.nvars != 3:
        raise DimensionMismatchError("sphere reduction works in variables (x, y, z)")
    base = MPoly(3, {(0, 0, 0): 1, (2, 0, 0): -1, (0, 2, 0): -1})
    powers: Dict[int, MPoly] = {0: MPoly.constant(3, 1)}
    result = MPoly.zero(3)
    grouped: Dict[int, Dict[Exponent, Fraction]] = {}
    for (a, b, c), coeff in p.terms.items():
        k, r = divmod(c, 2)
        grouped.setdefault(k, {})
        key = (a, b, r)
        grouped[k][key] = grouped[k].get(key, 0) + coeff
    for k, terms in grouped.items():
        if k not in powers:
            powers[k] = base ** k
        result = result + MPoly(3, terms) * powers[k]
    return result


def homogeneous_components(p: MPoly) -> List[Tuple[int, MPoly]]:
    """Split p into (degree, part) pairs by ascending total degree"""
    buckets: Dict[int, Dict[Exponent, Fraction]] = {}
    for e, c in p.terms.items():
        buckets.setdefault(sum(e), {})[e] = c
    return [(d, MPoly._raw(p.nvars, buckets[d])) for d in sorted(buckets)]


# ----------------------------------------------------------------------
# exact linear algebra

def rref(rows: Sequence[Sequence[Any]]) -> Tuple[Matrix, List[int]]:
    """
    Reduced row echelon form over the rationals

    Returns:
        (nonzero rows, pivot columns)
    """
    matrix = [[_to_fraction(v) for v in row] for row in rows]
    if not matrix:
        return [], []
    ncols = len(matrix[0])
    pivots: List[int] = []
    r = 0
    for col in range(ncols):
        pivot = None
        for i in range(r, len(matrix)):
            if matrix[i][col] != 0:
                pivot = i
                break
        if pivot is None:
            continue
        matrix[r], matrix[pivot] = matrix[pivot], matrix[r]
        lead = matrix[r][col]
        if lead != 1:
            matrix[r] = [v / lead for v in matrix[r]]
        prow = matrix[r]
        nz = [j for j in range(col, ncols) if prow[j] != 0]
        for i in range(len(matrix)):
            if i != r:
                factor = matrix[i][col]
                if factor != 0:
                    row = matrix[i]
                    for j in nz:
                        row[j] -= factor * prow[j]
        pivots.append(col)
        r += 1
        if r == len(matrix):
            break
    return matrix[:r], pivots


def rank(rows: Sequence[Sequence[Any]]) -> int:
    return len(rref(rows)[1])


def nullspace(rows: Sequence[Sequence[Any]], ncols: Optional[int] = None) -> Matrix:
    """Basis of {v : A v = 0}, returned in reduced echelon form"""
    if not rows:
        if ncols is None:
            return []
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    ncols = len(rows[0])
    reduced, pivots = rref(rows)
    free = [j for j in range(ncols) if j not in set(pivots)]
    basis: Matrix = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(reduced, pivots):
            v[p] = -row[f]
        basis.append(v)
    return rref(basis)[0] if basis else []


def mat_mul(a: Sequence[Sequence[Any]], b: Sequence[Sequence[Any]]) -> Matrix:
    if len(a[0]) != len(b):
        raise DimensionMismatchError("inner matrix dimensions differ")
    return [[sum((a[i][k] * b[k][j] for k in range(len(b))), Fraction(0))
             for j in range(len(b[0]))] for i in range(len(a))]


def mat_inverse(m: Sequence[Sequence[Any]]) -> Matrix:
    n = len(m)
    if any(len(row) != n for row in m):
        raise DimensionMismatchError("only square matrices can be inverted")
    augmented = [[_to_fraction(v) for v in row] + [Fraction(int(i == j)) for j in range(n)]
                 for i, row in enumerate(m)]
    reduced, pivots = rref(augmented)
    if pivots[:n] != list(range(n)) or len(reduced) < n:
        raise SingularMatrixError("matrix is singular")
    return [row[n:] for row in reduced]


def mat_det(m: Sequence[Sequence[Any]]) -> Fraction:
    """Exact determinant by Gaussian elimination over the rationals"""
    a = [[_to_fraction(v) for v in row] for row in m]
    n = len(a)
    det = Fraction(1)
    for col in range(n):
        pivot = next((i for i in range(col, n) if a[i][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            det = -det
        det *= a[col][col]
        for i in range(col + 1, n):
            factor = a[i][col] / a[col][col]
            if factor:
                for j in range(col, n):
                    a[i][j] -= factor * a[col][j]
    return det


# ----------------------------------------------------------------------
# truncated univariate power series (lists of coefficients, index = power)

def series_mul(a: Sequence[Any], b: Sequence[Any], n: int) -> List[Any]:
    """First n coefficients of a*b"""
    out: List[Any] = []
    for k in range(n):
        acc: Any = 0
        for i in range(max(0, k - len(b) + 1), min(k, len(a) - 1) + 1):
            acc = acc + a[i] * b[k - i]
        out.append(acc)
    return out


def series_inv(a: Sequence[Any], n: int) -> List[Any]:
    """First n coefficients of 1/a; a[0] must be invertible"""
    if a[0] == 0:
        raise ZeroDivisionError("series with zero constant term is not invertible")
    inv0 = 1 / a[0]
    out: List[Any] = [inv0]
    for k in range(1, n):
        acc: Any = 0
        for i in range(1, min(k, len(a) - 1) + 1):
            acc = acc + a[i] * out[k - i]
        out.append(-acc * inv0)
    return out


def series_div(a: Sequence[Any], b: Sequence[Any], n: int) -> List[Any]:
    return series_mul(a, series_inv(b, n), n)


def series_pow(a: Sequence[Any], exponent: Fraction, n: int) -> List[Any]:
    """
    First n coefficients of a^exponent for a[0] = 1

    Uses a * f' = exponent * a' * f, valid for any rational exponent.
    """
    if a[0] != 1:
        raise ValueError("series power needs a unit constant term")
    r = _to_fraction(exponent)
    out: List[Any] = [Fraction(1)]
    for k in range(1, n):
        acc: Any = 0
        for j in range(1, min(k, len(a) - 1) + 1):
            acc = acc + (r * j - (k - j)) * a[j] * out[k - j]
        out.append(acc / k)
    return out


def poly_of_series(coeffs: Sequence[Any], s: Sequence[Any], n: int) -> List[Any]:
    """Series of sum_k coeffs[k] * s^k truncated to n terms (Horner)"""
    out: List[Any] = [0] * n
    for c in reversed(coeffs):
        out = series_mul(out, s, n)
        out[0] = out[0] + c
    return out


def series_to_float(coeffs: Iterable[Any]) -> List[float]:
    return [float(c) for c in coeffs]


def eval_series(coeffs: Sequence[Any], t: float) -> float:
    """Evaluate a truncated series at a float point by Horner's rule"""
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * t + float(c)
    return acc
