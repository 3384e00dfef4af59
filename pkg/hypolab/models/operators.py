"""
Differential operators with polynomial coefficients in (x, y) and their symbols.

Coefficients live in sympy polynomials over the Gaussian rationals (QQ_I), so
operator algebra is exact; conversion to complex doubles happens only in
`evaluate`.
"""

from dataclasses import dataclass
from math import comb
from typing import Any, Dict, Iterator, Mapping, Tuple, Union

import numpy as np
import sympy
from sympy.polys.domains import QQ_I

# Coordinates and their dual frequency variables
X, Y = sympy.symbols("x y", real=True)
XI, ETA = sympy.symbols("xi eta", real=True)

MultiIndex = Tuple[int, int]
Scalar = Union[int, sympy.Expr]


def _coeff_poly(expr: Any) -> sympy.Poly:
    return sympy.Poly(expr, X, Y, domain=QQ_I)


def _symbol_poly(expr: Any) -> sympy.Poly:
    return sympy.Poly(expr, X, Y, XI, ETA, domain=QQ_I)


def _is_real(value: sympy.Expr) -> bool:
    return sympy.im(value) == 0


@dataclass(frozen=True)
class PolyCoeff:
    """Polynomial coefficient c(x, y) with exact complex-rational coefficients."""

    poly: sympy.Poly

    @classmethod
    def from_expr(cls, expr: Any) -> "PolyCoeff":
        return cls(_coeff_poly(sympy.expand(expr)))

    @classmethod
    def from_terms(cls, terms: Mapping[MultiIndex, Scalar]) -> "PolyCoeff":
        expr = sympy.Add(*[c * X**a * Y**b for (a, b), c in terms.items()])
        return cls.from_expr(expr)

    @classmethod
    def constant(cls, value: Scalar) -> "PolyCoeff":
        return cls.from_expr(value)

    @property
    def terms(self) -> Dict[MultiIndex, sympy.Expr]:
        if self.poly.is_zero:
            return {}
        return {monom: coeff for monom, coeff in self.poly.terms()}

    @property
    def is_zero(self) -> bool:
        return self.poly.is_zero

    @property
    def is_constant(self) -> bool:
        return self.poly.total_degree() <= 0

    @property
    def is_real(self) -> bool:
        return all(_is_real(c) for c in self.terms.values())

    def as_expr(self) -> sympy.Expr:
        return self.poly.as_expr()

    def diff(self, nx: int = 0, ny: int = 0) -> "PolyCoeff":
        poly = self.poly
        for _ in range(nx):
            poly = poly.diff(X)
        for _ in range(ny):
            poly = poly.diff(Y)
        return PolyCoeff(poly)

    def evaluate(self, x: Any, y: Any) -> np.ndarray:
        """Evaluate on numpy arrays (broadcast) as complex doubles."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.zeros(np.broadcast(x, y).shape, dtype=complex)
        for (a, b), c in self.terms.items():
            out = out + complex(c) * x**a * y**b
        return out

    def __add__(self, other: "PolyCoeff") -> "PolyCoeff":
        return PolyCoeff(self.poly + _as_coeff(other).poly)

    def __sub__(self, other: "PolyCoeff") -> "PolyCoeff":
        return PolyCoeff(self.poly - _as_coeff(other).poly)

    def __mul__(self, other: Union["PolyCoeff", Scalar]) -> "PolyCoeff":
        return PolyCoeff(self.poly * _as_coeff(other).poly)

    __rmul__ = __mul__

    def __neg__(self) -> "PolyCoeff":
        return PolyCoeff(-self.poly)


def _as_coeff(value: Union[PolyCoeff, Scalar]) -> PolyCoeff:
    if isinstance(value, PolyCoeff):
        return value
    return PolyCoeff.constant(value)


@dataclass(frozen=True)
class DiffOp:
    """
    Scalar operator sum_alpha c_alpha(x, y) dx^alpha_1 dy^alpha_2.

    `items` is the normalized term list: zero coefficients removed, sorted by
    multi-index. Equality of DiffOps is equality of normalized terms.
    """

    items: Tuple[Tuple[MultiIndex, PolyCoeff], ...] = ()

    @classmethod
    def from_terms(cls, terms: Mapping[MultiIndex, Union[PolyCoeff, Scalar]]) -> "DiffOp":
        merged: Dict[MultiIndex, PolyCoeff] = {}
        for alpha, coeff in terms.items():
            coeff = _as_coeff(coeff)
            merged[alpha] = merged[alpha] + coeff if alpha in merged else coeff
        items = tuple(
            sorted(
                ((alpha, c) for alpha, c in merged.items() if not c.is_zero),
                key=lambda item: item[0],
            )
        )
        return cls(items)

    @classmethod
    def zero(cls) -> "DiffOp":
        return cls()

    @classmethod
    def identity(cls) -> "DiffOp":
        return cls.from_terms({(0, 0): 1})

    @classmethod
    def multiplier(cls, coeff: Union[PolyCoeff, Scalar]) -> "DiffOp":
        return cls.from_terms({(0, 0): coeff})

    @classmethod
    def derivative(cls, nx: int = 0, ny: int = 0) -> "DiffOp":
        return cls.from_terms({(nx, ny): 1})

    @property
    def terms(self) -> Dict[MultiIndex, PolyCoeff]:
        return dict(self.items)

    @property
    def order(self) -> int:
        return max((a + b for (a, b), _ in self.items), default=0)

    @property
    def is_zero(self) -> bool:
        return not self.items

    @property
    def has_constant_coefficients(self) -> bool:
        return all(c.is_constant for _, c in self.items)

    def is_real_vector_field(self) -> bool:
        if self.is_zero or self.order != 1:
            return False
        return all(alpha != (0, 0) and c.is_real for alpha, c in self.items)

    def vector_coefficients(self) -> Tuple[PolyCoeff, PolyCoeff]:
        """(a, b) for the field a dx + b dy."""
        terms = self.terms
        zero = PolyCoeff.constant(0)
        return terms.get((1, 0), zero), terms.get((0, 1), zero)

    def __iter__(self) -> Iterator[Tuple[MultiIndex, PolyCoeff]]:
        return iter(self.items)

    def __add__(self, other: "DiffOp") -> "DiffOp":
        terms = self.terms
        for alpha, c in other.items:
            terms[alpha] = terms[alpha] + c if alpha in terms else c
        return DiffOp.from_terms(terms)

    def __neg__(self) -> "DiffOp":
        return DiffOp.from_terms({alpha: -c for alpha, c in self.items})

    def __sub__(self, other: "DiffOp") -> "DiffOp":
        return self + (-other)

    def scale(self, factor: Union[PolyCoeff, Scalar]) -> "DiffOp":
        """Left multiplication by a coefficient."""
        factor = _as_coeff(factor)
        return DiffOp.from_terms({alpha: factor * c for alpha, c in self.items})

    def __rmul__(self, factor: Union[PolyCoeff, Scalar]) -> "DiffOp":
        return self.scale(factor)

    def __matmul__(self, other: "DiffOp") -> "DiffOp":
        return compose(self, other)


def compose(a: DiffOp, b: DiffOp) -> DiffOp:
    """a o b, expanded with the Leibniz rule."""
    terms: Dict[MultiIndex, PolyCoeff] = {}
    for (a1, a2), ca in a.items:
        for (b1, b2), cb in b.items:
            for g1 in range(a1 + 1):
                for g2 in range(a2 + 1):
                    coeff = ca * cb.diff(g1, g2) * (comb(a1, g1) * comb(a2, g2))
                    if coeff.is_zero:
                        continue
                    alpha = (a1 - g1 + b1, a2 - g2 + b2)
                    terms[alpha] = terms[alpha] + coeff if alpha in terms else coeff
    return DiffOp.from_terms(terms)


@dataclass(frozen=True)
class DiffOpMatrix:
    """2x2 operator matrix; `scalar` marks a matrix that wraps one scalar operator."""

    entries: Tuple[Tuple[DiffOp, DiffOp], Tuple[DiffOp, DiffOp]]
    scalar: bool = False

    @classmethod
    def from_rows(cls, rows: Any) -> "DiffOpMatrix":
        (a11, a12), (a21, a22) = rows
        return cls(((a11, a12), (a21, a22)))

    @classmethod
    def from_scalar(cls, op: DiffOp) -> "DiffOpMatrix":
        zero = DiffOp.zero()
        return cls(((op, zero), (zero, zero)), scalar=True)

    @property
    def size(self) -> int:
        return 1 if self.scalar else 2

    @property
    def op(self) -> DiffOp:
        """The wrapped scalar operator (entry (1,1))."""
        return self.entries[0][0]

    def entry(self, i: int, j: int) -> DiffOp:
        return self.entries[i][j]

    def rows(self) -> Iterator[Tuple[DiffOp, DiffOp]]:
        return iter(self.entries)


@dataclass(frozen=True)
class SymbolPoly:
    """Polynomial in (x, y, xi, eta) with exact complex-rational coefficients."""

    poly: sympy.Poly

    @classmethod
    def from_expr(cls, expr: Any) -> "SymbolPoly":
        return cls(_symbol_poly(sympy.expand(expr)))

    @classmethod
    def zero(cls) -> "SymbolPoly":
        return cls.from_expr(0)

    @property
    def terms(self) -> Dict[Tuple[int, int, int, int], sympy.Expr]:
        if self.poly.is_zero:
            return {}
        return {monom: coeff for monom, coeff in self.poly.terms()}

    @property
    def is_zero(self) -> bool:
        return self.poly.is_zero

    def as_expr(self) -> sympy.Expr:
        return self.poly.as_expr()

    def real_part(self) -> "SymbolPoly":
        """Real part for real (x, y, xi, eta): monomials are real, so split coefficients."""
        return SymbolPoly.from_expr(
            sympy.Add(*[sympy.re(c) * _monomial(m) for m, c in self.terms.items()])
        )

    def imag_part(self) -> "SymbolPoly":
        return SymbolPoly.from_expr(
            sympy.Add(*[sympy.im(c) * _monomial(m) for m, c in self.terms.items()])
        )

    def diff(self, var: sympy.Symbol) -> "SymbolPoly":
        return SymbolPoly(self.poly.diff(var))

    def evaluate(self, x: Any, y: Any, xi: Any, eta: Any) -> np.ndarray:
        x, y, xi, eta = (np.asarray(v, dtype=float) for v in (x, y, xi, eta))
        out = np.zeros(np.broadcast(x, y, xi, eta).shape, dtype=complex)
        for (a, b, c, d), coeff in self.terms.items():
            out = out + complex(coeff) * x**a * y**b * xi**c * eta**d
        return out

    def __add__(self, other: "SymbolPoly") -> "SymbolPoly":
        return SymbolPoly(self.poly + other.poly)

    def __sub__(self, other: "SymbolPoly") -> "SymbolPoly":
        return SymbolPoly(self.poly - other.poly)

    def __mul__(self, other: Union["SymbolPoly", Scalar]) -> "SymbolPoly":
        if not isinstance(other, SymbolPoly):
            other = SymbolPoly.from_expr(other)
        return SymbolPoly(self.poly * other.poly)

    __rmul__ = __mul__

    def __neg__(self) -> "SymbolPoly":
        return SymbolPoly(-self.poly)


def _monomial(exponents: Tuple[int, int, int, int]) -> sympy.Expr:
    a, b, c, d = exponents
    return X**a * Y**b * XI**c * ETA**d
