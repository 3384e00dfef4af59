"""
Symbolic operator algebra: composition, commutators, principal symbols,
characteristic directions, bracket rank and Poisson brackets.
"""

from typing import List, Optional, Sequence, Tuple

import numpy as np
import sympy

from hypolab.core.config import Settings, settings
from hypolab.core.exceptions import NotAVectorFieldError
from hypolab.core.logging import logger
from hypolab.models.operators import (
    ETA,
    XI,
    DiffOp,
    DiffOpMatrix,
    SymbolPoly,
    X,
    Y,
)
from hypolab.models.operators import compose as _compose

Point = Tuple[float, float]


class AlgebraService:
    """Service class for exact operator algebra and symbol analysis."""

    def __init__(self, config: Settings = settings):
        self.config = config
        self.rank_threshold = config.rank_threshold

    def compose(self, a: DiffOp, b: DiffOp) -> DiffOp:
        """
        Compose two operators, expanding coefficients with the Leibniz rule.

        Args:
            a: Outer operator
            b: Inner operator

        Returns:
            The normalized operator a o b
        """
        return _compose(a, b)

    def commutator(self, a: DiffOp, b: DiffOp) -> DiffOp:
        """[a, b] = a o b - b o a."""
        return _compose(a, b) - _compose(b, a)

    def compose_matrix(self, a: DiffOpMatrix, b: DiffOpMatrix) -> DiffOpMatrix:
        rows = []
        for i in range(2):
            row = []
            for j in range(2):
                row.append(
                    _compose(a.entry(i, 0), b.entry(0, j))
                    + _compose(a.entry(i, 1), b.entry(1, j))
                )
            rows.append(row)
        return DiffOpMatrix.from_rows(rows)

    def adjugate(self, m: DiffOpMatrix) -> DiffOpMatrix:
        """[[a22, -a12], [-a21, a11]]."""
        return DiffOpMatrix.from_rows(
            [
                [m.entry(1, 1), -m.entry(0, 1)],
                [-m.entry(1, 0), m.entry(0, 0)],
            ]
        )

    def cofactor_product(self, m: DiffOpMatrix) -> DiffOpMatrix:
        """
        Multiply a 2x2 system on the left by its cofactor matrix.

        Args:
            m: Operator matrix [[a11, a12], [a21, a22]]

        Returns:
            adj(m) o m, composed exactly; the off-diagonal entries pick up
            commutator terms when coefficients are not constant
        """
        return self.compose_matrix(self.adjugate(m), m)

    def apply_to_polynomial(self, op: DiffOp, poly: sympy.Expr) -> sympy.Expr:
        """Apply `op` to a polynomial expression in x, y exactly."""
        result = sympy.Integer(0)
        for (ox, oy), coeff in op:
            derived = poly
            for _ in range(ox):
                derived = sympy.diff(derived, X)
            for _ in range(oy):
                derived = sympy.diff(derived, Y)
            result += coeff.as_expr() * derived
        return sympy.expand(result)

    def principal_symbol(self, op: DiffOp, m: int) -> SymbolPoly:
        """
        Principal symbol at order m with sigma(dx) = i xi, sigma(dy) = i eta.

        Args:
            op: Scalar operator
            m: Order of the retained terms

        Returns:
            Sum over |alpha| = m of c_alpha (i xi)^a1 (i eta)^a2
        """
        expr = sympy.Integer(0)
        for (ox, oy), coeff in op:
            if ox + oy == m:
                expr += coeff.as_expr() * (sympy.I * XI) ** ox * (sympy.I * ETA) ** oy
        return SymbolPoly.from_expr(expr)

    def poisson_bracket(self, a: SymbolPoly, b: SymbolPoly) -> SymbolPoly:
        """{a, b} = a_xi b_x + a_eta b_y - a_x b_xi - a_y b_eta."""
        return (
            a.diff(XI) * b.diff(X)
            + a.diff(ETA) * b.diff(Y)
            - a.diff(X) * b.diff(XI)
            - a.diff(Y) * b.diff(ETA)
        )

    def det_symbol(self, m: DiffOpMatrix, order_pair: Tuple[int, int]) -> SymbolPoly:
        """
        Principal symbol of the operator determinant a11 o a22 - a12 o a21.

        Args:
            m: 2x2 operator matrix
            order_pair: Row orders; their sum is the order of the determinant

        Returns:
            Principal symbol of the determinant
        """
        det = _compose(m.entry(0, 0), m.entry(1, 1)) - _compose(m.entry(0, 1), m.entry(1, 0))
        return self.principal_symbol(det, order_pair[0] + order_pair[1])

    def char_directions(
        self,
        sym: SymbolPoly,
        base: Point,
        n_dirs: Optional[int] = None,
        tol: float = 1e-9,
    ) -> List[Point]:
        """
        Sample the unit circle at `base` for zeros of the symbol.

        Args:
            sym: Symbol polynomial
            base: Point (x, y)
            n_dirs: Number of equispaced directions (defaults to settings)
            tol: Relative threshold against max |sym| on the circle, floored at 1

        Returns:
            Unit directions (xi, eta) where the symbol is near zero, each after
            one Newton refinement; an empty list means elliptic at `base`
        """
        n_dirs = n_dirs or self.config.char_directions
        if n_dirs < 8:
            raise ValueError("n_dirs must be at least 8")
        if tol <= 0:
            raise ValueError("tol must be positive")

        x0, y0 = base
        theta = 2.0 * np.pi * np.arange(n_dirs) / n_dirs
        values = sym.evaluate(x0, y0, np.cos(theta), np.sin(theta))
        scale = max(float(np.max(np.abs(values))), 1.0)
        near = np.flatnonzero(np.abs(values) < tol * scale)

        d_xi, d_eta = sym.diff(XI), sym.diff(ETA)
        spacing = 2.0 * np.pi / n_dirs
        directions = []
        for j in near:
            t = self._newton_refine(sym, d_xi, d_eta, base, float(theta[j]), spacing)
            directions.append((float(np.cos(t)), float(np.sin(t))))
        logger.debug(f"char_directions at {base}: {len(directions)} of {n_dirs} near zero")
        return directions

    @staticmethod
    def _newton_refine(
        sym: SymbolPoly,
        d_xi: SymbolPoly,
        d_eta: SymbolPoly,
        base: Point,
        theta: float,
        spacing: float,
    ) -> float:
        x0, y0 = base
        c, s = np.cos(theta), np.sin(theta)
        value = complex(sym.evaluate(x0, y0, c, s))
        slope = complex(-s * d_xi.evaluate(x0, y0, c, s) + c * d_eta.evaluate(x0, y0, c, s))
        # Double roots have a vanishing slope; keep the sampled direction.
        if abs(slope) < 1e-12:
            return theta
        step = (value * slope.conjugate()).real / abs(slope) ** 2
        if abs(step) > spacing / 2:
            return theta
        return theta - step

    def is_elliptic_at(self, sym: SymbolPoly, base: Point) -> bool:
        return not self.char_directions(sym, base)

    def hormander_rank(
        self, fields: Sequence[DiffOp], base: Point, max_step: int
    ) -> Tuple[int, Optional[int]]:
        """
        Rank of the iterated brackets of real vector fields at a point.

        Args:
            fields: Real first-order operators without zero-order term
            base: Point (x, y)
            max_step: Deepest bracket length considered

        Returns:
            (rank of the span in R^2, smallest step reaching rank 2 or None)

        Raises:
            NotAVectorFieldError: If some element is not a real vector field
        """
        if max_step < 1:
            raise ValueError("max_step must be at least 1")
        for index, field in enumerate(fields):
            if not field.is_real_vector_field():
                raise NotAVectorFieldError(f"field {index} is not a real vector field")

        vectors: List[np.ndarray] = []
        level = list(fields)
        rank = 0
        for step in range(1, max_step + 1):
            if step > 1:
                level = [
                    bracket
                    for bracket in (self.commutator(f, b) for f in fields for b in level)
                    if not bracket.is_zero
                ]
            vectors.extend(self._field_vector(v, base) for v in level)
            rank = self._span_rank(vectors)
            logger.debug(f"hormander_rank step {step}: rank {rank}")
            if rank == 2:
                return rank, step
        return rank, None

    def _field_vector(self, field: DiffOp, base: Point) -> np.ndarray:
        a, b = field.vector_coefficients()
        x0, y0 = base
        vector = np.array([a.evaluate(x0, y0).real, b.evaluate(x0, y0).real], dtype=float)
        norm = np.linalg.norm(vector)
        return vector / norm if norm > self.rank_threshold else np.zeros(2)

    def _span_rank(self, vectors: List[np.ndarray]) -> int:
        if not vectors:
            return 0
        singular_values = np.linalg.svd(np.vstack(vectors), compute_uv=False)
        return int(np.sum(singular_values > self.rank_threshold))
