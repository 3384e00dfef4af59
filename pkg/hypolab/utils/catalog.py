"""
Named operators used across experiments and tests.
"""

from hypolab.models.operators import DiffOp, DiffOpMatrix
from hypolab.utils.parsing import parse_operator

GRUSHIN_TEXT = "dx^2 + x^2*dy^2"
P_TEXT = "dx - i*x*dy"
LAPLACIAN_TEXT = "dx^2 + dy^2"
FIRST_ORDER_SYSTEM_TEXT = "[[dx, x*dy], [-x*dy, dx]]"
HYPO_SYSTEM_TEXT = "[[dx, dy], [-x^2*dy, dx]]"


def grushin() -> DiffOp:
    """G = dx^2 + x^2 dy^2."""
    return parse_operator(GRUSHIN_TEXT).op


def p_operator() -> DiffOp:
    """P = dx - i x dy."""
    return parse_operator(P_TEXT).op


def laplacian() -> DiffOp:
    return parse_operator(LAPLACIAN_TEXT).op


def first_order_system() -> DiffOpMatrix:
    """The first-order system whose determinant is G."""
    return parse_operator(FIRST_ORDER_SYSTEM_TEXT)


def hypo_system() -> DiffOpMatrix:
    """The system solved by cofactor reduction to two Grushin equations."""
    return parse_operator(HYPO_SYSTEM_TEXT)


def grushin_fields() -> list:
    """The vector fields dx and x dy generating G."""
    return [parse_operator("dx").op, parse_operator("x*dy").op]


CATALOG = {
    "G": GRUSHIN_TEXT,
    "P": P_TEXT,
    "Laplacian": LAPLACIAN_TEXT,
    "A": FIRST_ORDER_SYSTEM_TEXT,
    "hypo_system": HYPO_SYSTEM_TEXT,
}
