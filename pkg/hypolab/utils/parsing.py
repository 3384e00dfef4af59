"""
Parsing utilities for the operator mini-language.

Grammar (whitespace insignificant):

    input   := matrix | expr
    matrix  := '[' '[' expr ',' expr ']' ',' '[' expr ',' expr ']' ']'
    expr    := ['+' | '-'] term (('+' | '-') term)*
    term    := factor ('*' factor)*
    factor  := INTEGER '/' INTEGER | NUMBER | 'i' | ('x' | 'y' | 'dx' | 'dy') ['^' INTEGER] | '(' expr ')'

Within a term, coefficients must appear left of derivatives. '/' only
joins two integer literals into a rational constant; any other division is
rejected.
"""

import re
from typing import List, NamedTuple, Tuple

import sympy

from hypolab.core.exceptions import OperatorParseError
from hypolab.core.logging import logger
from hypolab.models.operators import DiffOp, DiffOpMatrix, PolyCoeff, compose

_TOKEN_RE = re.compile(r"(\d+(?:\.\d+)?)|([A-Za-z_][A-Za-z_0-9]*)|(\S)")

_VARIABLES = {
    "x": lambda n: DiffOp.multiplier(PolyCoeff.from_terms({(n, 0): 1})),
    "y": lambda n: DiffOp.multiplier(PolyCoeff.from_terms({(0, n): 1})),
    "dx": lambda n: DiffOp.derivative(n, 0),
    "dy": lambda n: DiffOp.derivative(0, n),
}


class Token(NamedTuple):
    kind: str  # "num", "ident", "op" or "end"
    text: str
    position: int


def tokenize(text: str) -> List[Token]:
    """Split operator text into tokens, keeping source positions."""
    tokens: List[Token] = []
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        match = _TOKEN_RE.match(text, pos)
        number, ident, op = match.groups()
        if number is not None:
            tokens.append(Token("num", number, match.start(1)))
        elif ident is not None:
            tokens.append(Token("ident", ident, match.start(2)))
        elif op is not None:
            if op not in "+-*^()[],/":
                raise OperatorParseError(f"unexpected character '{op}'", match.start(3))
            tokens.append(Token("op", op, match.start(3)))
        pos = match.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


class OperatorParser:
    """Recursive-descent parser producing normalized DiffOp / DiffOpMatrix values."""

    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.index = 0

    def parse(self) -> DiffOpMatrix:
        if self._peek().text == "[":
            result = self._matrix()
        else:
            result = DiffOpMatrix.from_scalar(self._expr())
        end = self._peek()
        if end.kind != "end":
            self._unexpected(end)
        return result

    def _peek(self) -> Token:
        return self.tokens[self.index]

    def _next(self) -> Token:
        token = self.tokens[self.index]
        if token.kind != "end":
            self.index += 1
        return token

    def _expect(self, text: str) -> Token:
        token = self._next()
        if token.text != text or token.kind not in ("op", "ident"):
            raise OperatorParseError(
                f"expected '{text}' but found {self._describe(token)}", token.position
            )
        return token

    def _unexpected(self, token: Token) -> None:
        if token.text == "/":
            raise OperatorParseError("non-polynomial coefficient (division)", token.position)
        raise OperatorParseError(f"unexpected {self._describe(token)}", token.position)

    @staticmethod
    def _describe(token: Token) -> str:
        return "end of input" if token.kind == "end" else f"'{token.text}'"

    def _matrix(self) -> DiffOpMatrix:
        self._expect("[")
        rows = []
        for row_index in range(2):
            if row_index:
                self._expect(",")
            self._expect("[")
            first = self._expr()
            self._expect(",")
            second = self._expr()
            self._expect("]")
            rows.append((first, second))
        self._expect("]")
        return DiffOpMatrix.from_rows(rows)

    def _expr(self) -> DiffOp:
        sign = 1
        if self._peek().text in ("+", "-") and self._peek().kind == "op":
            sign = -1 if self._next().text == "-" else 1
        result = self._term().scale(sign)
        while self._peek().kind == "op" and self._peek().text in ("+", "-"):
            op = self._next().text
            term = self._term()
            result = result + term if op == "+" else result - term
        return result

    def _term(self) -> DiffOp:
        result = self._factor()
        while self._peek().kind == "op" and self._peek().text in ("*", "/"):
            token = self._next()
            if token.text == "/":
                raise OperatorParseError(
                    "non-polynomial coefficient (division)", token.position
                )
            right = self._factor()
            if result.order > 0 and not right.has_constant_coefficients:
                raise OperatorParseError(
                    "coefficients must appear left of derivatives", token.position
                )
            result = compose(result, right)
        return result

    def _factor(self) -> DiffOp:
        token = self._next()
        if token.kind == "num":
            return DiffOp.multiplier(self._number(token))
        if token.kind == "ident":
            if token.text == "i":
                self._reject_exponent()
                return DiffOp.multiplier(sympy.I)
            if token.text in _VARIABLES:
                return _VARIABLES[token.text](self._exponent())
            raise OperatorParseError(f"unknown identifier '{token.text}'", token.position)
        if token.text == "(":
            inner = self._expr()
            self._expect(")")
            self._reject_exponent()
            return inner
        self._unexpected(token)
        return DiffOp.zero()  # unreachable

    def _number(self, token: Token) -> sympy.Rational:
        after = self.tokens[self.index + 1] if self._peek().text == "/" else None
        if "." in token.text or after is None or after.kind != "num" or "." in after.text:
            return sympy.Rational(token.text)
        self._next()
        self._next()
        if int(after.text) == 0:
            raise OperatorParseError("division by zero", after.position)
        return sympy.Rational(int(token.text), int(after.text))

    def _exponent(self) -> int:
        if self._peek().text != "^":
            return 1
        self._next()
        token = self._next()
        if token.kind != "num" or "." in token.text:
            raise OperatorParseError(
                "exponent must be a non-negative integer", token.position
            )
        return int(token.text)

    def _reject_exponent(self) -> None:
        if self._peek().text == "^":
            raise OperatorParseError(
                "'^' applies only to dx, dy, x, y", self._peek().position
            )


def parse_operator(text: str) -> DiffOpMatrix:
    """
    Parse operator text into a normalized operator matrix.

    Args:
        text: Operator in the mini-language, scalar or 2x2 matrix form

    Returns:
        DiffOpMatrix; scalar input is wrapped with the `scalar` flag set

    Raises:
        OperatorParseError: On syntax errors, unknown identifiers or division
    """
    result = OperatorParser(text).parse()
    logger.debug(f"Parsed operator {text!r}")
    return result


def _format_rational(value: sympy.Rational) -> str:
    """Decimal text for a non-negative rational, or (p/q) when the expansion does not terminate."""
    value = sympy.Rational(value)
    p, q = int(value.p), int(value.q)
    twos = fives = 0
    rest = q
    while rest % 2 == 0:
        rest //= 2
        twos += 1
    while rest % 5 == 0:
        rest //= 5
        fives += 1
    if rest != 1:
        return f"({p}/{q})"
    digits = max(twos, fives)
    if digits == 0:
        return str(p)
    scaled = str(p * 10**digits // q).rjust(digits + 1, "0")
    whole, frac = scaled[:-digits], scaled[-digits:].rstrip("0")
    return f"{whole}.{frac}" if frac else whole


def _format_coefficient(coeff: sympy.Expr) -> Tuple[int, str]:
    """(sign, text) for a Gaussian-rational coefficient; text '1' means unit."""
    re_part, im_part = sympy.re(coeff), sympy.im(coeff)
    if im_part == 0:
        return (-1 if re_part < 0 else 1), _format_rational(abs(re_part))
    if re_part == 0:
        magnitude = abs(im_part)
        text = "i" if magnitude == 1 else f"{_format_rational(magnitude)}*i"
        return (-1 if im_part < 0 else 1), text
    sign = "-" if im_part < 0 else "+"
    imag = abs(im_part)
    imag_text = "i" if imag == 1 else f"{_format_rational(imag)}*i"
    real_text = ("-" if re_part < 0 else "") + _format_rational(abs(re_part))
    return 1, f"({real_text} {sign} {imag_text})"


def _power(name: str, n: int) -> List[str]:
    if n == 0:
        return []
    return [name if n == 1 else f"{name}^{n}"]


def pretty_print_op(op: DiffOp) -> str:
    """Canonical text for a scalar operator; `parse_operator` inverts it."""
    pieces: List[Tuple[int, str]] = []
    ordered = sorted(op.items, key=lambda item: (-sum(item[0]), -item[0][0]))
    for (ox, oy), coeff in ordered:
        for (a, b), c in sorted(coeff.terms.items(), key=lambda t: (-sum(t[0]), -t[0][0])):
            sign, number = _format_coefficient(c)
            factors = _power("x", a) + _power("y", b) + _power("dx", ox) + _power("dy", oy)
            if number != "1" or not factors:
                factors.insert(0, number)
            pieces.append((sign, "*".join(factors)))
    if not pieces:
        return "0"
    first_sign, first = pieces[0]
    text = ("-" if first_sign < 0 else "") + first
    for sign, body in pieces[1:]:
        text += f" {'-' if sign < 0 else '+'} {body}"
    return text


def pretty_print(m: DiffOpMatrix) -> str:
    """Canonical text for a scalar-flagged or 2x2 operator matrix."""
    if m.scalar:
        return pretty_print_op(m.op)
    rows = [f"[{pretty_print_op(a)}, {pretty_print_op(b)}]" for a, b in m.rows()]
    return f"[{rows[0]}, {rows[1]}]"
