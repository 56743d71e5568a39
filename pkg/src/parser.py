"""
Recursive-descent parsers for the asympl input grammars.

This module turns text into symbolic values:

    expr   := term (('+'|'-') term)*
    term   := wedge (('*'|'/') wedge)*
    wedge  := factor ('^' factor)*            (form/vector literals only)
    factor := base ('**' integer)?
    base   := integer | name | 'exp(' expr ')' | 'ln(' expr ')' | '(' expr ')' | '-' base
              | 'd'<coord> | '@'<coord>       (form/vector literals only)

Rationals such as `-4/7` are the negation and division of integer literals.
The scalar parser builds SymPy expressions; the literal parser routes every
semantic action through a `GradedAlgebra` supplied by the caller.
"""

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, List, Optional, Protocol, Tuple

import sympy

from src.models import Chart, ParseError, UnknownCoordinateError


RESERVED = frozenset({"exp", "ln"})
COMPARISONS = (">=", "<=", "!=", ">", "<")

_TOKEN_SPEC = [
    ("NUMBER", r"\d+"),
    ("VECTOR", r"@[A-Za-z][A-Za-z0-9_]*"),
    ("NAME", r"[A-Za-z][A-Za-z0-9_]*"),
    ("OP", r"\*\*|[+\-*/^(),]"),
    ("SPACE", r"\s+"),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{name}>{pattern})" for name, pattern in _TOKEN_SPEC))


@lru_cache(maxsize=None)
def coordinate_symbol(name: str) -> sympy.Symbol:
    """The SymPy symbol standing for a coordinate or parameter."""
    return sympy.Symbol(name, real=True)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    position: int


def tokenize(source: str) -> List[Token]:
    """
    Split source text into tokens.

    Raises:
        ParseError: On a character outside the grammar
    """
    tokens = []
    position = 0
    while position < len(source):
        match = _TOKEN_RE.match(source, position)
        if match is None:
            raise ParseError(f"unexpected character '{source[position]}'", position, source)
        kind = match.lastgroup
        if kind != "SPACE":
            tokens.append(Token(kind, match.group(), position))
        position = match.end()
    tokens.append(Token("END", "", len(source)))
    return tokens


class ScalarParser:
    """
    Parser for the scalar grammar over one chart.

    EXAMPLE USAGE:
    >>> ScalarParser(chart).parse("x1*x2 + exp(x3*x4)")
    x1*x2 + exp(x3*x4)
    """

    allow_wedge = False

    def __init__(self, chart: Chart):
        self.chart = chart
        self.source = ""
        self.tokens: List[Token] = []
        self.index = 0

    # -- driver ---------------------------------------------------------------

    def parse(self, source: str) -> Any:
        self.source = source
        self.tokens = tokenize(source)
        self.index = 0
        if self._peek().kind == "END":
            raise self._error("empty input")
        value = self._expr()
        if self._peek().kind != "END":
            raise self._error(f"unexpected '{self._peek().text}'")
        return value

    def _peek(self) -> Token:
        return self.tokens[self.index]

    def _next(self) -> Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def _accept(self, text: str) -> bool:
        if self._peek().kind == "OP" and self._peek().text == text:
            self.index += 1
            return True
        return False

    def _expect(self, text: str) -> None:
        if not self._accept(text):
            token = self._peek()
            raise self._error(f"expected '{text}' but found '{token.text or 'end of input'}'")

    def _error(self, message: str, token: Optional[Token] = None) -> ParseError:
        token = token or self._peek()
        return ParseError(message, token.position, self.source)

    # -- grammar --------------------------------------------------------------

    def _expr(self) -> Any:
        value = self._term()
        while True:
            if self._accept("+"):
                value = self._add(value, self._term())
            elif self._accept("-"):
                value = self._add(value, self._neg(self._term()))
            else:
                return value

    def _term(self) -> Any:
        value = self._wedge()
        while True:
            if self._accept("*"):
                value = self._mul(value, self._wedge())
            elif self._peek().text == "/" and self._peek().kind == "OP":
                token = self._next()
                value = self._div(value, self._wedge(), token)
            else:
                return value

    def _wedge(self) -> Any:
        value = self._factor()
        while self.allow_wedge and self._accept("^"):
            value = self._wedge_product(value, self._factor())
        return value

    def _factor(self) -> Any:
        # unary minus lives in base: -x1**2 is (-x1)**2
        value = self._base()
        if self._accept("**"):
            value = self._pow(value, self._integer())
        return value

    def _integer(self) -> int:
        parenthesized = self._accept("(")
        sign = -1 if self._accept("-") else 1
        token = self._next()
        if token.kind != "NUMBER":
            raise self._error("integer exponent expected", token)
        if parenthesized:
            self._expect(")")
        return sign * int(token.text)

    def _base(self) -> Any:
        token = self._next()
        if token.kind == "NUMBER":
            return self._number(int(token.text))
        if token.kind == "OP" and token.text == "-":
            return self._neg(self._base())
        if token.kind == "OP" and token.text == "(":
            value = self._expr()
            self._expect(")")
            return value
        if token.kind == "NAME" and token.text in RESERVED:
            self._expect("(")
            argument = self._expr()
            self._expect(")")
            return self._function(token.text, argument, token)
        if token.kind == "NAME":
            return self._name(token)
        if token.kind == "VECTOR":
            return self._vector(token)
        raise self._error(f"unexpected '{token.text or 'end of input'}'", token)

    # -- semantic actions (SymPy scalars) -------------------------------------

    def _number(self, value: int) -> Any:
        return sympy.Integer(value)

    def _name(self, token: Token) -> Any:
        if token.text not in self.chart.symbols:
            raise UnknownCoordinateError(token.text, self.chart)
        return coordinate_symbol(token.text)

    def _vector(self, token: Token) -> Any:
        raise self._error("basis vectors are not allowed in a scalar", token)

    def _add(self, left: Any, right: Any) -> Any:
        return left + right

    def _neg(self, value: Any) -> Any:
        return -value

    def _mul(self, left: Any, right: Any) -> Any:
        return left * right

    def _div(self, left: Any, right: Any, token: Token) -> Any:
        if sympy.cancel(right) == 0:
            raise self._error("division by zero", token)
        return left / right

    def _pow(self, value: Any, exponent: int) -> Any:
        if exponent < 0 and sympy.cancel(value) == 0:
            raise self._error("negative power of zero")
        return value ** exponent

    def _wedge_product(self, left: Any, right: Any) -> Any:
        raise self._error("'^' is only allowed in form literals")

    def _function(self, name: str, argument: Any, token: Token) -> Any:
        if name == "exp":
            return sympy.exp(argument)
        return sympy.log(argument)


class GradedAlgebra(Protocol):
    """Semantic actions the literal parser needs from the exterior module."""

    def scalar(self, value: sympy.Expr) -> Any: ...
    def basis_form(self, coord: str) -> Any: ...
    def basis_vector(self, coord: str) -> Any: ...
    def degree(self, value: Any) -> int: ...
    def to_scalar(self, value: Any) -> sympy.Expr: ...
    def wedge(self, left: Any, right: Any) -> Any: ...
    def add(self, left: Any, right: Any) -> Any: ...
    def scale(self, value: Any, factor: sympy.Expr) -> Any: ...


class LiteralParser(ScalarParser):
    """
    Parser for form and multivector literals, e.g. `x1*dx2^dx3 + x2*dx1^dx4`
    or `x1*@x1 - x2*@x2`. `*` between graded values is the wedge product.
    """

    allow_wedge = True

    def __init__(self, chart: Chart, algebra: GradedAlgebra):
        super().__init__(chart)
        self.algebra = algebra

    def _scalar_of(self, value: Any, what: str) -> sympy.Expr:
        if self.algebra.degree(value) != 0:
            raise self._error(f"{what} needs a scalar operand")
        return self.algebra.to_scalar(value)

    def _number(self, value: int) -> Any:
        return self.algebra.scalar(sympy.Integer(value))

    def _name(self, token: Token) -> Any:
        name = token.text
        if name in self.chart.symbols:
            return self.algebra.scalar(coordinate_symbol(name))
        if name.startswith("d") and name[1:] in self.chart.coords:
            return self.algebra.basis_form(name[1:])
        raise UnknownCoordinateError(name, self.chart)

    def _vector(self, token: Token) -> Any:
        name = token.text[1:]
        if name not in self.chart.coords:
            raise UnknownCoordinateError(name, self.chart)
        return self.algebra.basis_vector(name)

    def _add(self, left: Any, right: Any) -> Any:
        if self.algebra.degree(left) != self.algebra.degree(right):
            raise self._error("cannot add terms of different degree")
        return self.algebra.add(left, right)

    def _neg(self, value: Any) -> Any:
        return self.algebra.scale(value, sympy.Integer(-1))

    def _mul(self, left: Any, right: Any) -> Any:
        return self.algebra.wedge(left, right)

    def _wedge_product(self, left: Any, right: Any) -> Any:
        return self.algebra.wedge(left, right)

    def _div(self, left: Any, right: Any, token: Token) -> Any:
        divisor = self._scalar_of(right, "division")
        if sympy.cancel(divisor) == 0:
            raise self._error("division by zero", token)
        return self.algebra.scale(left, 1 / divisor)

    def _pow(self, value: Any, exponent: int) -> Any:
        return self.algebra.scalar(super()._pow(self._scalar_of(value, "'**'"), exponent))

    def _function(self, name: str, argument: Any, token: Token) -> Any:
        scalar = self._scalar_of(argument, f"'{name}'")
        return self.algebra.scalar(super()._function(name, scalar, token))


@dataclass(frozen=True)
class Constraint:
    """One domain-hint predicate: `expression op 0`."""

    expression: sympy.Expr
    op: str
    text: str


def parse_domain_hint(hint: Optional[str], chart: Chart) -> Tuple[Constraint, ...]:
    """
    Parse a domain hint such as "x1>0, x2>0" or "t0 > 0 and x1 != 1".

    Returns:
        Constraints normalized to `lhs - rhs  op  0`
    """
    if not hint or not hint.strip():
        return ()
    constraints = []
    for clause in re.split(r",|\band\b", hint):
        clause = clause.strip()
        if not clause:
            continue
        for op in COMPARISONS:
            if op in clause:
                lhs, rhs = clause.split(op, 1)
                parser = ScalarParser(chart)
                expression = parser.parse(lhs) - parser.parse(rhs)
                constraints.append(Constraint(expression, op, clause))
                break
        else:
            raise ParseError(f"domain clause '{clause}' has no comparison", 0, hint)
    return tuple(constraints)
