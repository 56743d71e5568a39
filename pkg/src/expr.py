"""
📖 CHAPTER 2: THE ALPHABET - SYMBOLIC SCALARS
=============================================

STORY: Deciding Whether Something Is Zero
-----------------------------------------
Every identity asympl checks ends the same way: some scalar function is
claimed to vanish. This chapter builds that scalar. An `Expr` is a rational
expression in the chart coordinates (and parameters), extended by exp/ln
atoms. Its canonical form is a reduced fraction of polynomials whose
generators are the coordinates and the transcendental atoms, after

    exp(p)*exp(q) -> exp(p+q),  exp(0) -> 1,  ln(1) -> 0

with atom arguments canonicalized recursively.

The zero-test answers in three ways:
- "zero" only when the canonical form is syntactically 0
- "nonzero" with a sample point where the value is visibly nonzero
- "indeterminate" when the sample budget runs out without a witness

Printing goes back through the input grammar, so `-(x1**2)` keeps its
parentheses: the parser reads `-x1**2` as `(-x1)**2`.

LEARNING OBJECTIVES:
-------------------
✓ Wrapping a SymPy value in a chart-aware, immutable type
✓ Seeded sampling with numpy for reproducible witnesses
✓ Subclassing a SymPy printer instead of post-processing strings
"""


from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterator, List, Optional, Tuple, Union

import numpy as np
import sympy
from sympy.printing.str import StrPrinter

from src.config import DEFAULT_SETTINGS, Settings
from src.logging_config import get_logger
from src.models import (
    Chart,
    EvaluationError,
    SamplePoint,
    UnknownCoordinateError,
    ZeroVerdict,
)
from src.parser import (
    RESERVED,
    Constraint,
    ScalarParser,
    coordinate_symbol,
    parse_domain_hint,
    tokenize,
)


logger = get_logger(__name__)

Number = Union[Fraction, float]

_MAX_PASSES = 4
_MAX_DRAWS = 20000
_MAX_NUMERATOR = 8
_MAX_DENOMINATOR = 16

_zero_settings: Settings = DEFAULT_SETTINGS


def configure(settings: Settings) -> None:
    """Install the seed, sample budget and tolerance used by the zero-test."""
    global _zero_settings
    _zero_settings = settings
    _cached_zero_test.cache_clear()


# ============================================================================
# Canonical form
# ============================================================================

def _canonical_atom(atom: sympy.Expr) -> sympy.Expr:
    return atom.func(canonicalize(atom.args[0]))


def _rewrite(value: sympy.Expr) -> sympy.Expr:
    if value.is_Number:
        return value
    value = value.replace(
        lambda node: isinstance(node, (sympy.exp, sympy.log)),
        _canonical_atom,
    )
    value = sympy.expand(value, power_exp=False, power_base=False, log=False)
    value = sympy.powsimp(value, combine="exp")
    try:
        return sympy.cancel(value)
    except sympy.PolynomialError:
        return sympy.together(value)


@lru_cache(maxsize=65536)
def canonicalize(value: sympy.Expr) -> sympy.Expr:
    """
    Canonical form of a SymPy scalar; idempotent.

    Example:
        >>> canonicalize(exp(x1)*exp(-x1) - 1)
        0
    """
    value = sympy.sympify(value)
    for _ in range(_MAX_PASSES):
        rewritten = _rewrite(value)
        if rewritten == value:
            break
        value = rewritten
    return value


class GrammarPrinter(StrPrinter):
    """StrPrinter emitting the scalar grammar (ln instead of log, no E)."""

    def _print_log(self, expr) -> str:
        return f"ln({self._print(expr.args[0])})"

    def _print_Exp1(self, expr) -> str:
        return "exp(1)"

    def _print_Mul(self, expr) -> str:
        text = super()._print_Mul(expr)
        if text.startswith("-") and _leads_with_power(text[1:]):
            return f"-({text[1:]})"
        return text

    def _print_Add(self, expr, order=None) -> str:
        text = ""
        for term in self._as_ordered_terms(expr, order=order):
            if not text:
                text = self._print(term)
            elif term.could_extract_minus_sign():
                text += f" - {self._print(-term)}"
            else:
                text += f" + {self._print(term)}"
        return text


def _leads_with_power(text: str) -> bool:
    """Whether text opens with `base ** n`, which a leading '-' would negate before the power."""
    tokens = tokenize(text)
    index = 0
    if tokens[0].kind == "NAME" and tokens[0].text in RESERVED:
        index = 1
    if tokens[index].text == "(":
        depth = 0
        while tokens[index].kind != "END":
            depth += {"(": 1, ")": -1}.get(tokens[index].text, 0)
            index += 1
            if depth == 0:
                break
    else:
        index += 1
    return tokens[index].text == "**"


_PRINTER = GrammarPrinter()


def to_text(value: sympy.Expr) -> str:
    """Render a SymPy scalar in the scalar grammar."""
    return _PRINTER.doprint(value)


# ============================================================================
# Expr
# ============================================================================

@dataclass(frozen=True, eq=False)
class Expr:
    """
    A canonicalized scalar function on a chart.

    EXAMPLE USAGE:
    >>> f = parse_scalar("x1*x2", chart)
    >>> differentiate(f, "x1").to_text()
    'x2'
    """

    chart: Chart
    value: sympy.Expr

    def __post_init__(self) -> None:
        value = canonicalize(sympy.sympify(self.value))
        allowed = {coordinate_symbol(name) for name in self.chart.symbols}
        for symbol in value.free_symbols:
            if symbol not in allowed:
                raise UnknownCoordinateError(str(symbol), self.chart)
        object.__setattr__(self, "value", value)

    @classmethod
    def constant(cls, chart: Chart, value) -> "Expr":
        return cls(chart, sympy.Rational(value) if isinstance(value, (int, Fraction, str)) else value)

    @classmethod
    def coordinate(cls, chart: Chart, name: str) -> "Expr":
        if name not in chart.symbols:
            raise UnknownCoordinateError(name, chart)
        return cls(chart, coordinate_symbol(name))

    def _coerce(self, other) -> sympy.Expr:
        if isinstance(other, Expr):
            self.chart.require_same(other.chart)
            return other.value
        return sympy.sympify(other)

    def __add__(self, other) -> "Expr":
        return Expr(self.chart, self.value + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other) -> "Expr":
        return Expr(self.chart, self.value - self._coerce(other))

    def __rsub__(self, other) -> "Expr":
        return Expr(self.chart, self._coerce(other) - self.value)

    def __mul__(self, other) -> "Expr":
        return Expr(self.chart, self.value * self._coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Expr":
        divisor = self._coerce(other)
        if canonicalize(divisor) == 0:
            raise EvaluationError("division by the zero expression")
        return Expr(self.chart, self.value / divisor)

    def __neg__(self) -> "Expr":
        return Expr(self.chart, -self.value)

    def __pow__(self, exponent: int) -> "Expr":
        return Expr(self.chart, self.value ** int(exponent))

    def __eq__(self, other) -> bool:
        if isinstance(other, Expr):
            return self.chart == other.chart and canonicalize(self.value - other.value) == 0
        if isinstance(other, (int, Fraction, sympy.Basic)):
            return canonicalize(self.value - sympy.sympify(other)) == 0
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.chart, self.value))

    @property
    def is_syntactically_zero(self) -> bool:
        return self.value == 0

    def diff(self, coord: str) -> "Expr":
        return differentiate(self, coord)

    def to_text(self) -> str:
        return to_text(self.value)

    def __str__(self) -> str:
        return self.to_text()

    def __repr__(self) -> str:
        return f"Expr({self.chart.name}: {self.to_text()})"


def parse_scalar(src: str, chart: Chart) -> Expr:
    """
    Parse the scalar grammar on a chart.

    Raises:
        ParseError: Syntax error, with position
        UnknownCoordinateError: A name that is not a coordinate or parameter
    """
    return Expr(chart, ScalarParser(chart).parse(src))


def differentiate(e: Expr, coord: str) -> Expr:
    """Exact partial derivative with respect to a coordinate of e's chart."""
    if coord not in e.chart.coords:
        raise UnknownCoordinateError(coord, e.chart)
    return Expr(e.chart, diff_value(e.value, coord))


def diff_value(value: sympy.Expr, coord: str) -> sympy.Expr:
    return canonicalize(sympy.diff(value, coordinate_symbol(coord)))


# ============================================================================
# Evaluation
# ============================================================================

def _substitution(point: SamplePoint) -> Dict[sympy.Symbol, sympy.Rational]:
    return {
        coordinate_symbol(name): sympy.Rational(v.numerator, v.denominator)
        for name, v in point.as_dict().items()
    }


def exact_value(value: sympy.Expr, point: SamplePoint) -> sympy.Expr:
    """
    Exact SymPy number of a scalar at a point (exp/ln of rationals stay symbolic).

    Raises:
        EvaluationError: Division by zero or ln of a non-positive value at the point
    """
    mapping = _substitution(point)
    for atom in value.atoms(sympy.log):
        argument = atom.args[0].xreplace(mapping)
        if argument.has(sympy.zoo, sympy.nan) or not argument.is_positive:
            raise EvaluationError(
                f"ln of non-positive value at {point}",
                details={"argument": to_text(atom.args[0])},
            )
    numerator, denominator = sympy.fraction(value)
    if denominator != 1 and denominator.xreplace(mapping) == 0:
        raise EvaluationError(f"division by zero at {point}", details={"denominator": to_text(denominator)})
    result = value.xreplace(mapping)
    if result.has(sympy.zoo, sympy.nan, sympy.oo, -sympy.oo):
        raise EvaluationError(f"division by zero at {point}")
    return result


def number_of(value: sympy.Expr) -> Number:
    """Exact Fraction for rational SymPy numbers, float otherwise."""
    if value.is_Rational:
        return Fraction(int(value.p), int(value.q))
    return float(value.evalf(17))


def eval_at(e: Expr, point: SamplePoint) -> Number:
    """
    Value of e at a sample point: exact rational when no exp/ln survives,
    floating otherwise.
    """
    e.chart.require_same(point.chart)
    return number_of(exact_value(e.value, point))


def numeric_derivative(e: Expr, coord: str, point: SamplePoint, h: float = 1e-4) -> float:
    """Central finite difference of e along a coordinate at a point."""
    symbols = {coordinate_symbol(n): float(v) for n, v in point.as_dict().items()}
    target = coordinate_symbol(coord)
    f = sympy.lambdify(list(symbols), e.value, modules="numpy")
    plus = [v + h if s == target else v for s, v in symbols.items()]
    minus = [v - h if s == target else v for s, v in symbols.items()]
    return float((f(*plus) - f(*minus)) / (2 * h))


# ============================================================================
# Sample points
# ============================================================================

def _satisfies(constraint: Constraint, point: SamplePoint) -> bool:
    try:
        value = number_of(exact_value(constraint.expression, point))
    except EvaluationError:
        return False
    return {
        ">": value > 0,
        ">=": value >= 0,
        "<": value < 0,
        "<=": value <= 0,
        "!=": value != 0,
    }[constraint.op]


class SampleGenerator:
    """
    Seeded generator of rational sample points honoring a chart's domain hint.
    Values have denominators ≤ 16 and magnitudes ≤ 8.
    """

    def __init__(self, chart: Chart, seed: Optional[int] = None):
        self.chart = chart
        self.constraints = parse_domain_hint(chart.domain_hint, chart)
        self.rng = np.random.default_rng(_zero_settings.seed if seed is None else seed)

    def _value(self) -> Fraction:
        q = int(self.rng.integers(1, _MAX_DENOMINATOR + 1))
        p = int(self.rng.integers(-_MAX_NUMERATOR * q, _MAX_NUMERATOR * q + 1))
        return Fraction(p, q)

    def draw(self) -> SamplePoint:
        for _ in range(_MAX_DRAWS):
            point = SamplePoint.of(self.chart, [self._value() for _ in self.chart.symbols])
            if all(_satisfies(c, point) for c in self.constraints):
                return point
        raise EvaluationError(
            f"no sample point satisfies the domain hint of chart '{self.chart.name}'",
            details={"domain_hint": self.chart.domain_hint},
        )

    def points(self, count: int) -> List[SamplePoint]:
        return [self.draw() for _ in range(count)]

    def __iter__(self) -> Iterator[SamplePoint]:
        while True:
            yield self.draw()


# ============================================================================
# Zero-test
# ============================================================================

@lru_cache(maxsize=16384)
def _cached_zero_test(value: sympy.Expr, chart: Chart) -> ZeroVerdict:
    if value == 0:
        return ZeroVerdict(ZeroVerdict.ZERO)
    generator = SampleGenerator(chart)
    for _ in range(_zero_settings.zero_samples):
        point = generator.draw()
        try:
            number = number_of(exact_value(value, point))
        except EvaluationError:
            continue
        if abs(number) > _zero_settings.tolerance:
            return ZeroVerdict(ZeroVerdict.NONZERO, witness=point, value=float(number))
    logger.warning(
        f"zero-test indeterminate after {_zero_settings.zero_samples} samples: {to_text(value)}",
        extra={"chart": chart.name},
    )
    return ZeroVerdict(ZeroVerdict.INDETERMINATE)


def zero_test(value: sympy.Expr, chart: Chart) -> ZeroVerdict:
    """Zero-test on a raw SymPy scalar living on a chart."""
    return _cached_zero_test(canonicalize(sympy.sympify(value)), chart)


def is_zero(e: Expr) -> ZeroVerdict:
    """
    Sound zero-test: "zero" only for a syntactically zero canonical form,
    "nonzero" with a witness point, "indeterminate" when no witness is found
    within the configured sample budget.
    """
    return zero_test(e.value, e.chart)


def values_equal(left: sympy.Expr, right: sympy.Expr) -> bool:
    """Syntactic equality of canonical forms of the difference."""
    return canonicalize(sympy.sympify(left) - sympy.sympify(right)) == 0


def free_coordinates(value: sympy.Expr, chart: Chart) -> Tuple[str, ...]:
    names = {str(s) for s in value.free_symbols}
    return tuple(c for c in chart.coords if c in names)
