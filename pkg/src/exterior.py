"""
📖 CHAPTER 4: THE EXTERIOR ALGEBRA
==================================

Forms and multivector fields on one chart, stored sparsely on strictly
increasing index tuples. Zero coefficients are never stored, so comparing the
component maps decides equality.

Conventions:
    i(X) on a form:  (i(X)a)_{J} = X^j a_{jJ}  (antiderivation)
    i(X^Y)          = i(Y) o i(X); for a multivector basis e_{i1}^...^e_{ik}
                      the contraction by e_{i1} is applied first
    L_X             = d i(X) + i(X) d

EXAMPLE USAGE:
    omega = parse_form("x1*dx2^dx3 + x2*dx1^dx4", chart)
    assert ext_d(ext_d(omega)).is_zero
"""


from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Type, TypeVar, Union

import sympy

from src.expr import (
    Expr,
    SampleGenerator,
    canonicalize,
    diff_value,
    exact_value,
    number_of,
    to_text,
    values_equal,
    zero_test,
)
from src.linalg import nullspace
from src.logging_config import get_logger, log_performance
from src.models import (
    Chart,
    Condition,
    ChartMismatchError,
    DimensionError,
    EvaluationError,
    ParseError,
    SamplePoint,
    UnknownCoordinateError,
    condition_from_components,
)
from src.parser import LiteralParser, coordinate_symbol


logger = get_logger(__name__)

Index = Tuple[int, ...]
Scalar = Union[Expr, sympy.Expr, int]
G = TypeVar("G", bound="_Graded")


def _raw(value: Scalar) -> sympy.Expr:
    if isinstance(value, Expr):
        return value.value
    return sympy.sympify(value)


def sort_sign(indices: Sequence[int]) -> Tuple[Optional[Index], int]:
    """Sorted tuple and permutation sign; (None, 0) when an index repeats."""
    if len(set(indices)) != len(indices):
        return None, 0
    sign = 1
    for i in range(len(indices)):
        for j in range(i + 1, len(indices)):
            if indices[i] > indices[j]:
                sign = -sign
    return tuple(sorted(indices)), sign


@dataclass(frozen=True, eq=False)
class _Graded:
    """Shared storage of KForm and KVector."""

    chart: Chart
    degree: int
    components: Mapping[Index, sympy.Expr] = field(default_factory=dict)

    basis_prefix = ""

    def __post_init__(self) -> None:
        if self.degree < 0:
            raise DimensionError(f"negative degree {self.degree}")
        m = self.chart.dimension
        collected: Dict[Index, sympy.Expr] = {}
        if self.degree <= m:
            for key, value in dict(self.components).items():
                key = tuple(int(k) for k in key)
                if len(key) != self.degree:
                    raise DimensionError(
                        f"component {key} does not match degree {self.degree}"
                    )
                if any(k < 0 or k >= m for k in key):
                    raise DimensionError(f"component index {key} outside chart '{self.chart.name}'")
                ordered, sign = sort_sign(key)
                if ordered is None:
                    continue
                collected[ordered] = collected.get(ordered, sympy.Integer(0)) + sign * _raw(value)
        canonical = {}
        for key in sorted(collected):
            value = canonicalize(collected[key])
            if value != 0:
                canonical[key] = value
        object.__setattr__(self, "components", canonical)

    # -- constructors ---------------------------------------------------------

    @classmethod
    def zero(cls: Type[G], chart: Chart, degree: int) -> G:
        return cls(chart, degree, {})

    @classmethod
    def scalar(cls: Type[G], chart: Chart, value: Scalar) -> G:
        return cls(chart, 0, {(): _raw(value)})

    @classmethod
    def basis(cls: Type[G], chart: Chart, *coords: str) -> G:
        return cls(chart, len(coords), {tuple(chart.index(c) for c in coords): 1})

    # -- access ---------------------------------------------------------------

    def __getitem__(self, key: Union[Index, str, int]) -> sympy.Expr:
        if isinstance(key, str):
            key = (self.chart.index(key),)
        elif isinstance(key, int):
            key = (key,)
        ordered, sign = sort_sign(tuple(key))
        if ordered is None:
            return sympy.Integer(0)
        return canonicalize(sign * self.components.get(ordered, sympy.Integer(0)))

    def component(self, *coords: str) -> Expr:
        """Coefficient as an Expr, addressed by coordinate names."""
        return Expr(self.chart, self[tuple(self.chart.index(c) for c in coords)])

    def coefficient(self, i: int) -> sympy.Expr:
        return self[(i,)]

    @property
    def is_zero(self) -> bool:
        return not self.components

    def items(self):
        return self.components.items()

    def free_symbols(self) -> set:
        return set().union(*(v.free_symbols for v in self.components.values())) if self.components else set()

    # -- arithmetic -----------------------------------------------------------

    def _like(self: G, components: Mapping[Index, sympy.Expr], degree: Optional[int] = None) -> G:
        return type(self)(self.chart, self.degree if degree is None else degree, components)

    def _check(self, other: "_Graded") -> None:
        if type(other) is not type(self):
            raise TypeError(f"cannot combine {type(self).__name__} with {type(other).__name__}")
        if self.chart != other.chart:
            raise ChartMismatchError(self.chart, other.chart)

    def __add__(self: G, other: G) -> G:
        if isinstance(other, (int, sympy.Expr, Expr)) and self.degree == 0:
            other = type(self).scalar(self.chart, other)
        self._check(other)
        if other.degree != self.degree:
            raise DimensionError(f"cannot add degree {self.degree} and degree {other.degree}")
        merged = dict(self.components)
        for key, value in other.components.items():
            merged[key] = merged.get(key, sympy.Integer(0)) + value
        return self._like(merged)

    def __neg__(self: G) -> G:
        return self._like({k: -v for k, v in self.components.items()})

    def __sub__(self: G, other: G) -> G:
        return self + (-other)

    def __mul__(self: G, factor: Scalar) -> G:
        if isinstance(factor, _Graded):
            return NotImplemented
        if isinstance(factor, Expr):
            self.chart.require_same(factor.chart)
        value = _raw(factor)
        return self._like({k: v * value for k, v in self.components.items()})

    __rmul__ = __mul__

    def __truediv__(self: G, factor: Scalar) -> G:
        value = _raw(factor)
        if canonicalize(value) == 0:
            raise EvaluationError("division of a graded object by zero")
        return self._like({k: v / value for k, v in self.components.items()})

    def __xor__(self: G, other: G) -> G:
        return wedge(self, other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, _Graded):
            return NotImplemented
        if type(other) is not type(self) or self.chart != other.chart or self.degree != other.degree:
            return False
        keys = set(self.components) | set(other.components)
        return all(values_equal(self[k], other[k]) for k in keys)

    __hash__ = object.__hash__

    # -- printing -------------------------------------------------------------

    def _basis_text(self, key: Index) -> str:
        return "^".join(f"{self.basis_prefix}{self.chart.coords[i]}" for i in key)

    def to_text(self) -> str:
        """Render in the form-literal grammar; re-parses to an equal object."""
        if not self.components:
            return "0"
        terms = []
        for key, value in self.components.items():
            if not key:
                terms.append(to_text(value))
            elif value == 1:
                terms.append(self._basis_text(key))
            elif value == -1:
                terms.append(f"-{self._basis_text(key)}")
            else:
                terms.append(f"({to_text(value)})*{self._basis_text(key)}")
        return " + ".join(terms)

    def __str__(self) -> str:
        return self.to_text()

    def __repr__(self) -> str:
        return f"{type(self).__name__}[{self.degree}]({self.chart.name}: {self.to_text()})"


class KForm(_Graded):
    """
    Differential k-form on a chart.

    EXAMPLE USAGE:
    >>> omega = parse_form("x1*dx2^dx3 + x2*dx1^dx4", chart)
    >>> ext_d(omega).to_text()
    'dx1^dx2^dx3 + -dx1^dx2^dx4'
    """

    basis_prefix = "d"

    def scalar_value(self) -> Expr:
        if self.degree != 0:
            raise DimensionError(f"degree-{self.degree} form is not a function")
        return Expr(self.chart, self[()])


class KVector(_Graded):
    """Multivector field of degree k; degree 1 is a vector field."""

    basis_prefix = "@"

    @classmethod
    def from_list(cls, chart: Chart, values: Sequence[Scalar]) -> "KVector":
        if len(values) != chart.dimension:
            raise DimensionError(
                f"vector field needs {chart.dimension} components, got {len(values)}"
            )
        return cls(chart, 1, {(i,): _raw(v) for i, v in enumerate(values)})

    def as_list(self) -> List[sympy.Expr]:
        return [self[(i,)] for i in range(self.chart.dimension)]


VecField = KVector


# ============================================================================
# Algebra
# ============================================================================

def wedge(a: G, b: G) -> G:
    """Exterior product; degrees add, overflow gives the zero object."""
    a._check(b)
    result: Dict[Index, sympy.Expr] = {}
    for key_a, value_a in a.components.items():
        for key_b, value_b in b.components.items():
            ordered, sign = sort_sign(key_a + key_b)
            if ordered is None:
                continue
            result[ordered] = result.get(ordered, sympy.Integer(0)) + sign * value_a * value_b
    return a._like(result, a.degree + b.degree)


def power(a: KForm, n: int) -> KForm:
    """a^...^a (n factors); the constant 1 for n = 0."""
    result = KForm.scalar(a.chart, 1)
    for _ in range(n):
        result = wedge(result, a)
    return result


def ext_d(a: KForm) -> KForm:
    """Exterior derivative."""
    result: Dict[Index, sympy.Expr] = {}
    for key, value in a.components.items():
        for j, coord in enumerate(a.chart.coords):
            derivative = diff_value(value, coord)
            if derivative == 0:
                continue
            ordered, sign = sort_sign((j,) + key)
            if ordered is None:
                continue
            result[ordered] = result.get(ordered, sympy.Integer(0)) + sign * derivative
    return KForm(a.chart, a.degree + 1, result)


def differential(f: Expr) -> KForm:
    """df of a scalar function."""
    return ext_d(KForm.scalar(f.chart, f))


def _contract_vector(x: KVector, a: KForm) -> KForm:
    result: Dict[Index, sympy.Expr] = {}
    for key, value in a.components.items():
        for p, idx in enumerate(key):
            coefficient = x.components.get((idx,))
            if coefficient is None:
                continue
            rest = key[:p] + key[p + 1:]
            result[rest] = result.get(rest, sympy.Integer(0)) + (-1) ** p * coefficient * value
    return KForm(a.chart, a.degree - 1, result)


def interior(v: KVector, a: KForm) -> KForm:
    """
    Contraction of a form by a multivector field.

    Raises:
        ChartMismatchError: v and a live on different charts
        DimensionError: deg v > deg a
    """
    if v.chart != a.chart:
        raise ChartMismatchError(v.chart, a.chart)
    if v.degree > a.degree:
        raise DimensionError(f"cannot contract a degree-{a.degree} form by a {v.degree}-vector")
    if v.degree == 0:
        return a * v[()]
    if v.degree == 1:
        return _contract_vector(v, a)
    total = KForm.zero(a.chart, a.degree - v.degree)
    for key, coefficient in v.components.items():
        partial = a
        for idx in key:
            partial = _contract_vector(KVector(a.chart, 1, {(idx,): 1}), partial)
        total = total + partial * coefficient
    return total


def apply_field(x: VecField, f: Scalar) -> sympy.Expr:
    """X(f) = X^j d_j f."""
    value = _raw(f)
    total = sympy.Integer(0)
    for (j,), coefficient in x.components.items():
        total += coefficient * diff_value(value, x.chart.coords[j])
    return canonicalize(total)


def lie_derivative(x: VecField, a: KForm) -> KForm:
    """Cartan formula L_X a = d i(X) a + i(X) d a."""
    if x.chart != a.chart:
        raise ChartMismatchError(x.chart, a.chart)
    if a.degree == 0:
        return KForm.scalar(a.chart, apply_field(x, a[()]))
    return ext_d(interior(x, a)) + interior(x, ext_d(a))


def vf_bracket(x: VecField, y: VecField) -> VecField:
    """[X,Y]^i = X(Y^i) - Y(X^i)."""
    if x.chart != y.chart:
        raise ChartMismatchError(x.chart, y.chart)
    return KVector(x.chart, 1, {
        (i,): apply_field(x, y[(i,)]) - apply_field(y, x[(i,)])
        for i in range(x.chart.dimension)
    })


def form_pairing(a: KForm, x: VecField, y: VecField) -> Expr:
    """a(X, Y) = i(Y) i(X) a for a 2-form."""
    return interior(y, interior(x, a)).scalar_value()


# ============================================================================
# Maps between charts
# ============================================================================

@dataclass(frozen=True, eq=False)
class MapExpr:
    """
    Smooth map source -> target given by one source expression per target
    coordinate. Target parameters must also be parameters of the source.
    """

    source: Chart
    target: Chart
    components: Tuple[sympy.Expr, ...]

    def __post_init__(self) -> None:
        values = tuple(canonicalize(_raw(c)) for c in self.components)
        if len(values) != self.target.dimension:
            raise DimensionError(
                f"map needs {self.target.dimension} components, got {len(values)}",
                details={"target": self.target.name},
            )
        allowed = {coordinate_symbol(n) for n in self.source.symbols}
        for value in values:
            for symbol in value.free_symbols:
                if symbol not in allowed:
                    raise UnknownCoordinateError(str(symbol), self.source)
        for param in self.target.params:
            if param not in self.source.symbols:
                raise ChartMismatchError(self.source, self.target)
        object.__setattr__(self, "components", values)

    def substitution(self) -> Dict[sympy.Symbol, sympy.Expr]:
        mapping = {coordinate_symbol(c): v for c, v in zip(self.target.coords, self.components)}
        for param in self.target.params:
            mapping[coordinate_symbol(param)] = coordinate_symbol(param)
        return mapping

    def pull_scalar(self, value: Scalar) -> sympy.Expr:
        """value o F, rejecting ln arguments that become non-positive constants."""
        value = _raw(value)
        mapping = self.substitution()
        for atom in value.atoms(sympy.log):
            argument = canonicalize(atom.args[0].xreplace(mapping))
            if argument.is_number and not argument.is_positive:
                raise EvaluationError(
                    "pullback produces ln of a non-positive value",
                    details={"argument": to_text(atom.args[0]), "becomes": to_text(argument)},
                )
            verdict = zero_test(argument, self.source)
            if verdict.is_zero:
                raise EvaluationError("pullback produces ln(0)", details={"argument": to_text(atom.args[0])})
        return canonicalize(value.xreplace(mapping))

    def differentials(self) -> List[KForm]:
        return [ext_d(KForm.scalar(self.source, c)) for c in self.components]

    def to_text(self) -> str:
        return ", ".join(f"{c} = {to_text(v)}" for c, v in zip(self.target.coords, self.components))

    def __repr__(self) -> str:
        return f"MapExpr({self.source.name} -> {self.target.name}: {self.to_text()})"


def identity_map(chart: Chart) -> MapExpr:
    return MapExpr(chart, chart, tuple(coordinate_symbol(c) for c in chart.coords))


def compose(g: MapExpr, f: MapExpr) -> MapExpr:
    """G o F."""
    if f.target != g.source:
        raise ChartMismatchError(f.target, g.source)
    return MapExpr(f.source, g.target, tuple(f.pull_scalar(c) for c in g.components))


def pullback(f: MapExpr, a: KForm) -> KForm:
    """
    F*a: coefficients composed with F, basis 1-forms replaced by d(F^t).

    Raises:
        ChartMismatchError: a does not live on F's target
        EvaluationError: substitution yields ln of a non-positive constant
    """
    if a.chart != f.target:
        raise ChartMismatchError(a.chart, f.target)
    differentials = f.differentials()
    total = KForm.zero(f.source, a.degree)
    for key, value in a.components.items():
        term = KForm.scalar(f.source, f.pull_scalar(value))
        for idx in key:
            term = wedge(term, differentials[idx])
        total = total + term
    return total


# ============================================================================
# Evaluation
# ============================================================================

def evaluate_form(a: _Graded, point: SamplePoint) -> Dict[Index, sympy.Expr]:
    """Exact component values at a sample point (exp/ln of rationals stay symbolic)."""
    a.chart.require_same(point.chart)
    return {key: exact_value(value, point) for key, value in a.components.items()}


def evaluate_field(x: VecField, point: SamplePoint) -> List[sympy.Expr]:
    values = evaluate_form(x, point)
    return [values.get((i,), sympy.Integer(0)) for i in range(x.chart.dimension)]


def evaluate_numbers(a: _Graded, point: SamplePoint) -> Dict[Index, float]:
    return {key: float(number_of(v)) for key, v in evaluate_form(a, point).items()}


# ============================================================================
# Kernels
# ============================================================================

@dataclass
class ContractionKernel:
    """Kernel of X -> i(X)eta over the function field."""

    fields: List[VecField]
    pivots: List[Expr]
    dimension: int
    rank: int


def contraction_matrix(eta: KForm) -> Tuple[List[List[sympy.Expr]], List[Index]]:
    """Rows indexed by (k-1)-tuples J, columns by i: entry (i(e_i)eta)_J."""
    m = eta.chart.dimension
    rows_keys = list(combinations(range(m), eta.degree - 1))
    columns = [_contract_vector(KVector(eta.chart, 1, {(i,): 1}), eta) for i in range(m)]
    matrix = [[columns[i][key] for i in range(m)] for key in rows_keys]
    return matrix, rows_keys


@log_performance(logger)
def kernel_of_contraction(eta: KForm) -> ContractionKernel:
    """
    Basis of {X : i(X)eta = 0} over the fraction field, with the generic-rank
    pivots certifying it.

    Raises:
        DimensionError: eta has degree 0
        IndeterminateError: a pivot column cannot be decided
    """
    if eta.degree == 0:
        raise DimensionError("cannot contract a function")
    matrix, _ = contraction_matrix(eta)
    result = nullspace(matrix, eta.chart, columns=eta.chart.dimension)
    fields = [KVector.from_list(eta.chart, vector) for vector in result.basis]
    logger.debug(f"kernel of contraction: dimension {result.dimension}, rank {result.rank}")
    return ContractionKernel(
        fields=fields,
        pivots=[Expr(eta.chart, p) for p in result.pivots],
        dimension=result.dimension,
        rank=result.rank,
    )


# ============================================================================
# Literal parsing
# ============================================================================

class _GradedAlgebra:
    """Semantic actions of the literal parser for one graded type."""

    def __init__(self, chart: Chart, kind: Type[_Graded]):
        self.chart = chart
        self.kind = kind

    def scalar(self, value: sympy.Expr) -> _Graded:
        return self.kind.scalar(self.chart, value)

    def basis_form(self, coord: str) -> _Graded:
        if self.kind is not KForm:
            raise ParseError(f"basis form 'd{coord}' in a vector literal")
        return KForm.basis(self.chart, coord)

    def basis_vector(self, coord: str) -> _Graded:
        if self.kind is not KVector:
            raise ParseError(f"basis vector '@{coord}' in a form literal")
        return KVector.basis(self.chart, coord)

    def degree(self, value: _Graded) -> int:
        return value.degree

    def to_scalar(self, value: _Graded) -> sympy.Expr:
        return value[()]

    def wedge(self, left: _Graded, right: _Graded) -> _Graded:
        return wedge(left, right)

    def add(self, left: _Graded, right: _Graded) -> _Graded:
        return left + right

    def scale(self, value: _Graded, factor: sympy.Expr) -> _Graded:
        return value * factor


def parse_form(src: str, chart: Chart) -> KForm:
    """Parse a form literal such as `x1*dx2^dx3 + x2*dx1^dx4`."""
    return LiteralParser(chart, _GradedAlgebra(chart, KForm)).parse(src)


def parse_field(src: str, chart: Chart) -> KVector:
    """Parse a multivector literal such as `@x3 + @x4`."""
    return LiteralParser(chart, _GradedAlgebra(chart, KVector)).parse(src)


def random_points(chart: Chart, count: int, seed: Optional[int] = None) -> List[SamplePoint]:
    return SampleGenerator(chart, seed).points(count)


def vanishing_condition(name: str, a: _Graded) -> Condition:
    """Condition `a = 0`, witnessed by the first component found nonzero."""
    verdicts = {}
    for key, value in a.components.items():
        label = a._basis_text(key) or "scalar"
        verdicts[label] = (zero_test(value, a.chart), to_text(value))
    return condition_from_components(name, verdicts)


def scalar_condition(name: str, value: Scalar, chart: Chart) -> Condition:
    """Condition `value = 0` for a scalar."""
    raw = canonicalize(_raw(value))
    return condition_from_components(name, {"scalar": (zero_test(raw, chart), to_text(raw))})
