"""
📖 CHAPTER 1: THE FOUNDATION - SHARED DATA MODELS
=================================================

Every computation in asympl starts from a coordinate chart and ends in a
verdict. This module holds the blueprints that travel between the modules:

1. Chart        - named coordinates (plus symbolic parameters) of one patch
2. SamplePoint  - exact rational values for every coordinate of a chart
3. Witness      - where and how a claimed identity fails
4. Condition    - one tested identity with its outcome
5. Verdict      - the conjunction of several conditions
6. ZeroVerdict  - the three-valued answer of the zero-test
7. GeometryError and its subclasses - everything that can go wrong

LEARNING OBJECTIVES:
-------------------
✓ Frozen dataclasses for values that must never change after construction
✓ Properties for derived facts (dimension, passed, failing)
✓ Exception hierarchies carrying machine-readable codes
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, Tuple

import re


_COORD_NAME = re.compile(r"^[A-Za-z][A-Za-z0-9_]*$")


# ============================================================================
# BLUEPRINT 1: GeometryError - When Things Go Wrong
# ============================================================================

@dataclass
class GeometryError(Exception):
    """
    Base exception for every failure raised by asympl.

    📝 ERROR CODES WE USE:
    ----------------------
    - PARSE_ERROR: grammar violation in a scalar, form or manifest value
    - UNKNOWN_COORDINATE: a name that is not a coordinate of the chart
    - CHART_MISMATCH: operands living on different charts
    - DIMENSION_ERROR: odd dimension, n < 2, or a degree that does not fit
    - DEGENERATE_FORM: a 2-form (or metric) whose determinant vanishes identically
    - EVALUATION_ERROR: division by zero or ln of a non-positive value at a point
    - INDETERMINATE: a nonzero canonical form without a numeric witness
    - PRECONDITION_FAILED: an operation's mathematical precondition does not hold
    - CONVENTION_ERROR: an internal reconstruction or cross-check failed
    - MANIFEST_ERROR: malformed manifest or dangling reference

    EXAMPLE USAGE:
    >>> raise GeometryError(code="DEGENERATE_FORM", message="det(ω) ≡ 0")
    """

    code: str
    message: str
    details: Optional[Dict[str, Any]] = None

    INPUT_CODES = frozenset({
        "PARSE_ERROR",
        "UNKNOWN_COORDINATE",
        "CHART_MISMATCH",
        "DIMENSION_ERROR",
        "MANIFEST_ERROR",
    })

    def __post_init__(self) -> None:
        super().__init__(self.message)

    @property
    def is_input_error(self) -> bool:
        """True when the failure is caused by the input rather than the mathematics."""
        return self.code in self.INPUT_CODES

    def __str__(self) -> str:
        error_str = f"[{self.code}] {self.message}"
        if self.details:
            error_str += f" | Details: {self.details}"
        return error_str


class ParseError(GeometryError):
    """Grammar violation, reported with the offending position."""

    def __init__(self, message: str, position: int = 0, source: str = ""):
        super().__init__(
            code="PARSE_ERROR",
            message=f"{message} at position {position}",
            details={"position": position, "source": source},
        )
        self.position = position


class UnknownCoordinateError(GeometryError):
    """A name that is not a coordinate (or parameter) of the chart."""

    def __init__(self, name: str, chart: "Chart"):
        super().__init__(
            code="UNKNOWN_COORDINATE",
            message=f"'{name}' is not a coordinate of chart '{chart.name}'",
            details={"coords": list(chart.coords)},
        )


class ChartMismatchError(GeometryError):
    """Operands of a binary operation live on different charts."""

    def __init__(self, left: "Chart", right: "Chart"):
        super().__init__(
            code="CHART_MISMATCH",
            message=f"chart '{left.name}' does not match chart '{right.name}'",
        )


class DimensionError(GeometryError):
    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(code="DIMENSION_ERROR", message=message, details=details)


class DegenerateFormError(GeometryError):
    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(code="DEGENERATE_FORM", message=message, details=details)


class EvaluationError(GeometryError):
    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(code="EVALUATION_ERROR", message=message, details=details)


class IndeterminateError(GeometryError):
    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(code="INDETERMINATE", message=message, details=details)


class PreconditionError(GeometryError):
    """The mathematical precondition of an operation failed; carries the verdict."""

    def __init__(self, message: str, verdict: Optional["Verdict"] = None):
        super().__init__(
            code="PRECONDITION_FAILED",
            message=message,
            details={"failing": [c.name for c in verdict.failing]} if verdict else None,
        )
        self.verdict = verdict


class ConventionError(GeometryError):
    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(code="CONVENTION_ERROR", message=message, details=details)


class ManifestError(GeometryError):
    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(code="MANIFEST_ERROR", message=message, details=details)


# ============================================================================
# BLUEPRINT 2: Chart - Where Coordinates Live
# ============================================================================

@dataclass(frozen=True)
class Chart:
    """
    A coordinate patch: ordered coordinate names, optional symbolic parameters,
    and an optional domain hint used only to draw valid sample points.

    Parameters (for instance the level value t0 of a momentum level set) are
    constants for differentiation but are sampled like coordinates.

    EXAMPLE USAGE:
    >>> chart = Chart("M", ("x1", "x2", "x3", "x4"), domain_hint="x1>0, x2>0")
    >>> chart.dimension
    4
    """

    name: str
    coords: Tuple[str, ...]
    domain_hint: Optional[str] = None
    params: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "coords", tuple(self.coords))
        object.__setattr__(self, "params", tuple(self.params))
        if not self.coords:
            raise DimensionError(f"chart '{self.name}' needs at least one coordinate")
        names = self.coords + self.params
        for name in names:
            if not _COORD_NAME.match(name):
                raise DimensionError(f"invalid coordinate name '{name}'")
        if len(set(names)) != len(names):
            raise DimensionError(
                f"chart '{self.name}' has repeated coordinate names",
                details={"coords": list(names)},
            )

    @property
    def dimension(self) -> int:
        return len(self.coords)

    @property
    def symbols(self) -> Tuple[str, ...]:
        """Coordinates followed by parameters: everything a sample point assigns."""
        return self.coords + self.params

    def index(self, coord: str) -> int:
        """Position of a coordinate; parameters have no index."""
        try:
            return self.coords.index(coord)
        except ValueError:
            raise UnknownCoordinateError(coord, self) from None

    def require_same(self, other: "Chart") -> None:
        if self != other:
            raise ChartMismatchError(self, other)

    def __str__(self) -> str:
        return f"{self.name}({', '.join(self.coords)})"


# ============================================================================
# BLUEPRINT 3: SamplePoint - Exact Rational Evaluation Sites
# ============================================================================

@dataclass(frozen=True)
class SamplePoint:
    """
    One exact rational value for every coordinate and parameter of a chart.

    EXAMPLE USAGE:
    >>> p = SamplePoint.of(chart, [2, 3, 0, 0])
    >>> p["x1"]
    Fraction(2, 1)
    """

    chart: Chart
    values: Tuple[Fraction, ...]

    def __post_init__(self) -> None:
        values = tuple(Fraction(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if len(values) != len(self.chart.symbols):
            raise DimensionError(
                f"sample point has {len(values)} values, chart '{self.chart.name}' "
                f"needs {len(self.chart.symbols)}"
            )

    @classmethod
    def of(cls, chart: Chart, values) -> "SamplePoint":
        return cls(chart, tuple(values))

    def __getitem__(self, name: str) -> Fraction:
        return self.values[self.chart.symbols.index(name)]

    def as_dict(self) -> Dict[str, Fraction]:
        return dict(zip(self.chart.symbols, self.values))

    def to_text(self) -> str:
        return ", ".join(f"{n}={v}" for n, v in zip(self.chart.symbols, self.values))

    def __str__(self) -> str:
        return f"({self.to_text()})"


# ============================================================================
# BLUEPRINT 4: Witness, Condition, Verdict - Reporting Outcomes
# ============================================================================

@dataclass(frozen=True)
class Witness:
    """
    Evidence that an identity fails: the offending component, its canonical
    expression, and a sample point where it is numerically nonzero.
    """

    component: str
    expression: str
    point: Optional[SamplePoint] = None
    value: Optional[float] = None

    def __str__(self) -> str:
        where = f" at {self.point}" if self.point is not None else ""
        return f"{self.component} = {self.expression}{where}"


@dataclass(frozen=True)
class Condition:
    """One tested identity and its outcome."""

    name: str
    holds: bool
    witness: Optional[Witness] = None
    indeterminate: bool = False

    def __str__(self) -> str:
        mark = "✓" if self.holds else ("?" if self.indeterminate else "✗")
        text = f"{mark} {self.name}"
        if self.witness is not None:
            text += f"  [{self.witness}]"
        return text


@dataclass
class Verdict:
    """
    Conjunction of conditions. `cross_checks` hold secondary computations of the
    same mathematics; they never change `passed` but are reported and checked
    for agreement.
    """

    subject: str
    conditions: List[Condition] = field(default_factory=list)
    cross_checks: List[Condition] = field(default_factory=list)
    outputs: Dict[str, str] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.holds for c in self.conditions)

    @property
    def failing(self) -> List[Condition]:
        return [c for c in self.conditions if not c.holds]

    @property
    def witnesses(self) -> List[Witness]:
        return [c.witness for c in self.conditions + self.cross_checks if c.witness is not None]

    def condition(self, name: str) -> Condition:
        for cond in self.conditions + self.cross_checks:
            if cond.name == name:
                return cond
        raise KeyError(name)

    def add(self, condition: Condition) -> "Verdict":
        self.conditions.append(condition)
        return self

    def __bool__(self) -> bool:
        return self.passed

    def __str__(self) -> str:
        return f"Verdict({self.subject}: {'pass' if self.passed else 'fail'}, {len(self.conditions)} conditions)"


# ============================================================================
# BLUEPRINT 5: ZeroVerdict - The Three-Valued Zero-Test
# ============================================================================

@dataclass(frozen=True)
class ZeroVerdict:
    """
    Result of the zero-test: "zero" (certified by the canonical form),
    "nonzero" (with a witness point), or "indeterminate".
    """

    status: str
    witness: Optional[SamplePoint] = None
    value: Optional[float] = None

    ZERO = "zero"
    NONZERO = "nonzero"
    INDETERMINATE = "indeterminate"

    @property
    def is_zero(self) -> bool:
        return self.status == self.ZERO

    @property
    def is_nonzero(self) -> bool:
        return self.status == self.NONZERO

    @property
    def is_indeterminate(self) -> bool:
        return self.status == self.INDETERMINATE


def condition_from_components(
    name: str,
    verdicts: Mapping[str, Tuple[ZeroVerdict, str]],
) -> Condition:
    """
    Fold per-component zero-tests into one Condition.

    Args:
        name: Condition label
        verdicts: component label -> (zero verdict, canonical expression text)

    Returns:
        A Condition that holds iff every component is certified zero; the first
        nonzero component becomes the witness.
    """
    indeterminate: Optional[Tuple[str, str]] = None
    for label, (verdict, text) in verdicts.items():
        if verdict.is_nonzero:
            return Condition(
                name=name,
                holds=False,
                witness=Witness(label, text, verdict.witness, verdict.value),
            )
        if verdict.is_indeterminate and indeterminate is None:
            indeterminate = (label, text)
    if indeterminate is not None:
        return Condition(
            name=name,
            holds=False,
            witness=Witness(indeterminate[0], indeterminate[1]),
            indeterminate=True,
        )
    return Condition(name=name, holds=True)
