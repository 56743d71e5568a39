"""
Unit tests for data models.

Tests charts, sample points, verdicts and the error hierarchy.
"""

from fractions import Fraction

import pytest

from src.models import (
    Chart,
    ChartMismatchError,
    Condition,
    DegenerateFormError,
    DimensionError,
    GeometryError,
    ParseError,
    PreconditionError,
    SamplePoint,
    UnknownCoordinateError,
    Verdict,
    Witness,
    ZeroVerdict,
    condition_from_components,
)


@pytest.mark.unit
class TestChart:
    """Test the Chart data model."""

    def test_create_chart(self, quadrant):
        """Test creating a chart with a domain hint."""
        assert quadrant.dimension == 4
        assert quadrant.index("x3") == 2
        assert str(quadrant) == "M(x1, x2, x3, x4)"

    def test_parameters_are_symbols_but_not_coordinates(self):
        """Test that parameters are sampled but have no coordinate index."""
        chart = Chart("N", ("x1", "x3"), params=("t0",))

        assert chart.dimension == 2
        assert chart.symbols == ("x1", "x3", "t0")
        with pytest.raises(UnknownCoordinateError):
            chart.index("t0")

    def test_repeated_names_rejected(self):
        """Test that repeated coordinate names are a dimension error."""
        with pytest.raises(DimensionError):
            Chart("M", ("x1", "x1"))

    def test_empty_chart_rejected(self):
        """Test that a chart needs at least one coordinate."""
        with pytest.raises(DimensionError):
            Chart("M", ())

    def test_invalid_name_rejected(self):
        """Test that coordinate names must be identifiers."""
        with pytest.raises(DimensionError):
            Chart("M", ("1x",))

    def test_require_same(self, quadrant, plane):
        """Test chart equality enforcement."""
        quadrant.require_same(Chart("M", ("x1", "x2", "x3", "x4"), domain_hint="x1>0, x2>0"))
        with pytest.raises(ChartMismatchError):
            quadrant.require_same(plane)


@pytest.mark.unit
class TestSamplePoint:
    """Test the SamplePoint data model."""

    def test_values_become_fractions(self, plane):
        """Test that values are stored as exact fractions."""
        point = SamplePoint.of(plane, [1, "3/2"])

        assert point["y1"] == Fraction(3, 2)
        assert point.as_dict() == {"x1": Fraction(1), "y1": Fraction(3, 2)}
        assert str(point) == "(x1=1, y1=3/2)"

    def test_wrong_length_rejected(self, plane):
        """Test that a point must assign every symbol."""
        with pytest.raises(DimensionError):
            SamplePoint.of(plane, [1])


@pytest.mark.unit
class TestVerdict:
    """Test Condition and Verdict."""

    def test_passed_ignores_cross_checks(self):
        """Test that cross-checks never change the outcome."""
        verdict = Verdict("X")
        verdict.add(Condition("a", True))
        verdict.cross_checks.append(Condition("b", False))

        assert verdict.passed
        assert bool(verdict)
        assert verdict.condition("b").holds is False

    def test_failing_and_witnesses(self):
        """Test failing conditions and collected witnesses."""
        witness = Witness("dx1", "x2")
        verdict = Verdict("X", conditions=[Condition("a", True), Condition("b", False, witness)])

        assert [c.name for c in verdict.failing] == ["b"]
        assert verdict.witnesses == [witness]
        assert not verdict

    def test_missing_condition_raises(self):
        """Test lookup of an unknown condition."""
        with pytest.raises(KeyError):
            Verdict("X").condition("nope")

    def test_condition_str(self):
        """Test condition rendering marks."""
        assert str(Condition("dω = 0", True)) == "✓ dω = 0"
        assert str(Condition("dω = 0", False, indeterminate=True)).startswith("?")


@pytest.mark.unit
class TestConditionFromComponents:
    """Test folding per-component zero-tests into a condition."""

    def test_all_zero_holds(self):
        """Test that certified zero components give a holding condition."""
        zero = ZeroVerdict(ZeroVerdict.ZERO)
        condition = condition_from_components("c", {"dx1": (zero, "0"), "dx2": (zero, "0")})

        assert condition.holds
        assert condition.witness is None

    def test_nonzero_component_is_witness(self, plane):
        """Test that the first nonzero component becomes the witness."""
        point = SamplePoint.of(plane, [1, 2])
        condition = condition_from_components("c", {
            "dx1": (ZeroVerdict(ZeroVerdict.INDETERMINATE), "q"),
            "dy1": (ZeroVerdict(ZeroVerdict.NONZERO, point, 2.0), "y1"),
        })

        assert not condition.holds
        assert not condition.indeterminate
        assert condition.witness.component == "dy1"
        assert condition.witness.point == point

    def test_only_indeterminate(self):
        """Test that an undecided component makes the condition indeterminate."""
        condition = condition_from_components("c", {"dx1": (ZeroVerdict(ZeroVerdict.INDETERMINATE), "q")})

        assert not condition.holds
        assert condition.indeterminate


@pytest.mark.unit
class TestGeometryError:
    """Test the error hierarchy."""

    def test_error_str_with_details(self):
        """Test the rendered error code, message and details."""
        error = DegenerateFormError("det(ω) ≡ 0", details={"chart": "M"})

        assert str(error) == "[DEGENERATE_FORM] det(ω) ≡ 0 | Details: {'chart': 'M'}"
        assert not error.is_input_error

    def test_parse_error_position(self):
        """Test that parse errors carry the offending position."""
        error = ParseError("unexpected token", position=4, source="x1 + + x2")

        assert error.position == 4
        assert error.message == "unexpected token at position 4"
        assert error.is_input_error
        assert isinstance(error, GeometryError)

    def test_precondition_error_carries_verdict(self):
        """Test that precondition failures list failing conditions."""
        verdict = Verdict("X", conditions=[Condition("i(X)dω = 0", False)])
        error = PreconditionError("not Hamiltonian", verdict)

        assert error.verdict is verdict
        assert error.details == {"failing": ["i(X)dω = 0"]}
        assert error.code == "PRECONDITION_FAILED"
