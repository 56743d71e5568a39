"""
Unit tests for the scalar and literal grammars.

Tests tokenization, operator precedence, error positions and domain hints.
"""

import pytest
import sympy

from src.models import ParseError, UnknownCoordinateError
from src.parser import ScalarParser, coordinate_symbol, parse_domain_hint, tokenize


x1, x2 = coordinate_symbol("x1"), coordinate_symbol("x2")


@pytest.mark.unit
class TestTokenize:
    """Test the tokenizer."""

    def test_tokens_and_positions(self):
        """Test token kinds and source positions."""
        tokens = tokenize("x1**2 + @x3")

        assert [t.kind for t in tokens] == ["NAME", "OP", "NUMBER", "OP", "VECTOR", "END"]
        assert tokens[3].position == 6

    def test_unexpected_character(self):
        """Test that stray characters are rejected with their position."""
        with pytest.raises(ParseError) as exc_info:
            tokenize("x1 $ x2")

        assert exc_info.value.position == 3


@pytest.mark.unit
class TestScalarParser:
    """Test parsing scalar expressions."""

    def test_precedence(self, quadrant):
        """Test that unary minus belongs to the base of ** and * binds tighter than +."""
        parser = ScalarParser(quadrant)

        assert parser.parse("-x1**2") == x1 ** 2
        assert parser.parse("-x1**3") == -x1 ** 3
        assert parser.parse("-(x1**2)") == -x1 ** 2
        assert parser.parse("x2 - x1**2") == x2 - x1 ** 2
        assert parser.parse("x1 + x2*x1") == x1 + x2 * x1

    def test_nested_unary_minus(self, quadrant):
        """Test that minus signs stack inside a base."""
        assert ScalarParser(quadrant).parse("--x1**2") == x1 ** 2
        assert ScalarParser(quadrant).parse("x2*-x1**2") == x2 * x1 ** 2

    def test_rational_literal(self, quadrant):
        """Test that rationals are integer divisions."""
        assert ScalarParser(quadrant).parse("-4/7") == sympy.Rational(-4, 7)

    def test_functions(self, quadrant):
        """Test ln and exp."""
        value = ScalarParser(quadrant).parse("exp(x1) + ln(x2)")

        assert value == sympy.exp(x1) + sympy.log(x2)

    def test_negative_integer_exponent(self, quadrant):
        """Test a parenthesized negative exponent."""
        assert ScalarParser(quadrant).parse("x1**(-1)") == 1 / x1

    def test_division_by_zero(self, quadrant):
        """Test that a literal zero divisor is a parse error at the '/' token."""
        with pytest.raises(ParseError) as exc_info:
            ScalarParser(quadrant).parse("1/0")

        assert exc_info.value.position == 1

    def test_unknown_coordinate(self, quadrant):
        """Test that foreign names are rejected."""
        with pytest.raises(UnknownCoordinateError):
            ScalarParser(quadrant).parse("x1 + y7")

    @pytest.mark.parametrize("source", ["", "x1 +", "(x1", "x1 + + x2", "x1^x2", "@x1"])
    def test_malformed_input(self, quadrant, source):
        """Test malformed scalar input."""
        with pytest.raises(ParseError):
            ScalarParser(quadrant).parse(source)


@pytest.mark.unit
class TestDomainHint:
    """Test domain hint parsing."""

    def test_comma_and_and_separators(self, quadrant):
        """Test both separators and normalization to lhs - rhs."""
        constraints = parse_domain_hint("x1>0, x2 > 1 and x1 != x2", quadrant)

        assert [c.op for c in constraints] == [">", ">", "!="]
        assert constraints[1].expression == x2 - 1

    def test_empty_hint(self, quadrant):
        """Test that no hint means no constraints."""
        assert parse_domain_hint(None, quadrant) == ()
        assert parse_domain_hint("  ", quadrant) == ()
