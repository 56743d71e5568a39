"""
Unit tests for exact linear algebra over the function field of a chart.
"""

import pytest
import sympy

from src.linalg import (
    at_point,
    determinant,
    generic_rank,
    inverse,
    nullspace,
    pointwise_nullspace,
    pointwise_rank,
)
from src.models import DegenerateFormError, DimensionError, SamplePoint
from src.parser import coordinate_symbol


x1, x2 = coordinate_symbol("x1"), coordinate_symbol("x2")


@pytest.mark.unit
class TestNullspace:
    """Test symbolic null spaces."""

    def test_single_row(self, quadrant):
        """Test the kernel of (x1, x2) with denominators cleared."""
        result = nullspace([[x1, x2]], quadrant)

        assert result.rank == 1
        assert result.dimension == 1
        assert result.pivot_columns == [0]
        assert result.basis == [[-x2, x1]]

    def test_full_rank(self, quadrant):
        """Test that an invertible matrix has a trivial kernel."""
        result = nullspace([[x1, 1], [0, x2]], quadrant)

        assert result.basis == []
        assert result.rank == 2

    def test_empty_matrix(self, quadrant):
        """Test that no rows means every column is free."""
        result = nullspace([], quadrant, columns=3)

        assert result.dimension == 3
        assert len(result.basis) == 3

    def test_generic_rank_ignores_isolated_zeros(self, quadrant):
        """Test that the rank is generic: (x1 - 1) counts as a pivot."""
        assert generic_rank([[x1 - 1, 0], [0, 0]], quadrant) == 1


@pytest.mark.unit
class TestInverse:
    """Test determinants and inverses."""

    def test_inverse_of_skew_matrix(self, quadrant):
        """Test the inverse of [[0, x1], [-x1, 0]]."""
        rows, det = inverse([[0, x1], [-x1, 0]], quadrant)

        assert det == x1 ** 2
        assert rows == [[0, -1 / x1], [1 / x1, 0]]

    def test_degenerate(self, quadrant):
        """Test that an identically singular matrix is rejected."""
        with pytest.raises(DegenerateFormError):
            inverse([[x1, x2], [2 * x1, 2 * x2]], quadrant)

    def test_non_square(self):
        """Test that determinants need square matrices."""
        with pytest.raises(DimensionError):
            determinant([[1, 2, 3], [4, 5, 6]])


@pytest.mark.unit
class TestPointwise:
    """Test exact numeric linear algebra at sample points."""

    def test_rank_drop_at_point(self, quadrant):
        """Test that the rank at a point can be below the generic rank."""
        point = SamplePoint.of(quadrant, [1, 2, 0, 0])
        values = at_point([[x1 - 1, 0], [0, x2]], point)

        assert values == sympy.Matrix([[0, 0], [0, 2]])
        assert pointwise_rank(values) == 1
        assert pointwise_nullspace(values) == [[1, 0]]
