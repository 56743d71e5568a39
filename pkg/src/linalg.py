"""
📖 CHAPTER 3: MATRICES OVER FUNCTIONS
=====================================

Matrices here are lists of rows of SymPy scalars, and "nonzero" means what
the zero-test of Chapter 2 says it means.

📚 CONCEPT: Fraction-Free Elimination
-------------------------------------
A row r is updated as pivot*r - entry*pivot_row and canonicalized; nothing is
divided until back substitution. A pivot is usable only once the zero-test
certifies it nonzero, so the rank found is the generic rank on a dense subset
of the chart.
"""


from dataclasses import dataclass, field
from functools import reduce
from typing import List, Sequence, Tuple

import sympy

from src.expr import canonicalize, exact_value, zero_test
from src.logging_config import get_logger
from src.models import Chart, DegenerateFormError, DimensionError, IndeterminateError, SamplePoint


logger = get_logger(__name__)

Row = List[sympy.Expr]


@dataclass
class KernelResult:
    """Null space of a matrix over the function field."""

    basis: List[Row]
    pivots: List[sympy.Expr] = field(default_factory=list)
    pivot_columns: List[int] = field(default_factory=list)
    columns: int = 0

    @property
    def rank(self) -> int:
        return len(self.pivots)

    @property
    def dimension(self) -> int:
        return self.columns - self.rank


def _copy(matrix: Sequence[Sequence[sympy.Expr]]) -> List[Row]:
    return [[canonicalize(sympy.sympify(entry)) for entry in row] for row in matrix]


def _find_pivot(m: List[Row], start: int, column: int, chart: Chart) -> int:
    undecided = []
    for i_row in range(start, len(m)):
        entry = m[i_row][column]
        if entry == 0:
            continue
        verdict = zero_test(entry, chart)
        if verdict.is_nonzero:
            return i_row
        if verdict.is_indeterminate:
            undecided.append(sympy.sstr(entry))
    if undecided:
        raise IndeterminateError(
            "indeterminate rank",
            details={"column": column, "candidates": undecided},
        )
    return -1


def row_echelon(matrix: Sequence[Sequence[sympy.Expr]], chart: Chart) -> Tuple[List[Row], List[int]]:
    """
    Fraction-free reduced echelon form.

    Returns:
        (rows, pivot_columns); row r has its pivot at pivot_columns[r] and zeros
        in every other pivot column.

    Raises:
        IndeterminateError: A column has only undecided pivot candidates
    """
    m = _copy(matrix)
    if not m:
        return m, []
    n_rows, n_cols = len(m), len(m[0])
    pivot_columns: List[int] = []
    piv_r = 0
    for piv_c in range(n_cols):
        if piv_r == n_rows:
            break
        i_row = _find_pivot(m, piv_r, piv_c, chart)
        if i_row < 0:
            continue
        if i_row != piv_r:
            m[piv_r], m[i_row] = m[i_row], m[piv_r]
        fp = m[piv_r][piv_c]
        for r in range(n_rows):
            if r == piv_r:
                continue
            fr = m[r][piv_c]
            if fr == 0:
                continue
            m[r] = [canonicalize(fp * a - fr * b) for a, b in zip(m[r], m[piv_r])]
        pivot_columns.append(piv_c)
        piv_r += 1
    return m, pivot_columns


def _clear_denominators(vector: Row) -> Row:
    denominators = [sympy.fraction(entry)[1] for entry in vector if entry != 0]
    try:
        common = reduce(sympy.lcm, denominators, sympy.Integer(1))
        scaled = [canonicalize(entry * common) for entry in vector]
        numerators = [entry for entry in scaled if entry != 0]
        divisor = reduce(sympy.gcd, numerators) if numerators else sympy.Integer(1)
        if divisor != 0:
            scaled = [canonicalize(entry / divisor) for entry in scaled]
        return scaled
    except (sympy.PolynomialError, sympy.GeneratorsNeeded):
        return vector


def nullspace(matrix: Sequence[Sequence[sympy.Expr]], chart: Chart, columns: int = 0) -> KernelResult:
    """
    Basis of {v : M v = 0} over the function field, one vector per free column,
    with denominators cleared.

    Args:
        matrix: Rows of SymPy scalars (may be empty)
        chart: Chart the entries live on (drives the zero-test)
        columns: Column count when the matrix has no rows
    """
    n_cols = len(matrix[0]) if matrix else columns
    rows, pivot_columns = row_echelon(matrix, chart)
    free = [c for c in range(n_cols) if c not in pivot_columns]
    basis = []
    for free_c in free:
        solution = [sympy.Integer(0)] * n_cols
        solution[free_c] = sympy.Integer(1)
        for r, piv_c in enumerate(pivot_columns):
            solution[piv_c] = canonicalize(-rows[r][free_c] / rows[r][piv_c])
        basis.append(_clear_denominators(solution))
    pivots = [rows[r][c] for r, c in enumerate(pivot_columns)]
    logger.debug(f"nullspace: {n_cols} columns, generic rank {len(pivots)}")
    return KernelResult(basis=basis, pivots=pivots, pivot_columns=pivot_columns, columns=n_cols)


def generic_rank(matrix: Sequence[Sequence[sympy.Expr]], chart: Chart) -> int:
    return len(row_echelon(matrix, chart)[1])


# ============================================================================
# Determinants and inverses
# ============================================================================

def determinant(matrix: Sequence[Sequence[sympy.Expr]]) -> sympy.Expr:
    if len(matrix) != len(matrix[0]):
        raise DimensionError("determinant of a non-square matrix")
    return canonicalize(sympy.Matrix(matrix).det(method="berkowitz"))


def inverse(matrix: Sequence[Sequence[sympy.Expr]], chart: Chart) -> Tuple[List[Row], sympy.Expr]:
    """
    Inverse through adjugate / determinant.

    Returns:
        (inverse rows, determinant)

    Raises:
        DegenerateFormError: The determinant is not certified nonzero
    """
    det = determinant(matrix)
    verdict = zero_test(det, chart)
    if not verdict.is_nonzero:
        raise DegenerateFormError(
            "matrix is degenerate" if verdict.is_zero else "cannot certify a nonzero determinant",
            details={"determinant": sympy.sstr(det)},
        )
    adjugate = sympy.Matrix(matrix).adjugate(method="berkowitz")
    n = len(matrix)
    rows = [[canonicalize(adjugate[i, j] / det) for j in range(n)] for i in range(n)]
    return rows, det


# ============================================================================
# Pointwise (exact rational) linear algebra
# ============================================================================

def at_point(matrix: Sequence[Sequence[sympy.Expr]], point: SamplePoint) -> sympy.Matrix:
    """Exact numeric matrix of a symbolic matrix at a sample point."""
    return sympy.Matrix([[exact_value(sympy.sympify(entry), point) for entry in row] for row in matrix])


def pointwise_nullspace(values: sympy.Matrix) -> List[List[sympy.Expr]]:
    """Exact null-space basis of a numeric matrix, denominators cleared."""
    basis = []
    for vector in values.nullspace(simplify=True):
        entries = [sympy.nsimplify(e) if e.is_Float else e for e in vector]
        basis.append(_clear_denominators(list(entries)))
    return basis


def pointwise_rank(values: sympy.Matrix) -> int:
    return values.rank(simplify=True)
