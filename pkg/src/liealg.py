"""
📖 CHAPTER 8: LIE GROUPS WITHOUT GROUPS
=======================================

STORY: Everything Lives in the Structure Constants
-------------------------------------------------
No group is materialized. An invariant form on G x G is a KForm with
constant coefficients on the generator chart (a1..ar, b1..br): `da_i` stands
for the left-invariant coframe omega_1^i of the first factor and `db_i` for
omega_2^i of the second. The Chevalley-Eilenberg differential follows the
Cartan rule

    d omega^i = 1/2 c^i_jk omega^k ^ omega^j

on each copy and extends as a graded derivation. Indices are 0-based in code
and 1-based in every label shown to the user.

📚 CONCEPT: Two Answers That Must Agree
---------------------------------------
`diagonal_check` decides the diagonal field with the algebraic conditions A
and B, then recomputes the same facts with the CE differential. If the two
ever disagree it raises ConventionError rather than picking one.

EXAMPLE USAGE:
    data = heisenberg()
    omega = fundamental_form(data)
    verdict = diagonal_check(data, [1, 0, 0])
"""


from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import Dict, List, Mapping, Sequence, Tuple

import sympy

from src.exterior import KForm, KVector, interior, vanishing_condition, wedge
from src.expr import zero_test
from src.linalg import determinant
from src.logging_config import get_logger, log_performance
from src.models import (
    Chart,
    Condition,
    ConventionError,
    DegenerateFormError,
    DimensionError,
    PreconditionError,
    Verdict,
    condition_from_components,
)


logger = get_logger(__name__)

Constants = Dict[Tuple[int, int, int], Fraction]


# ============================================================================
# Structure data
# ============================================================================

@dataclass(frozen=True)
class LieAlgebraData:
    """
    Structure constants c^i_jk (keyed (i, j, k), antisymmetric in j, k, zeros
    omitted) and a constant symmetric nondegenerate metric gamma.
    """

    r: int
    constants: Tuple[Tuple[Tuple[int, int, int], Fraction], ...]
    gamma: Tuple[Tuple[Fraction, ...], ...]

    @classmethod
    def build(
        cls,
        r: int,
        constants: Mapping[Tuple[int, int, int], object],
        gamma: Sequence[Sequence[object]] = (),
    ) -> "LieAlgebraData":
        """
        Validate and complete the data; a given c^i_jk implies c^i_kj = -c^i_jk.

        Raises:
            DimensionError: indices out of range, c^i_jj != 0, contradicting
                entries, or a non-symmetric gamma
            DegenerateFormError: det(gamma) = 0
        """
        if r < 1:
            raise DimensionError("a Lie algebra needs dimension at least 1")
        filled: Constants = {}
        for (i, j, k), raw in constants.items():
            if not all(0 <= idx < r for idx in (i, j, k)):
                raise DimensionError(
                    f"structure constant index out of range for dimension {r}",
                    details={"entry": (i + 1, j + 1, k + 1)},
                )
            value = Fraction(raw)
            if j == k and value != 0:
                raise DimensionError(
                    "structure constants must be antisymmetric",
                    details={"entry": (i + 1, j + 1, k + 1)},
                )
            for key, v in (((i, j, k), value), ((i, k, j), -value)):
                if key in filled and filled[key] != v:
                    raise DimensionError(
                        "contradicting structure constants",
                        details={"entry": tuple(x + 1 for x in key)},
                    )
                filled[key] = v
        if not gamma:
            gamma = [[1 if a == b else 0 for b in range(r)] for a in range(r)]
        g = tuple(tuple(Fraction(v) for v in row) for row in gamma)
        if len(g) != r or any(len(row) != r for row in g):
            raise DimensionError(f"gamma must be a {r}x{r} matrix")
        if any(g[a][b] != g[b][a] for a in range(r) for b in range(r)):
            raise DimensionError("gamma must be symmetric")
        if determinant([[sympy.Rational(v) for v in row] for row in g]) == 0:
            raise DegenerateFormError("gamma is degenerate")
        entries = tuple(sorted((key, v) for key, v in filled.items() if v != 0))
        return cls(r=r, constants=entries, gamma=g)

    def c(self, i: int, j: int, k: int) -> Fraction:
        return self.table.get((i, j, k), Fraction(0))

    @cached_property
    def table(self) -> Constants:
        return dict(self.constants)

    @property
    def is_abelian(self) -> bool:
        return not self.constants

    @property
    def chart(self) -> Chart:
        return generator_chart(self.r)

    def change_basis(self, matrix: Sequence[Sequence[object]]) -> "LieAlgebraData":
        """
        Same algebra and metric in the basis e'_a = P_ia e_i (columns of P):
        c'^c_ab = (P^-1)_ck c^k_ij P_ia P_jb and gamma' = P^T gamma P.

        Raises:
            DegenerateFormError: P is singular
        """
        p = sympy.Matrix([[sympy.Rational(Fraction(v)) for v in row] for row in matrix])
        if p.shape != (self.r, self.r):
            raise DimensionError(f"change of basis needs a {self.r}x{self.r} matrix")
        if p.det() == 0:
            raise DegenerateFormError("change of basis is singular")
        q = p.inv()
        table = self.table
        constants: Dict[Tuple[int, int, int], Fraction] = {}
        for c_, a, b in product(range(self.r), repeat=3):
            if a >= b:
                continue
            value = sum(
                q[c_, k] * v * p[i, a] * p[j, b] for (k, i, j), v in table.items()
            )
            value = sympy.Rational(value)
            if value != 0:
                constants[(c_, a, b)] = Fraction(int(value.p), int(value.q))
        gamma = p.T * sympy.Matrix(self.gamma) * p
        return LieAlgebraData.build(
            self.r,
            constants,
            [[Fraction(int(gamma[a, b].p), int(gamma[a, b].q)) for b in range(self.r)] for a in range(self.r)],
        )


def abelian(r: int) -> LieAlgebraData:
    return LieAlgebraData.build(r, {})


def heisenberg() -> LieAlgebraData:
    """[e1, e2] = e3, gamma = identity."""
    return LieAlgebraData.build(3, {(2, 0, 1): 1})


def so3() -> LieAlgebraData:
    """[e1, e2] = e3 and cyclic."""
    return LieAlgebraData.build(3, {(2, 0, 1): 1, (0, 1, 2): 1, (1, 2, 0): 1})


def sl2() -> LieAlgebraData:
    """Basis (h, e, f): [h, e] = 2e, [h, f] = -2f, [e, f] = h."""
    return LieAlgebraData.build(3, {(1, 0, 1): 2, (2, 0, 2): -2, (0, 1, 2): 1})


def jacobi_defect(data: LieAlgebraData) -> Dict[Tuple[int, int, int, int], Fraction]:
    """
    Nonzero entries of J^i_jkl = sum_m c^i_jm c^m_kl + c^i_km c^m_lj + c^i_lm c^m_jk.
    """
    r = data.r
    defect = {}
    for i, j, k, l in product(range(r), repeat=4):
        value = sum(
            data.c(i, j, m) * data.c(m, k, l)
            + data.c(i, k, m) * data.c(m, l, j)
            + data.c(i, l, m) * data.c(m, j, k)
            for m in range(r)
        )
        if value != 0:
            defect[(i, j, k, l)] = value
    return defect


# ============================================================================
# Invariant forms
# ============================================================================

def generator_chart(r: int) -> Chart:
    """Chart whose differentials da_i, db_i name the two invariant coframes."""
    return Chart(
        f"g{r}xg{r}",
        tuple(f"a{i + 1}" for i in range(r)) + tuple(f"b{i + 1}" for i in range(r)),
    )


def _require_invariant(a, data: LieAlgebraData) -> None:
    data.chart.require_same(a.chart)
    for value in a.components.values():
        if value.free_symbols:
            raise DimensionError(
                "invariant forms have constant coefficients",
                details={"coefficient": sympy.sstr(value)},
            )


def _coframe_differential(index: int, data: LieAlgebraData) -> KForm:
    """d omega^i on the copy holding chart index `index`."""
    r = data.r
    copy, i = divmod(index, r)
    offset = copy * r
    result = KForm.zero(data.chart, 2)
    for (upper, j, k), value in data.constants:
        if upper != i:
            continue
        term = wedge(
            KForm(data.chart, 1, {(offset + k,): 1}),
            KForm(data.chart, 1, {(offset + j,): 1}),
        )
        result = result + term * (sympy.Rational(value) / 2)
    return result


def ce_differential(a: KForm, data: LieAlgebraData) -> KForm:
    """
    Chevalley-Eilenberg differential of an invariant form.

    Raises:
        ChartMismatchError: a is not on the generator chart of data
        DimensionError: a has non-constant coefficients
    """
    _require_invariant(a, data)
    cache: Dict[int, KForm] = {}
    result = KForm.zero(data.chart, a.degree + 1)
    for key, coefficient in a.components.items():
        for p, idx in enumerate(key):
            if idx not in cache:
                cache[idx] = _coframe_differential(idx, data)
            before = KForm(data.chart, p, {key[:p]: 1})
            after = KForm(data.chart, len(key) - p - 1, {key[p + 1:]: 1})
            term = wedge(wedge(before, cache[idx]), after)
            result = result + term * ((-1) ** p * coefficient)
    return result


def fundamental_form(data: LieAlgebraData) -> KForm:
    """omega = gamma_ij omega_1^i ^ omega_2^j."""
    r = data.r
    return KForm(data.chart, 2, {
        (i, r + j): sympy.Rational(data.gamma[i][j])
        for i in range(r) for j in range(r) if data.gamma[i][j] != 0
    })


def diagonal_field(data: LieAlgebraData, xi: Sequence[object]) -> KVector:
    """Z = X_1 + X_2 for the left-invariant field X with components xi on each factor."""
    if len(xi) != data.r:
        raise DimensionError(f"xi needs {data.r} components, got {len(xi)}")
    values = [sympy.Rational(Fraction(v)) for v in xi]
    return KVector.from_list(data.chart, values + values)


def invariant_interior(z: KVector, a: KForm, data: LieAlgebraData) -> KForm:
    """Contraction of an invariant form by a constant field."""
    _require_invariant(z, data)
    _require_invariant(a, data)
    return interior(z, a)


# ============================================================================
# Diagonal locally Hamiltonian criteria
# ============================================================================

def _constant_condition(name: str, values: Dict[str, sympy.Expr], chart: Chart) -> Condition:
    return condition_from_components(
        name, {label: (zero_test(v, chart), sympy.sstr(v)) for label, v in values.items()}
    )


def condition_a(data: LieAlgebraData, xi: Sequence[object]) -> Condition:
    """gamma_ij xi^i c^j_hk = 0 for all h < k: xi is gamma-orthogonal to [g, g]."""
    r = data.r
    x = [Fraction(v) for v in xi]
    values = {}
    for h in range(r):
        for k in range(h + 1, r):
            value = sum(
                data.gamma[i][j] * x[i] * data.c(j, h, k) for i in range(r) for j in range(r)
            )
            values[f"(h,k)=({h + 1},{k + 1})"] = sympy.Rational(value)
    return _constant_condition("A: γ_ij ξ^i c^j_hk = 0", values, data.chart)


def condition_b(data: LieAlgebraData, xi: Sequence[object]) -> Condition:
    """gamma(ad_xi U, V) + gamma(U, ad_xi V) = 0 over all basis pairs (U, V)."""
    r = data.r
    x = [Fraction(v) for v in xi]
    values = {}
    for p in range(r):
        for q in range(p, r):
            value = sum(
                x[i] * (data.c(m, i, p) * data.gamma[m][q] + data.c(m, i, q) * data.gamma[p][m])
                for i in range(r) for m in range(r)
            )
            values[f"(U,V)=(e{p + 1},e{q + 1})"] = sympy.Rational(value)
    return _constant_condition("B: γ(ad_ξ U, V) + γ(U, ad_ξ V) = 0", values, data.chart)


@log_performance(logger)
def diagonal_check(data: LieAlgebraData, xi: Sequence[object]) -> Verdict:
    """
    Z = X_1 + X_2 is locally Hamiltonian for omega iff conditions A and B hold.
    The verdict also recomputes d(i(Z)omega) and i(Z)d omega in the CE model as
    cross-checks; A must match the first, A and B together the second.

    Raises:
        PreconditionError: the structure constants violate the Jacobi identity
        ConventionError: the algebraic and direct computations disagree
    """
    defect = jacobi_defect(data)
    if defect:
        verdict = Verdict(subject="Jacobi identity")
        (i, j, k, l), value = next(iter(defect.items()))
        verdict.add(Condition("Jacobi defect = 0", False))
        verdict.outputs["J"] = f"J^{i + 1}_{j + 1}{k + 1}{l + 1} = {value}"
        raise PreconditionError("structure constants violate the Jacobi identity", verdict)
    z = diagonal_field(data, xi)
    omega = fundamental_form(data)
    contracted = invariant_interior(z, omega, data)
    verdict = Verdict(
        subject=f"Z for ξ = ({', '.join(str(Fraction(v)) for v in xi)})",
        outputs={"i(Z)ω": contracted.to_text()},
    )
    a = condition_a(data, xi)
    b = condition_b(data, xi)
    verdict.add(a)
    verdict.add(b)
    closed = vanishing_condition("d(i(Z)ω) = 0", ce_differential(contracted, data))
    d_omega = ce_differential(omega, data)
    annihilated = vanishing_condition("i(Z)dω = 0", invariant_interior(z, d_omega, data))
    verdict.cross_checks.extend([closed, annihilated])
    if closed.holds != a.holds or annihilated.holds != (a.holds and b.holds):
        logger.warning(f"CE cross-check disagreement for {verdict.subject}")
        raise ConventionError(
            "algebraic criteria disagree with the direct computation",
            details={"A": a.holds, "B": b.holds, "closed": closed.holds, "annihilated": annihilated.holds},
        )
    logger.info(f"diagonal check for {verdict.subject}: {'pass' if verdict.passed else 'fail'}")
    return verdict


def d_squared(a: KForm, data: LieAlgebraData) -> KForm:
    return ce_differential(ce_differential(a, data), data)


def generators(data: LieAlgebraData) -> List[KForm]:
    """The 2r invariant coframe 1-forms."""
    return [KForm(data.chart, 1, {(i,): 1}) for i in range(2 * data.r)]
