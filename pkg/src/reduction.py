"""
📖 CHAPTER 7: REDUCTION WITHOUT A QUOTIENT
==========================================

Momentum maps, level-set pullbacks and reduced forms. The quotient is never
constructed: the user supplies a parametrization of the level set, a chart
map onto the quotient and a candidate reduced form, and this module checks
the identities they must satisfy.
"""


from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import sympy

from src.expr import Expr, SampleGenerator, diff_value, zero_test
from src.exterior import (
    KForm,
    MapExpr,
    VecField,
    differential,
    ext_d,
    lie_derivative,
    pullback,
    scalar_condition,
    vanishing_condition,
)
from src.linalg import at_point, pointwise_nullspace
from src.logging_config import get_logger, log_performance
from src.models import (
    Condition,
    DimensionError,
    EvaluationError,
    GeometryError,
    SamplePoint,
    Verdict,
    Witness,
)
from src.symplectic import AlmostSymplectic, flat, is_locally_hamiltonian, poisson_bracket, two_form_matrix
from src.tangent import TangentChart, complete_lift


logger = get_logger(__name__)

StructureConstants = Dict[Tuple[int, int, int], Fraction]


@dataclass
class MomentumData:
    """
    Generators X_a of an infinitesimal action with momentum components Phi_a,
    and optionally the structure constants c^c_ab keyed (c, a, b).
    """

    generators: List[VecField]
    components: List[Expr]
    structure_constants: Optional[StructureConstants] = None

    def __post_init__(self) -> None:
        if len(self.generators) != len(self.components):
            raise DimensionError(
                f"{len(self.generators)} generators but {len(self.components)} momentum components"
            )

    @property
    def size(self) -> int:
        return len(self.generators)


def check_momentum_map(S: AlmostSymplectic, md: MomentumData) -> Verdict:
    """
    For every a: i(X_a)omega + dPhi_a = 0 and L_{X_a}omega = 0; with structure
    constants, {Phi_a, Phi_b} = c^c_ab Phi_c.
    """
    verdict = Verdict(subject=f"momentum map ({md.size} generators)")
    for a, (x_a, phi_a) in enumerate(zip(md.generators, md.components)):
        S.chart.require_same(x_a.chart)
        label = a + 1
        verdict.add(vanishing_condition(f"i(X{label})ω + dΦ{label} = 0", flat(S, x_a) + differential(phi_a)))
        verdict.add(vanishing_condition(f"L_X{label} ω = 0", lie_derivative(x_a, S.omega)))
        orbit = is_locally_hamiltonian(S, x_a)
        verdict.cross_checks.append(Condition(
            f"X{label} locally Hamiltonian", orbit.passed,
            witness=orbit.failing[0].witness if orbit.failing else None,
        ))
    if md.structure_constants is not None and verdict.passed:
        _check_equivariance(S, md, verdict)
    logger.info(f"{verdict.subject}: {'pass' if verdict.passed else 'fail'}")
    return verdict


def _check_equivariance(S: AlmostSymplectic, md: MomentumData, verdict: Verdict) -> None:
    constants = md.structure_constants or {}
    for a in range(md.size):
        for b in range(a + 1, md.size):
            name = f"{{Φ{a + 1},Φ{b + 1}}} = c^c_{a + 1}{b + 1} Φc"
            try:
                bracket = poisson_bracket(S, md.components[a], md.components[b])
            except GeometryError as e:
                verdict.add(Condition(name, False, witness=Witness("bracket", e.message)))
                continue
            expected = sum(
                (md.components[c] * sympy.Rational(constants.get((c, a, b), 0)) for c in range(md.size)),
                Expr.constant(S.chart, 0),
            )
            verdict.add(scalar_condition(name, (bracket - expected).value, S.chart))


# ============================================================================
# Level sets
# ============================================================================

@dataclass
class PointKernel:
    point: SamplePoint
    basis: List[List[sympy.Expr]]


@dataclass
class LevelRestriction:
    """iota*omega on the level chart with pointwise kernels."""

    form: KForm
    kernels: List[PointKernel] = field(default_factory=list)
    commutation: Optional[Condition] = None


def _sample_points(chart, count: int, seed: Optional[int]) -> List[SamplePoint]:
    return SampleGenerator(chart, seed).points(count)


@log_performance(logger)
def restrict_to_level(
    S: AlmostSymplectic,
    param: MapExpr,
    points: int = 3,
    seed: Optional[int] = None,
) -> LevelRestriction:
    """
    Pull omega back along a level-set parametrization, report the exact kernel
    of the pulled-back form at sample points, and check d(iota*omega) = iota*(d omega).
    """
    S.chart.require_same(param.target)
    restricted = pullback(param, S.omega)
    commutation = vanishing_condition(
        "d(ι*ω) = ι*(dω)", ext_d(restricted) - pullback(param, S.d_omega)
    )
    matrix = two_form_matrix(restricted)
    kernels = []
    for point in _sample_points(param.source, points, seed):
        try:
            kernels.append(PointKernel(point, pointwise_nullspace(at_point(matrix, point))))
        except EvaluationError:
            logger.debug(f"skipping {point}: form undefined there")
    logger.debug(f"ι*ω = {restricted.to_text()}")
    return LevelRestriction(form=restricted, kernels=kernels, commutation=commutation)


def check_reduction(
    iota_omega: KForm,
    q: MapExpr,
    varpi: KForm,
    points: int = 3,
    seed: Optional[int] = None,
) -> Verdict:
    """
    Verify q*varpi = iota*omega, nondegeneracy of varpi, and that iota*omega
    annihilates ker dq at sample points.

    Raises:
        DimensionError: degrees are not 2 or the quotient chart is odd-dimensional
        DegenerateFormError: varpi is degenerate
    """
    if iota_omega.degree != 2 or varpi.degree != 2:
        raise DimensionError("reduction compares 2-forms")
    iota_omega.chart.require_same(q.source)
    varpi.chart.require_same(q.target)
    reduced = AlmostSymplectic.build(varpi)
    verdict = Verdict(subject=f"q*ϖ = ι*ω on {q.source.name}", outputs={"ϖ": reduced.omega.to_text()})
    verdict.add(vanishing_condition("q*ϖ = ι*ω", pullback(q, varpi) - iota_omega))
    verdict.add(_nondegenerate_condition(reduced))
    verdict.add(_basic_rank_condition(iota_omega, q, points, seed))
    logger.info(f"{verdict.subject}: {'pass' if verdict.passed else 'fail'}")
    return verdict


def _nondegenerate_condition(reduced: AlmostSymplectic) -> Condition:
    check = zero_test(reduced.determinant, reduced.chart)
    return Condition("det ϖ ≠ 0", check.is_nonzero, indeterminate=check.is_indeterminate)


def _basic_rank_condition(iota_omega: KForm, q: MapExpr, points: int, seed: Optional[int]) -> Condition:
    name = "ker dq ⊆ ker ι*ω"
    jacobian = [[diff_value(c, coord) for coord in q.source.coords] for c in q.components]
    matrix = two_form_matrix(iota_omega)
    for point in _sample_points(q.source, points, seed):
        try:
            directions = pointwise_nullspace(at_point(jacobian, point))
            values = at_point(matrix, point)
        except EvaluationError:
            continue
        for v in directions:
            image = values.T * sympy.Matrix(v)
            if any(sympy.simplify(e) != 0 for e in image):
                return Condition(name, False, witness=Witness(
                    "i(v)ι*ω", f"v = ({', '.join(sympy.sstr(e) for e in v)})", point,
                ))
    return Condition(name, True)


def lift_momentum(tc: TangentChart, base: AlmostSymplectic, md: MomentumData) -> Verdict:
    """Complete lifts of generators and momentum components checked against sigma^c."""
    lifted = AlmostSymplectic.build(complete_lift(tc, base.omega))
    lifted_md = MomentumData(
        generators=[complete_lift(tc, x) for x in md.generators],
        components=[complete_lift(tc, phi) for phi in md.components],
        structure_constants=md.structure_constants,
    )
    verdict = check_momentum_map(lifted, lifted_md)
    verdict.subject = f"lifted {verdict.subject}"
    for a, phi in enumerate(lifted_md.components):
        verdict.outputs[f"Φ{a + 1}^c"] = phi.to_text()
    return verdict
