"""
📖 CHAPTER 5: ALMOST SYMPLECTIC STRUCTURES
==========================================

STORY: A Nondegenerate 2-Form Is Enough
---------------------------------------
Closedness is optional here. Once det(omega) is certified nonzero the
structure can raise and lower indices, split d omega into its Lee part and a
primitive remainder, and decide which vector fields are Hamiltonian. Every
convention is fixed once below; the flat/sharp round trip and the Lepage
reconstruction both check it at runtime.

    flat(X)_j      = X^i W_ij               (= i(X)omega)
    W^{-1} = P,    sharp(a)^i = P_ji a_j
    omega^{-1}     = sum_{i<j} P_ji d_i ^ d_j,  Lambda = i(omega^{-1})
    sharp on a k-form acts factor by factor
    star(v)        = i(sharp v) omega^n / n!,   delta = star d star
    sigma          = Lambda(d omega) / (n-1),   psi = d omega - sigma ^ omega

sigma is also computed as delta(omega)/(n-1); a decided disagreement between
the two is a ConventionError.

LEARNING OBJECTIVES:
-------------------
✓ Caching derived data on a frozen structure built by one classmethod
✓ Raising instead of reporting when internal paths disagree
"""


from dataclasses import dataclass
from functools import lru_cache
from math import factorial
from typing import List, Optional, Sequence, Tuple

import sympy

from src.expr import Expr, canonicalize, diff_value, to_text
from src.exterior import (
    KForm,
    KVector,
    VecField,
    apply_field,
    contraction_matrix,
    differential,
    ext_d,
    form_pairing,
    interior,
    power,
    scalar_condition,
    vanishing_condition,
    vf_bracket,
    wedge,
)
from src.linalg import at_point, inverse, pointwise_nullspace, pointwise_rank
from src.logging_config import get_logger, log_performance
from src.models import (
    Chart,
    Condition,
    ConventionError,
    DimensionError,
    IndeterminateError,
    PreconditionError,
    SamplePoint,
    Verdict,
)
from src.parser import coordinate_symbol


logger = get_logger(__name__)

SYMPLECTIC = "symplectic"
LOCALLY_CONFORMAL = "locally_conformal_symplectic"
GENERAL = "general"


def two_form_matrix(omega: KForm) -> List[List[sympy.Expr]]:
    """Antisymmetric component matrix W_ij of a 2-form."""
    if omega.degree != 2:
        raise DimensionError(f"expected a 2-form, got degree {omega.degree}")
    m = omega.chart.dimension
    return [[omega[(i, j)] for j in range(m)] for i in range(m)]


@dataclass(frozen=True, eq=False)
class AlmostSymplectic:
    """
    A chart with a nondegenerate 2-form and its eagerly built inverse data.

    EXAMPLE USAGE:
    >>> S = AlmostSymplectic.build(parse_form("x1*dx2^dx3 + x2*dx1^dx4", chart))
    >>> S.bivector.to_text()
    '(1/x2)*@x1^@x4 + (1/x1)*@x2^@x3'
    """

    omega: KForm
    matrix: Tuple[Tuple[sympy.Expr, ...], ...]
    inverse: Tuple[Tuple[sympy.Expr, ...], ...]
    determinant: sympy.Expr
    bivector: KVector
    d_omega: KForm

    @classmethod
    @log_performance(logger)
    def build(cls, omega: KForm) -> "AlmostSymplectic":
        """
        Validate and cache the structure.

        Raises:
            DimensionError: Odd-dimensional chart or omega not of degree 2
            DegenerateFormError: det(omega) vanishes identically
        """
        chart = omega.chart
        if chart.dimension % 2:
            raise DimensionError(
                f"chart '{chart.name}' has odd dimension {chart.dimension}",
                details={"coords": list(chart.coords)},
            )
        matrix = two_form_matrix(omega)
        rows, det = inverse(matrix, chart)
        m = chart.dimension
        for i in range(m):
            for j in range(m):
                entry = canonicalize(sum(rows[i][k] * matrix[k][j] for k in range(m)))
                if entry != (1 if i == j else 0):
                    raise ConventionError(
                        "inverse matrix does not invert the form",
                        details={"entry": (i, j), "value": to_text(entry)},
                    )
        bivector = KVector(chart, 2, {
            (i, j): rows[j][i] for i in range(m) for j in range(i + 1, m)
        })
        logger.debug(f"built structure on {chart}: det = {to_text(det)}")
        return cls(
            omega=omega,
            matrix=tuple(tuple(r) for r in matrix),
            inverse=tuple(tuple(r) for r in rows),
            determinant=det,
            bivector=bivector,
            d_omega=ext_d(omega),
        )

    @property
    def chart(self) -> Chart:
        return self.omega.chart

    @property
    def n(self) -> int:
        return self.chart.dimension // 2

    @property
    def is_closed(self) -> bool:
        return self.d_omega.is_zero


def build(chart: Chart, omega: KForm) -> AlmostSymplectic:
    chart.require_same(omega.chart)
    return AlmostSymplectic.build(omega)


def bivector_inverse(S: AlmostSymplectic) -> KVector:
    """omega^{-1} = sum_{i<j} P_ji d_i ^ d_j."""
    return S.bivector


# ============================================================================
# Musical isomorphisms and operators
# ============================================================================

def flat(S: AlmostSymplectic, x: VecField) -> KForm:
    """flat(X) = i(X)omega."""
    return interior(x, S.omega)


def sharp(S: AlmostSymplectic, nu: KForm) -> VecField:
    """Inverse of flat on 1-forms."""
    if nu.degree != 1:
        raise DimensionError(f"sharp needs a 1-form, got degree {nu.degree}")
    S.chart.require_same(nu.chart)
    m = S.chart.dimension
    return KVector(S.chart, 1, {
        (i,): sum(S.inverse[j][i] * nu[(j,)] for j in range(m)) for i in range(m)
    })


def sharp_form(S: AlmostSymplectic, nu: KForm) -> KVector:
    """Raise every index of a k-form: the wedge of the sharps of its factors."""
    basis_sharps = [sharp(S, KForm(S.chart, 1, {(j,): 1})) for j in range(S.chart.dimension)]
    total = KVector.zero(S.chart, nu.degree)
    for key, coefficient in nu.components.items():
        term = KVector.scalar(S.chart, coefficient)
        for idx in key:
            term = wedge(term, basis_sharps[idx])
        total = total + term
    return total


def Lambda(S: AlmostSymplectic, nu: KForm) -> KForm:
    """Lambda = i(omega^{-1}); zero on functions and 1-forms."""
    if nu.degree < 2:
        return KForm.zero(S.chart, 0)
    return interior(S.bivector, nu)


def symplectic_star(S: AlmostSymplectic, nu: KForm) -> KForm:
    """star(v) = i(sharp v) omega^n / n!."""
    volume = power(S.omega, S.n) / factorial(S.n)
    return interior(sharp_form(S, nu), volume)


def codifferential(S: AlmostSymplectic, nu: KForm) -> KForm:
    """delta = star d star."""
    return symplectic_star(S, ext_d(symplectic_star(S, nu)))


def hamiltonian_vector(S: AlmostSymplectic, f: Expr) -> VecField:
    """X_f = -sharp(df)."""
    return -sharp(S, differential(f))


# ============================================================================
# Lepage decomposition and classification
# ============================================================================

@dataclass
class LepageData:
    """d omega = sigma ^ omega + psi, with psi primitive."""

    sigma: KForm
    psi: KForm
    n: int
    cross_check: Optional[Condition] = None


@log_performance(logger)
@lru_cache(maxsize=128)
def lepage_decompose(S: AlmostSymplectic) -> LepageData:
    """
    Lee form sigma and primitive remainder psi.

    Raises:
        DimensionError: n < 2
        ConventionError: reconstruction, primitivity or the δω path fails
    """
    n = S.n
    if n < 2:
        raise DimensionError("n ≥ 2 required for the Lepage decomposition", details={"n": n})
    sigma = Lambda(S, S.d_omega) / (n - 1)
    psi = S.d_omega - wedge(sigma, S.omega)
    reconstruction = vanishing_condition("dω − σ∧ω − ψ = 0", S.d_omega - wedge(sigma, S.omega) - psi)
    primitivity = vanishing_condition("Λψ = 0", Lambda(S, psi))
    for condition in (reconstruction, primitivity):
        if not condition.holds:
            raise ConventionError(
                f"Lepage reconstruction failed: {condition.name}",
                details={"witness": str(condition.witness)},
            )
    if n == 2 and not psi.is_zero:
        raise ConventionError("ψ must vanish for n = 2", details={"psi": psi.to_text()})
    cross_check = vanishing_condition("σ = δω/(n−1)", sigma - codifferential(S, S.omega) / (n - 1))
    if cross_check.indeterminate:
        logger.warning("σ cross-check undecided")
    elif not cross_check.holds:
        raise ConventionError(
            "Lee form paths disagree: Λdω/(n−1) ≠ δω/(n−1)",
            details={"witness": str(cross_check.witness)},
        )
    logger.debug(f"sigma = {sigma.to_text()}, psi = {psi.to_text()}")
    return LepageData(sigma=sigma, psi=psi, n=n, cross_check=cross_check)


def find_potential(sigma: KForm) -> Optional[Expr]:
    """
    A function t with dt = sigma, by coordinate-wise integration; None when
    the integrals do not close or the result fails verification.
    """
    chart = sigma.chart
    t = sympy.Integer(0)
    try:
        for j, coord in enumerate(chart.coords):
            remainder = canonicalize(sigma[(j,)] - diff_value(t, coord))
            if remainder == 0:
                continue
            term = sympy.integrate(remainder, coordinate_symbol(coord))
            if term.has(sympy.Integral):
                return None
            t = t + term
        t = canonicalize(sympy.logcombine(t, force=True))
    except (NotImplementedError, ValueError, TypeError, sympy.PolynomialError):
        return None
    potential = Expr(chart, t)
    if not (differential(potential) - sigma).is_zero:
        return None
    return potential


@dataclass
class Classification:
    kind: str
    lepage: Optional[LepageData] = None
    d_sigma: Optional[KForm] = None
    d_sigma_condition: Optional[Condition] = None
    potential: Optional[Expr] = None

    @property
    def label(self) -> str:
        if self.kind == LOCALLY_CONFORMAL:
            return "globally conformal symplectic" if self.potential is not None else "locally conformal symplectic"
        return self.kind


def _decided(condition: Condition) -> bool:
    if condition.indeterminate:
        raise IndeterminateError(
            f"cannot decide '{condition.name}'",
            details={"component": str(condition.witness)},
        )
    return condition.holds


def classify(S: AlmostSymplectic) -> Classification:
    """
    symplectic iff d omega = 0; locally conformal symplectic iff psi = 0 and
    d sigma = 0; general otherwise.
    """
    if S.n == 1 or _decided(vanishing_condition("dω = 0", S.d_omega)):
        return Classification(kind=SYMPLECTIC)
    lepage = lepage_decompose(S)
    d_sigma = ext_d(lepage.sigma)
    d_sigma_condition = vanishing_condition("dσ = 0", d_sigma)
    psi_zero = _decided(vanishing_condition("ψ = 0", lepage.psi))
    closed = _decided(d_sigma_condition)
    if psi_zero and closed:
        potential = find_potential(lepage.sigma)
        result = Classification(LOCALLY_CONFORMAL, lepage, d_sigma, d_sigma_condition, potential)
    else:
        result = Classification(GENERAL, lepage, d_sigma, d_sigma_condition)
    logger.info(f"classified {S.chart.name} as {result.label}")
    return result


# ============================================================================
# Hamiltonian verdicts
# ============================================================================

def is_locally_hamiltonian(S: AlmostSymplectic, x: VecField) -> Verdict:
    """
    Test d(i(X)omega) = 0 and i(X)d omega = 0, with the sigma/psi
    characterization evaluated as cross-checks.
    """
    S.chart.require_same(x.chart)
    verdict = Verdict(subject=f"X = {x.to_text()}")
    verdict.add(vanishing_condition("d(i(X)ω) = 0", ext_d(flat(S, x))))
    verdict.add(vanishing_condition("i(X)dω = 0", interior(x, S.d_omega)))
    if S.n >= 2:
        lepage = lepage_decompose(S)
        sigma_x = scalar_condition("σ(X) = 0", interior(x, lepage.sigma)[()], S.chart)
        mixed = vanishing_condition(
            "σ∧i(X)ω − i(X)ψ = 0",
            wedge(lepage.sigma, flat(S, x)) - interior(x, lepage.psi),
        )
        verdict.cross_checks.extend([sigma_x, mixed])
        closed = verdict.conditions[0]
        _cross_check_agreement(verdict, [sigma_x, mixed, closed])
    logger.info(f"locally Hamiltonian check for {verdict.subject}: {'pass' if verdict.passed else 'fail'}")
    return verdict


def _cross_check_agreement(verdict: Verdict, characterization: Sequence[Condition]) -> None:
    if any(c.indeterminate for c in list(characterization) + verdict.conditions):
        return
    alternate = all(c.holds for c in characterization)
    if alternate != verdict.passed:
        logger.warning(f"cross-check disagreement for {verdict.subject}")
        verdict.cross_checks.append(Condition("cross-check agreement", False))
        raise ConventionError(
            "the two Hamiltonian characterizations disagree",
            details={"subject": verdict.subject},
        )


def hamiltonian_field(S: AlmostSymplectic, f: Expr) -> Tuple[VecField, Verdict]:
    """
    X_f = -sharp(df) and the verdict L_{X_f} omega = 0, with the sigma/psi
    criteria for Hamiltonian functions as cross-checks.
    """
    S.chart.require_same(f.chart)
    x_f = hamiltonian_vector(S, f)
    df = differential(f)
    verdict = Verdict(subject=f"f = {f.to_text()}", outputs={"X_f": x_f.to_text()})
    verdict.add(vanishing_condition("i(X_f)ω + df = 0", flat(S, x_f) + df))
    verdict.add(vanishing_condition("i(X_f)dω = 0", interior(x_f, S.d_omega)))
    if S.n >= 2:
        lepage = lepage_decompose(S)
        transport = scalar_condition("(♯σ)f = 0", apply_field(sharp(S, lepage.sigma), f), S.chart)
        mixed = vanishing_condition(
            "σ∧df − i(♯df)ψ = 0",
            wedge(lepage.sigma, df) - interior(sharp(S, df), lepage.psi),
        )
        verdict.cross_checks.extend([transport, mixed])
        _cross_check_agreement(verdict, [transport, mixed])
    logger.info(f"Hamiltonian function check for {verdict.subject}: {'pass' if verdict.passed else 'fail'}")
    return x_f, verdict


def _require_hamiltonian(S: AlmostSymplectic, f: Expr) -> VecField:
    x_f, verdict = hamiltonian_field(S, f)
    if not verdict.passed:
        raise PreconditionError(f"{f.to_text()} is not a Hamiltonian function", verdict)
    return x_f


def poisson_bracket(S: AlmostSymplectic, f: Expr, h: Expr) -> Expr:
    """
    {f,h} = omega(X_f, X_h) = X_f h = -X_h f; all three are computed and compared.

    Raises:
        PreconditionError: f or h is not Hamiltonian
        ConventionError: the three expressions disagree
    """
    x_f = _require_hamiltonian(S, f)
    x_h = _require_hamiltonian(S, h)
    paired = form_pairing(S.omega, x_f, x_h)
    along_f = Expr(S.chart, apply_field(x_f, h))
    along_h = -Expr(S.chart, apply_field(x_h, f))
    if not (paired == along_f and along_f == along_h):
        raise ConventionError(
            "bracket expressions disagree",
            details={"ω(X_f,X_h)": paired.to_text(), "X_f h": along_f.to_text(), "-X_h f": along_h.to_text()},
        )
    return paired


def ham_product_field(S: AlmostSymplectic, f: Expr, h: Expr) -> Verdict:
    """X_{fh} = f X_h + h X_f, and fh is Hamiltonian."""
    x_f = _require_hamiltonian(S, f)
    x_h = _require_hamiltonian(S, h)
    product = f * h
    x_fh, product_verdict = hamiltonian_field(S, product)
    verdict = Verdict(subject=f"fh = {product.to_text()}", outputs={"X_fh": x_fh.to_text()})
    verdict.add(vanishing_condition("X_fh − f·X_h − h·X_f = 0", x_fh - x_h * f - x_f * h))
    verdict.add(product_verdict.condition("i(X_f)dω = 0"))
    return verdict


def bracket_of_fields_check(S: AlmostSymplectic, x: VecField, y: VecField) -> Verdict:
    """i([X,Y])omega + d(omega(X,Y)) = 0 for locally Hamiltonian X, Y."""
    for field_ in (x, y):
        field_verdict = is_locally_hamiltonian(S, field_)
        if not field_verdict.passed:
            raise PreconditionError(f"{field_.to_text()} is not locally Hamiltonian", field_verdict)
    bracket = vf_bracket(x, y)
    hamiltonian = form_pairing(S.omega, x, y)
    verdict = Verdict(
        subject=f"[{x.to_text()}, {y.to_text()}]",
        outputs={"[X,Y]": bracket.to_text(), "ω(X,Y)": hamiltonian.to_text()},
    )
    verdict.add(vanishing_condition("i([X,Y])ω + d(ω(X,Y)) = 0", flat(S, bracket) + differential(hamiltonian)))
    return verdict


def jacobi_check(S: AlmostSymplectic, f: Expr, h: Expr, k: Expr) -> Verdict:
    """{f,{h,k}} + {h,{k,f}} + {k,{f,h}} = 0."""
    total = (
        poisson_bracket(S, f, poisson_bracket(S, h, k))
        + poisson_bracket(S, h, poisson_bracket(S, k, f))
        + poisson_bracket(S, k, poisson_bracket(S, f, h))
    )
    verdict = Verdict(subject=f"Jacobi({f.to_text()}, {h.to_text()}, {k.to_text()})")
    verdict.add(scalar_condition("Jacobi identity", total, S.chart))
    return verdict


def verify_candidate(S: AlmostSymplectic, f: Expr, point: Optional[SamplePoint] = None) -> Verdict:
    """
    Check a candidate solution f of the Hamiltonian-tangent-vector PDE system
    i(sharp df) d omega = 0; report sharp(df) at the point when given.
    """
    x = sharp(S, differential(f))
    verdict = Verdict(subject=f"f = {f.to_text()}", outputs={"♯df": x.to_text()})
    verdict.add(vanishing_condition("i(♯df)dω = 0", interior(x, S.d_omega)))
    if point is not None:
        values = [sympy.sstr(v) for v in at_point([x.as_list()], point).row(0)]
        verdict.outputs["tangent vector"] = f"({', '.join(values)}) at {point}"
    return verdict


# ============================================================================
# Pointwise structures
# ============================================================================

@dataclass
class ConeResult:
    point: SamplePoint
    basis: List[List[sympy.Expr]]

    @property
    def dimension(self) -> int:
        return len(self.basis)


def hamiltonian_cone_at(S: AlmostSymplectic, point: SamplePoint) -> ConeResult:
    """Exact null space of v -> i(v)(d omega)_x."""
    S.chart.require_same(point.chart)
    matrix, _ = contraction_matrix(S.d_omega)
    basis = pointwise_nullspace(at_point(matrix, point))
    logger.debug(f"Hamiltonian cone at {point}: dimension {len(basis)}")
    return ConeResult(point=point, basis=basis)


@dataclass
class DiracFrame:
    """Pointwise frame of D_omega(x) as (vector, covector) pairs."""

    point: SamplePoint
    pairs: List[Tuple[List[sympy.Expr], List[sympy.Expr]]]
    dim_h: int
    rank: int = 0
    isotropic: bool = False

    def pairing(self, a: int, b: int) -> sympy.Expr:
        (x, alpha), (y, beta) = self.pairs[a], self.pairs[b]
        return canonicalize(sum(p * q for p, q in zip(alpha, y)) + sum(p * q for p, q in zip(beta, x)))


def dirac_frame_at(S: AlmostSymplectic, point: SamplePoint, fields: Sequence[VecField]) -> DiracFrame:
    """
    Frame {(X_a, (i(X_a)omega)_x)} + {(0, nu_b)}, nu_b spanning ann H_x, where
    H_x is the span of the supplied locally Hamiltonian fields at x.

    Raises:
        PreconditionError: a supplied field is not locally Hamiltonian
        ConventionError: the frame is not isotropic of rank 2n
    """
    m = S.chart.dimension
    vectors: List[List[sympy.Expr]] = []
    covectors: List[List[sympy.Expr]] = []
    for field_ in fields:
        verdict = is_locally_hamiltonian(S, field_)
        if not verdict.passed:
            raise PreconditionError(f"{field_.to_text()} is not locally Hamiltonian", verdict)
        value = list(at_point([field_.as_list()], point).row(0))
        candidate = sympy.Matrix(vectors + [value])
        if pointwise_rank(candidate) > len(vectors):
            vectors.append(value)
            flat_x = flat(S, field_)
            covectors.append(list(at_point([[flat_x[(j,)] for j in range(m)]], point).row(0)))
    pairs = list(zip(vectors, covectors))
    if vectors:
        annihilator = pointwise_nullspace(sympy.Matrix(vectors))
    else:
        annihilator = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    zero = [sympy.Integer(0)] * m
    pairs += [(zero, list(nu)) for nu in annihilator]
    frame = DiracFrame(point=point, pairs=pairs, dim_h=len(vectors))
    frame.rank = pointwise_rank(sympy.Matrix([list(x) + list(a) for x, a in pairs]))
    frame.isotropic = all(frame.pairing(a, b) == 0 for a in range(len(pairs)) for b in range(a, len(pairs)))
    if frame.rank != m or not frame.isotropic:
        raise ConventionError(
            "Dirac frame is not maximal isotropic",
            details={"rank": frame.rank, "isotropic": frame.isotropic},
        )
    return frame


def frame_to_text(frame: DiracFrame, chart: Chart) -> List[str]:
    lines = []
    for vector, covector in frame.pairs:
        x = KVector.from_list(chart, vector).to_text()
        a = KForm(chart, 1, {(j,): c for j, c in enumerate(covector)}).to_text()
        lines.append(f"({x}, {a})")
    return lines
