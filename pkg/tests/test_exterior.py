"""
Unit tests for the exterior algebra: forms, multivectors, d, contraction,
Lie derivatives, brackets and pullbacks.
"""

import pytest
import sympy

from src.expr import Expr, parse_scalar
from src.exterior import (
    KForm,
    KVector,
    MapExpr,
    apply_field,
    compose,
    differential,
    evaluate_form,
    ext_d,
    form_pairing,
    identity_map,
    interior,
    kernel_of_contraction,
    lie_derivative,
    parse_field,
    parse_form,
    power,
    pullback,
    vanishing_condition,
    vf_bracket,
    wedge,
)
from src.models import Chart, ChartMismatchError, DimensionError, EvaluationError, ParseError, SamplePoint
from src.parser import coordinate_symbol


@pytest.fixture
def omega(quadrant) -> KForm:
    return parse_form("x1*dx2^dx3 + x2*dx1^dx4", quadrant)


@pytest.fixture
def level_chart() -> Chart:
    return Chart("N", ("x1", "x3", "x4"), domain_hint="x1>0, t0>0", params=("t0",))


@pytest.mark.unit
class TestLiterals:
    """Test parsing and printing of form and vector literals."""

    def test_parse_components(self, omega):
        """Test that components are stored on sorted indices."""
        assert omega.degree == 2
        assert omega[(1, 2)] == coordinate_symbol("x1")
        assert omega[(2, 1)] == -coordinate_symbol("x1")
        assert omega[(0, 1)] == 0

    def test_printed_form_reparses(self, omega, quadrant):
        """Test that to_text emits the literal grammar."""
        assert omega.to_text() == "(x2)*dx1^dx4 + (x1)*dx2^dx3"
        assert parse_form(omega.to_text(), quadrant) == omega

    def test_star_is_wedge(self, quadrant):
        """Test that '*' between forms is the wedge product."""
        assert parse_form("dx1*dx2", quadrant) == parse_form("dx1^dx2", quadrant)

    def test_mixed_degree_rejected(self, quadrant):
        """Test that terms of different degree cannot be added."""
        with pytest.raises(ParseError, match="different degree"):
            parse_form("dx1 + dx1^dx2", quadrant)

    def test_vector_in_form_rejected(self, quadrant):
        """Test that basis vectors are not form literals."""
        with pytest.raises(ParseError):
            parse_form("@x1", quadrant)

    def test_field_literal(self, quadrant):
        """Test a vector field literal."""
        x = parse_field("x1*@x1 - x2*@x2", quadrant)

        assert x.as_list() == [coordinate_symbol("x1"), -coordinate_symbol("x2"), 0, 0]

    def test_from_list_length(self, quadrant):
        """Test that a field needs one component per coordinate."""
        with pytest.raises(DimensionError):
            KVector.from_list(quadrant, [1, 2])


@pytest.mark.unit
class TestAlgebra:
    """Test wedge, d, contraction and brackets."""

    def test_wedge_anticommutes(self, quadrant):
        """Test graded commutativity of 1-forms."""
        a = parse_form("x1*dx1 + dx3", quadrant)
        b = parse_form("dx2 - x4*dx3", quadrant)

        assert wedge(a, b) == -wedge(b, a)
        assert wedge(a, a).is_zero

    def test_power_of_omega(self, omega, quadrant):
        """Test omega^2 = 2 x1 x2 dx1^dx2^dx3^dx4."""
        assert power(omega, 2) == parse_form("2*x1*x2*dx1^dx2^dx3^dx4", quadrant)
        assert power(omega, 3).is_zero

    def test_exterior_derivative(self, omega, quadrant):
        """Test d omega."""
        assert ext_d(omega) == parse_form("dx1^dx2^dx3 - dx1^dx2^dx4", quadrant)

    def test_d_squared_vanishes(self, quadrant, random_polynomial):
        """Test d(d a) = 0 for a random polynomial 1-form."""
        coefficients = [random_polynomial(quadrant.coords) for _ in quadrant.coords]
        a = parse_form(" + ".join(f"({c})*d{x}" for c, x in zip(coefficients, quadrant.coords)), quadrant)

        assert ext_d(ext_d(a)).is_zero

    def test_contraction(self, quadrant):
        """Test i(e1) and i(e2) of dx1^dx2."""
        area = parse_form("dx1^dx2", quadrant)

        assert interior(parse_field("@x1", quadrant), area) == parse_form("dx2", quadrant)
        assert interior(parse_field("@x2", quadrant), area) == parse_form("-dx1", quadrant)

    def test_contraction_is_antiderivation(self, quadrant, random_polynomial):
        """Test i(X)(a^b) = i(X)a ^ b - a ^ i(X)b for 1-forms."""
        a = parse_form(f"({random_polynomial(('x1', 'x2'))})*dx1 + dx4", quadrant)
        b = parse_form(f"x3*dx2 + ({random_polynomial(('x3', 'x4'))})*dx3", quadrant)
        x = parse_field("x2*@x1 + @x2 - x1*@x3", quadrant)

        left = interior(x, wedge(a, b))
        right = wedge(interior(x, a), b) - wedge(a, interior(x, b))

        assert left == right

    def test_contraction_degree_error(self, quadrant):
        """Test that a bivector cannot contract a 1-form."""
        with pytest.raises(DimensionError):
            interior(parse_field("@x1^@x2", quadrant), parse_form("dx1", quadrant))

    def test_chart_mismatch(self, quadrant, plane):
        """Test that combining objects on different charts fails."""
        with pytest.raises(ChartMismatchError):
            wedge(parse_form("dx1", quadrant), parse_form("dx1", plane))

    def test_form_pairing(self, omega, quadrant):
        """Test omega(e2, e3) = x1."""
        value = form_pairing(omega, parse_field("@x2", quadrant), parse_field("@x3", quadrant))

        assert value == parse_scalar("x1", quadrant)

    def test_vector_field_bracket(self, quadrant):
        """Test [x1 e2, e1] = -e2."""
        bracket = vf_bracket(parse_field("x1*@x2", quadrant), parse_field("@x1", quadrant))

        assert bracket == parse_field("-@x2", quadrant)

    def test_apply_field(self, quadrant):
        """Test X(f) for the Euler field of (x1, x2)."""
        euler = parse_field("x1*@x1 + x2*@x2", quadrant)

        assert apply_field(euler, parse_scalar("x1*x2", quadrant)) == 2 * coordinate_symbol("x1") * coordinate_symbol("x2")

    def test_lie_derivative(self, quadrant):
        """Test L_{e1}(x1 dx2) = dx2 and L_X f = X f."""
        e1 = parse_field("@x1", quadrant)

        assert lie_derivative(e1, parse_form("x1*dx2", quadrant)) == parse_form("dx2", quadrant)
        assert lie_derivative(e1, KForm.scalar(quadrant, coordinate_symbol("x1") ** 2))[()] == 2 * coordinate_symbol("x1")

    def test_lie_derivative_commutes_with_d(self, omega, quadrant):
        """Test d L_X = L_X d."""
        x = parse_field("x3*@x1 + x1*x2*@x4", quadrant)

        assert ext_d(lie_derivative(x, omega)) == lie_derivative(x, ext_d(omega))


@pytest.mark.unit
class TestPullback:
    """Test maps between charts and pullbacks."""

    def test_pullback_to_level_set(self, omega, quadrant, level_chart):
        """Test the restriction of omega to x1 x2 = t0."""
        iota = MapExpr(level_chart, quadrant, (coordinate_symbol("x1"), coordinate_symbol("t0") / coordinate_symbol("x1"),
                                              coordinate_symbol("x3"), coordinate_symbol("x4")))

        assert pullback(iota, omega) == parse_form("-(t0/x1)*dx1^dx3 + (t0/x1)*dx1^dx4", level_chart)

    def test_pullback_commutes_with_d(self, omega, quadrant, level_chart):
        """Test d F*a = F*(d a)."""
        iota = MapExpr(level_chart, quadrant, (coordinate_symbol("x1"), coordinate_symbol("x1") * coordinate_symbol("x3"),
                                              coordinate_symbol("x3") ** 2, coordinate_symbol("x4")))

        assert ext_d(pullback(iota, omega)) == pullback(iota, ext_d(omega))

    def test_identity_and_composition(self, omega, quadrant):
        """Test that the identity pulls back trivially and composition is contravariant."""
        swap = MapExpr(quadrant, quadrant, tuple(coordinate_symbol(c) for c in ("x2", "x1", "x4", "x3")))

        assert pullback(identity_map(quadrant), omega) == omega
        assert pullback(compose(swap, swap), omega) == pullback(swap, pullback(swap, omega))
        assert pullback(compose(swap, swap), omega) == omega

    def test_wrong_component_count(self, quadrant, plane):
        """Test that a map needs one component per target coordinate."""
        with pytest.raises(DimensionError):
            MapExpr(plane, quadrant, (coordinate_symbol("x1"),))

    def test_ln_of_negative_constant(self, plane):
        """Test that pulling ln back onto a negative constant fails."""
        target = Chart("Q", ("u", "v"))
        f = MapExpr(plane, target, (-1, coordinate_symbol("y1")))

        with pytest.raises(EvaluationError):
            f.pull_scalar(parse_scalar("ln(u)", target).value)


@pytest.mark.unit
class TestKernelsAndConditions:
    """Test contraction kernels and vanishing conditions."""

    def test_kernel_of_d_theta(self, rigid_structure):
        """Test that ker i(.)d theta is spanned by a multiple of x1 e1 - x2 e2."""
        d_theta = rigid_structure.d_omega
        kernel = kernel_of_contraction(d_theta)
        x1, x2 = coordinate_symbol("x1"), coordinate_symbol("x2")

        assert kernel.dimension == 1
        assert kernel.rank == 3
        field = kernel.fields[0]
        assert interior(field, d_theta).is_zero
        assert field[(2,)] == 0 and field[(3,)] == 0
        assert Expr(d_theta.chart, field[(0,)] * x2 + field[(1,)] * x1).is_syntactically_zero

    def test_function_has_no_kernel(self, quadrant):
        """Test that contraction needs positive degree."""
        with pytest.raises(DimensionError):
            kernel_of_contraction(KForm.scalar(quadrant, 1))

    def test_vanishing_condition_witness(self, quadrant):
        """Test that a failing condition names the offending component."""
        condition = vanishing_condition("d(x3 dx4) = 0", ext_d(parse_form("x3*dx4", quadrant)))

        assert not condition.holds
        assert condition.witness.component == "dx3^dx4"

    def test_differential_and_evaluation(self, quadrant):
        """Test df and exact component values at a point."""
        df = differential(parse_scalar("x1*x2", quadrant))
        point = SamplePoint.of(quadrant, [2, 3, 0, 0])

        assert evaluate_form(df, point) == {(0,): 3, (1,): 2}


@pytest.mark.slow
class TestRandomizedIdentities:
    """Test the exterior calculus identities on seeded random polynomial data."""

    def test_d_squared_vanishes(self, rng, euclidean, random_form):
        """Test d(d a) = 0 for forms of degree <= 3 in dimension <= 8."""
        for _ in range(100):
            chart = euclidean(int(rng.integers(1, 9)))
            degree = int(rng.integers(0, min(3, chart.dimension) + 1))
            a = random_form(chart, degree)

            assert ext_d(ext_d(a)).is_zero

    def test_graded_leibniz_rule(self, rng, euclidean, random_form):
        """Test d(a^b) = da^b + (-1)^p a^db."""
        for _ in range(50):
            chart = euclidean(int(rng.integers(2, 6)))
            p = int(rng.integers(0, 3))
            q = int(rng.integers(0, min(2, chart.dimension - p) + 1))
            a, b = random_form(chart, p), random_form(chart, q)

            assert ext_d(wedge(a, b)) == wedge(ext_d(a), b) + wedge(a, ext_d(b)) * (-1) ** p

    def test_contraction_is_graded_antiderivation(self, rng, euclidean, random_form, random_field):
        """Test i(X)(a^b) = i(X)a^b + (-1)^p a^i(X)b."""
        for _ in range(50):
            chart = euclidean(int(rng.integers(3, 6)))
            p = int(rng.integers(1, 3))
            q = int(rng.integers(1, min(2, chart.dimension - p) + 1))
            a, b, x = random_form(chart, p), random_form(chart, q), random_field(chart)

            left = interior(x, wedge(a, b))
            right = wedge(interior(x, a), b) + wedge(a, interior(x, b)) * (-1) ** p

            assert left == right

    def test_lie_derivative_commutes_with_d(self, rng, euclidean, random_form, random_field):
        """Test L_X(da) = d(L_X a) on random pairs."""
        for _ in range(50):
            chart = euclidean(int(rng.integers(2, 5)))
            a = random_form(chart, int(rng.integers(0, 3)))
            x = random_field(chart)

            assert lie_derivative(x, ext_d(a)) == ext_d(lie_derivative(x, a))

    def test_lie_derivative_is_a_derivation_of_wedge(self, rng, euclidean, random_form, random_field):
        """Test L_X(a^b) = L_X a^b + a^L_X b."""
        for _ in range(30):
            chart = euclidean(3)
            a, b = random_form(chart, 1), random_form(chart, int(rng.integers(0, 2)))
            x = random_field(chart)

            assert lie_derivative(x, wedge(a, b)) == wedge(lie_derivative(x, a), b) + wedge(a, lie_derivative(x, b))

    def test_lie_derivative_is_first_order_flow(self, rng, euclidean, random_form, random_field):
        """Test d/dt at t = 0 of (x + tX)*a against L_X a."""
        chart = euclidean(3, name="F", params=("t",))
        t = coordinate_symbol("t")

        for _ in range(20):
            degree = int(rng.integers(0, 3))
            a, x = random_form(chart, degree, terms=2), random_field(chart, max_degree=1)
            flow = MapExpr(chart, chart, tuple(
                coordinate_symbol(c) + t * x[(i,)] for i, c in enumerate(chart.coords)
            ))
            moved = pullback(flow, a)
            first_order = KForm(chart, degree, {
                key: sympy.diff(value, t).subs(t, 0) for key, value in moved.components.items()
            })

            assert first_order == lie_derivative(x, a)

    def test_pullback_commutes_with_d(self, rng, euclidean, random_form, random_polynomial):
        """Test d(F*a) = F*(da) for random polynomial maps."""
        for _ in range(50):
            source = euclidean(int(rng.integers(1, 4)), name="S")
            target = euclidean(int(rng.integers(2, 4)), name="T")
            f = MapExpr(source, target, tuple(
                parse_scalar(random_polynomial(source.coords, 2, 1), source).value for _ in target.coords
            ))
            a = random_form(target, int(rng.integers(0, 2)), terms=2, max_degree=1)

            assert ext_d(pullback(f, a)) == pullback(f, ext_d(a))

    def test_pullback_is_contravariant(self, rng, euclidean, random_form, random_polynomial):
        """Test (G o F)* = F* o G* on random composable maps."""
        for _ in range(20):
            first = euclidean(2, name="A")
            middle = euclidean(int(rng.integers(2, 4)), name="B")
            last = euclidean(3, name="C")
            f = MapExpr(first, middle, tuple(
                parse_scalar(random_polynomial(first.coords, 2, 1), first).value for _ in middle.coords
            ))
            g = MapExpr(middle, last, tuple(
                parse_scalar(random_polynomial(middle.coords, 2, 1), middle).value for _ in last.coords
            ))
            a = random_form(last, int(rng.integers(0, 3)), terms=2, max_degree=1)

            assert pullback(compose(g, f), a) == pullback(f, pullback(g, a))
