"""
Verification service: turns a manifest plus subcommand options into a Report.

This module is the business-logic layer between the command line and the
computation modules. Each subcommand has one method; `run` dispatches.
"""

from fractions import Fraction
from typing import Callable, Dict, List, Optional

from pydantic import BaseModel, Field

from src.config import DEFAULT_SETTINGS, Settings
from src.expr import to_text
from src.exterior import ext_d, kernel_of_contraction, random_points
from src.liealg import ce_differential, diagonal_check, fundamental_form, jacobi_defect
from src.logging_config import get_logger
from src.manifest import Manifest
from src.models import Chart, Condition, ParseError, SamplePoint, Verdict
from src.reduction import (
    MomentumData,
    check_momentum_map,
    check_reduction,
    lift_momentum,
    restrict_to_level,
)
from src.report import Report
from src.symplectic import (
    AlmostSymplectic,
    bracket_of_fields_check,
    classify,
    dirac_frame_at,
    frame_to_text,
    hamiltonian_cone_at,
    hamiltonian_field,
    is_locally_hamiltonian,
    jacobi_check,
    lepage_decompose,
    poisson_bracket,
    verify_candidate,
)
from src.tangent import (
    associated_structures,
    check_associated,
    ehresmann_curvature,
    horizontal_hamiltonian,
    transport_hamiltonian,
    vertical_from_closed_form,
    vertical_hamiltonian,
)


logger = get_logger(__name__)

SUBCOMMANDS = (
    "lepage", "classify", "check-field", "ham", "bracket", "kernel", "cone", "dirac",
    "momentum", "restrict", "reduce", "lift", "curvature", "vham", "hham", "lie",
)


class RunOptions(BaseModel):
    """Names and values selected on the command line."""

    form: Optional[str] = None
    field: Optional[str] = None
    fields: List[str] = Field(default_factory=list)
    function: Optional[str] = None
    functions: List[str] = Field(default_factory=list)
    map: Optional[str] = None
    point: Optional[List[str]] = None
    quotient_map: Optional[str] = None
    reduced_form: Optional[str] = None
    metric: Optional[str] = None
    connection: Optional[str] = None
    tangent: Optional[str] = None
    momentum: Optional[str] = None
    xi: Optional[List[str]] = None


def _vector_text(values) -> str:
    return "(" + ", ".join(str(v) for v in values) + ")"


class VerificationService:
    """Runs subcommands against one loaded manifest."""

    def __init__(self, manifest: Manifest, settings: Settings = DEFAULT_SETTINGS):
        self.manifest = manifest
        self.settings = settings
        self._handlers: Dict[str, Callable[[RunOptions], Report]] = {
            name: getattr(self, "_" + name.replace("-", "_")) for name in SUBCOMMANDS
        }

    def run(self, subcommand: str, options: Optional[RunOptions] = None) -> Report:
        """
        Run one subcommand.

        Raises:
            ValueError: unknown subcommand
            GeometryError: invalid input or an operation that cannot produce a value
        """
        if subcommand not in self._handlers:
            raise ValueError(f"unknown subcommand '{subcommand}'")
        options = options or RunOptions()
        logger.debug(f"running {subcommand} with {options.model_dump(exclude_none=True)}")
        return self._handlers[subcommand](options)

    # ------------------------------------------------------------------
    # Shared lookups
    # ------------------------------------------------------------------

    def structure(self, options: RunOptions) -> AlmostSymplectic:
        return AlmostSymplectic.build(self.manifest.form(options.form))

    def points(self, chart: Chart, options: RunOptions, count: int) -> List[SamplePoint]:
        """The --point values, or seeded sample points of the chart."""
        if options.point is None:
            return random_points(chart, count, self.settings.seed)
        try:
            values = [Fraction(v.strip()) for v in options.point]
        except (ValueError, ZeroDivisionError):
            raise ParseError("invalid point coordinate", source=",".join(options.point)) from None
        return [SamplePoint.of(chart, values)]

    def _structures(self, options: RunOptions):
        conn = self.manifest.connection(options.connection)
        _, gamma = self.manifest.metric(options.metric)
        return associated_structures(gamma, conn)

    # ------------------------------------------------------------------
    # symplectic
    # ------------------------------------------------------------------

    def _lepage(self, options: RunOptions) -> Report:
        S = self.structure(options)
        data = lepage_decompose(S)
        verdict = Verdict(
            subject=f"ω = {S.omega.to_text()}",
            outputs={"σ": data.sigma.to_text(), "ψ": data.psi.to_text()},
        )
        if data.cross_check is not None:
            verdict.cross_checks.append(data.cross_check)
        return Report.from_verdicts("lepage", [verdict])

    def _classify(self, options: RunOptions) -> Report:
        S = self.structure(options)
        result = classify(S)
        verdict = Verdict(subject=f"ω = {S.omega.to_text()}", outputs={"class": result.label})
        if result.lepage is not None:
            verdict.outputs["σ"] = result.lepage.sigma.to_text()
            verdict.outputs["ψ"] = result.lepage.psi.to_text()
        if result.d_sigma is not None:
            verdict.outputs["dσ"] = result.d_sigma.to_text()
            verdict.cross_checks.append(result.d_sigma_condition)
        if result.potential is not None:
            verdict.outputs["t"] = result.potential.to_text()
        return Report.from_verdicts("classify", [verdict])

    def _check_field(self, options: RunOptions) -> Report:
        S = self.structure(options)
        return Report.from_verdicts("check-field", [is_locally_hamiltonian(S, self.manifest.field_named(options.field))])

    def _ham(self, options: RunOptions) -> Report:
        S = self.structure(options)
        f = self.manifest.function(options.function)
        _, verdict = hamiltonian_field(S, f)
        verdicts = [verdict]
        if options.point is not None:
            verdicts.append(verify_candidate(S, f, self.points(S.chart, options, 1)[0]))
        return Report.from_verdicts("ham", verdicts)

    def _bracket(self, options: RunOptions) -> Report:
        S = self.structure(options)
        functions = [self.manifest.function(n) for n in options.functions]
        if len(functions) == 3:
            return Report.from_verdicts("bracket", [jacobi_check(S, *functions)])
        if len(functions) != 2:
            raise ParseError("bracket needs two or three functions", source=",".join(options.functions))
        f, h = functions
        value = poisson_bracket(S, f, h)
        x_f, _ = hamiltonian_field(S, f)
        x_h, _ = hamiltonian_field(S, h)
        verdict = bracket_of_fields_check(S, x_f, x_h)
        return Report.from_verdicts("bracket", [verdict], {"{f,h}": value.to_text()})

    def _kernel(self, options: RunOptions) -> Report:
        form = self.manifest.form(options.form)
        eta = ext_d(form) if form.degree == 2 else form
        kernel = kernel_of_contraction(eta)
        verdict = Verdict(subject=f"ker i(·){eta.to_text()}", outputs={
            "dimension": str(kernel.dimension),
            "rank": str(kernel.rank),
            "pivots": ", ".join(p.to_text() for p in kernel.pivots),
        })
        for index, field_ in enumerate(kernel.fields):
            verdict.outputs[f"K{index + 1}"] = field_.to_text()
        return Report.from_verdicts("kernel", [verdict])

    def _cone(self, options: RunOptions) -> Report:
        S = self.structure(options)
        verdicts = []
        for point in self.points(S.chart, options, self.settings.level_points):
            cone = hamiltonian_cone_at(S, point)
            verdicts.append(Verdict(
                subject=f"H_x at {point}",
                outputs={f"cone {point}": "; ".join(_vector_text(v) for v in cone.basis) or "0"},
            ))
        return Report.from_verdicts("cone", verdicts)

    def _dirac(self, options: RunOptions) -> Report:
        S = self.structure(options)
        fields = [self.manifest.field_named(n) for n in options.fields]
        verdicts = []
        for point in self.points(S.chart, options, self.settings.level_points):
            frame = dirac_frame_at(S, point, fields)
            verdict = Verdict(subject=f"D_ω at {point}", outputs={
                f"frame {point}": "; ".join(frame_to_text(frame, S.chart)),
            })
            verdict.add(Condition(f"rank = {S.chart.dimension}", frame.rank == S.chart.dimension))
            verdict.add(Condition("isotropic", frame.isotropic))
            verdicts.append(verdict)
        return Report.from_verdicts("dirac", verdicts)

    # ------------------------------------------------------------------
    # reduction
    # ------------------------------------------------------------------

    def _momentum_data(self, options: RunOptions) -> MomentumData:
        if options.fields or options.functions:
            return MomentumData(
                [self.manifest.field_named(n) for n in options.fields],
                [self.manifest.function(n) for n in options.functions],
            )
        return self.manifest.momentum(options.momentum)

    def _momentum(self, options: RunOptions) -> Report:
        S = self.structure(options)
        return Report.from_verdicts("momentum", [check_momentum_map(S, self._momentum_data(options))])

    def _restrict(self, options: RunOptions) -> Report:
        S = self.structure(options)
        level = restrict_to_level(S, self.manifest.map(options.map), self.settings.level_points, self.settings.seed)
        verdict = Verdict(subject="ι*ω", outputs={"ι*ω": level.form.to_text()})
        if level.commutation is not None:
            verdict.add(level.commutation)
        for kernel in level.kernels:
            verdict.outputs[f"ker at {kernel.point}"] = "; ".join(_vector_text(v) for v in kernel.basis) or "0"
        return Report.from_verdicts("restrict", [verdict])

    def _reduce(self, options: RunOptions) -> Report:
        S = self.structure(options)
        param = self.manifest.map(options.map)
        level = restrict_to_level(S, param, self.settings.level_points, self.settings.seed)
        verdict = check_reduction(
            level.form,
            self.manifest.map(options.quotient_map),
            self.manifest.form(options.reduced_form),
            self.settings.level_points,
            self.settings.seed,
        )
        return Report.from_verdicts("reduce", [verdict], {"ι*ω": level.form.to_text()})

    # ------------------------------------------------------------------
    # tangent
    # ------------------------------------------------------------------

    def _lift(self, options: RunOptions) -> Report:
        S = self.structure(options)
        tc = self.manifest.tangent(options.tangent)
        if options.function is not None:
            return Report.from_verdicts("lift", [transport_hamiltonian(tc, S, self.manifest.function(options.function))])
        return Report.from_verdicts("lift", [lift_momentum(tc, S, self._momentum_data(options))])

    def _curvature(self, options: RunOptions) -> Report:
        curvature = ehresmann_curvature(self.manifest.connection(options.connection))
        verdict = Verdict(subject="Ehresmann curvature")
        for (k, i, j), value in sorted(curvature.components.items()):
            if i < j:
                verdict.outputs[f"R^{k + 1}_{i + 1}{j + 1}"] = to_text(value)
        verdict.cross_checks.append(Condition("R = 0", curvature.is_zero))
        return Report.from_verdicts("curvature", [verdict])

    def _vham(self, options: RunOptions) -> Report:
        structures = self._structures(options)
        if options.form is not None:
            _, verdict = vertical_from_closed_form(structures, self.manifest.form(options.form))
        else:
            _, verdict = vertical_hamiltonian(structures, self.manifest.function(options.function))
        associated = check_associated(structures)
        verdict.cross_checks.extend(associated.conditions)
        return Report.from_verdicts("vham", [verdict], {"ω": structures.omega.to_text()})

    def _hham(self, options: RunOptions) -> Report:
        structures = self._structures(options)
        _, verdict = horizontal_hamiltonian(structures, self.manifest.function(options.function))
        return Report.from_verdicts("hham", [verdict], {"ω": structures.omega.to_text()})

    # ------------------------------------------------------------------
    # liealg
    # ------------------------------------------------------------------

    def _lie(self, options: RunOptions) -> Report:
        data = self.manifest.lie_data()
        omega = fundamental_form(data)
        outputs = {
            "ω": omega.to_text(),
            "dω": ce_differential(omega, data).to_text(),
            "Jacobi defect entries": str(len(jacobi_defect(data))),
        }
        xi = options.xi if options.xi is not None else ["0"] * data.r
        try:
            values = [Fraction(v.strip()) for v in xi]
        except (ValueError, ZeroDivisionError):
            raise ParseError("invalid xi component", source=",".join(xi)) from None
        return Report.from_verdicts("lie", [diagonal_check(data, values)], outputs)


def run(manifest: Manifest, subcommand: str, options: Optional[RunOptions] = None,
        settings: Settings = DEFAULT_SETTINGS) -> Report:
    return VerificationService(manifest, settings).run(subcommand, options)
