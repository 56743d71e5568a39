"""
Report models for the command line: one Report per subcommand run, rendered
as text for people or as JSON with a stable schema for machines.

JSON schema (every subcommand):
    {subcommand, subject, verdict, conditions[], witnesses[], outputs{}, timing_ms}
"""

from typing import Dict, List, Optional

from pydantic import BaseModel, Field

from src.models import Condition, Verdict, Witness


PASS = "pass"
FAIL = "fail"
INDETERMINATE = "indeterminate"


class WitnessReport(BaseModel):
    """Where a condition fails: component, expression and sample point."""

    condition: str
    component: str
    expression: str
    point: Optional[Dict[str, str]] = None
    value: Optional[float] = None

    @classmethod
    def from_witness(cls, condition: str, witness: Witness) -> "WitnessReport":
        point = None
        if witness.point is not None:
            point = {name: str(value) for name, value in witness.point.as_dict().items()}
        return cls(
            condition=condition,
            component=witness.component,
            expression=witness.expression,
            point=point,
            value=witness.value,
        )

    def to_text(self) -> str:
        where = ""
        if self.point:
            where = " at (" + ", ".join(f"{k}={v}" for k, v in self.point.items()) + ")"
        return f"{self.component} = {self.expression}{where}"


class ConditionReport(BaseModel):
    name: str
    holds: bool
    indeterminate: bool = False
    cross_check: bool = False
    subject: str = ""
    witness: Optional[WitnessReport] = None

    @classmethod
    def from_condition(cls, condition: Condition, subject: str, cross_check: bool = False) -> "ConditionReport":
        witness = None
        if condition.witness is not None:
            witness = WitnessReport.from_witness(condition.name, condition.witness)
        return cls(
            name=condition.name,
            holds=condition.holds,
            indeterminate=condition.indeterminate,
            cross_check=cross_check,
            subject=subject,
            witness=witness,
        )

    def to_text(self) -> str:
        mark = "✓" if self.holds else ("?" if self.indeterminate else "✗")
        suffix = "  (cross-check)" if self.cross_check else ""
        text = f"  {mark} {self.name}{suffix}"
        if self.witness is not None:
            text += f"\n      witness: {self.witness.to_text()}"
        return text


class Report(BaseModel):
    """
    Outcome of one subcommand.

    EXAMPLE USAGE:
    >>> report = Report.from_verdicts("ham", [verdict])
    >>> report.exit_code
    0
    """

    subcommand: str
    subject: str = ""
    verdict: str = PASS
    conditions: List[ConditionReport] = Field(default_factory=list)
    witnesses: List[WitnessReport] = Field(default_factory=list)
    outputs: Dict[str, str] = Field(default_factory=dict)
    timing_ms: float = 0.0

    @classmethod
    def from_verdicts(
        cls,
        subcommand: str,
        verdicts: List[Verdict],
        outputs: Optional[Dict[str, str]] = None,
    ) -> "Report":
        report = cls(subcommand=subcommand, subject="; ".join(v.subject for v in verdicts))
        for verdict in verdicts:
            for condition in verdict.conditions:
                report.conditions.append(ConditionReport.from_condition(condition, verdict.subject))
            for condition in verdict.cross_checks:
                report.conditions.append(ConditionReport.from_condition(condition, verdict.subject, True))
            report.outputs.update(verdict.outputs)
        report.outputs.update(outputs or {})
        report.witnesses = [c.witness for c in report.conditions if c.witness is not None]
        report.verdict = cls._overall(report.conditions)
        return report

    @staticmethod
    def _overall(conditions: List[ConditionReport]) -> str:
        required = [c for c in conditions if not c.cross_check]
        if all(c.holds for c in required):
            return PASS
        if any(not c.holds and not c.indeterminate for c in required):
            return FAIL
        return INDETERMINATE

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def to_json(self) -> str:
        return self.model_dump_json(indent=2)

    def to_text(self) -> str:
        lines = [f"asympl {self.subcommand}: {self.verdict.upper()}"]
        if self.subject:
            lines.append(f"  subject: {self.subject}")
        for name, value in self.outputs.items():
            lines.append(f"  {name} = {value}")
        if self.conditions:
            lines.append("conditions:")
            lines.extend(c.to_text() for c in self.conditions)
        lines.append(f"({self.timing_ms:.0f} ms)")
        return "\n".join(lines)
