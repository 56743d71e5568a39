"""
Manifest loading: named charts, forms, fields, functions, maps, connections,
metrics, momentum data and Lie algebra data from one INI file.

EXAMPLE MANIFEST:
    [chart]
    name = M
    coords = x1, x2, x3, x4
    domain = x1>0, x2>0

    [form.omega]
    value = x1*dx2^dx3 + x2*dx1^dx4

    [field.X]
    value = @x3 + @x4

    [function.f]
    value = x1*x2

Sections:
    [chart] / [chart.NAME]   coords, optional domain and params; [chart] is the default
    [tangent.NAME]           base chart, optional fibers; registers chart NAME
    [form.NAME]              value (form literal), optional chart
    [field.NAME]             value (vector literal), optional chart
    [function.NAME]          value (scalar), optional chart
    [map.NAME]               source, target, value (comma-separated components)
    [connection.NAME]        tangent, entries t[i][k] = scalar (1-based)
    [metric.NAME]            value rows separated by ';', optional chart
    [momentum.NAME]          fields, functions, optional c[c][a][b] = rational
    [lie]                    dimension, c[i][j][k] = rational, optional gamma
"""

import configparser
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import sympy

from src.expr import Expr, parse_scalar
from src.exterior import KForm, KVector, MapExpr, parse_field, parse_form
from src.liealg import LieAlgebraData
from src.logging_config import get_logger
from src.models import Chart, GeometryError, ManifestError
from src.reduction import MomentumData
from src.tangent import NonlinearConnection, TangentChart


logger = get_logger(__name__)

_INDEXED = re.compile(r"^(?:c|t)((?:\[\d+\])+)$")
_INDEX = re.compile(r"\[(\d+)\]")

DEFAULT_CHART = "M"


def _split(value: str, sep: str = ",") -> List[str]:
    return [part.strip() for part in value.split(sep) if part.strip()]


def _indices(key: str, count: int, section: str) -> Tuple[int, ...]:
    match = _INDEXED.match(key)
    indices = tuple(int(i) - 1 for i in _INDEX.findall(match.group(1))) if match else ()
    if len(indices) != count or any(i < 0 for i in indices):
        raise ManifestError(
            f"[{section}] malformed indexed key '{key}'",
            details={"expected_indices": count},
        )
    return indices


def _rational(value: str, section: str, key: str) -> Fraction:
    try:
        return Fraction(value.strip())
    except (ValueError, ZeroDivisionError):
        raise ManifestError(f"[{section}] {key} = '{value}' is not a rational number") from None


@dataclass
class Manifest:
    """Everything named in one manifest file."""

    path: str
    charts: Dict[str, Chart] = field(default_factory=dict)
    default_chart: Optional[str] = None
    tangents: Dict[str, TangentChart] = field(default_factory=dict)
    forms: Dict[str, KForm] = field(default_factory=dict)
    fields: Dict[str, KVector] = field(default_factory=dict)
    functions: Dict[str, Expr] = field(default_factory=dict)
    maps: Dict[str, MapExpr] = field(default_factory=dict)
    connections: Dict[str, NonlinearConnection] = field(default_factory=dict)
    metrics: Dict[str, Tuple[Chart, List[List[sympy.Expr]]]] = field(default_factory=dict)
    momenta: Dict[str, MomentumData] = field(default_factory=dict)
    lie: Optional[LieAlgebraData] = None

    def _lookup(self, table: Dict, kind: str, name: Optional[str]):
        if name is None:
            if len(table) == 1:
                return next(iter(table.values()))
            raise ManifestError(
                f"a {kind} name is required",
                details={"available": sorted(table)},
            )
        if name not in table:
            raise ManifestError(
                f"unknown {kind} '{name}'",
                details={"available": sorted(table)},
            )
        return table[name]

    def chart(self, name: Optional[str] = None) -> Chart:
        return self._lookup(self.charts, "chart", name or self.default_chart)

    def tangent(self, name: Optional[str] = None) -> TangentChart:
        return self._lookup(self.tangents, "tangent", name)

    def form(self, name: Optional[str] = None) -> KForm:
        return self._lookup(self.forms, "form", name)

    def field_named(self, name: Optional[str] = None) -> KVector:
        return self._lookup(self.fields, "field", name)

    def function(self, name: Optional[str] = None) -> Expr:
        return self._lookup(self.functions, "function", name)

    def map(self, name: Optional[str] = None) -> MapExpr:
        return self._lookup(self.maps, "map", name)

    def connection(self, name: Optional[str] = None) -> NonlinearConnection:
        return self._lookup(self.connections, "connection", name)

    def metric(self, name: Optional[str] = None) -> Tuple[Chart, List[List[sympy.Expr]]]:
        return self._lookup(self.metrics, "metric", name)

    def momentum(self, name: Optional[str] = None) -> MomentumData:
        return self._lookup(self.momenta, "momentum", name)

    def lie_data(self) -> LieAlgebraData:
        if self.lie is None:
            raise ManifestError("manifest has no [lie] section")
        return self.lie


class ManifestLoader:
    """Builds a Manifest from INI text, resolving names in dependency order."""

    KINDS = ("form", "field", "function", "map", "connection", "metric", "momentum")

    def __init__(self, path: str = "<string>"):
        self.path = path
        self.config = configparser.ConfigParser(interpolation=None)
        self.config.optionxform = str
        self.manifest = Manifest(path=path)
        self._names: Dict[str, str] = {}

    def load(self, text: str) -> Manifest:
        """
        Raises:
            ManifestError: malformed INI, unknown or duplicate names, bad values
        """
        try:
            self.config.read_string(text, source=self.path)
        except configparser.Error as e:
            raise ManifestError(f"cannot read manifest: {e}", details={"path": self.path}) from e
        sections = self.config.sections()
        for section in sections:
            kind = section.split(".", 1)[0]
            if kind not in ("chart", "tangent", "lie") + self.KINDS:
                raise ManifestError(f"unknown section [{section}]", details={"path": self.path})
        self._charts(sections)
        for kind in self.KINDS:
            for section in sections:
                if section.startswith(kind + "."):
                    self._guarded(section, getattr(self, f"_{kind}"))
        if self.config.has_section("lie"):
            self._guarded("lie", self._lie)
        logger.debug(
            f"manifest {self.path}: {len(self.manifest.charts)} charts, "
            f"{len(self._names)} named objects"
        )
        return self.manifest

    def _guarded(self, section: str, handler) -> None:
        try:
            handler(section)
        except ManifestError:
            raise
        except GeometryError as e:
            raise ManifestError(
                f"[{section}] {e.message}",
                details={"code": e.code, **(e.details or {})},
            ) from e

    def _name(self, section: str) -> str:
        kind, _, name = section.partition(".")
        if not name:
            raise ManifestError(f"section [{section}] needs a name")
        if name in self._names:
            raise ManifestError(
                f"duplicate name '{name}'",
                details={"first": self._names[name], "second": kind},
            )
        self._names[name] = kind
        return name

    def _get(self, section: str, key: str, default: Optional[str] = None) -> str:
        value = self.config.get(section, key, fallback=default)
        if value is None:
            raise ManifestError(f"[{section}] is missing '{key}'")
        return value

    def _chart_ref(self, section: str, key: str = "chart") -> Chart:
        return self.manifest.chart(self.config.get(section, key, fallback=None))

    # ------------------------------------------------------------------
    # Charts
    # ------------------------------------------------------------------

    def _charts(self, sections: List[str]) -> None:
        if self.config.has_section("chart"):
            name = self.config.get("chart", "name", fallback=DEFAULT_CHART)
            self._guarded("chart", lambda s: self._add_chart(s, name))
            self.manifest.default_chart = name
        for section in sections:
            if section.startswith("chart."):
                name = section.partition(".")[2]
                self._guarded(section, lambda s, n=name: self._add_chart(s, n))
        for section in sections:
            if section.startswith("tangent."):
                self._guarded(section, self._tangent)
        if not self.manifest.charts and not self.config.has_section("lie"):
            raise ManifestError("manifest defines no chart", details={"path": self.path})

    def _register_chart(self, name: str, chart: Chart) -> None:
        if name in self.manifest.charts:
            raise ManifestError(f"duplicate chart '{name}'")
        self.manifest.charts[name] = chart

    def _add_chart(self, section: str, name: str) -> None:
        chart = Chart(
            name,
            tuple(_split(self._get(section, "coords"))),
            domain_hint=self.config.get(section, "domain", fallback=None),
            params=tuple(_split(self.config.get(section, "params", fallback=""))),
        )
        self._register_chart(name, chart)

    def _tangent(self, section: str) -> None:
        name = section.partition(".")[2]
        base = self._chart_ref(section, "base")
        fibers = _split(self.config.get(section, "fibers", fallback=""))
        tc = TangentChart.over(base, fibers or None)
        self.manifest.tangents[name] = tc
        self._register_chart(name, tc.total)

    # ------------------------------------------------------------------
    # Named objects
    # ------------------------------------------------------------------

    def _form(self, section: str) -> None:
        name = self._name(section)
        self.manifest.forms[name] = parse_form(self._get(section, "value"), self._chart_ref(section))

    def _field(self, section: str) -> None:
        name = self._name(section)
        self.manifest.fields[name] = parse_field(self._get(section, "value"), self._chart_ref(section))

    def _function(self, section: str) -> None:
        name = self._name(section)
        self.manifest.functions[name] = parse_scalar(self._get(section, "value"), self._chart_ref(section))

    def _map(self, section: str) -> None:
        name = self._name(section)
        source = self._chart_ref(section, "source")
        target = self._chart_ref(section, "target")
        components = tuple(parse_scalar(c, source).value for c in _split(self._get(section, "value")))
        self.manifest.maps[name] = MapExpr(source, target, components)

    def _connection(self, section: str) -> None:
        name = self._name(section)
        tc = self.manifest.tangent(self._get(section, "tangent"))
        n = tc.n
        rows = [[sympy.Integer(0)] * n for _ in range(n)]
        for key, value in self.config.items(section):
            if key == "tangent":
                continue
            upper, lower = _indices(key, 2, section)
            if upper >= n or lower >= n:
                raise ManifestError(f"[{section}] index out of range in '{key}'")
            rows[upper][lower] = parse_scalar(value, tc.total).value
        self.manifest.connections[name] = NonlinearConnection(tc, tuple(tuple(r) for r in rows))

    def _metric(self, section: str) -> None:
        name = self._name(section)
        chart = self._chart_ref(section)
        rows = [
            [parse_scalar(entry, chart).value for entry in _split(row)]
            for row in _split(self._get(section, "value"), ";")
        ]
        self.manifest.metrics[name] = (chart, rows)

    def _momentum(self, section: str) -> None:
        name = self._name(section)
        generators = [self.manifest.field_named(n) for n in _split(self._get(section, "fields"))]
        components = [self.manifest.function(n) for n in _split(self._get(section, "functions"))]
        constants = {}
        for key, value in self.config.items(section):
            if key in ("fields", "functions"):
                continue
            c, a, b = _indices(key, 3, section)
            constants[(c, a, b)] = _rational(value, section, key)
        self.manifest.momenta[name] = MomentumData(
            generators, components, constants if constants else None
        )

    def _lie(self, section: str) -> None:
        try:
            r = int(self._get(section, "dimension"))
        except ValueError:
            raise ManifestError("[lie] dimension must be an integer") from None
        constants = {}
        gamma: List[List[Fraction]] = []
        for key, value in self.config.items(section):
            if key == "dimension":
                continue
            if key == "gamma":
                gamma = [[_rational(v, section, key) for v in _split(row)] for row in _split(value, ";")]
                continue
            constants[_indices(key, 3, section)] = _rational(value, section, key)
        self.manifest.lie = LieAlgebraData.build(r, constants, gamma)


def parse_manifest(text: str, path: str = "<string>") -> Manifest:
    return ManifestLoader(path).load(text)


def load_manifest(path: str) -> Manifest:
    """
    Read and resolve a manifest file.

    Raises:
        ManifestError: unreadable file or invalid content
    """
    file = Path(path)
    try:
        text = file.read_text(encoding="utf-8")
    except OSError as e:
        raise ManifestError(f"cannot read manifest '{path}': {e.strerror}", details={"path": path}) from e
    logger.info(f"loading manifest {file.name}")
    return parse_manifest(text, str(file))
