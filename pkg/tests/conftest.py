"""
Pytest configuration and shared fixtures for the asympl test suite.

This module provides the charts, structures and manifests reused across the
tests, plus a seeded source of random polynomial coefficients.
"""

from pathlib import Path

import numpy as np
import pytest
from dotenv import load_dotenv

from src import expr
from src.config import Settings
from src.expr import parse_scalar
from src.exterior import KForm, KVector, parse_form
from src.manifest import load_manifest
from src.models import Chart
from src.symplectic import AlmostSymplectic


# Load test environment variables
load_dotenv()

TEST_SEED = 20240601


@pytest.fixture(autouse=True)
def seeded_settings():
    """Pin the zero-test sampler to a fixed seed for every test."""
    settings = Settings(seed=TEST_SEED)
    expr.configure(settings)
    yield settings
    expr.configure(Settings(seed=TEST_SEED))


@pytest.fixture
def manifests_dir() -> Path:
    """Return the path to the bundled example manifests."""
    return Path(__file__).parent.parent / "manifests"


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator for randomized identity checks."""
    return np.random.default_rng(TEST_SEED)


@pytest.fixture
def random_polynomial(rng):
    """Factory: random integer-coefficient polynomial text in the given coordinates."""

    def build(coords, terms: int = 4, max_degree: int = 2) -> str:
        parts = []
        for _ in range(terms):
            coefficient = int(rng.integers(-3, 4)) or 1
            monomial = [f"{c}**{int(rng.integers(0, max_degree + 1))}" for c in coords]
            parts.append(f"({coefficient})*" + "*".join(monomial))
        return " + ".join(parts)

    return build


@pytest.fixture
def euclidean():
    """Factory: chart with coordinates x1..xm and no domain hint."""

    def build(dimension: int, name: str = "E", params=()) -> Chart:
        return Chart(f"{name}{dimension}", tuple(f"x{i + 1}" for i in range(dimension)), params=tuple(params))

    return build


@pytest.fixture
def random_form(rng, random_polynomial):
    """Factory: polynomial k-form with a few random components, each in at most two coordinates."""

    def build(chart: Chart, degree: int, components: int = 3, terms: int = 3, max_degree: int = 2) -> KForm:
        values = {}
        for _ in range(components):
            key = tuple(sorted(int(i) for i in rng.choice(chart.dimension, size=degree, replace=False)))
            coords = [str(c) for c in rng.choice(chart.coords, size=min(2, chart.dimension), replace=False)]
            values[key] = parse_scalar(random_polynomial(coords, terms, max_degree), chart).value
        return KForm(chart, degree, values)

    return build


@pytest.fixture
def random_field(rng, random_polynomial):
    """Factory: polynomial vector field, each component in at most two coordinates."""

    def build(chart: Chart, terms: int = 2, max_degree: int = 2) -> KVector:
        values = []
        for _ in chart.coords:
            coords = [str(c) for c in rng.choice(chart.coords, size=min(2, chart.dimension), replace=False)]
            values.append(parse_scalar(random_polynomial(coords, terms, max_degree), chart).value)
        return KVector.from_list(chart, values)

    return build


# ============================================================================
# Charts
# ============================================================================

@pytest.fixture
def quadrant() -> Chart:
    """Four-dimensional chart on x1 > 0, x2 > 0."""
    return Chart("M", ("x1", "x2", "x3", "x4"), domain_hint="x1>0, x2>0")


@pytest.fixture
def plane() -> Chart:
    return Chart("R2", ("x1", "y1"))


@pytest.fixture
def six_chart() -> Chart:
    return Chart("M6", ("x1", "x2", "x3", "x4", "y1", "y2"), domain_hint="x1>0, x2>0")


# ============================================================================
# Structures
# ============================================================================

@pytest.fixture
def conformal_structure(quadrant) -> AlmostSymplectic:
    """omega = x1 dx2^dx3 + x2 dx1^dx4: globally conformal symplectic, sigma = d ln(x1 x2)."""
    return AlmostSymplectic.build(parse_form("x1*dx2^dx3 + x2*dx1^dx4", quadrant))


@pytest.fixture
def rigid_structure(quadrant) -> AlmostSymplectic:
    """theta = dx1^dx2 + dx1^dx3 + x1 x2 dx3^dx4: no nonzero locally Hamiltonian fields."""
    return AlmostSymplectic.build(parse_form("dx1^dx2 + dx1^dx3 + x1*x2*dx3^dx4", quadrant))


@pytest.fixture
def canonical_plane(plane) -> AlmostSymplectic:
    return AlmostSymplectic.build(parse_form("dx1^dy1", plane))


# ============================================================================
# Manifests
# ============================================================================

@pytest.fixture
def conformal_manifest(manifests_dir):
    return load_manifest(str(manifests_dir / "ex32.ini"))


@pytest.fixture
def tangent_manifest(manifests_dir):
    return load_manifest(str(manifests_dir / "tangent.ini"))


@pytest.fixture
def temp_manifest(tmp_path):
    """Factory writing manifest text to a temporary file and returning its path."""

    def write(text: str, name: str = "test.ini") -> str:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)

    return write


def pytest_configure(config):
    """Configure pytest with custom markers."""
    config.addinivalue_line("markers", "unit: Unit tests (fast, no file or CLI access)")
    config.addinivalue_line("markers", "integration: Integration tests (manifests, service, CLI)")
    config.addinivalue_line("markers", "slow: Slow tests (randomized identity sweeps)")
