"""
Unit tests for manifest loading and name resolution.
"""

from fractions import Fraction

import pytest

from src.exterior import parse_form
from src.liealg import heisenberg
from src.manifest import load_manifest, parse_manifest
from src.models import ManifestError


MINIMAL = """
[chart]
coords = x1, x2

[form.omega]
value = dx1^dx2

[function.f]
value = x1*x2
"""


@pytest.mark.unit
class TestParseManifest:
    """Test parsing manifest text."""

    def test_default_chart(self):
        """Test that [chart] defaults to the name M."""
        manifest = parse_manifest(MINIMAL)

        assert manifest.chart().name == "M"
        assert manifest.chart().coords == ("x1", "x2")
        assert manifest.form("omega") == parse_form("dx1^dx2", manifest.chart())

    def test_single_object_lookup(self):
        """Test that a unique object can be looked up without a name."""
        manifest = parse_manifest(MINIMAL)

        assert manifest.form() is manifest.form("omega")
        assert manifest.function().to_text() == "x1*x2"

    def test_unknown_name(self):
        """Test that unknown names list what is available."""
        manifest = parse_manifest(MINIMAL)

        with pytest.raises(ManifestError) as exc_info:
            manifest.form("theta")

        assert exc_info.value.details["available"] == ["omega"]

    def test_ambiguous_lookup(self, conformal_manifest):
        """Test that a name is required when several objects exist."""
        with pytest.raises(ManifestError, match="name is required"):
            conformal_manifest.form()

    def test_no_chart(self):
        """Test that a manifest needs a chart unless it only carries Lie data."""
        with pytest.raises(ManifestError, match="no chart"):
            parse_manifest("[form.omega]\nvalue = dx1^dx2\n")

    def test_duplicate_name(self):
        """Test that names are unique across kinds."""
        text = MINIMAL + "\n[field.f]\nvalue = @x1\n"

        with pytest.raises(ManifestError, match="duplicate name 'f'"):
            parse_manifest(text)

    def test_dangling_chart_reference(self):
        """Test that maps must name existing charts."""
        text = MINIMAL + "\n[map.g]\nsource = M\ntarget = Q\nvalue = x1\n"

        with pytest.raises(ManifestError, match="unknown chart 'Q'"):
            parse_manifest(text)

    def test_dangling_momentum_reference(self):
        """Test that momentum data must name existing fields."""
        text = MINIMAL + "\n[momentum.R]\nfields = X\nfunctions = f\n"

        with pytest.raises(ManifestError, match="unknown field 'X'"):
            parse_manifest(text)

    def test_unknown_section(self):
        """Test that unknown section kinds are refused."""
        with pytest.raises(ManifestError, match="unknown section"):
            parse_manifest(MINIMAL + "\n[tensor.T]\nvalue = 1\n")

    @pytest.mark.parametrize("value", ["dx1 +", "dx3", "dx1 + dx1^dx2"])
    def test_bad_literal(self, value):
        """Test that literal errors surface as manifest errors with the section name."""
        with pytest.raises(ManifestError, match=r"\[form.bad\]"):
            parse_manifest(MINIMAL + f"\n[form.bad]\nvalue = {value}\n")

    def test_malformed_ini(self):
        """Test that INI syntax errors are reported."""
        with pytest.raises(ManifestError, match="cannot read manifest"):
            parse_manifest("coords = x1\n")

    def test_lie_only_manifest(self):
        """Test a manifest with only Lie algebra data."""
        manifest = parse_manifest("[lie]\ndimension = 2\nc[1][1][2] = 1/2\n")
        data = manifest.lie_data()

        assert data.r == 2
        assert data.c(0, 0, 1) == Fraction(1, 2)

    def test_missing_lie_section(self):
        """Test that Lie data must be present to be requested."""
        with pytest.raises(ManifestError):
            parse_manifest(MINIMAL).lie_data()

    def test_bad_structure_constant(self):
        """Test that invalid Lie data is wrapped with its section."""
        with pytest.raises(ManifestError, match=r"\[lie\]"):
            parse_manifest("[lie]\ndimension = 2\nc[3][1][2] = 1\n")


@pytest.mark.unit
class TestBundledManifests:
    """Test the manifests shipped with the package."""

    def test_conformal_manifest(self, conformal_manifest):
        """Test charts, maps and momentum data of the conformal example."""
        assert set(conformal_manifest.charts) == {"M", "N", "N1", "Q"}
        assert conformal_manifest.chart("N").params == ("t0",)
        assert conformal_manifest.map("q").target.name == "Q"
        assert conformal_manifest.momentum("R").size == 1

    def test_tangent_manifest(self, tangent_manifest):
        """Test the tangent chart and connections."""
        tc = tangent_manifest.tangent("TN")

        assert tangent_manifest.chart("TN") == tc.total
        assert tangent_manifest.function("fy1").chart == tc.total
        assert tangent_manifest.connection("twisted").coefficients[0][1] != 0
        assert tangent_manifest.connection("flat").coefficients[0][1] == 0
        assert tangent_manifest.metric("gamma")[1] == [[1, 0], [0, 1]]

    def test_heisenberg_manifest(self, manifests_dir):
        """Test that the bundled Heisenberg algebra matches the built-in one."""
        manifest = load_manifest(str(manifests_dir / "heisenberg.ini"))

        assert manifest.lie_data() == heisenberg()

    def test_load_from_file(self, temp_manifest):
        """Test loading a manifest file from disk."""
        path = temp_manifest(MINIMAL)

        assert load_manifest(path).path == path

    def test_missing_file(self, tmp_path):
        """Test that unreadable files raise ManifestError."""
        with pytest.raises(ManifestError, match="cannot read manifest"):
            load_manifest(str(tmp_path / "missing.ini"))
