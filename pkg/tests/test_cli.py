"""Tests for the torheight command line."""

from __future__ import annotations

import json

import mpmath
import pytest

from tor_height import __version__
from tor_height.cli import EXIT_USAGE, run
from tor_height.report_io import load_report

CURVE = ["--curve", "0,-1,1,0,0", "--conductor", "11"]


@pytest.fixture(autouse=True)
def isolated(tmp_path, monkeypatch):
    monkeypatch.delenv("TORHEIGHT_PRECISION_BITS", raising=False)
    saved = mpmath.mp.prec
    yield tmp_path / "missing.yml"
    mpmath.mp.prec = saved


@pytest.fixture
def invoke(isolated, capsys):
    def _invoke(*args):
        code = run(["--config", str(isolated), *args])
        out = capsys.readouterr().out
        return code, json.loads(out) if out.strip() else None

    return _invoke


class TestMetaCommands:
    """Tests for version and init."""

    def test_version(self, invoke):
        code, payload = invoke("version")
        assert code == 0
        assert payload["tool_version"] == __version__

    def test_init_creates_config(self, invoke, tmp_path):
        path = tmp_path / ".torheight.yml"
        code, _ = invoke("init", "--path", str(path))
        assert code == 0
        assert "precision_bits" in path.read_text()

    def test_unknown_flag(self, invoke):
        code, payload = invoke("invariants", "--bogus")
        assert code == EXIT_USAGE
        assert payload is None


class TestCurveCommands:
    """Tests for invariants, supersingular and classpoly."""

    def test_invariants(self, invoke):
        code, payload = invoke("invariants", *CURVE)
        assert code == 0
        assert payload["command"] == "invariants"
        assert payload["schema_version"] == "1"
        assert payload["outputs"]["j"] == "-4096/11"
        assert payload["outputs"]["surjectivity_threshold"] == str(10**7 * 985**2)

    def test_singular_curve(self, invoke):
        code, payload = invoke("invariants", "--curve", "0,0,0,0,0", "--conductor", "11")
        assert code == 1
        assert payload["error"] == "SingularModelError"

    def test_direct_supersingular(self, invoke):
        code, payload = invoke("supersingular", *CURVE, "--search", "direct")
        assert code == 0
        assert payload["outputs"] == {"p": 19, "validated": True, "problems": []}
        assert payload["certificate"]["witness"] == "direct-scan"

    def test_elkies_refuses_cm_curve(self, invoke):
        code, payload = invoke("supersingular", "--curve", "0,0,0,1,0", "--conductor", "64", "--cm")
        assert code == 1
        assert payload["error"] == "CMCurveError"
        assert payload["stage"] == "guard"

    def test_elkies_threshold_too_large(self, invoke):
        code, payload = invoke("supersingular", *CURVE, "--min-prime", "1000003")
        assert code == 2
        assert payload["error"] == "SearchInfeasibleError"
        assert payload["log_bound"]["orientation"] == "huge"

    def test_bad_search_mode(self, invoke):
        code, _ = invoke("supersingular", *CURVE, "--search", "random")
        assert code == EXIT_USAGE

    def test_classpoly(self, invoke):
        code, payload = invoke("classpoly", "--d", "23")
        assert code == 0
        assert payload["outputs"]["degree"] == 3
        assert payload["outputs"]["real_roots"] == 1
        assert payload["outputs"]["coefficients"][0] == "12771880859375"

    def test_classpoly_invalid_discriminant(self, invoke):
        code, payload = invoke("classpoly", "--d", "5")
        assert code == 1
        assert payload["error"] == "InvalidArgumentError"


class TestBoundCommand:
    """Tests for the bound command."""

    def test_prime_nineteen(self, invoke):
        code, payload = invoke("bound", *CURVE, "--prime", "19", "--assume-surjective")
        assert code == 0
        bound = payload["outputs"]["bound"]
        assert bound["meaning"] == "h"
        assert bound["log10"] == pytest.approx(-74.92, abs=0.01)

    def test_surjectivity_required(self, invoke):
        code, payload = invoke("bound", *CURVE, "--prime", "19")
        assert code == 1
        assert "--assume-surjective" in payload["message"]

    def test_ordinary_prime_rejected(self, invoke):
        code, payload = invoke("bound", *CURVE, "--prime", "17", "--assume-surjective")
        assert code == 1
        assert "not supersingular" in payload["message"]

    def test_auto_skips_exceptions(self, invoke):
        code, payload = invoke(
            "bound", *CURVE, "--auto", "--assume-surjective", "--surjective-exceptions", "19"
        )
        assert code == 0
        assert payload["outputs"]["p"] == 29

    def test_prime_or_auto_required(self, invoke):
        code, _ = invoke("bound", *CURVE)
        assert code == EXIT_USAGE

    def test_cm_mode(self, invoke):
        code, payload = invoke("bound", "--mode", "cm", "--conductor", "389", "--c", "7")
        assert code == 0
        assert payload["outputs"]["bound"]["exact"] == "1/4782969"

    def test_cm_mode_small_conductor(self, invoke):
        code, payload = invoke("bound", "--mode", "cm", "--conductor", "5")
        assert code == 0
        assert payload["outputs"]["bound"]["exact"] == "1/4782969"

    def test_small_conductor_rejected_outside_cm(self, invoke):
        code, _ = invoke("bound", "--mode", "explicit", "--conductor", "5")
        assert code == 1

    def test_explicit_mode_with_displayed_n(self, invoke):
        code, payload = invoke("bound", "--mode", "explicit", "--conductor", "11", "--n", str(10**7 * 985))
        assert code == 0
        bound = payload["outputs"]["bound"]
        assert bound["meaning"] == "ln(-ln h)"
        assert float(bound["value"]) <= 1.1e10

    def test_bad_constant_exponent(self, invoke):
        code, _ = invoke("bound", *CURVE, "--prime", "19", "--constant-exponent", "25")
        assert code == EXIT_USAGE

    def test_save(self, isolated, capsys, tmp_path):
        target = tmp_path / "reports" / "bound.json"
        code = run(["--config", str(isolated), "--save", str(target), "bound", "--mode", "cm"])
        capsys.readouterr()
        assert code == 0
        assert load_report(target)["outputs"]["bound"]["exact"] == "1/4782969"


class TestVerifyCommand:
    """Tests for the verify command."""

    def test_theta(self, invoke):
        code, payload = invoke("verify", "--suite", "theta", "--xmax", "1000")
        assert code == 0
        assert payload["outputs"]["checked"] == 168 + 156
        assert payload["outputs"]["failures"] == 0

    def test_lemma1(self, invoke):
        code, payload = invoke("verify", "--suite", "lemma1", "--lmax", "50")
        assert code == 0
        assert payload["inputs"]["suite"] == "lemma1"
        assert payload["outputs"]["failures"] == 0

    def test_mignotte_seed_is_recorded(self, invoke):
        code, payload = invoke("verify", "--suite", "mignotte-sum", "--count", "5", "--seed", "3")
        assert code == 0
        assert payload["seed"] == 3

    def test_unknown_suite(self, invoke):
        code, _ = invoke("verify", "--suite", "bogus")
        assert code == EXIT_USAGE
