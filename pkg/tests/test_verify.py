"""Tests for the verification suites, on reduced ranges."""

from __future__ import annotations

import pytest
from flint import arb

from tor_height.exceptions import InvalidArgumentError
from tor_height.verify import (
    DEFAULT_CURVES,
    MAX_DETAILS,
    SUITES,
    _collect,
    _compare,
    lemma1_precision,
    run_suite,
    verify_aux,
    verify_class_polynomial_degrees,
    verify_classnum,
    verify_fouvry_murty,
    verify_hasse,
    verify_lemma1,
    verify_mignotte_sum,
    verify_theta,
)


def _clean(result, suite):
    assert result["suite"] == suite
    assert result["failures"] == 0
    assert result["details"] == [] or all(d["status"] == "undecided" for d in result["details"])


class TestHelpers:
    """Tests for the outcome helpers."""

    def test_compare(self):
        assert _compare(arb(1), arb(2), {})[0] == "pass"
        assert _compare(arb(3), arb(2), {"x": 3}) == ("fail", {"x": 3})
        assert _compare(arb(1, 0.5), arb(1.2), {})[0] == "undecided"
        assert _compare(arb(2), arb(2), {}, strict=True)[0] == "fail"

    def test_details_are_capped(self):
        result = _collect("demo", range(30), lambda i: [("fail", {"i": i})])
        assert result["checked"] == 30
        assert result["failures"] == 30
        assert len(result["details"]) == MAX_DETAILS
        assert result["details"][0] == {"status": "fail", "i": 0}

    def test_lemma1_precision_grows(self):
        assert lemma1_precision(11) == 128
        assert lemma1_precision(10**4) > 128


class TestClassPolynomialSuites:
    """Suites built on class polynomials."""

    def test_lemma1(self):
        result = verify_lemma1(11, 100)
        _clean(result, "lemma1")
        # 11 primes = 3 mod 4 in [11, 100], two claims each
        assert result["checked"] == 22
        assert result["undecided"] == 0

    def test_lemma1_with_threads(self):
        result = verify_lemma1(11, 60, threads=2)
        _clean(result, "lemma1")
        assert result["checked"] == 14

    def test_fouvry_murty(self):
        _clean(verify_fouvry_murty(lmax=50), "fouvry-murty")

    def test_classnum(self):
        result = verify_classnum(lmax=300, poly_lmax=60, dmax=100)
        _clean(result, "classnum")
        assert result["checked"] > 0

    def test_class_polynomial_degrees(self):
        result = verify_class_polynomial_degrees(300)
        _clean(result, "classnum")
        assert result["undecided"] == 0
        # one degree check per valid D plus four known polynomials
        assert result["checked"] > 150

    def test_classnum_includes_degree_sweep(self):
        alone = verify_classnum(lmax=50, poly_lmax=0, dmax=2)
        with_sweep = verify_classnum(lmax=50, poly_lmax=0, dmax=50)
        degrees = verify_class_polynomial_degrees(50)
        assert with_sweep["checked"] == alone["checked"] + degrees["checked"]


class TestOtherSuites:
    """Curve, theta, sample and grid suites."""

    def test_hasse(self):
        result = verify_hasse(pmax=100)
        _clean(result, "hasse")
        assert result["checked"] > 0

    def test_hasse_covers_many_curves(self):
        assert len(DEFAULT_CURVES) >= 10
        result = verify_hasse(pmax=60, curves=DEFAULT_CURVES[:10])
        _clean(result, "hasse")
        # every curve has good reduction at most of the 15 primes in [5, 60]
        assert result["checked"] > 10 * 10

    def test_theta(self):
        result = verify_theta(xmax=10**4)
        _clean(result, "theta")
        # one upper check per prime, one lower check per prime from 41 on
        assert result["checked"] == 1229 + 1217
        assert result["undecided"] == 0

    def test_theta_counts_outcomes(self):
        assert verify_theta(xmax=100)["checked"] == 25 + 13
        assert verify_theta(xmax=1)["checked"] == 0

    def test_mignotte_sum(self):
        result = verify_mignotte_sum(count=20, seed=0, high_degree_count=2)
        _clean(result, "mignotte-sum")
        assert result["checked"] > 20

    def test_aux(self):
        _clean(verify_aux(points=64), "aux")

    def test_aux_grid_sizes(self):
        # 50 on L1, an 8 by 8 grid on C1, 4 cubed on L2
        assert verify_aux(points=50)["checked"] == 50 + 64 + 64
        assert verify_aux(points=1)["checked"] == 1 + 1 + 1

    def test_aux_rejects_empty_grid(self):
        with pytest.raises(InvalidArgumentError):
            verify_aux(points=0)


class TestRunSuite:
    """Tests for run_suite dispatch."""

    def test_dispatch(self):
        result = run_suite("theta", xmax=100)
        assert result["suite"] == "theta"
        assert result["checked"] == 38

    def test_unknown_suite(self):
        with pytest.raises(InvalidArgumentError) as exc_info:
            run_suite("bogus")
        assert "lemma1" in str(exc_info.value)

    def test_suite_names(self):
        assert set(SUITES) == {
            "lemma1", "fouvry-murty", "mignotte-sum", "aux", "classnum", "hasse", "theta"
        }
