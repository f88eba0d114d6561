"""Tests for the supersingular prime search."""

from __future__ import annotations

from fractions import Fraction

import mpmath
import pytest

from tor_height.arith import is_prime, legendre_symbol
from tor_height.classpoly import log_abs_product
from tor_height.config import RuntimeConfig
from tor_height.curve import compute_invariants, parse_model
from tor_height.exceptions import (
    CMCurveError,
    EffortExhaustedError,
    ExtractionIncompleteError,
    InvalidArgumentError,
    ModulusOverflowError,
    SearchInfeasibleError,
)
from tor_height.models import SupersingularCertificate
from tor_height.ssearch import (
    SearchConfig,
    assemble_congruence,
    bennett_log_cap,
    boundpnoj_threshold,
    direct_scan,
    elkies_threshold,
    extract_supersingular,
    find_prime_in_ap,
    n_ell_log_bound,
    numerator_N_ell,
    prime_bound_constant,
    search_supersingular_prime,
    ss_prime_log_bound,
    validate_certificate,
)


@pytest.fixture
def model():
    return parse_model("0,-1,1,0,0")


@pytest.fixture
def invariants(model):
    return compute_invariants(model, 11)


class TestAssembleCongruence:
    """Tests for assemble_congruence."""

    def test_modulus_for_n_eleven(self):
        system = assemble_congruence(11, 11)
        assert system.modulus == 8 * 3 * 5 * 7 * 11 == 9240
        assert system.residue % 8 == 7
        assert sorted(system.conditioned_primes()) == [3, 5, 7, 11]

    def test_modulus_from_conductor_only(self):
        system = assemble_congruence(11, 3)
        assert system.modulus == 264
        sources = {c.prime: c.source for c in system.conditions}
        assert sources == {2: "ell = 7 mod 8", 3: "rad(6N)", 11: "rad(6N)"}

    def test_prime_from_progression_satisfies_conditions(self):
        system = assemble_congruence(11, 11)
        ell = find_prime_in_ap(system).ell
        assert ell % 8 == 7
        assert all(legendre_symbol(p, ell) == 1 for p in system.conditioned_primes())

    def test_first_progression_primes_satisfy_conditions(self):
        system = assemble_congruence(11, 11)
        primes = []
        candidate = system.residue
        while len(primes) < 10:
            if is_prime(candidate):
                primes.append(candidate)
            candidate += system.modulus
        for ell in primes:
            assert ell % 8 == 7
            for condition in system.conditions:
                assert ell % condition.modulus == condition.residue
                assert legendre_symbol(condition.prime, ell) == 1
                if condition.prime > 2:
                    assert legendre_symbol(ell, condition.prime) == condition.required

    def test_overflow(self):
        with pytest.raises(ModulusOverflowError) as exc_info:
            assemble_congruence(11, 1000, max_modulus_bits=64)
        assert "symbolic bound" in str(exc_info.value)

    def test_rejects_bad_arguments(self):
        with pytest.raises(InvalidArgumentError):
            assemble_congruence(0, 11)


class TestFindPrimeInAp:
    """Tests for find_prime_in_ap."""

    def test_small_progressions(self):
        assert find_prime_in_ap((7, 24)).ell == 7
        found = find_prime_in_ap((1, 4))
        assert found.ell == 5
        assert found.scanned == 2
        assert found.within_cap is True

    def test_non_coprime(self):
        with pytest.raises(InvalidArgumentError):
            find_prime_in_ap((2, 4))

    def test_effort_exhausted(self):
        with pytest.raises(EffortExhaustedError):
            find_prime_in_ap((1, 4), effort=1)

    def test_bennett_cap(self):
        assert bennett_log_cap(2) is None
        assert bennett_log_cap(264) == mpmath.log(mpmath.mpf("7.94e9"))
        assert bennett_log_cap(10**6) > bennett_log_cap(10**4)


class TestNumerator:
    """Tests for numerator_N_ell and its bound."""

    def test_j_1728_ell_7(self):
        assert numerator_N_ell(Fraction(1728), 7) == 5103 * 16579647

    def test_rejects_bad_ell(self):
        for ell in (5, 13, 15, 3):
            with pytest.raises(InvalidArgumentError):
                numerator_N_ell(Fraction(1728), ell)

    def test_log_bound_dominates(self):
        j = Fraction(-4096, 11)
        for ell in (7, 23, 31):
            assert log_abs_product(j, ell) <= n_ell_log_bound(ell, mpmath.log(4096))


class TestExtraction:
    """Tests for extract_supersingular and validate_certificate."""

    def test_finds_witnessed_factor(self, model, invariants):
        # (19/23) = -1 and a_19 = 0
        cert = extract_supersingular(model, invariants, 2 * 3 * 19, 23)
        assert cert.p == 19
        assert cert.ell == 23
        assert cert.witness == "legendre(p, ell) = -1"
        assert cert.nl_digits == 3
        assert validate_certificate(cert, model, invariants, N_ell=2 * 3 * 19) == []

    def test_factor_equal_to_ell(self, model, invariants):
        cert = extract_supersingular(model, invariants, 19, 19)
        assert cert.witness == "p = ell"

    def test_skips_ordinary_factors(self, model, invariants):
        # 5 and 7 are non-residues mod 23 but a_5 = 1, a_7 = -2
        with pytest.raises(ExtractionIncompleteError) as exc_info:
            extract_supersingular(model, invariants, 5 * 7, 23)
        assert exc_info.value.cofactor == 1

    def test_composite_cofactor(self, model, invariants):
        with pytest.raises(ExtractionIncompleteError) as exc_info:
            extract_supersingular(model, invariants, 101 * 103, 23, trial_division_bound=100)
        assert exc_info.value.cofactor == 10403
        assert exc_info.value.to_dict()["cofactor_digits"] == 5

    def test_rejects_non_positive(self, model, invariants):
        with pytest.raises(InvalidArgumentError):
            extract_supersingular(model, invariants, -19, 23)

    def test_validation_reports_problems(self, model, invariants):
        cert = SupersingularCertificate(p=19, ell=23, witness="legendre(p, ell) = -1", a_p=0, n=11)
        problems = validate_certificate(cert, model, invariants, N_ell=5)
        assert problems == ["19 does not divide N_23"]

        wrong = SupersingularCertificate(p=17, witness="direct-scan", a_p=0, n=11)
        assert validate_certificate(wrong, model, invariants) == ["a_17 = -2"]


class TestSearchBounds:
    """Tests for the explicit prime bounds."""

    def test_boundpnoj_threshold(self):
        expected = int(mpmath.ceil((66 * mpmath.log(11)) ** 2))
        assert boundpnoj_threshold(11) == expected
        assert boundpnoj_threshold(11, 10**9) == 10**9

    def test_bounds_are_huge_values(self):
        bound = ss_prime_log_bound(11, 11, mpmath.log(4096), "boundp")
        assert bound.orientation == "huge"
        assert ss_prime_log_bound(15, 11, mpmath.log(4096), "boundp") > bound
        assert ss_prime_log_bound(11, None, variant="boundpnoj").level == 2

    def test_effective_variant(self):
        h = mpmath.log(4096)
        bound = ss_prime_log_bound(11, None, h, "effectiveElkies", c=1, q=264)
        expected = mpmath.log10(mpmath.mpf(264) ** 2.5 * mpmath.log(264) ** 2 * h)
        assert bound.log10() == pytest.approx(float(expected), rel=1e-9)

    def test_prime_bound_constants(self):
        assert prime_bound_constant("boundp") == mpmath.mpf("2.5e9")
        assert prime_bound_constant("boundpnoj") == mpmath.mpf("2.5e10")
        assert prime_bound_constant("boundp", 4.8e11) == mpmath.mpf("5e9")

    def test_lnum_constant_shifts_the_bound(self):
        h = mpmath.log(4096)
        default = ss_prime_log_bound(11, 11, h, "boundp")
        doubled = ss_prime_log_bound(11, 11, h, "boundp", lnum_constant=4.8e11)
        shift = doubled.to_level(1).value - default.to_level(1).value
        assert float(shift) == pytest.approx(float(mpmath.log(2)), rel=1e-9)
        with pytest.raises(InvalidArgumentError):
            ss_prime_log_bound(11, 11, h, "boundp", lnum_constant=0)

    def test_missing_inputs(self):
        with pytest.raises(InvalidArgumentError):
            ss_prime_log_bound(11, None, None, "boundp")
        with pytest.raises(InvalidArgumentError):
            ss_prime_log_bound(11, None, 1, "effectiveElkies", c=1)
        with pytest.raises(InvalidArgumentError):
            ss_prime_log_bound(5, 11, 1, "boundp")


class TestSearch:
    """Tests for direct_scan and search_supersingular_prime."""

    def test_direct_scan(self, model):
        assert direct_scan(model, 0) == (19, 6)
        assert direct_scan(model, 20)[0] == 29

    def test_direct_scan_effort(self, model):
        with pytest.raises(EffortExhaustedError):
            direct_scan(model, 0, effort=3)

    def test_direct_mode_certificate(self, model, invariants):
        cert = search_supersingular_prime(model, invariants, 0, SearchConfig(), mode="direct")
        assert cert.p == 19
        assert cert.witness == "direct-scan"
        assert cert.config["mode"] == "direct"
        assert "direct-scan" in cert.timings
        assert validate_certificate(cert, model, invariants) == []

    def test_elkies_threshold(self, invariants):
        assert elkies_threshold(invariants) == 11
        assert elkies_threshold(invariants, 500) == 500

    def test_cm_curve_refused(self):
        cm_model = parse_model("0,0,0,1,0")
        inv = compute_invariants(cm_model, 64)
        with pytest.raises(CMCurveError) as exc_info:
            search_supersingular_prime(cm_model, inv)
        assert exc_info.value.stage == "guard"

    def test_threshold_beyond_theta_cap(self, model, invariants):
        config = SearchConfig(theta_cap=50)
        with pytest.raises(SearchInfeasibleError) as exc_info:
            search_supersingular_prime(model, invariants, 100, config)
        payload = exc_info.value.to_dict()
        assert payload["stage"] == "threshold"
        assert payload["log_bound"]["orientation"] == "huge"
        assert exc_info.value.exit_code == 2

    def test_infeasible_bound_uses_lnum_constant(self, model, invariants):
        bounds = []
        for lnum in (2.4e11, 2.4e12):
            config = SearchConfig(theta_cap=50, lnum_constant=lnum)
            with pytest.raises(SearchInfeasibleError) as exc_info:
                search_supersingular_prime(model, invariants, 100, config)
            bounds.append(exc_info.value.to_dict()["log_bound"])
        assert bounds[0] != bounds[1]

    def test_modulus_overflow_is_tagged(self, model, invariants):
        config = SearchConfig(max_modulus_bits=8)
        with pytest.raises(ModulusOverflowError) as exc_info:
            search_supersingular_prime(model, invariants, 0, config)
        assert exc_info.value.stage == "congruence"

    def test_elkies_route_end_to_end(self, model, invariants):
        """Full route at n = 11; the prime depends on the scan, the certificate does not."""
        cert = search_supersingular_prime(model, invariants, 11, SearchConfig())
        assert cert.p >= 11
        assert cert.a_p == 0
        assert cert.ell == 43991
        assert cert.q == 9240
        assert cert.ell % cert.q == cert.a
        assert set(cert.timings) == {"congruence", "progression", "numerator", "extraction"}
        assert "log_N_ell_cap" in cert.config
        assert validate_certificate(cert, model, invariants) == []

    def test_config_from_runtime(self):
        config = SearchConfig.from_runtime(RuntimeConfig(scan_effort=7, lnum_constant=1e9))
        assert config.scan_effort == 7
        assert config.lnum_constant == 1e9
