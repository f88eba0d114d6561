"""Tests for Hilbert class polynomials and the j-function."""

from __future__ import annotations

from fractions import Fraction

import mpmath
import pytest
from flint import acb

from tor_height.classpoly import (
    class_number,
    class_number_bound,
    cm_point,
    eval_j,
    evaluate_at_rational,
    fouvry_murty_log_bound,
    hilbert_class_polynomial,
    is_valid_discriminant,
    log_abs_product,
    real_root_count,
    reduced_forms,
)
from tor_height.exceptions import InvalidArgumentError


class TestReducedForms:
    """Tests for reduced_forms and class_number."""

    def test_discriminant_23(self):
        assert [f.as_tuple() for f in reduced_forms(23)] == [(1, 1, 6), (2, 1, 3), (2, -1, 3)]

    def test_forms_are_reduced(self):
        for D in (23, 47, 71, 164):
            assert all(f.is_reduced() and f.discriminant == -D for f in reduced_forms(D))

    def test_class_numbers(self):
        assert [class_number(D) for D in (3, 4, 7, 8, 11, 15, 23, 44, 47)] == [1, 1, 1, 1, 1, 2, 3, 3, 5]

    def test_non_primitive_forms_skipped(self):
        # (2, 2, 4) has discriminant -28 but is not primitive
        assert [f.as_tuple() for f in reduced_forms(28)] == [(1, 0, 7)]

    @pytest.mark.parametrize("D", [0, -3, 5, 6])
    def test_invalid_discriminants(self, D):
        assert not is_valid_discriminant(D)
        with pytest.raises(InvalidArgumentError):
            reduced_forms(D)


class TestEvalJ:
    """Tests for the certified j-function."""

    def test_j_at_i(self):
        value = eval_j(acb(0, 1), 128)
        assert value.contains(acb(1728))
        assert value.real.rad() < 1e-20

    def test_j_at_cube_root_of_unity(self):
        assert eval_j(cm_point(1, 1, 3), 128).contains(acb(0))

    def test_rejects_low_precision(self):
        with pytest.raises(InvalidArgumentError):
            eval_j(acb(0, 1), 32)

    def test_rejects_lower_half_plane(self):
        with pytest.raises(InvalidArgumentError):
            eval_j(acb(0, -1), 128)


class TestHilbertClassPolynomial:
    """Tests for hilbert_class_polynomial."""

    @pytest.mark.parametrize(
        "D, coefficients",
        [
            (3, [0, 1]),
            (4, [-1728, 1]),
            (7, [3375, 1]),
            (8, [-8000, 1]),
            (28, [-16581375, 1]),
            (163, [262537412640768000, 1]),
        ],
    )
    def test_class_number_one(self, D, coefficients):
        assert hilbert_class_polynomial(D).coefficients == coefficients

    def test_discriminant_23(self):
        P = hilbert_class_polynomial(23)
        assert P.coefficients == [12771880859375, -5151296875, 3491750, 1]
        assert P.degree == 3
        assert real_root_count(P) == 1

    def test_discriminant_15_has_two_real_roots(self):
        P = hilbert_class_polynomial(15)
        assert P.coefficients == [-121287375, 191025, 1]
        assert real_root_count(P) == 2

    def test_to_json_uses_strings(self):
        payload = hilbert_class_polynomial(7).to_json()
        assert payload == {
            "D": 7,
            "degree": 1,
            "coefficients": ["3375", "1"],
            "precision_bits": payload["precision_bits"],
        }

    def test_degree_matches_class_number(self):
        for D in (31, 59, 71, 44):
            assert hilbert_class_polynomial(D).degree == class_number(D)


class TestEvaluation:
    """Tests for rational evaluation and the logarithmic size bounds."""

    def test_evaluate_at_rational(self):
        assert evaluate_at_rational(hilbert_class_polynomial(7), Fraction(1728)) == 5103
        assert evaluate_at_rational(hilbert_class_polynomial(7), Fraction(-3375)) == 0

    def test_log_abs_product(self):
        expected = mpmath.log(5103) + mpmath.log(16579647)
        assert abs(log_abs_product(Fraction(1728), 7) - expected) < mpmath.mpf("1e-10")

    def test_log_abs_product_at_root(self):
        assert log_abs_product(Fraction(-3375), 7) == mpmath.ninf

    def test_class_number_bound(self):
        fine, coarse = class_number_bound(23)
        assert class_number(23) <= fine
        assert fine > 0 and coarse > 0

    def test_fouvry_murty_bound_dominates(self):
        j = Fraction(-4096, 11)
        bound = fouvry_murty_log_bound(j, 7, 1)
        assert bound > log_abs_product(j, 7)
        assert fouvry_murty_log_bound(j, 23, 3) > bound
