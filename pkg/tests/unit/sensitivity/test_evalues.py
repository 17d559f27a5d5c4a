"""
Unit tests for E-values and bias factors.
"""

from decimal import Decimal, getcontext

import numpy as np
import pytest

from copsens.platform.errors import DomainError
from copsens.sensitivity import (
    bias_factor,
    compute_evalues,
    conservative_rr,
    conservative_rr_interval,
    evalue_point,
    evalue_ul,
)


def evalue_decimal(rr: float) -> float:
    getcontext().prec = 50
    d = Decimal(rr)
    return float((1 + (1 - d).sqrt()) / d)


class TestEvaluePoint:
    @pytest.mark.parametrize(
        "rr, expected",
        [
            (1.0, 1.0),
            (0.40, 4.436491673103708),
            (0.25, 7.464101615137754),
        ],
    )
    def test_known_values(self, rr, expected):
        assert evalue_point(rr) == pytest.approx(expected, rel=1e-12)

    def test_matches_high_precision_formula(self):
        rng = np.random.default_rng(2024)
        for rr in rng.uniform(1e-6, 1.0, 1000):
            assert evalue_point(float(rr)) == pytest.approx(evalue_decimal(float(rr)), rel=1e-12)

    def test_harmful_ratio_uses_reciprocal(self):
        assert evalue_point(2.5) == pytest.approx(evalue_point(0.4), rel=1e-15)

    @pytest.mark.parametrize("rr", [0.0, -1.0, float("nan"), float("inf")])
    def test_domain(self, rr):
        with pytest.raises(DomainError):
            evalue_point(rr)


class TestEvalueUl:
    def test_crossing_null(self):
        assert evalue_ul(1.2) == 1.0
        assert evalue_ul(1.0) == 1.0

    @pytest.mark.parametrize("rr_ul, expected", [(0.78, 1.8834), (0.20, 9.4721)])
    def test_known_values(self, rr_ul, expected):
        assert evalue_ul(rr_ul) == pytest.approx(expected, abs=1e-4)

    def test_domain(self):
        with pytest.raises(DomainError):
            evalue_ul(0.0)


class TestComputeEvalues:
    def test_protective(self):
        result = compute_evalues(0.40, 0.78)
        assert round(result.e_point, 4) == 4.4365
        assert round(result.e_ul, 4) == 1.8834
        assert not result.reciprocal

    def test_harmful_inverts_both(self):
        result = compute_evalues(2.5, 1.0 / 0.78)
        assert result.reciprocal
        assert result.e_point == pytest.approx(evalue_point(0.4))
        assert result.e_ul == pytest.approx(evalue_ul(0.78))

    def test_point_only(self):
        assert compute_evalues(0.5).e_ul is None


class TestBiasFactor:
    def test_sixteen_sevenths(self):
        assert bias_factor(4.0, 4.0) == 16.0 / 7.0

    def test_no_confounder_outcome_association(self):
        assert bias_factor(1.0, 9.0) == 1.0

    def test_two_two(self):
        assert bias_factor(2.0, 2.0) == pytest.approx(4.0 / 3.0, rel=1e-15)

    def test_symmetric_and_bounded(self):
        rng = np.random.default_rng(1)
        for a, b in rng.uniform(1.0, 20.0, size=(200, 2)):
            value = bias_factor(a, b)
            assert value == pytest.approx(bias_factor(b, a), rel=1e-15)
            assert 1.0 <= value <= min(a, b) + 1e-12

    def test_domain(self):
        with pytest.raises(DomainError):
            bias_factor(0.9, 2.0)


class TestConservativeRr:
    def test_applies_bias_factor(self):
        assert conservative_rr(0.2, 16.0 / 7.0) == pytest.approx(0.457142857142857, rel=1e-12)

    def test_unit_bias(self):
        assert conservative_rr(0.37, 1.0) == 0.37

    def test_interval(self):
        assert conservative_rr_interval(0.2, 0.1, 0.4, 2.0) == (0.4, 0.2, 0.8)

    def test_domain(self):
        with pytest.raises(DomainError):
            conservative_rr(0.2, 0.5)


class TestEvalueShape:
    def test_strictly_decreasing_on_protective_ratios(self):
        rr = np.linspace(0.01, 0.99, 99)
        values = np.array([evalue_point(float(r)) for r in rr])
        assert np.all(np.diff(values) < 0)

    def test_at_least_the_reciprocal(self):
        for rr in np.linspace(0.01, 1.0, 100):
            assert evalue_point(float(rr)) >= 1.0 / rr
