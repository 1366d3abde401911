import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from plausdeny.core import DeniabilityParams
from plausdeny.deniability import (
    DeniabilityRatio,
    PdeScore,
    check_indist,
    check_pd,
    incremental_ratio,
    lemma1_holds,
    pd_from_pri,
    pde,
    report_percent,
    session_ratio,
)
from plausdeny.estimators import PriScore

pos = st.floats(1e-6, 1e6, allow_nan=False, allow_infinity=False)


class TestRatios:
    def test_incremental(self):
        assert incremental_ratio(0.9, 0.1).value == pytest.approx(9)
        assert incremental_ratio(0.3, 0.3).value == 1
        with pytest.raises(ZeroDivisionError):
            incremental_ratio(0.5, 0)
        with pytest.raises(ValueError):
            incremental_ratio(1.5, 0.5)

    def test_session(self):
        assert session_ratio([9, 9, 1 / 9]).value == pytest.approx(9)
        assert session_ratio([1, 1, 1]).value == 1
        with pytest.raises(ValueError):
            session_ratio([])

    def test_ratio_must_be_positive(self):
        with pytest.raises(ValueError):
            DeniabilityRatio(0.0)
        with pytest.raises(ValueError):
            DeniabilityRatio(math.inf)


class TestChecks:
    def test_pd_examples(self):
        assert check_pd([1.0], DeniabilityParams(0.01))
        assert not check_pd([9.0], DeniabilityParams(1.0))
        assert check_pd([1.01, 50], DeniabilityParams(0.1))

    def test_pd_boundary_is_strict(self):
        eps = 0.7
        assert not check_pd([math.exp(eps)], DeniabilityParams(eps))
        assert not check_pd([math.exp(-eps)], DeniabilityParams(eps))

    def test_pd_general_m(self):
        assert check_pd([1.0, 1.1, 9.0], DeniabilityParams(0.5, m=3))
        assert not check_pd([1.0, 9.0, 9.0], DeniabilityParams(0.5, m=3))

    def test_indist_examples(self):
        assert check_indist(1.0, 0.01)
        assert not check_indist(2.0, 0.5)
        assert check_indist(PriScore("s", 1, 0.9), 0.2)
        assert check_indist(math.exp(0.3), 0.3)


class TestPdFromPri:
    def test_examples(self):
        assert pd_from_pri(1, 1, 1, 1).value == 1
        assert pd_from_pri(2, 1, 1, 1).value == 2
        with pytest.raises(ValueError):
            pd_from_pri(0, 1, 1, 1)

    def test_four_eps_bound_fuzz(self):
        rng = np.random.default_rng(11)
        eps = rng.uniform(0.001, 2.0, 100_000)
        m = np.exp(rng.uniform(-1, 1, (100_000, 4)) * eps[:, None])
        for row, e in zip(m[:2000], eps[:2000]):
            d = pd_from_pri(*row).value
            assert math.exp(-4 * e) <= d * (1 + 1e-12) and d <= math.exp(4 * e) * (1 + 1e-12)
        d = (m[:, 0] / m[:, 1]) * (m[:, 3] / m[:, 2])
        assert np.all(np.abs(np.log(d)) <= 4 * eps * (1 + 1e-12))


class TestPde:
    def test_examples(self):
        assert pde(1.3, 0.7, 1.3, 0.7).epsilon_star == 0
        assert pde(2, 1, 1, 1).epsilon_star == pytest.approx(0.693147, abs=1e-6)
        assert pde(1, 2, 2, 1).epsilon_star == pytest.approx(1.386294, abs=1e-6)

    @given(pos, pos, pos, pos)
    def test_symmetric_under_complement_swap(self, a, b, c, d):
        assert pde(a, b, c, d).epsilon_star == pytest.approx(pde(b, a, d, c).epsilon_star, abs=1e-9)

    @given(pos, pos)
    def test_zero_at_baseline(self, a, b):
        assert pde(a, b, a, b).epsilon_star == 0.0

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            PdeScore(1, -0.1)


class TestReportPercent:
    @pytest.mark.parametrize("x,expected", [(0.47, 47), (0, 0), (1.23, 123), (0.005, 1),
                                            (0.0149, 1), (0.105, 11), (2.5, 250)])
    def test_values(self, x, expected):
        assert report_percent(x) == expected

    def test_accepts_scores(self):
        assert report_percent(PdeScore(3, 0.47)) == 47


class TestRatioBound:
    def test_examples(self):
        assert lemma1_holds(0.3, 0.3, 0.1)
        assert lemma1_holds(0.30, 0.20, 0.5)
        assert not lemma1_holds(0.9, 0.1, 0.5)

    @pytest.mark.parametrize("x,y,eps", [(0, 0.5, 1), (0.5, 1, 1), (0.5, 0.5, 0)])
    def test_domain(self, x, y, eps):
        with pytest.raises(ValueError):
            lemma1_holds(x, y, eps)

    @given(st.floats(1e-9, 1 - 1e-9), st.floats(1e-9, 1 - 1e-9), st.floats(1e-6, 5))
    def test_implication(self, x, y, eps):
        if lemma1_holds(x, y, eps):
            assert abs(x - y) < eps
