import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from photonmesh import (
    MeshLayout,
    build_mesh,
    component_count,
    component_counts,
    max_modes_overhead,
    max_modes_plain,
    monte_carlo_yield,
    p_at_most,
    p_zero_defect,
    threshold_epsilon,
    tolerance_curve,
    tolerance_curve_csv,
)


def brute_force_tail(N, m, eps):
    """Exact tail by enumerating all 2**N defect patterns."""
    total = 0.0
    for bits in itertools.product((0, 1), repeat=N):
        k = sum(bits)
        if k <= m:
            total += eps**k * (1 - eps) ** (N - k)
    return total


def rational_tail(N, m, eps: Fraction) -> float:
    exact = sum(
        Fraction(math.comb(N, k)) * eps**k * (1 - eps) ** (N - k) for k in range(m + 1)
    )
    return float(exact)


class TestZeroDefectProbability:
    def test_25_modes_against_repeated_multiplication(self):
        p = p_zero_defect(25, 0.001)
        direct = 1.0
        for _ in range(625):
            direct *= 0.999
        assert p == pytest.approx(direct, abs=1e-14)
        assert p == pytest.approx(0.535094, abs=1e-6)

    def test_epsilon_zero(self):
        assert p_zero_defect(40, 0.0) == 1.0

    def test_epsilon_one(self):
        assert p_zero_defect(1, 1.0) == 0.0

    def test_exact_model_uses_component_inventory(self):
        for n in (2, 5, 17, 64):
            assert component_count(n, "exact") == component_counts(
                build_mesh(MeshLayout.rectangular(n))
            ).total
        assert component_count(7, "approximate") == 49


class TestMaxModesPlain:
    def test_one_in_a_thousand(self):
        assert max_modes_plain(1e-3) == 26

    def test_ten_percent(self):
        # sqrt(ln 2 / ln(1/0.9)) ~ 2.56
        assert max_modes_plain(0.1) == 2

    def test_half_fails_even_single_crossing(self):
        # n = 1 gives exactly 0.5, which does not strictly exceed 1/2
        assert max_modes_plain(0.5) == 0

    def test_matches_closed_form_floor(self):
        for eps in (1e-4, 3e-4, 1e-3, 0.01, 0.03, 0.2):
            bound = math.sqrt(math.log(2) / math.log(1 / (1 - eps)))
            expect = math.floor(bound)
            if (1 - eps) ** (expect * expect) <= 0.5:  # tie or overshoot
                expect -= 1
            assert max_modes_plain(eps) == expect

    def test_zero_signalled_distinctly(self):
        with pytest.raises(ValueError, match="unbounded"):
            max_modes_plain(0.0)


class TestBinomialTail:
    def test_brute_force_small(self):
        assert p_at_most(4, 1, 0.5) == pytest.approx(brute_force_tail(4, 1, 0.5), abs=1e-15)
        assert p_at_most(4, 1, 0.5) == pytest.approx(0.3125, abs=1e-15)

    def test_epsilon_zero(self):
        assert p_at_most(100, 0, 0.0) == 1.0

    def test_m_zero_matches_zero_defect(self):
        for n in (3, 9):
            for eps in (0.01, 0.2):
                assert p_at_most(n * n, 0, eps) == pytest.approx(
                    p_zero_defect(n, eps), rel=1e-12
                )

    @pytest.mark.parametrize(
        "N,m,eps",
        [(20, 7, Fraction(1, 8)), (15, 3, Fraction(3, 10)), (18, 9, Fraction(1, 2)),
         (12, 0, Fraction(1, 16)), (20, 19, Fraction(9, 10))],
    )
    def test_log_space_matches_exact_rational(self, N, m, eps):
        assert p_at_most(N, m, float(eps)) == pytest.approx(
            rational_tail(N, m, eps), abs=1e-12
        )

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 60), st.data())
    def test_monotonicity(self, N, data):
        m = data.draw(st.integers(0, N - 1))
        eps = data.draw(st.floats(0.01, 0.95))
        assert p_at_most(N, m + 1, eps) >= p_at_most(N, m, eps)
        assert p_at_most(N, m, eps * 0.5) >= p_at_most(N, m, eps)
        if N > 1:
            assert p_at_most(N - 1, m, eps) >= p_at_most(N, m, eps)

    def test_invalid_ranges(self):
        with pytest.raises(ValueError):
            p_at_most(4, 5, 0.1)
        with pytest.raises(ValueError):
            p_at_most(4, -1, 0.1)


class TestOverhead:
    def test_zero_overhead_reduces_to_plain(self):
        for eps in (1e-3, 0.01, 0.1):
            assert max_modes_overhead(eps, 0.0) == max_modes_plain(eps)

    def test_monotone_in_overhead(self):
        values = [max_modes_overhead(1e-3, r) for r in (0.0, 0.1, 0.3, 0.5, 0.8)]
        assert values == sorted(values)

    def test_fifty_percent_overhead_beats_plain(self):
        assert max_modes_overhead(1e-3, 0.5) > 26

    def test_curve_shape(self):
        rows = tolerance_curve(0.2, [1e-4, 1e-3, 1e-2, 1e-1])
        ns = [n for _, n in rows]
        assert ns == sorted(ns, reverse=True)

    def test_curves_nest(self):
        grid = [3e-4, 1e-3, 3e-3, 1e-2]
        low = tolerance_curve(0.1, grid)
        high = tolerance_curve(0.6, grid)
        assert all(h >= l for (_, l), (_, h) in zip(low, high))

    def test_csv_emission(self):
        text = tolerance_curve_csv([(1e-3, 26), (1e-2, 8)])
        lines = text.strip().splitlines()
        assert lines[0] == "epsilon,max_n"
        assert lines[1] == "0.001,26"

    def test_unsorted_grid_rejected(self):
        with pytest.raises(ValueError):
            tolerance_curve(0.2, [1e-2, 1e-3])


class TestThreshold:
    def test_threshold_is_feasibility_boundary(self):
        eps = threshold_epsilon(20, 0.4)
        assert max_modes_overhead(eps * 0.95, 0.4) >= 20
        assert max_modes_overhead(eps * 1.10, 0.4) < 20

    def test_plain_threshold_closed_form(self):
        # boundary of (1-eps)^(n^2) = 1/2
        n = 15
        eps = threshold_epsilon(n, 0.0)
        assert eps == pytest.approx(1 - 0.5 ** (1 / n**2), rel=1e-9)


class TestMonteCarlo:
    def test_matches_brute_force_value(self):
        est = monte_carlo_yield(1, 1, 0.5, 100_000, seed=11)
        assert est.components == 4
        assert abs(est.estimate - 0.3125) <= 3 * est.stderr

    def test_epsilon_zero(self):
        est = monte_carlo_yield(3, 0, 0.0, 1000, seed=5)
        assert est.estimate == 1.0
        assert est.stderr == 0.0

    def test_seed_determinism(self):
        a = monte_carlo_yield(4, 2, 0.05, 20_000, seed=123)
        b = monte_carlo_yield(4, 2, 0.05, 20_000, seed=123)
        assert a == b

    def test_different_seeds_differ(self):
        a = monte_carlo_yield(4, 2, 0.05, 20_000, seed=1)
        b = monte_carlo_yield(4, 2, 0.05, 20_000, seed=2)
        assert a.estimate != b.estimate

    def test_agreement_with_analytic(self):
        for n, m, eps, seed in [(2, 1, 0.1, 0), (3, 2, 0.08, 1), (5, 2, 0.02, 2)]:
            est = monte_carlo_yield(n, m, eps, 50_000, seed=seed)
            exact = p_at_most(est.components, m, eps)
            assert abs(est.estimate - exact) <= 3 * max(est.stderr, 1e-4)

    def test_requires_trials(self):
        with pytest.raises(ValueError):
            monte_carlo_yield(2, 1, 0.1, 0)
