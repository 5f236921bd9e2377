"""Two-scale product identities, coverage schedules, and plateau solutions."""

from fractions import Fraction

import pytest

from cantorlab import DomainError, NonConvergent, as_big, example2_system, middle_third_system
from cantorlab.scale_free_de import (
    coverage_steps_to,
    hopping_coverage,
    hopping_identity,
    lcf_solution_check,
    product_minus,
    product_plus,
)

F = Fraction

ETAS = (F(1, 10), F(1, 2), F(9, 10))


class TestPartialProducts:
    def test_minus_closed_form_exact(self):
        for eta in ETAS:
            for n in (0, 1, 3, 5):
                expect = (1 - eta) / (1 - eta ** (2 ** (n + 1)))
                assert product_minus(eta, n) == expect

    def test_plus_closed_form_exact(self):
        for eta in ETAS:
            for n in (0, 1, 3, 5):
                expect = (1 + eta) / (1 - eta ** (2 ** (n + 1)))
                assert product_plus(eta, n) == expect

    def test_half_at_depth_five(self):
        assert product_minus(F(1, 2), 5) == F(1, 2) / (1 - F(1, 2) ** 64)

    def test_deep_limits_hit_one_plus_minus_eta(self):
        for eta in ETAS:
            assert abs(product_minus(as_big(eta), 40) - (1 - eta)) < F(1, 10**12)
            assert abs(product_plus(as_big(eta), 40) - (1 + eta)) < F(1, 10**12)

    def test_minus_decreases_to_its_limit(self):
        eta = F(1, 3)
        values = [product_minus(eta, n) for n in range(8)]
        assert all(a > b for a, b in zip(values, values[1:]))
        assert all(v > 1 - eta for v in values)

    def test_plus_decreases_to_its_limit(self):
        eta = F(1, 3)
        values = [product_plus(eta, n) for n in range(8)]
        assert all(a > b for a, b in zip(values, values[1:]))
        assert all(v > 1 + eta for v in values)

    def test_solution_consistency(self):
        # both products truncate the same factorisation, so they agree
        # after swapping the boundary factors, at every depth
        for eta in ETAS:
            for n in (0, 2, 5, 8):
                assert product_plus(eta, n) * (1 - eta) == product_minus(eta, n) * (
                    1 + eta
                )

    def test_domains(self):
        with pytest.raises(DomainError):
            product_minus(F(0), 3)
        with pytest.raises(DomainError):
            product_minus(F(3, 2), 3)
        with pytest.raises(DomainError):
            product_plus(F(1, 2), -1)
        with pytest.raises(DomainError):
            product_minus(F(1, 2), 30)  # exact path would need 2**31 digits


class TestHoppingIdentity:
    def test_gap_is_the_tail_power(self):
        for eta in ETAS:
            for n in (2, 5, 8):
                lhs, rhs, gap = hopping_identity(eta, n)
                assert lhs == 1 / (1 - eta)
                assert gap == eta ** (2 ** (n + 1)) / (1 - eta)
                assert lhs - rhs == gap

    def test_product_telescopes(self):
        for eta in ETAS:
            _lhs, rhs, _gap = hopping_identity(eta, 6)
            assert rhs * (1 - eta) == 1 - eta ** (2**7)

    def test_gap_squares_with_each_factor(self):
        # gap(n+1) = (1 - eta) * gap(n)^2, checked exactly
        for eta in ETAS:
            gaps = [hopping_identity(eta, n)[2] for n in range(2, 8)]
            for g, g_next in zip(gaps, gaps[1:]):
                assert g_next == (1 - eta) * g * g

    def test_super_geometric_collapse(self):
        # the acceptance comparison gap(n+1) < gap(n)^1.9, as integer powers
        for eta in ETAS:
            gaps = [hopping_identity(eta, n)[2] for n in range(2, 11)]
            for g, g_next in zip(gaps, gaps[1:]):
                assert g_next**10 < g**19

    def test_gap_at_ten_is_tiny(self):
        for eta in ETAS:
            assert hopping_identity(eta, 10)[2] < F(1, 10**20)


class TestCoverage:
    def test_closed_forms(self):
        for eta in ETAS:
            for n in (0, 1, 4, 7):
                add, hop = hopping_coverage(eta, n)
                assert add == 1 - (1 - eta) ** n
                assert hop == 1 - eta ** (2**n)

    def test_hopping_overtakes_additive(self):
        add, hop = hopping_coverage(F(1, 2), 5)
        assert hop > add
        assert hop == 1 - F(1, 2**32)

    def test_steps_to_threshold(self):
        additive, hopped = coverage_steps_to(F(1, 2), F(1, 10**6))
        assert (additive, hopped) == (20, 5)
        # the returned counts actually reach the threshold, minimally
        assert hopping_coverage(F(1, 2), hopped)[1] > 1 - F(1, 10**6)
        assert hopping_coverage(F(1, 2), hopped - 1)[1] <= 1 - F(1, 10**6)
        assert hopping_coverage(F(1, 2), additive)[0] > 1 - F(1, 10**6)
        assert hopping_coverage(F(1, 2), additive - 1)[0] <= 1 - F(1, 10**6)

    def test_additive_step_cap(self):
        with pytest.raises(NonConvergent):
            coverage_steps_to(F(1, 10**4), F(1, 10**9), max_steps=100)

    def test_domains(self):
        with pytest.raises(DomainError):
            coverage_steps_to(F(1, 2), F(2))
        with pytest.raises(DomainError):
            hopping_coverage(F(1, 2), -1)


class TestLocallyConstantSolutions:
    def test_plateau_pairs_have_no_residual(self):
        rep = lcf_solution_check(
            middle_third_system(), [F(2, 5), F(9, 20), F(1, 2), F(11, 20)]
        )
        assert rep.plateau_count == 3 and rep.crossing_count == 0
        for seg in rep.segments:
            assert seg.plateau and seg.delta_tau == 0
            assert seg.tau_lo == F(1, 2)
            assert seg.exponent_residual < F(1, 2**200)

    def test_crossings_are_flagged_with_residual(self):
        # 13/100 sits in the depth-2 gap (phi = 1/4), 2/5 in the depth-1 gap
        rep = lcf_solution_check(middle_third_system(), [F(13, 100), F(2, 5)])
        (seg,) = rep.segments
        assert seg.crossing and not seg.plateau
        assert seg.tau_lo == F(1, 4) and seg.tau_hi == F(1, 2)
        assert seg.exponent_residual > F(1, 10)

    def test_set_point_between_plateaus_is_a_crossing(self):
        # 3/10 lies in the set; its exponent is not locked to either plateau
        rep = lcf_solution_check(middle_third_system(), [F(13, 100), F(3, 10), F(2, 5)])
        assert rep.crossing_count == 2
        mid_tau = rep.segments[0].tau_hi
        assert abs(mid_tau - F(2, 5)) < F(1, 2**60)

    def test_flatness_decays_with_the_scale(self):
        rep = lcf_solution_check(
            middle_third_system(),
            [F(2, 5), F(9, 20), F(11, 20)],
            eps_schedule=[F(1, 10), F(1, 10**3), F(1, 10**9)],
        )
        slopes = [row.max_abs_slope for row in rep.flatness]
        assert all(a > b for a, b in zip(slopes, slopes[1:]))
        for row in rep.flatness:
            # finite differences sit within 10% of the analytic slope here
            assert abs(row.max_abs_slope - row.oracle_slope) < row.oracle_slope / 10

    def test_works_for_other_binary_systems(self):
        rep = lcf_solution_check(example2_system(F(1, 2)), [F(9, 20), F(11, 20)])
        (seg,) = rep.segments
        assert seg.plateau and seg.tau_lo == F(1, 2)

    def test_domains(self):
        with pytest.raises(DomainError):
            lcf_solution_check(middle_third_system(), [F(1, 2)])
        with pytest.raises(DomainError):
            lcf_solution_check(middle_third_system(), [F(0), F(1, 2)])
        with pytest.raises(DomainError):
            lcf_solution_check(
                middle_third_system(), [F(2, 5), F(3, 5)], eps_schedule=[F(2)]
            )
