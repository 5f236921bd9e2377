"""Systems, refinement levels, and streaming level statistics."""

import json
import random
from fractions import Fraction

import pytest

from cantorlab import (
    DepthOverflow,
    DomainError,
    ExplicitGapSchedule,
    FluctuatingFamily,
    InvalidSystem,
    MiddleAlpha,
    MultiBranch,
    SequenceSpec,
    VariableFraction,
    as_big,
    example2_system,
    fluctuating_family,
    gap_lengths_at,
    level_profile,
    locate,
    middle_third_system,
    refine_to,
)

F = Fraction


def all_systems():
    return [
        middle_third_system(),
        MiddleAlpha(F(1, 2)),
        MultiBranch(3, 2, F(1, 5), F(1, 5)),
        MultiBranch(4, 3, F(1, 9), F(1, 6)),
        VariableFraction(SequenceSpec.reciprocal_power(c=1, power=2, offset=2)),
        VariableFraction(SequenceSpec.geometric(1, F(1, 4))),
        example2_system(F(1, 2)),
        fluctuating_family(3),
    ]


class TestSystemValidation:
    @pytest.mark.parametrize("alpha", [0, 1, F(-1, 2), F(3, 2)])
    def test_middle_alpha_range(self, alpha):
        with pytest.raises(InvalidSystem):
            MiddleAlpha(F(alpha))

    def test_multi_branch_needs_interleaved_counts(self):
        with pytest.raises(InvalidSystem):
            MultiBranch(3, 3, F(1, 6), F(1, 6))
        with pytest.raises(InvalidSystem):
            MultiBranch(1, 0, F(1, 3), F(1, 3))

    def test_multi_branch_widths_must_tile(self):
        with pytest.raises(InvalidSystem):
            MultiBranch(3, 2, F(1, 5), F(1, 4))
        with pytest.raises(InvalidSystem):
            MultiBranch(3, 2, F(-1, 5), F(2, 5))

    def test_variable_fraction_rejects_bad_values_at_use(self):
        sys_ = VariableFraction(SequenceSpec.geometric(3, 1))
        with pytest.raises(InvalidSystem):
            level_profile(sys_, 1)

    def test_gap_schedule_must_fit(self):
        too_big = ExplicitGapSchedule(SequenceSpec.geometric(3, F(1, 3)))
        with pytest.raises(InvalidSystem):
            refine_to(too_big, 1)
        # fits at depth 1 but not inside the depth-1 bridges
        slow = ExplicitGapSchedule(SequenceSpec.geometric(2, F(1, 3)))
        assert refine_to(slow, 1).bridges[0].length == F(1, 6)
        with pytest.raises(InvalidSystem):
            refine_to(slow, 2)

    def test_fluctuating_family_parameters(self):
        with pytest.raises(InvalidSystem):
            FluctuatingFamily(1)
        with pytest.raises(InvalidSystem):
            FluctuatingFamily(3, start_level=4)
        with pytest.raises(InvalidSystem):
            FluctuatingFamily(3, start_level=0)

    def test_example2_delta_range(self):
        with pytest.raises(InvalidSystem):
            example2_system(F(3, 2))

    def test_sequence_spec_indexing(self):
        s = SequenceSpec.explicit([F(1, 3), F(1, 9)])
        assert s.value_at(2) == F(1, 9)
        with pytest.raises(DomainError):
            s.value_at(0)
        with pytest.raises(DepthOverflow):
            s.value_at(3)
        assert s.depth_limit == 2


class TestRefineTo:
    def test_middle_third_depth_two_is_exact(self):
        lvl = refine_to(middle_third_system(), 2)
        got = [(b.left, b.right) for b in lvl.bridges]
        assert got == [
            (F(0), F(1, 9)), (F(2, 9), F(1, 3)), (F(2, 3), F(7, 9)), (F(8, 9), F(1)),
        ]
        assert [(g.left, g.right, g.depth) for g in lvl.gaps] == [
            (F(1, 9), F(2, 9), 2), (F(1, 3), F(2, 3), 1), (F(7, 9), F(8, 9), 2),
        ]

    def test_multi_branch_level_one(self):
        lvl = refine_to(MultiBranch(3, 2, F(1, 5), F(1, 5)), 1)
        assert [(b.left, b.right) for b in lvl.bridges] == [
            (F(0), F(1, 5)), (F(2, 5), F(3, 5)), (F(4, 5), F(1)),
        ]

    def test_variable_fraction_bridge_length(self):
        # alpha_n = 1/(n+2)^2; level-3 bridge length is exactly 1/10
        sys_ = VariableFraction(SequenceSpec.reciprocal_power(c=1, power=2, offset=2))
        lvl = refine_to(sys_, 3)
        assert lvl.bridges[0].length == F(1, 10)

    def test_example2_first_levels(self):
        lvl = refine_to(example2_system(F(1, 2)), 2)
        assert lvl.bridges[0] .left == 0
        assert lvl.bridges[0].length == F(13, 72)
        assert gap_lengths_at(lvl, 1) == (F(1, 6),)
        assert gap_lengths_at(lvl, 2) == (F(1, 18), F(1, 18))

    def test_bridge_cap(self):
        with pytest.raises(DepthOverflow):
            refine_to(middle_third_system(), 11, max_bridges=1 << 10)

    def test_tiling_and_conservation(self):
        for sys_ in all_systems():
            lvl = refine_to(sys_, 4)
            pieces = sorted(
                [(b.left, b.right) for b in lvl.bridges]
                + [(g.left, g.right) for g in lvl.gaps]
            )
            assert pieces[0][0] == 0 and pieces[-1][1] == 1
            for (l0, r0), (l1, r1) in zip(pieces, pieces[1:]):
                if sys_.exact:
                    assert r0 == l1
                else:
                    assert abs(r0 - l1) < F(1, 2**200)

    def test_nesting(self):
        for sys_ in all_systems():
            coarse = refine_to(sys_, 3)
            fine = refine_to(sys_, 4)
            hosts = [(b.left, b.right) for b in coarse.bridges]
            slack = F(0) if sys_.exact else F(1, 2**200)
            for b in fine.bridges:
                assert any(
                    hl - slack <= b.left and b.right <= hr + slack for hl, hr in hosts
                )

    def test_gap_lengths_at_bounds(self):
        lvl = refine_to(middle_third_system(), 3)
        assert gap_lengths_at(lvl, 3) == (F(1, 27),) * 4
        with pytest.raises(DepthOverflow):
            gap_lengths_at(lvl, 4)
        with pytest.raises(DomainError):
            gap_lengths_at(lvl, 0)


class TestLevelProfile:
    def test_matches_materialised_levels(self):
        for sys_ in all_systems():
            stats = level_profile(sys_, 5)
            for d in (1, 3, 5):
                lvl = refine_to(sys_, d)
                row = stats[d]
                assert row.bridge_count == len(lvl.bridges)
                diff = abs(row.bridge_length - lvl.bridges[0].length)
                created = gap_lengths_at(lvl, d)
                assert row.gaps_created == len(created)
                gdiff = abs(row.gap_length - created[0])
                if sys_.exact:
                    assert diff == 0 and gdiff == 0
                else:
                    assert diff < F(1, 2**200) and gdiff < F(1, 2**200)

    def test_exact_conservation_per_depth(self):
        for sys_ in all_systems():
            if not sys_.exact:
                continue
            for row in level_profile(sys_, 12):
                assert row.total_bridge_length + row.cumulative_gap_length == 1

    def test_example2_measure_closed_form(self):
        rows = level_profile(example2_system(F(1, 2)), 10)
        assert rows[10].total_bridge_length == 1 - F(1, 2) * (1 - F(2, 3) ** 10)

    def test_deep_profiles_are_cheap(self):
        rows = level_profile(middle_third_system(), 2000)
        assert rows[2000].bridge_count == 2**2000
        assert rows[2000].bridge_length == F(1, 3**2000)

    def test_numeric_mode_big_for_rational_system(self):
        rows = level_profile(middle_third_system(), 8, numeric="big")
        assert abs(rows[8].bridge_length - F(1, 3**8)) < F(1, 2**200)
        with pytest.raises(DomainError):
            level_profile(fluctuating_family(3), 4, numeric="exact")
        with pytest.raises(DomainError):
            level_profile(middle_third_system(), 4, numeric="fast")


class TestFluctuatingFamily:
    def test_auto_start_levels(self):
        assert fluctuating_family(3).effective_start == 7
        assert fluctuating_family(9).effective_start == 3
        assert fluctuating_family(2).effective_start == 9

    def test_roles(self):
        ff = fluctuating_family(3)
        assert [ff.level_role(d) for d in range(1, 12)] == [
            "plain"] * 7 + ["shrink", "balance", "shrink", "balance"]

    def test_plain_prefix_matches_middle_thirds(self):
        rows = level_profile(fluctuating_family(3), 7)
        for d in range(1, 8):
            assert abs(rows[d].bridge_length - F(1, 3**d)) < F(1, 2**200)

    def test_explicit_start_reproduces_perturbed_second_level(self):
        rows = level_profile(fluctuating_family(3, start_level=1), 2)
        target = as_big(3) ** (-(as_big(2) * (1 + F(1, 3))))  # 3^(-8/3)
        assert abs(rows[2].gap_length - target) < F(1, 2**200)

    def test_pairs_cancel_exactly(self):
        ff = fluctuating_family(3)
        rows = level_profile(ff, 16)
        for d in range(1, 17):
            # after every balance step the bridge length returns to 3^-d
            if ff.level_role(d) == "balance":
                assert abs(rows[d].bridge_length - F(1, 3**d)) < F(1, 2**200)

    def test_deletions_still_sum_to_one(self):
        rows = level_profile(fluctuating_family(3), 24)
        remaining = 1 - rows[24].cumulative_gap_length
        assert abs(remaining - F(2, 3) ** 24) < F(1, 10**9)

    def test_shrink_levels_carry_exact_parameters(self):
        ff = fluctuating_family(9)
        levels = ff.shrink_levels(12)
        assert levels == [3, 5, 7, 9, 11]
        assert ff.alpha_at(3) == F(1, 729)


class TestLocateAndJson:
    def test_locate_examples(self):
        lvl = refine_to(middle_third_system(), 2)
        assert locate(lvl, F(1, 3)).kind == "gap"
        assert locate(lvl, F(1, 3)).index == 1  # gaps indexed by position
        assert locate(lvl, F(2, 9)) == locate(lvl, F(1, 9))  # both ends of gap 0
        assert locate(lvl, F(1, 4)).kind == "bridge"
        assert locate(lvl, F(1, 4)).index == 1
        assert locate(lvl, 0).kind == "bridge"
        assert locate(lvl, F(-1, 2)).kind == "outside"
        assert locate(lvl, 2).kind == "outside"

    def test_locate_random_points_agree_with_scan(self):
        rng = random.Random(7)
        lvl = refine_to(MiddleAlpha(F(2, 5)), 5)
        for _ in range(50):
            x = F(rng.randrange(0, 10**6), 10**6)
            loc = locate(lvl, x)
            if loc.kind == "gap":
                g = lvl.gaps[loc.index]
                assert g.left <= x <= g.right
            else:
                b = lvl.bridges[loc.index]
                assert b.left <= x <= b.right

    def test_json_schema_and_determinism(self):
        lvl = refine_to(middle_third_system(), 2)
        doc = lvl.to_json_dict()
        assert set(doc) == {"depth", "bridges", "gaps"}
        assert doc["depth"] == 2
        assert doc["bridges"][1] == {
            "left": as_big(F(2, 9)).to_decimal_string(),
            "right": as_big(F(1, 3)).to_decimal_string(),
        }
        assert doc["gaps"][1]["depth"] == 1
        assert lvl.to_json() == refine_to(middle_third_system(), 2).to_json()
        json.loads(lvl.to_json())  # well-formed
