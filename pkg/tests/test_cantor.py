import random
from fractions import Fraction as Q

import pytest

from thickset.cantor import (
    IN_CERTIFIED,
    IN_COVER,
    OUT,
    STABILIZED,
    affine_image,
    combo_cover,
    combo_covers_interval,
    cover,
    difference_interval,
    enumerate_gaps,
    gap_containing_interval,
    interval_in_cover,
    membership,
    middle_cantor,
    middle_thirds,
    newhouse_thickness,
    normalize_to_unit,
    off_center_cantor,
)
from thickset.errors import HypothesisError, InputError


class TestBuilders:
    def test_middle_thirds_maps(self):
        s = middle_thirds()
        assert [(b.scale, b.offset) for b in s.branches] == [
            (Q(1, 3), Q(0)), (Q(1, 3), Q(2, 3))]

    def test_middle_cantor_2_5(self):
        s = middle_cantor(Q(2, 5))
        assert s.branches[0].scale == Q(3, 10)
        assert s.top_gaps() == [(Q(3, 10), Q(7, 10))]

    def test_middle_cantor_rejects_boundary(self):
        with pytest.raises(InputError):
            middle_cantor(0)
        with pytest.raises(InputError):
            middle_cantor(1)

    def test_off_center_depth1(self):
        s = off_center_cantor(Q(3, 10))
        assert s.branch_images() == [(Q(0), Q(3, 10)), (Q(6, 10), Q(1))]
        assert s.top_gaps() == [(Q(3, 10), Q(6, 10))]

    def test_off_center_depth2_contains_split_gap(self):
        a = Q(3, 10)
        s = off_center_cantor(a)
        got = {(g[0], g[1]) for g in enumerate_gaps(s, 2)}
        assert (3 * a - 2 * a**2, 4 * a - 4 * a**2) in got
        assert (3 * a - 2 * a**2, 4 * a - 4 * a**2) == (Q(18, 25), Q(21, 25))

    def test_off_center_rejects_boundary(self):
        with pytest.raises(InputError):
            off_center_cantor(Q(1, 3))


class TestCover:
    def test_depth0(self):
        assert cover(middle_thirds(), 0).intervals == ((Q(0), Q(1)),)

    def test_middle_thirds_depth2(self):
        c = cover(middle_thirds(), 2)
        assert len(c.intervals) == 4
        assert all(b - a == Q(1, 9) for a, b in c.intervals)
        assert c.intervals[0] == (Q(0), Q(1, 9))

    def test_off_center_depth2_intervals(self):
        a = Q(3, 10)
        c = cover(off_center_cantor(a), 2)
        assert c.intervals == (
            (Q(0), a**2),
            (2 * a**2, a),
            (2 * a, 3 * a - 2 * a**2),
            (4 * a - 4 * a**2, Q(1)),
        )

    @pytest.mark.parametrize("builder", [
        middle_thirds,
        lambda: middle_cantor(Q(2, 5)),
        lambda: off_center_cantor(Q(3, 10)),
        lambda: off_center_cantor(Q(59, 200)),
    ])
    def test_nesting(self, builder):
        # every depth-(n+1) interval sits inside a depth-n interval, for
        # all n <= 10 (both lists are sorted, so a single sweep suffices)
        s = builder()
        for n in range(0, 10):
            outer = cover(s, n).intervals
            inner = cover(s, n + 1).intervals
            k = 0
            for a, b in inner:
                while outer[k][1] < b:
                    k += 1
                assert outer[k][0] <= a and b <= outer[k][1]

    def test_interval_in_cover_descent_matches_materialized(self):
        s = off_center_cantor(Q(3, 10))
        ints = cover(s, 5).intervals
        rng = random.Random(3)
        for _ in range(300):
            x = Q(rng.randint(0, 1000), 1000)
            want = any(lo <= x <= hi for lo, hi in ints)
            assert interval_in_cover(s, x, x, 5) == want


class TestThickness:
    def test_middle_thirds_is_one(self):
        rep = newhouse_thickness(middle_thirds(), 6)
        assert rep.value == 1
        assert rep.status == STABILIZED

    def test_off_center_is_one(self):
        rep = newhouse_thickness(off_center_cantor(Q(3, 10)), 8)
        assert rep.value == 1
        assert rep.status == STABILIZED

    def test_middle_cantor_formula(self):
        # derived oracle from the definition: bridge (1-eps)/2 over gap eps
        for eps in [Q(1, 5), Q(1, 4), Q(1, 3), Q(2, 5)]:
            rep = newhouse_thickness(middle_cantor(eps), 6)
            assert rep.value == (1 - eps) / (2 * eps)
            assert rep.status == STABILIZED

    def test_witness_gap_is_top_gap(self):
        rep = newhouse_thickness(middle_cantor(Q(2, 5)), 6)
        assert rep.value == Q(3, 4)
        assert rep.witness.gap == (Q(3, 10), Q(7, 10))

    def test_rejects_shallow_depth(self):
        with pytest.raises(InputError):
            newhouse_thickness(middle_thirds(), 1)

    def test_affine_invariance(self):
        rng = random.Random(5)
        base = [middle_thirds(), middle_cantor(Q(2, 5)),
                off_center_cantor(Q(3, 10))]
        for s in base:
            v0 = newhouse_thickness(s, 6).value
            for _ in range(40):
                a = Q(rng.randint(1, 40), rng.randint(1, 40))
                if rng.random() < 0.5:
                    a = -a
                b = Q(rng.randint(-50, 50), rng.randint(1, 20))
                img = affine_image(s, a, b)
                assert newhouse_thickness(img, 6).value == v0

    def test_tie_break_independence_on_middle_eps(self):
        # equal-length gaps occur at every depth of middle-eps sets; the
        # minimum ratio must not depend on which of them is removed first
        for eps in [Q(1, 3), Q(1, 4)]:
            s = middle_cantor(eps)
            gaps = enumerate_gaps(s, 5)
            rng = random.Random(9)
            from thickset.cantor import _ordered_removal

            baseline = min(r.ratio for r in _ordered_removal(s, gaps))
            for _ in range(10):
                shuffled = gaps[:]
                rng.shuffle(shuffled)  # sort is stable; shuffle the ties
                got = min(r.ratio for r in _ordered_removal(s, shuffled))
                assert got == baseline


class TestGaps:
    def test_gap_disjoint_from_deep_cover(self):
        # the whole open gap misses the depth-20 cover, checked by a
        # pruned descent (no materialization of 2^20 intervals)
        def cover_meets_open(s, m, glo, ghi, depth):
            lo, hi = m.apply_interval(*s.hull)
            if hi <= glo or ghi <= lo:
                return False
            if depth == 0:
                return True
            return any(cover_meets_open(s, m.compose(b), glo, ghi,
                                        depth - 1) for b in s.branches)

        from thickset.cantor import IDENTITY

        for s in [middle_thirds(), off_center_cantor(Q(3, 10))]:
            for glo, ghi, d in enumerate_gaps(s, 4):
                assert not cover_meets_open(s, IDENTITY, glo, ghi, 20)

    def test_gap_containing_interval(self):
        s = middle_thirds()
        hit = gap_containing_interval(s, Q(4, 10), Q(5, 10))
        assert hit == (Q(1, 3), Q(2, 3), 1)
        assert gap_containing_interval(s, Q(1, 4), Q(1, 2)) is None
        deep = gap_containing_interval(s, Q(1, 27) + Q(1, 200),
                                       Q(2, 27) - Q(1, 200))
        assert deep == (Q(1, 27), Q(2, 27), 3)


class TestCertifiedMember:
    def test_periodic_rationals(self):
        from thickset.cantor import certified_member

        s = middle_thirds()
        # base-3 expansion 0.020202... descends periodically
        assert certified_member(s, Q(1, 4))
        assert certified_member(s, Q(1, 12))
        assert certified_member(s, Q(11, 12))
        assert certified_member(s, Q(1, 3))
        assert not certified_member(s, Q(1, 2))   # in the central gap
        assert not certified_member(s, Q(5, 12))  # 0.1021...: hits a gap

    def test_against_digit_oracle(self):
        # the middle-thirds set is exactly the reals with a base-3
        # expansion avoiding the digit 1
        from thickset.cantor import certified_member

        def in_cantor_digits(q: Q, steps: int = 200) -> bool:
            x = q
            seen = set()
            while x not in seen:
                seen.add(x)
                if len(seen) > steps:
                    return True
                x *= 3
                digit, x = divmod(x, 1)
                if digit == 1 and x != 0:
                    return False
                if digit == 1 and x == 0:
                    return True  # terminating .1 equals .0222...
                if digit == 3:
                    return True  # was exactly 1 before scaling
            return True

        s = middle_thirds()
        rng = random.Random(13)
        for _ in range(400):
            q = Q(rng.randint(0, 240), 240)
            want = in_cantor_digits(q)
            got = certified_member(s, q)
            # certified_member may fail to certify but must never claim
            # membership of a non-member; on this denominator set the
            # orbits are short, so it decides everything
            assert got == want, q


class TestMembership:
    def test_endpoint_certified(self):
        assert membership(middle_thirds(), Q(1, 3)).kind == IN_CERTIFIED

    def test_gap_point(self):
        r = membership(middle_thirds(), Q(1, 2))
        assert r.kind == OUT
        assert r.depth == 1

    def test_quarter_stays_in_cover(self):
        # 1/4 has base-3 expansion 0.020202..., never an endpoint
        r = membership(middle_thirds(), Q(1, 4), depth=40)
        assert r.kind == IN_COVER
        assert r.depth == 40

    def test_outside_hull(self):
        assert membership(middle_thirds(), Q(2)).kind == OUT


class TestComboCover:
    def test_identity_case(self):
        c = cover(middle_thirds(), 2)
        got = combo_cover(c, cover(middle_thirds(), 1), 1, 0)
        assert got.intervals == c.intervals

    def test_depth0(self):
        a = cover(middle_thirds(), 0)
        got = combo_cover(a, a, Q(1, 2), Q(1, 2))
        assert got.intervals == ((Q(0), Q(1)),)

    def test_halved_self_sum_depth1(self):
        # oracle: enumerate the four pair-sums of {[0,1/6],[1/3,1/2]} with
        # itself: [0,1/3], [1/3,2/3] (twice), [2/3,1]; merged union [0,1]
        a = cover(middle_thirds(), 1)
        got = combo_cover(a, a, Q(1, 2), Q(1, 2))
        assert got.intervals == ((Q(0), Q(1)),)

    def test_against_bruteforce(self):
        rng = random.Random(21)
        s1, s2 = middle_thirds(), middle_cantor(Q(2, 5))
        for _ in range(12):
            d1, d2 = rng.randint(0, 3), rng.randint(0, 3)
            mu = Q(rng.randint(-4, 4), rng.randint(1, 4))
            nu = Q(rng.randint(-4, 4), rng.randint(1, 4))
            a, b = cover(s1, d1), cover(s2, d2)
            got = combo_cover(a, b, mu, nu)
            # brute-force oracle: precompute pair boxes, sample points
            boxes = [(min(mu * ia, mu * ib) + min(nu * ja, nu * jb),
                      max(mu * ia, mu * ib) + max(nu * ja, nu * jb))
                     for ia, ib in a.intervals for ja, jb in b.intervals]
            for _ in range(25):
                x = Q(rng.randint(-3000, 3000), 1000)
                in_union = any(lo <= x <= hi for lo, hi in boxes)
                assert any(lo <= x <= hi for lo, hi in got.intervals) \
                    == in_union

    def test_covers_interval_agrees_with_materialized(self):
        s = middle_thirds()
        a = cover(s, 4)
        mat = combo_cover(a, a, Q(1, 2), Q(1, 2))
        rng = random.Random(8)
        for _ in range(200):
            lo = Q(rng.randint(0, 999), 1000)
            hi = lo + Q(rng.randint(0, 50), 1000)
            want = any(mlo <= lo and hi <= mhi for mlo, mhi in mat.intervals)
            got = combo_covers_interval(a.intervals, a.intervals,
                                        Q(1, 2), Q(1, 2), lo, hi)
            assert got == want


class TestDifferenceInterval:
    def test_middle_thirds_full(self):
        assert difference_interval(middle_thirds(), 10) == 1

    def test_depth0(self):
        assert difference_interval(middle_thirds(), 0) == 1

    def test_thin_set_refused(self):
        with pytest.raises(HypothesisError):
            difference_interval(middle_cantor(Q(2, 5)), 4)


class TestNormalize:
    def test_round_trip(self):
        s = affine_image(middle_thirds(), Q(3), Q(-2))
        norm, back = normalize_to_unit(s)
        assert norm.hull == (Q(0), Q(1))
        lo, hi = norm.branch_images()[0]
        assert back(lo) == s.branch_images()[0][0]
