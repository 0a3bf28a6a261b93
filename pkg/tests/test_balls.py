import random
from fractions import Fraction as Q

import pytest

from thickset.balls import (
    CERTIFIED_ANALYTIC,
    FALSIFIED,
    FULL_BOUND,
    HALF_BOUND,
    Ball,
    ExplicitTree,
    BallSystem,
    gap_lemma_rd_check,
    grid_ifs_example,
    h_upper,
    hex_centers,
    hex_packing_example,
    r_uniformity_check,
    snapshot,
    subset_thickness,
    transform_system,
    validate_system,
    yavicoli_thickness,
)
from thickset.errors import InputError
from thickset.scalars import sqrt3

GAMMA = Q(99999, 100000)


class TestBallPredicates:
    def test_linf_containment(self):
        big = Ball((Q(0), Q(0)), Q(1), "linf")
        assert big.contains_ball(Ball((Q(1, 2), Q(1, 2)), Q(1, 2), "linf"))
        assert not big.contains_ball(Ball((Q(3, 4), Q(0)), Q(1, 2), "linf"))

    def test_l2_touching_not_disjoint(self):
        a = Ball((Q(0), Q(0)), Q(1))
        b = Ball((Q(2), Q(0)), Q(1))
        assert not a.disjoint_from(b)
        assert a.disjoint_from(Ball((Q(2), Q(1, 100)), Q(1)))

    def test_l2_exact_via_squares(self):
        # 3-4-5 triangle: distance 5 exactly
        a = Ball((Q(0), Q(0)), Q(2))
        b = Ball((Q(3), Q(4)), Q(3))
        assert not a.disjoint_from(b)
        assert a.disjoint_from(Ball((Q(3), Q(4)), Q(29, 10)))


class TestGridBuilder:
    def test_construction(self):
        sys = grid_ifs_example(10, Q(19, 200), Q(1, 100), 1)
        assert len(sys.children(())) == 100
        validate_system(sys, 2)

    def test_constraint_violation(self):
        with pytest.raises(InputError):
            grid_ifs_example(10, Q(1, 10), Q(1, 100), 1)

    def test_seed_changes_centers_not_radii(self):
        s1 = grid_ifs_example(10, Q(19, 200), Q(1, 100), 1)
        s2 = grid_ifs_example(10, Q(19, 200), Q(1, 100), 2)
        w = (3, 7)
        b1, b2 = s1.ball(w), s2.ball(w)
        assert b1.radius == b2.radius
        assert b1.center != b2.center
        validate_system(s2, 2)
        # first generation is the unperturbed grid in both
        assert s1.ball((3,)) == s2.ball((3,))

    def test_determinism(self):
        s1 = grid_ifs_example(10, Q(19, 200), Q(1, 100), 5)
        s2 = grid_ifs_example(10, Q(19, 200), Q(1, 100), 5)
        assert s1.ball((1, 2, 3)) == s2.ball((1, 2, 3))

    @pytest.mark.parametrize("seed", [0, 7, 91, 2024])
    def test_validity_across_seeds(self, seed):
        validate_system(grid_ifs_example(10, Q(19, 200), Q(1, 100), seed), 2)

    def test_deep_children_contained(self):
        sys = grid_ifs_example(10, Q(19, 200), Q(1, 100), 3)
        rng = random.Random(0)
        for _ in range(50):
            w = tuple(rng.randrange(100) for _ in range(3))
            parent = sys.ball(w[:-1])
            assert parent.contains_ball(sys.ball(w))


class TestHexBuilder:
    def test_centers_file(self):
        cs = hex_centers()
        assert len(cs) == 85
        rho = Q(12179, 100000)
        assert cs[0] == (-rho, Q(0)) and cs[1] == (rho, Q(0))
        for x, y in cs:
            assert x * x + y * y <= (1 - rho) ** 2

    def test_designated_disjoint_for_gamma_below_one(self):
        sys = hex_packing_example(GAMMA)
        validate_system(sys, 2)
        kids = sys.children(())
        for j in (0, 1):
            for i, other in enumerate(kids):
                if i != j:
                    assert kids[j].disjoint_from(other)

    def test_gamma_one_designated_touch(self):
        sys = hex_packing_example(1)
        kids = sys.children(())
        assert not kids[0].disjoint_from(kids[1])

    def test_gamma_range(self):
        with pytest.raises(InputError):
            hex_packing_example(0)


class TestHUpper:
    def test_grid_root_closed_form(self):
        sys = grid_ifs_example(10, Q(19, 200), Q(1, 100), 1)
        assert h_upper(sys, ()).lo == Q(2, 181)
        assert h_upper(sys, (3,)).lo == Q(2, 181) * Q(19, 200)

    def test_hex_root_gamma_one(self):
        sys = hex_packing_example(1)
        rho = Q(12179, 100000)
        # (2-sqrt3)/sqrt3 * rho/(1+rho)
        expect = (2 * sqrt3() - 3) / 3 * rho / (1 + rho)
        got = h_upper(sys, ())
        assert got.intersects(expect)

    def test_ball_filling_chain_is_zero(self):
        b = Ball((Q(0), Q(0)), Q(1))
        tree = ExplicitTree({(): b, (0,): b})
        sys = BallSystem(b, tree)
        assert h_upper(sys, ()).hi == 0

    def test_dangling_node_rejected(self):
        b = Ball((Q(0), Q(0)), Q(1))
        small = Ball((Q(0), Q(0)), Q(1, 4))
        tree = ExplicitTree({(): b, (0,): small, (1,): small,
                             (0, 0): Ball((Q(0), Q(0)), Q(1, 16))})
        sys = BallSystem(b, tree)
        with pytest.raises(InputError):
            validate_system(sys, depth=2)  # word (1,) dangles


class TestYavicoliThickness:
    def test_grid_exact(self):
        sys = grid_ifs_example(10, Q(19, 200), Q(1, 100), 1)
        rep = yavicoli_thickness(sys)
        assert rep.lower_bound.lo == Q(3439, 400)  # = 8.5975 exactly
        assert rep.tail_certificate == "self_similar_closed_form"

    def test_hex_gamma_one(self):
        rep = yavicoli_thickness(hex_packing_example(1))
        assert abs(rep.lower_bound.mid - Q("7.25137")) < Q(1, 1000)

    def test_hex_gamma_small(self):
        rep = yavicoli_thickness(hex_packing_example(GAMMA))
        assert abs(rep.lower_bound.mid - Q("7.25077")) < Q(1, 1000)

    def test_grid_threshold_chain(self):
        # certified inequality: grid thickness clears the progression
        # threshold 2/(1 - 4 rho - 2 d) = 10/3
        rho, d = Q(19, 200), Q(1, 100)
        assert rho * (1 - rho) / d >= 2 / (1 - 4 * rho - 2 * d)
        assert 2 / (1 - 4 * rho - 2 * d) == Q(10, 3)

    def test_scale_translate_invariance_exact(self):
        base = snapshot(grid_ifs_example(4, Q(1, 8), Q(1, 4), 2), 2)
        t0 = yavicoli_thickness(base).lower_bound.lo
        rng = random.Random(1)
        for _ in range(5):
            sc = Q(rng.randint(1, 5), rng.randint(1, 5))
            sh = (Q(rng.randint(-9, 9), 3), Q(rng.randint(-9, 9), 3))
            moved = transform_system(base, scale=sc, shift=sh)
            assert yavicoli_thickness(moved).lower_bound.lo == t0

    def test_rotation_invariance_l2(self):
        base = snapshot(hex_packing_example(1), 1)
        t0 = yavicoli_thickness(base).lower_bound.lo
        rot = transform_system(base, rotation=(Q(3, 5), Q(4, 5)))
        t1 = yavicoli_thickness(rot).lower_bound.lo
        # the farthest-point grid is axis-aligned, so the bounds agree
        # only up to the mesh slack
        assert abs(t1 - t0) <= t0 * Q(1, 4)


class TestRUniformity:
    def test_grid_analytic(self):
        sys = grid_ifs_example(10, Q(19, 200), Q(1, 100), 1)
        res = r_uniformity_check(sys, Q(1, 5))
        assert res.status == CERTIFIED_ANALYTIC

    def test_hex_analytic(self):
        res = r_uniformity_check(hex_packing_example(1), Q(26243, 100000))
        assert res.status == CERTIFIED_ANALYTIC

    def test_tiny_r_falsified(self):
        sys = grid_ifs_example(10, Q(19, 200), Q(1, 100), 1)
        res = r_uniformity_check(sys, Q(19, 2000))
        assert res.status == FALSIFIED
        assert res.counterexample is not None


class TestSubsetThickness:
    def test_grid_full_bound(self):
        # child-level slack 19/18100 is below the sibling distance 1/100,
        # so the full parent bound carries over
        sys = grid_ifs_example(10, Q(19, 200), Q(1, 100), 1)
        rep = subset_thickness(sys, 0)
        assert h_upper(sys, (0,)).hi == Q(19, 18100)
        assert rep.kind == FULL_BOUND
        assert rep.bound.lo == Q(3439, 400)

    def test_hex_half_bound(self):
        # designated child nearly touches its siblings, so the covering
        # slack exceeds the sibling gap and only the halved bound holds
        sys = hex_packing_example(GAMMA)
        rep = subset_thickness(sys, 0)
        assert rep.kind == HALF_BOUND
        assert rep.bound.lo >= (Q("7.25077") - Q(1, 1000)) / 2

    def test_overlapping_child_rejected(self):
        sys = hex_packing_example(1)
        with pytest.raises(InputError):
            subset_thickness(sys, 0)

    def test_bound_at_least_half_for_builders(self):
        for sys in (grid_ifs_example(10, Q(19, 200), Q(1, 100), 1),
                    hex_packing_example(GAMMA)):
            tau = yavicoli_thickness(sys).lower_bound
            rep = subset_thickness(sys, 0)
            assert rep.bound.lo >= tau.lo / 2


class TestSampledSubsetSlack:
    def test_designated_child_points_near_subset(self):
        # sampled points x in the designated child ball: the distance to
        # the subset cover is within 2*h_upper(root) plus the cover slack
        sys = hex_packing_example(GAMMA)
        child_word = (0,)
        child = sys.ball(child_word)
        depth = 3

        def greedy_near_ball(p):
            # descend toward p; the reached ball's gap upper-bounds the
            # distance to the subtree cover
            w = child_word
            for _ in range(depth - 1):
                kids = sys.children(w)
                best = min(range(len(kids)),
                           key=lambda i: sum((a - b) ** 2 for a, b in
                                             zip(p, kids[i].center)))
                w = w + (best,)
            return sys.ball(w)

        rng = random.Random(7)
        checked = 0
        while checked < 1000:
            dx = 2 * Q(rng.randint(0, 2**16), 2**16) - 1
            dy = 2 * Q(rng.randint(0, 2**16), 2**16) - 1
            p = (child.center[0] + child.radius * dx,
                 child.center[1] + child.radius * dy)
            if not child.contains_point(p):
                continue
            b = greedy_near_ball(p)
            bound = 2 * h_upper(sys, ()).hi + b.radius
            best_sq = sum((a - c) ** 2 for a, c in zip(p, b.center))
            # sqrt(best_sq) <= bound  <=>  best_sq <= bound^2
            assert best_sq <= bound * bound
            checked += 1


class TestGapLemmaRd:
    def test_hex_pair_holds(self):
        sys = hex_packing_example(1)
        rep = gap_lemma_rd_check(sys, sys, Q(26243, 100000))
        assert rep.verdict == "hypotheses_hold"
        assert rep.thickness_product_ok and rep.root_meets_shrunk_ball
        # oracle arithmetic: 7.25137^2 = 52.58 >= 1/(1-2r)^2 = 4.43
        assert rep.details["thickness_product"].lo > 50
        assert rep.details["thickness_required"].hi < 5

    def test_disjoint_roots_fail(self):
        sys = hex_packing_example(1)
        moved = snapshot(sys, 1)
        moved = transform_system(moved, shift=(Q(10), Q(0)))
        rep = gap_lemma_rd_check(moved, sys, Q(1, 5))
        assert rep.verdict == "fail"
        assert rep.root_meets_shrunk_ball is False

    def test_tiny_first_root_fails_ratio(self):
        sys = hex_packing_example(1)
        small = transform_system(snapshot(sys, 1), scale=Q(1, 100))
        rep = gap_lemma_rd_check(small, sys, Q(1, 5))
        assert rep.radius_ratio_ok is False
        assert rep.verdict == "fail"

    def test_r_range(self):
        sys = hex_packing_example(1)
        with pytest.raises(InputError):
            gap_lemma_rd_check(sys, sys, Q(1, 2))
