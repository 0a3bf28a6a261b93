import random
from fractions import Fraction as Q

import pytest

from thickset.cantor import middle_cantor, middle_thirds
from thickset.errors import HypothesisError, InputError
from thickset.product import (
    Triangle,
    difference_hit,
    equilateral,
    equilateral_triangle,
    find_triangle_in_product,
    normalize_triangle,
    product_witness_in_cover,
)
from thickset.scalars import Interval, interval_sqrt, sqrt3


class TestNormalizeTriangle:
    def test_equilateral_from_vertices(self):
        n = normalize_triangle(equilateral_triangle())
        assert n.lam.contains(Q(1, 2))
        assert n.alpha.intersects(sqrt3() / 2)
        assert n.region_ok()

    def test_right_isoceles(self):
        n = normalize_triangle(Triangle.make([(0, 0), (1, 0), (0, 1)]))
        # hypotenuse is the base; altitude foot splits it in half,
        # height is half the hypotenuse
        assert n.lam_exact == Q(1, 2)
        assert n.alpha_sq == Q(1, 4)
        assert n.region_ok()

    def test_collinear(self):
        n = normalize_triangle(Triangle.make([(0, 0), (1, 0), (2, 0)]))
        assert n.degenerate
        assert n.alpha.lo == 0
        assert n.lam_exact == Q(1, 2)

    def test_repeated_vertices_rejected(self):
        with pytest.raises(InputError):
            normalize_triangle(Triangle.make([(0, 0), (0, 0), (1, 1)]))

    def test_similarity_invariance(self):
        rng = random.Random(17)
        base = Triangle.make([(0, 0), (1, 0), (Q(3, 10), Q(2, 5))])
        n0 = normalize_triangle(base)
        # rational rotations from Pythagorean triples keep everything exact
        triples = [(Q(3, 5), Q(4, 5)), (Q(5, 13), Q(12, 13)),
                   (Q(8, 17), Q(15, 17)), (Q(1), Q(0))]
        for _ in range(80):
            c, s = triples[rng.randrange(len(triples))]
            if rng.random() < 0.5:
                s = -s
            scale = Q(rng.randint(1, 9), rng.randint(1, 9))
            tx = Q(rng.randint(-20, 20), rng.randint(1, 10))
            ty = Q(rng.randint(-20, 20), rng.randint(1, 10))
            pts = []
            for x, y in [(Q(0), Q(0)), (Q(1), Q(0)), (Q(3, 10), Q(2, 5))]:
                rx = scale * (c * x - s * y) + tx
                ry = scale * (s * x + c * y) + ty
                pts.append((rx, ry))
            n = normalize_triangle(Triangle.make(pts))
            assert n.lam_exact == n0.lam_exact
            assert n.alpha_sq == n0.alpha_sq

    def test_region_membership_random(self):
        rng = random.Random(19)
        checked = 0
        while checked < 200:
            pts = [(Q(rng.randint(-50, 50), 10), Q(rng.randint(-50, 50), 10))
                   for _ in range(3)]
            try:
                n = normalize_triangle(Triangle.make(pts))
            except InputError:
                continue
            if n.degenerate:
                continue
            a2 = n.alpha_sq
            lam = n.lam_exact
            assert a2 + (1 - lam) ** 2 <= 1 + Q(1, 2**60)
            assert 0 <= lam <= Q(1, 2)
            checked += 1


class TestDifferenceHit:
    def test_delta_one(self):
        u, v = difference_hit(middle_thirds(), Q(1), depth=10)
        assert u.contains(0) and v.contains(1)
        assert u.width <= Q(3) ** -10

    def test_delta_third(self):
        u, v = difference_hit(middle_thirds(), Q(1, 3), depth=12)
        assert u.lo == 0  # leftmost admissible pair starts at the origin
        assert v.contains(u.lo + Q(1, 3))

    def test_delta_irrational(self):
        delta = interval_sqrt(Interval.point(Q(1, 3)), 128)  # sqrt(3)/3
        u, v = difference_hit(middle_thirds(), delta, depth=40)
        assert u.width <= Q(3) ** -40
        assert v.width <= Q(3) ** -40
        # v - u must overlap the requested difference
        assert (v - u).intersects(delta)

    def test_delta_too_large(self):
        with pytest.raises(InputError):
            difference_hit(middle_thirds(), Q(3, 2), depth=6)


class TestFindTriangleInProduct:
    def test_equilateral_deep(self):
        s = middle_thirds()
        w = find_triangle_in_product(s, equilateral(), depth=40)
        assert product_witness_in_cover(s, w, 40)
        d01, d02, d12 = w.side_lengths
        # interval-certified equality of all three sides within 1e-9
        for x, y in ((d01, d02), (d01, d12), (d02, d12)):
            gap = max(abs(x.hi - y.lo), abs(y.hi - x.lo))
            assert gap <= Q(1, 10**9)
        assert w.ratio_deviation <= Q(1, 10**9)

    def test_collinear_routes_to_line_search(self):
        s = middle_thirds()
        t = Triangle.make([(0, 0), (Q(1, 2), 0), (1, 0)])
        w = find_triangle_in_product(s, t, depth=12)
        assert w.collinear
        ys = {w.base_left[1].lo, w.base_right[1].lo, w.apex[1].lo}
        assert ys == {Q(0)}

    def test_thin_set_rejected(self):
        with pytest.raises(HypothesisError):
            find_triangle_in_product(middle_cantor(Q(2, 5)), equilateral(),
                                     depth=8)

    def test_right_isoceles(self):
        s = middle_thirds()
        t = Triangle.make([(0, 0), (1, 0), (0, 1)])
        w = find_triangle_in_product(s, t, depth=24)
        assert product_witness_in_cover(s, w, 24)
        # expected ratios: both slanted sides are sqrt(1/2) of the base
        assert w.ratio_deviation <= Q(1, 10**6)

    def test_scalene_pins_periodic_pair(self):
        # the base split 3/10 forces the pair (1/12, 11/12), which is
        # eventually periodic rather than a word endpoint; the pipeline
        # must still pin it exactly and place the apex at (1/3, 1/3)
        s = middle_thirds()
        t = Triangle.make([(0, 0), (1, 0), (Q(3, 10), Q(2, 5))])
        w = find_triangle_in_product(s, t, depth=28)
        assert product_witness_in_cover(s, w, 28)
        assert w.ratio_deviation <= Q(1, 10**9)
        assert w.base_left[0].lo == w.base_left[0].hi == Q(1, 12)
        assert w.base_right[0].lo == w.base_right[0].hi == Q(11, 12)
        # exact foot, height enclosures pinned around the exact config
        assert w.apex[0] == Interval.point(Q(1, 3))
        assert w.apex[1].contains(Q(1, 3))
        assert w.base_left[1].contains(Q(0))
        assert w.apex[1].width <= Q(3) ** -28
