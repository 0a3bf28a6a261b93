"""Triangles with vertices in Cartesian squares C x C of thick linear
sets, plus triangle normalization to the (height, base-split) form.

A triangle is realized in C x C by composing two one-dimensional
certified searches: a convex-combination witness supplies the base, and
a difference-set hit supplies the pair of heights.  All coordinates come
out as exact rationals or shrinking enclosures.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .cantor import (
    IfsSet1D,
    difference_interval,
    interval_in_cover,
    normalize_to_unit,
    require_thickness_at_least_one,
)
from .errors import Indeterminate, InputError
from .patterns1d import find_convex_combo
from .scalars import Interval, Q, interval_sqrt, sqrt3, to_q

Coord = Union[Q, int, str, Interval]


def _iv(x: Coord) -> Interval:
    return Interval.coerce(to_q(x)) if not isinstance(x, Interval) else x


@dataclass(frozen=True)
class Triangle:
    """Three points in the plane; coordinates exact rationals or
    interval enclosures (for irrational placements)."""

    vertices: tuple[tuple[Interval, Interval], ...]

    @staticmethod
    def make(points: Sequence[Sequence[Coord]]) -> "Triangle":
        if len(points) != 3:
            raise InputError("a triangle needs exactly three vertices")
        return Triangle(tuple((_iv(p[0]), _iv(p[1])) for p in points))

    def is_exact(self) -> bool:
        return all(x.is_point() and y.is_point() for x, y in self.vertices)


@dataclass(frozen=True)
class NormalizedTriangle:
    """Similarity class data: longest side scaled to 1, apex height
    ``alpha``, altitude foot splitting the base into ``lam`` and
    1 - lam with lam <= 1/2.

    ``alpha_sq``/``lam_exact`` carry exact rational values when the
    input data allows them (rational vertices, or explicitly provided),
    which keeps downstream scale factors exact.
    """

    alpha: Interval
    lam: Interval
    alpha_sq: Optional[Q] = None
    lam_exact: Optional[Q] = None
    degenerate: bool = False

    def region_ok(self, slack: Q = Q(1, 2**60)) -> bool:
        """Certified check of 0 < alpha, 0 <= lam <= 1/2, and
        alpha^2 + (1-lam)^2 <= 1, with tolerance for enclosure width at
        the boundary (the equilateral class sits exactly on it)."""
        if self.degenerate:
            return False
        a2 = Interval.point(self.alpha_sq) if self.alpha_sq is not None \
            else self.alpha.square()
        reach = a2 + (1 - self.lam).square()
        return (self.alpha.hi > 0 and self.lam.lo >= -slack
                and self.lam.hi <= Q(1, 2) + slack
                and reach.lo <= 1 + slack)


def equilateral(bits: int = 128) -> NormalizedTriangle:
    """The equilateral similarity class: lam = 1/2, alpha = sqrt(3)/2."""
    return NormalizedTriangle(alpha=sqrt3(bits) / 2, lam=Interval.point(Q(1, 2)),
                              alpha_sq=Q(3, 4), lam_exact=Q(1, 2))


def equilateral_triangle(bits: int = 128) -> Triangle:
    return Triangle.make([(Q(0), Q(0)), (Q(1), Q(0)),
                          (Q(1, 2), sqrt3(bits) / 2)])


def _sq_dist(p, q) -> Interval:
    return (p[0] - q[0]).square() + (p[1] - q[1]).square()


def _cross(p0, p1, p2) -> Interval:
    return ((p1[0] - p0[0]) * (p2[1] - p0[1])
            - (p2[0] - p0[0]) * (p1[1] - p0[1]))


def normalize_triangle(t: Triangle) -> NormalizedTriangle:
    """Similarity invariants of a triangle: scale the longest side to 1,
    measure the apex height and the altitude-foot split.

    For rational vertices both invariants are exact rationals (the height
    over the base equals twice the area divided by the squared base, no
    square root involved).  Collinear input returns a degenerate record
    with alpha = 0 and lam the interior split ratio.
    """
    v = t.vertices
    for i in range(3):
        for j in range(i + 1, 3):
            d = _sq_dist(v[i], v[j])
            if d.hi == 0:
                raise InputError("triangle vertices must be pairwise "
                                 "distinct")
            if d.lo <= 0:
                raise Indeterminate("vertex separation not certified at "
                                    "this precision")

    cross = _cross(*v)
    sides = {(0, 1): _sq_dist(v[0], v[1]),
             (0, 2): _sq_dist(v[0], v[2]),
             (1, 2): _sq_dist(v[1], v[2])}

    if cross.lo <= 0 <= cross.hi:
        if not (cross.is_point() and cross.lo == 0 and t.is_exact()):
            raise Indeterminate("collinearity not decided at this "
                                "precision")
        # exact degenerate case: order the points along the line
        (i, j), _ = max(sides.items(), key=lambda kv: kv[1].lo)
        k = 3 - i - j
        dik, djk = sides[(min(i, k), max(i, k))], sides[(min(j, k), max(j, k))]
        dij = sides[(i, j)]
        # ratio of the split, from squared distances (all exact points)
        lam_sq = dik.lo / dij.lo
        lam = _exact_sqrt_ratio(lam_sq)
        if lam > Q(1, 2):
            lam = 1 - lam
        return NormalizedTriangle(alpha=Interval.point(Q(0)),
                                  lam=Interval.point(lam),
                                  alpha_sq=Q(0), lam_exact=lam,
                                  degenerate=True)

    # base = longest side (certified or tie; ties are harmless since the
    # invariants agree for congruent candidates)
    (i, j), base_sq = max(sides.items(),
                          key=lambda kv: (kv[1].hi + kv[1].lo))
    for key, val in sides.items():
        if key != (i, j) and val.certainly_gt(base_sq):
            (i, j), base_sq = key, val
    k = 3 - i - j
    base_vec = (v[j][0] - v[i][0], v[j][1] - v[i][1])
    apex_vec = (v[k][0] - v[i][0], v[k][1] - v[i][1])
    dot = base_vec[0] * apex_vec[0] + base_vec[1] * apex_vec[1]
    lam_iv = dot / base_sq
    alpha_iv = abs(_cross(v[i], v[j], v[k])) / base_sq

    alpha_sq = None
    lam_exact = None
    if t.is_exact():
        alpha_sq = alpha_iv.lo * alpha_iv.lo
        lam_exact = lam_iv.lo

    if lam_iv.certainly_gt(Interval.point(Q(1, 2))):
        lam_iv = 1 - lam_iv
        lam_exact = None if lam_exact is None else 1 - lam_exact
    elif not lam_iv.certainly_le(Interval.point(Q(1, 2))):
        # straddles 1/2: fold the enclosure through the reflection
        lam_iv = Interval(min(lam_iv.lo, 1 - lam_iv.hi), Q(1, 2))
        lam_exact = None if lam_exact is None else min(lam_exact,
                                                       1 - lam_exact)
    return NormalizedTriangle(alpha=alpha_iv, lam=lam_iv,
                              alpha_sq=alpha_sq, lam_exact=lam_exact)


def _exact_sqrt_ratio(q: Q) -> Q:
    """Exact square root of a rational that must be a perfect square
    (used for collinear splits, where it always is after reduction)."""
    from math import isqrt

    n, d = q.numerator, q.denominator
    rn, rd = isqrt(n), isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Q(rn, rd)
    # fall back to a tight enclosure midpoint; only reachable for
    # irrational collinear splits, which exact inputs cannot produce
    iv = interval_sqrt(Interval.point(q), 64)
    return iv.mid


# -- difference hits -----------------------------------------------------


def difference_hit(s: IfsSet1D, delta, depth: int = 20,
                   check_bound: Optional[Q] = None) -> tuple[Interval, Interval]:
    """Enclosures (u, v) with u, v in the set and v - u = delta, for any
    delta in [0, L] where [0, L] lies inside the difference set.

    ``delta`` may be an enclosure; the descent then certifies its pair
    choices for every value delta* in the enclosure simultaneously, which
    requires the enclosure to be narrow relative to the final cover width.
    """
    div = Interval.coerce(delta)
    if div.lo < 0:
        raise InputError("delta must be nonnegative")
    norm, back = normalize_to_unit(s)
    scale = back.scale  # positive hull width
    div_n = Interval(div.lo / scale, div.hi / scale)
    bound = check_bound if check_bound is not None \
        else difference_interval(s, min(depth, 10))
    if div.hi > bound:
        raise InputError("delta exceeds the certified difference bound")

    def hull_of(word) -> tuple[Q, Q]:
        return norm.word_interval(word)

    def certified(xw, yw) -> bool:
        xlo, xhi = hull_of(xw)
        ylo, yhi = hull_of(yw)
        # universal hull intersection: for every delta* in the enclosure
        if xlo > yhi - div_n.hi or ylo - div_n.lo > xhi:
            return False
        # Y-piece inside a gap of X for some delta* is forbidden: the
        # piece [ylo - d, yhi - d] sits in gap G exactly when d lies in
        # the open window (yhi - G.hi, ylo - G.lo)
        if _translated_in_gap(norm, xw, ylo, yhi, div_n):
            return False
        # X-piece inside a translated gap of Y likewise
        if _in_translated_gap(norm, yw, xlo, xhi, div_n):
            return False
        return True

    xw: tuple[int, ...] = ()
    yw: tuple[int, ...] = ()
    if not certified(xw, yw):
        raise Indeterminate("difference refinement could not be certified "
                            "at the root")
    nb = len(norm.branches)
    for _ in range(depth):
        found = None
        for ci in range(nb):
            for cj in range(nb):
                if certified(xw + (ci,), yw + (cj,)):
                    found = (xw + (ci,), yw + (cj,))
                    break
            if found:
                break
        if found is None:
            raise Indeterminate(
                "difference refinement stalled before the requested "
                "depth; the difference enclosure straddles a chain "
                "transition (narrow it, e.g. by pinning an exact pair)")
        xw, yw = found
    ulo, uhi = hull_of(xw)
    vlo, vhi = hull_of(yw)
    return (Interval(back(ulo), back(uhi)), Interval(back(vlo), back(vhi)))


def _gaps_near(s: IfsSet1D, word, lo: Q, hi: Q, min_len: Q):
    """Gaps of the subtree at ``word`` with length >= min_len that could
    interact with positions in [lo, hi] (finitely many by geometric
    decay)."""
    out = []
    stack = [word]
    while stack:
        w = stack.pop()
        wlo, whi = s.word_interval(w)
        if whi < lo or hi < wlo:
            continue
        m = s.word_map(w)
        for g0, g1 in s.top_gaps():
            glo, ghi = m(g0), m(g1)
            if ghi - glo >= min_len:
                out.append((glo, ghi))
        # descend while child gaps can still be long enough
        for i, b in enumerate(s.branches):
            child = w + (i,)
            clo, chi = s.word_interval(child)
            if (chi - clo) >= min_len:
                stack.append(child)
    return out


def _translated_in_gap(s: IfsSet1D, xw, ylo: Q, yhi: Q,
                       div: Interval) -> bool:
    """Whether [ylo - d, yhi - d] sits inside a gap of the subtree at xw
    for some d in the enclosure."""
    width = yhi - ylo
    span_lo, span_hi = ylo - div.hi, yhi - div.lo
    for glo, ghi in _gaps_near(s, xw, span_lo, span_hi, width):
        w_lo, w_hi = yhi - ghi, ylo - glo  # open window of bad d values
        if div.hi > w_lo and div.lo < w_hi:
            return True
    return False


def _in_translated_gap(s: IfsSet1D, yw, xlo: Q, xhi: Q,
                       div: Interval) -> bool:
    """Whether [xlo, xhi] sits inside a gap-minus-d of the subtree at yw
    for some d in the enclosure."""
    width = xhi - xlo
    span_lo, span_hi = xlo + div.lo, xhi + div.hi
    for glo, ghi in _gaps_near(s, yw, span_lo, span_hi, width):
        w_lo, w_hi = glo - xlo, ghi - xhi  # open window of bad d values
        if div.hi > w_lo and div.lo < w_hi:
            return True
    return False


# -- triangles in the product ---------------------------------------------


@dataclass(frozen=True)
class ProductWitness:
    """Three points of C x C forming the requested similarity class, as
    coordinate enclosures with a side-ratio deviation bound."""

    base_left: tuple[Interval, Interval]
    base_right: tuple[Interval, Interval]
    apex: tuple[Interval, Interval]
    side_lengths: tuple[Interval, Interval, Interval]
    ratio_deviation: Q
    depth_used: int
    collinear: bool = False

    @property
    def vertices(self):
        return (self.base_left, self.base_right, self.apex)


def find_triangle_in_product(s: IfsSet1D, t: Union[Triangle,
                                                   NormalizedTriangle],
                             depth: int = 40,
                             bits: int = 192) -> ProductWitness:
    """Vertices of a similar copy of ``t`` inside C x C for a set of
    certified thickness >= 1.

    Pipeline: a convex-combination witness at split ``lam`` provides the
    base pair (a, b) and the foot point, a difference hit at
    span * alpha provides the two heights, and the apex is assembled from
    the foot and the upper height.  Collinear triangles route through the
    one-dimensional search directly.
    """
    norm = t if isinstance(t, NormalizedTriangle) else normalize_triangle(t)
    require_thickness_at_least_one(s)

    if norm.degenerate:
        if norm.lam_exact is None:
            raise Indeterminate("collinear split ratio not exact")
        w = find_convex_combo(s, norm.lam_exact, depth)
        e = Interval.point(s.hull[0])  # hull endpoints always belong
        sides = _triangle_sides((w.a.enclosure, e), (w.b.enclosure, e),
                                (w.m.enclosure, e))
        return ProductWitness((w.a.enclosure, e), (w.b.enclosure, e),
                              (w.m.enclosure, e), sides,
                              ratio_deviation=w.residual,
                              depth_used=depth, collinear=True)

    if not norm.region_ok():
        raise InputError("triangle data outside the admissible "
                         "normalized region")
    if norm.lam_exact is None:
        raise Indeterminate("base split ratio must be exact for the "
                            "product search")
    lam = norm.lam_exact
    if lam == 0:
        raise InputError("degenerate split")
    alpha = norm.alpha

    hull_w = s.hull[1] - s.hull[0]
    ldepth = min(depth, 10)
    diff_bound = difference_interval(s, ldepth)

    # scale cap: the base span must keep both the base and the height
    # within the certified difference segment
    alpha_hi = alpha.hi
    cap = diff_bound / max(alpha_hi, 1)
    cap = min(cap, diff_bound)
    c_dyadic = Q(1)
    while c_dyadic * hull_w > cap:
        c_dyadic /= 2

    # run the combination search inside a subtree no wider than the cap,
    # so the witness span obeys it automatically
    word: tuple[int, ...] = ()
    while True:
        wlo, whi = s.word_interval(word)
        if whi - wlo <= c_dyadic * hull_w:
            break
        word = word + (0,)
    combo_depth = depth + 8
    w = find_convex_combo(s, lam, combo_depth)
    m = s.word_map(word)

    def push(iv: Interval) -> Interval:
        lo, hi = m(iv.lo), m(iv.hi)
        return Interval(min(lo, hi), max(lo, hi))

    if w.a_exact is not None and w.b_exact is not None:
        # exact base pair: the span is a point and the height enclosure
        # is as tight as the height data itself
        a_iv = Interval.point(m(w.a_exact))
        b_iv = Interval.point(m(w.b_exact))
        m_iv = push(w.m.enclosure)
    else:
        a_iv, m_iv, b_iv = push(w.a.enclosure), push(w.m.enclosure), \
            push(w.b.enclosure)
    span = b_iv - a_iv
    delta = span * alpha
    u_iv, v_iv = difference_hit(s, delta, depth, check_bound=diff_bound)

    base_left = (a_iv, u_iv)
    base_right = (b_iv, u_iv)
    apex = (m_iv, v_iv)
    sides = _triangle_sides(base_left, base_right, apex, bits)

    # expected side ratios for the similarity class
    sf_sq = (norm.alpha_sq + lam * lam) if norm.alpha_sq is not None \
        else (alpha.square() + Interval.point(lam).square())
    sg_sq = (norm.alpha_sq + (1 - lam) ** 2) if norm.alpha_sq is not None \
        else (alpha.square() + Interval.point(1 - lam).square())
    sf = interval_sqrt(Interval.coerce(sf_sq), bits)
    sg = interval_sqrt(Interval.coerce(sg_sq), bits)
    base_len, left_len, right_len = sides
    dev = Q(0)
    for measured, expected in ((left_len / base_len, sf),
                               (right_len / base_len, sg)):
        # largest possible |measured* - expected*| over both enclosures
        d_hi = max(abs(measured.hi - expected.lo),
                   abs(expected.hi - measured.lo))
        dev = max(dev, d_hi)
    return ProductWitness(base_left, base_right, apex, sides,
                          ratio_deviation=dev, depth_used=depth)


def _triangle_sides(p0, p1, p2, bits: int = 192):
    d01 = interval_sqrt(_sq_dist(p0, p1), bits)
    d02 = interval_sqrt(_sq_dist(p0, p2), bits)
    d12 = interval_sqrt(_sq_dist(p1, p2), bits)
    return (d01, d02, d12)


def product_witness_in_cover(s: IfsSet1D, w: ProductWitness,
                             depth: int) -> bool:
    """Machine check: every coordinate enclosure of the witness meets the
    depth-d cover of the set."""
    for (x, y) in w.vertices:
        for coord in (x, y):
            if not interval_in_cover(s, coord.lo, coord.hi, depth):
                return False
    return True
