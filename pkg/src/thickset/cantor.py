"""Self-similar compact subsets of the line presented by iterated function
systems, with exact covers, gap enumeration, Newhouse thickness, membership
queries, and Minkowski combinations of covers.

All geometry is exact: hull endpoints, branch maps, cover intervals, and
gap endpoints are rationals, so thickness values of stabilized systems are
exact rationals rather than approximations.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Optional

from .errors import HypothesisError, Indeterminate, InputError
from .scalars import Q, to_q


@dataclass(frozen=True, slots=True)
class AffineMap:
    """x -> scale*x + offset with scale in (0, 1)."""

    scale: Q
    offset: Q

    def __call__(self, x: Q) -> Q:
        return self.scale * x + self.offset

    def apply_interval(self, lo: Q, hi: Q) -> tuple[Q, Q]:
        return self.scale * lo + self.offset, self.scale * hi + self.offset

    def compose(self, inner: "AffineMap") -> "AffineMap":
        # self after inner: x -> self(inner(x))
        return AffineMap(self.scale * inner.scale,
                         self.scale * inner.offset + self.offset)


IDENTITY = AffineMap(Q(1), Q(0))


@dataclass(frozen=True)
class IfsSet1D:
    """Attractor of finitely many orientation-preserving contractions on a
    hull interval.

    Branch images are pairwise disjoint with positive gaps between
    consecutive images, the leftmost image shares the hull's left endpoint
    and the rightmost shares the right endpoint, so the convex hull of the
    attractor is exactly ``hull``.
    """

    hull: tuple[Q, Q]
    branches: tuple[AffineMap, ...]

    def __post_init__(self):
        lo, hi = self.hull
        if lo >= hi:
            raise InputError("hull must have positive length")
        if not self.branches:
            raise InputError("at least one branch required")
        images = []
        for b in self.branches:
            if not (0 < b.scale < 1):
                raise InputError(f"branch scale {b.scale} outside (0, 1)")
            ilo, ihi = b.apply_interval(lo, hi)
            if ilo < lo or ihi > hi:
                raise InputError("branch image escapes the hull")
            images.append((ilo, ihi))
        for (a0, a1), (b0, b1) in zip(images, images[1:]):
            if a1 >= b0:
                raise InputError("branch images must be disjoint and "
                                 "ordered left to right")
        if images[0][0] != lo or images[-1][1] != hi:
            raise InputError("extreme branch images must share the hull "
                             "endpoints")

    # -- basic structure ------------------------------------------------

    @property
    def width(self) -> Q:
        return self.hull[1] - self.hull[0]

    def branch_images(self) -> list[tuple[Q, Q]]:
        lo, hi = self.hull
        return [b.apply_interval(lo, hi) for b in self.branches]

    def top_gaps(self) -> list[tuple[Q, Q]]:
        imgs = self.branch_images()
        return [(a1, b0) for (a0, a1), (b0, b1) in zip(imgs, imgs[1:])]

    def word_map(self, word: tuple[int, ...]) -> AffineMap:
        m = IDENTITY
        for i in word:
            m = m.compose(self.branches[i])
        return m

    def word_interval(self, word: tuple[int, ...]) -> tuple[Q, Q]:
        return self.word_map(word).apply_interval(*self.hull)


# -- builders ----------------------------------------------------------


def middle_cantor(epsilon) -> IfsSet1D:
    """Two branches on [0, 1] with scale (1-eps)/2, leaving a centred open
    gap of length eps."""
    eps = to_q(epsilon)
    if not (0 < eps < 1):
        raise InputError("epsilon must lie in (0, 1)")
    s = (1 - eps) / 2
    return IfsSet1D((Q(0), Q(1)),
                    (AffineMap(s, Q(0)), AffineMap(s, (1 + eps) / 2)))


def middle_thirds() -> IfsSet1D:
    return middle_cantor(Q(1, 3))


def off_center_cantor(a) -> IfsSet1D:
    """Remove (a, 2a) from [0, 1] and iterate self-similarly: the left
    piece [0, a] carries scale a and the right piece [2a, 1] carries scale
    1 - 2a.  Requires 0 < a < 1/3 so the left piece is the shorter one."""
    av = to_q(a)
    if not (0 < av < Q(1, 3)):
        raise InputError("a must lie in (0, 1/3)")
    return IfsSet1D((Q(0), Q(1)),
                    (AffineMap(av, Q(0)), AffineMap(1 - 2 * av, 2 * av)))


def ifs_from_branches(hull_lo, hull_hi, scale_offset_pairs) -> IfsSet1D:
    branches = tuple(AffineMap(to_q(s), to_q(o)) for s, o in scale_offset_pairs)
    return IfsSet1D((to_q(hull_lo), to_q(hull_hi)), branches)


def affine_image(s: IfsSet1D, a, b) -> IfsSet1D:
    """The set a*C + b as an IFS on the transformed hull (a nonzero).

    Branch maps conjugate to keep positive scales; a negative ``a``
    reverses the branch order.
    """
    av, bv = to_q(a), to_q(b)
    if av == 0:
        raise InputError("affine scale must be nonzero")
    lo, hi = s.hull
    pts = sorted((av * lo + bv, av * hi + bv))
    branches = [AffineMap(m.scale, av * m.offset + bv * (1 - m.scale))
                for m in s.branches]
    if av < 0:
        branches.reverse()
    return IfsSet1D((pts[0], pts[1]), tuple(branches))


def normalize_to_unit(s: IfsSet1D) -> tuple[IfsSet1D, AffineMap]:
    """Rescale so the hull is [0, 1]; returns the map sending the
    normalized set back onto the original one."""
    lo, hi = s.hull
    w = hi - lo
    back = AffineMap(w, lo)  # not a contraction in general; used as a map only
    normalized = affine_image(s, 1 / w, -lo / w)
    return normalized, back


# -- covers ------------------------------------------------------------


@dataclass(frozen=True)
class Cover1D:
    """Finite-depth outer approximation: the sorted disjoint union of all
    depth-n branch-word images."""

    depth: int
    intervals: tuple[tuple[Q, Q], ...]


def cover(s: IfsSet1D, depth: int) -> Cover1D:
    if depth < 0:
        raise InputError("depth must be nonnegative")
    lo, hi = s.hull
    out: list[tuple[Q, Q]] = []

    def rec(m: AffineMap, d: int):
        if d == 0:
            out.append(m.apply_interval(lo, hi))
            return
        for b in s.branches:
            rec(m.compose(b), d - 1)

    rec(IDENTITY, depth)
    return Cover1D(depth, tuple(out))


def interval_in_cover(s: IfsSet1D, lo: Q, hi: Q, depth: int,
                      start_word: tuple[int, ...] = ()) -> bool:
    """Whether [lo, hi] is contained in some depth-``depth`` word image,
    by branch descent (no cover materialization)."""
    m = s.word_map(start_word)
    cur_lo, cur_hi = m.apply_interval(*s.hull)
    d = len(start_word)
    if not (cur_lo <= lo and hi <= cur_hi):
        return False
    while d < depth:
        for b in s.branches:
            nm = m.compose(b)
            c_lo, c_hi = nm.apply_interval(*s.hull)
            if c_lo <= lo and hi <= c_hi:
                m = nm
                d += 1
                break
        else:
            return False
    return True


def point_in_cover(s: IfsSet1D, x, depth: int) -> bool:
    q = to_q(x)
    return interval_in_cover(s, q, q, depth)


# -- gaps and thickness ------------------------------------------------


@dataclass(frozen=True)
class GapRecord:
    """A complementary interval together with the closed bridges adjacent
    to it at its removal step."""

    gap: tuple[Q, Q]
    left_bridge: tuple[Q, Q]
    right_bridge: tuple[Q, Q]
    creation_depth: int

    @property
    def ratio(self) -> Q:
        g = self.gap[1] - self.gap[0]
        left = self.left_bridge[1] - self.left_bridge[0]
        right = self.right_bridge[1] - self.right_bridge[0]
        return min(left, right) / g


STABILIZED = "stabilized"
TRUNCATED = "truncated"


@dataclass(frozen=True)
class ThicknessReport:
    value: Q
    status: str  # STABILIZED or TRUNCATED
    witness: GapRecord
    max_depth: int

    @property
    def certified_at_least_one(self) -> bool:
        return self.status == STABILIZED and self.value >= 1

    def __str__(self):
        return f"{self.value} ({self.status})"


def enumerate_gaps(s: IfsSet1D, max_depth: int) -> list[tuple[Q, Q, int]]:
    """All gaps created at depths 1..max_depth as (lo, hi, depth)."""
    gaps: list[tuple[Q, Q, int]] = []
    top = s.top_gaps()

    def rec(m: AffineMap, d: int):
        for glo, ghi in top:
            gaps.append((m(glo), m(ghi), d + 1))
        if d + 1 >= max_depth:
            return
        for b in s.branches:
            rec(m.compose(b), d + 1)

    rec(IDENTITY, 0)
    return gaps


def _ordered_removal(s: IfsSet1D, gaps: list[tuple[Q, Q, int]]
                     ) -> list[GapRecord]:
    """Simulate removal in decreasing length (ties by left endpoint) and
    record the bridges flanking each gap at its removal step."""
    hull_lo, hull_hi = s.hull
    order = sorted(gaps, key=lambda g: (g[0] - g[1], g[0]))
    removed_rights: list[Q] = []  # right endpoints of removed gaps
    removed_lefts: list[Q] = []   # left endpoints of removed gaps
    records = []
    for glo, ghi, d in order:
        i = bisect.bisect_right(removed_rights, glo)
        left_bound = removed_rights[i - 1] if i else hull_lo
        j = bisect.bisect_left(removed_lefts, ghi)
        right_bound = removed_lefts[j] if j < len(removed_lefts) else hull_hi
        records.append(GapRecord((glo, ghi), (left_bound, glo),
                                 (ghi, right_bound), d))
        bisect.insort(removed_rights, ghi)
        bisect.insort(removed_lefts, glo)
    return records


def newhouse_thickness(s: IfsSet1D, max_depth: int = 8) -> ThicknessReport:
    """Infimum of bridge/gap ratios over all gaps enumerated to
    ``max_depth``, with ordered removal simulated exactly.

    The result is tagged STABILIZED when the minimum over depths
    <= max_depth equals the minimum over depths <= max_depth - 1; for
    self-similar presentations every deeper gap is a scaled copy of an
    enumerated one, so a stabilized value is the exact thickness.
    Otherwise the value is an upper bound tagged TRUNCATED.
    """
    if max_depth < 2:
        raise InputError("max_depth must be at least 2")
    if len(s.branches) == 1:
        raise InputError("set with a single branch has no gaps")

    def run(depth: int) -> tuple[Q, GapRecord]:
        records = _ordered_removal(s, enumerate_gaps(s, depth))
        best = records[0]  # keep the earliest-removed gap on ratio ties
        for r in records[1:]:
            if r.ratio < best.ratio:
                best = r
        return best.ratio, best

    val_full, witness = run(max_depth)
    val_prev, _ = run(max_depth - 1)
    status = STABILIZED if val_full == val_prev else TRUNCATED
    return ThicknessReport(val_full, status, witness, max_depth)


def require_thickness_at_least_one(s: IfsSet1D, max_depth: int = 8
                                   ) -> ThicknessReport:
    rep = newhouse_thickness(s, max_depth)
    if rep.status != STABILIZED:
        raise Indeterminate("thickness did not stabilize by depth "
                            f"{max_depth}")
    if rep.value < 1:
        raise HypothesisError(f"thickness {rep.value} is below 1")
    return rep


# -- membership --------------------------------------------------------


IN_CERTIFIED = "in_certified"
IN_COVER = "in_cover_at_depth"
OUT = "out_at_depth"


@dataclass(frozen=True)
class MembershipResult:
    kind: str
    depth: int

    def __str__(self):
        return f"{self.kind}({self.depth})"


def membership(s: IfsSet1D, x, depth: int = 32) -> MembershipResult:
    """Greedy branch descent.  Word-image endpoints are genuine members
    (the extreme branches pin them), so hitting one certifies membership;
    landing in a gap refutes it at the gap's creation depth; otherwise the
    point stays in the cover to the requested depth.
    """
    q = to_q(x)
    lo, hi = s.hull
    if q < lo or q > hi:
        return MembershipResult(OUT, 0)
    m = IDENTITY
    for d in range(depth + 1):
        cur_lo, cur_hi = m.apply_interval(lo, hi)
        if q == cur_lo or q == cur_hi:
            return MembershipResult(IN_CERTIFIED, d)
        if d == depth:
            break
        for b in s.branches:
            nm = m.compose(b)
            c_lo, c_hi = nm.apply_interval(lo, hi)
            if c_lo <= q <= c_hi:
                m = nm
                break
        else:
            return MembershipResult(OUT, d + 1)
    return MembershipResult(IN_COVER, depth)


def certified_member(s: IfsSet1D, x, max_steps: int = 256) -> bool:
    """Stronger membership certificate than the endpoint rule: descend
    greedily tracking the point's position rescaled to the unit hull of
    the current subtree; a repeated position means the descent recurs
    forever, so the point lies in every cover and hence in the set.

    Decides eventually-periodic rationals (the typical exact witnesses);
    returns False when neither a certificate nor a refutation appears
    within ``max_steps``.
    """
    q = to_q(x)
    lo, hi = s.hull
    rel = (q - lo) / (hi - lo)
    seen = set()
    for _ in range(max_steps):
        if rel == 0 or rel == 1:
            return True  # hull endpoint of the current subtree
        if rel in seen:
            return True  # periodic descent
        seen.add(rel)
        pos = lo + rel * (hi - lo)
        for b in s.branches:
            c_lo, c_hi = b.apply_interval(lo, hi)
            if c_lo <= pos <= c_hi:
                rel = (pos - c_lo) / (c_hi - c_lo)
                break
        else:
            return False  # lies in a gap
    return False


def gap_containing_interval(s: IfsSet1D, lo: Q, hi: Q,
                            start_word: tuple[int, ...] = ()
                            ) -> Optional[tuple[Q, Q, int]]:
    """The gap of the subtree at ``start_word`` that contains [lo, hi]
    entirely, or None.  Exact and terminating: a gap must be at least as
    long as the query interval, and gap lengths decay geometrically."""
    if lo > hi:
        raise InputError("empty query interval")
    m = s.word_map(start_word)
    d = len(start_word)
    cur_lo, cur_hi = m.apply_interval(*s.hull)
    if not (cur_lo <= lo and hi <= cur_hi):
        return None
    while True:
        descended = False
        for b in s.branches:
            nm = m.compose(b)
            c_lo, c_hi = nm.apply_interval(*s.hull)
            if c_lo <= lo and hi <= c_hi:
                m, d = nm, d + 1
                descended = True
                break
        if descended:
            continue
        for glo, ghi in s.top_gaps():
            if m(glo) < lo and hi < m(ghi):
                return (m(glo), m(ghi), d + 1)
        return None


# -- Minkowski combinations of covers -----------------------------------


def _scaled_intervals(intervals, factor: Q) -> list[tuple[Q, Q]]:
    if factor >= 0:
        out = [(factor * a, factor * b) for a, b in intervals]
    else:
        out = [(factor * b, factor * a) for a, b in intervals]
    out.sort()
    return out


def merge_intervals(intervals) -> list[tuple[Q, Q]]:
    """Union of closed intervals; touching intervals merge."""
    merged: list[list[Q]] = []
    for a, b in sorted(intervals):
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return [(a, b) for a, b in merged]


def combo_cover(a: Cover1D, b: Cover1D, mu, nu) -> Cover1D:
    """Merged union of {mu*I + nu*J} over interval pairs; contains
    mu*set(A) + nu*set(B)."""
    muv, nuv = to_q(mu), to_q(nu)
    sa = _scaled_intervals(a.intervals, muv)
    sb = _scaled_intervals(b.intervals, nuv)
    if len(sa) * len(sb) > 4_000_000:
        raise InputError("combo_cover pair count too large; "
                         "use combo_reach / combo_covers_interval")
    sums = [(ia + ja, ib + jb) for ia, ib in sa for ja, jb in sb]
    return Cover1D(max(a.depth, b.depth), tuple(merge_intervals(sums)))


def _component_reach(sa, sb, start: Q) -> Optional[Q]:
    """Right endpoint of the connected component of union{I + J} over
    interval lists sa, sb that contains ``start`` (None if uncovered).

    Greedy sweep without materializing the pair products: from position p,
    the farthest reach among pair intervals whose left end is <= p is
    computed per A-interval with a binary search over the sorted B lows.
    """
    b_lows = [x for x, _ in sb]
    # prefix maxima of b highs in order of increasing b low
    b_high_prefix: list[Q] = []
    best = None
    for _, jb in sb:
        best = jb if best is None or jb > best else best
        b_high_prefix.append(best)
    p = start
    covered = False
    while True:
        reach = None
        for ia, ib in sa:
            k = bisect.bisect_right(b_lows, p - ia)
            if k == 0:
                continue
            cand = ib + b_high_prefix[k - 1]
            if cand >= p and (reach is None or cand > reach):
                reach = cand
        if reach is None:
            return p if covered else None
        covered = True
        if reach <= p:
            return p
        p = reach


def combo_reach(a_intervals, b_intervals, mu, nu, start) -> Q:
    """Right endpoint of the connected component of union{mu*I + nu*J}
    containing ``start`` (= start itself if the point is uncovered)."""
    sa = _scaled_intervals(a_intervals, to_q(mu))
    sb = _scaled_intervals(b_intervals, to_q(nu))
    r = _component_reach(sa, sb, to_q(start))
    return to_q(start) if r is None else r


def combo_covers_interval(a_intervals, b_intervals, mu, nu,
                          target_lo, target_hi) -> bool:
    """Whether [target_lo, target_hi] lies inside union{mu*I + nu*J}."""
    tlo, thi = to_q(target_lo), to_q(target_hi)
    sa = _scaled_intervals(a_intervals, to_q(mu))
    sb = _scaled_intervals(b_intervals, to_q(nu))
    r = _component_reach(sa, sb, tlo)
    return r is not None and r >= thi


# -- self-similar Minkowski combinations --------------------------------


def self_combo_cover(s: IfsSet1D, mu, nu, depth: int,
                     _memo: dict | None = None) -> tuple[tuple[Q, Q], ...]:
    """Merged union of mu*cover(s, depth) + nu*cover(s, depth), computed
    by self-similarity instead of pair enumeration.

    cover(depth) splits into branch images of cover(depth - 1), so the
    combination is a union of (#branches)^2 affine translates of
    lower-depth combinations; memoizing on the scaled coefficient pair
    keeps this polynomial in depth even for unequal branch scales.
    """
    if _memo is None:
        _memo = {}
    muv, nuv = to_q(mu), to_q(nu)
    key = (muv, nuv, depth)
    if key in _memo:
        return _memo[key]
    lo, hi = s.hull
    if depth == 0:
        a0, a1 = sorted((muv * lo, muv * hi))
        b0, b1 = sorted((nuv * lo, nuv * hi))
        result: tuple[tuple[Q, Q], ...] = ((a0 + b0, a1 + b1),)
    else:
        pieces: list[tuple[Q, Q]] = []
        for b1_ in s.branches:
            for b2_ in s.branches:
                sub = self_combo_cover(s, muv * b1_.scale, nuv * b2_.scale,
                                       depth - 1, _memo)
                shift = muv * b1_.offset + nuv * b2_.offset
                pieces.extend((a + shift, b + shift) for a, b in sub)
        result = tuple(merge_intervals(pieces))
        if len(result) > 200_000:
            raise Indeterminate("self-similar combination cover grew too "
                                "fragmented to continue")
    _memo[key] = result
    return result


def subtree_combo_cover(s: IfsSet1D, left_branches, right_branches,
                        mu, nu, depth: int) -> tuple[tuple[Q, Q], ...]:
    """Merged union of mu*A_d + nu*B_d where A_d (resp. B_d) is the part
    of cover(s, depth) under the given left (resp. right) first-level
    branches.  Used for combinations of the two sides of a gap."""
    if depth < 1:
        raise InputError("depth must be at least 1 to split at a gap")
    muv, nuv = to_q(mu), to_q(nu)
    memo: dict = {}
    pieces: list[tuple[Q, Q]] = []
    for i in left_branches:
        for j in right_branches:
            bi, bj = s.branches[i], s.branches[j]
            sub = self_combo_cover(s, muv * bi.scale, nuv * bj.scale,
                                   depth - 1, memo)
            shift = muv * bi.offset + nuv * bj.offset
            pieces.extend((a + shift, b + shift) for a, b in sub)
    return tuple(merge_intervals(pieces))


# -- difference set ----------------------------------------------------


def difference_interval(s: IfsSet1D, max_depth: int = 10) -> Q:
    """Largest L with [0, L] inside the cover of C - C at every depth up
    to ``max_depth``, for a set whose thickness is certified >= 1 (the
    gap-lemma hypothesis under which the covered segment is genuinely
    inside the difference set)."""
    require_thickness_at_least_one(s)
    if max_depth < 0:
        raise InputError("max_depth must be nonnegative")
    best: Q | None = None
    memo: dict = {}
    for d in range(max_depth + 1):
        merged = self_combo_cover(s, Q(1), Q(-1), d, memo)
        reach = Q(0)
        for a, b in merged:
            if a <= 0 <= b:
                reach = b
                break
        best = reach if best is None or reach < best else best
        if best == 0:
            break
    return best if best is not None else Q(0)
