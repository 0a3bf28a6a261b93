"""Witness construction and (in)feasibility certification for 3-point
configurations and longer arithmetic progressions on the line.

Witness searches run a certified nested descent: at every level the pair
of working pieces is re-checked against the gap-lemma hypotheses (hull
intersection, neither piece inside a gap of the other, thickness product
at least one), which guarantees the pieces genuinely intersect and the
descent can never dead-end.  Infeasibility certificates for k-term
progressions come from an exhaustive interval-feasibility search over
split tuples of cover intervals, which is sound by self-similarity.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from typing import Optional

from .cantor import (
    IfsSet1D,
    certified_member,
    cover,
    gap_containing_interval,
    interval_in_cover,
    membership,
    IN_CERTIFIED,
    newhouse_thickness,
    normalize_to_unit,
    middle_cantor,
    require_thickness_at_least_one,
    subtree_combo_cover,
)
from .errors import Indeterminate, InputError
from .scalars import Interval, Q, interval_ln, simplest_between, to_q

DEFAULT_NODE_BUDGET = 10_000_000


def node_budget() -> int:
    raw = os.environ.get("THICKSET_MAX_NODES")
    if raw is None:
        return DEFAULT_NODE_BUDGET
    try:
        return int(raw)
    except ValueError:
        raise InputError("THICKSET_MAX_NODES must be an integer")


# -- gap geometry -------------------------------------------------------


def largest_gap(s: IfsSet1D) -> tuple[Q, Q]:
    """Endpoints of the longest bounded gap (leftmost on ties).  The
    longest gap is always a first-level one: every deeper gap is a
    contraction of a first-level gap."""
    gaps = s.top_gaps()
    if not gaps:
        raise InputError("set with a single branch has no gap")
    return max(gaps, key=lambda g: (g[1] - g[0], -g[0]))


def combo_core_intervals(lam, k1, k2) -> tuple[tuple[Q, Q], tuple[Q, Q]]:
    """The two closed intervals [lam*k2, lam] and
    [lam*k2 + (1-lam)*k1, lam + (1-lam)*k1] that are guaranteed to lie in
    (1-lam)*A + lam*B when A, B are the two sides of the gap (k1, k2) of
    a unit-hull set of thickness >= 1.  They may touch or overlap."""
    lamv, k1v, k2v = to_q(lam), to_q(k1), to_q(k2)
    if not (0 < lamv < 1):
        raise InputError("lambda must lie in (0, 1)")
    if not (0 < k1v < k2v < 1):
        raise InputError("need 0 < k1 < k2 < 1")
    first = (lamv * k2v, lamv)
    second = (lamv * k2v + (1 - lamv) * k1v, lamv + (1 - lamv) * k1v)
    return first, second


def _split_branches(s: IfsSet1D) -> tuple[list[int], list[int], Q, Q]:
    """Branch indices left/right of the largest gap plus its endpoints."""
    k1, k2 = largest_gap(s)
    left, right = [], []
    for i, (ilo, ihi) in enumerate(s.branch_images()):
        if ihi <= k1:
            left.append(i)
        else:
            right.append(i)
    return left, right, k1, k2


def verify_combo_containment(s: IfsSet1D, lam, depth: int) -> bool:
    """Check that both guaranteed core intervals lie inside the depth-d
    cover of (1-lam)*A + lam*B, where A and B are the parts of the set
    left and right of its largest gap.  A necessary consequence of the
    guaranteed containment, machine-checkable on covers."""
    lamv = to_q(lam)
    require_thickness_at_least_one(s)
    if s.hull != (Q(0), Q(1)):
        raise InputError("normalize the set to hull [0, 1] first")
    left, right, k1, k2 = _split_branches(s)
    merged = subtree_combo_cover(s, left, right, 1 - lamv, lamv, depth)
    for tlo, thi in combo_core_intervals(lamv, k1, k2):
        if not any(a <= tlo and thi <= b for a, b in merged):
            return False
    return True


# -- certified piece descent --------------------------------------------


@dataclass(frozen=True)
class Piece:
    """An affine image mul*(C restricted to a branch word) + shift.

    The restriction of the attractor to any word image is an affine copy
    of the whole attractor, so a piece carries full structural knowledge:
    exact hull, children, and gap queries all reduce to the base set.
    """

    base: IfsSet1D
    word: tuple[int, ...]
    mul: Q
    shift: Q

    def hull(self) -> tuple[Q, Q]:
        lo, hi = self.base.word_interval(self.word)
        a, b = self.mul * lo + self.shift, self.mul * hi + self.shift
        return (a, b) if a <= b else (b, a)

    def children(self) -> list["Piece"]:
        kids = [Piece(self.base, self.word + (i,), self.mul, self.shift)
                for i in range(len(self.base.branches))]
        kids.sort(key=lambda p: p.hull()[0])
        return kids

    def base_interval(self) -> tuple[Q, Q]:
        return self.base.word_interval(self.word)

    def contains_set_point(self, x: Q) -> bool:
        """Certified membership of x in the piece's set (endpoint or
        periodic-descent certificates)."""
        back = (x - self.shift) / self.mul
        blo, bhi = self.base_interval()
        if not (blo <= back <= bhi):
            return False
        return certified_member(self.base, back)


def _interval_in_piece_gap(lo: Q, hi: Q, p: Piece) -> bool:
    """Whether [lo, hi] lies inside a bounded gap of the piece's set."""
    if p.mul > 0:
        blo = (lo - p.shift) / p.mul
        bhi = (hi - p.shift) / p.mul
    else:
        blo = (hi - p.shift) / p.mul
        bhi = (lo - p.shift) / p.mul
    return gap_containing_interval(p.base, blo, bhi, p.word) is not None


def pieces_certified(x: Piece, y: Piece) -> bool:
    """Gap-lemma hypotheses for the two piece sets: hulls intersect and
    neither set lies inside a gap of the other.  Together with thickness
    product >= 1 (checked once per search) this certifies the sets
    intersect."""
    xlo, xhi = x.hull()
    ylo, yhi = y.hull()
    if xhi < ylo or yhi < xlo:
        return False
    if _interval_in_piece_gap(ylo, yhi, x):
        return False
    if _interval_in_piece_gap(xlo, xhi, y):
        return False
    return True


def certified_descent(xs: list[Piece], ys: list[Piece], depth: int
                      ) -> tuple[Piece, Piece]:
    """Leftmost certified pair among the given top pieces, refined level
    by level.  A certified pair's sets intersect, and any intersection
    point lies in some child pair, which is then itself certified, so the
    descent always finds a successor."""
    pair: Optional[tuple[Piece, Piece]] = None
    candidates = sorted(((px, py) for px in xs for py in ys),
                        key=lambda t: (t[0].hull()[0], t[1].hull()[0]))
    for px, py in candidates:
        if pieces_certified(px, py):
            pair = (px, py)
            break
    if pair is None:
        raise Indeterminate("no certified starting pair for the descent")
    for _ in range(depth - len(pair[0].word)):
        found = None
        for cx, cy in sorted(((cx, cy) for cx in pair[0].children()
                              for cy in pair[1].children()),
                             key=lambda t: (t[0].hull()[0], t[1].hull()[0])):
            if pieces_certified(cx, cy):
                found = (cx, cy)
                break
        if found is None:
            raise Indeterminate("certified refinement dead-ended "
                                "(should be impossible for valid inputs)")
        pair = found
    return pair


# -- convex-combination witnesses ----------------------------------------


@dataclass(frozen=True)
class WitnessPoint:
    enclosure: Interval
    status: str  # IN_CERTIFIED or IN_COVER-style tag

    def __str__(self):
        return f"{self.enclosure.approx_str()} [{self.status}]"


@dataclass(frozen=True)
class Witness1D:
    """Three points {a, m, b} with m = (1-lam)*a + lam*b, given as
    shrinking enclosures with a certified residual bound.

    When the enclosure endpoints (always genuine members, being word
    image endpoints) satisfy the combination identity exactly, the
    witness carries the exact pair as well.
    """

    a: WitnessPoint
    m: WitnessPoint
    b: WitnessPoint
    lam: Q
    residual: Q
    depth_used: int
    a_exact: Optional[Q] = None
    b_exact: Optional[Q] = None
    convention: str = "m = (1-lam)*a + lam*b"

    @property
    def points(self) -> tuple[WitnessPoint, WitnessPoint, WitnessPoint]:
        return (self.a, self.m, self.b)


def _find_combo_unit(s: IfsSet1D, lam: Q, depth: int) -> Witness1D:
    """Witness for a unit-hull set and lam >= 1/2: the middle point is
    pinned at the right endpoint of the largest gap (an exact member),
    and the two ends are refined by certified descent."""
    assert lam >= Q(1, 2) and s.hull == (Q(0), Q(1))
    left, right, k1, k2 = _split_branches(s)
    c = k2
    xs = [Piece(s, (i,), -(1 - lam), Q(0)) for i in left]
    ys = [Piece(s, (j,), lam, -c) for j in right]
    px, py = certified_descent(xs, ys, depth)
    a_lo, a_hi = px.base_interval()
    b_lo, b_hi = py.base_interval()
    w_a, w_b = a_hi - a_lo, b_hi - b_lo
    residual = (1 - lam) * w_a + lam * w_b
    assert membership(s, c).kind == IN_CERTIFIED
    # try to pin an exact pair: any point u of the final intersection
    # that is a certified member of both pieces yields a = -u/(1-lam),
    # b = (u+c)/lam with (1-lam)a + lam b = c exactly.  Candidates: the
    # intersection endpoints (word-image endpoints) and the simplest
    # rational inside (catches eventually periodic witnesses)
    a_exact = b_exact = None
    hx, hy = px.hull(), py.hull()
    k_lo, k_hi = max(hx[0], hy[0]), min(hx[1], hy[1])
    for u in dict.fromkeys((k_lo, k_hi, simplest_between(k_lo, k_hi))):
        if px.contains_set_point(u) and py.contains_set_point(u):
            a_exact = (u - px.shift) / px.mul
            b_exact = (u - py.shift) / py.mul
            break
    return Witness1D(
        a=WitnessPoint(Interval(a_lo, a_hi), f"in_cover_at_depth({depth})"),
        m=WitnessPoint(Interval.point(c), IN_CERTIFIED),
        b=WitnessPoint(Interval(b_lo, b_hi), f"in_cover_at_depth({depth})"),
        lam=lam, residual=residual, depth_used=depth,
        a_exact=a_exact, b_exact=b_exact)


def find_convex_combo(s: IfsSet1D, lam, depth: int = 20,
                      thickness_depth: int = 8) -> Witness1D:
    """A nondegenerate configuration {a, (1-lam)a + lam b, b} inside a
    set of certified thickness >= 1, for any lam in (0, 1).

    For lam below 1/2 the search runs on the reflected set and the
    witness is reflected back, mirroring how the guarantee extends to
    small lam.
    """
    lamv = to_q(lam)
    if not (0 < lamv < 1):
        raise InputError("lambda must lie in (0, 1)")
    require_thickness_at_least_one(s, thickness_depth)
    norm, back = normalize_to_unit(s)
    if lamv >= Q(1, 2):
        w = _find_combo_unit(norm, lamv, depth)
    else:
        from .cantor import affine_image

        reflected = affine_image(norm, Q(-1), Q(1))
        wr = _find_combo_unit(reflected, 1 - lamv, depth)

        def reflect(pt: WitnessPoint) -> WitnessPoint:
            iv = Interval(1 - pt.enclosure.hi, 1 - pt.enclosure.lo)
            return WitnessPoint(iv, pt.status)

        w = Witness1D(a=reflect(wr.b), m=reflect(wr.m), b=reflect(wr.a),
                      lam=lamv, residual=wr.residual,
                      depth_used=wr.depth_used,
                      a_exact=None if wr.b_exact is None else 1 - wr.b_exact,
                      b_exact=None if wr.a_exact is None else 1 - wr.a_exact)

    def unmap(pt: WitnessPoint) -> WitnessPoint:
        lo, hi = back(pt.enclosure.lo), back(pt.enclosure.hi)
        return WitnessPoint(Interval(min(lo, hi), max(lo, hi)), pt.status)

    return Witness1D(a=unmap(w.a), m=unmap(w.m), b=unmap(w.b), lam=lamv,
                     residual=w.residual * back.scale,
                     depth_used=w.depth_used,
                     a_exact=None if w.a_exact is None else back(w.a_exact),
                     b_exact=None if w.b_exact is None else back(w.b_exact))


def find_3ap(s: IfsSet1D, depth: int = 20) -> Witness1D:
    """Three-term arithmetic progression witness (lam = 1/2)."""
    return find_convex_combo(s, Q(1, 2), depth)


# -- k-term progression certificates --------------------------------------


FEASIBLE = "feasible"
INFEASIBLE = "infeasible_at_depth"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class KapCertificate:
    k: int
    verdict: str
    depth: int
    explored_nodes: int
    x: Optional[Interval] = None   # first point enclosure
    y: Optional[Interval] = None   # common difference enclosure
    points: tuple[WitnessPoint, ...] = ()

    def __str__(self):
        return f"{self.verdict}(k={self.k}, depth={self.depth})"


def _tuple_y_range(boxes: list[tuple[Q, Q]], y_min: Q
                   ) -> Optional[tuple[Q, Q]]:
    """Feasible range of the common difference y for points
    x + j*y constrained to boxes[j], intersected over all index pairs.

    Eliminating x from the two-variable system leaves exactly these
    pairwise constraints, so a nonempty range is also sufficient for a
    real solution (x, y) to exist.
    """
    lo, hi = y_min, None
    k = len(boxes)
    for j in range(k):
        for l in range(j + 1, k):
            step = l - j
            cand_lo = (boxes[l][0] - boxes[j][1]) / step
            cand_hi = (boxes[l][1] - boxes[j][0]) / step
            if cand_lo > lo:
                lo = cand_lo
            if hi is None or cand_hi < hi:
                hi = cand_hi
            if hi is not None and lo > hi:
                return None
    return (lo, hi)


def _split_tuples_at_depth_one(s: IfsSet1D, k: int):
    """Nondecreasing k-tuples of first-level branch indices, not all
    equal."""
    n = len(s.branches)
    for combo in itertools.combinations_with_replacement(range(n), k):
        if combo[0] != combo[-1]:
            yield combo


def kap_search(s: IfsSet1D, k: int, depth: int = 8) -> KapCertificate:
    """Branch-and-prune search for k-term arithmetic progressions.

    By self-similarity a progression exists iff one exists that is split
    at the first level (not all points inside one branch image), and a
    split progression must jump the largest first-level gap, forcing
    y >= |G1|/(k-1).  All split tuples of cover intervals are tested with
    the exact pairwise y-range; if every tuple dies by some depth, no
    k-term progression exists in the set at all.
    """
    if k < 3:
        raise InputError("k must be at least 3")
    if depth < 1:
        raise InputError("depth must be at least 1")
    norm, back = normalize_to_unit(s)
    gaps = norm.top_gaps()
    y_min = min(g1 - g0 for g0, g1 in gaps) / (k - 1)
    budget = node_budget()
    explored = 0

    def boxes_of(words):
        return [norm.word_interval(w) for w in words]

    live: list[tuple[tuple[int, ...], ...]] = []
    for combo in _split_tuples_at_depth_one(norm, k):
        explored += 1
        words = tuple((i,) for i in combo)
        if _tuple_y_range(boxes_of(words), y_min) is not None:
            live.append(words)
    d = 1
    while live and d < depth:
        nxt = []
        nb = len(norm.branches)
        for words in live:
            for ext in itertools.product(range(nb), repeat=k):
                explored += 1
                if explored > budget:
                    return KapCertificate(k, UNKNOWN, d, explored)
                cand = tuple(w + (e,) for w, e in zip(words, ext))
                boxes = boxes_of(cand)
                if any(boxes[i][0] > boxes[i + 1][0] for i in range(k - 1)):
                    continue  # keep tuples ordered
                if _tuple_y_range(boxes, y_min) is not None:
                    nxt.append(cand)
        live = nxt
        d += 1
        if not live:
            return KapCertificate(k, INFEASIBLE, d, explored)
    if not live:
        return KapCertificate(k, INFEASIBLE, d, explored)

    words = min(live, key=lambda ws: [norm.word_interval(w)[0] for w in ws])
    boxes = boxes_of(words)
    y_lo, y_hi = _tuple_y_range(boxes, y_min)
    y_mid = (y_lo + y_hi) / 2
    x_lo = max(boxes[j][0] - j * y_mid for j in range(k))
    x_hi = min(boxes[j][1] - j * y_mid for j in range(k))
    pts = []
    for j in range(k):
        v = (x_lo + x_hi) / 2 + j * y_mid
        assert boxes[j][0] <= v <= boxes[j][1]
        lo, hi = back(boxes[j][0]), back(boxes[j][1])
        pts.append(WitnessPoint(Interval(lo, hi),
                                f"in_cover_at_depth({d})"))
    # map enclosures back to the original coordinates
    return KapCertificate(
        k, FEASIBLE, d, explored,
        x=Interval(back(x_lo), back(x_hi)),
        y=Interval(y_lo * back.scale, y_hi * back.scale),
        points=tuple(pts))


def kap_bruteforce(s: IfsSet1D, k: int, depth: int) -> str:
    """No-pruning oracle: enumerate every split k-tuple of depth-d cover
    intervals directly and run the same exact feasibility test."""
    norm, _ = normalize_to_unit(s)
    gaps = norm.top_gaps()
    y_min = min(g1 - g0 for g0, g1 in gaps) / (k - 1)
    ints = cover(norm, depth).intervals
    per_branch = len(ints) // len(norm.branches)
    for combo in itertools.combinations_with_replacement(
            range(len(ints)), k):
        if combo[0] // per_branch == combo[-1] // per_branch:
            continue  # not split at the first level
        boxes = [ints[i] for i in combo]
        if _tuple_y_range(boxes, y_min) is not None:
            return FEASIBLE
    return INFEASIBLE


# -- symmetric 4-term progressions ---------------------------------------


def shmerkin_4ap(epsilon, depth: int = 16) -> KapCertificate:
    """Symmetric 4-term progression in the centred-gap set with gap ratio
    eps <= 1/3: refine t in (C - 1/2) intersect (1/3)(C - 1/2); then
    {1/2 - 3t, 1/2 - t, 1/2 + t, 1/2 + 3t} lies in C by the set's
    symmetry about 1/2."""
    eps = to_q(epsilon)
    if not (0 < eps <= Q(1, 3)):
        raise InputError("epsilon must lie in (0, 1/3] (no 4-term "
                         "progression exists for larger gaps)")
    s = middle_cantor(eps)
    require_thickness_at_least_one(s)
    x_piece = Piece(s, (), Q(1), Q(-1, 2))
    y_piece = Piece(s, (), Q(1, 3), Q(-1, 6))
    px, py = certified_descent([x_piece], [y_piece], depth)
    hx, hy = px.hull(), py.hull()
    t_lo, t_hi = max(hx[0], hy[0]), min(hx[1], hy[1])

    # try to pin an exact witness at an enclosure endpoint
    t_exact: Optional[Q] = None
    for cand in (t_lo, t_hi):
        if px.contains_set_point(cand) and py.contains_set_point(cand):
            t_exact = cand
            break

    def ap_points(tv_lo: Q, tv_hi: Q):
        out = []
        for coeff in (-3, -1, 1, 3):
            vals = sorted((Q(1, 2) + coeff * tv_lo, Q(1, 2) + coeff * tv_hi))
            iv = Interval(vals[0], vals[1])
            if iv.is_point():
                st = membership(s, iv.lo, depth=64).kind
            else:
                st = (f"in_cover_at_depth({depth})"
                      if interval_in_cover(s, iv.lo, iv.hi, depth)
                      else "enclosure")
            out.append(WitnessPoint(iv, st))
        out.sort(key=lambda p: p.enclosure.lo)
        return out

    if t_exact is not None:
        pts = ap_points(t_exact, t_exact)
        t_iv = Interval.point(t_exact)
    else:
        pts = ap_points(t_lo, t_hi)
        t_iv = Interval(t_lo, t_hi)
    step = abs(t_iv) * 2
    return KapCertificate(4, FEASIBLE, depth, 0,
                          x=pts[0].enclosure, y=step, points=tuple(pts))


# -- gap lemma hypothesis checker -----------------------------------------


@dataclass(frozen=True)
class GapLemmaReport:
    hull_intersect: bool
    interwoven: bool
    thickness_product: Interval
    verdict: str  # "hypotheses_hold" | "fail" | "unknown"
    reason: str = ""


def gap_lemma_check(c1: IfsSet1D, c2: IfsSet1D,
                    thickness_depth: int = 8) -> GapLemmaReport:
    """Certified check of the three intersection criteria for two compact
    sets on the line: overlapping hulls, neither inside a gap of the
    other, and thickness product at least one."""
    h1, h2 = c1.hull, c2.hull
    hull_ok = h1[0] <= h2[1] and h2[0] <= h1[1]
    inter_ok = False
    if hull_ok:
        in_gap_21 = gap_containing_interval(c1, h2[0], h2[1]) is not None
        in_gap_12 = gap_containing_interval(c2, h1[0], h1[1]) is not None
        inter_ok = not in_gap_21 and not in_gap_12

    r1 = newhouse_thickness(c1, thickness_depth)
    r2 = newhouse_thickness(c2, thickness_depth)
    iv1 = Interval.point(r1.value) if r1.status == "stabilized" \
        else Interval(Q(0), r1.value)
    iv2 = Interval.point(r2.value) if r2.status == "stabilized" \
        else Interval(Q(0), r2.value)
    product = iv1 * iv2

    if not hull_ok:
        return GapLemmaReport(hull_ok, inter_ok, product, "fail",
                              "hulls are disjoint")
    if not inter_ok:
        return GapLemmaReport(hull_ok, inter_ok, product, "fail",
                              "one set lies inside a gap of the other")
    if product.lo >= 1:
        return GapLemmaReport(hull_ok, inter_ok, product,
                              "hypotheses_hold")
    if product.hi < 1:
        return GapLemmaReport(hull_ok, inter_ok, product, "fail",
                              f"thickness product {product.hi} below 1")
    return GapLemmaReport(hull_ok, inter_ok, product, "unknown",
                          "thickness did not stabilize; product "
                          "straddles 1")


# -- dimension bound -------------------------------------------------------


def hausdorff_lower_bound(tau, bits: int = 128) -> Interval:
    """Enclosure of log(2) / log(2 + 1/tau), the standard lower bound for
    the Hausdorff dimension of a set of thickness tau."""
    tv = Interval.coerce(tau)
    if tv.lo <= 0:
        raise InputError("tau must be strictly positive")
    ln2 = interval_ln(Interval.point(2), bits)
    denom_lo = interval_ln(Interval.point(2 + 1 / tv.lo), bits)
    denom_hi = interval_ln(Interval.point(2 + 1 / tv.hi), bits)
    # increasing in tau: evaluate outward at both ends
    lo = ln2.lo / denom_lo.hi
    hi = ln2.hi / denom_hi.lo
    return Interval(lo, hi)
