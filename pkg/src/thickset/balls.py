"""Systems of balls in the plane and in R^d: finitely-branching trees of
closed balls generating compact sets, with certified covering-slack
bounds, thickness lower bounds, uniform-density checks, subset-thickness
bounds, and the higher-dimensional gap-lemma hypothesis checker.

Ball predicates are exact: centers and radii are rational, and both
norms compare squared distances, so containment and disjointness never
involve rounding.  Square roots appear only in reported enclosures.
"""

from __future__ import annotations

import functools
import hashlib
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Optional, Union

from .errors import InputError
from .scalars import Cmp, Interval, Q, interval_sqrt, sqrt3, to_q

LINF = "linf"
L2 = "l2"

Word = tuple[int, ...]


@dataclass(frozen=True)
class Ball:
    center: tuple[Q, ...]
    radius: Q
    norm: str = L2

    def __post_init__(self):
        if self.radius < 0:
            raise InputError("ball radius must be nonnegative")
        if self.norm not in (LINF, L2):
            raise InputError(f"unknown norm {self.norm!r}")

    @property
    def dim(self) -> int:
        return len(self.center)

    def sq_dist_to(self, other: "Ball") -> Q:
        return sum((a - b) ** 2 for a, b in zip(self.center, other.center))

    def contains_ball(self, other: "Ball") -> bool:
        slack = self.radius - other.radius
        if slack < 0:
            return False
        if self.norm == LINF:
            return all(abs(a - b) <= slack
                       for a, b in zip(self.center, other.center))
        return self.sq_dist_to(other) <= slack * slack

    def disjoint_from(self, other: "Ball") -> bool:
        """Strict disjointness of the closed balls (touching counts as
        intersecting)."""
        reach = self.radius + other.radius
        if self.norm == LINF:
            return any(abs(a - b) > reach
                       for a, b in zip(self.center, other.center))
        return self.sq_dist_to(other) > reach * reach

    def contains_point(self, p: tuple[Q, ...]) -> bool:
        if self.norm == LINF:
            return all(abs(a - b) <= self.radius
                       for a, b in zip(self.center, p))
        return sum((a - b) ** 2
                   for a, b in zip(self.center, p)) <= self.radius ** 2

    def center_distance(self, other: "Ball", bits: int = 128) -> Interval:
        if self.norm == LINF:
            d = max(abs(a - b) for a, b in zip(self.center, other.center))
            return Interval.point(d)
        return interval_sqrt(Interval.point(self.sq_dist_to(other)), bits)

    def gap_to(self, other: "Ball", bits: int = 128) -> Interval:
        """Enclosure of dist(self, other) between the closed balls
        (zero when they meet)."""
        d = self.center_distance(other, bits) - (self.radius + other.radius)
        return Interval(max(d.lo, Q(0)), max(d.hi, Q(0)))


# -- generators ----------------------------------------------------------


def _hash_unit(seed: int, word: Word, child: int, coord: int) -> Q:
    """Deterministic value in (-1, 1) derived from the seed and position."""
    key = f"{seed}|{','.join(map(str, word))}|{child}|{coord}"
    digest = hashlib.sha256(key.encode()).digest()
    v = int.from_bytes(digest[:8], "big")
    return 2 * Q(v, 2**64) - 1


PERTURB_CLAMP = 1 - Q(1, 2**20)


@dataclass(frozen=True)
class GridIfs:
    """n x n grid of radius-rho children inside the unit sup-norm ball,
    spaced d apart and d/2 from the boundary; levels below the first are
    re-drawn with seed-deterministic perturbations of sup-norm strictly
    below d/2 of the parent's scale."""

    n: int
    rho: Q
    d_spacing: Q
    seed: int

    def __post_init__(self):
        if self.n < 2 or self.rho <= 0 or self.d_spacing <= 0:
            raise InputError("need n >= 2 and positive rho, d")
        if 2 * self.rho * self.n + self.n * self.d_spacing != 2:
            raise InputError("grid constraint 2*rho*n + n*d = 2 violated")

    @property
    def child_count(self) -> int:
        return self.n * self.n

    @functools.cached_property
    def cell_centers(self) -> tuple[tuple[Q, Q], ...]:
        pitch = 2 * self.rho + self.d_spacing
        start = -1 + self.d_spacing / 2 + self.rho
        return tuple(
            (start + (i % self.n) * pitch, start + (i // self.n) * pitch)
            for i in range(self.child_count))


@dataclass(frozen=True)
class HexPacking:
    """Hexagonal arrangement of 85 congruent circles (55 core plus 30
    edge circles) copied self-similarly into every child; the two
    designated children near the origin, and their whole subtrees, are
    shrunk by gamma so they become strictly disjoint from their
    neighbours for gamma < 1."""

    gamma: Q
    rho: Q = Q(12179, 100000)
    designated: tuple[int, int] = (0, 1)

    def __post_init__(self):
        if not (0 < self.gamma <= 1):
            raise InputError("gamma must lie in (0, 1]")


@dataclass(frozen=True)
class ExplicitTree:
    """Finitely presented tree of balls: every listed word maps to a
    ball, children are the one-letter extensions present in the table."""

    nodes: dict[Word, Ball]

    def children_of(self, word: Word) -> list[Word]:
        out = []
        i = 0
        while (word + (i,)) in self.nodes:
            out.append(word + (i,))
            i += 1
        return out


Generator = Union[GridIfs, HexPacking, ExplicitTree]


def load_hex_centers() -> list[tuple[Q, Q]]:
    """The bundled arrangement: one \"x y\" rational pair per line."""
    text = resources.files("thickset").joinpath(
        "data/hex_centers.txt").read_text()
    out = []
    for line in text.strip().splitlines():
        xs, ys = line.split()
        out.append((Q(xs), Q(ys)))
    if len(out) != 85:
        raise InputError("hex centers data must hold 85 entries")
    return out


_HEX_CENTERS: Optional[list[tuple[Q, Q]]] = None


def hex_centers() -> list[tuple[Q, Q]]:
    global _HEX_CENTERS
    if _HEX_CENTERS is None:
        _HEX_CENTERS = load_hex_centers()
    return _HEX_CENTERS


@dataclass(frozen=True)
class BallSystem:
    root: Ball
    generator: Generator
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def norm(self) -> str:
        return self.root.norm

    def child_count(self, word: Word) -> int:
        g = self.generator
        if isinstance(g, GridIfs):
            return g.child_count
        if isinstance(g, HexPacking):
            return 85
        return len(g.children_of(word))

    def ball(self, word: Word) -> Ball:
        g = self.generator
        if isinstance(g, ExplicitTree):
            if word not in g.nodes:
                raise InputError(f"word {word} not in the explicit tree")
            return g.nodes[word]
        if not word:
            return self.root
        hit = self._cache.get(word)
        if hit is None:
            parent = self.ball(word[:-1])
            hit = self._child(parent, word[:-1], word[-1])
            self._cache[word] = hit
        return hit

    def children(self, word: Word) -> list[Ball]:
        g = self.generator
        if isinstance(g, ExplicitTree):
            return [g.nodes[w] for w in g.children_of(word)]
        parent = self.ball(word)
        return [self._child(parent, word, i)
                for i in range(self.child_count(word))]

    def _child(self, parent: Ball, word: Word, i: int) -> Ball:
        g = self.generator
        if isinstance(g, GridIfs):
            if not (0 <= i < g.child_count):
                raise InputError("child index out of range")
            tx, ty = g.cell_centers[i]
            if word:  # deeper levels are perturbed
                clamp = (g.d_spacing / 2) * PERTURB_CLAMP
                tx += clamp * _hash_unit(g.seed, word, i, 0)
                ty += clamp * _hash_unit(g.seed, word, i, 1)
            cx = parent.center[0] + parent.radius * tx
            cy = parent.center[1] + parent.radius * ty
            return Ball((cx, cy), parent.radius * g.rho, parent.norm)
        if isinstance(g, HexPacking):
            centers = hex_centers()
            if not (0 <= i < 85):
                raise InputError("child index out of range")
            hx, hy = centers[i]
            cx = parent.center[0] + parent.radius * hx
            cy = parent.center[1] + parent.radius * hy
            r = parent.radius * g.rho
            if not word and i in g.designated:
                r *= g.gamma
            return Ball((cx, cy), r, parent.norm)
        raise InputError("explicit trees carry their own children")

    def words_at(self, depth: int) -> Iterable[Word]:
        g = self.generator
        if isinstance(g, ExplicitTree):
            if depth == 0:
                yield ()
                return
            for w in g.nodes:
                if len(w) == depth:
                    yield w
            return
        def rec(w: Word):
            if len(w) == depth:
                yield w
                return
            for i in range(self.child_count(w)):
                yield from rec(w + (i,))
        yield from rec(())


def grid_ifs_example(n: int, rho, d_spacing, seed: int) -> BallSystem:
    g = GridIfs(n, to_q(rho), to_q(d_spacing), seed)
    root = Ball((Q(0), Q(0)), Q(1), LINF)
    return BallSystem(root, g)


def hex_packing_example(gamma) -> BallSystem:
    g = HexPacking(to_q(gamma))
    root = Ball((Q(0), Q(0)), Q(1), L2)
    return BallSystem(root, g)


def validate_system(sys: BallSystem, depth: int = 2) -> None:
    """Exact structural checks to the given depth: every child inside
    its parent, every ball still on a descending chain (so it can meet
    the generated set), and (for the hex builder with gamma < 1) the
    designated children strictly disjoint from all siblings."""
    for d in range(depth):
        for w in sys.words_at(d):
            parent = sys.ball(w)
            for kid in sys.children(w):
                if not parent.contains_ball(kid):
                    raise InputError(f"child escapes parent at word {w}")
    g = sys.generator
    if isinstance(g, ExplicitTree):
        max_depth = max((len(w) for w in g.nodes), default=0)
        for w in g.nodes:
            if len(w) < max_depth and not g.children_of(w):
                raise InputError(f"ball at word {w} has no descendants, "
                                 "so it cannot meet the generated set")
    if isinstance(g, HexPacking) and g.gamma < 1:
        kids = sys.children(())
        for j in g.designated:
            for i, other in enumerate(kids):
                if i != j and not kids[j].disjoint_from(other):
                    raise InputError("designated child is not disjoint "
                                     f"from sibling {i}")


# -- covering slack (h) and thickness -------------------------------------


def _hex_q(bits: int = 128) -> Interval:
    # (2 - sqrt(3)) / sqrt(3) = (2*sqrt(3) - 3) / 3
    return (2 * sqrt3(bits) - 3) / 3


def h_upper(sys: BallSystem, word: Word = (), bits: int = 128,
            grid_points: int = 8) -> Interval:
    """Certified upper bound on the covering slack of the ball at
    ``word``: the largest distance from a point of that ball to the
    generated set.

    Closed forms for the self-similar builders; for explicit trees a
    one-step bound from a farthest-point grid over the ball against the
    deepest evaluated level.
    """
    g = sys.generator
    level = len(word)
    if isinstance(g, GridIfs):
        val = g.d_spacing * g.rho ** level / (1 - g.rho)
        return Interval.point(val)
    if isinstance(g, HexPacking):
        # one level of interstitial slack below the ball's own radius:
        # h <= q * rho * rad(ball) / (1 + rho)
        q = _hex_q(bits)
        if level == 0:
            return Interval.point((1 - g.gamma) * g.rho) \
                + q * g.rho / (1 + g.rho)
        rad = g.rho ** level
        if word[0] in g.designated:
            rad *= g.gamma
        return q * g.rho * rad / (1 + g.rho)
    return _h_upper_explicit(sys, word, bits, grid_points)


def _deepest_level(tree: ExplicitTree, word: Word) -> tuple[int, list[Ball]]:
    depth = len(word)
    best_d, best = depth, [tree.nodes[word]] if word in tree.nodes else []
    frontier = [word]
    while True:
        nxt = []
        for w in frontier:
            nxt.extend(tree.children_of(w))
        if not nxt:
            break
        frontier = nxt
        best_d = len(frontier[0])
        best = [tree.nodes[w] for w in frontier]
    return best_d, best


def _h_upper_explicit(sys: BallSystem, word: Word, bits: int,
                      grid_points: int) -> Interval:
    tree = sys.generator
    assert isinstance(tree, ExplicitTree)
    ball = sys.ball(word)
    _, deepest = _deepest_level(tree, word)
    if not deepest:
        raise InputError("explicit tree has no nodes under the word")
    if any(b.center == ball.center and b.radius == ball.radius
           for b in deepest):
        return Interval.point(Q(0))  # ball-filling chain
    # max over the ball of min_b (|x - c_b| + r_b), bounded on a grid of
    # points placed relative to the ball, plus the 1-Lipschitz mesh slack
    n = max(2, grid_points)
    pitch = 2 * ball.radius / n
    best = Q(0)
    offsets = [(-ball.radius + pitch * (i + Q(1, 2)),
                -ball.radius + pitch * (j + Q(1, 2)))
               for i in range(n) for j in range(n)]
    for ox, oy in offsets:
        x = (ball.center[0] + ox, ball.center[1] + oy)
        val = None
        for b in deepest:
            if sys.norm == LINF:
                d = max(abs(a - c) for a, c in zip(x, b.center)) + b.radius
            else:
                sq = sum((a - c) ** 2 for a, c in zip(x, b.center))
                d = interval_sqrt(Interval.point(sq), bits).hi + b.radius
            val = d if val is None or d < val else val
        best = max(best, val)
    if sys.norm == LINF:
        mesh = pitch / 2
    else:
        mesh = pitch * Q(3, 4)  # rational bound above pitch*sqrt(2)/2
    return Interval(Q(0), best + mesh)


SELF_SIMILAR = "self_similar_closed_form"


def _truncated(depth: int) -> str:
    return f"truncated_depth({depth})"


@dataclass(frozen=True)
class ThicknessReportNd:
    lower_bound: Interval
    achieved_word: Word
    h_bounds: dict
    tail_certificate: str

    def __str__(self):
        return (f"tau >= {self.lower_bound.approx_str(8)} "
                f"[{self.tail_certificate}]")


def yavicoli_thickness(sys: BallSystem, bits: int = 128) -> ThicknessReportNd:
    """Lower bound for inf over words of (min child radius) / h(word).

    Self-similar builders have level-independent ratios, so the bound is
    a closed form; explicit trees report the minimum over evaluated
    words, tagged with the truncation depth.
    """
    g = sys.generator
    if isinstance(g, GridIfs):
        val = g.rho * (1 - g.rho) / g.d_spacing
        h0 = h_upper(sys, (), bits)
        return ThicknessReportNd(Interval.point(val), (), {(): h0},
                                 SELF_SIMILAR)
    if isinstance(g, HexPacking):
        q = _hex_q(bits)
        h0 = h_upper(sys, (), bits)
        root_ratio = Interval.point(g.gamma * g.rho) / h0
        interior_ratio = Interval.point(1 + g.rho) / q
        cmp = root_ratio.compare(interior_ratio)
        if cmp is Cmp.LESS:
            lower, word = root_ratio, ()
        elif cmp is Cmp.GREATER:
            lower, word = interior_ratio, (2,)
        else:
            lower = Interval(min(root_ratio.lo, interior_ratio.lo),
                             min(root_ratio.hi, interior_ratio.hi))
            word = ()
        return ThicknessReportNd(lower, word,
                                 {(): h0, (2,): h_upper(sys, (2,), bits)},
                                 SELF_SIMILAR)
    tree = g
    assert isinstance(tree, ExplicitTree)
    best: Optional[Q] = None
    best_word: Word = ()
    h_bounds = {}
    max_depth = 0
    for w in sorted(tree.nodes, key=len):
        kids = tree.children_of(w)
        max_depth = max(max_depth, len(w))
        if not kids:
            continue
        min_rad = min(tree.nodes[k].radius for k in kids)
        h = h_upper(sys, w, bits)
        h_bounds[w] = h
        if h.hi == 0:
            continue  # slack-free word imposes no constraint
        lo = min_rad / h.hi
        if best is None or lo < best:
            best, best_word = lo, w
    if best is None:
        raise InputError("explicit tree has no internal nodes")
    return ThicknessReportNd(Interval.point(best), best_word, h_bounds,
                             _truncated(max_depth))


# -- uniform density -------------------------------------------------------


CERTIFIED_ANALYTIC = "certified_analytic"
FALSIFIED = "falsified"
UNFALSIFIED_SAMPLED = "unfalsified_sampled"


@dataclass(frozen=True)
class UniformityResult:
    status: str
    r: Interval
    counterexample: Optional[Ball] = None


def r_uniformity_check(sys: BallSystem, r, samples: int = 64,
                       seed: int = 0) -> UniformityResult:
    """Check whether every sub-ball of relative radius at least r inside
    any tree ball contains a child ball.

    The builders admit analytic constants: the grid is (2*rho + d)-dense
    (any such sub-ball contains a whole grid cell even after
    perturbation) and the hexagonal arrangement is
    ((2 + sqrt(3))/sqrt(3) * rho)-dense.  Larger r values inherit the
    certificate; smaller ones are probed for counterexamples.
    """
    r_iv = Interval.coerce(to_q(r)) if not isinstance(r, Interval) else r
    if not (0 < r_iv.lo and r_iv.hi < 1):
        raise InputError("r must lie in (0, 1)")
    g = sys.generator
    if isinstance(g, GridIfs):
        analytic = Interval.point(2 * g.rho + g.d_spacing)
        if r_iv.certainly_ge(analytic):
            return UniformityResult(CERTIFIED_ANALYTIC, r_iv)
        min_child = g.rho
    elif isinstance(g, HexPacking):
        analytic = (2 * sqrt3() + 3) / 3 * g.rho  # (2+sqrt3)/sqrt3 * rho
        if r_iv.certainly_ge(analytic):
            return UniformityResult(CERTIFIED_ANALYTIC, r_iv)
        min_child = g.gamma * g.rho
    else:
        kids = sys.children(())
        min_child = min(b.radius for b in kids) if kids else Q(0)

    # deterministic counterexample: a sub-ball smaller than every child
    if r_iv.hi < min_child:
        bad = Ball(sys.root.center, r_iv.lo * sys.root.radius, sys.norm)
        if not any(bad.contains_ball(c) for c in sys.children(())):
            return UniformityResult(FALSIFIED, r_iv, bad)

    # randomized probes at the minimal admissible radius
    import random

    rng = random.Random(seed)
    for _ in range(samples):
        word: Word = ()
        for _ in range(rng.randint(0, 2)):
            word = word + (rng.randrange(sys.child_count(word)),)
        parent = sys.ball(word)
        rad = r_iv.lo * parent.radius
        span = parent.radius - rad
        if span < 0:
            continue
        cx = parent.center[0] + span * (2 * Q(rng.randint(0, 2**20), 2**20) - 1)
        cy = parent.center[1] + span * (2 * Q(rng.randint(0, 2**20), 2**20) - 1)
        cand = Ball((cx, cy), rad, sys.norm)
        if not parent.contains_ball(cand):
            continue
        if not any(cand.contains_ball(c) for c in sys.children(word)):
            return UniformityResult(FALSIFIED, r_iv, cand)
    return UniformityResult(UNFALSIFIED_SAMPLED, r_iv)


# -- subset thickness ------------------------------------------------------


FULL_BOUND = "full_bound"
HALF_BOUND = "half_bound"


@dataclass(frozen=True)
class SubsetThicknessReport:
    kind: str
    bound: Interval
    h_child_bound: Interval
    min_sibling_gap: Interval


def subset_thickness(sys: BallSystem, child_index: int,
                     bits: int = 128) -> SubsetThicknessReport:
    """Thickness bound inherited by the subset generated below one
    first-generation child that is disjoint from all its siblings.

    The generic bound halves the parent thickness.  When the child's
    covering slack is certifiably smaller than its distance to every
    sibling, the farthest point of the child ball is realized inside the
    child itself and the full parent bound carries over.
    """
    kids = sys.children(())
    if not (0 <= child_index < len(kids)):
        raise InputError("child index out of range")
    child = kids[child_index]
    min_gap: Optional[Interval] = None
    for i, other in enumerate(kids):
        if i == child_index:
            continue
        if not child.disjoint_from(other):
            raise InputError(f"designated child intersects sibling {i}")
        gap = child.gap_to(other, bits)
        min_gap = gap if min_gap is None \
            else Interval(min(min_gap.lo, gap.lo), min(min_gap.hi, gap.hi))
    assert min_gap is not None
    tau = yavicoli_thickness(sys, bits).lower_bound
    h_child = h_upper(sys, (child_index,), bits)
    h_child_subset = 2 * h_upper(sys, (), bits)
    if h_child.certainly_lt(min_gap):
        return SubsetThicknessReport(FULL_BOUND, tau, h_child_subset,
                                     min_gap)
    return SubsetThicknessReport(HALF_BOUND, tau / 2, h_child_subset,
                                 min_gap)


# -- higher-dimensional gap-lemma hypotheses --------------------------------


HOLDS = "hypotheses_hold"
FAILS = "fail"
UNKNOWN_ND = "unknown"


@dataclass(frozen=True)
class RdHypothesesReport:
    thickness_product_ok: Optional[bool]
    root_meets_shrunk_ball: Optional[bool]
    radius_ratio_ok: Optional[bool]
    uniformity_ok: Optional[bool]
    verdict: str
    reason: str = ""
    details: dict = field(default_factory=dict)


def _meets_shrunk_ball(sys: BallSystem, target: Ball,
                       depth: int = 3) -> Optional[bool]:
    """Three-valued: does the generated set meet ``target``?  A tree ball
    inside the target certifies yes (every ball meets the set); all
    depth-d balls disjoint from it certifies no."""
    frontier = [()]
    for _ in range(depth):
        nxt = []
        for w in frontier:
            for i in range(sys.child_count(w)):
                b = sys.ball(w + (i,))
                if target.contains_ball(b):
                    return True
                if not target.disjoint_from(b):
                    nxt.append(w + (i,))
        if not nxt:
            return False
        frontier = nxt
    return None


def gap_lemma_rd_check(sys1: BallSystem, sys2: BallSystem, r,
                       depth: int = 3, bits: int = 128
                       ) -> RdHypothesesReport:
    """Certified check of the four intersection criteria for compact
    sets generated by ball systems: thickness product at least
    1/(1-2r)^2, the first set meeting the (1-2r)-shrunk root of the
    second, root radii comparable through r, and r-uniform density of
    both systems."""
    r_iv = Interval.coerce(to_q(r)) if not isinstance(r, Interval) else r
    if not (0 < r_iv.lo and r_iv.hi < Q(1, 2)):
        raise InputError("r must lie in (0, 1/2)")
    details: dict = {}

    t1 = yavicoli_thickness(sys1, bits).lower_bound
    t2 = yavicoli_thickness(sys2, bits).lower_bound
    product = t1 * t2
    need = 1 / (1 - 2 * r_iv).square()
    details["thickness_product"] = product
    details["thickness_required"] = need
    c = product.compare(need)
    prod_ok: Optional[bool]
    if c is Cmp.GREATER or product.lo >= need.hi:
        prod_ok = True
    elif c is Cmp.LESS:
        prod_ok = False
    else:
        prod_ok = None

    shrink = 1 - 2 * r_iv
    target = Ball(sys2.root.center, shrink.lo * sys2.root.radius,
                  sys2.root.norm)
    meets = _meets_shrunk_ball(sys1, target, depth)
    details["shrunk_ball_radius"] = Interval.point(target.radius)

    ratio_ok: Optional[bool]
    lhs = Interval.point(sys1.root.radius)
    rhs = r_iv * sys2.root.radius
    if lhs.certainly_ge(rhs):
        ratio_ok = True
    elif lhs.certainly_lt(rhs):
        ratio_ok = False
    else:
        ratio_ok = None

    unis = [r_uniformity_check(s, r_iv) for s in (sys1, sys2)]
    details["uniformity"] = tuple(u.status for u in unis)
    if all(u.status == CERTIFIED_ANALYTIC for u in unis):
        uni_ok: Optional[bool] = True
    elif any(u.status == FALSIFIED for u in unis):
        uni_ok = False
    else:
        uni_ok = None

    checks = (prod_ok, meets, ratio_ok, uni_ok)
    names = ("thickness product", "root meets shrunk ball",
             "radius ratio", "r-uniformity")
    if all(c is True for c in checks):
        verdict, reason = HOLDS, ""
    elif any(c is False for c in checks):
        verdict = FAILS
        reason = "; ".join(n for n, c in zip(names, checks) if c is False)
    else:
        verdict = UNKNOWN_ND
        reason = "; ".join(f"{n} undecided"
                           for n, c in zip(names, checks) if c is None)
    return RdHypothesesReport(prod_ok, meets, ratio_ok, uni_ok,
                              verdict, reason, details)


# -- snapshots and rigid motions -------------------------------------------


def snapshot(sys: BallSystem, depth: int) -> BallSystem:
    """Materialize a builder to an explicit tree of the given depth."""
    nodes: dict[Word, Ball] = {(): sys.root}
    frontier: list[Word] = [()]
    for _ in range(depth):
        nxt = []
        for w in frontier:
            for i in range(sys.child_count(w)):
                nodes[w + (i,)] = sys.ball(w + (i,))
                nxt.append(w + (i,))
        frontier = nxt
    return BallSystem(sys.root, ExplicitTree(nodes))


def transform_system(sys: BallSystem, scale=Q(1), rotation=None,
                     shift=(Q(0), Q(0))) -> BallSystem:
    """Scaled, rotated (rational rotation pair (c, s) with c^2 + s^2 = 1),
    and translated copy of an explicit-tree system."""
    tree = sys.generator
    if not isinstance(tree, ExplicitTree):
        raise InputError("transform a snapshot, not a live builder")
    sc = to_q(scale)
    if sc <= 0:
        raise InputError("scale must be positive")
    if rotation is not None:
        c, s = to_q(rotation[0]), to_q(rotation[1])
        if c * c + s * s != 1:
            raise InputError("rotation pair must satisfy c^2 + s^2 = 1")
    else:
        c, s = Q(1), Q(0)
    dx, dy = to_q(shift[0]), to_q(shift[1])

    def move(b: Ball) -> Ball:
        x, y = b.center
        rx = sc * (c * x - s * y) + dx
        ry = sc * (s * x + c * y) + dy
        return Ball((rx, ry), sc * b.radius, b.norm)

    nodes = {w: move(b) for w, b in tree.nodes.items()}
    return BallSystem(nodes[()], ExplicitTree(nodes))
