"""Constructive reduction of designs to small dominating supports.

The base move: on a type I interval [A, B], two weighted points
(c1, w1), (c2, w2) strictly above A can be replaced by mass at A plus a
single point c_x in (c1, c2) chosen so that the psi_1 and psi_2 moments
are preserved exactly while the psi_3 moment can only grow.  The moment
matrix of the replacement therefore dominates the original in the
Loewner order.  Type II intervals mirror the move with the anchor at B.

Folding a k-point design pairwise (farthest from the anchor first)
collapses it to {anchor, c_x}.  For the even binary-response weights,
folding each sign separately toward 0, recombining the two folded
points, and splitting the result across +/-c_x yields the symmetric
dominating class; when (psi_3'/psi_1')' > 0 on the positive axis the
origin mass can be absorbed as well, leaving a pure two-point
symmetric design.  Asymmetric regions [D1, D2] with D1 < 0 < D2 run the
same pipeline but pin the working point at -D1 when it would otherwise
escape, finishing with a weight transfer that rebalances the
off-diagonal moment; the result is anchored at the absolutely smaller
endpoint.

Every public reduction returns a certificate: the psi_1/psi_2 moment
residuals, the psi_3 gain, and the smallest eigenvalue of
C_reduced - C_input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from . import classify
from .classify import Classification, cap_region, check_type, find_breakpoints
from .design import MERGE_RADIUS, WEIGHT_FLOOR, Design, design, finalize, merge_coincident
from .errors import BracketError, DomainError, NumericalError, UnclassifiableRegionError
from .infomat import InfoMatrix, c_matrix
from .models import ModelSpec

TYPE_I = classify.TYPE_I
TYPE_II = classify.TYPE_II

TWO_SYMMETRIC = "two-symmetric"
TWO_SYMMETRIC_PLUS_ZERO = "two-symmetric-plus-zero"
ENDPOINT_PAIR_LOWER = "endpoint-pair-lower"
ENDPOINT_PAIR_UPPER = "endpoint-pair-upper"
D1_ANCHORED = "d1-anchored"
UNCHANGED = "unchanged"

#: bisection width for all scalar root solves
BISECT_WIDTH = 1e-12
BISECT_MAX_ITER = 200

#: tolerated clamping of weights that theory pins inside [0, 1]
CLAMP_TOL = 1e-9


@dataclass(frozen=True)
class Certificate:
    """Dominance evidence for a reduction."""

    moment_residuals: tuple[float, float]   # |d psi_1|, |d psi_2|
    third_moment_slack: float               # psi_3 gain (should be >= 0)
    psd_margin: float                       # lambda_min(C_reduced - C_input)


@dataclass(frozen=True)
class ReductionOutcome:
    reduced: Design
    certificate: Certificate
    structure: str


# ---------------------------------------------------------------------------
# scalar solvers
# ---------------------------------------------------------------------------

def _bisect(f, lo: float, hi: float, flo: float) -> float:
    if flo == 0.0:
        return lo
    for _ in range(BISECT_MAX_ITER):
        if hi - lo <= BISECT_WIDTH:
            break
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if math.copysign(1.0, fm) == math.copysign(1.0, flo):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def invert_weight(model: ModelSpec, target: float, lo: float, hi: float) -> float:
    """c in [lo, hi] with psi_1(c) = target; psi_1 strictly monotone there."""
    flo = model.psi(1, lo) - target
    fhi = model.psi(1, hi) - target
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if math.copysign(1.0, flo) == math.copysign(1.0, fhi):
        raise BracketError(
            f"psi_1 mixture {target!r} not bracketed on [{lo}, {hi}] for {model.id}"
        )
    return _bisect(lambda c: model.psi(1, c) - target, lo, hi, flo)


# ---------------------------------------------------------------------------
# the pair merge
# ---------------------------------------------------------------------------

def merge_pair(
    model: ModelSpec,
    anchor: float,
    c1: float,
    c2: float,
    omega: float,
    orientation: str,
) -> tuple[float, float]:
    """Fold {(c1, omega), (c2, 1-omega)} into anchor mass plus one point.

    Returns (c_x, w_x): w_x goes to the anchor and 1-w_x to c_x, with
    the psi_1/psi_2 moments preserved and the psi_3 moment not reduced.
    ``orientation`` says which interval type licenses the move: type I
    anchors below (anchor < c1 < c2), type II above (c1 < c2 < anchor).
    Boundary weights return the surviving point with zero anchor mass.
    """
    if not (0.0 <= omega <= 1.0):
        raise DomainError(f"omega must lie in [0, 1], got {omega!r}")
    if not c1 < c2:
        raise DomainError(f"need c1 < c2, got {c1!r} >= {c2!r}")
    if orientation == TYPE_I:
        if not anchor < c1:
            raise DomainError(f"type I merge needs anchor < c1, got {anchor!r} >= {c1!r}")
    elif orientation == TYPE_II:
        if not c2 < anchor:
            raise DomainError(f"type II merge needs c2 < anchor, got {c2!r} <= {anchor!r}")
    else:
        raise DomainError(f"unknown orientation {orientation!r}")
    if omega >= 1.0:
        return c1, 0.0
    if omega <= 0.0:
        return c2, 0.0

    p1a = model.psi(1, anchor)
    p2a = model.psi(2, anchor)
    mix1 = omega * model.psi(1, c1) + (1.0 - omega) * model.psi(1, c2)
    mix2 = omega * model.psi(2, c1) + (1.0 - omega) * model.psi(2, c2)

    c_mid = invert_weight(model, mix1, c1, c2)
    lo, hi = (c_mid, c2) if orientation == TYPE_I else (c1, c_mid)

    def residual(c: float) -> float:
        p1c = model.psi(1, c)
        wa = (mix1 - p1c) / (p1a - p1c)
        return wa * p2a + (1.0 - wa) * model.psi(2, c) - mix2

    flo, fhi = residual(lo), residual(hi)
    scale = 1.0 + abs(mix2) + abs(p2a)
    if flo == 0.0:
        c_x = lo
    elif fhi == 0.0:
        c_x = hi
    elif math.copysign(1.0, flo) != math.copysign(1.0, fhi):
        c_x = _bisect(residual, lo, hi, flo)
    elif min(abs(flo), abs(fhi)) <= 1e-9 * scale:
        # sign change erased by rounding on a near-degenerate bracket
        c_x = lo if abs(flo) <= abs(fhi) else hi
    else:
        raise BracketError(
            f"moment residual has no sign change on [{lo}, {hi}] for {model.id}; "
            "interval type does not match the merge orientation"
        )

    p1x = model.psi(1, c_x)
    w_x = (mix1 - p1x) / (p1a - p1x)
    w_x = _clamp_unit(w_x, "anchor weight")
    return c_x, w_x


def _clamp_unit(value: float, what: str) -> float:
    if value < -CLAMP_TOL or value > 1.0 + CLAMP_TOL:
        raise NumericalError(f"{what} {value!r} escaped [0, 1] beyond tolerance")
    return min(max(value, 0.0), 1.0)


# ---------------------------------------------------------------------------
# folding
# ---------------------------------------------------------------------------

def _fold(
    model: ModelSpec,
    pts: list[tuple[float, float]],
    anchor: float,
    orientation: str,
) -> tuple[float, tuple[float, float]]:
    """Fold all points into (anchor mass gained, one surviving point).

    Points are folded farthest from the anchor first; ties keep input
    order.  All points must lie strictly on the merge side of anchor.
    """
    if not pts:
        raise DomainError("nothing to fold")
    order = sorted(pts, key=lambda t: -abs(t[0] - anchor))
    cur_c, cur_w = order[0]
    gain = 0.0
    for c, w in order[1:]:
        lo_c, hi_c = (cur_c, c) if cur_c < c else (c, cur_c)
        lo_w = cur_w if cur_c < c else w
        mass = cur_w + w
        cx, wx = merge_pair(model, anchor, lo_c, hi_c, lo_w / mass, orientation)
        gain += mass * wx
        cur_c, cur_w = cx, mass * (1.0 - wx)
    return gain, (cur_c, cur_w)


def _split_at_anchor(pts, anchor: float, orientation: str):
    """Separate anchor-coincident mass from the points to fold."""
    anchor_w = 0.0
    fold_pts = []
    for c, w in pts:
        if abs(c - anchor) <= MERGE_RADIUS:
            anchor_w += w
        else:
            if orientation == TYPE_I and c < anchor:
                raise DomainError(f"point {c!r} below the type I anchor {anchor!r}")
            if orientation == TYPE_II and c > anchor:
                raise DomainError(f"point {c!r} above the type II anchor {anchor!r}")
            fold_pts.append((c, w))
    return anchor_w, fold_pts


def _certify(model: ModelSpec, before: Design, after: Design, structure: str) -> ReductionOutcome:
    cb = c_matrix(before, model)
    ca = c_matrix(after, model)
    diff = InfoMatrix(ca.m11 - cb.m11, ca.m12 - cb.m12, ca.m22 - cb.m22)
    cert = Certificate(
        moment_residuals=(abs(diff.m11), abs(diff.m12)),
        third_moment_slack=diff.m22,
        psd_margin=diff.eigenvalues()[0],
    )
    return ReductionOutcome(reduced=after, certificate=cert, structure=structure)


def _unchanged(dsgn: Design) -> ReductionOutcome:
    cert = Certificate(moment_residuals=(0.0, 0.0), third_moment_slack=0.0, psd_margin=0.0)
    return ReductionOutcome(reduced=dsgn, certificate=cert, structure=UNCHANGED)


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def collapse(model: ModelSpec, dsgn: Design, verdict: Classification) -> ReductionOutcome:
    """Collapse a design on a typed interval to {interval end, one point}."""
    if verdict.verdict == TYPE_I:
        orientation, anchor, structure = TYPE_I, dsgn.region[0], ENDPOINT_PAIR_LOWER
    elif verdict.verdict == TYPE_II:
        orientation, anchor, structure = TYPE_II, dsgn.region[1], ENDPOINT_PAIR_UPPER
    else:
        raise DomainError("collapse needs a type I or type II verdict")
    return _collapse_typed(model, dsgn, anchor, orientation, structure)


def _collapse_typed(
    model: ModelSpec,
    dsgn: Design,
    anchor: float,
    orientation: str,
    structure: str,
) -> ReductionOutcome:
    pts = merge_coincident(dsgn.points)
    if len(pts) <= 1:
        return _unchanged(finalize(pts, dsgn.region))
    anchor_w, fold_pts = _split_at_anchor(pts, anchor, orientation)
    if len(fold_pts) <= 1:
        return _unchanged(finalize(pts, dsgn.region))
    gain, (cx, wx) = _fold(model, fold_pts, anchor, orientation)
    out = finalize([(anchor, anchor_w + gain), (cx, wx)], dsgn.region)
    return _certify(model, dsgn, out, structure)


def merge_to_single(
    model: ModelSpec,
    c1: float,
    c2: float,
    omega: float,
    check: bool = True,
) -> float:
    """The single point whose psi_1 equals the omega-mixture of c1, c2.

    Valid where psi_1 is strictly decreasing and (psi_3'/psi_1')' > 0 on
    (c1, c2); then the merged point's psi_3 strictly exceeds the
    mixture, which is asserted.  The point decreases strictly in omega.
    """
    if not (0.0 <= omega <= 1.0):
        raise DomainError(f"omega must lie in [0, 1], got {omega!r}")
    if not c1 < c2:
        raise DomainError(f"need c1 < c2, got {c1!r} >= {c2!r}")
    if check:
        _check_single_merge_preconditions(model, c1, c2)
    if omega >= 1.0:
        return c1
    if omega <= 0.0:
        return c2
    mix1 = omega * model.psi(1, c1) + (1.0 - omega) * model.psi(1, c2)
    c = invert_weight(model, mix1, c1, c2)
    mix3 = omega * model.psi(3, c1) + (1.0 - omega) * model.psi(3, c2)
    got = model.psi(3, c)
    if got < mix3 - 1e-10 * (1.0 + abs(mix3)):
        raise NumericalError(
            f"third-moment gain violated at merged point {c!r}: {got!r} < {mix3!r}"
        )
    return c


def _check_single_merge_preconditions(model: ModelSpec, c1: float, c2: float) -> None:
    n = 17
    for k in range(1, n):
        c = c1 + (c2 - c1) * k / n
        if model.kink_at_zero and abs(c) <= classify.KINK_GRID_FLOOR:
            continue
        try:
            d = model.dweight_at(c)
        except DomainError:
            continue
        if d >= 0.0:
            raise DomainError(f"psi_1 not strictly decreasing at c={c!r}")
        if classify._r3p_sign(model, c) < 0:
            raise DomainError(f"(psi_3'/psi_1')' not positive at c={c!r}")


def endpoint_dominates(
    model: ModelSpec,
    a: float,
    b: float,
    c: float,
    check: bool = True,
) -> tuple[float, bool]:
    """Weight putting c's psi_1 on the {a, b} mixture, and whether the
    psi_3 mixture dominates.

    Valid where psi_1' * (psi_3'/psi_1')' > 0 on [a, b]; the returned
    flag reports psi_3(c) <= omega psi_3(a) + (1-omega) psi_3(b) with a
    1e-12 slack.
    """
    if not (a <= c <= b) or not a < b:
        raise DomainError(f"need a <= c <= b with a < b, got {a!r}, {c!r}, {b!r}")
    if check:
        _check_endpoint_preconditions(model, a, b)
    p1a, p1b = model.psi(1, a), model.psi(1, b)
    if p1a == p1b:
        raise DomainError("psi_1 constant on [a, b]; endpoint weight undefined")
    omega = (p1b - model.psi(1, c)) / (p1b - p1a)
    omega = _clamp_unit(omega, "endpoint weight")
    mix3 = omega * model.psi(3, a) + (1.0 - omega) * model.psi(3, b)
    slack = 1e-12 * (1.0 + abs(mix3))
    return omega, model.psi(3, c) <= mix3 + slack


def _check_endpoint_preconditions(model: ModelSpec, a: float, b: float) -> None:
    n = 17
    for k in range(n + 1):
        c = a + (b - a) * k / n
        if model.kink_at_zero and abs(c) <= classify.KINK_GRID_FLOOR:
            continue
        try:
            d = model.dweight_at(c)
        except DomainError:
            continue
        s = classify._r3p_sign(model, c)
        if s == 0:
            continue
        if d * s <= 0.0:
            raise DomainError(f"psi_1' * (psi_3'/psi_1')' not positive at c={c!r}")


# ---------------------------------------------------------------------------
# symmetric machinery for the even binary weights
# ---------------------------------------------------------------------------

def _lemma_fold_sides(model: ModelSpec, pts):
    """Fold positive and negative mass separately toward the origin.

    Returns (zero mass, positive folded point or None, negative folded
    point or None); the negative point is stored by magnitude.
    """
    zero_w = 0.0
    pos, neg = [], []
    for c, w in pts:
        if abs(c) <= MERGE_RADIUS:
            zero_w += w
        elif c > 0.0:
            pos.append((c, w))
        else:
            neg.append((-c, w))
    folded = []
    for side in (pos, neg):
        if not side:
            folded.append(None)
        elif len(side) == 1:
            folded.append(side[0])
        else:
            gain, pt = _fold(model, side, 0.0, TYPE_I)
            zero_w += gain
            folded.append(pt)
    return zero_w, folded[0], folded[1]


def _recombine_sides(model: ModelSpec, zero_w: float, pos, neg):
    """Merge the two one-per-side points into one magnitude plus a split.

    Returns (c_x, w_x, p, zero_w): mass w_x sits at +/-c_x with share p
    on the positive side, preserving the signed psi_2 moment exactly.
    """
    if pos is None and neg is None:
        return None
    if pos is None:
        cx, wx = neg
        return cx, wx, 0.0, zero_w
    if neg is None:
        cx, wx = pos
        return cx, wx, 1.0, zero_w
    (cp, wp), (cn, wn) = pos, neg
    signed = wp * model.psi(2, cp) - wn * model.psi(2, cn)
    if abs(cp - cn) <= MERGE_RADIUS:
        cx, wx = cp, wp + wn
    else:
        lo_c, hi_c = (cn, cp) if cn < cp else (cp, cn)
        lo_w = wn if cn < cp else wp
        mass = wp + wn
        cx, frac = merge_pair(model, 0.0, lo_c, hi_c, lo_w / mass, TYPE_I)
        zero_w += mass * frac
        wx = mass * (1.0 - frac)
    denom = wx * model.psi(2, cx)
    p = 0.5 * (signed / denom + 1.0) if denom > 0.0 else 0.5
    return cx, wx, _clamp_unit(p, "symmetric split"), zero_w


def _absorb_origin(model: ModelSpec, zero_w: float, cx: float, wx: float, p: float):
    """Fold origin mass into the symmetric pair (needs condition 4.1).

    Returns ((c, w+), (-c, w-)) preserving all three moments upward.
    """
    signed = (2.0 * p - 1.0) * wx * model.psi(2, cx)
    if zero_w <= 0.0:
        return [(cx, p * wx), (-cx, (1.0 - p) * wx)]
    omega = zero_w / (zero_w + wx)
    cx0 = merge_to_single(model, 0.0, cx, omega, check=False)
    wx0 = 0.5 * (signed / model.psi(2, cx0) + 1.0)
    wx0 = _clamp_unit(wx0, "origin-absorbing weight")
    return [(cx0, wx0), (-cx0, 1.0 - wx0)]


def symmetrize_binary(model: ModelSpec, dsgn: Design) -> ReductionOutcome:
    """Dominating symmetric design on a symmetric region.

    Output is two symmetric points when (psi_3'/psi_1')' > 0 holds on
    the positive axis (logistic, probit), otherwise two symmetric
    points plus the origin.
    """
    _require_parity(model)
    lo, hi = dsgn.region
    if abs(lo + hi) > 1e-9 * max(1.0, abs(hi)):
        raise DomainError(f"region [{lo}, {hi}] is not symmetric about 0")
    pts = merge_coincident(dsgn.points)
    if len(pts) <= 1:
        return _unchanged(finalize(pts, dsgn.region))
    raw, structure = _symmetrize_core(model, pts)
    out = finalize(raw, dsgn.region)
    structure = _fix_symmetric_tag(out, structure)
    return _certify(model, dsgn, out, structure)


def _fix_symmetric_tag(out: Design, structure: str) -> str:
    if structure not in (TWO_SYMMETRIC, TWO_SYMMETRIC_PLUS_ZERO):
        return structure
    has_origin = any(abs(c) <= MERGE_RADIUS for c in out.support())
    return TWO_SYMMETRIC_PLUS_ZERO if has_origin else TWO_SYMMETRIC


def _symmetrize_core(model: ModelSpec, pts):
    """Stages shared by the symmetric and asymmetric pipelines."""
    zero_w, pos, neg = _lemma_fold_sides(model, pts)
    combo = _recombine_sides(model, zero_w, pos, neg)
    if combo is None:
        return [(0.0, zero_w)], UNCHANGED
    cx, wx, p, zero_w = combo
    if model.condition_41:
        return _absorb_origin(model, zero_w, cx, wx, p), TWO_SYMMETRIC
    raw = [(cx, p * wx), (-cx, (1.0 - p) * wx), (0.0, zero_w)]
    return raw, TWO_SYMMETRIC_PLUS_ZERO


def _require_parity(model: ModelSpec) -> None:
    if not model.parity:
        raise DomainError(f"{model.id} weight is not even; symmetric machinery does not apply")


def reduce_one_sided(model: ModelSpec, dsgn: Design) -> ReductionOutcome:
    """Two-point dominating design anchored at the endpoint nearer 0.

    Applies to even binary weights on regions entirely at one side of
    the origin: nonnegative regions anchor at the lower end, nonpositive
    regions at the upper end.
    """
    _require_parity(model)
    lo, hi = dsgn.region
    if lo >= -MERGE_RADIUS:
        return _collapse_typed(model, dsgn, lo, TYPE_I, ENDPOINT_PAIR_LOWER)
    if hi <= MERGE_RADIUS:
        return _collapse_typed(model, dsgn, hi, TYPE_II, ENDPOINT_PAIR_UPPER)
    raise DomainError(
        f"region [{lo}, {hi}] straddles 0; use the symmetric or asymmetric reduction"
    )


def reduce_asymmetric(model: ModelSpec, dsgn: Design) -> ReductionOutcome:
    """Dominating design on an asymmetric region straddling the origin.

    For the origin-absorbing models the result is either two symmetric
    points or the absolutely smaller endpoint plus one interior point;
    the other binary models may keep the origin as a third point.
    """
    _require_parity(model)
    lo, hi = dsgn.region
    if not (lo < 0.0 < hi):
        raise DomainError(f"region [{lo}, {hi}] does not straddle 0")
    if abs(lo + hi) <= 1e-9 * max(1.0, abs(hi)):
        raise DomainError("region is symmetric; use symmetrize_binary")
    if -lo > hi:
        mirrored = design([(-c, w) for c, w in dsgn.points], (-hi, -lo))
        out = reduce_asymmetric(model, mirrored)
        back = design([(-c, w) for c, w in out.reduced.points], (lo, hi))
        return ReductionOutcome(reduced=back, certificate=out.certificate, structure=out.structure)

    pts = merge_coincident(dsgn.points)
    if len(pts) <= 1:
        return _unchanged(finalize(pts, dsgn.region))
    d1 = lo
    raw, structure = _asymmetric_core(model, pts, d1)
    out = finalize(raw, dsgn.region)
    structure = _fix_symmetric_tag(out, structure)
    return _certify(model, dsgn, out, structure)


def _asymmetric_core(model: ModelSpec, pts, d1: float):
    bound = -d1  # the symmetric reach of the region's negative side
    zero_w0, pos, neg = _lemma_fold_sides(model, pts)
    combo = _recombine_sides(model, zero_w0, pos, neg)
    if combo is None:
        return [(0.0, zero_w0)], UNCHANGED
    cx, wx, p, zero_w = combo

    if cx <= bound + MERGE_RADIUS:
        # the symmetric result already fits inside [d1, -d1]
        if model.condition_41:
            return _absorb_origin(model, zero_w, cx, wx, p), TWO_SYMMETRIC
        return [(cx, p * wx), (-cx, (1.0 - p) * wx), (0.0, zero_w)], TWO_SYMMETRIC_PLUS_ZERO

    # rebuild from the pre-recombination state: only part of the
    # positive mass may be merged across the origin
    zero_w = zero_w0
    w_d1 = 0.0
    if neg is not None and pos is not None:
        # pin the negative-side mass at -d1 by merging it with just
        # enough of the positive point: the merged location grows
        # continuously with the transferred share
        (cp, wp), (cn, wn) = pos, neg
        lo_c, hi_c = (cn, cp) if cn < cp else (cp, cn)

        def merged_at(share: float) -> tuple[float, float]:
            mass = wn + wp * share
            lo_w = wn if cn < cp else wp * share
            cm, frac = merge_pair(model, 0.0, lo_c, hi_c, lo_w / mass, TYPE_I)
            return cm, frac

        def landing(share: float) -> float:
            return merged_at(share)[0] - bound

        f_lo = landing(1e-14)
        share = 0.0 if f_lo >= 0.0 else _bisect(landing, 1e-14, 1.0, f_lo)
        if share <= 1e-13:
            # the negative mass already sits at the bound
            share, frac, mass = 0.0, 0.0, wn
        else:
            _, frac = merged_at(share)
            mass = wn + wp * share
        zero_w += mass * frac
        mu = mass * (1.0 - frac)
        signed_pair = wp * share * model.psi(2, cp) - wn * model.psi(2, cn)
        denom = mu * model.psi(2, bound)
        p1 = _clamp_unit(0.5 * (signed_pair / denom + 1.0), "endpoint split")
        w_d1 = mu * (1.0 - p1)
        rem_plus = [(bound, mu * p1), (cp, wp * (1.0 - share))]
        rem_plus = [(c, w) for c, w in rem_plus if w > WEIGHT_FLOOR]
        if len(rem_plus) == 2:
            gain, (cx, wx) = _fold(model, rem_plus, 0.0, TYPE_I)
            zero_w += gain
        else:
            cx, wx = rem_plus[0]
    else:
        # all folded mass already sits on the positive side
        cx, wx = (pos if pos is not None else (bound, 0.0))

    if not model.condition_41:
        return [(d1, w_d1), (cx, wx), (0.0, zero_w)], D1_ANCHORED

    if zero_w <= WEIGHT_FLOOR:
        # no origin mass left to absorb; already in the anchored class
        return [(d1, w_d1), (cx, wx)], D1_ANCHORED

    # absorb the origin; land back inside the region if needed
    omega0 = zero_w / (zero_w + wx)
    cx0 = merge_to_single(model, 0.0, cx, omega0, check=False)

    if cx0 <= bound + MERGE_RADIUS:
        # symmetric pair at +/-cx0 plus the d1 mass, all inside
        # [d1, -d1]: rerun the symmetric machinery on that design
        mass = zero_w + wx
        w_plus = _clamp_unit(
            0.5 * (mass + wx * model.psi(2, cx) / model.psi(2, cx0)) / max(mass, 1e-300),
            "symmetric absorb share",
        ) * mass
        inner = [(d1, w_d1), (cx0, w_plus), (-cx0, mass - w_plus)]
        inner = [(c, w) for c, w in merge_coincident(inner) if w > WEIGHT_FLOOR]
        return _symmetrize_core(model, inner)

    # partial origin absorption: merge just enough of cx with the origin
    # mass to land exactly at -d1
    def landing0(share: float) -> float:
        om = zero_w / (zero_w + wx * share)
        return merge_to_single(model, 0.0, cx, om, check=False) - bound

    share0 = _bisect(landing0, 1e-14, 1.0, landing0(1e-14))
    mu = zero_w + wx * share0
    m2_partial = wx * share0 * model.psi(2, cx)
    q_plus = _clamp_unit(
        0.5 * (mu + m2_partial / model.psi(2, bound)) / max(mu, 1e-300), "origin split"
    ) * mu
    q_minus = mu - q_plus
    w_d1 += q_minus
    w_x0 = wx * (1.0 - share0)

    # final transfer: move a q-share of the -d1 mass into the interior
    # point so the off-diagonal moment matches the pre-transfer design
    p2b = model.psi(2, bound)
    p2x = model.psi(2, cx)

    def offdiag(q: float) -> tuple[float, float, float]:
        m = q_plus * q + w_x0
        mix = (q_plus * q * model.psi(1, bound) + w_x0 * model.psi(1, cx)) / m
        cx1 = invert_weight(model, mix, bound, cx)
        h = m * model.psi(2, cx1) - q_plus * (2.0 - q) * p2b - w_x0 * p2x
        return h, cx1, m

    h0 = offdiag(0.0)[0]
    h1, cx1_full, m_full = offdiag(1.0)
    scale = 1.0 + abs(p2b) + abs(p2x)
    if h1 < -1e-9 * scale:
        raise NumericalError("off-diagonal transfer has no root in [0, 1]")
    if h0 > 0.0:
        q_star, cx1, m_final = 0.0, cx, w_x0
    elif h1 <= 0.0:
        q_star, cx1, m_final = 1.0, cx1_full, m_full
    else:
        q_star = _bisect(lambda q: offdiag(q)[0], 0.0, 1.0, h0)
        _, cx1, m_final = offdiag(q_star)
    raw = [(d1, w_d1 + q_plus * (1.0 - q_star)), (cx1, m_final)]
    return raw, D1_ANCHORED


# ---------------------------------------------------------------------------
# typed-region dispatch for the non-parity models
# ---------------------------------------------------------------------------

_SEGMENT_CACHE: dict[str, list[tuple[float, float, str]]] = {}

#: search window for breakpoint-driven segment maps
_SEGMENT_SEARCH = 8.0


def _typed_segments(model: ModelSpec) -> list[tuple[float, float, str]]:
    """Maximal typed intervals for models with interior breakpoints."""
    if model.id in _SEGMENT_CACHE:
        return _SEGMENT_CACHE[model.id]
    center = 0.0
    if "r" in model.params:
        center = math.log(model.params["r"])
    lo = center - _SEGMENT_SEARCH
    hi = center + _SEGMENT_SEARCH
    cuts = [b.c for b in find_breakpoints(model, (lo, hi))]
    bounds = [-math.inf] + cuts + [math.inf]
    segments = []
    for a, b in zip(bounds, bounds[1:]):
        pa = a if math.isfinite(a) else min(b, hi) - 4.0
        pb = b if math.isfinite(b) else max(a, lo) + 4.0
        margin = 0.05 * (pb - pa)
        verdict = _segment_type(model, pa + margin, pb - margin)
        segments.append((a, b, verdict))
    _SEGMENT_CACHE[model.id] = segments
    return segments


def _segment_type(model: ModelSpec, lo: float, hi: float) -> str:
    pos = neg = 0
    for k in range(1, 16):
        c = lo + (hi - lo) * k / 16.0
        _, _, s = classify._product_sign(model, c)
        pos += s > 0
        neg += s < 0
    if pos and not neg:
        return TYPE_II
    if neg and not pos:
        return TYPE_I
    return classify.NEITHER


def _registry_typing(model: ModelSpec, lo: float, hi: float) -> tuple[str, float]:
    """(orientation, anchor) on [lo, hi] per each family's known typing."""
    fam = model.id.split(":")[0]
    if fam == "poisson-loglinear":
        return TYPE_II, hi
    if fam == "michaelis-menten":
        if lo <= 0.0:
            raise DomainError("michaelis-menten region must satisfy 0 < D1")
        return TYPE_II, hi
    if fam == "power":
        if lo <= 0.0:
            raise DomainError("power-weight region must satisfy 0 < D1")
        m = model.params["m"]
        return (TYPE_II, hi) if m > -2.0 else (TYPE_I, lo)
    if fam in ("cloglog", "hedayat"):
        for a, b, verdict in _typed_segments(model):
            if lo >= a - MERGE_RADIUS and hi <= b + MERGE_RADIUS:
                if verdict == TYPE_I:
                    return TYPE_I, lo
                if verdict == TYPE_II:
                    return TYPE_II, hi
                break
        raise UnclassifiableRegionError(
            f"region [{lo}, {hi}] spans a breakpoint of {model.id}; "
            "no single reduction applies"
        )
    raise DomainError(f"no typed reduction registered for {model.id}")


def _reduce_degenerate_power(model: ModelSpec, dsgn: Design) -> ReductionOutcome:
    """Endpoint-pair reduction for power weights with a constant psi.

    The exponent fixes which moment the endpoint mixture must match:
    psi_2 is constant for m = -1 so the psi_1 mixture is used there,
    while m = 0 and m = -2 pin psi_2 to keep the off-diagonal moment.
    """
    lo, hi = dsgn.region
    m = model.params["m"]
    j = 1 if m == -1.0 else 2
    pa, pb = model.psi(j, lo), model.psi(j, hi)
    w_lo = w_hi = 0.0
    for c, w in dsgn.points:
        om = _clamp_unit((pb - model.psi(j, c)) / (pb - pa), "endpoint mixture")
        w_lo += w * om
        w_hi += w * (1.0 - om)
    out = finalize([(lo, w_lo), (hi, w_hi)], dsgn.region)
    return _certify(model, dsgn, out, ENDPOINT_PAIR_UPPER)


def reduce(model: ModelSpec, dsgn: Design) -> ReductionOutcome:
    """Collapse any design to its model/region dominating class.

    Dispatches on parity, region position and the registered interval
    typing; infinite region ends are capped by the classifier's rule.
    """
    lo, hi = cap_region(model, dsgn.region[0], dsgn.region[1])
    if (lo, hi) != dsgn.region:
        # a capped end never excludes actual support
        if dsgn.points:
            lo = min(lo, min(dsgn.support()))
            hi = max(hi, max(dsgn.support()))
        dsgn = design(dsgn.points, (lo, hi))
    pts = merge_coincident(dsgn.points)
    if len(pts) <= 1:
        return _unchanged(finalize(pts, dsgn.region))
    if len(pts) != dsgn.k:
        dsgn = finalize(pts, dsgn.region)

    if model.parity:
        if lo >= -MERGE_RADIUS or hi <= MERGE_RADIUS:
            return reduce_one_sided(model, dsgn)
        if abs(lo + hi) <= 1e-9 * max(1.0, abs(hi)):
            return symmetrize_binary(model, dsgn)
        return reduce_asymmetric(model, dsgn)
    if model.degenerate:
        return _reduce_degenerate_power(model, dsgn)
    orientation, anchor = _registry_typing(model, lo, hi)
    structure = ENDPOINT_PAIR_LOWER if orientation == TYPE_I else ENDPOINT_PAIR_UPPER
    return _collapse_typed(model, dsgn, anchor, orientation, structure)
