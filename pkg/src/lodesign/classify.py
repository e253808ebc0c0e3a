"""Interval-type classification of a model's weight triple.

A triple (psi_1, psi_2, psi_3) is *type I* on [A, B] when

    psi_1' * (psi_2'/psi_1')' * ((psi_3'/psi_1')' / (psi_2'/psi_1')')' < 0

for every c in (A, B], together with a vanishing boundary limit of
(psi_2'/psi_1') * (psi_1(A) - psi_1(c)) as c decreases to A.  *Type II*
is the mirror image: the product is positive on [A, B) and the limit is
taken at B.  A type I verdict needs the lower end finite; type II needs
the upper end finite.

Everything here reduces to the base weight w and its first three
derivatives.  Writing N_j = psi_j'' psi_1' - psi_j' psi_1'', the two
inner ratio derivatives are N_2/psi_1'^2 and N_3/psi_1'^2, their
quotient is simply N_3/N_2, and the outermost derivative follows by one
more quotient rule.  The stack is evaluated in closed form from
(w, w', w'', w'''), with w'' and w''' obtained by Richardson-extrapolated
central differences whose steps track the local variation length
|w/w'|.  All quantities are normalized by w(c), which keeps products
representable even where the weight has decayed below 1e-150.

Sign decisions are guarded two ways.  Each factor carries the magnitude
scale of the cancelling terms that produced it, and must exceed a small
multiple of that scale to count as signed.  The noisiest factor (the
outer quotient-rule derivative) must additionally keep its sign when
all difference steps are halved.  Points failing either guard are
recorded as inconclusive rather than signed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .errors import DomainError
from .models import KINK_RADIUS, ModelSpec
from .numdiff import richardson, second_richardson, third_richardson

TYPE_I = "type-I"
TYPE_II = "type-II"
NEITHER = "neither"

#: default number of interior grid points for sign checks
DEFAULT_GRID_N = 512

#: relative sign floor against the local cancellation scale
SIGN_RTOL = 1e-11

#: safety multiplier on propagated roundoff/truncation floors
FLOOR_SAFETY = 3.0

#: grid points this close to an |c|-kink are not differenced
KINK_GRID_FLOOR = 1e-3

#: cap for infinite interval ends when the weight does not decay
HARD_CAP = 30.0

#: weight decay threshold used when capping infinite ends
DECAY_RTOL = 1e-12

#: farthest an infinite end is chased looking for weight decay
MAX_CAP_DISTANCE = 2e4


# ---------------------------------------------------------------------------
# derivative stack
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Stack:
    """Normalized derivative expressions at a point, with noise floors.

    Each ``*_floor`` bounds the numerical uncertainty of its expression,
    propagated from the relative error of the differenced derivatives
    through every cancelling combination.  An expression counts as
    signed only when its magnitude clears the floor.
    """

    c: float
    d1: float          # w'/w
    d1_floor: float
    r2p: float         # (psi_2'/psi_1')'
    r2p_floor: float
    r3p: float         # (psi_3'/psi_1')'
    r3p_floor: float
    g: float           # r3p / r2p
    gp: float          # d/dc of g
    gp_floor: float


def _free_room(model: ModelSpec, c: float) -> float:
    """Distance from c to the nearest point where differencing breaks."""
    room = math.inf
    if model.kink_at_zero:
        room = min(room, abs(c))
    lo, hi = model.natural_domain
    if math.isfinite(lo):
        room = min(room, c - lo)
    if math.isfinite(hi):
        room = min(room, hi - c)
    return room


def _point_stack(model: ModelSpec, c: float, step_factor: float = 1.0) -> Optional[_Stack]:
    """Evaluate the condition stack at c; None where it cannot be built."""
    try:
        w = model.weight(c)
        d1 = model.dweight_at(c)
    except (DomainError, OverflowError):
        return None
    if not (w > 0.0) or not math.isfinite(w) or not math.isfinite(d1):
        return None

    varlen = max(1.0, abs(c))
    if d1 != 0.0:
        varlen = min(varlen, 3.0 * abs(w / d1))
    varlen = max(varlen, 1e-3)

    room = _free_room(model, c)
    cap = room / 8.0 if math.isfinite(room) else math.inf

    def step(h: float) -> float:
        return min(h, cap) * step_factor

    try:
        if model.dweight is not None:
            h2, h3 = step(1e-5 * varlen), step(5e-3 * varlen)
            if h2 <= 0.0 or h3 <= 0.0:
                return None
            d2 = richardson(model.dweight, c, h2)
            d3 = second_richardson(model.dweight, c, h3)
        else:
            h2, h3 = step(1e-2 * varlen), step(2e-2 * varlen)
            if h2 <= 0.0 or h3 <= 0.0:
                return None
            d2 = second_richardson(model.weight, c, h2)
            d3 = third_richardson(model.weight, c, h3)
    except (DomainError, OverflowError):
        return None
    if not (math.isfinite(d2) and math.isfinite(d3)):
        return None

    # normalize by w: every psi-derivative is linear in the weight scale,
    # and the ratio derivatives are scale-invariant
    n1, n2, n3 = d1 / w, d2 / w, d3 / w

    # absolute error estimates for the normalized derivatives: roundoff
    # of the actual stencils plus a truncation allowance
    if model.dweight is None:
        h1 = max(1e-6, 1e-6 * abs(c))
        if model.kink_at_zero:
            h1 = min(h1, abs(c) / 4.0)
        e1 = 6e-16 / h1 + 1e-12 * abs(n1)
        e2 = 2e-15 / (h2 * h2) + 1e-8 * abs(n2)
        e3 = 3e-15 / (h3 * h3 * h3) + 3e-7 * abs(n3)
    else:
        e1 = 1e-13 * (1.0 + abs(n1))
        e2 = 2e-16 * (abs(n1) / h2 + abs(n2)) + 1e-10 * abs(n2)
        e3 = 4e-16 * (abs(n1) / (h3 * h3) + abs(n2) / h3) + 1e-8 * abs(n3)

    p1p, p1pp, p1ppp = n1, n2, n3
    p2p, p2pp, p2ppp = 1.0 + c * n1, 2.0 * n1 + c * n2, 3.0 * n2 + c * n3
    p3p = 2.0 * c + c * c * n1
    p3pp = 2.0 + 4.0 * c * n1 + c * c * n2
    p3ppp = 6.0 * n1 + 6.0 * c * n2 + c * c * n3

    if p1p == 0.0:
        return None
    den = p1p * p1p
    num2 = p2pp * p1p - p2p * p1pp
    num3 = p3pp * p1p - p3p * p1pp
    dnum2 = p2ppp * p1p - p2p * p1ppp
    dnum3 = p3ppp * p1p - p3p * p1ppp
    if num2 == 0.0:
        return None

    # first-order error propagation through every cancelling combination
    ac, cc = abs(c), c * c
    ep2p, ep2pp, ep2ppp = ac * e1, 2.0 * e1 + ac * e2, 3.0 * e2 + ac * e3
    ep3p, ep3pp = cc * e1, 4.0 * ac * e1 + cc * e2
    ep3ppp = 6.0 * e1 + 6.0 * ac * e2 + cc * e3

    def _perr(a, ea, b, eb):
        return abs(a) * eb + abs(b) * ea

    e_num2 = _perr(p2pp, ep2pp, p1p, e1) + _perr(p2p, ep2p, p1pp, e2)
    e_num3 = _perr(p3pp, ep3pp, p1p, e1) + _perr(p3p, ep3p, p1pp, e2)
    e_dnum2 = _perr(p2ppp, ep2ppp, p1p, e1) + _perr(p2p, ep2p, p1ppp, e3)
    e_dnum3 = _perr(p3ppp, ep3ppp, p1p, e1) + _perr(p3p, ep3p, p1ppp, e3)

    r2p = num2 / den
    r3p = num3 / den
    g = num3 / num2
    gp = (dnum3 * num2 - num3 * dnum2) / (num2 * num2)

    rel_den = 2.0 * e1 / abs(p1p)
    r2p_floor = FLOOR_SAFETY * (e_num2 / den + abs(r2p) * rel_den) + SIGN_RTOL * abs(r2p)
    r3p_floor = FLOOR_SAFETY * (e_num3 / den + abs(r3p) * rel_den) + SIGN_RTOL * abs(r3p)
    gp_err = (
        abs(dnum3) * e_num2
        + abs(num2) * e_dnum3
        + abs(num3) * e_dnum2
        + abs(dnum2) * e_num3
    ) / (num2 * num2) + abs(gp) * 2.0 * e_num2 / abs(num2)
    gp_floor = FLOOR_SAFETY * gp_err + SIGN_RTOL * abs(gp)

    vals = (r2p, r3p, g, gp, gp_floor, r2p_floor, r3p_floor)
    if not all(math.isfinite(v) for v in vals):
        return None
    return _Stack(
        c=c,
        d1=n1,
        d1_floor=4.0 * e1,
        r2p=r2p,
        r2p_floor=r2p_floor,
        r3p=r3p,
        r3p_floor=r3p_floor,
        g=g,
        gp=gp,
        gp_floor=gp_floor,
    )


def _sgn(value: float, floor: float) -> int:
    if abs(value) <= floor + 1e-300:
        return 0
    return 1 if value > 0.0 else -1


def _product_sign(model: ModelSpec, c: float) -> tuple[int, int, int]:
    """Signs of (psi_1', ratio-second, full product) at c; 0 = inconclusive.

    The outer derivative sign must additionally survive halving every
    difference step; the inner factors are covered by their noise
    floors alone.
    """
    base = _point_stack(model, c)
    if base is None:
        return 0, 0, 0
    s_d1 = _sgn(base.d1, base.d1_floor)
    s_r2p = _sgn(base.r2p, base.r2p_floor)
    s_gp = _sgn(base.gp, base.gp_floor)
    if s_gp != 0:
        half = _point_stack(model, c, step_factor=0.5)
        if half is None or _sgn(half.gp, half.gp_floor) != s_gp:
            s_gp = 0
    product = s_d1 * s_r2p * s_gp
    return s_d1, s_r2p, product


def _r3p_sign(model: ModelSpec, c: float) -> int:
    base = _point_stack(model, c)
    if base is None:
        return 0
    s = _sgn(base.r3p, base.r3p_floor)
    if s == 0:
        return 0
    half = _point_stack(model, c, step_factor=0.5)
    if half is None or _sgn(half.r3p, half.r3p_floor) != s:
        return 0
    return s


# ---------------------------------------------------------------------------
# region capping
# ---------------------------------------------------------------------------

def cap_region(model: ModelSpec, lo: float, hi: float) -> tuple[float, float]:
    """Replace infinite interval ends by finite working bounds.

    An infinite end is walked outward from the finite side until the
    weight decays below ``DECAY_RTOL`` times the running maximum; if no
    such decay shows up within ``MAX_CAP_DISTANCE``, the end is capped
    ``HARD_CAP`` units out instead.
    """
    if math.isnan(lo) or math.isnan(hi):
        raise DomainError("region ends must not be NaN")
    if lo >= hi:
        raise DomainError(f"empty region [{lo}, {hi}]")
    dlo, dhi = model.natural_domain
    if math.isfinite(lo) and not (dlo <= lo < dhi):
        raise DomainError(f"region end {lo!r} outside natural domain of {model.id}")
    if math.isfinite(hi) and not (dlo < hi <= dhi):
        raise DomainError(f"region end {hi!r} outside natural domain of {model.id}")
    new_lo, new_hi = lo, hi
    if math.isinf(hi):
        ref = lo if math.isfinite(lo) else 0.0
        if math.isfinite(dlo):
            ref = max(ref, dlo + 1e-6)
        new_hi = _walk_cap(model, ref, +1.0)
    if math.isinf(lo):
        ref = new_hi
        new_lo = _walk_cap(model, ref, -1.0)
        if math.isfinite(dlo):
            new_lo = max(new_lo, dlo + 1e-9 * max(1.0, abs(dlo)))
    return new_lo, new_hi


def _walk_cap(model: ModelSpec, ref: float, direction: float) -> float:
    step = 0.25
    best = 0.0
    c = ref
    while abs(c - ref) < MAX_CAP_DISTANCE:
        c += direction * step
        try:
            w = model.weight(c)
        except (DomainError, OverflowError):
            return c - direction * step
        if not math.isfinite(w):
            return c - direction * step
        best = max(best, w)
        if w < DECAY_RTOL * best:
            return c
        step *= 1.02
    return ref + direction * HARD_CAP


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Diagnostics:
    """Per-grid-point sign traces backing a verdict."""

    grid: tuple[float, ...]
    sign_psi1_prime: tuple[int, ...]
    sign_ratio_second: tuple[int, ...]   # (psi_2'/psi_1')'
    sign_product: tuple[int, ...]        # the full type condition expression
    first_violation: Optional[float] = None
    note: str = ""


@dataclass(frozen=True)
class Classification:
    """Verdict for one model on one interval."""

    interval: tuple[float, float]
    verdict: str
    diagnostics: Diagnostics
    condition_41: bool

    @property
    def is_type_i(self) -> bool:
        return self.verdict == TYPE_I

    @property
    def is_type_ii(self) -> bool:
        return self.verdict == TYPE_II


def _interior_grid(lo: float, hi: float, n: int, kink: bool) -> list[float]:
    """Interior points clustered geometrically toward both ends."""
    span = hi - lo
    half = max(n // 2, 8)
    u0, u1 = -7.0, math.log10(0.5)
    pts = []
    for k in range(half):
        u = u0 + (u1 - u0) * k / (half - 1)
        off = span * 10.0**u
        pts.append(lo + off)
        pts.append(hi - off)
    if kink:
        pts = [c for c in pts if abs(c) > KINK_GRID_FLOOR]
    pts = sorted(set(pts))
    return [c for c in pts if lo < c < hi]


#: absolute probe offsets for the boundary limit condition
_LIMIT_OFFSETS = tuple(10.0 ** (-k) for k in range(2, 8))


def _limit_probe(model: ModelSpec, at: float, away: float, span: float) -> tuple[bool, str]:
    """Numeric surrogate for the boundary limit condition.

    Probes (psi_2'/psi_1')(c) * (psi_1(at) - psi_1(c)) at offsets
    1e-2 .. 1e-7 from the finite end ``at`` (skipping offsets that fall
    outside the interval), and requires the magnitudes to decay
    monotonically, within a 1.5x jitter factor, to below 1e-6 relative
    to the local psi scale.
    """
    direction = math.copysign(1.0, away - at)
    try:
        w_at = model.weight(at)
    except (DomainError, OverflowError):
        return False, f"weight undefined at interval end {at!r}"
    scale = 1.0 + abs(w_at) + abs(at * w_at)
    offsets = [o for o in _LIMIT_OFFSETS if o < 0.5 * span]
    k = 8
    while len(offsets) < 4 and 10.0**-k > 1e-14:
        offsets.append(10.0**-k)
        k += 1
    values = []
    for off in offsets:
        c = at + direction * off
        if model.kink_at_zero and abs(c) <= KINK_RADIUS:
            continue
        try:
            w = model.weight(c)
            d1 = model.dweight_at(c)
        except (DomainError, OverflowError):
            continue
        if d1 == 0.0:
            continue
        ratio = (w + c * d1) / d1
        values.append(abs(ratio * (w_at - w)))
        scale = max(scale, 1.0 + abs(w) + abs(c * w))
    if len(values) < 3:
        return False, "limit probes unavailable"
    for a, b in zip(values, values[1:]):
        if b > 1.5 * a + 1e-300:
            return False, "limit probe magnitudes not decaying"
    if values[-1] > 1e-6 * scale:
        return False, f"limit probe {values[-1]:.3g} above 1e-6 relative floor"
    return True, ""


def check_type(
    model: ModelSpec,
    interval: tuple[float, float],
    grid_n: int = DEFAULT_GRID_N,
) -> Classification:
    """Classify the model's weight triple on the interval.

    The interval may have infinite ends; they are capped for the grid
    sweep, but a type I verdict still requires the *original* lower end
    to be finite, and type II the upper end.
    """
    if grid_n < 64:
        raise DomainError(f"grid_n must be at least 64, got {grid_n}")
    raw_lo, raw_hi = float(interval[0]), float(interval[1])
    lo, hi = cap_region(model, raw_lo, raw_hi)
    span = hi - lo
    grid = _interior_grid(lo, hi, grid_n, model.kink_at_zero)

    s1, s2, sp = [], [], []
    for c in grid:
        a, b, p = _product_sign(model, c)
        s1.append(a)
        s2.append(b)
        sp.append(p)

    pos = sum(1 for s in sp if s > 0)
    neg = sum(1 for s in sp if s < 0)
    first_violation = None
    note = ""
    if pos and neg:
        majority = 1 if pos >= neg else -1
        first_violation = next(c for c, s in zip(grid, sp) if s == -majority)
        verdict = NEITHER
        note = "mixed condition signs"
    elif not pos and not neg:
        verdict = NEITHER
        note = "no conclusively signed grid points"
    elif neg:
        ok, why = (
            _limit_probe(model, raw_lo, hi, span)
            if math.isfinite(raw_lo)
            else (False, "lower end infinite")
        )
        verdict = TYPE_I if ok else NEITHER
        note = why
    else:
        ok, why = (
            _limit_probe(model, raw_hi, lo, span)
            if math.isfinite(raw_hi)
            else (False, "upper end infinite")
        )
        verdict = TYPE_II if ok else NEITHER
        note = why

    cond41 = _condition_41_on_grid(model, grid)
    diag = Diagnostics(
        grid=tuple(grid),
        sign_psi1_prime=tuple(s1),
        sign_ratio_second=tuple(s2),
        sign_product=tuple(sp),
        first_violation=first_violation,
        note=note,
    )
    return Classification(interval=(lo, hi), verdict=verdict, diagnostics=diag, condition_41=cond41)


def _condition_41_on_grid(model: ModelSpec, grid: list[float]) -> bool:
    seen = False
    for c in grid:
        s = _r3p_sign(model, c)
        if s < 0:
            return False
        seen = seen or s > 0
    return seen


def check_condition_41(model: ModelSpec, interval: tuple[float, float], grid_n: int = 256) -> bool:
    """True iff (psi_3'/psi_1')' > 0 at every conclusive grid point."""
    lo, hi = cap_region(model, float(interval[0]), float(interval[1]))
    grid = _interior_grid(lo, hi, grid_n, model.kink_at_zero)
    return _condition_41_on_grid(model, grid)


# ---------------------------------------------------------------------------
# breakpoints
# ---------------------------------------------------------------------------

PSI1_PRIME_ZERO = "psi1_prime_zero"
RATIO_CONDITION_ZERO = "ratio_condition_zero"

#: pole-adjacent margin excluded from ratio-condition scans
_POLE_MARGIN = 0.02


@dataclass(frozen=True)
class Breakpoint:
    c: float
    kind: str


def find_breakpoints(
    model: ModelSpec,
    search_interval: tuple[float, float],
    n_scan: int = 800,
) -> list[Breakpoint]:
    """Locate sign changes of w' and of the ratio-of-ratios derivative.

    Scan-and-bisect on a uniform grid, each root refined to 1e-9 and
    then polished by a small fixed-offset linear fit, which keeps the
    reported location stable under rescanning at different densities.
    """
    lo, hi = float(search_interval[0]), float(search_interval[1])
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
        raise DomainError(f"search interval must be finite and ordered, got {search_interval!r}")
    dlo, dhi = model.natural_domain
    if math.isfinite(dlo):
        lo = max(lo, dlo + 1e-9 * max(1.0, abs(dlo)))
    if math.isfinite(dhi):
        hi = min(hi, dhi - 1e-9 * max(1.0, abs(dhi)))
    if lo >= hi:
        return []

    def dw(c: float) -> Optional[float]:
        try:
            return model.dweight_at(c)
        except (DomainError, OverflowError):
            return None

    roots: list[Breakpoint] = []
    for r in _scan_roots(dw, lo, hi, n_scan, model):
        r = _polish_linear(dw, r, 1e-5 * max(1.0, abs(r)))
        roots.append(Breakpoint(c=r, kind=PSI1_PRIME_ZERO))

    def gp(c: float) -> Optional[float]:
        st = _point_stack(model, c)
        return None if st is None else st.gp

    # scan the ratio condition separately on each pole-free segment
    cuts = [lo] + [b.c for b in roots] + [hi]
    for a, b in zip(cuts, cuts[1:]):
        margin = _POLE_MARGIN * max(1.0, abs(a), abs(b))
        seg_lo = a + (margin if a != lo else (b - a) * 1e-9)
        seg_hi = b - (margin if b != hi else (b - a) * 1e-9)
        if seg_lo >= seg_hi:
            continue
        seg_n = max(64, int(n_scan * (seg_hi - seg_lo) / (hi - lo)))
        for r in _scan_roots(gp, seg_lo, seg_hi, seg_n, model):
            r = _polish_linear(gp, r, 1e-4 * max(1.0, abs(r)))
            roots.append(Breakpoint(c=r, kind=RATIO_CONDITION_ZERO))

    roots.sort(key=lambda b: b.c)
    deduped: list[Breakpoint] = []
    for b in roots:
        if deduped and abs(b.c - deduped[-1].c) < 1e-6 * max(1.0, abs(b.c)):
            continue
        deduped.append(b)
    return deduped


def _scan_roots(f, lo: float, hi: float, n: int, model: ModelSpec) -> list[float]:
    xs = [lo + (hi - lo) * k / n for k in range(n + 1)]
    if model.kink_at_zero:
        gap = max(KINK_GRID_FLOOR, KINK_RADIUS)
        inside = [x for x in xs if abs(x) > gap]
        if lo < -gap and gap < hi:
            inside.extend([-gap, gap])
        xs = sorted(inside)
    vals = [f(x) for x in xs]
    found = []
    for (a, fa), (b, fb) in zip(zip(xs, vals), zip(xs[1:], vals[1:])):
        if fa is None or fb is None or fa == 0.0:
            continue
        if math.copysign(1.0, fa) != math.copysign(1.0, fb):
            found.append(_bisect_sign_change(f, a, b, fa))
    return found


def _bisect_sign_change(f, a: float, b: float, fa: float, tol: float = 1e-9) -> float:
    for _ in range(200):
        if b - a <= tol:
            break
        m = 0.5 * (a + b)
        fm = f(m)
        if fm is None or fm == 0.0:
            break
        if math.copysign(1.0, fm) == math.copysign(1.0, fa):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def _polish_linear(f, root: float, spread: float) -> float:
    """Least-squares line through samples at fixed offsets; its root.

    Sampling offsets do not depend on the incoming root beyond its
    coarse location, so rescans that land anywhere inside the noise
    band of the raw sign change polish to the same answer.
    """
    offs = [k * spread for k in (-4, -3, -2, -1, 1, 2, 3, 4)]
    xs, ys = [], []
    for o in offs:
        v = f(root + o)
        if v is None:
            continue
        xs.append(o)
        ys.append(v)
    if len(xs) < 4:
        return root
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    if sxx == 0.0 or sxy == 0.0:
        return root
    slope = sxy / sxx
    fitted = root + mx - my / slope
    if abs(fitted - root) > 8.0 * spread:
        return root
    return fitted
