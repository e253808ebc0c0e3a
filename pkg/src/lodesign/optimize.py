"""Criterion optimization over reduced support classes.

Once a model/region pair has been reduced, an optimal design lives in a
class with at most three free scalars (support coordinates plus
weights).  The optimizer runs cyclic coordinate ascent with a bracketed
golden-section line search per coordinate, from eight deterministic
starts, and keeps the best result (lowest start index wins ties).  All
criteria are sign-normalized so that larger is better.

D-optimality of a result can be certified independently through the
variance-function bound: for a two-parameter model the scaled variance
d(c) = psi_1(c) (1, c) C^{-1} (1, c)^T of a D-optimal design never
exceeds 2, with equality on the support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

from .classify import cap_region
from .design import Design, finalize
from .errors import DomainError, SingularDesignError
from .infomat import InfoMatrix, c_matrix, conjugate
from .models import ModelSpec, ParamTransform
from .reduce import (
    D1_ANCHORED,
    ENDPOINT_PAIR_LOWER,
    ENDPOINT_PAIR_UPPER,
    TWO_SYMMETRIC,
    TWO_SYMMETRIC_PLUS_ZERO,
    TYPE_I,
    _registry_typing,
)

D_CRIT = "D"
A_CRIT = "A"
E_CRIT = "E"
PHI_P = "phi-p"
C_OPT = "c-optimal"

#: determinant threshold (relative to trace^2) below which a matrix is
#: treated as singular for criterion purposes
SINGULAR_RTOL = 1e-14

#: coordinate-movement convergence threshold
COORD_TOL = 1e-10

_N_STARTS = 8
_MAX_SWEEPS = 60


@dataclass(frozen=True)
class Criterion:
    """An optimality criterion, sign-normalized for maximization.

    kind "D" maximizes det; "A" maximizes -trace of the inverse; "E"
    the smallest eigenvalue; "phi-p" the matrix mean
    (tr(M^p)/2)^(1/p) for p < 0; "c-optimal" maximizes -v^T M^{-1} v.
    An optional transform conjugates the moment matrix before scoring.
    """

    kind: str = D_CRIT
    p: Optional[float] = None
    vector: Optional[tuple[float, float]] = None
    transform: Optional[ParamTransform] = None

    def __post_init__(self):
        if self.kind not in (D_CRIT, A_CRIT, E_CRIT, PHI_P, C_OPT):
            raise DomainError(f"unknown criterion kind {self.kind!r}")
        if self.kind == PHI_P:
            if self.p is None or not self.p < 0.0:
                raise DomainError("phi-p criterion needs p < 0")
        if self.kind == C_OPT and self.vector is None:
            raise DomainError("c-optimal criterion needs a direction vector")


def criterion_value(m: InfoMatrix, crit: Criterion) -> float:
    """Score a PSD matrix under the criterion; larger is better.

    Singular matrices score the criterion's worst value (0 for the
    concave matrix means, -inf for inverse-based criteria) instead of
    raising.
    """
    det = m.det()
    tr = m.trace()
    singular = det <= SINGULAR_RTOL * tr * tr or tr <= 0.0
    if crit.kind == D_CRIT:
        return max(det, 0.0)
    if crit.kind == A_CRIT:
        return -math.inf if singular else -tr / det
    if crit.kind == E_CRIT:
        return max(m.eigenvalues()[0], 0.0)
    if crit.kind == PHI_P:
        if singular:
            return 0.0
        lo, hi = m.eigenvalues()
        if lo <= 0.0:
            return 0.0
        p = float(crit.p)
        return (0.5 * (lo**p + hi**p)) ** (1.0 / p)
    v1, v2 = crit.vector
    if singular:
        return -math.inf
    return -(v1 * v1 * m.m22 - 2.0 * v1 * v2 * m.m12 + v2 * v2 * m.m11) / det


# ---------------------------------------------------------------------------
# support structures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SupportStructure:
    """A reduced support class to optimize over.

    tags: "two-symmetric" (points +/-c), "two-symmetric-plus-zero"
    (+/-c plus an origin atom), "two-with-anchor" (a fixed anchor point
    plus one free point; ``with_origin`` adds an origin atom for the
    binary weights that keep one), and "two-free" (both points free).
    """

    tag: str
    anchor: Optional[float] = None
    with_origin: bool = False


def candidate_structures(model: ModelSpec, region: tuple[float, float]) -> list[SupportStructure]:
    """Support classes that cover the optimum for this model/region."""
    lo, hi = cap_region(model, float(region[0]), float(region[1]))
    if model.parity:
        if lo >= 0.0:
            return [SupportStructure(tag="two-with-anchor", anchor=lo)]
        if hi <= 0.0:
            return [SupportStructure(tag="two-with-anchor", anchor=hi)]
        if abs(lo + hi) <= 1e-9 * max(1.0, abs(hi)):
            if model.condition_41:
                return [SupportStructure(tag="two-symmetric")]
            return [SupportStructure(tag="two-symmetric-plus-zero")]
        anchor = lo if -lo < hi else hi
        if model.condition_41:
            return [
                SupportStructure(tag="two-symmetric"),
                SupportStructure(tag="two-with-anchor", anchor=anchor),
            ]
        return [
            SupportStructure(tag="two-symmetric-plus-zero"),
            SupportStructure(tag="two-with-anchor", anchor=anchor, with_origin=True),
        ]
    orientation, anchor = _registry_typing(model, lo, hi)
    return [SupportStructure(tag="two-with-anchor", anchor=anchor)]


def _structure_box(structure: SupportStructure, lo: float, hi: float):
    """Coordinate boxes and the design builder for a structure."""
    span = hi - lo
    eps = 1e-9 * max(1.0, span)
    if structure.tag == "two-symmetric":
        reach = min(-lo, hi) if lo < 0.0 < hi else hi
        boxes = [(1e-6 * reach, reach), (0.0, 1.0)]

        def build(v):
            c, w = v
            return [(c, w), (-c, 1.0 - w)]

        return boxes, build
    if structure.tag == "two-symmetric-plus-zero":
        reach = min(-lo, hi) if lo < 0.0 < hi else hi
        boxes = [(1e-6 * reach, reach), (0.0, 1.0), (0.0, 1.0)]

        def build(v):
            c, mass, p = v
            return [(c, mass * p), (-c, mass * (1.0 - p)), (0.0, 1.0 - mass)]

        return boxes, build
    if structure.tag == "two-with-anchor":
        a = structure.anchor
        boxes = [(lo, hi), (0.0, 1.0)]
        if structure.with_origin:
            boxes.append((0.0, 1.0))

            def build(v):
                c, wa, t = v
                rest = 1.0 - wa
                return [(a, wa), (c, rest * (1.0 - t)), (0.0, rest * t)]

            return boxes, build

        def build(v):
            c, wa = v
            return [(a, wa), (c, 1.0 - wa)]

        return boxes, build
    if structure.tag == "two-free":
        boxes = [(lo, hi), (lo, hi), (0.0, 1.0)]

        def build(v):
            c1, c2, w = v
            return [(c1, w), (c2, 1.0 - w)]

        return boxes, build
    raise DomainError(f"unknown structure tag {structure.tag!r}")


# ---------------------------------------------------------------------------
# scalar and coordinate search
# ---------------------------------------------------------------------------

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _max_scalar(f: Callable[[float], float], lo: float, hi: float, tol: float) -> tuple[float, float]:
    """Maximize f on [lo, hi]: coarse scan, then golden section in the
    best cell.  Deterministic; returns (argmax, value)."""
    n = 32
    xs = [lo + (hi - lo) * k / n for k in range(n + 1)]
    vals = [f(x) for x in xs]
    best = max(range(n + 1), key=lambda i: (vals[i], -i))
    a = xs[max(best - 1, 0)]
    b = xs[min(best + 1, n)]
    x1 = b - _INVPHI * (b - a)
    x2 = a + _INVPHI * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INVPHI * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INVPHI * (b - a)
            f1 = f(x1)
    xm = 0.5 * (a + b)
    fm = f(xm)
    cands = [(vals[best], xs[best]), (f1, x1), (f2, x2), (fm, xm)]
    fbest, xbest = max(cands, key=lambda t: t[0])
    return xbest, fbest


def _coordinate_ascent(objective, boxes, start_fracs):
    x = [lo + (hi - lo) * f for (lo, hi), f in zip(boxes, start_fracs)]

    def at(coord, t):
        y = list(x)
        y[coord] = t
        return objective(y)

    fx = objective(x)
    for _ in range(_MAX_SWEEPS):
        moved = 0.0
        for coord, (lo, hi) in enumerate(boxes):
            t, ft = _max_scalar(lambda u: at(coord, u), lo, hi, COORD_TOL)
            if ft > fx:
                moved = max(moved, abs(t - x[coord]))
                x[coord] = t
                fx = ft
        if moved < COORD_TOL:
            break
    return x, fx


@dataclass(frozen=True)
class OptimizationResult:
    design: Design
    value: float
    structure: SupportStructure


def _optimize_objective(
    model: ModelSpec,
    region: tuple[float, float],
    structures: list[SupportStructure],
    score: Callable[[Design], float],
) -> OptimizationResult:
    lo, hi = region
    if hi - lo <= 1e-12 * max(1.0, abs(hi)):
        raise DomainError(f"region [{lo}, {hi}] is degenerate")
    best: Optional[OptimizationResult] = None
    for structure in structures:
        boxes, build = _structure_box(structure, lo, hi)

        def objective(v):
            try:
                d = finalize(build(v), (lo, hi))
            except DomainError:
                return -math.inf
            return score(d)

        for start in range(_N_STARTS):
            frac = (2 * start + 1) / (2 * _N_STARTS)
            x, fx = _coordinate_ascent(objective, boxes, [frac] * len(boxes))
            if best is None or fx > best.value:
                best = OptimizationResult(
                    design=finalize(build(x), (lo, hi)), value=fx, structure=structure
                )
    if best is None or not math.isfinite(best.value):
        raise DomainError("no admissible design found in the reduced class")
    return best


def optimize(
    model: ModelSpec,
    region: tuple[float, float],
    alpha: float,
    beta: float,
    crit: Criterion,
    structure: Optional[SupportStructure] = None,
) -> OptimizationResult:
    """Best design in the reduced class under the criterion.

    When no structure is given, every candidate class for the
    model/region is searched and the best result returned.
    """
    return augment_multistage(None, model, region, alpha, beta, crit, 1.0, structure)


def augment_multistage(
    d1: Optional[Design],
    model: ModelSpec,
    region: tuple[float, float],
    alpha: float,
    beta: float,
    crit: Criterion,
    new_mass: float,
    structure: Optional[SupportStructure] = None,
) -> OptimizationResult:
    """Optimal second stage given a fixed first-stage design.

    The combined moment matrix (1-new_mass) C_first + new_mass C_second
    is scored under the criterion; the second stage may be restricted
    to the model/region's reduced class because dominance of its moment
    matrix transfers through the fixed summand.  An empty first stage
    with new_mass = 1 is exactly single-stage optimization.
    """
    if not (0.0 < new_mass <= 1.0):
        raise DomainError(f"new_mass must lie in (0, 1], got {new_mass!r}")
    lo, hi = cap_region(model, float(region[0]), float(region[1]))
    if d1 is not None and d1.points:
        fixed = c_matrix(d1, model).scaled(1.0 - new_mass)
    else:
        fixed = InfoMatrix(0.0, 0.0, 0.0)
    structures = [structure] if structure is not None else candidate_structures(model, (lo, hi))

    def score(d: Design) -> float:
        cm = c_matrix(d, model).scaled(new_mass)
        total = fixed + cm
        return criterion_value(conjugate(total, model, alpha, beta, crit.transform), crit)

    return _optimize_objective(model, (lo, hi), structures, score)


# ---------------------------------------------------------------------------
# equivalence-theorem check for D-optimality
# ---------------------------------------------------------------------------

class VerificationReport(NamedTuple):
    max_variance: float
    argmax: float
    support_variances: tuple[float, ...]
    certified: bool


def verify_equivalence_D(
    dsgn: Design,
    model: ModelSpec,
    region: tuple[float, float],
    grid_n: int = 2048,
) -> VerificationReport:
    """Scan the scaled variance function over the region.

    The design is D-optimal on the region exactly when the maximum is 2
    (two parameters), attained on the support; ``certified`` applies a
    1e-6 tolerance both ways.
    """
    lo, hi = cap_region(model, float(region[0]), float(region[1]))
    cm = c_matrix(dsgn, model)
    det = cm.det()
    if det <= SINGULAR_RTOL * cm.trace() ** 2:
        raise SingularDesignError("design is singular; variance function undefined")

    def variance(c: float) -> float:
        try:
            w1 = model.psi(1, c)
        except DomainError:
            return -math.inf
        return w1 * (cm.m22 - 2.0 * c * cm.m12 + c * c * cm.m11) / det

    xs = [lo + (hi - lo) * k / grid_n for k in range(grid_n + 1)]
    vals = [variance(x) for x in xs]
    best = max(range(grid_n + 1), key=lambda i: (vals[i], -i))
    a = xs[max(best - 1, 0)]
    b = xs[min(best + 1, grid_n)]
    argmax, vmax = _max_scalar(variance, a, b, 1e-12)
    support_vars = tuple(variance(c) for c in dsgn.support())
    certified = vmax <= 2.0 + 1e-6 and all(abs(v - 2.0) <= 1e-6 for v in support_vars)
    return VerificationReport(
        max_variance=vmax, argmax=argmax, support_variances=support_vars, certified=certified
    )
