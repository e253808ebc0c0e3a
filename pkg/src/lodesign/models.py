"""Model registry: canonical weight triples for two-parameter models.

Every supported model contributes a triple of moment weights
(psi_1, psi_2, psi_3) of a scalar canonical variable c, all of the form

    psi_j(c) = c**(j-1) * w(c)

for a base weight w.  The registry stores w, its first derivative
(analytic where a closed form is cheap and stable, finite differences
otherwise), the link between the design variable x and c, and the
parameter matrix A(alpha, beta) that conjugates the canonical moment
matrix into the Fisher information for (alpha, beta).

Base weights
------------
logistic            w(c) = e^c / (1 + e^c)^2
probit              w(c) = phi(c)^2 / (Phi(c) Phi(-c)),   stable log form
double-exponential  w(c) from the Laplace c.d.f. via ``binary_weight``
double-reciprocal   w(c) from P(c) = (1 + c/(1+|c|))/2 via ``binary_weight``
cloglog             w(c) = e^{2c} / (e^{e^c} - 1)
poisson-loglinear   w(c) = e^c
michaelis-menten    w(c) = c^2          (c > 0)
power(m)            w(c) = c^m          (c > 0)
hedayat(r)          w(c) = e^{2rc} / (1 + e^c)^{2r+2}     (r > 0)

The four binary-response weights (logistic, probit, double-exponential,
double-reciprocal) are even in c; for them psi_1 is even, psi_2 odd and
psi_3 even, which is what the symmetrizing reductions exploit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import log_ndtr

from .errors import DomainError
from .numdiff import richardson

_LN_2PI = math.log(2.0 * math.pi)

#: derivative evaluations are undefined this close to an |c|-kink
KINK_RADIUS = 1e-8


# ---------------------------------------------------------------------------
# generic binary weight
# ---------------------------------------------------------------------------

def binary_weight(dist, c: float) -> float:
    """Information weight of a binary-response model at canonical point c.

    ``dist`` must expose ``cdf`` and ``pdf`` callables; an optional
    ``sf`` (survival function) is used for precision in the upper tail.
    Returns pdf(c)^2 / (cdf(c) * (1 - cdf(c))).

    Raises DomainError when the c.d.f. saturates to 0 or 1 in floating
    point, which signals that c is outside the numerically safe range.
    """
    p = dist.cdf(c)
    q = dist.sf(c) if hasattr(dist, "sf") else 1.0 - p
    if p <= 0.0 or q <= 0.0:
        raise DomainError(f"c.d.f. saturated at c={c!r}; weight undefined")
    d = dist.pdf(c)
    return (d * d) / (p * q)


class _LaplaceCdf:
    """Laplace c.d.f./p.d.f. pair: P(c) = 1/2 + sign(c)(1 - e^{-|c|})/2."""

    @staticmethod
    def cdf(c):
        return 0.5 * math.exp(c) if c < 0.0 else 1.0 - 0.5 * math.exp(-c)

    @staticmethod
    def sf(c):
        return _LaplaceCdf.cdf(-c)

    @staticmethod
    def pdf(c):
        return 0.5 * math.exp(-abs(c))


class _ReciprocalCdf:
    """c.d.f./p.d.f. pair for P(c) = (1 + c/(1+|c|))/2."""

    @staticmethod
    def cdf(c):
        return 0.5 * (1.0 + c / (1.0 + abs(c)))

    @staticmethod
    def sf(c):
        return _ReciprocalCdf.cdf(-c)

    @staticmethod
    def pdf(c):
        t = 1.0 + abs(c)
        return 0.5 / (t * t)


LAPLACE_CDF = _LaplaceCdf()
RECIPROCAL_CDF = _ReciprocalCdf()


# ---------------------------------------------------------------------------
# base weights
# ---------------------------------------------------------------------------

def _logistic_weight(c: float) -> float:
    # e^c/(1+e^c)^2 written in the decaying exponential for both tails
    e = math.exp(-abs(c))
    t = 1.0 + e
    return e / (t * t)


def _logistic_dweight(c: float) -> float:
    return -math.tanh(0.5 * c) * _logistic_weight(c)


def _probit_weight(c: float) -> float:
    # phi(c)^2 / (Phi(c) Phi(-c)) evaluated on the log scale; log_ndtr is
    # the erfc-backed stable log c.d.f., accurate far into either tail.
    return math.exp(-c * c - _LN_2PI - log_ndtr(c) - log_ndtr(-c))


def _double_exponential_weight(c: float) -> float:
    return binary_weight(LAPLACE_CDF, c)


def _double_reciprocal_weight(c: float) -> float:
    return binary_weight(RECIPROCAL_CDF, c)


def _cloglog_weight(c: float) -> float:
    # e^{2c} / (e^{e^c} - 1) = e^{2c - e^c} / (1 - e^{-e^c})
    u = math.exp(min(c, 700.0))
    return math.exp(2.0 * c - u) / -math.expm1(-u)


def _cloglog_dweight(c: float) -> float:
    u = math.exp(min(c, 700.0))
    # d log w / dc = 2 - e^c / (1 - e^{-e^c})
    return _cloglog_weight(c) * (2.0 - u / -math.expm1(-u))


def _poisson_weight(c: float) -> float:
    return math.exp(c)


def _softplus(c: float) -> float:
    if c > 34.0:
        return c + math.log1p(math.exp(-c))
    return math.log1p(math.exp(c))


def _hedayat_weight(r: float) -> Callable[[float], float]:
    def weight(c: float) -> float:
        return math.exp(2.0 * r * c - (2.0 * r + 2.0) * _softplus(c))

    return weight


def _power_weight(m: float) -> Callable[[float], float]:
    def weight(c: float) -> float:
        if c <= 0.0:
            raise DomainError(f"power weight needs c > 0, got {c!r}")
        return c**m

    return weight


def _power_dweight(m: float) -> Callable[[float], float]:
    def dweight(c: float) -> float:
        if c <= 0.0:
            raise DomainError(f"power weight needs c > 0, got {c!r}")
        return m * c ** (m - 1.0)

    return dweight


def _mm_weight(c: float) -> float:
    if c <= 0.0:
        raise DomainError(f"michaelis-menten canonical variable needs c > 0, got {c!r}")
    return c * c


def _mm_dweight(c: float) -> float:
    if c <= 0.0:
        raise DomainError(f"michaelis-menten canonical variable needs c > 0, got {c!r}")
    return 2.0 * c


# ---------------------------------------------------------------------------
# model spec
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelSpec:
    """A registered model: base weight, derivative, link and metadata.

    ``weight`` is the base w(c); the full triple is recovered as
    psi_j(c) = c**(j-1) w(c).  ``dweight`` is dw/dc.  ``parity`` marks
    the even binary weights.  ``kink_at_zero`` marks |c|-based weights
    whose derivative does not exist at the origin.  ``condition_41``
    records that (psi_3'/psi_1')' > 0 holds for all c > 0, which
    licenses the final two-point symmetric collapse.
    """

    id: str
    weight: Callable[[float], float]
    dweight: Optional[Callable[[float], float]]
    parity: bool
    link: str  # "affine" | "saturating"
    natural_domain: tuple[float, float] = (-math.inf, math.inf)
    kink_at_zero: bool = False
    condition_41: bool = False
    degenerate: bool = False
    params: dict = field(default_factory=dict)

    # -- weight triple -----------------------------------------------------

    def psi(self, j: int, c: float) -> float:
        """psi_j(c) for j in {1, 2, 3}."""
        if j not in (1, 2, 3):
            raise ValueError(f"psi index must be 1, 2 or 3, got {j}")
        lo, hi = self.natural_domain
        if not (lo < c < hi):
            raise DomainError(
                f"c={c!r} outside natural domain ({lo}, {hi}) of {self.id}"
            )
        w = self.weight(c)
        if j == 1:
            return w
        if j == 2:
            return c * w
        return c * c * w

    def dpsi(self, j: int, c: float) -> float:
        """d psi_j / dc, via the registered base derivative."""
        w = self.psi(1, c)
        d = self.dweight_at(c)
        if j == 1:
            return d
        if j == 2:
            return w + c * d
        if j == 3:
            return 2.0 * c * w + c * c * d
        raise ValueError(f"psi index must be 1, 2 or 3, got {j}")

    def dweight_at(self, c: float) -> float:
        """dw/dc; central differences with one Richardson step if no
        analytic form is registered."""
        if self.kink_at_zero and abs(c) <= KINK_RADIUS:
            raise DomainError(
                f"derivative of {self.id} undefined within {KINK_RADIUS} of 0"
            )
        if self.dweight is not None:
            return self.dweight(c)
        h = max(1e-6, 1e-6 * abs(c))
        if self.kink_at_zero:
            h = min(h, abs(c) / 4.0)
        lo, hi = self.natural_domain
        if math.isfinite(lo):
            h = min(h, (c - lo) / 4.0)
        if math.isfinite(hi):
            h = min(h, (hi - c) / 4.0)
        if h <= 0.0:
            raise DomainError(f"cannot difference {self.id} weight at c={c!r}")
        return richardson(self.weight, c, h)


# ---------------------------------------------------------------------------
# registry and identifier parsing
# ---------------------------------------------------------------------------

def _registry_base() -> dict[str, ModelSpec]:
    return {
        "logistic": ModelSpec(
            id="logistic",
            weight=_logistic_weight,
            dweight=_logistic_dweight,
            parity=True,
            link="affine",
            condition_41=True,
        ),
        "probit": ModelSpec(
            id="probit",
            weight=_probit_weight,
            dweight=None,
            parity=True,
            link="affine",
            condition_41=True,
        ),
        "double-exponential": ModelSpec(
            id="double-exponential",
            weight=_double_exponential_weight,
            dweight=None,
            parity=True,
            link="affine",
            kink_at_zero=True,
        ),
        "double-reciprocal": ModelSpec(
            id="double-reciprocal",
            weight=_double_reciprocal_weight,
            dweight=None,
            parity=True,
            link="affine",
            kink_at_zero=True,
        ),
        "cloglog": ModelSpec(
            id="cloglog",
            weight=_cloglog_weight,
            dweight=_cloglog_dweight,
            parity=False,
            link="affine",
        ),
        "poisson-loglinear": ModelSpec(
            id="poisson-loglinear",
            weight=_poisson_weight,
            dweight=_poisson_weight,
            parity=False,
            link="affine",
        ),
        "michaelis-menten": ModelSpec(
            id="michaelis-menten",
            weight=_mm_weight,
            dweight=_mm_dweight,
            parity=False,
            link="saturating",
            natural_domain=(0.0, math.inf),
        ),
    }


_BASE = _registry_base()

MODEL_FAMILIES = (
    "logistic",
    "probit",
    "double-exponential",
    "double-reciprocal",
    "cloglog",
    "poisson-loglinear",
    "michaelis-menten",
    "power",
    "hedayat",
)


def power_model(m: float) -> ModelSpec:
    """Power-law weight w(c) = c^m on c > 0.

    m in {0, -1, -2} makes one of the three psi's constant; those cases
    are flagged ``degenerate`` and handled by the endpoint-pair route.
    """
    return ModelSpec(
        id=f"power:m={_fmt_param(m)}",
        weight=_power_weight(m),
        dweight=_power_dweight(m),
        parity=False,
        link="affine",
        natural_domain=(0.0, math.inf),
        degenerate=m in (0.0, -1.0, -2.0),
        params={"m": m},
    )


def hedayat_model(r: float) -> ModelSpec:
    """Dose-response weight w(c) = e^{2rc}/(1+e^c)^{2r+2}, r > 0."""
    if r <= 0.0:
        raise DomainError(f"hedayat model needs r > 0, got {r!r}")
    return ModelSpec(
        id=f"hedayat:r={_fmt_param(r)}",
        weight=_hedayat_weight(r),
        dweight=None,
        parity=False,
        link="affine",
        params={"r": r},
    )


def _fmt_param(v: float) -> str:
    return format(float(v), "g")


def get_model(identifier: str) -> ModelSpec:
    """Resolve a model identifier string to its ModelSpec.

    Parameterized families are spelled ``power:m=<value>`` and
    ``hedayat:r=<value>``.
    """
    ident = identifier.strip()
    if ident in _BASE:
        return _BASE[ident]
    if ident.startswith("power:"):
        return power_model(_parse_param(ident, "power", "m"))
    if ident.startswith("hedayat:"):
        return hedayat_model(_parse_param(ident, "hedayat", "r"))
    raise DomainError(f"unknown model identifier {identifier!r}")


def _parse_param(ident: str, family: str, name: str) -> float:
    body = ident[len(family) + 1 :]
    prefix = f"{name}="
    if not body.startswith(prefix):
        raise DomainError(
            f"malformed {family} identifier {ident!r}; expected {family}:{name}=<value>"
        )
    try:
        return float(body[len(prefix) :])
    except ValueError as exc:
        raise DomainError(f"bad numeric parameter in {ident!r}") from exc


def reflect_model(model: ModelSpec) -> ModelSpec:
    """The reflected triple: base weight c -> w(-c).

    Useful for the reflection duality between the two interval types.
    """
    lo, hi = model.natural_domain
    dwe = model.dweight
    return ModelSpec(
        id=f"reflected({model.id})",
        weight=lambda c, _w=model.weight: _w(-c),
        dweight=None if dwe is None else (lambda c, _d=dwe: -_d(-c)),
        parity=model.parity,
        link=model.link,
        natural_domain=(-hi, -lo),
        kink_at_zero=model.kink_at_zero,
        condition_41=False,
        degenerate=model.degenerate,
        params=dict(model.params),
    )


# ---------------------------------------------------------------------------
# operation-style wrappers
# ---------------------------------------------------------------------------

def eval_psi(model: ModelSpec, j: int, c: float) -> float:
    return model.psi(j, c)


# ---------------------------------------------------------------------------
# design-variable link
# ---------------------------------------------------------------------------

def x_to_c(model: ModelSpec, alpha: float, beta: float, x: float) -> float:
    """Map the design variable x to the canonical variable c."""
    if model.link == "affine":
        if beta == 0.0:
            raise DomainError("affine link needs beta != 0")
        return alpha + beta * x
    if alpha <= 0.0 or beta <= 0.0:
        raise DomainError("saturating link needs alpha, beta > 0")
    if x <= 0.0:
        raise DomainError(f"saturating link needs x > 0, got {x!r}")
    return alpha * x / (beta + x)


def c_to_x(model: ModelSpec, alpha: float, beta: float, c: float) -> float:
    """Inverse of :func:`x_to_c` on the link's range."""
    if model.link == "affine":
        if beta == 0.0:
            raise DomainError("affine link needs beta != 0")
        return (c - alpha) / beta
    if alpha <= 0.0 or beta <= 0.0:
        raise DomainError("saturating link needs alpha, beta > 0")
    if not (0.0 < c < alpha):
        raise DomainError(
            f"saturating link range is (0, alpha); c={c!r} outside (0, {alpha})"
        )
    return beta * c / (alpha - c)


# ---------------------------------------------------------------------------
# parameter transforms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ParamTransform:
    """Pair of 2x2 matrices conjugating the canonical moment matrix.

    ``a`` is the model's A(alpha, beta); ``b`` is the Jacobian of an
    optional reparameterization (tau_1, tau_2) of (alpha, beta).  Both
    must be invertible.
    """

    a: np.ndarray
    b: Optional[np.ndarray] = None

    def __post_init__(self):
        for name, mat in (("a", self.a), ("b", self.b)):
            if mat is None:
                continue
            if abs(float(np.linalg.det(mat))) < 1e-300:
                raise DomainError(f"{name}-matrix is singular")


def a_matrix(model: ModelSpec, alpha: float, beta: float) -> np.ndarray:
    """The registered A(alpha, beta) for the model's link."""
    if model.link == "affine":
        if beta == 0.0:
            raise DomainError("A(alpha, beta) singular: beta = 0")
        return np.array([[1.0, -alpha / beta], [0.0, 1.0 / beta]])
    if alpha * beta == 0.0 or alpha < 0.0 or beta < 0.0:
        raise DomainError("A(alpha, beta) singular: needs alpha, beta > 0")
    return np.array([[1.0 / alpha, -1.0 / beta], [0.0, 1.0 / (alpha * beta)]])


def b_matrix_mu_beta(alpha: float, beta: float) -> np.ndarray:
    """Jacobian of (alpha/beta, beta)."""
    if beta == 0.0:
        raise DomainError("mu-beta transform singular: beta = 0")
    return np.array([[1.0 / beta, -alpha / (beta * beta)], [0.0, 1.0]])


def b_matrix_scaled(alpha: float, beta: float, lam: float) -> np.ndarray:
    """Jacobian of (sqrt(lam) alpha/beta, sqrt(1-lam) beta)."""
    if not (0.0 < lam < 1.0):
        raise DomainError(f"scaled transform needs 0 < lambda < 1, got {lam!r}")
    if beta == 0.0:
        raise DomainError("scaled transform singular: beta = 0")
    s, t = math.sqrt(lam), math.sqrt(1.0 - lam)
    return np.array([[s / beta, -s * alpha / (beta * beta)], [0.0, t]])
