"""Canonical moment matrices, parameter conjugation, Loewner comparison.

The canonical matrix of a design is

    C = [ sum w_i psi_1(c_i)   sum w_i psi_2(c_i) ]
        [ sum w_i psi_2(c_i)   sum w_i psi_3(c_i) ]

and the information for (alpha, beta) is A^T C A with the model's
A(alpha, beta).  A reparameterization with Jacobian B conjugates once
more: (B^T)^{-1} I B^{-1}.  The 2x2 eigenvalues come from the closed
form (half-trace +/- sqrt(half-trace^2 - det)), exact to round-off at
this size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .design import Design
from .errors import DomainError, NumericalError
from .models import ModelSpec, ParamTransform, a_matrix

DOMINATES = "dominates"
DOMINATED_BY = "dominated-by"
EQUAL = "equal"
INCOMPARABLE = "incomparable"

#: default Loewner tolerance relative to the trace scale
DEFAULT_LOEWNER_TOL = 1e-8


@dataclass(frozen=True)
class InfoMatrix:
    """Symmetric 2x2 matrix in (m11, m12, m22) form."""

    m11: float
    m12: float
    m22: float

    def trace(self) -> float:
        return self.m11 + self.m22

    def det(self) -> float:
        return self.m11 * self.m22 - self.m12 * self.m12

    def eigenvalues(self) -> tuple[float, float]:
        """(lambda_min, lambda_max) by the closed 2x2 form."""
        half = 0.5 * (self.m11 + self.m22)
        disc = half * half - self.det()
        root = math.sqrt(max(disc, 0.0))
        return half - root, half + root

    def psd_defect(self) -> float:
        """How far the matrix is from PSD; <= 0 means PSD up to round-off."""
        gate = -min(self.m11, self.m22, 0.0)
        det_gate = -(self.det() + 1e-12 * (abs(self.m11 * self.m22) + self.m12**2))
        return max(gate, det_gate)

    def as_array(self) -> np.ndarray:
        return np.array([[self.m11, self.m12], [self.m12, self.m22]])

    @staticmethod
    def from_array(m: np.ndarray) -> "InfoMatrix":
        return InfoMatrix(m11=float(m[0, 0]), m12=0.5 * float(m[0, 1] + m[1, 0]), m22=float(m[1, 1]))

    def __add__(self, other: "InfoMatrix") -> "InfoMatrix":
        return InfoMatrix(self.m11 + other.m11, self.m12 + other.m12, self.m22 + other.m22)

    def scaled(self, s: float) -> "InfoMatrix":
        return InfoMatrix(s * self.m11, s * self.m12, s * self.m22)


def c_matrix(dsgn: Design, model: ModelSpec) -> InfoMatrix:
    """Canonical moment matrix of the design."""
    m11 = m12 = m22 = 0.0
    for c, w in dsgn.points:
        w1 = model.psi(1, c)
        m11 += w * w1
        m12 += w * c * w1
        m22 += w * c * c * w1
    out = InfoMatrix(m11=m11, m12=m12, m22=m22)
    if out.psd_defect() > 0.0:
        raise NumericalError(f"moment matrix lost positive semidefiniteness: {out}")
    return out


def info_matrix(
    dsgn: Design,
    model: ModelSpec,
    alpha: float,
    beta: float,
    transform: Optional[ParamTransform] = None,
) -> InfoMatrix:
    """Fisher information for (alpha, beta), or for (tau_1, tau_2) when
    the transform carries a reparameterization Jacobian."""
    cmat = c_matrix(dsgn, model).as_array()
    a = transform.a if transform is not None else a_matrix(model, alpha, beta)
    info = a.T @ cmat @ a
    if transform is not None and transform.b is not None:
        try:
            binv = np.linalg.inv(transform.b)
        except np.linalg.LinAlgError as exc:
            raise DomainError("reparameterization Jacobian is singular") from exc
        info = binv.T @ info @ binv
    return InfoMatrix.from_array(info)


def conjugate(matrix: InfoMatrix, model: ModelSpec, alpha: float, beta: float,
              transform: Optional[ParamTransform] = None) -> InfoMatrix:
    """Apply the same A/B conjugation to an already-summed moment matrix."""
    a = transform.a if transform is not None else a_matrix(model, alpha, beta)
    info = a.T @ matrix.as_array() @ a
    if transform is not None and transform.b is not None:
        binv = np.linalg.inv(transform.b)
        info = binv.T @ info @ binv
    return InfoMatrix.from_array(info)


def loewner_compare(m1: InfoMatrix, m2: InfoMatrix, tol: float = DEFAULT_LOEWNER_TOL) -> str:
    """Order m1 against m2 in the Loewner sense, up to tol * trace scale."""
    for m in (m1, m2):
        if not all(math.isfinite(v) for v in (m.m11, m.m12, m.m22)):
            raise DomainError("Loewner comparison needs finite matrices")
    scale = abs(m1.trace()) + abs(m2.trace())
    diff = InfoMatrix(m1.m11 - m2.m11, m1.m12 - m2.m12, m1.m22 - m2.m22)
    lo, hi = diff.eigenvalues()
    ge = lo >= -tol * scale
    le = hi <= tol * scale
    if ge and le:
        return EQUAL
    if ge:
        return DOMINATES
    if le:
        return DOMINATED_BY
    return INCOMPARABLE
