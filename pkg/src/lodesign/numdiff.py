"""Finite-difference stencils used for derivative-free model weights.

All stencils are central; ``richardson`` variants extrapolate one level
(h and h/2) to knock out the leading truncation term.  Step sizes are
chosen by the callers, which know the local smoothness and any nearby
kinks or domain edges.
"""

from __future__ import annotations

from typing import Callable

Func = Callable[[float], float]


def central(f: Func, x: float, h: float) -> float:
    return (f(x + h) - f(x - h)) / (2.0 * h)


def richardson(f: Func, x: float, h: float) -> float:
    d1 = central(f, x, h)
    d2 = central(f, x, 0.5 * h)
    return (4.0 * d2 - d1) / 3.0


def second_central(f: Func, x: float, h: float) -> float:
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)


def second_richardson(f: Func, x: float, h: float) -> float:
    d1 = second_central(f, x, h)
    d2 = second_central(f, x, 0.5 * h)
    return (4.0 * d2 - d1) / 3.0


def third_central(f: Func, x: float, h: float) -> float:
    return (f(x + 2.0 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2.0 * h)) / (
        2.0 * h * h * h
    )


def third_richardson(f: Func, x: float, h: float) -> float:
    d1 = third_central(f, x, h)
    d2 = third_central(f, x, 0.5 * h)
    return (4.0 * d2 - d1) / 3.0
