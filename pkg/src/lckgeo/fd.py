"""Central finite-difference stencils for chart fields.

All differentiation in the package funnels through these helpers.  Step
sizes are tiered by how much stencil noise the differentiated field already
carries:

* ``STEP_DIRECT``  -- fields evaluated in closed form (metric, J, fundamental
  form): 2nd-order stencil, step 1e-5.
* ``STEP_NESTED``  -- fields whose evaluation contains one stencil level
  (Christoffel fields, Lee forms, grad of scalar invariants): 4th-order
  stencil, step 1e-3.  The wider, higher-order stencil keeps the amplified
  inner-stencil noise (~eps/h) well below the 1e-4 identity tolerances.
* ``STEP_DEEP``    -- twice-nested fields (S-tensor, delta-theta, the
  Einstein-chain and Hamiltonian-form stacks): 2nd-order, step 1e-2.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Callable

import numpy as np


@lru_cache(maxsize=32)
def gauss_legendre_01(nodes: int):
    """Cached Gauss-Legendre nodes and weights on [0, 1]."""
    xs, ws = np.polynomial.legendre.leggauss(nodes)
    return (xs + 1.0) / 2.0, ws / 2.0

STEP_DIRECT = 1e-5
STEP_NESTED = 1e-3
STEP_DEEP = 1e-2

ORDER_DIRECT = 2
ORDER_NESTED = 4
ORDER_DEEP = 2


class override_direct_step:
    """Scoped override of the level-1 step (the CLI's --fd-step knob)."""

    def __init__(self, step: float):
        self.step = step

    def __enter__(self):
        global STEP_DIRECT
        self._saved = STEP_DIRECT
        STEP_DIRECT = self.step
        return self

    def __exit__(self, *exc):
        global STEP_DIRECT
        STEP_DIRECT = self._saved
        return False


def partial_derivative(f: Callable, p: np.ndarray, axis: int, step: float,
                       order: int = 2) -> np.ndarray:
    """d f / d x_axis at p by a central stencil of the given order (2 or 4)."""
    h = step
    e = np.zeros_like(p, dtype=float)
    e[axis] = 1.0
    if order == 2:
        return (np.asarray(f(p + h * e)) - np.asarray(f(p - h * e))) / (2.0 * h)
    if order == 4:
        f1 = np.asarray(f(p + h * e))
        f_1 = np.asarray(f(p - h * e))
        f2 = np.asarray(f(p + 2.0 * h * e))
        f_2 = np.asarray(f(p - 2.0 * h * e))
        return (8.0 * (f1 - f_1) - (f2 - f_2)) / (12.0 * h)
    raise ValueError(f"unsupported stencil order {order}")


def gradient(f: Callable, p: np.ndarray, step: float, order: int = 2) -> np.ndarray:
    """All partials of f at p; derivative axis first: out[k, ...] = d_k f(p)."""
    p = np.asarray(p, dtype=float)
    parts = [partial_derivative(f, p, k, step, order) for k in range(p.size)]
    return np.stack(parts, axis=0)


def second_derivative(f: Callable, p: np.ndarray, axis1: int, axis2: int,
                      step: float, order: int = 2) -> np.ndarray:
    """d^2 f / dx_axis1 dx_axis2 via a nested central stencil."""
    inner = lambda q: partial_derivative(f, q, axis2, step, order)
    return partial_derivative(inner, p, axis1, step, order)


def stencil_extent(step: float, order: int = 2) -> float:
    """Largest coordinate offset the stencil reaches from the base point."""
    return step * (2.0 if order == 4 else 1.0)
