"""Geodesics, parallel transport, and line integrals along curves.

All integrations use the classical 4-stage Runge-Kutta scheme with a fixed
number of steps; line integrals use composite 3-point Gauss-Legendre
quadrature per step.  Transport around a :class:`~lckgeo.charts.Loop` with a
deck-translation shift is well defined because the chart fields are invariant
under the shift.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from . import fd
from .calculus import christoffel_components
from .charts import Chart, Loop
from .errors import DomainExitError, IntegrationError

DEFAULT_STEPS = 2000

# 3-point Gauss-Legendre nodes/weights on [0, 1]
_GL_NODES = (np.array([-np.sqrt(3.0 / 5.0), 0.0, np.sqrt(3.0 / 5.0)]) + 1.0) / 2.0
_GL_WEIGHTS = np.array([5.0, 8.0, 5.0]) / 18.0


def _rk4(f: Callable, y0: np.ndarray, t0: float, t1: float, steps: int) -> np.ndarray:
    """Fixed-step RK4 for y' = f(t, y)."""
    y = np.asarray(y0, dtype=float).copy()
    h = (t1 - t0) / steps
    t = t0
    for _ in range(steps):
        k1 = f(t, y)
        k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
        k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
        k4 = f(t + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise IntegrationError(f"non-finite state at t={t + h}")
        t += h
    return y


def geodesic(chart: Chart, p, v, time: float, steps: int = DEFAULT_STEPS,
             mode: str = "auto") -> np.ndarray:
    """Integrate the geodesic from (p, v) for the given time; returns the endpoint.

    Raises :class:`DomainExitError` with the exit time if the trajectory
    leaves the chart box.
    """
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    m = chart.dim

    def rhs(t, y):
        x, vel = y[:m], y[m:]
        if not chart.contains(x):
            raise DomainExitError(f"geodesic left chart '{chart.label}'",
                                  exit_time=t, point=x)
        gamma = christoffel_components(chart, x, mode=mode)
        acc = -np.einsum("kij,i,j->k", gamma, vel, vel)
        return np.concatenate([vel, acc])

    y = _rk4(rhs, np.concatenate([p, v]), 0.0, time, steps)
    return y[:m]


def geodesic_with_velocity(chart: Chart, p, v, time: float,
                           steps: int = DEFAULT_STEPS, mode: str = "auto"):
    """Like :func:`geodesic` but also returns the final velocity."""
    p = np.asarray(p, dtype=float)
    v = np.asarray(v, dtype=float)
    m = chart.dim

    def rhs(t, y):
        x, vel = y[:m], y[m:]
        if not chart.contains(x):
            raise DomainExitError(f"geodesic left chart '{chart.label}'",
                                  exit_time=t, point=x)
        gamma = christoffel_components(chart, x, mode=mode)
        return np.concatenate([vel, -np.einsum("kij,i,j->k", gamma, vel, vel)])

    y = _rk4(rhs, np.concatenate([p, v]), 0.0, time, steps)
    return y[:m], y[m:]


def parallel_transport(chart: Chart, loop: Loop, frame: np.ndarray,
                       mode: str = "auto", steps: int = None) -> np.ndarray:
    """Parallel-transport a frame (columns = vectors) around a loop.

    Returns the transported frame at the base point; for an isometrically
    shifted loop the columns are expressed in the coordinates at
    curve(1) = curve(0) + shift, which the field invariance identifies with
    the base point.
    """
    return transport_along(chart, loop.point, loop.velocity, frame,
                           steps=steps or loop.steps, mode=mode,
                           breakpoints=loop.breakpoints)


def transport_along(chart: Chart, point_fn: Callable, velocity_fn: Callable,
                    frame: np.ndarray, steps: int = DEFAULT_STEPS,
                    mode: str = "auto", breakpoints: tuple = ()) -> np.ndarray:
    """Transport frame columns along the parametrized curve on [0, 1].

    ``breakpoints`` are interior parameters where the velocity may jump
    (polygon corners); each smooth piece is integrated separately so no RK4
    stage samples the velocity across a corner.
    """
    V0 = np.asarray(frame, dtype=float)
    shape = V0.shape
    knots = [0.0] + sorted(t for t in breakpoints if 0.0 < t < 1.0) + [1.0]

    y = V0.reshape(-1)
    for t0, t1 in zip(knots[:-1], knots[1:]):
        span = t1 - t0
        eps = 1e-9 * span

        def rhs(t, y, lo=t0 + eps, hi=t1 - eps):
            tc = min(max(t, lo), hi)
            V = y.reshape(shape)
            x = point_fn(tc)
            if not chart.contains(x):
                raise DomainExitError(
                    f"transport curve left chart '{chart.label}'",
                    exit_time=t, point=np.asarray(x))
            gamma = christoffel_components(chart, x, mode=mode)
            dV = -np.einsum("kij,i,j...->k...", gamma, velocity_fn(tc), V)
            return dV.reshape(-1)

        piece_steps = max(int(round(steps * span)), 1)
        y = _rk4(rhs, y, t0, t1, piece_steps)
    return y.reshape(shape)


def transport_segment(chart: Chart, p_from, p_to, frame: np.ndarray,
                      steps: int = 200, mode: str = "auto") -> np.ndarray:
    """Transport along the straight coordinate segment p_from -> p_to."""
    p_from = np.asarray(p_from, dtype=float)
    p_to = np.asarray(p_to, dtype=float)
    vel = p_to - p_from
    return transport_along(chart, lambda t: p_from + t * vel,
                           lambda t: vel, frame, steps=steps, mode=mode)


def orthogonality_defect(chart: Chart, loop: Loop, transported: np.ndarray) -> float:
    """Max-norm of M^T G M - G at the loop base point (isometry defect)."""
    G = chart.metric(loop.point(0.0))
    return float(np.max(np.abs(transported.T @ G @ transported - G)))


def loop_integral(chart: Chart, oneform_field: Callable, loop: Loop,
                  steps: int = None) -> float:
    """Line integral of a 1-form field around the loop.

    Composite Gauss-Legendre; exact-form integrals over shift-free loops
    vanish to quadrature accuracy, and the integral is additive under loop
    concatenation.
    """
    n = steps or loop.steps
    total = 0.0
    h = 1.0 / n
    for k in range(n):
        t0 = k * h
        for node, w in zip(_GL_NODES, _GL_WEIGHTS):
            t = t0 + node * h
            x = loop.point(t)
            chart.require_inside(x)
            alpha = np.asarray(oneform_field(x), dtype=float)
            total += w * h * float(alpha @ loop.velocity(t))
    return total


def line_integral_segment(chart: Chart, oneform_field: Callable, p_from, p_to,
                          nodes: int = 16) -> float:
    """Integral of a 1-form along a straight segment (Gauss-Legendre)."""
    p_from = np.asarray(p_from, dtype=float)
    p_to = np.asarray(p_to, dtype=float)
    xs, ws = fd.gauss_legendre_01(nodes)
    vel = p_to - p_from
    total = 0.0
    for x, w in zip(xs, ws):
        q = p_from + x * vel
        alpha = np.asarray(oneform_field(q), dtype=float)
        total += w * float(alpha @ vel)
    return total
