"""Coordinate charts, pointwise tensors, loops, and exterior algebra.

A :class:`Chart` is an axis-aligned coordinate box together with a smooth
metric field (and optionally its analytic first derivatives).  Every
geometric computation in the package is chart-local: there are no atlases
or transition maps, only boxes with smooth fields on them.

Conventions used throughout:

* component arrays store contravariant axes first, then covariant axes,
  so Christoffel symbols Gamma^k_{ij} live in ``G[k, i, j]`` and the
  Riemann tensor R^a_{bcd} in ``R[a, b, c, d]``;
* the wedge product carries no 1/k! factor:
  (alpha ^ beta)(X, Y) = alpha(X) beta(Y) - alpha(Y) beta(X);
* an endomorphism A corresponds to the bilinear form g(A., .), i.e. the
  matrix ``A.T @ G``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import fd
from .errors import ChartDomainError, MetricError

DEFAULT_MARGIN = 0.05


@dataclass(frozen=True)
class Chart:
    """A coordinate box with a smooth Riemannian metric field.

    ``metric_fn`` maps a point (shape ``(dim,)``) to the symmetric positive
    definite matrix g_ij.  ``metric_derivative_fn``, when given, maps a point
    to the array ``dg[k, i, j] = d_k g_ij`` and enables analytic mode.
    """

    dim: int
    domain: tuple
    metric_fn: Callable[[np.ndarray], np.ndarray]
    metric_derivative_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    label: str = ""

    def __post_init__(self):
        if len(self.domain) != self.dim:
            raise ValueError("domain must supply one interval per coordinate")

    def contains(self, p, margin: float = 0.0) -> bool:
        p = np.asarray(p, dtype=float)
        return all(lo + margin <= x <= hi - margin
                   for x, (lo, hi) in zip(p, self.domain))

    def require_inside(self, p, margin: float = 0.0):
        if not self.contains(p, margin):
            raise ChartDomainError(
                f"point {np.asarray(p)} outside chart '{self.label}' "
                f"domain with margin {margin}")

    def metric(self, p) -> np.ndarray:
        """Metric matrix at p, validated symmetric positive definite."""
        g = np.asarray(self.metric_fn(np.asarray(p, dtype=float)), dtype=float)
        if not np.allclose(g, g.T, atol=1e-10 * (1.0 + np.abs(g).max())):
            raise MetricError(f"metric not symmetric at {p} on '{self.label}'")
        try:
            np.linalg.cholesky(g)
        except np.linalg.LinAlgError:
            raise MetricError(f"metric not positive definite at {p} "
                              f"on '{self.label}'") from None
        return g

    def metric_inverse(self, p) -> np.ndarray:
        return np.linalg.inv(self.metric(p))

    def metric_jacobian(self, p, mode: str = "auto",
                        step: float = None) -> np.ndarray:
        """dg[k, i, j] = d_k g_ij, analytic when available unless mode='fd'."""
        p = np.asarray(p, dtype=float)
        step = fd.STEP_DIRECT if step is None else step
        if mode not in ("auto", "fd", "analytic"):
            raise ValueError(f"unknown derivative mode {mode!r}")
        if mode == "analytic" and self.metric_derivative_fn is None:
            raise ValueError(f"chart '{self.label}' has no analytic metric derivative")
        if mode != "fd" and self.metric_derivative_fn is not None:
            return np.asarray(self.metric_derivative_fn(p), dtype=float)
        self.require_inside(p, margin=step)
        return fd.gradient(self.metric_fn, p, step, order=fd.ORDER_DIRECT)

    def center(self) -> np.ndarray:
        return np.array([(lo + hi) / 2.0 for lo, hi in self.domain])

    def sample_points(self, rng: np.random.Generator, count: int,
                      margin: float = DEFAULT_MARGIN) -> np.ndarray:
        """Uniform interior samples, keeping `margin` away from every face."""
        lows = np.array([lo + margin for lo, hi in self.domain])
        highs = np.array([hi - margin for lo, hi in self.domain])
        if np.any(highs <= lows):
            raise ChartDomainError(
                f"margin {margin} empties the domain of chart '{self.label}'")
        return rng.uniform(lows, highs, size=(count, self.dim))


@dataclass(frozen=True)
class FrameTensor:
    """Components of a tensor at a point, in the coordinate frame.

    ``valence`` is (covariant rank, contravariant rank); the component array
    stores contravariant axes first.
    """

    components: np.ndarray
    valence: tuple
    point: np.ndarray

    def __post_init__(self):
        cov, con = self.valence
        if self.components.ndim != cov + con:
            raise ValueError(f"array rank {self.components.ndim} does not match "
                             f"valence {self.valence}")

    @property
    def rank(self) -> int:
        return sum(self.valence)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.components ** 2)))

    def lower_index(self, g: np.ndarray, axis: int = 0) -> "FrameTensor":
        """Lower the contravariant index living on `axis` with the metric g."""
        cov, con = self.valence
        if axis >= con:
            raise ValueError("axis is not contravariant")
        comp = np.tensordot(g, self.components, axes=(1, axis))
        comp = np.moveaxis(comp, 0, axis)
        # lowered axis moves to the front of the covariant block
        comp = np.moveaxis(comp, axis, con - 1)
        return FrameTensor(comp, (cov + 1, con - 1), self.point)

    def raise_index(self, g: np.ndarray, axis: int = 0) -> "FrameTensor":
        """Raise the covariant index at `axis` (within the covariant block)."""
        cov, con = self.valence
        if axis >= cov:
            raise ValueError("axis is not covariant")
        g_inv = np.linalg.inv(g)
        full_axis = con + axis
        comp = np.tensordot(g_inv, self.components, axes=(1, full_axis))
        comp = np.moveaxis(comp, 0, full_axis)
        comp = np.moveaxis(comp, full_axis, con)
        return FrameTensor(comp, (cov - 1, con + 1), self.point)


@dataclass(frozen=True)
class Loop:
    """A piecewise-smooth closed curve in one chart.

    ``curve_fn`` maps [0, 1] to chart coordinates.  For loops that generate a
    deck translation of the chart (quotient-circle generators), ``shift`` is
    the coordinate translation with curve(1) = curve(0) + shift and all chart
    fields invariant under it; shift = 0 gives an ordinary closed loop.
    """

    curve_fn: Callable[[float], np.ndarray]
    velocity_fn: Callable[[float], np.ndarray]
    steps: int = 2000
    shift: np.ndarray = None  # type: ignore[assignment]
    label: str = ""
    breakpoints: tuple = ()   # interior parameters where velocity may jump

    def __post_init__(self):
        p0 = np.asarray(self.curve_fn(0.0), dtype=float)
        if self.shift is None:
            object.__setattr__(self, "shift", np.zeros_like(p0))
        p1 = np.asarray(self.curve_fn(1.0), dtype=float)
        defect = np.max(np.abs(p1 - p0 - self.shift))
        if defect > 1e-12 * (1.0 + np.max(np.abs(p0))):
            raise ValueError(f"loop endpoints differ by {defect} after shift")

    def point(self, t: float) -> np.ndarray:
        return np.asarray(self.curve_fn(t), dtype=float)

    def velocity(self, t: float) -> np.ndarray:
        return np.asarray(self.velocity_fn(t), dtype=float)


def segment_loop(p0, shift, steps: int = 2000, label: str = "") -> Loop:
    """Straight coordinate segment from p0 to p0+shift (a deck generator)."""
    p0 = np.asarray(p0, dtype=float)
    shift = np.asarray(shift, dtype=float)
    return Loop(curve_fn=lambda t: p0 + t * shift,
                velocity_fn=lambda t: shift.copy(),
                steps=steps, shift=shift, label=label)


def polygon_loop(vertices, steps_per_edge: int = 200, label: str = "") -> Loop:
    """Closed piecewise-linear loop through the given vertices (first repeated)."""
    verts = [np.asarray(v, dtype=float) for v in vertices]
    if np.max(np.abs(verts[0] - verts[-1])) > 0:
        verts = verts + [verts[0]]
    n_edge = len(verts) - 1
    if n_edge < 1:
        raise ValueError("polygon needs at least one edge")

    def curve(t):
        u = min(max(t, 0.0), 1.0) * n_edge
        k = min(int(u), n_edge - 1)
        s = u - k
        return (1.0 - s) * verts[k] + s * verts[k + 1]

    def velocity(t):
        u = min(max(t, 0.0), 1.0) * n_edge
        k = min(int(u), n_edge - 1)
        return (verts[k + 1] - verts[k]) * n_edge

    return Loop(curve_fn=curve, velocity_fn=velocity,
                steps=n_edge * steps_per_edge, label=label,
                breakpoints=tuple(k / n_edge for k in range(1, n_edge)))


def coordinate_rectangle(p, axis1: int, axis2: int, size1: float, size2: float,
                         steps_per_edge: int = 200, label: str = "") -> Loop:
    """Small contractible rectangle based at p in the (axis1, axis2) plane."""
    p = np.asarray(p, dtype=float)
    e1 = np.zeros_like(p)
    e2 = np.zeros_like(p)
    e1[axis1] = size1
    e2[axis2] = size2
    return polygon_loop([p, p + e1, p + e1 + e2, p + e2],
                        steps_per_edge=steps_per_edge, label=label)


# ---------------------------------------------------------------------------
# exterior algebra on component arrays
# ---------------------------------------------------------------------------

def alt(a: np.ndarray) -> np.ndarray:
    """Antisymmetrize over all axes (the projection Alt, with 1/k!)."""
    k = a.ndim
    if k <= 1:
        return a
    out = np.zeros_like(a)
    for perm in itertools.permutations(range(k)):
        sign = _perm_sign(perm)
        out += sign * np.transpose(a, perm)
    return out / math.factorial(k)


def _perm_sign(perm) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, cycle = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            cycle += 1
        if cycle % 2 == 0:
            sign = -sign
    return sign


def wedge(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Wedge product of antisymmetric component arrays, determinant convention.

    For 1-forms: (a ^ b)_ij = a_i b_j - a_j b_i.
    """
    k, l = a.ndim, b.ndim
    prod = np.tensordot(a, b, axes=0)
    return alt(prod) * (math.factorial(k + l) /
                        (math.factorial(k) * math.factorial(l)))


def form_of_endomorphism(a: np.ndarray, g: np.ndarray) -> np.ndarray:
    """2-form omega(X, Y) = g(AX, Y) of a (g-skew) endomorphism A."""
    return a.T @ g


def endomorphism_of_form(omega: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Inverse of :func:`form_of_endomorphism` for antisymmetric omega."""
    return np.linalg.solve(g, omega.T)


def wedge_endo(x: np.ndarray, tau: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Endomorphism (X ^ tau)(Y) = g(X, Y) tau_sharp - tau(Y) X.

    ``x`` is a vector, ``tau`` a 1-form; returns the matrix acting on vectors.
    """
    tau_sharp = np.linalg.solve(g, tau)
    return np.outer(tau_sharp, g @ x) - np.outer(x, tau)


def form_norm(a: np.ndarray, g: np.ndarray) -> float:
    """Metric norm of a fully covariant tensor: contract every index with g^-1."""
    if a.ndim == 0:
        return float(abs(a))
    g_inv = np.linalg.inv(g)
    raised = a
    for axis in range(a.ndim):
        raised = np.tensordot(g_inv, raised, axes=(1, axis))
        raised = np.moveaxis(raised, 0, axis)
    return float(np.sqrt(abs(np.sum(raised * a))))
