"""Chart-local tensor calculus: connection, curvature, and form calculus.

Sign conventions (asserted by the round-sphere tests):

* Gamma^k_{ij} = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij);
* R(X, Y) = nabla_X nabla_Y - nabla_Y nabla_X - nabla_[X,Y], in components
  R^a_{bcd} = d_c Gamma^a_{db} - d_d Gamma^a_{cb}
            + Gamma^a_{ce} Gamma^e_{db} - Gamma^a_{de} Gamma^e_{cb},
  so that the unit round sphere satisfies R(X, Y)Y = |Y|^2 X - <X, Y> Y;
* Ric_bd = R^a_{bad}, scal = g^{bd} Ric_bd;
* the codifferential is delta = -sum_i e_i . nabla_{e_i} over an orthonormal
  frame, i.e. (delta alpha)_{...} = -g^{ab} (nabla_a alpha)_{b ...}; on
  1-forms delta tau = -trace_g(nabla tau).  This is the sign that makes
  delta(Omega) = (2 - 2n) J theta hold on the Hopf chart.

Fields passed to the derivative operators are plain callables point ->
component array; the ``step``/``order`` arguments control the stencil used
on the field itself (see :mod:`lckgeo.fd` for the tiering policy).
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from . import fd
from .charts import Chart, FrameTensor, alt


def christoffel(chart: Chart, p, mode: str = "auto",
                step: float = None) -> FrameTensor:
    """Levi-Civita symbols Gamma^k_{ij} at p, as a valence (2,1) tensor."""
    p = np.asarray(p, dtype=float)
    step = fd.STEP_DIRECT if step is None else step
    chart.require_inside(p, margin=fd.stencil_extent(step) if mode == "fd"
                         or chart.metric_derivative_fn is None else 0.0)
    chart.metric(p)     # raises MetricError off the SPD cone
    comp = christoffel_components(chart, p, mode, step)
    return FrameTensor(comp, valence=(2, 1), point=p)


def christoffel_components(chart: Chart, p, mode: str = "auto",
                           step: float = None) -> np.ndarray:
    # hot path: raw metric_fn, positivity is asserted by the chart gate tests
    step = fd.STEP_DIRECT if step is None else step
    dg = chart.metric_jacobian(p, mode=mode, step=step)
    g_inv = np.linalg.inv(np.asarray(chart.metric_fn(np.asarray(p, dtype=float))))
    # dg[k, i, j] = d_k g_ij
    sym = np.einsum("ijl->lij", dg) + np.einsum("jil->lij", dg) - dg
    return 0.5 * np.einsum("kl,lij->kij", g_inv, sym)


def riemann(chart: Chart, p, mode: str = "auto") -> FrameTensor:
    """Curvature tensor R^a_{bcd} at p (valence (3,1))."""
    p = np.asarray(p, dtype=float)
    gamma_field = lambda q: christoffel_components(chart, q, mode=mode)
    extent = fd.stencil_extent(fd.STEP_NESTED, fd.ORDER_NESTED)
    chart.require_inside(p, margin=extent)
    dG = fd.gradient(gamma_field, p, fd.STEP_NESTED, order=fd.ORDER_NESTED)
    G = gamma_field(p)
    # R^a_{bcd} = d_c G^a_{db} - d_d G^a_{cb} + G^a_{ce} G^e_{db} - G^a_{de} G^e_{cb}
    comp = (np.einsum("cadb->abcd", dG) - np.einsum("dacb->abcd", dG)
            + np.einsum("ace,edb->abcd", G, G)
            - np.einsum("ade,ecb->abcd", G, G))
    return FrameTensor(comp, valence=(3, 1), point=p)


def ricci_scalar(chart: Chart, p, mode: str = "auto"):
    """Ricci tensor (valence (2,0)) and scalar curvature at p."""
    R = riemann(chart, p, mode=mode)
    ric = np.einsum("abad->bd", R.components)
    scal = float(np.einsum("bd,bd->", np.linalg.inv(chart.metric(p)), ric))
    return FrameTensor(ric, valence=(2, 0), point=np.asarray(p, dtype=float)), scal


def curvature_operator(chart: Chart, p, x, y, mode: str = "auto") -> np.ndarray:
    """The endomorphism R(X, Y): Z -> R(X, Y)Z as a matrix."""
    R = riemann(chart, p, mode=mode).components
    return np.einsum("abcd,c,d->ab", R, np.asarray(x, float), np.asarray(y, float))


def covariant_derivative_full(chart: Chart, field: Callable, p,
                              valence: tuple, mode: str = "auto",
                              step: float = fd.STEP_NESTED,
                              order: int = fd.ORDER_NESTED,
                              gamma: np.ndarray = None) -> np.ndarray:
    """All covariant partials of a tensor field; derivative axis first.

    ``field`` maps a point to a component array laid out contravariant axes
    first.  Returns ``out[c, ...] = (nabla_{d_c} T)(...)``.
    """
    p = np.asarray(p, dtype=float)
    extent = fd.stencil_extent(step, order)
    chart.require_inside(p, margin=extent)
    dT = fd.gradient(field, p, step, order=order)
    T = np.asarray(field(p), dtype=float)
    cov, con = valence
    if T.ndim != cov + con:
        raise ValueError("field rank does not match declared valence")
    if gamma is None:
        gamma = christoffel_components(chart, p, mode=mode)
    out = dT.copy()
    for axis in range(con):
        corr = np.tensordot(gamma, T, axes=(2, axis))  # [k, c, ...]
        corr = np.moveaxis(corr, 0, axis + 1)          # derivative axis first
        out += corr
    for axis in range(cov):
        corr = np.tensordot(gamma, T, axes=(0, con + axis))  # [c, i, ...]
        corr = np.moveaxis(corr, 1, con + axis + 1)
        out -= corr
    return out


def covariant_derivative(chart: Chart, field: Callable, p, x,
                         valence: tuple, mode: str = "auto",
                         step: float = fd.STEP_NESTED,
                         order: int = fd.ORDER_NESTED) -> FrameTensor:
    """Directional covariant derivative nabla_X T at p (same valence as T)."""
    full = covariant_derivative_full(chart, field, p, valence, mode=mode,
                                     step=step, order=order)
    comp = np.tensordot(np.asarray(x, dtype=float), full, axes=(0, 0))
    return FrameTensor(comp, valence=valence, point=np.asarray(p, dtype=float))


def exterior_derivative(chart: Chart, form_field: Callable, p, k: int,
                        step: float = None,
                        order: int = fd.ORDER_DIRECT) -> FrameTensor:
    """Exterior derivative of a k-form field: a (k+1)-form at p.

    Uses plain partial derivatives (no connection): d = (k+1) Alt(d alpha).
    """
    p = np.asarray(p, dtype=float)
    step = fd.STEP_DIRECT if step is None else step
    chart.require_inside(p, margin=fd.stencil_extent(step, order))
    da = fd.gradient(form_field, p, step, order=order)
    comp = alt(da) * (k + 1)
    return FrameTensor(comp, valence=(k + 1, 0), point=p)


def codifferential(chart: Chart, form_field: Callable, p, k: int,
                   mode: str = "auto", step: float = None,
                   order: int = fd.ORDER_DIRECT) -> FrameTensor:
    """Codifferential delta alpha = -g^{ab} (nabla_a alpha)_{b...} at p."""
    p = np.asarray(p, dtype=float)
    step = fd.STEP_DIRECT if step is None else step
    nabla = covariant_derivative_full(chart, form_field, p, (k, 0),
                                      mode=mode, step=step, order=order)
    g_inv = np.linalg.inv(chart.metric(p))
    comp = -np.tensordot(g_inv, nabla, axes=([0, 1], [0, 1]))
    if k == 1:
        comp = np.asarray(comp, dtype=float).reshape(())
    return FrameTensor(np.asarray(comp, dtype=float), valence=(k - 1, 0), point=p)


def lie_bracket(v_field: Callable, w_field: Callable, p,
                step: float = fd.STEP_NESTED,
                order: int = fd.ORDER_NESTED) -> np.ndarray:
    """[V, W]^k = V^j d_j W^k - W^j d_j V^k at p (coordinate bracket)."""
    p = np.asarray(p, dtype=float)
    dV = fd.gradient(v_field, p, step, order=order)  # dV[j, k] = d_j V^k
    dW = fd.gradient(w_field, p, step, order=order)
    v = np.asarray(v_field(p), dtype=float)
    w = np.asarray(w_field(p), dtype=float)
    return v @ dW - w @ dV


def metric_compatibility_defect(chart: Chart, p, mode: str = "auto") -> float:
    """Max |nabla_k g_ij| = |d_k g_ij - Gamma^m_{ki} g_mj - Gamma^m_{kj} g_im|."""
    p = np.asarray(p, dtype=float)
    dg = chart.metric_jacobian(p, mode=mode)
    g = chart.metric(p)
    gamma = christoffel_components(chart, p, mode=mode)
    nabla_g = (dg - np.einsum("mki,mj->kij", gamma, g)
               - np.einsum("mkj,im->kij", gamma, g))
    return float(np.max(np.abs(nabla_g)))


def lowered_riemann(chart: Chart, p, mode: str = "auto") -> np.ndarray:
    """Fully covariant R_abcd = g_ae R^e_{bcd}."""
    R = riemann(chart, p, mode=mode).components
    return np.einsum("ae,ebcd->abcd", chart.metric(p), R)
