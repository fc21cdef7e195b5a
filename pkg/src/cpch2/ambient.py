"""The complex hyperbolic plane as the unit ball in C^2.

Points and tangent vectors are real arrays whose trailing axis has length 4,
ordered ``(Re z1, Im z1, Re z2, Im z2)``. The metric is the Bergman metric

    g = 4 * (I / w + (x x^T + Jx Jx^T) / w^2),    w = 1 - |x|^2,

which is the Hessian form of the Kahler potential ``-4 log(1 - |z|^2)`` and has
holomorphic sectional curvature -1. Every formula below is written with plain
dot products (no conjugation, no absolute values) so that the fixed-step flows
accept complex input for complex-step differentiation.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError, NumericError

CHART_GUARD = 1.0 - 1e-6
FD_STEP = 1e-4

_J_PERM = np.array([1, 0, 3, 2])
_J_SIGN = np.array([-1.0, 1.0, -1.0, 1.0])


def dot(a, b):
    return np.einsum("...i,...i->...", a, b)


def apply_J(u):
    """Multiplication by i in each complex coordinate: (a, b) -> (-b, a)."""
    u = np.asarray(u)
    return u[..., _J_PERM] * _J_SIGN


J_MATRIX = apply_J(np.eye(4)).T


def check_point(x, guard: float = CHART_GUARD):
    """Raise DomainError unless every point lies inside the chart guard."""
    x = np.asarray(x)
    rr = np.sum(np.real(x) ** 2, axis=-1)
    if not np.all(np.isfinite(rr)):
        raise DomainError("non-finite point")
    if np.any(rr >= guard**2):
        raise DomainError(f"point outside the ball chart (|z| = {np.sqrt(rr.max()):.9f})")
    return x


def _w(x):
    return 1.0 - dot(x, x)


def metric_matrix(x):
    x = np.asarray(x)
    w = _w(x)[..., None, None]
    jx = apply_J(x)
    outer = x[..., :, None] * x[..., None, :] + jx[..., :, None] * jx[..., None, :]
    return 4.0 * (np.eye(4) / w + outer / w**2)


def inverse_metric_matrix(x):
    x = np.asarray(x)
    w = _w(x)[..., None, None]
    jx = apply_J(x)
    outer = x[..., :, None] * x[..., None, :] + jx[..., :, None] * jx[..., None, :]
    return 0.25 * w * (np.eye(4) - outer)


def metric_eval(x, u, v):
    """Riemannian inner product g_x(u, v); broadcasts over leading axes."""
    x, u, v = np.asarray(x), np.asarray(u), np.asarray(v)
    w = _w(x)
    jx = apply_J(x)
    return 4.0 * (dot(u, v) / w + (dot(u, x) * dot(v, x) + dot(u, jx) * dot(v, jx)) / w**2)


def norm(x, u):
    return np.sqrt(metric_eval(x, u, u))


def christoffel(x, X, Y):
    """Gamma(X, Y) so that the covariant derivative is d/dt Y + Gamma(X, Y).

    Complex form: (X conj(x).Y + Y conj(x).X) / w.
    """
    x, X, Y = np.asarray(x), np.asarray(X), np.asarray(Y)
    w = _w(x)[..., None]
    jx = apply_J(x)
    return (
        dot(Y, x)[..., None] * X
        + dot(Y, jx)[..., None] * apply_J(X)
        + dot(X, x)[..., None] * Y
        + dot(X, jx)[..., None] * apply_J(Y)
    ) / w


def curvature_closed_form(x, X, Y, Z):
    """R(X, Y)Z = -1/4 (<Y,Z>X - <X,Z>Y + <JY,Z>JX - <JX,Z>JY - 2<JX,Y>JZ).

    Sign convention R_XY = [nabla_X, nabla_Y] - nabla_[X,Y].
    """
    x, X, Y, Z = map(np.asarray, (x, X, Y, Z))
    JX, JY, JZ = apply_J(X), apply_J(Y), apply_J(Z)

    def ip(a, b):
        return metric_eval(x, a, b)[..., None]

    return -0.25 * (
        ip(Y, Z) * X - ip(X, Z) * Y + ip(JY, Z) * JX - ip(JX, Z) * JY - 2.0 * ip(JX, Y) * JZ
    )


def curvature_4(x, X, Y, Z, W):
    """<R(X, Y)Z, W>."""
    return metric_eval(x, curvature_closed_form(x, X, Y, Z), W)


def sectional_curvature(x, X, Y):
    num = curvature_4(x, X, Y, Y, X)
    den = metric_eval(x, X, X) * metric_eval(x, Y, Y) - metric_eval(x, X, Y) ** 2
    return num / den


# -- finite-difference oracle -------------------------------------------------------


def _central4(f, x, axis, h):
    e = np.zeros(4)
    e[axis] = h
    return (-f(x + 2 * e) + 8 * f(x + e) - 8 * f(x - e) + f(x - 2 * e)) / (12 * h)


def christoffel_symbols_fd(x, h: float = FD_STEP):
    """Gamma^k_ij at a single point from 4th-order central differences of the metric."""
    x = np.asarray(x, dtype=float)
    dg = np.stack([_central4(metric_matrix, x, l, h) for l in range(4)])  # d_l g_ij
    # low[i, j, l] = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
    low = 0.5 * (dg + np.einsum("jil->ijl", dg) - np.einsum("lij->ijl", dg))
    ginv = np.linalg.inv(metric_matrix(x))
    return np.einsum("kl,ijl->kij", ginv, low)


def curvature_numeric(x, X, Y, Z, h: float = FD_STEP):
    """R(X, Y)Z from nested finite differences of the metric (oracle path)."""
    if not h > 1e-7:
        raise NumericError(f"finite-difference step {h!r} underflows the usable range")
    x = np.asarray(check_point(x), dtype=float)
    gam = christoffel_symbols_fd(x, h)
    # outer step 10h: the nested quotient would otherwise amplify roundoff by 1/h^2
    dgam = np.stack(
        [_central4(lambda y: christoffel_symbols_fd(y, h), x, m, 10 * h) for m in range(4)]
    )  # dgam[m, k, i, j] = d_m Gamma^k_ij
    # R^l_ijk = d_i G^l_jk - d_j G^l_ik + G^l_im G^m_jk - G^l_jm G^m_ik
    riem = (
        np.einsum("iljk->lijk", dgam)
        - np.einsum("jlik->lijk", dgam)
        + np.einsum("lim,mjk->lijk", gam, gam)
        - np.einsum("ljm,mik->lijk", gam, gam)
    )
    return np.einsum("lijk,i,j,k->l", riem, X, Y, Z)


# -- geodesics ----------------------------------------------------------------------


@dataclass(frozen=True)
class GeodesicState:
    point: np.ndarray
    velocity: np.ndarray
    time: float


def geodesic_acceleration(x, v):
    return -christoffel(x, v, v)


def _escape_event(t, y):
    return CHART_GUARD - np.sqrt(dot(y[:4], y[:4]))


_escape_event.terminal = True


def integrate_along_geodesic(
    x,
    v,
    t: float,
    extra_rhs: Callable | None = None,
    extra0: Sequence[float] = (),
    rtol: float = 1e-10,
    atol: float = 1e-12,
    dense: bool = False,
):
    """Integrate the geodesic from (x, v) up to time t with adaptive DOP853.

    ``extra_rhs(x, v, extra) -> d extra/dt`` couples additional state (parallel
    fields, Jacobi fields) to the geodesic. Returns the scipy solution object.
    """
    x = np.asarray(check_point(x), dtype=float)
    v = np.asarray(v, dtype=float)
    extra0 = np.asarray(extra0, dtype=float).ravel()
    n_extra = extra0.size

    def rhs(_t, y):
        xx, vv = y[:4], y[4:8]
        out = np.empty_like(y)
        out[:4] = vv
        out[4:8] = geodesic_acceleration(xx, vv)
        if n_extra:
            out[8:] = extra_rhs(xx, vv, y[8:])
        return out

    y0 = np.concatenate([x, v, extra0])
    sol = solve_ivp(
        rhs, (0.0, float(t)), y0, method="DOP853", rtol=rtol, atol=atol,
        events=_escape_event, dense_output=dense,
    )
    if sol.status == 1:
        raise DomainError(
            f"geodesic leaves the ball chart; integration stopped at t = {sol.t[-1]:.6g}"
        )
    if not sol.success:
        raise NumericError(f"geodesic integration failed: {sol.message}")
    return sol


def exp_map(x, v, t: float = 1.0, rtol: float = 1e-10) -> GeodesicState:
    """State at time t of the geodesic with initial point x and velocity v."""
    x = np.asarray(check_point(x), dtype=float)
    v = np.asarray(v, dtype=float)
    if t == 0:
        return GeodesicState(x.copy(), v.copy(), 0.0)
    sol = integrate_along_geodesic(x, v, t, rtol=rtol, atol=rtol * 1e-2)
    y = sol.y[:, -1]
    return GeodesicState(y[:4], y[4:8], float(t))


def parallel_transport(x, v, vectors, t: float, rtol: float = 1e-10):
    """Transport ``vectors`` (k, 4) along the geodesic from (x, v) to time t.

    Returns (GeodesicState, transported (k, 4)).
    """
    vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
    k = vectors.shape[0]
    if t == 0:
        return GeodesicState(np.asarray(x, float), np.asarray(v, float), 0.0), vectors.copy()

    def transport_rhs(xx, vv, extra):
        fields = extra.reshape(k, 4)
        return (-christoffel(xx, vv, fields)).ravel()

    sol = integrate_along_geodesic(x, v, t, transport_rhs, vectors, rtol=rtol, atol=rtol * 1e-2)
    y = sol.y[:, -1]
    return GeodesicState(y[:4], y[4:8], float(t)), y[8:].reshape(k, 4)


def geodesic_flow(x, v, steps: int = 256):
    """Time-one geodesic flow by fixed-step RK4, vectorized over leading axes.

    The step count is fixed, so the result is a smooth (and complex-analytic)
    function of the initial data; patches rely on this for differentiation.
    Returns (point, velocity).
    """
    x = np.asarray(x)
    v = np.asarray(v)
    if x.dtype.kind != "c":
        x = x.astype(float)
    h = 1.0 / steps
    for _ in range(steps):
        k1x, k1v = v, geodesic_acceleration(x, v)
        x2, v2 = x + 0.5 * h * k1x, v + 0.5 * h * k1v
        k2x, k2v = v2, geodesic_acceleration(x2, v2)
        x3, v3 = x + 0.5 * h * k2x, v + 0.5 * h * k2v
        k3x, k3v = v3, geodesic_acceleration(x3, v3)
        x4, v4 = x + h * k3x, v + h * k3v
        k4x, k4v = v4, geodesic_acceleration(x4, v4)
        x = x + (h / 6.0) * (k1x + 2 * k2x + 2 * k3x + k4x)
        v = v + (h / 6.0) * (k1v + 2 * k2v + 2 * k3v + k4v)
    check_point(x)
    return x, v


def distance_from_origin(x):
    r = np.sqrt(dot(x, x))
    return 2.0 * np.arctanh(r)


# -- totally geodesic slices ---------------------------------------------------------


@dataclass(frozen=True)
class TotallyGeodesicChart:
    """Linear 2-chart of CH^1 = {z2 = 0} or RH^2 = {z real}."""

    kind: str
    basis: np.ndarray  # (2, 4) chart directions

    def point(self, sigma):
        sigma = np.asarray(sigma)
        return sigma @ self.basis

    def tangents(self, sigma):
        sigma = np.asarray(sigma)
        return np.broadcast_to(self.basis, sigma.shape[:-1] + (2, 4))

    def normal_frame(self, sigma):
        """g-orthonormal frame (2, 4) of the normal space at chart point sigma."""
        x = self.point(sigma)
        others = [e for e in np.eye(4) if not np.any(np.abs(self.basis @ e) > 0)]
        frame = []
        for e in others:
            for f in frame:
                e = e - metric_eval(x, e, f)[..., None] * f
            frame.append(e / norm(x, e)[..., None])
        return np.stack(frame, axis=-2)

    def second_fundamental_form(self, sigma):
        """Normal part of nabla_{E_a} E_b; the chart is linear, so only Gamma remains."""
        x = self.point(sigma)
        nf = self.normal_frame(sigma)
        out = np.empty(x.shape[:-1] + (2, 2, 2))
        for a in range(2):
            for b in range(2):
                acc = christoffel(x, self.basis[a], self.basis[b])
                for c in range(2):
                    out[..., a, b, c] = metric_eval(x, acc, nf[..., c, :])
        return out

    def shape_operator_fd(self, sigma, h: float = 1e-5):
        """Tangential part of -nabla_E nu for each normal, by differencing the normal frame.

        Returns array (..., normal c, a, b) = g(-nabla_{E_a} nu_c, E_b).
        """
        sigma = np.asarray(sigma, dtype=float)
        x = self.point(sigma)
        nf = self.normal_frame(sigma)
        out = np.empty(sigma.shape[:-1] + (2, 2, 2))
        for a in range(2):
            e = np.zeros(2)
            e[a] = h
            dn = (self.normal_frame(sigma + e) - self.normal_frame(sigma - e)) / (2 * h)
            for c in range(2):
                cov = dn[..., c, :] + christoffel(x, self.basis[a], nf[..., c, :])
                for b in range(2):
                    out[..., c, a, b] = -metric_eval(x, cov, self.basis[b])
        return out

    def is_complex(self) -> bool:
        """Whether J maps the tangent plane into itself."""
        jb = apply_J(self.basis)
        coeffs, *_ = np.linalg.lstsq(self.basis.T, jb.T, rcond=None)
        return bool(np.allclose(self.basis.T @ coeffs, jb.T, atol=1e-12))


def totally_geodesic_chart(kind: str) -> TotallyGeodesicChart:
    if kind == "CH1":
        basis = np.array([[1.0, 0, 0, 0], [0, 1.0, 0, 0]])
    elif kind == "RH2":
        basis = np.array([[1.0, 0, 0, 0], [0, 0, 1.0, 0]])
    else:
        raise ValueError(f"unknown totally geodesic slice {kind!r}; expected 'CH1' or 'RH2'")
    return TotallyGeodesicChart(kind, basis)
