"""Jacobi fields along normal geodesics and equidistant hypersurfaces.

Along a unit-speed geodesic c with c'(0) = xi the Jacobi equation in CH^2 reads
4 zeta'' - zeta - 3 <zeta, Jc'> Jc' = 0. For a principal vector v with
S v = lam v and <v, J xi> = beta the solution with zeta(0) = v,
zeta'(0) = -S v is f(lam, t) B_v(t) + beta g(lam, t) Jc'(t), where B_v is the
parallel field along c.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ambient as amb
from .classifier import b_from_lambda, lambda_relations
from .errors import DomainError, FocalPointError, NumericError
from .hypersurfaces import HypersurfacePatch, orient, singular_values

FOCAL_TOL = 1e-6


def f_profile(lam, t):
    return np.cosh(t / 2) - 2 * lam * np.sinh(t / 2)


def f_prime(lam, t):
    return 0.5 * np.sinh(t / 2) - lam * np.cosh(t / 2)


def g_profile(lam, t):
    c, s = np.cosh(t / 2), np.sinh(t / 2)
    return (c - 1) * (1 + 2 * c - 2 * lam * s)


def g_prime(lam, t):
    c, s = np.cosh(t / 2), np.sinh(t / 2)
    return 0.5 * s * (1 + 2 * c - 2 * lam * s) + (c - 1) * (s - lam * c)


def radius_for_lambda3(lambda3):
    """r with 2 lambda3 = tanh(r / 2)."""
    if not abs(lambda3) < 0.5:
        raise DomainError("need |lambda3| < 1/2")
    return 2 * np.arctanh(2 * lambda3)


@dataclass(frozen=True)
class DisplacementFrame:
    r: float
    lambdas: tuple
    b: tuple

    def __post_init__(self):
        b = np.asarray(self.b, dtype=float)
        lam = np.asarray(self.lambdas, dtype=float)
        if b.shape != (3,) or lam.shape != (3,):
            raise ValueError("frame needs three curvatures and three b components")
        if abs(b @ b - 1) > 1e-12:
            raise ValueError(f"b is not a unit vector (|b|^2 - 1 = {b @ b - 1:.3g})")
        if min(abs(lam[0] - lam[1]), abs(lam[1] - lam[2]), abs(lam[0] - lam[2])) == 0:
            raise ValueError("principal curvatures must be pairwise distinct")

    @classmethod
    def from_lambda3(cls, lambda3):
        """The non-Hopf family with given lambda3; r solves 2 lambda3 = tanh(r/2)."""
        l1, l2 = lambda_relations(lambda3)
        b1sq, b2sq = b_from_lambda(lambda3)
        b = (np.sqrt(b1sq), np.sqrt(b2sq), 0.0)
        b = tuple(np.asarray(b) / np.linalg.norm(b))
        return cls(float(radius_for_lambda3(lambda3)), (l1, l2, float(lambda3)), b)


@dataclass(frozen=True)
class DisplacementMatrices:
    D: np.ndarray
    Dprime: np.ndarray
    C: np.ndarray


def build_D(frame: DisplacementFrame, t: float) -> DisplacementMatrices:
    l1, l2, _ = frame.lambdas
    b1, b2, b3 = frame.b
    if abs(b3) > 1e-12:
        raise DomainError("D(t) is defined for frames with b3 = 0")
    f1, f2 = f_profile(l1, t), f_profile(l2, t)
    g1, g2 = g_profile(l1, t), g_profile(l2, t)
    fp1, fp2 = f_prime(l1, t), f_prime(l2, t)
    gp1, gp2 = g_prime(l1, t), g_prime(l2, t)
    D = np.array([[f1 + b1**2 * g1, b1 * b2 * g1], [b1 * b2 * g2, f2 + b2**2 * g2]])
    Dp = np.array([[fp1 + b1**2 * gp1, b1 * b2 * gp1], [b1 * b2 * gp2, fp2 + b2**2 * gp2]])
    if abs(np.linalg.det(D)) < 1e-14:
        raise NumericError(f"D({t}) is singular")
    return DisplacementMatrices(D, Dp, -Dp @ np.linalg.inv(D))


def verify_DC_identities(frame: DisplacementFrame) -> dict:
    """Absolute residuals of the determinant, trace and spectrum identities at t = r."""
    l1, l2, l3 = frame.lambdas
    r = frame.r
    e1, e2 = lambda_relations(l3)
    if abs(2 * l3 - np.tanh(r / 2)) > 1e-12 or abs(l1 - e1) > 1e-12 or abs(l2 - e2) > 1e-12:
        raise DomainError("frame is not a member of the non-Hopf family at its radius")
    m = build_D(frame, r)
    D, Dp, C = m.D, m.Dprime, m.C
    sech3 = np.cosh(r / 2) ** -3
    ddet = D[0, 0] * Dp[1, 1] + Dp[0, 0] * D[1, 1] - D[0, 1] * Dp[1, 0] - Dp[0, 1] * D[1, 0]
    eig = np.sort_complex(np.linalg.eigvals(C))
    return {
        "det_D": abs(np.linalg.det(D) - sech3),
        "det_Dprime": abs(np.linalg.det(Dp) + sech3 / 4),
        "det_D_derivative": abs(ddet),
        "det_C": abs(np.linalg.det(C) + 0.25),
        "trace_C": abs(np.trace(C)),
        "eig_C": float(np.abs(eig - np.array([-0.5, 0.5])).max()),
        "f3_prime": abs(f_prime(l3, r)),
    }


# -- Jacobi fields along a normal geodesic ---------------------------------------------


@dataclass(frozen=True)
class JacobiInput:
    point: np.ndarray
    normal: np.ndarray  # unit xi at point; geodesic c(t) = exp(t xi)
    v: np.ndarray  # zeta(0)
    sv: np.ndarray  # S v, so zeta'(0) = -S v

    def __post_init__(self):
        for name in ("point", "normal", "v", "sv"):
            a = np.asarray(getattr(self, name), dtype=float)
            if a.shape != (4,) or not np.all(np.isfinite(a)):
                raise ValueError(f"{name} must be a finite 4-vector")
        if abs(amb.norm(self.point, self.normal) - 1) > 1e-10:
            raise ValueError("normal must have unit length")


@dataclass(frozen=True)
class JacobiSolution:
    t: float
    zeta: np.ndarray
    zeta_prime: np.ndarray
    transported: np.ndarray  # B_v(t)
    point: np.ndarray
    velocity: np.ndarray


def jacobi_integrate(inp: JacobiInput, t: float, rtol: float = 1e-12) -> JacobiSolution:
    """Integrate the Jacobi field with the closed-form curvature tensor.

    State: geodesic (x, x'), zeta and zeta' as coordinate vectors, and B_v; the
    covariant derivatives are turned into coordinate ones with the Christoffel map.
    """
    v = np.asarray(inp.v, dtype=float)
    zp0 = -np.asarray(inp.sv, dtype=float)
    if t == 0:
        return JacobiSolution(0.0, v.copy(), zp0, v.copy(), np.asarray(inp.point, float),
                              np.asarray(inp.normal, float))

    def rhs(x, vel, extra):
        zeta, zp, bv = extra[:4], extra[4:8], extra[8:12]
        out = np.empty(12)
        out[:4] = zp - amb.christoffel(x, vel, zeta)
        out[4:8] = -amb.curvature_closed_form(x, zeta, vel, vel) - amb.christoffel(x, vel, zp)
        out[8:] = -amb.christoffel(x, vel, bv)
        return out

    sol = amb.integrate_along_geodesic(
        inp.point, inp.normal, t, rhs, np.concatenate([v, zp0, v]), rtol=rtol, atol=rtol * 1e-2
    )
    y = sol.y[:, -1]
    return JacobiSolution(float(t), y[8:12], y[12:16], y[16:20], y[:4], y[4:8])


def closed_form_field(lam, beta, sol: JacobiSolution):
    """f(lam, t) B_v(t) + beta g(lam, t) J c'(t) on the geodesic of ``sol``."""
    t = sol.t
    return f_profile(lam, t) * sol.transported + beta * g_profile(lam, t) * amb.apply_J(sol.velocity)


def displaced_shape(inp: JacobiInput, r: float, rtol: float = 1e-12):
    """Shape operator of the displaced hypersurface applied to Phi^r_* v, i.e. -zeta'(r)."""
    return -jacobi_integrate(inp, r, rtol).zeta_prime


def synthetic_frame(point, normal, b):
    """Orthonormal (U1, U2, U3) of normal^perp with <J normal, U_i> = b_i.

    The frame orientation is chosen so that <J U_i, U_{i+1}> = +b_{i+2}.
    """
    x = np.asarray(point, float)
    xi = np.asarray(normal, float)
    b = np.asarray(b, float)
    e0 = amb.apply_J(xi)
    for trial in np.eye(4):
        e1 = trial - amb.metric_eval(x, trial, xi) * xi - amb.metric_eval(x, trial, e0) * e0
        if amb.norm(x, e1) > 0.1:
            break
    e1 = e1 / amb.norm(x, e1)
    q, _ = np.linalg.qr(np.column_stack([b, np.eye(3)]))
    q = q * np.sign(q[:, 0] @ b)
    for sign in (1.0, -1.0):
        E = np.stack([e0, e1, sign * amb.apply_J(e1)])
        U = q @ E
        c = np.array([amb.metric_eval(x, amb.apply_J(U[(i + 1) % 3]), U[(i + 2) % 3]) for i in range(3)])
        if np.allclose(c, b, atol=1e-10):
            return U
    raise NumericError("could not orient the synthetic frame")


# -- displacement of patches ----------------------------------------------------------


def displace_patch(patch: HypersurfacePatch, r: float, focal_tol: float = FOCAL_TOL, steps=None):
    """Equidistant patch q(u) = exp_{F(u)}(r xi(u)).

    The new normal is minus the transported xi, i.e. it points back toward the
    base for r > 0. With this orientation the displaced ruled hypersurface carries
    2 lambda3 = tanh(r/2) with r signed. (Along c itself, as in ``displaced_shape``,
    the shape operator is taken with respect to c'(r), the opposite normal.)
    """
    if r == 0:
        return patch
    steps = steps or int(256 * max(1, int(np.ceil(abs(r)))))

    def immersion(u):
        x, _, xi = patch.frame(u)
        return amb.geodesic_flow(x, r * xi, steps)[0]

    def eta(u):
        x, _, xi = patch.frame(u)
        return -amb.geodesic_flow(x, r * xi, steps)[1] / r

    info = dict(patch.info)
    info.update({"base": patch.name, "displacement": r})
    shifted = HypersurfacePatch(f"{patch.name}@{r:+.7g}", immersion, patch.grid, analytic=False, info=info)
    nodes = patch.grid.nodes()
    sv = singular_values(shifted.point(nodes), shifted.differential(nodes))
    worst = int(np.argmin(sv.min(axis=-1)))
    if sv[worst].min() < focal_tol:
        raise FocalPointError(
            f"displacement by r = {r} hits a focal point at u = {nodes[worst]}",
            params=nodes[worst], singular_values=sv[worst],
        )
    return orient(shifted, eta)
