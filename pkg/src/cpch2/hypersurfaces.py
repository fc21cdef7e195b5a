"""Model hypersurfaces of CH^2 as parametrized patches, and their principal data.

A patch is an immersion of a small box in R^3 (vectorized: ``(N, 3) -> (N, 4)``).
The unit normal comes from the cofactor covector of the differential raised by
the metric; a per-patch sign fixes the orientation. The shape operator is
measured by differencing the normal field along the coordinate directions,
adding the Christoffel correction and solving the generalized symmetric
eigenproblem against the induced metric.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np
import scipy.linalg

from . import ambient as amb
from .errors import NotApplicable, NumericError

SHAPE_STEP = 1e-5
COMPLEX_STEP = 1e-20
FD_STEP = 2e-3
CLUSTER_TOL = 1e-4
HOPF_ANGLE_TOL = 1e-4
RANK_TOL = 1e-8
ASYMMETRY_TOL = 1e-4

_FD6 = np.array([-1 / 60, 3 / 20, -3 / 4, 0.0, 3 / 4, -3 / 20, 1 / 60])
_FD6_OFFSETS = np.arange(-3, 4)


@dataclass(frozen=True)
class Grid:
    lower: tuple
    upper: tuple
    counts: tuple

    def __post_init__(self):
        if len(self.lower) != 3 or len(self.upper) != 3 or len(self.counts) != 3:
            raise ValueError("grid needs three axes")
        if min(self.counts) < 1:
            raise ValueError("grid counts must be positive")

    @property
    def center(self):
        return 0.5 * (np.asarray(self.lower, float) + np.asarray(self.upper, float))

    def nodes(self):
        axes = [
            np.linspace(lo, hi, n) if n > 1 else np.array([0.5 * (lo + hi)])
            for lo, hi, n in zip(self.lower, self.upper, self.counts)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def with_counts(self, counts):
        return replace(self, counts=tuple(int(c) for c in counts))


@dataclass(frozen=True)
class HypersurfacePatch:
    """Immersion of a parameter box together with its orientation rule.

    ``analytic`` marks immersions built only from holomorphic operations, whose
    differential is then taken by complex step; otherwise a 6th-order central
    stencil is used.
    """

    name: str
    immersion: Callable
    grid: Grid
    orientation: float = 1.0
    analytic: bool = True
    info: dict = field(default_factory=dict)

    def point(self, u):
        u = np.atleast_2d(np.asarray(u))
        return self.immersion(u)

    def differential(self, u):
        u = np.atleast_2d(np.asarray(u, dtype=float))
        cols = []
        if self.analytic:
            for a in range(3):
                du = np.zeros(3, dtype=complex)
                du[a] = 1j * COMPLEX_STEP
                cols.append(np.imag(self.immersion(u + du)) / COMPLEX_STEP)
        else:
            n = u.shape[0]
            shifts = []
            for a in range(3):
                e = np.zeros(3)
                e[a] = FD_STEP
                shifts.append(u[None, :, :] + _FD6_OFFSETS[:, None, None] * e)
            pts = self.immersion(np.concatenate(shifts).reshape(-1, 3)).reshape(3, 7, n, 4)
            for a in range(3):
                cols.append(np.einsum("k,kni->ni", _FD6, pts[a]) / FD_STEP)
        return np.stack(cols, axis=-1)

    def normal(self, u, x=None, dF=None):
        if x is None:
            x = self.point(u)
        if dF is None:
            dF = self.differential(u)
        return self.orientation * unit_normal(x, dF)

    def frame(self, u):
        """Points, differentials and unit normals at parameter points u."""
        x = self.point(u)
        dF = self.differential(u)
        return x, dF, self.orientation * unit_normal(x, dF)


def cofactor_covector(dF):
    """Covector annihilating the three columns of dF (..., 4, 3)."""
    rows = []
    for k in range(4):
        minor = np.delete(dF, k, axis=-2)
        rows.append((-1) ** k * np.linalg.det(minor))
    return np.stack(rows, axis=-1)


def unit_normal(x, dF):
    omega = cofactor_covector(dF)
    nu = np.einsum("...ij,...j->...i", amb.inverse_metric_matrix(x), omega)
    return nu / np.sqrt(amb.metric_eval(x, nu, nu))[..., None]


def induced_metric(x, dF):
    return np.einsum("...ia,...ij,...jb->...ab", dF, amb.metric_matrix(x), dF)


def singular_values(x, dF):
    """Singular values of dF measured in the ambient and Euclidean parameter metrics."""
    gram = induced_metric(np.real(x), np.real(dF))
    return np.sqrt(np.clip(np.linalg.eigvalsh(gram), 0.0, None))


def check_rank(patch, nodes=None, tol=RANK_TOL):
    nodes = patch.grid.nodes() if nodes is None else np.atleast_2d(nodes)
    sv = singular_values(patch.point(nodes), patch.differential(nodes))
    bad = sv.min(axis=-1) <= tol
    if np.any(bad):
        i = int(np.argmax(bad))
        raise NumericError(f"{patch.name}: immersion drops rank at u = {nodes[i]}, sv = {sv[i]}")
    return sv


def orient(patch, reference):
    """Return the patch with the normal sign making g(xi, reference(u)) > 0 at the box center."""
    c = patch.grid.center[None, :]
    x, dF, _ = patch.frame(c)
    xi = unit_normal(x, dF)
    s = amb.metric_eval(x, xi, reference(c))[0]
    if abs(s) < 1e-8:
        raise NumericError(f"{patch.name}: orientation reference is tangent at the box center")
    return replace(patch, orientation=float(np.sign(s)))


# -- principal data ---------------------------------------------------------------


def cluster_eigenvalues(lambdas, tol=CLUSTER_TOL):
    """Group sorted eigenvalues; neighbours closer than tol share a class."""
    order = np.argsort(lambdas, kind="stable")
    groups = [[int(order[0])]]
    for prev, cur in zip(order[:-1], order[1:]):
        if abs(lambdas[cur] - lambdas[prev]) < tol:
            groups[-1].append(int(cur))
        else:
            groups.append([int(cur)])
    return groups


@dataclass
class PrincipalData:
    lambdas: np.ndarray
    b: np.ndarray
    frame: np.ndarray | None = None  # rows U_i, ambient
    coords: np.ndarray | None = None  # rows: parameter components of U_i
    at: np.ndarray | None = None
    point: np.ndarray | None = None
    normal: np.ndarray | None = None

    def __post_init__(self):
        self.lambdas = np.asarray(self.lambdas, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        if self.lambdas.shape != (3,) or self.b.shape != (3,):
            raise ValueError("principal data needs three curvatures and three b components")

    def clusters(self, tol=CLUSTER_TOL):
        return cluster_eigenvalues(self.lambdas, tol)

    def multiplicities(self, tol=CLUSTER_TOL):
        return tuple(len(c) for c in self.clusters(tol))

    def g(self, tol=CLUSTER_TOL) -> int:
        return len(self.clusters(tol))

    @property
    def mean_curvature(self):
        return float(self.lambdas.sum())

    def to_dict(self):
        out = {"lambda": [float(v) for v in self.lambdas], "b": [float(v) for v in self.b]}
        if self.frame is not None:
            out["frame"] = np.asarray(self.frame, float).tolist()
        if self.point is not None:
            out["point"] = np.asarray(self.point, float).tolist()
        if self.normal is not None:
            out["normal"] = np.asarray(self.normal, float).tolist()
        return out

    @classmethod
    def from_dict(cls, d):
        if not isinstance(d, dict) or "lambda" not in d or "b" not in d:
            raise ValueError("principal data must be an object with 'lambda' and 'b'")
        lam = np.asarray(d["lambda"], dtype=float)
        b = np.asarray(d["b"], dtype=float)
        if lam.shape != (3,) or b.shape != (3,) or not np.all(np.isfinite(lam)) or not np.all(
            np.isfinite(b)
        ):
            raise ValueError("'lambda' and 'b' must be lists of three finite reals")
        kw = {}
        for key in ("frame", "point", "normal"):
            if key in d:
                kw[key] = np.asarray(d[key], dtype=float)
        if "frame" in kw and kw["frame"].shape != (3, 4):
            raise ValueError("'frame' must be a 3 x 4 array")
        order = np.argsort(lam, kind="stable")
        if "frame" in kw:
            kw["frame"] = kw["frame"][order]
        return cls(lam[order], b[order], **kw)


def _canonical_frame(lam, C, x, dF, xi):
    """Principal frame with Jxi aligned inside degenerate clusters and signs fixed."""
    U = np.einsum("ia,ak->ki", dF, C)  # rows are U_k
    jxi = amb.apply_J(xi)
    for group in cluster_eigenvalues(lam):
        if len(group) < 2:
            continue
        b = amb.metric_eval(x, U[group], jxi)
        p = b @ C.T[group]  # parameter components of the projection of Jxi
        if np.linalg.norm(b) > 1e-8:
            basis = [p / np.linalg.norm(b)]
        else:
            basis = []
        gram = induced_metric(x, dF)
        for k in group:
            v = C[:, k].copy()
            for q in basis:
                v = v - (q @ gram @ v) * q
            nv = np.sqrt(v @ gram @ v)
            if nv > 1e-6 and len(basis) < len(group):
                basis.append(v / nv)
        for k, q in zip(group, basis):
            C[:, k] = q
    U = np.einsum("ia,ak->ki", dF, C)
    b = amb.metric_eval(x, U, jxi)
    for k in range(3):
        if abs(b[k]) > 1e-6:
            s = np.sign(b[k])
        else:
            s = np.sign(C[np.argmax(np.abs(C[:, k])), k])
        C[:, k] *= s
        U[k] *= s
        b[k] *= s
    return C, U, b


def measure(patch, nodes=None, h=SHAPE_STEP):
    """Principal data at parameter nodes.

    Returns (list of PrincipalData, shape operator matrices (N, 3, 3) in parameter
    coordinates).
    """
    nodes = patch.grid.nodes() if nodes is None else np.atleast_2d(np.asarray(nodes, float))
    n = nodes.shape[0]
    offsets = np.zeros((7, 3))
    for a in range(3):
        offsets[1 + 2 * a, a] = h
        offsets[2 + 2 * a, a] = -h
    stencil = (nodes[None, :, :] + offsets[:, None, :]).reshape(-1, 3)
    x, dF, xi = patch.frame(stencil)
    x, dF, xi = x.reshape(7, n, 4), dF.reshape(7, n, 4, 3), xi.reshape(7, n, 4)
    x0, dF0, xi0 = x[0], dF[0], xi[0]

    sv = singular_values(x0, dF0)
    if np.any(sv.min(axis=-1) <= RANK_TOL):
        raise NumericError(f"{patch.name}: rank deficient differential on the grid")

    second = np.empty((n, 3, 3))
    for a in range(3):
        dxi = (xi[1 + 2 * a] - xi[2 + 2 * a]) / (2 * h)
        cov = dxi + amb.christoffel(x0, dF0[..., a], xi0)
        for b in range(3):
            second[:, a, b] = -amb.metric_eval(x0, cov, dF0[..., b])
    gram = induced_metric(x0, dF0)
    scale = np.maximum(1.0, np.abs(second).max(axis=(1, 2)))
    asym = np.abs(second - np.swapaxes(second, 1, 2)).max(axis=(1, 2)) / scale
    if np.any(asym > ASYMMETRY_TOL):
        raise NumericError(
            f"{patch.name}: second fundamental form is not symmetric (residual {asym.max():.3g})"
        )
    second = 0.5 * (second + np.swapaxes(second, 1, 2))

    out, mats = [], []
    for i in range(n):
        lam, C = scipy.linalg.eigh(second[i], gram[i])
        C, U, b = _canonical_frame(lam, C, x0[i], dF0[i], xi0[i])
        out.append(PrincipalData(lam, b, U, C.T.copy(), nodes[i].copy(), x0[i].copy(), xi0[i].copy()))
        mats.append(np.linalg.solve(gram[i], second[i]))
    return out, np.array(mats)


def shape_operator(patch, u, h=SHAPE_STEP):
    data, mats = measure(patch, np.atleast_2d(u), h)
    return mats[0], data[0]


def spread(data):
    """Largest per-index spread of the principal curvatures across nodes."""
    lam = np.array([d.lambdas for d in data])
    return float((lam.max(axis=0) - lam.min(axis=0)).max())


def hopf_angle(data, tol=CLUSTER_TOL):
    """Sine of the angle between Jxi and its closest principal eigenspace."""
    b2 = np.asarray(data.b) ** 2
    total = b2.sum()
    best = max(b2[g].sum() for g in cluster_eigenvalues(data.lambdas, tol))
    return float(np.sqrt(max(0.0, 1.0 - best / total)))


def is_hopf(data, tol=HOPF_ANGLE_TOL):
    return hopf_angle(data) < tol


def hopf_check(patch, u, tol=HOPF_ANGLE_TOL):
    _, data = shape_operator(patch, u)
    return is_hopf(data, tol), data.b


def ruled_form_residual(data, b_tol=1e-3):
    """Deviation of the second fundamental form from the ruled model.

    With X- and X+ the unit principal vectors for the two curvatures whose
    eigenvectors carry Jxi, and Z = (X+ - X-)/sqrt(2), the model form has
    II(Z, Jxi) = 1/2 and vanishes on every other pair of the basis (Z, U0, Jxi).
    """
    groups = cluster_eigenvalues(data.lambdas)
    if len(groups) != 3:
        raise NotApplicable("ruled form check needs three distinct principal curvatures")
    lam = np.asarray(data.lambdas)
    b = np.abs(np.asarray(data.b))
    k0 = int(np.argmin(b))
    if b[k0] > b_tol:
        raise NotApplicable("ruled form check needs a principal direction orthogonal to Jxi")
    lo, hi = sorted((k for k in range(3) if k != k0), key=lambda k: lam[k])
    z = np.zeros(3)
    z[lo], z[hi] = -1 / np.sqrt(2), 1 / np.sqrt(2)
    e0 = np.zeros(3)
    e0[k0] = 1.0
    basis = np.stack([z, e0, b])
    form = basis @ np.diag(lam) @ basis.T
    model = np.zeros((3, 3))
    model[0, 2] = model[2, 0] = 0.5
    return float(np.abs(form - model).max())


def ruled_form_check(patch, u):
    _, data = shape_operator(patch, u)
    return ruled_form_residual(data)


# -- constructors -----------------------------------------------------------------

ORIGIN = np.zeros(4)


def _flow_steps(length):
    return int(256 * max(1, int(np.ceil(length))))


def geodesic_sphere(r, grid=None, steps=None):
    """Geodesic sphere of radius r about the origin, inward normal."""
    if not r > 0:
        raise ValueError("sphere radius must be positive")
    grid = grid or Grid((0.45, -0.25, -0.25), (0.95, 0.25, 0.25), (3, 2, 2))
    steps = steps or _flow_steps(r)

    def direction(u):
        a, b, c = u[:, 0], u[:, 1], u[:, 2]
        return 0.5 * np.stack(
            [np.cos(a) * np.cos(b), np.cos(a) * np.sin(b), np.sin(a) * np.cos(c), np.sin(a) * np.sin(c)],
            axis=-1,
        )

    def immersion(u):
        return amb.geodesic_flow(np.zeros_like(direction(u)), r * direction(u), steps)[0]

    def inward(u):
        return -amb.geodesic_flow(np.zeros((len(u), 4)), r * direction(u), steps)[1]

    patch = HypersurfacePatch("sphere", immersion, grid, info={"family": "sphere", "radius": r})
    return orient(patch, inward)


def horosphere(grid=None):
    """Horosphere through the origin centered at the ideal point (1, 0).

    It is the level set |1 - z1|^2 = 1 - |z|^2 of the Busemann function, solved
    for Re z1 over (Im z1, z2).
    """
    grid = grid or Grid((-0.25, -0.25, -0.25), (0.25, 0.25, 0.25), (3, 2, 2))

    def immersion(u):
        y, p, q = u[:, 0], u[:, 1], u[:, 2]
        k = 2 * y**2 + p**2 + q**2
        re = k / (1 + np.sqrt(1 - 2 * k))  # root of 2 X^2 - 2 X + k = 0 near 0
        return np.stack([re, y, p, q], axis=-1)

    def toward_ideal_point(u):
        return np.tile([1.0, 0, 0, 0], (len(u), 1))

    patch = HypersurfacePatch("horosphere", immersion, grid, info={"family": "horosphere"})
    return orient(patch, toward_ideal_point)


def _core_normal_frame(core, p):
    """g-orthonormal frame (n1, n2) of the normal plane of the core slice at p."""
    if core == "RH2":
        e1 = np.zeros_like(p)
        e1[:, 1] = 1.0
        e3 = np.zeros_like(p)
        e3[:, 3] = 1.0
        n1 = e1 / amb.norm(p, e1)[:, None]
        v = e3 - amb.metric_eval(p, e3, n1)[:, None] * n1
        n2 = v / amb.norm(p, v)[:, None]
    elif core == "CH1":
        e2 = np.zeros_like(p)
        e2[:, 2] = 1.0
        n1 = e2 / amb.norm(p, e2)[:, None]
        n2 = amb.apply_J(n1)
    else:
        raise ValueError(f"unknown tube core {core!r}; expected 'CH1' or 'RH2'")
    return n1, n2


def tube(core, r, grid=None, steps=None):
    """Tube of radius r around the totally geodesic CH1 or RH2, normal toward the core."""
    if not r > 0:
        raise ValueError("tube radius must be positive")
    grid = grid or Grid((-0.25, -0.25, 0.2), (0.25, 0.25, 0.7), (3, 2, 2))
    steps = steps or _flow_steps(r)
    chart = amb.totally_geodesic_chart(core)

    def start(u):
        p = u[:, :2] @ chart.basis
        n1, n2 = _core_normal_frame(core, p)
        nu = np.cos(u[:, 2:3]) * n1 + np.sin(u[:, 2:3]) * n2
        return p, r * nu

    def immersion(u):
        return amb.geodesic_flow(*start(u), steps)[0]

    def toward_core(u):
        return -amb.geodesic_flow(*start(u), steps)[1]

    name = f"tube-{core.lower()}"
    patch = HypersurfacePatch(name, immersion, grid, info={"family": name, "radius": r, "core": core})
    return orient(patch, toward_core)


HOROCYCLE_CURVATURE = 0.5


@dataclass(frozen=True)
class Horocycle:
    """Unit-speed curve of geodesic curvature 1/2 in RH2 = {z real}, through the origin.

    On the real slice the metric is four times the Klein metric, so the curve is
    the image of a Poincare-disk horocycle: with t = s/4,
    (Re z1, Re z2) = (2t, 2t^2) / (1 + 2t^2). Initial tangent e0/2, curving toward e2.
    ``evaluate_frenet`` integrates T' = kN, N' = -kT instead and serves as a check.
    """

    curvature: float = HOROCYCLE_CURVATURE
    steps: int = 256

    def evaluate(self, s):
        if self.curvature != HOROCYCLE_CURVATURE:
            return self.evaluate_frenet(s)
        s = np.asarray(s)
        t = s / 4
        den = 1 + 2 * t**2
        zero = np.zeros_like(t)
        x = np.stack([2 * t / den, zero, 2 * t**2 / den, zero], axis=-1)
        # d/ds of the coordinates
        T = np.stack([(1 - 2 * t**2) / den**2 / 2, zero, t / den**2, zero], axis=-1)
        e2 = np.zeros(4)
        e2[2] = 1.0
        n = e2 - amb.metric_eval(x, e2, T)[..., None] * T
        N = n / amb.norm(x, n)[..., None]
        return x, T, N

    def evaluate_frenet(self, s):
        s = np.asarray(s)
        shape = s.shape
        s = s.reshape(-1)
        n = s.shape[0]
        dtype = complex if s.dtype.kind == "c" else float
        x = np.zeros((n, 4), dtype=dtype)
        T = np.zeros((n, 4), dtype=dtype)
        N = np.zeros((n, 4), dtype=dtype)
        T[:, 0] = 0.5
        N[:, 2] = 0.5
        k = self.curvature
        h = (s / self.steps)[:, None]

        def rhs(x, T, N):
            return T, -amb.christoffel(x, T, T) + k * N, -amb.christoffel(x, T, N) - k * T

        for _ in range(self.steps):
            a = rhs(x, T, N)
            b = rhs(x + 0.5 * h * a[0], T + 0.5 * h * a[1], N + 0.5 * h * a[2])
            c = rhs(x + 0.5 * h * b[0], T + 0.5 * h * b[1], N + 0.5 * h * b[2])
            d = rhs(x + h * c[0], T + h * c[1], N + h * c[2])
            x = x + h / 6 * (a[0] + 2 * b[0] + 2 * c[0] + d[0])
            T = T + h / 6 * (a[1] + 2 * b[1] + 2 * c[1] + d[1])
            N = N + h / 6 * (a[2] + 2 * b[2] + 2 * c[2] + d[2])
        return x.reshape(shape + (4,)), T.reshape(shape + (4,)), N.reshape(shape + (4,))

    def measured_curvature(self, s, h=1e-3):
        """Geodesic curvature from second differences of positions only."""
        s = np.asarray(s, dtype=float)
        xm, _, _ = self.evaluate(s - h)
        x0, _, _ = self.evaluate(s)
        xp, _, _ = self.evaluate(s + h)
        vel = (xp - xm) / (2 * h)
        acc = (xp - 2 * x0 + xm) / h**2
        cov = acc + amb.christoffel(x0, vel, vel)
        speed = amb.norm(x0, vel)
        return amb.norm(x0, cov) / speed**2


def horocycle_in_RH2(steps=256):
    return Horocycle(steps=steps)


def ruled_W3(grid=None, steps=256):
    """Ruled minimal hypersurface: the complex geodesic through h(s) orthogonal to h'(s).

    F(s, a, b) = exp_{h(s)}(a N(s) + b JN(s)); N(s) spans, over C, the Hermitian
    orthogonal complement of the horocycle tangent. Normal: +Jh'(s) along the horocycle.
    """
    grid = grid or Grid((-0.35, -0.2, -0.2), (0.35, 0.2, 0.2), (3, 2, 2))
    horo = Horocycle(steps=steps)

    def immersion(u):
        x, _, N = horo.evaluate(u[:, 0])
        v = u[:, 1:2] * N + u[:, 2:3] * amb.apply_J(N)
        return amb.geodesic_flow(x, v, steps)[0]

    def reference(u):
        x, T, N = horo.evaluate(u[:, 0])
        v = u[:, 1:2] * N + u[:, 2:3] * amb.apply_J(N)
        _, moved = amb.parallel_transport(x[0], v[0], amb.apply_J(T[0]), 1.0)
        return moved

    patch = HypersurfacePatch("w3", immersion, grid, info={"family": "w3"})
    return orient(patch, reference)


def export_csv(path, data, params=None):
    """Write per-node principal data as CSV (params, ambient coords, lambdas, b)."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh)
        wr.writerow(["u1", "u2", "u3", "x1", "x2", "x3", "x4",
                     "lambda1", "lambda2", "lambda3", "b1", "b2", "b3"])
        for d in data:
            at = d.at if d.at is not None else [np.nan] * 3
            pt = d.point if d.point is not None else [np.nan] * 4
            wr.writerow([repr(float(v)) for v in (*at, *pt, *d.lambdas, *d.b)])
    return path
