"""Constraint residuals, the quadratic system for the connection coefficients, and
the family decision for hypersurfaces of CH^2 with constant principal curvatures.

Indices are cyclic: d_i = lambda_{i+1} - lambda_{i+2} and
x_i = <nabla_{U_i} U_{i+1}, U_{i+2}>.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from . import ambient as amb
from .errors import DomainError, NotApplicable, NumericError
from .hypersurfaces import CLUSTER_TOL, PrincipalData, cluster_eigenvalues, measure

MEASURED_TOL = 1e-3
ANALYTIC_TOL = 1e-9
CRITICAL_RADIUS = float(np.log(2 + np.sqrt(3)))


def _nxt(i, k=1):
    return (i + k) % 3


@dataclass(frozen=True)
class CurvatureTriple:
    lam: tuple

    def __post_init__(self):
        lam = tuple(float(v) for v in self.lam)
        if len(lam) != 3 or not all(np.isfinite(lam)):
            raise ValueError("a curvature triple has three finite entries")
        object.__setattr__(self, "lam", lam)

    @property
    def d(self):
        l1, l2, l3 = self.lam
        return (l2 - l3, l3 - l1, l1 - l2)

    @property
    def distinct(self):
        return all(v != 0 for v in self.d)

    def require_distinct(self):
        if not self.distinct:
            raise DomainError(f"principal curvatures {self.lam} are not pairwise distinct")
        return np.array(self.lam), np.array(self.d)


def _arrays(t, *vecs):
    lam, d = t.require_distinct()
    return (lam, d) + tuple(np.asarray(v, dtype=float) for v in vecs)


# -- residuals of the frame constraints ------------------------------------------------


def residual_eq1(point, normal, frame, b):
    """<J U_i, U_{i+1}> - b_{i+2}."""
    point, normal, frame, b = map(np.asarray, (point, normal, frame, b))
    c = np.array([amb.metric_eval(point, amb.apply_J(frame[i]), frame[_nxt(i)]) for i in range(3)])
    return c - b[[2, 0, 1]]


def residual_eq2(t: CurvatureTriple, b, x):
    lam, d, b, x = _arrays(t, b, x)
    return np.array(
        [3 * b[i] ** 2 - 1 - 4 * d[_nxt(i, 2)] * x[_nxt(i, 2)] + 4 * d[_nxt(i)] * x[_nxt(i)] for i in range(3)]
    )


def residual_eq6(t: CurvatureTriple, b, x):
    """Gauss equation for the plane (U_i, U_{i+1}) written in the frame data."""
    lam, d, b, x = _arrays(t, b, x)
    out = np.empty(3)
    for i in range(3):
        j, k = _nxt(i), _nxt(i, 2)
        bb = b**2
        out[i] = (
            8 * lam[i] * lam[j] - 2 - 12 * bb[k]
            + 9 * bb[k] * (1 - bb[k]) / d[k] ** 2
            + 8 * (x[i] * x[j] - x[i] * x[k] - x[j] * x[k])
            + 6 / d[k] * ((bb[k] - bb[j]) * x[i] - (bb[k] - bb[i]) * x[j] + bb[j] * lam[i] - bb[i] * lam[j])
        )
    return out


def x_from_b(t: CurvatureTriple, b):
    """Connection coefficients forced by constant b with b_3 = 0."""
    lam, d, b = _arrays(t, b)
    return np.array([lam[0] + 0.75 * b[0] ** 2 / d[1], lam[1] - 0.75 * b[1] ** 2 / d[0], lam[2]])


# -- the quadratic system ----------------------------------------------------------------

_T = np.array([[-1.0, 1.0, 1.0], [1.0, -1.0, 1.0], [1.0, 1.0, -1.0]])


@dataclass(frozen=True)
class QuadraticSystem:
    """Rows i = 1, 2, 3: W_i (x_i + x_{i+1})^2 + L_i . x + K_i = 0.

    ``Lam``/``Omega`` are the normalized coefficients, (x_i + x_{i+1})^2 + Lam_i . x = Omega_i.
    In y-variables (x = T y) row i reads 4 y_i^2 + Lam_bar_i . y = Omega_bar_i.
    """

    triple: CurvatureTriple
    weight: np.ndarray
    L: np.ndarray
    K: np.ndarray
    Lam: np.ndarray
    Omega: np.ndarray
    Lam_bar: np.ndarray
    Omega_bar: np.ndarray

    def raw(self, x):
        x = np.asarray(x, dtype=float)
        s = np.stack([x[..., i] + x[..., _nxt(i)] for i in range(3)], axis=-1)
        return self.weight * s**2 + x @ self.L.T + self.K

    def normalized(self, x):
        x = np.asarray(x, dtype=float)
        s = np.stack([x[..., i] + x[..., _nxt(i)] for i in range(3)], axis=-1)
        return s**2 + x @ self.Lam.T - self.Omega

    def jacobian(self, x):
        x = np.asarray(x, dtype=float)
        J = np.broadcast_to(self.Lam, x.shape[:-1] + (3, 3)).copy()
        for i in range(3):
            s = x[..., i] + x[..., _nxt(i)]
            J[..., i, i] += 2 * s
            J[..., i, _nxt(i)] += 2 * s
        return J

    def y_form(self, y):
        y = np.asarray(y, dtype=float)
        return 4 * y**2 + y @ self.Lam_bar.T - self.Omega_bar


def build_system(t: CurvatureTriple) -> QuadraticSystem:
    lam, d = t.require_distinct()
    W = np.empty(3)
    L = np.zeros((3, 3))
    K = np.empty(3)
    for i in range(3):
        j, k = _nxt(i), _nxt(i, 2)
        W[i] = 8 * d[i] * d[j] / d[k] ** 2
        L[i, i] = 2 * d[i] * (4 + 2 * lam[i] / d[k] - 1 / d[k] ** 2)
        L[i, j] = -2 * d[j] * (4 - 2 * lam[j] / d[k] - 1 / d[k] ** 2)
        L[i, k] = -4 * (lam[i] + lam[j])
        K[i] = 1 / d[k] ** 2 - 2 + 4 * lam[i] * lam[j]
    Lam = L / W[:, None]
    Omega = -K / W
    # row i carries (x_i + x_{i+1})^2 = 4 y_{i+2}^2; reorder so row k carries y_k
    order = [1, 2, 0]
    return QuadraticSystem(t, W, L, K, Lam, Omega, (Lam @ _T)[order], Omega[order])


@dataclass(frozen=True)
class Root:
    x: tuple
    residual: float  # max |raw residual| of the quadratic system
    start: int  # index of the first start that converged here
    hits: int


@dataclass(frozen=True)
class SolutionSet:
    roots: tuple
    starts: int
    iterations: int
    dedup_radius: float
    seed: int
    converged: int
    diagnostics: dict = field(default_factory=dict)

    def contains(self, x, tol=1e-9):
        x = np.asarray(x, dtype=float)
        return any(np.abs(np.asarray(r.x) - x).max() < tol for r in self.roots)

    def as_array(self):
        return np.array([r.x for r in self.roots]).reshape(-1, 3)


def _newton(system, x, iterations):
    """Damped Newton on all starts at once; halves the step until |F| decreases."""
    F = system.normalized(x)
    nf = np.abs(F).max(axis=-1)
    for _ in range(iterations):
        J = system.jacobian(x)
        step = np.einsum("nij,nj->ni", np.linalg.pinv(J), F)
        alpha = np.ones(len(x))
        for _ in range(30):
            trial = x - alpha[:, None] * step
            nt = np.abs(system.normalized(trial)).max(axis=-1)
            worse = ~(nt < nf) & (nf > 1e-15)
            if not worse.any():
                break
            alpha = np.where(worse, alpha / 2, alpha)
        x = np.where(np.isfinite(trial), trial, x)
        F = system.normalized(x)
        nf = np.abs(F).max(axis=-1)
    return x, nf


def _det_and_grad(system, x):
    J = system.jacobian(x)
    cof = np.array([[(-1) ** (i + j) * np.linalg.det(np.delete(np.delete(J, i, 0), j, 1))
                     for j in range(3)] for i in range(3)])
    grad = np.empty(3)
    for m in range(3):
        dJ = np.zeros((3, 3))
        for i in range(3):
            w = 2.0 * ((m == i) + (m == _nxt(i)))
            dJ[i, i] = dJ[i, _nxt(i)] = w
        grad[m] = np.sum(cof * dJ)
    return np.linalg.det(J), grad


def _polish_singular(system, x, steps=12):
    """Refine a root where the Jacobian drops rank.

    Newton only resolves such a root to about sqrt(eps); the augmented system
    F = 0, det J = 0 has a regular root there and Gauss-Newton converges fast.
    """
    for _ in range(steps):
        det, grad = _det_and_grad(system, x)
        A = np.vstack([system.jacobian(x), grad])
        rhs = np.concatenate([system.normalized(x), [det]])
        dx = np.linalg.lstsq(A, rhs, rcond=None)[0]
        x = x - dx
        if np.abs(dx).max() < 1e-16:
            break
    return x


def root_bound(system: QuadraticSystem) -> float:
    """Sup-norm bound on every real root x.

    Row k of the y-form gives 4 y_k^2 <= |Omega_bar_k| + |Lam_bar_k|_1 max|y|, hence
    max|y| <= (a + sqrt(a^2 + 16 c)) / 8; x = T y with |T|_inf = 3.
    """
    a = float(np.abs(system.Lam_bar).sum(axis=1).max())
    c = float(np.abs(system.Omega_bar).max())
    return 3 * (a + np.sqrt(a * a + 16 * c)) / 8


def solve_system(
    system: QuadraticSystem,
    seed: int = 0,
    starts: int = 200,
    box: float = 5.0,
    iterations: int = 60,
    dedup_radius: float = 1e-6,
    residual_tol: float = 1e-9,
) -> SolutionSet:
    """Real roots of the system by multistart damped Newton from scrambled Halton points.

    Starts fill [-h, h]^3 with h = max(box, root_bound(system)), so every real root
    lies inside the sampled cube and the root set does not depend on the seed.
    """
    half = max(box, root_bound(system))
    sampler = qmc.Halton(d=3, scramble=True, seed=seed)
    x0 = qmc.scale(sampler.random(starts), -half, half)
    x, nf = _newton(system, x0, iterations)
    with np.errstate(invalid="ignore"):
        raw = np.abs(system.raw(x)).max(axis=-1)
    ok = np.isfinite(raw) & (raw < residual_tol) & np.all(np.isfinite(x), axis=-1)
    roots = []
    for idx in np.flatnonzero(ok):
        for k, r in enumerate(roots):
            if np.abs(r[0] - x[idx]).max() < dedup_radius:
                roots[k] = (r[0], r[1], r[2], r[3] + 1)
                break
        else:
            roots.append((x[idx], raw[idx], int(idx), 1))
    polished = []
    for xr, res, idx, hits in roots:
        sv = np.linalg.svd(system.jacobian(xr), compute_uv=False)
        if sv[-1] < 1e-6 * sv[0]:
            cand = _polish_singular(system, xr)
            with np.errstate(invalid="ignore"):
                cres = float(np.abs(system.raw(cand)).max())
            if np.abs(cand - xr).max() < dedup_radius and cres < residual_tol:
                xr, res = cand, cres
        polished.append((xr, res, idx, hits))
    roots = sorted(polished, key=lambda r: tuple(np.round(r[0], 8)))
    found = tuple(Root(tuple(float(v) for v in r[0]), float(r[1]), r[2], r[3]) for r in roots)
    if len(found) > 8:
        raise NumericError(f"{len(found)} distinct roots exceeds the Bezout bound; dedup radius too small")
    diag = {"max_residual_converged": float(raw[ok].max()) if ok.any() else None,
            "dropped": int(starts - ok.sum()), "half_width": float(half)}
    return SolutionSet(found, starts, iterations, dedup_radius, seed, int(ok.sum()), diag)


# -- the non-Hopf branch ----------------------------------------------------------------


def lambda_relations(lambda3):
    lambda3 = float(lambda3)
    disc = 1 - 3 * lambda3**2
    if -1e-15 < disc < 0:
        disc = 0.0
    if disc < 0:
        raise DomainError(f"3 lambda3^2 > 1 for lambda3 = {lambda3}")
    s = np.sqrt(disc)
    return (float((3 * lambda3 - s) / 2), float((3 * lambda3 + s) / 2))


def family_triple(lambda3) -> CurvatureTriple:
    return CurvatureTriple(lambda_relations(lambda3) + (float(lambda3),))


def b_from_lambda(lambda3):
    lambda3 = float(lambda3)
    if not abs(lambda3) < 0.5:
        raise DomainError(f"|lambda3| must be below 1/2, got {lambda3}")
    return eq10_b(family_triple(lambda3))


def eq10_b(t: CurvatureTriple):
    lam, d = t.require_distinct()
    l3 = lam[2]
    return (float(d[1] / d[2] * (4 * d[0] * l3 - 1)), float(-d[0] / d[2] * (4 * d[1] * l3 + 1)))


def branch_constraints(lambda3, x, y):
    """The two polynomial constraints on x = lambda1 - lambda2, y = lambda1 + lambda2 - 4 lambda3."""
    l3 = float(lambda3)
    first = x**2 - y**2 - 1 + 4 * l3**2
    cubic = x**2 * (y + 11 * l3) - y**3 + l3 * y**2 + 4 * (10 * l3**2 - 1) * y + 2 * l3 * (34 * l3**2 - 7)
    return float(first), float(cubic)


def branch_solutions(lambda3, tol=1e-12):
    l3 = float(lambda3)
    cands = []
    if 1 - 3 * l3**2 >= 0:
        s = np.sqrt(1 - 3 * l3**2)
        cands += [(s, -l3), (-s, -l3)]
    if l3 != 0:
        cands += [(1 / (4 * l3), (1 - 8 * l3**2) / (4 * l3)), (-1 / (4 * l3), (1 - 8 * l3**2) / (4 * l3))]
    out = []
    for x, y in cands:
        if (x, y) in out:
            continue
        scale = max(1.0, abs(x), abs(y)) ** 3
        if max(abs(v) for v in branch_constraints(l3, x, y)) > tol * scale:
            raise NumericError(f"branch candidate {(x, y)} fails the constraints")
        out.append((float(x), float(y)))
    return out


def ellipse_axes(lambda3):
    l3 = float(lambda3)
    if not 0.5 < abs(l3) < 1 / np.sqrt(3):
        raise DomainError("ellipse argument applies to 1/2 < |lambda3| < 1/sqrt(3)")
    s = np.sqrt(1 - 3 * l3**2)
    return float(2 * l3 * (l3 - s)), float(2 * l3 * (l3 + s))


def ellipse_exclusion(lambda3) -> bool:
    return all(0 < q < 1 for q in ellipse_axes(lambda3))


def algebraic_relations(t: CurvatureTriple):
    lam, d = t.require_distinct()
    l1, l2, l3 = lam
    return {
        "lin_rel": float(2 * d[0] * l1 - 2 * d[1] * l2 + 6 * (d[1] - d[0]) * l3 + 1),
        "diffsq_rel": float((l1 - l2) ** 2 - (l1 + l2 - 4 * l3) ** 2 - (1 - 4 * l3**2)),
        "cubic_rel": float(
            (10 * l1**2 + 10 * l2**2 + 6 * l1 * l2 + 1) * l3
            - 2 * (l1 + l2) * (4 * l3**2 + l1 * l2 + 1) - 6 * l3**3
        ),
    }


def residual_report(t: CurvatureTriple, b, frame=None, point=None, normal=None):
    """Named residuals of every relation the non-Hopf family satisfies.

    x is taken from the constant-b equations, so eq2/eq6/eq7 test consistency of
    the measured (lambda, b) with them. eq6 and eq7 are reported multiplied
    through by d_{i+2}^2, which clears their denominators; near coincident
    curvatures the unscaled forms amplify input rounding by 1/d^2.
    """
    lam, d, b = _arrays(t, b)
    x = x_from_b(t, b)
    clear = d[[2, 0, 1]] ** 2
    rep = {}
    for name, vals in (("eq2", residual_eq2(t, b, x)), ("eq6", clear * residual_eq6(t, b, x)),
                       ("eq7", clear * build_system(t).raw(x))):
        for i, v in enumerate(vals, 1):
            rep[f"{name}_{i}"] = float(v)
    rep.update(algebraic_relations(t))
    b1sq, b2sq = eq10_b(t)
    rep["eq10_b1"] = float(b[0] ** 2 - b1sq)
    rep["eq10_b2"] = float(b[1] ** 2 - b2sq)
    rep["bdiff_rel"] = float(b[1] ** 2 / d[0] - b[0] ** 2 / d[1] - 4 * lam[2])
    if frame is not None and point is not None and normal is not None:
        rep["eq1"] = float(np.abs(residual_eq1(point, normal, frame, b)).max())
    return rep


def align_labels(data: PrincipalData, b_tol=MEASURED_TOL):
    """Ordering (i1, i2, i3) of the measured indices matching the labelled family.

    lambda3 must carry b_3 = 0, lambda1 < lambda2, and both closed-form b^2 values must be
    positive; among admissible orderings the one with smallest residuals wins.
    """
    lam, b = np.asarray(data.lambdas), np.asarray(data.b)
    best = None
    for perm in itertools.permutations(range(3)):
        l = lam[list(perm)]
        if abs(b[perm[2]]) > b_tol or not l[0] < l[1]:
            continue
        t = CurvatureTriple(tuple(l))
        if not t.distinct:
            continue
        b1sq, b2sq = eq10_b(t)
        if b1sq <= 0 or b2sq <= 0:
            continue
        score = max(abs(v) for v in residual_report(t, b[list(perm)]).values())
        if best is None or score < best[0]:
            best = (score, perm)
    if best is None:
        raise NotApplicable("no labelling of the curvatures is admissible for the non-Hopf branch")
    return best[1]


# -- Codazzi contractions on a measured patch -------------------------------------------


@dataclass(frozen=True)
class ContractionCheck:
    mixed: float  # off-diagonal contraction, all principal triples
    diagonal: float  # <nabla_{U_i} U_i, U_j> contraction
    x: np.ndarray  # measured <nabla_{U_i} U_{i+1}, U_{i+2}>
    db: float  # max residual of the b-differential equations
    eq2: float
    connection: np.ndarray  # <nabla_{U_j} U_k, U_l>


def _sign_align(ref, frame):
    s = np.sign(np.einsum("ki,ki->k", ref, frame))
    s[s == 0] = 1
    return s


def check_lemma_contractions(patch, u, lambdas=None, h=1e-3):
    """Codazzi contractions with the connection measured by finite differences.

    Mixed form: Rbar(X, Y, Z, xi) = (l_j - l_k)<nabla_X Y, Z> - (l_i - l_k)<nabla_Y X, Z>
    over all principal triples; diagonal form for g = 3:
    4 (l_j - l_i) <nabla_{U_i} U_i, U_j> = 3 <J U_i, U_j> b_i.
    ``lambdas`` overrides the measured labels (negative control).
    """
    u = np.asarray(u, dtype=float)
    (center,), _ = measure(patch, u[None])
    if len(cluster_eigenvalues(center.lambdas, CLUSTER_TOL)) != 3:
        raise NotApplicable("principal projections are ambiguous for clustered curvatures")
    lam = center.lambdas if lambdas is None else np.asarray(lambdas, float)
    x0, xi, U, C = center.point, center.normal, center.frame, center.coords
    b = center.b.copy()
    # plus-sign convention for <J U_i, U_{i+1}> = b_{i+2}
    if np.abs(residual_eq1(x0, xi, U, b)).max() > np.abs(residual_eq1(x0, xi, -U, -b)).max():
        U, b, flip = -U, -b, -1.0
    else:
        flip = 1.0
    nodes = np.stack([u + s * flip * h * C[j] for j in range(3) for s in (1.0, -1.0)])
    shifted, _ = measure(patch, nodes)
    conn = np.empty((3, 3, 3))
    db = np.empty((3, 3))  # db[i, j] = db_i(U_j)
    for j in range(3):
        plus, minus = shifted[2 * j], shifted[2 * j + 1]
        sp = _sign_align(U, flip * plus.frame)
        sm = _sign_align(U, flip * minus.frame)
        Up, Um = flip * sp[:, None] * plus.frame, flip * sm[:, None] * minus.frame
        dU = (Up - Um) / (2 * h)
        cov = dU + amb.christoffel(x0, U[j], U)
        conn[j] = amb.metric_eval(x0, cov[:, None, :], U[None, :, :])
        db[:, j] = (flip * sp * plus.b - flip * sm * minus.b) / (2 * h)

    JU = amb.apply_J(U)
    jj = amb.metric_eval(x0, JU[:, None, :], U[None, :, :])
    mixed = 0.0
    for i, j, k in itertools.product(range(3), repeat=3):
        lhs = amb.curvature_4(x0, U[i], U[j], U[k], xi)
        rhs = (lam[j] - lam[k]) * conn[i, j, k] - (lam[i] - lam[k]) * conn[j, i, k]
        mixed = max(mixed, abs(lhs - rhs))
    diagonal = 0.0
    for i, j in itertools.permutations(range(3), 2):
        diagonal = max(diagonal, abs(4 * (lam[j] - lam[i]) * conn[i, i, j] - 3 * jj[i, j] * b[i]))

    xm = np.array([conn[i, _nxt(i), _nxt(i, 2)] for i in range(3)])
    t = CurvatureTriple(tuple(lam))
    d = np.array(t.d)
    dbank = 0.0
    eq2 = float("nan")
    if t.distinct:
        for i in range(3):
            j, k = _nxt(i), _nxt(i, 2)
            pred = [
                3 * b.prod() * d[i] / (d[j] * d[k]),
                b[k] * (3 * b[j] ** 2 / d[k] + 4 * lam[j] - 4 * xm[j]),
                b[j] * (3 * b[k] ** 2 / d[j] - 4 * lam[k] + 4 * xm[k]),
            ]
            for v, p in zip((db[i, i], db[i, j], db[i, k]), pred):
                dbank = max(dbank, abs(4 * v - p))
        eq2 = float(np.abs(residual_eq2(t, b, xm)).max())
    return ContractionCheck(float(mixed), float(diagonal), xm, float(dbank), eq2, conn)


# -- the decision --------------------------------------------------------------------------


class Family(str, enum.Enum):
    GeodesicSphere = "GeodesicSphere"
    Horosphere = "Horosphere"
    TubeCH1 = "TubeCH1"
    TubeRH2 = "TubeRH2"
    RuledW3 = "RuledW3"
    WEquidistant = "WEquidistant"
    Unclassified = "Unclassified"


@dataclass(frozen=True)
class ClassificationResult:
    family: Family
    parameter: float | None
    residual_report: dict
    note: str = ""
    tolerance: float | None = None

    def __post_init__(self):
        if self.family is not Family.Unclassified and self.tolerance is not None:
            worst = max((abs(v) for v in self.residual_report.values()), default=0.0)
            if not worst < self.tolerance:
                raise ValueError("classified result with residuals above tolerance")

    def to_dict(self):
        return {
            "family": self.family.value,
            "parameter": self.parameter,
            "residuals": {k: float(v) for k, v in sorted(self.residual_report.items())},
            "note": self.note,
            "tolerance": self.tolerance,
        }


def _result(family, parameter, report, tol, note=""):
    worst = max((abs(v) for v in report.values()), default=0.0)
    if family is not Family.Unclassified and not worst < tol:
        msg = f"{family.value} relations fail (max residual {worst:.3g})"
        return ClassificationResult(Family.Unclassified, None, report, msg, tol)
    return ClassificationResult(family, None if parameter is None else float(parameter), report, note, tol)


def _hopf_g2(lam, b2, groups, tol):
    double = next(g for g in groups if len(g) == 2)
    single = next(g for g in groups if len(g) == 1)
    a = float(lam[double].mean())
    mu = float(lam[single[0]])
    in_single = float(b2[single].sum())
    if in_single > 0.5:  # J xi spans the simple curvature direction
        alpha, beta = a, mu
        if alpha <= 0:
            return _result(Family.Unclassified, None, {"alpha": alpha}, tol, "no Hopf model with alpha <= 0")
        rep = {"hopf": 1 - in_single, "beta_rel": beta - (alpha + 1 / (4 * alpha)), "spread": float(np.ptp(lam[double]))}
        if abs(alpha - 0.5) < tol:
            rep["alpha"] = alpha - 0.5
            return _result(Family.Horosphere, None, rep, tol)
        if alpha > 0.5:
            return _result(Family.GeodesicSphere, 2 * np.arctanh(1 / (2 * alpha)), rep, tol)
        return _result(Family.TubeCH1, 2 * np.arctanh(2 * alpha), rep, tol)
    # J xi inside the double cluster: the critical tube around RH2
    r = 2 * np.arctanh(2 * mu) if 0 < 2 * mu < 1 else np.nan
    rep = {
        "hopf": 1 - float(b2[double].sum()),
        "alpha_tanh": a - np.tanh(r),
        "alpha_coth": a - 0.5 / np.tanh(r / 2),
        "spread": float(np.ptp(lam[double])),
    }
    if not np.isfinite(r):
        return _result(Family.Unclassified, None, {"mu": mu}, tol)
    return _result(Family.TubeRH2, r, rep, tol, "critical radius, g = 2")


def _hopf_g3(lam, b2, tol):
    k = int(np.argmax(b2))
    rest = sorted(lam[i] for i in range(3) if i != k)
    lo, hi = rest
    if hi <= 0.5:
        return _result(Family.Unclassified, None, {"mu_max": hi - 0.5}, tol, "no tube with 2 mu <= 1")
    r = 2 * np.arctanh(1 / (2 * hi))
    rep = {
        "hopf": 1 - float(b2[k]),
        "mu_min": lo - 0.5 * np.tanh(r / 2),
        "jxi": lam[k] - np.tanh(r),
    }
    return _result(Family.TubeRH2, r, rep, tol)


def classify(data: PrincipalData, tol: float = MEASURED_TOL, cluster_tol: float = CLUSTER_TOL):
    lam = np.asarray(data.lambdas, dtype=float)
    b = np.asarray(data.b, dtype=float)
    if b @ b == 0:
        return ClassificationResult(Family.Unclassified, None, {}, "b vanishes")
    b = b / np.linalg.norm(b)
    groups = cluster_eigenvalues(lam, cluster_tol)
    b2 = b**2
    hopf = max(b2[g].sum() for g in groups) > 1 - tol
    g = len(groups)
    if g == 1:
        return ClassificationResult(Family.Unclassified, None, {"g": 1.0}, "umbilical data (g = 1)")
    if hopf:
        sign = 1.0 if lam.sum() >= 0 else -1.0  # the Hopf models are listed for the inward normal
        lam = sign * lam
        if g == 2:
            return _hopf_g2(lam, b2, groups, tol)
        return _hopf_g3(lam, b2, tol)
    if g == 2:
        return ClassificationResult(Family.Unclassified, None, {"g": 2.0}, "non-Hopf with two curvatures")
    try:
        perm = align_labels(PrincipalData(lam, b), b_tol=tol)
    except NotApplicable as exc:
        return ClassificationResult(Family.Unclassified, None, {"b_min": float(np.abs(b).min())}, str(exc))
    t = CurvatureTriple(tuple(lam[list(perm)]))
    frame = None if data.frame is None else np.asarray(data.frame)[list(perm)]
    report = residual_report(t, b[list(perm)], frame, data.point, data.normal)
    if "eq1" in report:
        # the opposite frame orientation gives the plus sign without moving xi
        alt = float(np.abs(residual_eq1(data.point, data.normal, -frame, -b[list(perm)])).max())
        report["eq1"] = min(report["eq1"], alt)
    l3 = t.lam[2]
    if abs(l3) < tol:
        return _result(Family.RuledW3, None, report, tol)
    return _result(Family.WEquidistant, 2 * np.arctanh(2 * l3), report, tol)
