"""Independent reference computations used by the tests.

Nothing here goes through the patch/measurement pipeline or the multistart solver.
"""
import numpy as np

from cpch2 import ambient as amb
from cpch2 import jacobi as jc

T_MATRIX = np.array([[-1.0, 1.0, 1.0], [1.0, -1.0, 1.0], [1.0, 1.0, -1.0]])


def homotopy_roots(system, steps=400, gamma=0.6 + 0.8j, seed=3):
    """All isolated roots of 4 y_i^2 + Lam_bar_i . y = Omega_bar_i by total-degree homotopy.

    Start system y_i^2 = 1 (8 roots), H = (1 - t) gamma G + t F, tracked with an
    Euler predictor and Newton corrector in complex arithmetic. Returns (x roots, y roots).
    """
    L, Om = system.Lam_bar, system.Omega_bar

    def F(y):
        return 4 * y**2 + y @ L.T - Om

    def dF(y):
        return 8 * np.diag(y) + L

    def G(y):
        return y**2 - 1

    def dG(y):
        return 2 * np.diag(y)

    starts = np.array(np.meshgrid(*[[1.0, -1.0]] * 3, indexing="ij")).reshape(3, -1).T.astype(complex)
    ts = np.linspace(0, 1, steps + 1) ** 2  # refine near t = 1 where paths may diverge
    ends = []
    for y in starts:
        ok = True
        for t0, t1 in zip(ts[:-1], ts[1:]):
            Hy = (1 - t0) * gamma * dG(y) + t0 * dF(y)
            Ht = F(y) - gamma * G(y)
            try:
                y = y - np.linalg.solve(Hy, Ht) * (t1 - t0)
                for _ in range(4):
                    H = (1 - t1) * gamma * G(y) + t1 * F(y)
                    y = y - np.linalg.solve((1 - t1) * gamma * dG(y) + t1 * dF(y), H)
            except np.linalg.LinAlgError:
                ok = False
                break
            if np.abs(y).max() > 1e8:
                ok = False
                break
        if ok:
            for _ in range(20):
                try:
                    y = y - np.linalg.solve(dF(y), F(y))
                except np.linalg.LinAlgError:
                    break
            ends.append(y)
    real = [e.real for e in ends if np.abs(e.imag).max() < 1e-7 and np.abs(F(e.real)).max() < 1e-9]
    uniq = []
    for y in real:
        if all(np.abs(y - u).max() > 1e-6 for u in uniq):
            uniq.append(y)
    ys = np.array(uniq).reshape(-1, 3)
    return ys @ T_MATRIX.T, ys


def _orthonormal_complement(x, vecs, extra):
    out = []
    for e in extra:
        for f in list(vecs) + out:
            e = e - amb.metric_eval(x, e, f) * f
        n = amb.norm(x, e)
        if n > 1e-6:
            out.append(e / n)
    return out


def tube_spectrum_by_jacobi(core, r, point=None, normal=None):
    """Principal curvatures (inward normal) of the tube of radius r around a core.

    core: "point" (geodesic sphere), "CH1" or "RH2". Jacobi fields start tangent
    to the totally geodesic core with zero derivative, or at zero with unit
    derivative normal to it; the inward shape operator maps zeta to zeta'.
    """
    x = np.zeros(4) if point is None else np.asarray(point, float)
    if core == "point":
        xi = np.array([1.0, 0, 0, 0]) / amb.norm(x, np.array([1.0, 0, 0, 0])) if normal is None else normal
        tang, norm_dirs = [], _orthonormal_complement(x, [xi], np.eye(4))
    else:
        basis = amb.totally_geodesic_chart(core).basis
        tang = _orthonormal_complement(x, [], basis)
        normals = _orthonormal_complement(x, tang, np.eye(4))
        xi = normals[0] if normal is None else normal
        norm_dirs = [n for n in normals if abs(amb.metric_eval(x, n, xi)) < 0.5]
    fields = []
    for t in tang:
        fields.append(jc.jacobi_integrate(jc.JacobiInput(x, xi, t, np.zeros(4)), r))
    for n in norm_dirs:
        fields.append(jc.jacobi_integrate(jc.JacobiInput(x, xi, np.zeros(4), -n), r))
    Z = np.array([f.zeta for f in fields])
    Zp = np.array([f.zeta_prime for f in fields])
    # S Z_k = Z'_k; coefficients of Z'_k in the basis Z_k
    A = np.linalg.lstsq(Z.T, Zp.T, rcond=None)[0]
    return np.sort(np.linalg.eigvals(A).real)


def sphere_spectrum(r):
    a = 0.5 / np.tanh(r / 2)
    return np.sort([a, a, 1 / np.tanh(r)])


def tube_ch1_spectrum(r):
    a = 0.5 * np.tanh(r / 2)
    return np.sort([a, a, 1 / np.tanh(r)])


def tube_rh2_spectrum(r):
    return np.sort([np.tanh(r), 0.5 * np.tanh(r / 2), 0.5 / np.tanh(r / 2)])
