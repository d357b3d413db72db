"""Conformal welding of the two discs along a circle diffeomorphism.

Given phi, find f_plus on the disc and f_minus on the co-disc with
f_plus(phi(z)) = f_minus(z) on the circle, f_minus = z + b_1/z + ...

With T the Hilbert transform (Cauchy integral on the circle) and
V f = f o phi, the Hardy conditions T f_plus = f_plus/2 and
T f_minus = z - f_minus/2 combine into

    [1 + (T - V T V^{-1})] f_minus = z,

a second-kind equation whose kernel
    K(z, w) = 1/(w - z) - phi'(w)/(phi(w) - phi(z))
is smooth.  It is discretized with the trapezoid rule on the circle.

The same equation written on a smooth curve S instead of the circle
(``_curve_weld``) drives the continuation in ``weld_far``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import WeldingError
from .fourier import (DEFAULT_N, FourierSeries, analyze, grid,
                      project_exterior, project_interior)
from .geometry import CircleDiffeo, diffeo_compose, diffeo_invert

COND_LIMIT = 1e12


@dataclass(frozen=True, eq=False)
class WeldingSolution:
    f_plus: FourierSeries
    f_minus: FourierSeries
    residual: float
    phi: CircleDiffeo
    discarded: float = 0.0
    flagged: bool = False
    info: dict = field(default_factory=dict)

    def boundary_mismatch(self, m: int | None = None) -> float:
        """sup |f_plus(phi(e^{it})) - f_minus(e^{it})| on a check grid."""
        th = grid(m if m is not None else 2 * self.f_minus.N + 1)
        return float(np.max(np.abs(self.f_plus(self.phi(th)) - self.f_minus(th))))

    def to_dict(self):
        return {"kind": "welding",
                "f_plus": self.f_plus.to_dict(),
                "f_minus": self.f_minus.to_dict(),
                "residual": float(self.residual)}


def _cauchy_difference(u, s, ds, dds, g, dg, ddg):
    """Matrix of s'(u_k)/(s(u_k)-s(u_j)) - g'(u_k)/(g(u_k)-g(u_j)) with its
    diagonal limit s''/(2s') - g''/(2g')."""
    n = u.size
    ds_ = s[None, :] - s[:, None]
    dg_ = g[None, :] - g[:, None]
    np.fill_diagonal(ds_, 1.0)
    np.fill_diagonal(dg_, 1.0)
    K = ds[None, :] / ds_ - dg[None, :] / dg_
    K[np.diag_indices(n)] = dds / (2 * ds) - ddg / (2 * dg)
    return K


def welding_kernel(phi: CircleDiffeo, N: int = DEFAULT_N, weighted: bool = False) -> np.ndarray:
    """K(z_j, w_k) on the 2N+1 circle nodes, diagonal -phi''/(2 phi').

    With ``weighted`` the trapezoid weights of (1/2 pi i) dw are applied, which
    gives the Nystrom matrix of T - V T V^{-1}.
    """
    th = grid(N)
    z = np.exp(1j * th)
    v, dv, ddv = phi.circle_map(th)
    if np.min(np.abs(dv)) <= 1e-14:
        raise WeldingError("phi' vanishes at a node", stage="kernel")
    K = _cauchy_difference(z, z, np.ones_like(z), np.zeros_like(z), v, dv, ddv)
    if weighted:
        K = K * (z / z.size)[None, :]
    return K


def _curve_weld(s: FourierSeries, delta: CircleDiffeo, N: int):
    """Solve [1 + (T_S - V T_S V^{-1})] F = w on the curve S = s(circle),
    with V composition by s o delta o s^{-1}.  Returns the samples F(s(z_j))
    and the condition number of the system."""
    th = grid(N)
    u = np.exp(1j * th)
    sv = s.at(u)
    ds = s.z_derivative()
    dds = ds.z_derivative()
    s1, s2 = ds.at(u), dds.at(u)
    v, dv, ddv = delta.circle_map(th)
    g = s.at(v)
    sv1, sv2 = ds.at(v), dds.at(v)
    g1 = sv1 * dv
    g2 = sv2 * dv ** 2 + sv1 * ddv
    if np.min(np.abs(g1)) <= 1e-14 or np.min(np.abs(s1)) <= 1e-14:
        raise WeldingError("gluing map derivative vanishes at a node", stage="kernel")
    K = _cauchy_difference(u, sv, s1, s2, g, g1, g2)
    A = K * (u / u.size)[None, :]
    M = np.eye(u.size) + A
    cond = float(np.linalg.cond(M))
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise WeldingError("welding operator not invertible at this resolution",
                           stage="solve", condition=cond)
    return np.linalg.solve(M, sv), cond


def _assemble(fm_samples, phi: CircleDiffeo, N: int, tol: float, cond: float, extra=None):
    fm, lost_m = project_exterior(analyze(fm_samples))
    # f_plus(e^{i t}) = f_minus(e^{i phi^{-1}(t)})
    psi = diffeo_invert(phi, N)
    fp, lost_p = project_interior(analyze(fm(psi(grid(N)))))
    sol = WeldingSolution(fp, fm, 0.0, phi)
    mismatch = sol.boundary_mismatch(4 * N + 1)
    residual = max(mismatch, lost_m, lost_p)
    info = {"condition": cond, "mismatch": mismatch, "discarded_minus": lost_m,
            "discarded_plus": lost_p, "tail_plus": fp.tail_mass(),
            "tail_minus": fm.tail_mass()}
    if extra:
        info.update(extra)
    flagged = residual > tol or not (fp.is_resolved() and fm.is_resolved())
    return WeldingSolution(fp, fm, residual, phi, max(lost_m, lost_p), flagged, info)


def weld(phi: CircleDiffeo, N: int | None = None, tol: float = 1e-8) -> WeldingSolution:
    """Welding pair of phi on 2N+1 nodes (N defaults to phi's order)."""
    N = phi.N if N is None else N
    z = FourierSeries.identity(N)
    fm_samples, cond = _curve_weld(z, phi, N)
    return _assemble(fm_samples, phi, N, tol, cond)


def equation_residual(sol: WeldingSolution, m: int | None = None) -> float:
    """RMS of [1 + (T - V T V^{-1})] f_minus - z on 2m+1 check nodes."""
    m = 2 * sol.f_minus.N if m is None else m
    th = grid(m)
    A = welding_kernel(sol.phi, m, weighted=True)
    f = sol.f_minus(th)
    r = f + A @ f - np.exp(1j * th)
    return float(np.sqrt(np.mean(np.abs(r) ** 2)))


def linear_homotopy(phi: CircleDiffeo, s: float) -> CircleDiffeo:
    """phi_s(theta) = theta + s p(theta)."""
    return CircleDiffeo(phi.p * s)


def weld_far(phi: CircleDiffeo, steps: int, N: int | None = None,
             tol: float = 1e-8) -> WeldingSolution:
    """Welding by continuation along phi_s = id + s p.

    Each step factors phi_k = phi_{k-1} o delta_k with delta_k close to the
    identity and welds delta_k on the curve f_minus^{(k-1)}(circle) produced
    by the previous step; the new exterior map is F o f_minus^{(k-1)}.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    N = phi.N if N is None else N
    s = FourierSeries.identity(N)
    prev = CircleDiffeo.identity(N)
    conds = []
    fm_samples = None
    for k in range(1, steps + 1):
        cur = linear_homotopy(phi, k / steps) if k < steps else phi
        delta = diffeo_compose(diffeo_invert(prev, N), cur, N)
        try:
            fm_samples, cond = _curve_weld(s, delta, N)
        except WeldingError as exc:
            raise WeldingError(f"incremental weld failed at step {k}", stage="weld_far",
                               step=k) from exc
        conds.append(cond)
        s, _ = project_exterior(analyze(fm_samples))
        prev = cur
    return _assemble(fm_samples, phi, N, tol, max(conds), {"steps": steps,
                                                             "step_conditions": conds})
