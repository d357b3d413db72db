"""Circle diffeomorphisms, Jordan curves and numerical Riemann maps.

Riemann maps come from the Kerzman-Stein integral equation for the Szego
kernel, discretized with the trapezoid rule on the curve's native grid.  The
solve yields the boundary correspondence theta(t) with F(e^{i theta(t)}) =
gamma(t); F itself is then sampled on a uniform grid by inverting theta.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import GeometryError, UnderResolvedWarning
from .fourier import (DEFAULT_N, FourierSeries, analyze, grid,
                      project_interior)

NEWTON_MAXIT = 50


def _real_series(s: FourierSeries) -> FourierSeries:
    c = s.coeffs
    return FourierSeries(0.5 * (c + np.conj(c[::-1])))


@dataclass(frozen=True, eq=False)
class CircleDiffeo:
    """phi(theta) = theta + p(theta) with p real and 2 pi periodic."""

    p: FourierSeries

    def __post_init__(self):
        p = self.p
        scale = max(1.0, float(np.max(np.abs(p.coeffs))))
        if not p.is_real(1e-9 * scale):
            raise GeometryError("periodic part must be real-valued", stage="diffeo")
        object.__setattr__(self, "p", _real_series(p))
        d = self.derivative(grid(self.N))
        if np.min(d) <= 0:
            raise GeometryError("not orientation preserving", stage="diffeo",
                                min_derivative=float(np.min(d)))

    @property
    def N(self) -> int:
        return self.p.N

    # constructors -----------------------------------------------------
    @classmethod
    def identity(cls, N: int = DEFAULT_N):
        return cls(FourierSeries.zeros(N))

    @classmethod
    def rotation(cls, alpha: float, N: int = DEFAULT_N):
        return cls(FourierSeries.from_modes({0: float(alpha)}, N))

    @classmethod
    def from_function(cls, p_fn, N: int = DEFAULT_N):
        """From the periodic part p(theta) as a callable."""
        return cls(analyze(np.asarray(p_fn(grid(N)), dtype=complex).real))

    @classmethod
    def from_lift_samples(cls, values, N: int | None = None):
        """From phi(theta_j) on the canonical grid of len(values) nodes."""
        values = np.asarray(values, dtype=float)
        th = 2 * np.pi * np.arange(values.size) / values.size
        p = analyze(values - th)
        if N is not None:
            p = p.padded(N)
        return cls(p)

    @classmethod
    def mobius(cls, a: complex, N: int = DEFAULT_N):
        """Boundary action of z -> (z + a)/(1 + conj(a) z), |a| < 1."""
        a = complex(a)
        if abs(a) >= 1:
            raise GeometryError("Mobius parameter must lie in the unit disc", stage="diffeo")
        # arg of the map minus theta = -2 arg(1 + conj(a) e^{i theta})
        return cls.from_function(
            lambda t: -2 * np.angle(1 + np.conj(a) * np.exp(1j * t)), N)

    # evaluation -------------------------------------------------------
    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        return theta + self.p(theta).real

    def derivative(self, theta):
        return 1.0 + self.p.derivative()(theta).real

    def second_derivative(self, theta):
        return self.p.derivative(2)(theta).real

    def circle_map(self, theta):
        """The induced map z -> e^{i phi} at z = e^{i theta}, with its first two
        complex derivatives along the circle."""
        theta = np.asarray(theta, dtype=float)
        z = np.exp(1j * theta)
        ph = self(theta)
        d1 = self.derivative(theta)
        d2 = self.second_derivative(theta)
        v = np.exp(1j * ph)
        dv = v * d1 / z
        ddv = v * (d1 ** 2 - d1 - 1j * d2) / z ** 2
        return v, dv, ddv

    def inverse(self, N: int | None = None) -> "CircleDiffeo":
        return diffeo_invert(self, N)

    def __matmul__(self, other: "CircleDiffeo") -> "CircleDiffeo":
        return diffeo_compose(self, other)

    def distance(self, other: "CircleDiffeo") -> float:
        """Sup distance between lifts on the finer of the two grids."""
        th = grid(max(self.N, other.N))
        return float(np.max(np.abs(self(th) - other(th))))

    def to_dict(self):
        return self.p.to_dict("diffeo")

    @classmethod
    def from_dict(cls, d):
        return cls(FourierSeries.from_dict(d))


def _invert_lift(phi: CircleDiffeo, targets, start=None):
    """Solve phi(x) = targets node-wise by Newton iteration."""
    x = targets - phi.p(targets).real if start is None else np.array(start, dtype=float)
    dp = phi.p.derivative()
    for _ in range(NEWTON_MAXIT):
        r = x + phi.p(x).real - targets
        x = x - r / (1.0 + dp(x).real)
        if np.max(np.abs(r)) < 1e-14:
            return x
    r = x + phi.p(x).real - targets
    if np.max(np.abs(r)) > 1e-11:
        raise GeometryError("Newton iteration did not converge", stage="invert",
                            residual=float(np.max(np.abs(r))))
    return x


def diffeo_invert(phi: CircleDiffeo, N: int | None = None) -> CircleDiffeo:
    """psi with phi(psi(theta)) = theta, by node-wise Newton on the lift."""
    N = phi.N if N is None else N
    th = grid(N)
    x = _invert_lift(phi, th)
    out = CircleDiffeo(analyze(x - th))
    if not out.p.is_resolved():
        warnings.warn("inverse diffeomorphism is under-resolved", UnderResolvedWarning)
    return out


def diffeo_compose(phi1: CircleDiffeo, phi2: CircleDiffeo, N: int | None = None) -> CircleDiffeo:
    """Lift of phi1 o phi2."""
    N = max(phi1.N, phi2.N) if N is None else N
    th = grid(N)
    out = CircleDiffeo(analyze(phi1(phi2(th)) - th))
    if not out.p.is_resolved():
        warnings.warn("composed diffeomorphism is under-resolved", UnderResolvedWarning)
    return out


# ---------------------------------------------------------------------
# curves

def _oversampled(s: FourierSeries, factor: int = 4) -> np.ndarray:
    return s.padded(factor * s.N + (factor - 1) // 2).samples()


def polygon_self_intersects(c) -> bool:
    """True if two non-adjacent edges of the closed polygon c cross."""
    c = np.asarray(c, dtype=complex)
    a, b = c, np.roll(c, -1)
    d = b - a

    def cross(u, v):
        return u.real * v.imag - u.imag * v.real

    # orientation of the endpoints of edge k relative to edge j and vice versa
    s1 = cross(d[:, None], a[None, :] - a[:, None])
    s2 = cross(d[:, None], b[None, :] - a[:, None])
    s3 = cross(d[None, :], a[:, None] - a[None, :])
    s4 = cross(d[None, :], b[:, None] - a[None, :])
    hit = (s1 * s2 < 0) & (s3 * s4 < 0)
    n = c.size
    idx = np.arange(n)
    near = np.abs(idx[:, None] - idx[None, :])
    hit &= (near > 1) & (near < n - 1)
    return bool(np.any(hit))


def winding_numbers(curve_samples, points) -> np.ndarray:
    """Winding number of a densely sampled closed polygon about each point."""
    pts = np.atleast_1d(np.asarray(points, dtype=complex))
    c = np.asarray(curve_samples, dtype=complex)
    ang = np.angle(c[None, :] - pts[:, None])
    d = np.diff(np.concatenate([ang, ang[:, :1]], axis=1), axis=1)
    d = (d + np.pi) % (2 * np.pi) - np.pi
    return np.sum(d, axis=1) / (2 * np.pi)


@dataclass(frozen=True, eq=False)
class JordanCurve:
    """A smooth closed curve gamma(theta) given by its Fourier series."""

    gamma: FourierSeries
    injectivity_tol: float = 1e-6

    @property
    def N(self) -> int:
        return self.gamma.N

    @classmethod
    def from_function(cls, fn, N: int = DEFAULT_N, **kw):
        return cls(FourierSeries.from_function(fn, N), **kw)

    @classmethod
    def circle(cls, r=1.0, c=0j, N: int = DEFAULT_N):
        return cls(FourierSeries.from_modes({0: c, 1: r}, N))

    @classmethod
    def ellipse(cls, a, b, N: int = DEFAULT_N):
        return cls.from_function(lambda t: a * np.cos(t) + 1j * b * np.sin(t), N)

    def samples(self) -> np.ndarray:
        return self.gamma.samples()

    def __call__(self, theta):
        return self.gamma(theta)

    def velocity(self) -> np.ndarray:
        return self.gamma.derivative().samples()

    def winding_number(self, point) -> float:
        return float(winding_numbers(_oversampled(self.gamma), point)[0])

    def contains(self, points) -> np.ndarray:
        return np.abs(winding_numbers(_oversampled(self.gamma), points) - 1) < 0.5

    def min_distance(self, points) -> np.ndarray:
        c = _oversampled(self.gamma)
        pts = np.atleast_1d(np.asarray(points, dtype=complex))
        return np.min(np.abs(c[None, :] - pts[:, None]), axis=1)

    def injectivity_ratio(self) -> float:
        """min |gamma_j - gamma_k| / |e^{i theta_j} - e^{i theta_k}| over j != k."""
        g = self.samples()
        z = np.exp(1j * grid(self.N))
        chord = np.abs(z[:, None] - z[None, :])
        np.fill_diagonal(chord, 1.0)
        ratio = np.abs(g[:, None] - g[None, :]) / chord
        np.fill_diagonal(ratio, np.inf)
        return float(np.min(ratio))

    def validate(self):
        v = self.velocity()
        scale = max(np.max(np.abs(v)), 1e-300)
        if np.min(np.abs(v)) <= 1e-12 * scale:
            raise GeometryError("curve velocity vanishes at a node", stage="curve")
        ratio = self.injectivity_ratio()
        if ratio < self.injectivity_tol:
            raise GeometryError("curve is not numerically injective", stage="curve",
                                chordal_ratio=ratio)
        if polygon_self_intersects(_oversampled(self.gamma)):
            raise GeometryError("curve crosses itself", stage="curve")
        w = self.winding_number(self.interior_point())
        if abs(w - 1) > 1e-6:
            raise GeometryError("curve is not positively oriented", stage="curve", winding=w)
        return self

    def interior_point(self) -> complex:
        """A point well inside the curve (largest clearance among candidates)."""
        g = self.samples()
        v = self.velocity()
        nrm = 1j * v / np.abs(v)  # inward normal for a positive orientation
        diam = np.max(np.abs(g - g.mean())) * 2
        idx = np.arange(0, g.size, max(1, g.size // 64))
        cands = [np.array([g.mean()])]
        for frac in (0.02, 0.05, 0.1, 0.2, 0.35):
            cands.append(g[idx] + frac * diam * nrm[idx])
        cands = np.concatenate(cands)
        inside = self.contains(cands)
        if not np.any(inside):
            raise GeometryError("could not locate an interior point", stage="curve")
        cands = cands[inside]
        clearance = self.min_distance(cands)
        return complex(cands[np.argmax(clearance)])

    def to_dict(self):
        return self.gamma.to_dict("curve")

    @classmethod
    def from_dict(cls, d):
        return cls(FourierSeries.from_dict(d))


# ---------------------------------------------------------------------
# Riemann maps

@dataclass(frozen=True, eq=False)
class RiemannMap:
    """A conformal map of the disc (or co-disc) onto one side of a curve.

    ``correspondence`` is theta(t) with map(e^{i theta(t)}) = gamma(t).
    """

    series: FourierSeries
    correspondence: CircleDiffeo
    residual: float
    discarded: float
    b0: complex = 0j
    info: dict = field(default_factory=dict)


def _szego_angles(g: np.ndarray, anchor: complex) -> np.ndarray:
    """Boundary correspondence angles of the interior map with F(0) = anchor.

    Kerzman-Stein: (I - A) S = L with A = H - H^*, H the Cauchy kernel and
    L the conjugated Cauchy kernel at the anchor; the unit tangent times S^2
    points along i F^{-1}(gamma).
    """
    n = g.size
    dg = analyze(g).derivative().samples()
    sp = np.abs(dg)
    if np.min(sp) <= 1e-14 * np.max(sp):
        raise GeometryError("curve velocity vanishes", stage="riemann")
    T = dg / sp
    diff = g[None, :] - g[:, None]
    np.fill_diagonal(diff, 1.0)
    H = T[None, :] / diff / (2j * np.pi)
    np.fill_diagonal(H, 0.0)
    A = H - np.conj(H.T)
    L = np.conj(T / (g - anchor) / (2j * np.pi))
    M = np.eye(n) - A * (sp * 2 * np.pi / n)[None, :]
    S = np.linalg.solve(M, L)
    if np.min(np.abs(S)) == 0:
        raise GeometryError("Szego kernel vanishes on the boundary", stage="riemann")
    f = -1j * T * S ** 2 / np.abs(S) ** 2
    return np.unwrap(np.angle(f))


def _correspondence(angles: np.ndarray) -> CircleDiffeo:
    n = angles.size
    t = 2 * np.pi * np.arange(n) / n
    q = angles - t
    # the lift must close up with degree one
    jump = angles[0] + 2 * np.pi - angles[-1]
    if not (0 < jump < np.pi):
        raise GeometryError("boundary correspondence is not a degree-one map", stage="riemann")
    try:
        return CircleDiffeo(analyze(q))
    except GeometryError as exc:
        raise GeometryError("boundary correspondence is not monotone", stage="riemann") from exc


def _check_anchor(curve: JordanCurve, anchor):
    w = curve.winding_number(anchor)
    dist = float(curve.min_distance(anchor)[0])
    scale = float(np.max(np.abs(curve.samples() - anchor)))
    if abs(w - 1) > 1e-3 or dist < 1e-10 * scale:
        raise GeometryError("anchor is not strictly inside the curve", stage="riemann",
                            winding=round(w, 6))


def riemann_interior_map(curve: JordanCurve, anchor: complex, N: int | None = None,
                         tol: float = 1e-7) -> RiemannMap:
    """Conformal F: disc -> Int(curve) with F(0) = anchor, F'(0) > 0."""
    anchor = complex(anchor)
    _check_anchor(curve, anchor)
    M = max(curve.N, N or 0)
    gs = curve.gamma.padded(M)
    g = gs.samples()
    corr = _correspondence(_szego_angles(g, anchor))
    sigma = diffeo_invert(corr)
    F, dropped = project_interior(analyze(gs(sigma(grid(M)))))
    if N is not None:
        F = F.padded(N)
    resid = float(np.max(np.abs(F(corr(grid(M))) - g)))
    info = {"F0_error": abs(F[0] - anchor), "derivative_phase": float(np.angle(F[1]))}
    if resid > tol * max(1.0, np.max(np.abs(g))):
        raise GeometryError("Riemann map residual above tolerance", stage="riemann",
                            residual=resid)
    if not F.is_resolved():
        warnings.warn("interior Riemann map is under-resolved", UnderResolvedWarning)
    return RiemannMap(F, corr, resid, dropped, 0j, info)


def riemann_interior(curve: JordanCurve, anchor: complex, N: int | None = None,
                     tol: float = 1e-7) -> FourierSeries:
    return riemann_interior_map(curve, anchor, N, tol).series


def riemann_exterior_map(curve: JordanCurve, N: int | None = None, tol: float = 1e-7,
                         anchor: complex | None = None) -> RiemannMap:
    """Conformal E: {|z| > 1} -> Ext(curve), E(inf) = inf, E'(inf) > 0.

    Computed by inverting the curve about an interior point a, taking the
    interior map G of the image curve (G(0) = 0) and setting
    E(z) = a + 1/G(1/z).
    """
    a = curve.interior_point() if anchor is None else complex(anchor)
    _check_anchor(curve, a)
    M = max(curve.N, N or 0)
    gs = curve.gamma.padded(M)
    g = gs.samples()
    n = g.size
    rev = np.roll(g[::-1], 1)  # gamma(-t_j)
    inv = 1.0 / (rev - a)
    sig = _szego_angles(inv, 0j)
    t = grid(M)
    q_sig = sig - t
    q = -np.roll(q_sig[::-1], 1)  # theta(u) = -sigma(-u)
    ncorr = _correspondence(t + q)
    sigma = diffeo_invert(ncorr)
    E = analyze(gs(sigma(t)))
    c = E.coeffs.copy()
    dropped = float(np.sqrt(np.sum(np.abs(c[M + 2:]) ** 2)))
    c[M + 2:] = 0
    E = FourierSeries(c, "exterior")
    if N is not None:
        E = E.padded(N)
    resid = float(np.max(np.abs(E(ncorr(t)) - g)))
    info = {"capacity": E[1], "anchor": a, "nodes": n}
    if abs(E[1].imag) > 1e-8 * abs(E[1]):
        info["capacity_phase"] = float(np.angle(E[1]))
    if resid > tol * max(1.0, np.max(np.abs(g))):
        raise GeometryError("exterior Riemann map residual above tolerance", stage="riemann",
                            residual=resid)
    if not E.is_resolved():
        warnings.warn("exterior Riemann map is under-resolved", UnderResolvedWarning)
    return RiemannMap(E, ncorr, resid, dropped, E[0], info)


def riemann_exterior(curve: JordanCurve, N: int | None = None, tol: float = 1e-7,
                     normalize: bool = False):
    """Laurent data of the exterior map.

    With ``normalize`` the constant term b0 is subtracted and returned
    separately as ``(series, b0)``.
    """
    rm = riemann_exterior_map(curve, N, tol)
    if not normalize:
        return rm.series
    c = rm.series.coeffs.copy()
    c[rm.series.N] = 0
    return FourierSeries(c, "exterior"), rm.b0


# ---------------------------------------------------------------------
# univalence checks on disc grids

def interior_derivative_min(F: FourierSeries, radii=None) -> float:
    """min |F'| over a polar grid of the closed unit disc."""
    radii = np.linspace(0, 1, 9) if radii is None else radii
    dF = F.z_derivative()
    th = grid(max(F.N, 16))
    z = (np.asarray(radii)[:, None] * np.exp(1j * th)[None, :]).ravel()
    return float(np.min(np.abs(dF.at(z))))


def exterior_derivative_min(E: FourierSeries, radii=None) -> float:
    """min |E'| over a polar grid of the closed co-disc (1 <= |z| < inf)."""
    radii = np.array([1.0, 1.1, 1.25, 1.5, 2.0, 3.0, 6.0]) if radii is None else radii
    dE = E.z_derivative()
    th = grid(max(E.N, 16))
    z = (np.asarray(radii)[:, None] * np.exp(1j * th)[None, :]).ravel()
    return float(min(np.min(np.abs(dE.at(z))), abs(E[1])))
