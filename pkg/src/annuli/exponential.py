"""Paths in the inward cone, framings and the time-ordered exponential.

A path is a grid X[j, k] = X(theta_j, t_k) of complexified vector fields
X(theta) d/dtheta with Im X >= 0.  When every slice only uses modes n >= -1,
Y(z, t) = i sum_n x_n(t) z^{n+1} is holomorphic on the disc and points
inward on the circle; its flow from t to t0 is a univalent self-map k(., t)
of the disc, k(., 0) defines the annulus and h = k on the circle frames it.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .annulus import NormalizedAnnulus, from_univalent
from .errors import FlowError, GeometryError, PathError
from .fourier import FourierSeries, analyze, grid, horner, order_from_count
from .geometry import winding_numbers

EXIT_TOL = 1e-8


# ---------------------------------------------------------------------
# grid calculus

def theta_derivative(f: np.ndarray) -> np.ndarray:
    """Spectral d/dtheta along axis 0."""
    n = f.shape[0]
    order_from_count(n)
    k = np.fft.fftfreq(n, 1.0 / n)
    shape = (n,) + (1,) * (f.ndim - 1)
    return np.fft.ifft(1j * k.reshape(shape) * np.fft.fft(f, axis=0), axis=0)


def time_derivative(f: np.ndarray, dt: float) -> np.ndarray:
    """Fourth-order finite differences along the last axis (one-sided at the
    two ends)."""
    M = f.shape[-1] - 1
    if M < 4:
        raise PathError("need at least 5 time nodes for fourth-order differences")
    d = np.empty_like(f)
    d[..., 2:-2] = (f[..., :-4] - 8 * f[..., 1:-3] + 8 * f[..., 3:-1] - f[..., 4:]) / 12
    d[..., 0] = (-25 * f[..., 0] + 48 * f[..., 1] - 36 * f[..., 2] + 16 * f[..., 3] - 3 * f[..., 4]) / 12
    d[..., 1] = (-3 * f[..., 0] - 10 * f[..., 1] + 18 * f[..., 2] - 6 * f[..., 3] + f[..., 4]) / 12
    d[..., -1] = (25 * f[..., -1] - 48 * f[..., -2] + 36 * f[..., -3] - 16 * f[..., -4] + 3 * f[..., -5]) / 12
    d[..., -2] = (3 * f[..., -1] + 10 * f[..., -2] - 18 * f[..., -3] + 6 * f[..., -4] - f[..., -5]) / 12
    return d / dt


def lagrange_in_time(f: np.ndarray, tau: float, points: int = 4) -> np.ndarray:
    """Interpolate the columns of f at fractional index tau."""
    M = f.shape[-1] - 1
    points = min(points, M + 1)
    base = int(np.floor(tau)) - (points // 2 - 1)
    base = min(max(base, 0), M + 1 - points)
    nodes = np.arange(base, base + points)
    if np.any(np.isclose(tau, nodes, rtol=0, atol=1e-13)):
        return f[..., int(round(tau))]
    w = np.ones(points)
    for i, xi in enumerate(nodes):
        for xj in nodes:
            if xj != xi:
                w[i] *= (tau - xj) / (xi - xj)
    return f[..., nodes] @ w


# ---------------------------------------------------------------------
# paths

@dataclass(frozen=True, eq=False)
class LiePath:
    """X[j, k] on (2N+1) theta nodes and M+1 equispaced times in [0, t0]."""

    X: np.ndarray
    t0: float = 1.0
    cone_tol: float = 1e-12

    def __post_init__(self):
        X = np.array(self.X, dtype=complex)
        if X.ndim != 2 or X.shape[1] < 2:
            raise PathError("X must be a (2N+1) x (M+1) grid")
        order_from_count(X.shape[0])
        if not self.t0 > 0:
            raise PathError("t0 must be positive")
        low = float(np.min(X.imag))
        if low < -self.cone_tol:
            raise PathError("path leaves the inward cone", min_imag=low)
        X.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "t0", float(self.t0))

    @classmethod
    def from_function(cls, fn, N: int, M: int, t0: float = 1.0, **kw):
        """X(theta, t) sampled on the grid; fn is called with broadcast arrays."""
        th = grid(N)[:, None]
        t = np.linspace(0, t0, M + 1)[None, :]
        X = np.broadcast_to(np.asarray(fn(th, t), dtype=complex), (th.size, t.size))
        return cls(X, t0, **kw)

    @classmethod
    def constant(cls, value, N: int, M: int, t0: float = 1.0):
        return cls.from_function(lambda th, t: value + 0 * th + 0 * t, N, M, t0)

    @classmethod
    def from_modes(cls, coeffs, t0: float = 1.0, **kw):
        """From per-slice Fourier coefficients, array (M+1, 2N+1) of modes -N..N."""
        coeffs = np.asarray(coeffs, dtype=complex)
        n = coeffs.shape[1]
        X = np.fft.ifft(np.fft.ifftshift(coeffs, axes=1), axis=1).T * n
        return cls(X, t0, **kw)

    @property
    def N(self) -> int:
        return (self.X.shape[0] - 1) // 2

    @property
    def M(self) -> int:
        return self.X.shape[1] - 1

    @property
    def dt(self) -> float:
        return self.t0 / self.M

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0, self.t0, self.M + 1)

    def coefficients(self) -> np.ndarray:
        """Fourier coefficients of each slice, shape (M+1, 2N+1), modes -N..N."""
        n = self.X.shape[0]
        return np.fft.fftshift(np.fft.fft(self.X, axis=0), axes=0).T / n

    def slice(self, k: int) -> FourierSeries:
        return analyze(self.X[:, k])

    def is_univ(self, tol: float = 1e-10) -> bool:
        c = self.coefficients()
        scale = max(1.0, float(np.max(np.abs(c))))
        return bool(np.max(np.abs(c[:, :self.N - 1]), initial=0.0) <= tol * scale)

    def has_sitting_instants(self, tol: float = 1e-14) -> bool:
        ends = self.X[:, [0, 1, -2, -1]]
        return bool(np.max(np.abs(ends)) <= tol)

    def is_resolved(self) -> bool:
        return all(self.slice(k).is_resolved() for k in range(self.M + 1))

    def is_real(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.X.imag)) <= tol)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.X)))

    def to_dict(self) -> dict:
        X = [[[float(v.real), float(v.imag)] for v in row] for row in self.X]
        return {"kind": "liepath", "N": self.N, "M": self.M, "t0": self.t0, "X": X}

    @classmethod
    def from_dict(cls, d: dict) -> "LiePath":
        X = np.array([[complex(v[0], v[1]) for v in row] for row in d["X"]], dtype=complex)
        N, M = int(d["N"]), int(d["M"])
        if X.shape != (2 * N + 1, M + 1):
            raise PathError("X grid does not match N and M")
        return cls(X, float(d.get("t0", 1.0)))


@dataclass(frozen=True, eq=False)
class Framing:
    """h[j, k] on the same layout as a LiePath; frames ``annulus``."""

    h: np.ndarray
    t0: float = 1.0
    annulus: NormalizedAnnulus | None = None

    def __post_init__(self):
        h = np.array(self.h, dtype=complex)
        if h.ndim != 2 or h.shape[1] < 2:
            raise PathError("h must be a (2N+1) x (M+1) grid")
        order_from_count(h.shape[0])
        h.flags.writeable = False
        object.__setattr__(self, "h", h)

    @classmethod
    def radial(cls, q: float, N: int, M: int, t0: float = 1.0):
        """h(theta, t) = e^{i theta} q^{1 - t/t0}, framing the round annulus."""
        th = grid(N)[:, None]
        t = np.linspace(0, t0, M + 1)[None, :]
        h = np.exp(1j * th) * q ** (1 - t / t0)
        return cls(h, t0, NormalizedAnnulus.round(q, N))

    @property
    def N(self) -> int:
        return (self.h.shape[0] - 1) // 2

    @property
    def M(self) -> int:
        return self.h.shape[1] - 1

    @property
    def dt(self) -> float:
        return self.t0 / self.M

    def h_theta(self) -> np.ndarray:
        return theta_derivative(self.h)

    def h_t(self) -> np.ndarray:
        return time_derivative(self.h, self.dt)

    def jacobian(self) -> np.ndarray:
        """det d(x, y)/d(t, theta) = Im(conj(h_t) h_theta); equals
        |h_theta|^2 Im X, so it is non-negative for cone paths."""
        return np.imag(np.conj(self.h_t()) * self.h_theta())

    def checks(self, slices: int | None = None) -> list:
        out = []
        if self.annulus is not None:
            th = grid(self.N)
            e0 = float(np.max(np.abs(self.h[:, 0] - self.annulus.psi_plus(th))))
            e1 = float(np.max(np.abs(self.h[:, -1] - self.annulus.psi_minus(th))))
            out.append(("incoming_endpoint", e0 <= 1e-8, e0))
            out.append(("outgoing_endpoint", e1 <= 1e-8, e1))
        jac = float(np.min(self.jacobian()[:, 1:-1]))
        out.append(("jacobian", jac >= -1e-10, jac))
        from .geometry import JordanCurve
        ks = range(self.M + 1) if slices is None else np.linspace(0, self.M, slices).astype(int)
        worst = np.inf
        for k in ks:
            worst = min(worst, JordanCurve(analyze(self.h[:, k])).injectivity_ratio())
        out.append(("slices_injective", worst >= 1e-6, worst))
        return out

    def to_dict(self) -> dict:
        h = [[[float(v.real), float(v.imag)] for v in row] for row in self.h]
        d = {"kind": "framing", "N": self.N, "M": self.M, "t0": self.t0, "h": h}
        if self.annulus is not None:
            d["annulus"] = self.annulus.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Framing":
        h = np.array([[complex(v[0], v[1]) for v in row] for row in d["h"]], dtype=complex)
        ann = NormalizedAnnulus.from_dict(d["annulus"]) if "annulus" in d else None
        return cls(h, float(d.get("t0", 1.0)), ann)


# ---------------------------------------------------------------------
# the exponential

def _vector_field_coeffs(path: LiePath) -> np.ndarray:
    """Taylor coefficients of Y(z, t_k) = i z X(theta, t_k), shape (M+1, N+2)."""
    c = path.coefficients()
    N = path.N
    # x_n for n = -1..N becomes the z^{n+1} coefficient
    return 1j * c[:, N - 1:]


def exp_univ(path: LiePath, substeps: int = 1, exit_tol: float = EXIT_TOL):
    """Time-ordered exponential of a path whose slices use modes n >= -1.

    Returns (annulus, framing).  The flow of Y is integrated by classical RK4
    with ``substeps`` steps per grid interval, sweeping backwards from t0 so
    that k(., t_k) = k(., t_{k+1}) o g(., t_k, t_{k+1}).
    """
    if not path.is_univ():
        raise PathError("path has modes below -1; its exponential is not available")
    N, M = path.N, path.M
    y = _vector_field_coeffs(path).T  # (N+2, M+1)
    z = np.exp(1j * grid(N))
    h = np.empty((2 * N + 1, M + 1), complex)
    h[:, M] = z
    K = np.zeros(N + 1, complex)
    K[1] = 1.0
    ds = path.dt / substeps
    for k in range(M - 1, -1, -1):
        w = z.copy()
        for sub in range(substeps):
            s0 = k + sub / substeps
            ya = lagrange_in_time(y, s0)
            yb = lagrange_in_time(y, s0 + 0.5 / substeps)
            yc = lagrange_in_time(y, s0 + 1.0 / substeps)
            k1 = horner(ya, w)
            k2 = horner(yb, w + 0.5 * ds * k1)
            k3 = horner(yb, w + 0.5 * ds * k2)
            k4 = horner(yc, w + ds * k3)
            w = w + ds / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        excess = float(np.max(np.abs(w))) - 1.0
        if excess > exit_tol:
            raise FlowError("flow leaves the disc", stage="exp/flow", step=k, excess=excess)
        if not np.all(np.isfinite(w)):
            raise FlowError("flow diverged", stage="exp/flow", step=k)
        vals = horner(K, w)
        h[:, k] = vals
        K = np.fft.fft(vals)[:N + 1] / vals.size
    psi = FourierSeries.from_taylor(K, N)
    try:
        ann = from_univalent(psi, N, tol=max(exit_tol, 1e-12))
    except GeometryError as exc:
        raise FlowError(f"time-zero map is not admissible: {exc}", stage="exp/univalent") from exc
    return ann, Framing(h, path.t0, ann)


def path_from_framing(fr: Framing, cone_tol: float = 1e-6) -> LiePath:
    """X = -h_t / h_theta with spectral theta and fourth-order t derivatives."""
    ht = fr.h_theta()
    if np.min(np.abs(ht)) <= 1e-13 * max(1.0, np.max(np.abs(ht))):
        raise PathError("degenerate framing: h_theta vanishes")
    X = -fr.h_t() / ht
    return LiePath(X, fr.t0, cone_tol=cone_tol)


def xholo_residual(f: np.ndarray, path: LiePath) -> float:
    """sup |f_t + X f_theta|."""
    f = np.asarray(f, dtype=complex)
    if f.shape != path.X.shape:
        raise PathError("grid shapes differ")
    r = time_derivative(f, path.dt) + path.X * theta_derivative(f)
    return float(np.max(np.abs(r)))


def beltrami(path) -> np.ndarray:
    """mu = (X - i)/(X + i)."""
    X = path.X if isinstance(path, LiePath) else np.asarray(path, dtype=complex)
    den = X + 1j
    if np.min(np.abs(den)) <= 1e-14:
        raise PathError("X = -i at a node")
    return (X - 1j) / den


def _boundary_values(g, pts):
    return np.asarray(g(pts) if callable(g) else g, dtype=complex)


def cauchy_reconstruct(fr: Framing, g_in, g_out, z: complex) -> complex:
    """(1/2 pi i)(integral over the outgoing boundary - integral over the
    incoming boundary) of g(w)/(w - z) dw.

    g_in and g_out are callables or samples at h[:, 0] and h[:, M]."""
    z = complex(z)
    win, wout = fr.h[:, 0], fr.h[:, -1]
    oversampled = [analyze(c).padded(4 * fr.N + 1).samples() for c in (win, wout)]
    n_in, n_out = (float(winding_numbers(c, z)[0]) for c in oversampled)
    if abs(n_out - 1) > 1e-3 or abs(n_in) > 1e-3:
        raise GeometryError("point is not inside the annulus", stage="cauchy")
    spacing = max(np.max(np.abs(np.diff(np.append(c, c[0])))) for c in (win, wout))
    dist = min(np.min(np.abs(c - z)) for c in (win, wout))
    if dist < 2 * spacing:
        raise GeometryError("point is within resolution distance of the boundary",
                            stage="cauchy", distance=float(dist))
    dth = fr.h_theta()
    wts = 2 * np.pi / fr.h.shape[0]
    total = 0j
    for col, sign, g in ((0, -1, g_in), (-1, 1, g_out)):
        w = fr.h[:, col]
        total += sign * np.sum(_boundary_values(g, w) / (w - z) * dth[:, col]) * wts
    return complex(total / (2j * np.pi))


def pullback_field_residual(fr: Framing, v: FourierSeries, path: LiePath | None = None,
                            return_field: bool = False):
    """f = v(h)/h_theta and sup |f_t - (X_theta f - X f_theta)|."""
    ht = fr.h_theta()
    if np.min(np.abs(ht)) <= 1e-13:
        raise PathError("degenerate framing: h_theta vanishes")
    f = v.at(fr.h) / ht
    X = path_from_framing(fr, cone_tol=np.inf).X if path is None else path.X
    r = time_derivative(f, fr.dt) - (theta_derivative(X) * f - X * theta_derivative(f))
    res = float(np.max(np.abs(r)))
    return (res, f) if return_field else res


# ---------------------------------------------------------------------
# sitting instants and concatenation

def _bump(y):
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    pos = y > 0
    out[pos] = np.exp(-1.0 / y[pos])
    return out


def smooth_step(u):
    """S(u) = f(u)/(f(u) + f(1-u)), f(y) = e^{-1/y}; with its derivative."""
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
    a, b = _bump(u), _bump(1 - u)
    S = a / (a + b)
    with np.errstate(divide="ignore", invalid="ignore"):
        da = np.where(u > 0, a / np.where(u > 0, u, 1) ** 2, 0.0)
        db = np.where(u < 1, b / np.where(u < 1, 1 - u, 1) ** 2, 0.0)
    dS = (da * b + a * db) / (a + b) ** 2
    return S, dS


def make_sitting_instants(path: LiePath, margin: float = 0.05, points: int = 6) -> LiePath:
    """X(theta, tau(t)) tau'(t) with tau flat on the first and last ``margin``
    of the interval."""
    t = path.times
    u = (t / path.t0 - margin) / (1 - 2 * margin)
    S, dS = smooth_step(u)
    tau = path.t0 * S
    dtau = dS / (1 - 2 * margin)
    X = np.empty_like(path.X)
    for k in range(path.M + 1):
        if dtau[k] == 0:
            X[:, k] = 0
        else:
            X[:, k] = lagrange_in_time(path.X, tau[k] / path.dt, points) * dtau[k]
    if np.min(path.X.imag) >= 0:
        # interpolation overshoot must not push the path out of the cone
        X.imag = np.maximum(X.imag, 0)
    return LiePath(X, path.t0, path.cone_tol)


def concat(X1: LiePath, X2: LiePath) -> LiePath:
    """X2 runs first, then X1, so that exp(concat(X1, X2)) = exp(X1) o exp(X2).

    If the time steps differ, X2 is linearly rescaled in time (which leaves its
    exponential unchanged) to the step of X1."""
    if X1.N != X2.N:
        raise PathError("paths use different theta grids")
    if not (X1.has_sitting_instants() and X2.has_sitting_instants()):
        raise PathError("concatenation needs sitting instants at both ends")
    dt = X1.dt
    scale = X2.dt / dt
    second = X2.X * scale
    t0 = X1.t0 + X2.M * dt
    X = np.concatenate([second, X1.X[:, 1:]], axis=1)
    return LiePath(X, t0, max(X1.cone_tol, X2.cone_tol))
