"""Virasoro cocycle, its left-invariant 2-form on curve families, and the
central extension in the path model.

Vector fields on the circle are Laurent data f(z) d/dz with L_m = z^{m+1}.
A theta-frame field f(theta) d/dtheta corresponds to i z f d/dz.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .annulus import NormalizedAnnulus, compose
from .errors import AnnuliError, GeometryError, PathError, UnderResolvedWarning
from .exponential import (LiePath, concat, exp_univ, lagrange_in_time,
                          time_derivative)
from .fourier import TAIL_FRACTION, FourierSeries, analyze, grid
from .geometry import JordanCurve


def witt(m: int, N: int | None = None) -> FourierSeries:
    """L_m = z^{m+1} d/dz."""
    N = max(abs(m + 1), 1) if N is None else N
    return FourierSeries.from_modes({m + 1: 1.0}, N)


def cocycle(f: FourierSeries, g: FourierSeries) -> complex:
    """(1/12) sum_k k(k-1)(k-2) f_k g_{2-k}."""
    total = 0j
    for k in range(-f.N, f.N + 1):
        w = k * (k - 1) * (k - 2)
        if w == 0 or abs(2 - k) > g.N:
            continue
        fk = f.coeffs[k + f.N]
        if fk == 0:
            continue
        total += w * fk * g.coeffs[2 - k + g.N]
    return total / 12


def bracket(f: FourierSeries, g: FourierSeries) -> FourierSeries:
    """[f d/dz, g d/dz] = (f g' - g f') d/dz, exact on Laurent data."""
    N = f.N + g.N + 1
    fz, gz = f.z_derivative(), g.z_derivative()
    a = np.convolve(f.coeffs, gz.coeffs)
    b = np.convolve(g.coeffs, fz.coeffs)
    # both convolutions have order f.N + g.N + 1
    return FourierSeries(a - b).padded(N)


def theta_to_z(f: FourierSeries) -> FourierSeries:
    """f(theta) d/dtheta as a z-frame field: F = i z f."""
    N = f.N + 1
    c = np.zeros(2 * N + 1, complex)
    c[f.modes + 1 + N] = 1j * f.coeffs
    return FourierSeries(c)


def frame_tangent(curve: JordanCurve, dgamma: FourierSeries, N: int | None = None) -> FourierSeries:
    """The field f with dgamma = f gamma_theta (left-invariant frame)."""
    N = max(curve.N, dgamma.N) if N is None else N
    gt = curve.gamma.padded(N).derivative().samples()
    if np.min(np.abs(gt)) <= 1e-13 * max(1.0, np.max(np.abs(gt))):
        raise GeometryError("curve velocity vanishes", stage="frame")
    return analyze(dgamma.padded(N).samples() / gt)


def _theta_cocycle(fs: np.ndarray, ft: np.ndarray) -> np.ndarray:
    """cocycle(i z f_s, i z f_t) from theta-frame coefficients along the last
    axis (FFT order), = -(1/12) sum_m (m^3 - m) f_s[m] f_t[-m]."""
    n = fs.shape[-1]
    m = np.fft.fftfreq(n, 1.0 / n)
    ft_neg = np.roll(ft[..., ::-1], 1, axis=-1)  # index m -> -m
    return -np.sum((m ** 3 - m) * fs * ft_neg, axis=-1) / 12


@dataclass(frozen=True, eq=False)
class CurveFamily2D:
    """gamma[p, q, j] = gamma_{(s_p, t_q)}(theta_j) on [0, 1]^2.

    Closed families are periodic in both parameters and the grid omits the
    right endpoints; open families include both endpoints."""

    gamma: np.ndarray
    closed: bool = False

    def __post_init__(self):
        g = np.array(self.gamma, dtype=complex)
        if g.ndim != 3:
            raise ValueError("family must be a (P, Q, 2N+1) grid")
        if not self.closed and (g.shape[0] < 2 or g.shape[1] < 2):
            raise ValueError("open families need at least two nodes per parameter")
        g.flags.writeable = False
        object.__setattr__(self, "gamma", g)

    @classmethod
    def from_function(cls, fn, P: int, Q: int, N: int, closed: bool = False):
        """fn(s, t, theta) with broadcasting."""
        s = (np.arange(P) / P if closed else np.linspace(0, 1, P))[:, None, None]
        t = (np.arange(Q) / Q if closed else np.linspace(0, 1, Q))[None, :, None]
        th = grid(N)[None, None, :]
        g = np.broadcast_to(np.asarray(fn(s, t, th), dtype=complex), (P, Q, th.size))
        return cls(g, closed)

    @classmethod
    def constant_homotopy(cls, h: np.ndarray, P: int = 9):
        """The family k(s, t) = h[:, t] for every s."""
        g = np.broadcast_to(np.asarray(h).T[None, :, :], (P,) + h.T.shape)
        return cls(g, False)

    @property
    def shape(self):
        return self.gamma.shape


def _param_derivative(g: np.ndarray, axis: int, closed: bool) -> np.ndarray:
    n = g.shape[axis]
    if closed:
        k = np.fft.fftfreq(n, 1.0 / n)
        shape = [1] * g.ndim
        shape[axis] = n
        return np.fft.ifft(2j * np.pi * k.reshape(shape) * np.fft.fft(g, axis=axis), axis=axis)
    moved = np.moveaxis(g, axis, -1)
    return np.moveaxis(time_derivative(moved, 1.0 / (n - 1)), -1, axis)


def _simpson_weights(n: int) -> np.ndarray:
    if n % 2 == 0 or n < 3:
        raise ValueError("Simpson quadrature needs an odd node count >= 3")
    w = np.ones(n)
    w[1:-1:2] = 4
    w[2:-1:2] = 2
    return w / (3 * (n - 1))


def form_integrand(k: CurveFamily2D) -> np.ndarray:
    """omega(f_s, f_t) at each parameter node."""
    g = k.gamma
    n = g.shape[-1]
    gth = np.fft.ifft(1j * np.fft.fftfreq(n, 1.0 / n) * np.fft.fft(g, axis=-1), axis=-1)
    if np.min(np.abs(gth)) <= 1e-13 * max(1.0, np.max(np.abs(gth))):
        raise GeometryError("a curve in the family has vanishing velocity", stage="form")
    gs = _param_derivative(g, 0, k.closed)
    gt = _param_derivative(g, 1, k.closed)
    fs = np.fft.fft(gs / gth, axis=-1) / n
    ft = np.fft.fft(gt / gth, axis=-1) / n
    for f in (fs, ft):
        mass = np.sum(np.abs(f) ** 2, axis=-1)
        m = np.abs(np.fft.fftfreq(n, 1.0 / n))
        top = np.sum(np.abs(f[..., m > 0.9 * (n - 1) / 2]) ** 2, axis=-1)
        with np.errstate(invalid="ignore", divide="ignore"):
            frac = np.where(mass > 0, top / np.where(mass > 0, mass, 1), 0)
        if np.max(frac) > TAIL_FRACTION:
            warnings.warn("frame fields are under-resolved", UnderResolvedWarning)
    return _theta_cocycle(fs, ft)


def form_integral(k: CurveFamily2D) -> complex:
    """Integral of the left-invariant Virasoro 2-form over the family.

    Closed families: spectral parameter derivatives and trapezoid rule.
    Open families: fourth-order central differences and Simpson's rule."""
    vals = form_integrand(k)
    P, Q = vals.shape
    if k.closed:
        return complex(np.mean(vals))
    return complex(_simpson_weights(P) @ vals @ _simpson_weights(Q))


def reparametrization_family(h: np.ndarray, tau, P: int = 9) -> CurveFamily2D:
    """k(s, t) = h(., (1 - s) t + s tau(t)) on the time grid of h (a rank-one
    family: every curve lies on the original curve-path)."""
    M = h.shape[1] - 1
    t = np.linspace(0, 1, M + 1)
    out = np.empty((P, M + 1, h.shape[0]), complex)
    for p, s in enumerate(np.linspace(0, 1, P)):
        target = (1 - s) * t + s * np.asarray(tau(t))
        for q in range(M + 1):
            out[p, q] = lagrange_in_time(h, target[q] * M, 6)
    return CurveFamily2D(out, False)


# ---------------------------------------------------------------------
# elements of the extension

@dataclass(frozen=True, eq=False)
class VirasoroElement:
    annulus: NormalizedAnnulus
    path: LiePath
    winding: int = 0
    central: complex = 0j
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "winding", int(self.winding))
        object.__setattr__(self, "central", complex(self.central))

    @classmethod
    def from_path(cls, path: LiePath, winding: int = 0, central: complex = 0j):
        ann, _ = exp_univ(path)
        return cls(ann, path, winding, central)

    @classmethod
    def neutral(cls, N: int, M: int):
        return cls(NormalizedAnnulus.identity(N), LiePath.constant(0, N, M), 0, 0j)

    def framing(self) -> np.ndarray:
        return exp_univ(self.path)[1].h

    def check(self, tol: float = 1e-6) -> float:
        """Distance between exp(path) and the stored annulus."""
        d = exp_univ(self.path)[0].distance(self.annulus)
        if d > tol:
            raise PathError("path does not exponentiate to the annulus", distance=d)
        return d

    def to_dict(self) -> dict:
        return {"kind": "velement", "annulus": self.annulus.to_dict(),
                "path": self.path.to_dict(), "winding": self.winding,
                "central": [self.central.real, self.central.imag]}

    @classmethod
    def from_dict(cls, d: dict):
        c = d.get("central", [0.0, 0.0])
        return cls(NormalizedAnnulus.from_dict(d["annulus"]), LiePath.from_dict(d["path"]),
                   int(d.get("winding", 0)), complex(c[0], c[1]))


def velement_compose(e1: VirasoroElement, e2: VirasoroElement, tol: float = 1e-8) -> VirasoroElement:
    return VirasoroElement(compose(e1.annulus, e2.annulus, tol=tol),
                           concat(e1.path, e2.path),
                           e1.winding + e2.winding,
                           e1.central + e2.central)


def velement_equal(e1: VirasoroElement, e2: VirasoroElement, k: CurveFamily2D,
                   tol: float = 1e-6) -> bool:
    """Decide (A, X1, a1) ~ (A, X2, a2) using the homotopy k between the
    curve-paths t -> h1(., t) and t -> h2(., t)."""
    if e1.annulus.distance(e2.annulus) > 1e-6:
        raise AnnuliError("underlying annuli differ", stage="velement")
    h1, h2 = e1.framing(), e2.framing()
    g = k.gamma
    if g.shape[1:] != h1.T.shape or h1.shape != h2.shape:
        raise AnnuliError("homotopy grid does not match the representatives", stage="velement")
    mismatch = max(np.max(np.abs(g[0] - h1.T)), np.max(np.abs(g[-1] - h2.T)))
    if mismatch > 1e-6:
        raise AnnuliError("homotopy does not connect the representatives", stage="velement",
                          mismatch=float(mismatch))
    if e1.winding != e2.winding:
        return False
    return abs(e1.central - e2.central - form_integral(k)) <= tol


# ---------------------------------------------------------------------
# loops of diffeomorphisms

def _flow_angles(path: LiePath, theta0: np.ndarray, substeps: int = 2) -> np.ndarray:
    coeffs = path.coefficients().T  # (2N+1, M+1)

    def field(theta, tau):
        c = lagrange_in_time(coeffs, tau)
        return FourierSeries(c).at(np.exp(1j * theta)).real

    th = np.array(theta0, dtype=float)
    h = path.dt / substeps
    for k in range(path.M):
        for sub in range(substeps):
            s0 = k + sub / substeps
            k1 = field(th, s0)
            k2 = field(th + 0.5 * h * k1, s0 + 0.5 / substeps)
            k3 = field(th + 0.5 * h * k2, s0 + 0.5 / substeps)
            k4 = field(th + h * k3, s0 + 1.0 / substeps)
            th = th + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return th


def winding_thin_loop(path: LiePath, loop_tol: float = 1e-6) -> int:
    """Degree of t -> theta_0(t) for theta' = X(theta, t), theta_0(0) = 0."""
    if not path.is_real():
        raise PathError("winding is defined for real (tangential) paths")
    th0 = grid(path.N)
    th1 = _flow_angles(path, th0)
    turns = (th1 - th0) / (2 * np.pi)
    n = np.round(turns)
    if np.max(np.abs(turns - n)) > loop_tol or np.any(n != n[0]):
        raise PathError("time-t0 flow is not the identity", stage="winding",
                        deviation=float(np.max(np.abs(turns - n))))
    if abs(turns[0] - n[0]) > 0.1:
        raise PathError("ambiguous winding", stage="winding")
    return int(n[0])
