"""Truncated Fourier/Laurent series on the unit circle.

A series of order N stores the coefficients of modes -N..N in a flat array.
The same object doubles as a Laurent polynomial: evaluating at a complex
point z gives sum c_n z^n, and on |z| = 1 this is the trigonometric sum.

Sampling grid: 2N+1 nodes theta_j = 2 pi j / (2N+1).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

DEFAULT_N = 128
KINDS = ("generic", "interior", "exterior")

# fraction of l2 mass allowed in the top 10% of modes
TAIL_FRACTION = 1e-8


def grid(N: int) -> np.ndarray:
    """The 2N+1 equispaced nodes on [0, 2 pi)."""
    n = 2 * N + 1
    return 2 * np.pi * np.arange(n) / n


def order_from_count(n: int) -> int:
    if n < 3 or n % 2 == 0:
        raise ValueError(f"need an odd sample count >= 3, got {n}")
    return (n - 1) // 2


def horner(c, x):
    """sum_k c[k] x^k for array x."""
    x = np.asarray(x, dtype=complex)
    acc = np.full(x.shape, c[-1], dtype=complex)
    for a in c[-2::-1]:
        acc = acc * x + a
    return acc


@dataclass(frozen=True, eq=False)
class FourierSeries:
    """Coefficients of modes -N..N. ``kind`` tags Hardy-space data:

    interior -- only modes n >= 0 (boundary values of a map on the disc)
    exterior -- only modes n <= 1 (boundary values of a map on |z| > 1)
    """

    coeffs: np.ndarray
    kind: str = "generic"

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim != 1:
            raise ValueError("coefficient array must be one-dimensional")
        order_from_count(c.size)
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")

    # construction -----------------------------------------------------
    @classmethod
    def zeros(cls, N: int, kind="generic") -> "FourierSeries":
        return cls(np.zeros(2 * N + 1, complex), kind)

    @classmethod
    def from_modes(cls, modes: Mapping[int, complex], N: int | None = None, kind="generic"):
        if N is None:
            N = max([abs(int(n)) for n in modes] + [1])
        c = np.zeros(2 * N + 1, complex)
        for n, v in modes.items():
            if abs(n) > N:
                raise ValueError(f"mode {n} exceeds truncation order {N}")
            c[int(n) + N] += v
        return cls(c, kind)

    @classmethod
    def identity(cls, N: int = DEFAULT_N, kind="generic"):
        return cls.from_modes({1: 1.0}, N, kind)

    @classmethod
    def from_function(cls, fn, N: int = DEFAULT_N, kind="generic"):
        """Interpolate fn(theta) on the canonical grid."""
        return analyze(np.asarray(fn(grid(N)), dtype=complex), kind)

    @classmethod
    def from_taylor(cls, a, N: int | None = None):
        """Interior series with coefficients a[0], a[1], ..."""
        a = np.asarray(a, dtype=complex)
        N = max(len(a) - 1, 1) if N is None else N
        c = np.zeros(2 * N + 1, complex)
        m = min(len(a), N + 1)
        c[N:N + m] = a[:m]
        return cls(c, "interior")

    # basic properties -------------------------------------------------
    @property
    def N(self) -> int:
        return (self.coeffs.size - 1) // 2

    @property
    def modes(self) -> np.ndarray:
        return np.arange(-self.N, self.N + 1)

    def __getitem__(self, n: int) -> complex:
        n = int(n)
        if abs(n) > self.N:
            return 0j
        return complex(self.coeffs[n + self.N])

    def taylor(self, count: int | None = None) -> np.ndarray:
        """Coefficients of modes 0, 1, ..., count-1."""
        count = self.N + 1 if count is None else count
        out = np.zeros(count, complex)
        m = min(count, self.N + 1)
        out[:m] = self.coeffs[self.N:self.N + m]
        return out

    def negative(self, count: int | None = None) -> np.ndarray:
        """Coefficients of modes -1, -2, ..., -count."""
        count = self.N if count is None else count
        out = np.zeros(count, complex)
        m = min(count, self.N)
        out[:m] = self.coeffs[self.N - 1::-1][:m]
        return out

    def with_kind(self, kind: str) -> "FourierSeries":
        return FourierSeries(self.coeffs, kind)

    def padded(self, N: int) -> "FourierSeries":
        """Zero-pad or truncate to order N."""
        c = np.zeros(2 * N + 1, complex)
        m = min(N, self.N)
        c[N - m:N + m + 1] = self.coeffs[self.N - m:self.N + m + 1]
        return FourierSeries(c, self.kind)

    def is_real(self, tol=1e-12) -> bool:
        c = self.coeffs
        return bool(np.max(np.abs(c - np.conj(c[::-1]))) <= tol * max(1.0, np.max(np.abs(c))))

    # arithmetic ------------------------------------------------------
    def _binary(self, other, op):
        if isinstance(other, FourierSeries):
            N = max(self.N, other.N)
            kind = self.kind if self.kind == other.kind else "generic"
            return FourierSeries(op(self.padded(N).coeffs, other.padded(N).coeffs), kind)
        c = self.coeffs.copy()
        c[self.N] = op(c[self.N], complex(other))
        return FourierSeries(c, "generic" if self.kind == "exterior" else self.kind)

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return FourierSeries(-self.coeffs, "generic" if self.kind == "exterior" else self.kind)

    def __mul__(self, other):
        if isinstance(other, FourierSeries):
            return multiply(self, other)
        return FourierSeries(self.coeffs * complex(other), "generic" if self.kind == "exterior" else self.kind)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * (1.0 / complex(other))

    def conj(self) -> "FourierSeries":
        """Pointwise complex conjugate on the circle."""
        return FourierSeries(np.conj(self.coeffs[::-1]))

    # evaluation ------------------------------------------------------
    def samples(self) -> np.ndarray:
        """Values on the canonical grid, via the inverse FFT."""
        n = self.coeffs.size
        return np.fft.ifft(np.fft.ifftshift(self.coeffs)) * n

    def __call__(self, theta):
        return evaluate(self, theta)

    def at(self, z):
        """Laurent evaluation sum c_n z^n at complex points."""
        z = np.asarray(z, dtype=complex)
        N = self.N
        out = horner(self.coeffs[N:], z)
        neg = self.coeffs[:N][::-1]
        if N and np.any(neg):
            out = out + horner(np.concatenate([[0], neg]), 1.0 / z)
        return out

    def derivative(self, order: int = 1) -> "FourierSeries":
        return differentiate(self, order)

    def z_derivative(self) -> "FourierSeries":
        return differentiate(self, 1, variable="z")

    # diagnostics -----------------------------------------------------
    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))

    def tail_mass(self) -> float:
        """Fraction of l2 mass carried by modes with |n| > 0.9 N."""
        total = np.sum(np.abs(self.coeffs) ** 2)
        if total == 0:
            return 0.0
        cut = int(np.floor(0.9 * self.N))
        top = np.abs(self.modes) > cut
        return float(np.sum(np.abs(self.coeffs[top]) ** 2) / total)

    def is_resolved(self) -> bool:
        return self.tail_mass() <= TAIL_FRACTION

    def distance(self, other: "FourierSeries") -> float:
        """Max coefficient difference after padding."""
        N = max(self.N, other.N)
        return float(np.max(np.abs(self.padded(N).coeffs - other.padded(N).coeffs)))

    def __repr__(self):
        nz = np.flatnonzero(np.abs(self.coeffs) > 1e-14)
        head = ", ".join(f"{int(self.modes[i])}: {self.coeffs[i]:.6g}" for i in nz[:6])
        more = " ..." if nz.size > 6 else ""
        return f"FourierSeries(N={self.N}, kind={self.kind}, {{{head}{more}}})"

    # serialization ---------------------------------------------------
    def to_dict(self, kind_tag="fourier") -> dict:
        rows = [[int(n), float(v.real), float(v.imag)]
                for n, v in zip(self.modes, self.coeffs) if v != 0]
        return {"kind": kind_tag, "N": self.N, "coeffs": rows}

    @classmethod
    def from_dict(cls, d: dict, kind="generic") -> "FourierSeries":
        N = int(d["N"])
        if N < 1:
            raise ValueError("N must be positive")
        c = np.zeros(2 * N + 1, complex)
        for row in d.get("coeffs", []):
            n, re, im = int(row[0]), float(row[1]), float(row[2])
            if abs(n) > N:
                raise ValueError(f"mode {n} exceeds N={N}")
            c[n + N] = complex(re, im)
        return cls(c, kind)


def analyze(samples, kind="generic") -> FourierSeries:
    """Trigonometric interpolant of samples on the canonical grid."""
    samples = np.asarray(samples, dtype=complex)
    order_from_count(samples.size)
    c = np.fft.fftshift(np.fft.fft(samples)) / samples.size
    return FourierSeries(c, kind)


def evaluate(s: FourierSeries, theta) -> np.ndarray:
    """sum c_n e^{i n theta} at arbitrary nodes."""
    theta = np.asarray(theta, dtype=float)
    return s.at(np.exp(1j * theta))


def differentiate(s: FourierSeries, order: int = 1, variable: str = "theta") -> FourierSeries:
    """theta-derivative (multiply by (in)^order) or z-derivative of Laurent data.

    The z-derivative of order N data has order N+1 so that no mode is lost.
    """
    if variable == "theta":
        c = s.coeffs * (1j * s.modes) ** order
        kind = s.kind if s.kind == "interior" else "generic"
        return FourierSeries(c, kind)
    if variable != "z":
        raise ValueError("variable must be 'theta' or 'z'")
    out = s
    for _ in range(order):
        N = out.N + 1
        c = np.zeros(2 * N + 1, complex)
        # d/dz c_n z^n = n c_n z^{n-1}
        c[out.modes - 1 + N] = out.modes * out.coeffs
        kind = "interior" if out.kind == "interior" else "generic"
        out = FourierSeries(c, kind)
    return out


def hilbert(s: FourierSeries) -> FourierSeries:
    """+1/2 on modes n >= 0 and -1/2 on n < 0."""
    w = np.where(s.modes >= 0, 0.5, -0.5)
    return FourierSeries(s.coeffs * w, s.kind)


def multiply(a: FourierSeries, b: FourierSeries, N: int | None = None) -> FourierSeries:
    """Product of two series, truncated to order N (default: larger input)."""
    if N is None:
        N = max(a.N, b.N)
    full = np.convolve(a.coeffs, b.coeffs)
    Nfull = a.N + b.N
    kind = "interior" if a.kind == b.kind == "interior" else "generic"
    return FourierSeries(full, kind).padded(N) if Nfull != N else FourierSeries(full, kind)


def project_interior(s: FourierSeries):
    """Zero the negative modes; return (series, discarded l2 mass)."""
    c = s.coeffs.copy()
    dropped = float(np.sqrt(np.sum(np.abs(c[:s.N]) ** 2)))
    c[:s.N] = 0
    return FourierSeries(c, "interior"), dropped


def project_exterior(s: FourierSeries, normalize=True):
    """Keep modes <= 1; with ``normalize`` force mode 1 to 1 and mode 0 to 0.

    Returns (series, discarded l2 mass).
    """
    N = s.N
    c = s.coeffs.copy()
    lost = np.sum(np.abs(c[N + 2:]) ** 2)
    c[N + 2:] = 0
    if normalize:
        lost += abs(c[N + 1] - 1) ** 2 + abs(c[N]) ** 2
        c[N + 1] = 1
        c[N] = 0
    return FourierSeries(c, "exterior"), float(np.sqrt(lost))
