"""The semigroup of annuli in normalized coordinates.

An annulus is stored as the pair (psi_minus, psi_plus): psi_minus maps the
co-disc |z| >= 1 with psi_minus = z + b_1/z + ..., psi_plus maps the closed
disc, and the open images are disjoint.  The annulus itself is what lies
between the curves psi_plus(S^1) (incoming boundary) and psi_minus(S^1)
(outgoing boundary); the boundary parametrizations are the restrictions to
the circle.

Composition A1 o A2 glues the incoming boundary of A1 to the outgoing
boundary of A2 pointwise in the boundary parameter.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AnnuliError, CompositionError, GeometryError
from .fourier import (DEFAULT_N, FourierSeries, analyze, grid,
                      project_exterior, project_interior)
from .geometry import (CircleDiffeo, JordanCurve, diffeo_invert,
                       exterior_derivative_min, interior_derivative_min,
                       riemann_exterior_map, riemann_interior_map,
                       winding_numbers)
from .welding import weld

NEWTON_TOL = 1e-13


@dataclass(frozen=True, eq=False)
class NormalizedAnnulus:
    psi_minus: FourierSeries
    psi_plus: FourierSeries
    residual: float = 0.0
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        N = max(self.psi_minus.N, self.psi_plus.N)
        pm = self.psi_minus.padded(N)
        pp = self.psi_plus.padded(N)
        c = pm.coeffs
        bad = max(abs(c[N + 1] - 1), abs(c[N]), float(np.max(np.abs(c[N + 2:]), initial=0.0)))
        if bad > 1e-10:
            raise GeometryError("psi_minus is not normalized at infinity", stage="annulus",
                                deviation=bad)
        if np.max(np.abs(pp.coeffs[:N]), initial=0.0) > 1e-10:
            raise GeometryError("psi_plus has negative modes", stage="annulus")
        pm, _ = project_exterior(pm)
        pp, _ = project_interior(pp)
        object.__setattr__(self, "psi_minus", pm)
        object.__setattr__(self, "psi_plus", pp)

    # constructors -----------------------------------------------------
    @classmethod
    def identity(cls, N: int = DEFAULT_N):
        z = FourierSeries.identity(N)
        return cls(z.with_kind("exterior"), z.with_kind("interior"))

    @classmethod
    def round(cls, q: float, N: int = DEFAULT_N):
        """The round annulus q <= |z| <= 1."""
        return cls(FourierSeries.identity(N, "exterior"),
                   FourierSeries.from_modes({1: q}, N, "interior"))

    # accessors -------------------------------------------------------
    @property
    def N(self) -> int:
        return self.psi_minus.N

    @property
    def a(self) -> np.ndarray:
        """Taylor coefficients a_0, a_1, ... of psi_plus."""
        return self.psi_plus.taylor()

    @property
    def b(self) -> np.ndarray:
        """Coefficients b_1, b_2, ... of psi_minus = z + sum b_n z^{-n}."""
        return self.psi_minus.negative()

    def inner_curve(self) -> JordanCurve:
        return JordanCurve(self.psi_plus.with_kind("generic"))

    def outer_curve(self) -> JordanCurve:
        return JordanCurve(self.psi_minus.with_kind("generic"))

    def padded(self, N: int) -> "NormalizedAnnulus":
        return NormalizedAnnulus(self.psi_minus.padded(N), self.psi_plus.padded(N),
                                 self.residual, dict(self.info))

    def distance(self, other: "NormalizedAnnulus") -> float:
        """Max coefficient difference over both maps."""
        return max(self.psi_minus.distance(other.psi_minus),
                   self.psi_plus.distance(other.psi_plus))

    def thinness(self, oversample: int = 4) -> float:
        """min over theta, theta' of |psi_plus(e^{i theta'}) - psi_minus(e^{i theta})|."""
        m = oversample * (2 * self.N + 1)
        th = 2 * np.pi * np.arange(m) / m
        gi = self.psi_plus(th)
        go = self.psi_minus(th)
        best = np.inf
        for chunk in np.array_split(np.arange(m), max(1, m // 512)):
            best = min(best, float(np.min(np.abs(gi[chunk, None] - go[None, :]))))
        return best

    def checks(self) -> list:
        """Invariant checks as (name, passed, residual) triples."""
        out = []
        pm_dev = max(abs(self.psi_minus[1] - 1), abs(self.psi_minus[0]))
        out.append(("normalization", pm_dev <= 1e-12, float(pm_dev)))
        dmin_p = interior_derivative_min(self.psi_plus)
        dmin_m = exterior_derivative_min(self.psi_minus)
        out.append(("psi_plus_derivative", dmin_p > 1e-10, dmin_p))
        out.append(("psi_minus_derivative", dmin_m > 1e-10, dmin_m))
        for name, curve in (("inner_injective", self.inner_curve()),
                            ("outer_injective", self.outer_curve())):
            r = curve.injectivity_ratio()
            out.append((name, r >= curve.injectivity_tol, r))
        viol = self.disjointness_violation()
        out.append(("interior_disjoint", viol <= 1e-8, viol))
        out.append(("resolved", self.psi_minus.is_resolved() and self.psi_plus.is_resolved(),
                    max(self.psi_minus.tail_mass(), self.psi_plus.tail_mass())))
        return out

    def disjointness_violation(self) -> float:
        """How far interior samples of psi_plus(disc) stick out of the closed
        interior of psi_minus(circle); 0 when the open images are disjoint."""
        th = grid(max(self.N, 32))
        pts = (np.array([0.0, 0.3, 0.6, 0.85, 0.97])[:, None] * np.exp(1j * th)[None, :]).ravel()
        w = self.psi_plus.at(pts)
        outer = self.outer_curve()
        curve = outer.gamma.padded(4 * outer.N + 1).samples()
        inside = np.abs(winding_numbers(curve, w) - 1) < 0.5
        if np.all(inside):
            return 0.0
        return float(np.max(outer.min_distance(w[~inside])))

    def validate(self):
        failed = [(n, r) for n, ok, r in self.checks() if not ok]
        if failed:
            raise GeometryError("annulus invariants fail", stage="annulus",
                                failed=",".join(n for n, _ in failed))
        return self

    # serialization ---------------------------------------------------
    def to_dict(self) -> dict:
        a = [[float(v.real), float(v.imag)] for v in self.a]
        b = [[float(v.real), float(v.imag)] for v in self.b]
        return {"kind": "annulus", "N": self.N, "a": a, "b": b}

    @classmethod
    def from_dict(cls, d: dict) -> "NormalizedAnnulus":
        N = int(d["N"])
        a = np.array([complex(r[0], r[1]) for r in d.get("a", [])], dtype=complex)
        b = np.array([complex(r[0], r[1]) for r in d.get("b", [])], dtype=complex)
        if a.size > N + 1 or b.size > N:
            raise ValueError("more coefficients than the declared N")
        pp = FourierSeries.from_taylor(a, N)
        c = np.zeros(2 * N + 1, complex)
        c[N + 1] = 1
        c[N - 1 - np.arange(b.size)] = b
        return cls(FourierSeries(c, "exterior"), pp)


# ---------------------------------------------------------------------
# constructors

def from_diffeo(psi: CircleDiffeo, N: int | None = None, tol: float = 1e-8) -> NormalizedAnnulus:
    """The completely thin annulus of psi: outgoing boundary psi_minus on the
    circle, incoming boundary psi_minus o psi, so psi_plus = psi_minus o psi."""
    N = psi.N if N is None else N
    sol = weld(diffeo_invert(psi, N), N, tol)
    return NormalizedAnnulus(sol.f_minus, sol.f_plus, sol.residual,
                             {"weld": sol.info, "flagged": sol.flagged})


def from_univalent(f: FourierSeries, N: int | None = None, tol: float = 1e-12) -> NormalizedAnnulus:
    """The annulus between f(circle) and the unit circle."""
    N = f.N if N is None else N
    f = f.padded(N)
    if np.max(np.abs(f.coeffs[:N]), initial=0.0) > 1e-12:
        raise GeometryError("map has negative modes", stage="univalent")
    f, _ = project_interior(f)
    if interior_derivative_min(f) <= 1e-10:
        raise GeometryError("derivative vanishes in the disc", stage="univalent")
    curve = JordanCurve(f.with_kind("generic"))
    try:
        curve.validate()
    except GeometryError as exc:
        raise GeometryError("boundary curve is not a Jordan curve", stage="univalent") from exc
    m = 4 * N + 1
    rmax = float(np.max(np.abs(f.padded(2 * N).samples()))) if m else 0.0
    if rmax > 1 + tol:
        raise GeometryError("image leaves the unit disc", stage="univalent", max_modulus=rmax)
    return NormalizedAnnulus(FourierSeries.identity(N, "exterior"), f)


# ---------------------------------------------------------------------
# composition

def _newton(fn, dfn, targets, u, maxit=40):
    scale = max(1.0, float(np.max(np.abs(targets))))
    for _ in range(maxit):
        r = fn(u) - targets
        err = float(np.max(np.abs(r)))
        if err <= NEWTON_TOL * scale:
            return u, err
        u = u - r / dfn(u)
    return u, float(np.max(np.abs(fn(u) - targets)))


def invert_exterior(E: FourierSeries, source: FourierSeries, N: int, radii=None):
    """u_j with E(u_j) = source(e^{i theta_j}), continued in from large |z|."""
    radii = np.geomspace(4.0, 1.0, 13) if radii is None else radii
    z = np.exp(1j * grid(N))
    dE = E.z_derivative()
    u = None
    err = 0.0
    for R in radii:
        w = source.at(R * z)
        if u is None:
            u = (w - E[0]) / E[1]
        u, err = _newton(E.at, dE.at, w, u)
    if err > 1e-9 * max(1.0, float(np.max(np.abs(source.at(z))))):
        raise CompositionError("exterior inversion did not converge", stage="invert_exterior",
                               residual=err)
    return u


def invert_interior(F: FourierSeries, source: FourierSeries, N: int, steps=12):
    """v_j with F(v_j) = source(e^{i theta_j}), continued out from the origin."""
    z = np.exp(1j * grid(N))
    dF = F.z_derivative()
    v = np.zeros_like(z)
    err = 0.0
    for r in np.linspace(0, 1, steps + 1)[1:]:
        w = source.at(r * z)
        v, err = _newton(F.at, dF.at, w, v)
    if err > 1e-9 * max(1.0, float(np.max(np.abs(source.at(z))))):
        raise CompositionError("interior inversion did not converge", stage="invert_interior",
                               residual=err)
    return v


def _normalize_pair(pm_samples, pp_samples):
    pm = analyze(pm_samples)
    pp = analyze(pp_samples)
    c1, d0 = pm[1], pm[0]
    pm, lost_m = project_exterior((pm - d0) / c1)
    pp, lost_p = project_interior((pp - d0) / c1)
    return pm, pp, max(lost_m, lost_p)


def compose(A1: NormalizedAnnulus, A2: NormalizedAnnulus, N: int | None = None,
            tol: float = 1e-8, validate: bool = True) -> NormalizedAnnulus:
    """Glue the incoming boundary of A1 to the outgoing boundary of A2."""
    N = max(A1.N, A2.N) if N is None else N
    A1, A2 = A1.padded(N), A2.padded(N)
    g1 = JordanCurve(A1.psi_plus.with_kind("generic"))
    g2 = JordanCurve(A2.psi_minus.with_kind("generic"))
    try:
        ext = riemann_exterior_map(g1, N, anchor=A1.psi_plus[0])
        inn = riemann_interior_map(g2, A2.psi_plus[0], N)
    except GeometryError as exc:
        raise CompositionError(f"Riemann map failed: {exc}", stage="compose/riemann") from exc
    # phi = beta2 o beta1^{-1}, beta1 = E^{-1} o psi_plus^{A1}, beta2 = I^{-1} o psi_minus^{A2}
    beta1_inv = diffeo_invert(ext.correspondence, N)
    phi = CircleDiffeo(analyze(inn.correspondence(beta1_inv(grid(N))) - grid(N)))
    sol = weld(phi, N, tol)
    if sol.flagged and sol.residual > 1e3 * tol:
        raise CompositionError("welding residual too large", stage="compose/weld",
                               residual=sol.residual)
    try:
        h_minus = invert_exterior(ext.series, A1.psi_minus, N)
        h_plus = invert_interior(inn.series, A2.psi_plus, N)
    except CompositionError:
        raise
    pm, pp, lost = _normalize_pair(sol.f_minus.at(h_minus), sol.f_plus.at(h_plus))
    residual = max(sol.residual, lost, ext.residual, inn.residual, A1.residual, A2.residual)
    info = {"weld_residual": sol.residual, "weld_condition": sol.info["condition"],
            "riemann_residuals": (ext.residual, inn.residual), "discarded": lost}
    out = NormalizedAnnulus(pm, pp, residual, info)
    if validate:
        try:
            out.validate()
        except GeometryError as exc:
            raise CompositionError(f"composite fails invariants: {exc}",
                                   stage="compose/validate") from exc
    return out


# ---------------------------------------------------------------------
# dagger

def from_embedded(inner: FourierSeries, outer: FourierSeries, N: int | None = None,
                  tol: float = 1e-8) -> NormalizedAnnulus:
    """Normalized pair of the annulus between two parametrized curves in the
    plane (inner inside outer, both positively oriented)."""
    N = max(inner.N, outer.N) if N is None else N
    gin = JordanCurve(inner.padded(N))
    gout = JordanCurve(outer.padded(N))
    try:
        ext = riemann_exterior_map(gout, N, anchor=gin.interior_point())
        inn = riemann_interior_map(gin, gin.interior_point(), N)
    except GeometryError as exc:
        raise CompositionError(f"Riemann map failed: {exc}", stage="embed/riemann") from exc
    pm, pp, lost = _normalize_pair(ext.series.samples(), inn.series.samples())
    core = NormalizedAnnulus(pm, pp, max(lost, ext.residual, inn.residual))
    # outgoing boundary is E o beta_out, incoming is I o beta_in
    left = from_diffeo(diffeo_invert(ext.correspondence, N), N, tol)
    right = from_diffeo(inn.correspondence, N, tol)
    return compose(compose(left, core, N, tol), right, N, tol)


def dagger(A: NormalizedAnnulus, N: int | None = None, tol: float = 1e-8) -> NormalizedAnnulus:
    """The same annulus with the opposite complex structure.

    Realized by the anti-conformal inversion J(w) = 1/(conj(w) - conj(p)),
    p = psi_plus(0), which swaps the two boundaries; the image is then
    normalized."""
    N = A.N if N is None else N
    p = A.psi_plus[0]
    th = grid(N)
    new_inner = 1.0 / np.conj(A.psi_minus(th) - p)
    new_outer = 1.0 / np.conj(A.psi_plus(th) - p)
    try:
        return from_embedded(analyze(new_inner), analyze(new_outer), N, tol)
    except AnnuliError as exc:
        raise CompositionError(f"renormalization failed: {exc}", stage="dagger") from exc


# ---------------------------------------------------------------------
# action on discs

def disc_annulus(D: FourierSeries, N: int | None = None) -> NormalizedAnnulus:
    """Completely thin annulus whose outgoing map is z + sum a_n z^{-n}, with a_n
    the mode-n coefficients of D (n >= 1), and whose incoming map fills the
    inside of the same curve."""
    N = D.N if N is None else N
    D = D.padded(N)
    if abs(D[0]) > 1e-12 or np.max(np.abs(D.coeffs[:N]), initial=0.0) > 1e-12:
        raise GeometryError("disc data must only use modes n >= 1", stage="disc")
    c = np.zeros(2 * N + 1, complex)
    c[N + 1] = 1
    c[:N] = D.coeffs[N + 1:][::-1]
    E = FourierSeries(c, "exterior")
    curve = JordanCurve(E.with_kind("generic"))
    try:
        curve.validate()
    except GeometryError as exc:
        raise GeometryError(f"disc map is not univalent: {exc}", stage="disc") from exc
    try:
        I = riemann_interior_map(curve, curve.interior_point(), N).series
    except GeometryError as exc:
        raise GeometryError(f"filling map not resolved with N={N}: {exc}", stage="disc") from exc
    return NormalizedAnnulus(E, I)


def act_on_disc(A: NormalizedAnnulus, D: FourierSeries, N: int | None = None,
                tol: float = 1e-8) -> FourierSeries:
    """The disc obtained by gluing A onto the disc D, in the same coefficient
    form (mode n >= 1 holds the z^{-n} coefficient of the normalized map)."""
    N = max(A.N, D.N) if N is None else N
    B = disc_annulus(D, N)
    C = compose(A, B, N, tol)
    c = np.zeros(2 * N + 1, complex)
    c[N + 1:] = C.psi_minus.coeffs[:N][::-1]
    return FourierSeries(c, "interior")


# ---------------------------------------------------------------------
# Cauchy consistency

def boundary_integrals(A: NormalizedAnnulus, omega: FourierSeries, center: complex = 0j,
                       m: int | None = None):
    """(integral over the incoming boundary, integral over the outgoing
    boundary) of omega(w - center) dw, by the trapezoid rule."""
    m = 8 * A.N + 1 if m is None else m
    th = 2 * np.pi * np.arange(m) / m
    z = np.exp(1j * th)
    out = []
    for psi in (A.psi_plus, A.psi_minus):
        w = psi.at(z)
        dw = psi.z_derivative().at(z) * 1j * z
        out.append(complex(np.sum(omega.at(w - center) * dw) * 2 * np.pi / m))
    return out[0], out[1]


def cauchy_consistency(A: NormalizedAnnulus, omega: FourierSeries, center: complex = 0j,
                       m: int | None = None) -> float:
    """|integral over the incoming boundary - integral over the outgoing one|."""
    i_in, i_out = boundary_integrals(A, omega, center, m)
    return abs(i_in - i_out)
