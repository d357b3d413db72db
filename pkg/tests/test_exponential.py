import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from annuli.annulus import NormalizedAnnulus, compose, from_diffeo
from annuli.errors import GeometryError, PathError
from annuli.exponential import (Framing, LiePath, beltrami, cauchy_reconstruct, concat,
                                exp_univ, make_sitting_instants, path_from_framing,
                                pullback_field_residual, smooth_step, time_derivative,
                                xholo_residual)
from annuli.fourier import FourierSeries, grid
from annuli.geometry import CircleDiffeo

from conftest import random_univ_path


def sl2_path(a, b, c, N, M):
    """Constant path whose vector field is Y = a + b z + c z^2."""
    modes = FourierSeries.from_modes({-1: -1j * a, 0: -1j * b, 1: -1j * c}, N).coeffs
    return LiePath.from_modes(np.tile(modes, (M + 1, 1)))


def mobius_flow(a, b, c, z, t):
    E = expm((1 - t) * np.array([[b / 2, a], [-c, -b / 2]]))
    return (E[0, 0] * z + E[0, 1]) / (E[1, 0] * z + E[1, 1])


# numerics helpers ---------------------------------------------------------

def test_time_derivative_fourth_order():
    errs = []
    for M in (20, 40):
        t = np.linspace(0, 1, M + 1)
        errs.append(np.max(np.abs(time_derivative(np.sin(3 * t)[None, :], 1 / M) - 3 * np.cos(3 * t))))
    assert 12 < errs[0] / errs[1] < 40


def test_smooth_step_profile():
    S, dS = smooth_step(np.array([0.0, 0.5, 1.0]))
    assert np.allclose(S, [0, 0.5, 1]) and dS[0] == 0 and dS[2] == 0


# paths ---------------------------------------------------------------------

def test_cone_enforced():
    with pytest.raises(PathError):
        LiePath.constant(-0.1j, 4, 8)


def test_path_serialization():
    X = random_univ_path(np.random.default_rng(0), 8, 10)
    Y = LiePath.from_dict(X.to_dict())
    assert np.array_equal(X.X, Y.X) and Y.t0 == X.t0


def test_modes_below_minus_one_rejected():
    X = LiePath.from_function(lambda th, t: 0.5j + 0.1 * np.exp(-3j * th) + 0 * t, 8, 10)
    with pytest.raises(PathError):
        exp_univ(X)


# exp_univ ------------------------------------------------------------------

@pytest.mark.parametrize("c", [0.1, 0.5, 1.0])
def test_exp_of_imaginary_constant_is_round(c):
    N, M = 32, 100
    A, fr = exp_univ(LiePath.constant(1j * c, N, M))
    assert A.distance(NormalizedAnnulus.round(np.exp(-c), N)) < 1e-7
    t = np.linspace(0, 1, M + 1)
    h = np.exp(1j * grid(N))[:, None] * np.exp(-c * (1 - t))[None, :]
    assert np.max(np.abs(fr.h - h)) < 1e-7


def test_exp_of_real_constant_is_thin_rotation():
    A, _ = exp_univ(LiePath.constant(0.7, 16, 50))
    assert A.distance(from_diffeo(CircleDiffeo.rotation(0.7, 16))) < 1e-8


def test_exp_matches_mobius_oracle():
    a, b, c = 0.1 + 0.05j, -0.4 + 0.3j, -0.08 + 0.02j
    N, M = 32, 100
    A, fr = exp_univ(sl2_path(a, b, c, N, M))
    z = np.exp(1j * grid(N))
    for k, t in enumerate(np.linspace(0, 1, M + 1)):
        assert np.max(np.abs(fr.h[:, k] - mobius_flow(a, b, c, z, t))) < 1e-6


def test_exp_framing_checks():
    A, fr = exp_univ(random_univ_path(np.random.default_rng(1), 32, 60))
    assert all(ok for _, ok, _ in fr.checks(slices=7))
    assert all(ok for _, ok, _ in A.checks())
    assert np.max(np.abs(fr.h[:, -1] - np.exp(1j * grid(32)))) == 0


# path_from_framing ------------------------------------------------------

def test_radial_framing_recovers_constant():
    q = 0.6
    errs = [np.max(np.abs(path_from_framing(Framing.radial(q, 16, M)).X - 1j * np.log(1 / q)))
            for M in (40, 80)]
    assert errs[1] < 1e-9 and errs[0] / errs[1] > 12


def test_constant_framing_gives_zero_path():
    h = np.tile(np.exp(1j * grid(8))[:, None], (1, 11))
    assert np.max(np.abs(path_from_framing(Framing(h)).X)) < 1e-14


def test_round_trip_fourth_order():
    rng = np.random.default_rng(2)
    fn = lambda th, t: (0.4j * (1 + 0.5 * np.sin(2 * np.pi * t)) + 0.05j * np.exp(-1j * th) * np.cos(3 * t)
                        + 0.1 * np.exp(1j * th) * (1 + t) + 0.05 * np.exp(2j * th) * np.sin(t))
    errs = []
    for M in (40, 80):
        X = LiePath.from_function(fn, 16, M)
        _, fr = exp_univ(X)
        errs.append(np.max(np.abs(path_from_framing(fr).X - X.X)))
    assert 3.7 < np.log2(errs[0] / errs[1]) < 4.3


# X-holomorphy ---------------------------------------------------------------

def test_xholo_framing_and_square():
    rng = np.random.default_rng(3)
    base = random_univ_path(rng, 16, 160)
    res = []
    for step in (4, 2):
        X = LiePath(base.X[:, ::step])
        _, fr = exp_univ(X)
        res.append((xholo_residual(fr.h, X), xholo_residual(fr.h ** 2, X)))
    for coarse, fine in zip(*res):
        assert fine < 1e-6 and 12 < coarse / fine < 20


def test_xholo_counterexample():
    c = 0.3
    X = LiePath.constant(1j * c, 8, 10)
    f = np.tile(np.exp(1j * grid(8))[:, None], (1, 11))
    assert xholo_residual(f, X) == pytest.approx(c)


def test_beltrami_examples():
    assert np.max(np.abs(beltrami(LiePath.constant(1j, 4, 4)))) < 1e-15
    assert np.allclose(beltrami(LiePath.constant(0, 4, 4)), -1)
    assert np.allclose(beltrami(LiePath.constant(1, 4, 4)), -1j)


@settings(max_examples=50, deadline=None)
@given(st.floats(-50, 50), st.floats(0, 50))
def test_beltrami_in_closed_disc(x, y):
    mu = beltrami(np.array([[complex(x, y)]]))
    assert abs(mu[0, 0]) <= 1 + 1e-12 and abs(mu[0, 0] - 1) > 0


# Cauchy formula --------------------------------------------------------------

def test_cauchy_reconstruct_examples():
    q = 0.5
    fr = Framing.radial(q, 64, 20)
    z = 0.5 * (1 + q) * np.exp(0.3j)
    assert cauchy_reconstruct(fr, lambda w: 1 + 0 * w, lambda w: 1 + 0 * w, z) == pytest.approx(1, abs=1e-12)
    assert cauchy_reconstruct(fr, lambda w: w, lambda w: w, z) == pytest.approx(z, abs=1e-12)
    # 1/w is holomorphic on the annulus, so it is reproduced as well
    assert cauchy_reconstruct(fr, lambda w: 1 / w, lambda w: 1 / w, z) == pytest.approx(1 / z, abs=1e-12)


def test_cauchy_reconstruct_rejects_outside_points():
    fr = Framing.radial(0.5, 16, 10)
    with pytest.raises(GeometryError):
        cauchy_reconstruct(fr, np.ones(33), np.ones(33), 0.1)


def test_cauchy_reconstruct_on_exponential_annulus():
    X = random_univ_path(np.random.default_rng(4), 64, 40, amp=0.8)
    A, fr = exp_univ(X)
    g = lambda w: np.exp(w) + 1 / (w - A.psi_plus[0])
    z = 0.5 * (A.psi_plus(1.0) + A.psi_minus(1.0))
    assert abs(cauchy_reconstruct(fr, g, g, z) - g(z)) < 1e-8


# sitting instants and concatenation -------------------------------------------

def test_sitting_instants_of_zero_path():
    Z = make_sitting_instants(LiePath.constant(0, 8, 40))
    assert np.max(np.abs(Z.X)) == 0


def test_sitting_instants_zero_near_ends():
    X = make_sitting_instants(LiePath.constant(0.5j, 8, 200))
    t = X.times
    ends = (t <= 0.05) | (t >= 0.95)
    assert np.max(np.abs(X.X[:, ends])) == 0
    assert X.has_sitting_instants()


def test_sitting_instants_preserve_exponential():
    c = 0.5
    A, _ = exp_univ(make_sitting_instants(LiePath.constant(1j * c, 16, 400)))
    assert A.distance(NormalizedAnnulus.round(np.exp(-c), 16)) < 1e-7


def test_concat_with_zero_path():
    X = make_sitting_instants(random_univ_path(np.random.default_rng(5), 16, 100))
    Z = LiePath.constant(0, 16, 100)
    A, _ = exp_univ(X)
    assert exp_univ(concat(Z, X))[0].distance(A) < 1e-7
    assert exp_univ(concat(X, Z))[0].distance(A) < 1e-7


def test_concat_round_paths():
    c = 0.3
    X = make_sitting_instants(LiePath.constant(1j * c, 16, 400))
    A, _ = exp_univ(concat(X, X))
    assert A.distance(NormalizedAnnulus.round(np.exp(-2 * c), 16)) < 1e-7


def test_concat_requires_sitting_instants():
    X = LiePath.constant(0.2j, 8, 10)
    with pytest.raises(PathError):
        concat(X, X)


def test_exp_is_homomorphism():
    rng = np.random.default_rng(6)
    X1 = make_sitting_instants(random_univ_path(rng, 32, 100))
    X2 = make_sitting_instants(random_univ_path(rng, 32, 100))
    lhs = exp_univ(concat(X1, X2))[0]
    rhs = compose(exp_univ(X1)[0], exp_univ(X2)[0])
    assert lhs.distance(rhs) < 1e-6


# pullback of vector fields --------------------------------------------------------

def test_pullback_euler_field_on_round_annulus():
    fr = Framing.radial(0.5, 16, 40)
    res, f = pullback_field_residual(fr, FourierSeries.from_modes({1: 1}, 2), return_field=True)
    assert np.max(np.abs(f + 1j)) < 1e-12 and res < 1e-10


def test_pullback_zero_field():
    assert pullback_field_residual(Framing.radial(0.5, 8, 10), FourierSeries.zeros(2)) == 0


def test_pullback_random_field_converges():
    rng = np.random.default_rng(7)
    v = FourierSeries.from_modes({n: 0.3 * complex(*rng.normal(size=2)) for n in range(-2, 3)}, 2)
    res = [pullback_field_residual(Framing.radial(0.7, 24, M), v) for M in (20, 40)]
    assert res[1] < 1e-6 and res[0] / res[1] > 12
