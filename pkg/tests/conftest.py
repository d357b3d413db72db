import warnings

import numpy as np
import pytest

from annuli import CircleDiffeo, FourierSeries, LiePath, grid
from annuli.errors import UnderResolvedWarning


@pytest.fixture(autouse=True)
def _quiet_resolution_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UnderResolvedWarning)
        yield


def random_diffeo(rng, N, amp=0.2, modes=3):
    """phi = id + p with a few decaying real modes, scaled to sup |p| = amp."""
    c = {}
    for k in range(1, modes + 1):
        c[k] = complex(*rng.normal(size=2)) / k ** 2
        c[-k] = np.conj(c[k])
    p = FourierSeries.from_modes(c, N)
    p = p * (amp / np.max(np.abs(p.samples())))
    # keep phi' away from zero so the inverse stays well resolved
    while np.min(1 + p.derivative().samples().real) < 0.5:
        p = p * 0.8
    return CircleDiffeo(p)


def random_taylor(rng, q, eps, count=4):
    """q z + small higher terms; univalent for eps * count << q."""
    a = np.zeros(count + 2, complex)
    a[1] = q
    a[2:] = eps * (rng.normal(size=count) + 1j * rng.normal(size=count)) / np.arange(2, count + 2) ** 2
    return a


def random_univ_path(rng, N, M, amp=0.5):
    """A path in the inward cone with modes -1..3: X = i b(t) + small modes."""
    c = rng.normal(size=(5, 3)) + 1j * rng.normal(size=(5, 3))
    th, t = grid(N)[:, None], np.linspace(0, 1, M + 1)[None, :]
    X0 = 0
    for i, n in enumerate(range(-1, 4)):
        cn = (c[i, 0] + c[i, 1] * np.sin(2 * np.pi * t + c[i, 2].real)) * 0.04 / (1 + abs(n))
        X0 = X0 + cn * np.exp(1j * n * th)
    base = np.max(np.abs(X0))
    X = X0 + 1j * base * (1 + 0.3 * np.cos(t))
    X = np.broadcast_to(X, (2 * N + 1, M + 1))
    path = LiePath(np.array(X))
    return LiePath(path.X * (amp / path.sup_norm()))


# acceptance bookkeeping: one line per criterion in the terminal summary
ACCEPTANCE: dict = {}
_SESSION: dict = {}


def record(criterion: int, passed: bool, detail: str):
    ACCEPTANCE[criterion] = (bool(passed), detail)
    print(f"criterion {criterion}: {'PASS' if passed else 'FAIL'} {detail}")


def pytest_sessionstart(session):
    import time
    _SESSION["start"] = time.perf_counter()


def pytest_terminal_summary(terminalreporter):
    import time
    if not ACCEPTANCE:
        return
    elapsed = time.perf_counter() - _SESSION.get("start", time.perf_counter())
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        tr.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    tr.write_line(f"suite wall time: {elapsed:.1f} s ({'PASS' if elapsed < 600 else 'FAIL'} < 600 s)")
