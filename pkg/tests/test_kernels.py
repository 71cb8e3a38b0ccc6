import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from psido_lab import BACKEND, _backend, _kernels_py

BACKENDS = _backend.available()


def test_default_backend_is_reported():
    assert BACKEND in BACKENDS
    assert _backend.get() is _backend.get(BACKEND)


@pytest.mark.parametrize("name", BACKENDS)
def test_bilinear_and_phase_sums(name):
    k = _backend.get(name)
    rng = np.random.default_rng(0)
    P, Q = rng.normal(size=(5, 2)), rng.normal(size=(7, 2))
    amp = rng.normal(size=(5, 7)) + 1j * rng.normal(size=(5, 7))
    v = rng.normal(size=7) + 1j * rng.normal(size=7)
    want = np.array([sum(np.exp(-1j * P[r] @ Q[c]) * amp[r, c] * v[c] for c in range(7)) for r in range(5)])
    assert np.allclose(k.bilinear_sum(P, Q, -1.0, amp, v), want, atol=1e-13)
    ph = rng.normal(size=(5, 7))
    want = np.array([sum(np.exp(1j * ph[r, c]) * amp[r, c] * v[c] for c in range(7)) for r in range(5)])
    assert np.allclose(k.phase_sum(ph, amp, v), want, atol=1e-13)
    # read-only and broadcast inputs are accepted
    ro = np.broadcast_to(amp[:1], (5, 7))
    assert np.allclose(k.bilinear_sum(P, Q, 1.0, ro, v), _kernels_py.bilinear_sum(P, Q, 1.0, ro, v))


@pytest.mark.parametrize("name", BACKENDS)
def test_min_mean_deviation_real_rows_use_the_median(name):
    k = _backend.get(name)
    rows = np.array([[1.0, 2.0, 10.0, -4.0], [0.0, 0.0, 0.0, 0.0], [5.0, 5.0, 5.0, 6.0]])
    want = [np.min([np.mean(np.abs(r - c)) for c in r]) for r in rows]
    assert np.allclose(k.min_mean_deviation(rows.astype(complex)), want, atol=1e-15)


@pytest.mark.parametrize("name", BACKENDS)
def test_min_mean_deviation_triangle(name):
    # equilateral triangle: the geometric median is the centroid
    z = np.exp(2j * np.pi * np.arange(3) / 3)[None, :]
    assert _backend.get(name).min_mean_deviation(z)[0] == pytest.approx(1.0, abs=1e-12)
    # one point carrying most of the mass is itself the minimiser
    z = np.array([[0, 0, 0, 0, 1, 1j, -1]], dtype=complex)
    assert _backend.get(name).min_mean_deviation(z)[0] == pytest.approx(3 / 7, abs=1e-12)


@pytest.mark.skipif("cython" not in BACKENDS, reason="compiled kernels not built")
@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 9), st.integers(1, 40))
def test_backends_agree(seed, R, m):
    rng = np.random.default_rng(seed)
    rows = rng.normal(size=(R, m)) + 1j * rng.normal(size=(R, m)) * rng.integers(0, 2)
    a = _backend.get("cython").min_mean_deviation(rows)
    b = _backend.get("python").min_mean_deviation(rows)
    assert np.allclose(a, b, rtol=1e-9, atol=1e-12)
