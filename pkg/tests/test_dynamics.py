from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad, quad_vec
from scipy.linalg import expm

from quasispec.dynamics import (
    LatticeHamiltonian, MomentCurve, MomentEvaluator, build_box, delta_state, evolve_moment,
    evolve_state, kernel, moment_curve, transport_exponent,
)
from quasispec.errors import ContaminatedError, DomainError, PreconditionError
from quasispec.operator import Potential
from quasispec.symbolic.contfrac import GOLDEN


def free_box(N):
    return build_box(Potential.constant(0.0, -N, N), N)


def fib_box(N, lam=2.0):
    return build_box(Potential.circle_map(GOLDEN, GOLDEN, 0, lam, -N, N), N)


def test_three_site_eigenvalues():
    ev, _ = free_box(1).eigensystem
    assert np.allclose(ev, [-math.sqrt(2), 0, math.sqrt(2)])


def test_free_box_extreme_eigenvalues():
    N = 500
    ev, _ = free_box(N).eigensystem
    m = 2 * N + 1
    assert ev[-1] == pytest.approx(2 * math.cos(math.pi / (m + 1)), abs=1e-12)
    assert ev[0] == pytest.approx(-2 * math.cos(math.pi / (m + 1)), abs=1e-12)


def test_dense_matches_eigensystem():
    H = fib_box(20)
    ev, vecs = H.eigensystem
    assert np.allclose(H.to_dense() @ vecs, vecs * ev, atol=1e-12)


def test_state_checks():
    H = free_box(3)
    with pytest.raises(DomainError):
        MomentEvaluator(H, np.ones(3))
    with pytest.raises(PreconditionError):
        MomentEvaluator(H, 2 * delta_state(H))
    with pytest.raises(DomainError):
        build_box(Potential.constant(0.0, 0, 0), -1)


def test_kernel_against_quadrature():
    for om, T in [(0.0, 3.0), (0.7, 2.0), (-1.3, 10.0), (5.0, 0.1)]:
        re = quad(lambda t: math.cos(om * t), 0, T)[0] / T
        im = quad(lambda t: -math.sin(om * t), 0, T)[0] / T
        assert kernel(om, T) == pytest.approx(complex(re, im), abs=1e-12)


@given(st.floats(-50, 50), st.floats(0.01, 100))
def test_kernel_bounded(om, T):
    k = kernel(om, T)
    assert abs(k) <= 1 + 1e-12
    assert kernel(-om, T) == pytest.approx(np.conj(k), abs=1e-12)


def test_moment_p_zero_is_one():
    H = fib_box(30)
    ev = MomentEvaluator(H, delta_state(H))
    assert np.allclose(ev.moment(0.0, [0.5, 3.0, 20.0]), 1.0, atol=1e-12)


def test_small_time_limit():
    H = fib_box(30)
    psi = np.zeros(H.size, dtype=complex)
    psi[H.N + 3] = psi[H.N - 2] = 1 / math.sqrt(2)
    val = evolve_moment(H, psi, 1.5, 1e-6)
    assert val == pytest.approx(0.5 * 3 ** 1.5 + 0.5 * 2 ** 1.5, rel=1e-9)


def test_free_second_moment_exact():
    H = free_box(400)
    ev = MomentEvaluator(H, delta_state(H))
    T = np.array([1.0, 10.0, 50.0, 100.0])
    assert np.allclose(ev.moment(2.0, T), 2 * T ** 2 / 3, rtol=1e-10)


def test_moment_against_time_stepping():
    H = fib_box(25, 1.5)
    rng = np.random.default_rng(4)
    psi = rng.normal(size=H.size) + 1j * rng.normal(size=H.size)
    psi /= np.linalg.norm(psi)
    A = H.to_dense()
    w = np.abs(H.sites) ** 1.3
    T = 4.0
    integrand = lambda t: np.sum(w * np.abs(expm(-1j * A * t) @ psi) ** 2)
    ref = quad_vec(integrand, 0, T, epsabs=1e-12)[0] / T
    assert evolve_moment(H, psi, 1.3, T) == pytest.approx(ref, rel=1e-8)


def test_state_unitary_and_matches_expm():
    H = fib_box(15)
    psi0 = delta_state(H, 2)
    psi = evolve_state(H, psi0, 3.7)
    assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(psi, expm(-1j * H.to_dense() * 3.7) @ psi0, atol=1e-10)


@settings(max_examples=20)
@given(st.floats(0.2, 3.0), st.floats(0.5, 40.0))
def test_moment_power_means_increase(p, T):
    H = fib_box(60)
    ev = MomentEvaluator(H, delta_state(H))
    lo = ev.moment(p, T)[0] ** (1 / p)
    hi = ev.moment(2 * p, T)[0] ** (1 / (2 * p))
    assert lo <= hi * (1 + 1e-10)


def test_constant_shift_invariance():
    N = 40
    V = Potential.circle_map(GOLDEN, GOLDEN, 0, 2.0, -N, N)
    W = Potential(V.window(-N, N) + 3.5, -N)
    T = [1.0, 7.0, 20.0]
    a = MomentEvaluator(build_box(V, N), delta_state(build_box(V, N))).moment(1.0, T)
    b = MomentEvaluator(build_box(W, N), delta_state(build_box(W, N))).moment(1.0, T)
    assert np.allclose(a, b, rtol=1e-9)


def test_reflection_guard():
    H = free_box(20)
    ev = MomentEvaluator(H, delta_state(H))
    assert ev.edge_mass(0.1) < 1e-6
    t = ev.reflection_time(200.0)
    assert t is not None and t < 20
    curve = moment_curve(H, delta_state(H), 1.0, np.geomspace(1, 200, 12))
    assert curve.contaminated.any() and not curve.contaminated[0]
    with pytest.raises(ContaminatedError):
        transport_exponent(curve, min_decades=1.0)


def test_free_exponent_is_two():
    H = free_box(800)
    curve = moment_curve(H, delta_state(H), 2.0, np.geomspace(3, 300, 16))
    fit = transport_exponent(curve)
    assert fit.exponent == pytest.approx(2.0, abs=1e-6)
    assert fit.intercept == pytest.approx(math.log(2 / 3), abs=1e-5)


def test_exponent_preconditions():
    c = MomentCurve(1.0, np.array([1.0, 2.0]), np.array([1.0, 2.0]), 10)
    with pytest.raises(DomainError):
        transport_exponent(c)
    T = np.geomspace(1, 10, 10)
    with pytest.raises(DomainError):
        transport_exponent(MomentCurve(1.0, T, T, 10))
    js = MomentCurve(1.0, T, T, 10).to_json()
    assert len(js["samples"]) == 10 and js["samples"][0]["contaminated"] is False
