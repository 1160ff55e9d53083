from __future__ import annotations

import cmath
import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qwhittaker.scaling import (
    CONSTANT,
    GAUSSIAN,
    DominanceWarning,
    ScalingContext,
    A_epsilon,
    eta_modular_residual,
    f_alpha,
    f_alpha_residual,
    hamiltonian_limit_residual,
    limit_scan,
    m_epsilon,
    scaled_psi,
)

from oracles import mp_euler, mp_log_qfact


def test_m_epsilon_examples():
    assert m_epsilon(1.0) == 0
    assert m_epsilon(0.1) == 24
    assert m_epsilon(math.exp(-1)) == 3
    assert m_epsilon(0.1, "trunc") == 23
    for bad in (0.0, -0.5, math.inf):
        with pytest.raises(ValueError):
            m_epsilon(bad)
    with pytest.raises(ValueError):
        m_epsilon(0.1, "round")


def test_m_epsilon_against_high_precision():
    for eps in (0.5, 0.2, 0.1, 0.05, 0.025, 0.02):
        with mpmath.workdps(40):
            want = -int(mpmath.floor(mpmath.log(mpmath.mpf(eps)) / mpmath.mpf(eps)))
        assert m_epsilon(eps) == want


def test_A_epsilon_examples():
    assert A_epsilon(2 * math.pi) == pytest.approx(-math.pi / 12, rel=1e-15)
    assert A_epsilon(1.0) == pytest.approx(-0.7259955336435537, rel=1e-15)
    assert A_epsilon(1.0) == pytest.approx(-1.6449341 + 0.9189385, abs=1e-7)
    # halving eps adds -pi^2/(6 eps) plus a constant
    for eps in (0.1, 0.01):
        assert A_epsilon(eps / 2) - A_epsilon(eps) == pytest.approx(-math.pi**2 / (6 * eps) + 0.5 * math.log(2), rel=1e-13)
    with pytest.raises(ValueError):
        A_epsilon(0.0)


@pytest.mark.parametrize("eps", [0.5, 1.0, 2.0, 4.0, 2 * math.pi, 8.0, 10.0])
def test_eta_modular_residual_small(eps):
    assert eta_modular_residual(eps) < 1e-12


def test_eta_self_dual_point():
    assert eta_modular_residual(2 * math.pi) < 1e-15


def test_eta_identity_against_mpmath():
    # the two sides of the identity separately, at 40 digits
    for eps in (1.0, 4.0):
        with mpmath.workdps(40):
            e = mpmath.mpf(eps)
            rhs = mpmath.sqrt(2 * mpmath.pi / e) * mpmath.exp(-mpmath.pi**2 / (6 * e) + e / 24) * mp_euler(4 * mpmath.pi**2 / e)
            assert abs(rhs / mp_euler(eps) - 1) < mpmath.mpf(10) ** -30


def test_f_alpha_matches_direct_summation():
    for y, eps, alpha in [(0.0, 0.1, 1), (1.0, 0.05, 2), (-1.0, 0.025, 1)]:
        n = math.floor(y / eps + alpha * m_epsilon(eps) + 0.5)
        assert f_alpha(y, eps, alpha) == pytest.approx(float(mp_log_qfact(n, eps)), abs=1e-12)


def test_f_alpha_examples():
    assert f_alpha_residual(0.0, 0.05, 1) < f_alpha_residual(0.0, 0.1, 1)
    r2 = [f_alpha_residual(1.0, e, 2) for e in (0.1, 0.05, 0.025)]
    assert r2[0] > r2[1] > r2[2]
    far = f_alpha_residual(20.0, 0.1, 1)
    assert far == pytest.approx(abs(f_alpha(20.0, 0.1, 1) - A_epsilon(0.1)), abs=1e-8)
    with pytest.raises(ValueError):
        f_alpha(-10.0, 0.1, 1)
    with pytest.raises(ValueError):
        f_alpha(0.0, 0.1, 3)


def test_f1_residual_tracks_the_next_order_term():
    """ln f_1 - A - e^{-y} = eps (1/24 - e^{-y} (theta + 1/2 + s) + e^{-2y}/4) + O(eps^2).

    theta = frac(ln(eps)/eps) and s is the rounding shift of the q-factorial
    argument.  The O(eps) coefficient oscillates with eps through theta + s.
    """
    for y in (-1.0, 0.0, 1.0):
        for eps in (0.1, 0.05, 0.025, 0.02, 0.01, 0.005):
            t = math.log(eps) / eps
            theta = t - math.floor(t)
            m = m_epsilon(eps)
            s = math.floor(y / eps + m + 0.5) - (y / eps + m)
            predicted = eps * (1 / 24 - math.exp(-y) * (theta + 0.5 + s) + math.exp(-2 * y) / 4)
            signed = f_alpha(y, eps, 1) - A_epsilon(eps) - math.exp(-y)
            assert abs(signed - predicted) < 0.6 * eps**2


@settings(max_examples=80, deadline=None)
@given(
    st.lists(st.floats(-3, 3, allow_nan=False), min_size=1, max_size=4),
    st.sampled_from([0.2, 0.1, 0.05, 0.025, 0.3]),
)
def test_quantization_is_idempotent(x, eps):
    ctx = ScalingContext(eps, len(x))
    qp = ctx.quantize(x)
    assert ctx.quantize(qp.effective).p == qp.p
    assert all(abs(a - b) <= eps / 2 + 1e-12 for a, b in zip(qp.effective, x))
    assert ctx.x_of(qp.p) == qp.effective


def test_scaled_psi_rank1_is_a_plane_wave():
    for eps in (0.2, 0.05):
        sv = scaled_psi((0.37,), (1.3,), eps)
        assert sv.value == pytest.approx(cmath.exp(1j * 1.3 * sv.point.effective[0]), rel=1e-12)


def test_scaled_psi_warns_off_the_dominant_cone():
    with pytest.warns(DominanceWarning):
        sv = scaled_psi((-5.0, 5.0), (0.0, 0.0), 0.2)
    assert sv.value == 0


def test_scaled_psi_gl2_approaches_bessel_value():
    vals = [scaled_psi((0.0, 0.0), (0.0, 0.0), e).value for e in (0.2, 0.1, 0.05)]
    errs = [abs(v - 0.22778774549906683) for v in vals]
    assert errs[0] > errs[1] > errs[2]


def test_scaled_psi_against_mpmath_pattern_sum():
    """Independent check of the prefactor and quantization at gl(2)."""
    eps, x, lam = 0.2, (0.3, -0.1), (0.5, -0.2)
    sv = scaled_psi(x, lam, eps)
    p1, p2 = sv.point.p
    with mpmath.workdps(40):
        e = mpmath.mpf(eps)
        q = mpmath.exp(-e)
        z1, z2 = mpmath.exp(1j * e * lam[0]), mpmath.exp(1j * e * lam[1])

        def qf(n):
            return mpmath.qp(q, q, n)

        s = mpmath.fsum(z1**k * z2 ** (p1 + p2 - k) / (qf(p1 - k) * qf(k - p2)) for k in range(p2, p1 + 1))
        A = -mpmath.pi**2 / (6 * e) - mpmath.log(e / (2 * mpmath.pi)) / 2
        want = complex(e * mpmath.exp(2 * A) * s)
    assert abs(sv.value - want) <= 1e-11 * abs(want)


def test_limit_scan_gl1_is_exact():
    for row in limit_scan((0.3,), (0.7,), [0.2, 0.1, 0.05]):
        assert row.abs_err < 1e-14


def test_limit_scan_rows_are_ordered_and_thread_independent():
    a = limit_scan((0.0, 0.0), (0.0, 0.0), [0.2, 0.1, 0.05], threads=1)
    b = limit_scan((0.0, 0.0), (0.0, 0.0), [0.2, 0.1, 0.05], threads=3)
    assert a == b
    assert [r.eps for r in a] == [0.2, 0.1, 0.05]
    with pytest.raises(ValueError):
        limit_scan((0.0, 0.0), (0.0, 0.0), [0.1, 0.2])


def test_hamiltonian_residuals_rank1_forward_difference():
    x = 0.2
    for eps in (0.1, 0.05):
        r = hamiltonian_limit_residual(eps, (x,))
        xe = r.effective_x[0]
        g = GAUSSIAN.value
        want = abs((g(np.array([xe + eps])) - g(np.array([xe]))) / eps - GAUSSIAN.gradient_sum(np.array([xe])))
        assert r.residual1 == pytest.approx(want, rel=1e-12)
        assert r.residual2 is None


def test_hamiltonian_residual_constant_function_closed_form():
    # H_1 1 - 2 = X_1 - 1 = -q^{p1-p2+1}, and eps*m = -ln(eps) + eps*theta with theta in [0, 1),
    # so residual1 = eps e^{x2-x1} e^{-eps (1 + 2 theta)} exactly
    for eps in (0.1, 0.05, 0.025):
        r = hamiltonian_limit_residual(eps, (0.3, -0.2), CONSTANT)
        p = ScalingContext(eps, 2).quantize((0.3, -0.2)).p
        assert r.residual1 == pytest.approx(math.exp(-eps * (p[0] - p[1] + 1)) / eps, rel=1e-12)
        theta = m_epsilon(eps) + math.log(eps) / eps
        assert 0 <= theta < 1
        x1, x2 = r.effective_x
        assert r.residual1 == pytest.approx(eps * math.exp(x2 - x1) * math.exp(-eps * (1 + 2 * theta)), rel=1e-9)


def test_hamiltonian_residuals_decrease():
    for x in [(0.3, -0.2), (0.3, 0.1, -0.2)]:
        rs = [hamiltonian_limit_residual(e, x) for e in (0.1, 0.05, 0.025)]
        r1 = [r.residual1 for r in rs]
        r2 = [r.residual2 for r in rs]
        assert r1[0] > r1[1] > r1[2]
        assert r2[0] > r2[1] > r2[2]
