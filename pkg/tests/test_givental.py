from __future__ import annotations

import cmath
import math

import numpy as np
import pytest
from scipy.integrate import dblquad
from scipy.special import kv

from qwhittaker.givental import (
    NonConvergenceError,
    QuadratureConfig,
    classical_eigencheck,
    givental_kernel,
    whittaker_classical,
)

from oracles import bessel_gl2, mp_bessel_integral

BESSEL = 0.22778774549906683  # 2 K_0(2), frozen from the mpmath oracle below


def test_frozen_bessel_constant():
    assert float(mp_bessel_integral()) == pytest.approx(BESSEL, rel=1e-15)
    assert 2 * kv(0, 2) == pytest.approx(BESSEL, rel=1e-14)


def test_kernel_examples():
    assert givental_kernel((0, 0), (0,), 0.0) == pytest.approx(math.exp(-2))
    for a in (-1.5, 0.0, 2.0):
        assert givental_kernel((a, a), (a,), 0.0) == pytest.approx(math.exp(-2))
    assert givental_kernel((0.7,), (), 1.3) == pytest.approx(cmath.exp(1.3j * 0.7))
    k = givental_kernel((0.3, -0.1, 0.5), (0.2, 0.0), 0.0)
    assert k.imag == 0 and k.real > 0
    with pytest.raises(ValueError):
        givental_kernel((0, 0), (0, 0), 0.0)


def test_rank1_is_a_plane_wave():
    v = whittaker_classical((0.4,), (2.5,))
    assert v.value == cmath.exp(1j * 2.5 * 0.4)
    assert v.error == 0


@pytest.mark.parametrize(
    "x,lam",
    [((0.0, 0.0), (0.0, 0.0)), ((0.4, -0.1), (1.0, -1.0)), ((-1.0, 1.5), (0.3, 0.8)), ((2.0, -2.0), (0.0, 0.5))],
)
def test_gl2_matches_bessel_closed_form(x, lam):
    got = whittaker_classical(x, lam).value
    want = bessel_gl2(*x, *lam)
    assert abs(got - want) <= 1e-10 * abs(want)


def test_gl2_diagonal_translation():
    for a in (0.0, 1.0, -2.3):
        assert whittaker_classical((a, a), (0.0, 0.0)).value.real == pytest.approx(BESSEL, rel=1e-12)


@pytest.mark.parametrize("x", [(0.4, 0.0, -0.4), (0.5, 0.0, -0.5), (1.0, -0.5, 0.2)])
def test_gl3_matches_adaptive_quadrature_of_bessel_kernel(x):
    """lambda = 0: integrate Q(x, y) * 2 K_0(2 e^{(y2-y1)/2}) with scipy's adaptive rule."""

    def f(y2, y1):
        pot = np.exp(y1 - x[0]) + np.exp(x[1] - y1) + np.exp(y2 - x[1]) + np.exp(x[2] - y2)
        return np.exp(-pot) * 2 * kv(0, 2 * np.exp((y2 - y1) / 2))

    want, _ = dblquad(f, -15, 15, -15, 15, epsabs=1e-13, epsrel=1e-12)
    got = whittaker_classical(x, (0.0, 0.0, 0.0)).value
    assert abs(got - want) <= 1e-9 * abs(want)


def test_translation_covariance_rank3_and_rank4():
    for x, lam in [((0.5, 0.0, -0.5), (0.4, -0.2, 0.1)), ((0.3, 0.1, -0.1, -0.3), (0.2, 0.1, -0.1, 0.3))]:
        a = 0.8
        base = whittaker_classical(x, lam).value
        moved = whittaker_classical(tuple(v + a for v in x), lam).value
        assert abs(moved - cmath.exp(1j * a * sum(lam)) * base) <= 1e-10 * abs(base)


def test_rank4_is_an_eigenfunction():
    x, lam = (0.3, 0.1, -0.1, -0.3), (0.5, 0.2, 0.0, -0.5)
    r = [classical_eigencheck(x, lam, h=h) for h in (0.1, 0.05)]
    assert r[1].h2_residual < 1e-3
    assert math.log2(r[0].h2_residual / r[1].h2_residual) == pytest.approx(2.0, abs=0.2)
    assert math.log2(r[0].h1_residual / r[1].h1_residual) == pytest.approx(2.0, abs=0.2)


def test_rank4_default_grid_is_converged():
    x, lam = (0.3, 0.1, -0.1, -0.3), (0.5, 0.0, 0.0, -0.5)
    fine = whittaker_classical(x, lam, QuadratureConfig(nodes_per_axis=241)).value
    default = whittaker_classical(x, lam)
    assert abs(default.value - fine) <= 1e-12 * abs(fine)
    assert default.error < 1e-10 * abs(fine)


def test_error_estimate_shrinks_with_more_nodes():
    for x, lam in [((0.4, -0.1), (1.0, -1.0)), ((0.5, 0.0, -0.5), (0.3, 0.0, -0.3))]:
        errs = [whittaker_classical(x, lam, QuadratureConfig(nodes_per_axis=n), check=False).error for n in (17, 33, 65)]
        assert errs[0] > errs[1] > errs[2] or errs[2] < 1e-14


def test_nonconvergence_is_reported():
    with pytest.raises(NonConvergenceError):
        whittaker_classical((0.4, -0.1), (1.0, -1.0), QuadratureConfig(nodes_per_axis=9))


def test_input_validation():
    with pytest.raises(ValueError):
        whittaker_classical((0.0, 0.0), (1j, 0.0))
    with pytest.raises(ValueError):
        whittaker_classical((0.0, 0.0), (0.0,))
    with pytest.raises(ValueError):
        whittaker_classical((0.0,) * 5, (0.0,) * 5)
    with pytest.raises(ValueError):
        QuadratureConfig(half_width=-1)
    with pytest.raises(ValueError):
        QuadratureConfig(scheme="simpson")


def test_rank1_eigencheck_closed_form():
    lam, h = 1.7, 0.01
    r = classical_eigencheck((0.3,), (lam,), h=h)
    # central differences of e^{i lam x} are exact multiples of it
    assert r.h1_residual == pytest.approx(lam - math.sin(lam * h) / h, rel=1e-6)
    assert r.h2_residual == pytest.approx(lam**2 / 2 - (1 - math.cos(lam * h)) / h**2, rel=1e-6)


def test_gl2_eigencheck_at_the_origin():
    r = classical_eigencheck((0.0, 0.0), (0.0, 0.0), h=0.05)
    assert r.h1_residual < 1e-12  # psi depends on x1 - x2 only
    assert r.h2_residual < 1e-3


def test_gl2_h1_vanishes_when_lambdas_sum_to_zero():
    r = classical_eigencheck((0.4, -0.1), (1.0, -1.0), h=0.05)
    assert r.h1_residual < 1e-10


def test_eigencheck_refuses_tiny_psi():
    with pytest.raises(ValueError):
        classical_eigencheck((-6.0, 6.0), (0.0, 0.0))
