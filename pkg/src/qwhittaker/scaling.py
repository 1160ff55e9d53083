"""The q -> 1 limit: parametrisation, asymptotics, Hamiltonian expansions and convergence scans.

With ``q = e^{-eps}`` and ``m = m(eps)`` the lattice point is
``p_k = (l + 2 - 2k) m + x_k / eps`` and the rescaled q-Whittaker function
``eps^{l(l+1)/2} e^{l(l+3)/2 A(eps)} Psi_{e^{i eps lambda}}(p)`` tends to the
classical ``psi_lambda(x)`` as ``eps -> 0``.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .givental import QuadratureConfig, whittaker_classical
from .patterns import is_weakly_decreasing
from .qarith import LogComplex, q_factorial_log
from .qpsi import SpectralParams, psi_recursive
from .qtoda import HamiltonianSpec, LatticeFunction, apply_hamiltonian

M_CONVENTIONS = ("floor", "trunc")


class DominanceWarning(UserWarning):
    """The quantized lattice point lies outside the dominant cone."""


def _positive(eps: float) -> float:
    eps = float(eps)
    if not eps > 0 or not math.isfinite(eps):
        raise ValueError(f"eps must be a positive real, got {eps}")
    return eps


def m_epsilon(eps: float, convention: str = "floor") -> int:
    """``m(eps) = -[ln(eps) / eps]`` with ``[.]`` the floor (or truncation toward zero)."""
    eps = _positive(eps)
    t = math.log(eps) / eps
    if convention == "floor":
        return -math.floor(t)
    if convention == "trunc":
        return -math.trunc(t)
    raise ValueError(f"unknown integer-part convention {convention!r}")


def A_epsilon(eps: float) -> float:
    """``A(eps) = -pi^2 / (6 eps) - ln(eps / 2 pi) / 2``."""
    eps = _positive(eps)
    return -math.pi**2 / (6 * eps) - 0.5 * math.log(eps / (2 * math.pi))


@dataclass(frozen=True)
class ScalingContext:
    eps: float
    rank: int
    convention: str = "floor"

    def __post_init__(self):
        _positive(self.eps)
        if self.rank < 1:
            raise ValueError("rank must be at least 1")

    @property
    def q(self) -> float:
        return math.exp(-self.eps)

    @property
    def m(self) -> int:
        return m_epsilon(self.eps, self.convention)

    @property
    def A(self) -> float:
        return A_epsilon(self.eps)

    def offsets(self) -> tuple[int, ...]:
        """``(l + 2 - 2k) m`` for ``k = 1..l+1``."""
        l = self.rank - 1
        return tuple((l + 2 - 2 * k) * self.m for k in range(1, self.rank + 1))

    def quantize(self, x: Sequence[float]) -> QuantizedPoint:
        if len(x) != self.rank:
            raise ValueError(f"expected {self.rank} coordinates, got {len(x)}")
        off = self.offsets()
        # half-up rounding so ties do not depend on parity
        p = tuple(o + math.floor(xk / self.eps + 0.5) for o, xk in zip(off, x))
        eff = tuple(self.eps * (pk - o) for pk, o in zip(p, off))
        return QuantizedPoint(tuple(float(v) for v in x), p, eff)

    def x_of(self, p: Sequence[int]) -> tuple[float, ...]:
        return tuple(self.eps * (pk - o) for pk, o in zip(p, self.offsets()))


@dataclass(frozen=True)
class QuantizedPoint:
    requested: tuple[float, ...]
    p: tuple[int, ...]
    effective: tuple[float, ...]


# ---------------------------------------------------------------------------
# q-factorial asymptotics and modularity
# ---------------------------------------------------------------------------


def f_alpha(y: float, eps: float, alpha: int, convention: str = "floor") -> float:
    """``ln (y/eps + alpha m(eps))_q!`` with the argument rounded to an integer."""
    if alpha not in (1, 2):
        raise ValueError("alpha must be 1 or 2")
    eps = _positive(eps)
    n = math.floor(y / eps + alpha * m_epsilon(eps, convention) + 0.5)
    if n < 0:
        raise ValueError(f"q-factorial argument {n} is negative at y={y}, eps={eps}")
    return q_factorial_log(n, eps)


def f_alpha_residual(y: float, eps: float, alpha: int, convention: str = "floor") -> float:
    """``|ln f_1 - A - e^{-y}|`` for ``alpha = 1``; ``|ln f_2 - A|`` for ``alpha = 2``."""
    target = A_epsilon(eps) + (math.exp(-y) if alpha == 1 else 0.0)
    return abs(f_alpha(y, eps, alpha, convention) - target)


def _log_euler(t: float) -> float:
    """``ln prod_{n>=1} (1 - e^{-n t})``, stopping once factors are within 1e-17 of 1."""
    total = 0.0
    n = 1
    while True:
        u = math.exp(-n * t)
        if u < 1e-17:
            return total
        total += math.log1p(-u)
        n += 1


def eta_modular_residual(eps: float) -> float:
    """Relative mismatch in ``(q;q)_inf = sqrt(2 pi/eps) e^{-pi^2/(6 eps) + eps/24} (q~;q~)_inf``.

    Here ``q = e^{-eps}`` and ``q~ = e^{-4 pi^2/eps}``.  This is the eta
    transformation ``eta(-1/tau) = sqrt(-i tau) eta(tau)`` at
    ``tau = i eps / 2 pi``.  The ``e^{eps/24}`` factor comes from the
    ``q^{1/24}`` in eta; it is invisible to leading order as ``eps -> 0``.
    """
    eps = _positive(eps)
    lhs = _log_euler(eps)
    rhs = (
        0.5 * math.log(2 * math.pi / eps)
        - math.pi**2 / (6 * eps)
        + eps / 24
        + _log_euler(4 * math.pi**2 / eps)
    )
    return abs(math.expm1(rhs - lhs))


# ---------------------------------------------------------------------------
# Rescaled q-Whittaker values and the convergence scan
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScaledValue:
    value: complex
    point: QuantizedPoint
    m: int


def scaled_psi(x: Sequence[float], lambdas: Sequence[float], eps: float, threads: int = 1,
               convention: str = "floor") -> ScaledValue:
    """``eps^{l(l+1)/2} e^{l(l+3)/2 A(eps)} Psi_z(p)`` with ``z_k = e^{i eps lambda_k}``.

    Returns exact 0 with a :class:`DominanceWarning` when the quantized
    point is not dominant.  Raises OverflowError if the result does not fit
    in a double.
    """
    ctx = ScalingContext(eps, len(x), convention)
    if len(lambdas) != ctx.rank:
        raise ValueError("x and lambda must have the same length")
    point = ctx.quantize(x)
    if not is_weakly_decreasing(point.p):
        warnings.warn(f"quantized point {point.p} is not dominant; returning 0", DominanceWarning, stacklevel=2)
        return ScaledValue(0j, point, ctx.m)
    l = ctx.rank - 1
    spec = SpectralParams.unit_circle(lambdas, ctx.eps)
    raw = psi_recursive(point.p, spec, ctx.q, threads=threads)
    assert isinstance(raw, LogComplex)
    prefactor = l * (l + 1) / 2 * math.log(ctx.eps) + l * (l + 3) / 2 * ctx.A
    return ScaledValue(raw.scale_log(prefactor).to_complex(), point, ctx.m)


@dataclass(frozen=True)
class ScanRow:
    eps: float
    m: int
    effective_x: tuple[float, ...]
    q_value: complex
    classical: complex

    @property
    def abs_err(self) -> float:
        return abs(self.q_value - self.classical)

    @property
    def rel_err(self) -> float:
        return self.abs_err / abs(self.classical) if self.classical != 0 else math.inf


def limit_scan(x: Sequence[float], lambdas: Sequence[float], eps_list: Sequence[float],
               cfg: QuadratureConfig | None = None, threads: int = 1,
               convention: str = "floor") -> list[ScanRow]:
    """Compare ``scaled_psi`` with the classical function at the effective ``x`` per ``eps``.

    Rows are computed concurrently when ``threads > 1`` and returned in the
    order of ``eps_list``.
    """
    eps_list = [_positive(e) for e in eps_list]
    if any(a <= b for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps list must be strictly decreasing")
    cfg = cfg or QuadratureConfig()

    def row(eps: float) -> ScanRow:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DominanceWarning)
            sv = scaled_psi(x, lambdas, eps, threads=1, convention=convention)
        cl = whittaker_classical(sv.point.effective, lambdas, cfg).value
        return ScanRow(eps, sv.m, sv.point.effective, sv.value, cl)

    if threads > 1 and len(eps_list) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(row, eps_list))
    return [row(e) for e in eps_list]


# ---------------------------------------------------------------------------
# Hamiltonian expansions on smooth test functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TestFunction:
    """A smooth ``F`` with the classical ``H_1 F = sum_i dF/dx_i`` and ``H_2 F``."""

    name: str
    value: Callable[[np.ndarray], float]
    gradient_sum: Callable[[np.ndarray], float]
    laplacian: Callable[[np.ndarray], float]

    __test__ = False  # not a pytest class

    def h1(self, x: np.ndarray) -> float:
        return self.gradient_sum(x)

    def h2(self, x: np.ndarray) -> float:
        potential = float(np.sum(np.exp(x[1:] - x[:-1])))
        return -0.5 * self.laplacian(x) + potential * self.value(x)


def _gauss(x):
    return math.exp(-0.5 * float(np.dot(x, x)))


GAUSSIAN = TestFunction(
    "gaussian",
    _gauss,
    lambda x: -float(np.sum(x)) * _gauss(x),
    lambda x: float(np.sum(x * x) - len(x)) * _gauss(x),
)
CONSTANT = TestFunction("constant", lambda x: 1.0, lambda x: 0.0, lambda x: 0.0)
TEST_FUNCTIONS = {f.name: f for f in (GAUSSIAN, CONSTANT)}


@dataclass(frozen=True)
class HamiltonianResiduals:
    eps: float
    effective_x: tuple[float, ...]
    residual1: float
    residual2: float | None


def hamiltonian_limit_residual(eps: float, x: Sequence[float], test: TestFunction | str = GAUSSIAN,
                               convention: str = "floor") -> HamiltonianResiduals:
    """Residuals of the first two q-Toda Hamiltonians against their classical limits.

    ``residual1 = |(H_1 F - n F)/eps - H_1^cl F|`` and
    ``residual2 = |-(H_1 F - H_n F - l F + (H_n - 1)^2 F / 2)/eps^2 - H_2^cl F|``
    with ``n = l + 1``; the q-operators act on ``F`` through the lattice
    coordinates.  ``residual2`` is None at rank 1.
    """
    if isinstance(test, str):
        test = TEST_FUNCTIONS[test]
    ctx = ScalingContext(eps, len(x), convention)
    point = ctx.quantize(x)
    n = ctx.rank
    l = n - 1
    F = LatticeFunction(lambda p: test.value(np.array(ctx.x_of(p))), n)
    q = ctx.q
    p = point.p
    xe = np.array(point.effective)
    f0 = F(p)
    h1 = apply_hamiltonian(HamiltonianSpec(n, 1), F, p, q)
    r1 = abs((h1 - n * f0) / ctx.eps - test.h1(xe))
    if n == 1:
        return HamiltonianResiduals(ctx.eps, point.effective, r1, None)
    top = HamiltonianSpec(n, n)
    hn = apply_hamiltonian(top, F, p, q)
    hn2 = apply_hamiltonian(top, F, tuple(v + 1 for v in p), q)
    square = hn2 - 2 * hn + f0
    r2 = abs(-(h1 - hn - l * f0 + 0.5 * square) / ctx.eps**2 - test.h2(xe))
    return HamiltonianResiduals(ctx.eps, point.effective, r1, r2)
