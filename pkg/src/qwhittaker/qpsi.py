"""Class-one q-deformed gl(n) Whittaker functions.

``Psi_z(p)`` for a top row ``p`` is a sum over Gelfand-Zetlin patterns of a
z-monomial times a ratio of q-factorials (numerators on the inner rows'
consecutive gaps, denominators on the interlacing gaps between rows).  It
vanishes identically off the dominant cone.

Evaluation modes are picked from the arguments:

=================  ============================  ===========================
spectral params    q                             result
=================  ============================  ===========================
formal             :class:`FormalQ` / rational   LaurentPoly (QSeries / Fraction coefficients)
exact values       :class:`FormalQ` / rational   QSeries / exact number
exact / unit-circ  float in (0, 1)               LogComplex
=================  ============================  ===========================
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence, Union

import numpy as np

from .patterns import (
    as_weight,
    fold_patterns,
    interlacing_set,
    is_weakly_decreasing,
)
from .qarith import (
    DEFAULT_TRUNCATION,
    GaussianRational,
    LaurentPoly,
    LogComplex,
    QSeries,
    inverse_q_factorial_series,
    log_factorial_table,
    log_sum_exp,
    q_factorial_exact,
    q_factorial_series,
)

QWhittakerValue = Union[LaurentPoly, QSeries, Fraction, GaussianRational, LogComplex]


class PositivityError(AssertionError):
    """A character coefficient came out negative or non-integral."""

    def __init__(self, monomial, series):
        super().__init__(f"coefficient of z^{monomial} is not a nonnegative integer series: {series}")
        self.monomial = monomial
        self.series = series


@dataclass(frozen=True)
class FormalQ:
    """Keep ``q`` symbolic: coefficients become power series truncated at ``order``."""

    order: int = DEFAULT_TRUNCATION


@dataclass(frozen=True)
class SpectralParams:
    """Spectral variables ``z_1..z_n``.

    Use the constructors: :meth:`formal`, :meth:`exact`, :meth:`unit_circle`.
    """

    mode: str
    nvars: int
    values: tuple | None = None
    lambdas: tuple | None = None
    eps: float | None = None

    @classmethod
    def formal(cls, nvars: int) -> SpectralParams:
        return cls("formal", nvars)

    @classmethod
    def exact(cls, values: Sequence[Any]) -> SpectralParams:
        vals = tuple(v if isinstance(v, (Fraction, GaussianRational)) else Fraction(v) for v in values)
        return cls("exact", len(vals), values=vals)

    @classmethod
    def unit_circle(cls, lambdas: Sequence[float], eps: float) -> SpectralParams:
        """``z_k = exp(i*eps*lambda_k)``; ``|z_k| = 1`` by construction."""
        lam = tuple(float(v) for v in lambdas)
        return cls("unit-circle", len(lam), lambdas=lam, eps=float(eps))

    def restrict(self, k: int) -> SpectralParams:
        """Keep only ``z_1..z_k``."""
        return SpectralParams(
            self.mode,
            k,
            values=None if self.values is None else self.values[:k],
            lambdas=None if self.lambdas is None else self.lambdas[:k],
            eps=self.eps,
        )

    def permuted(self, perm: Sequence[int]) -> SpectralParams:
        if self.mode == "formal":
            return self
        pick = lambda t: None if t is None else tuple(t[i] for i in perm)  # noqa: E731
        return SpectralParams(self.mode, self.nvars, pick(self.values), pick(self.lambdas), self.eps)

    def complex_values(self) -> tuple[complex, ...]:
        if self.mode == "unit-circle":
            return tuple(cmath.exp(1j * self.eps * lam) for lam in self.lambdas)
        if self.mode == "exact":
            return tuple(complex(v) for v in self.values)
        raise ValueError("formal spectral variables have no numeric value")

    def log_polar(self) -> tuple[np.ndarray, np.ndarray]:
        """``(log|z_k|, arg z_k)``; unit-circle phases are ``eps*lambda_k`` exactly."""
        if self.mode == "unit-circle":
            return np.zeros(self.nvars), self.eps * np.array(self.lambdas)
        zs = self.complex_values()
        with np.errstate(divide="ignore"):
            la = np.log(np.abs(np.array(zs)))
        return la, np.array([cmath.phase(z) for z in zs])


# ---------------------------------------------------------------------------
# q backends
# ---------------------------------------------------------------------------


class _ExactQ:
    kind = "exact"

    def __init__(self, q):
        q = q if isinstance(q, GaussianRational) else Fraction(q)
        if q * q == 1:
            raise ValueError(f"q = {q} makes q-factorials vanish")
        self.q = q
        self._fact: dict[int, Any] = {}
        self.zero = Fraction(0)
        self.one = Fraction(1)

    def factorial(self, n: int):
        v = self._fact.get(n)
        if v is None:
            v = self._fact[n] = q_factorial_exact(n, self.q)
        return v

    def weight(self, num: Sequence[int], den: Sequence[int]):
        top = Fraction(1)
        for n in num:
            top = top * self.factorial(n)
        bottom = Fraction(1)
        for n in den:
            bottom = bottom * self.factorial(n)
        return top / bottom

    def power(self, k: int):
        return self.q**k


class _FormalQ:
    kind = "formal"

    def __init__(self, order: int):
        self.order = order
        self.zero = QSeries((0,), order)
        self.one = QSeries((1,), order)

    def weight(self, num: Sequence[int], den: Sequence[int]) -> QSeries:
        acc = self.one
        for n in num:
            acc = acc * q_factorial_series(n, self.order)
        for n in den:
            acc = acc * inverse_q_factorial_series(n, self.order)
        return acc

    def power(self, k: int) -> QSeries:
        return QSeries.monomial(k, self.order)


class _FloatQ:
    kind = "float"

    def __init__(self, q: float):
        if not 0.0 < q < 1.0:
            raise ValueError(f"float q must lie in (0, 1), got {q}")
        self.q = q
        self.eps = -math.log(q)
        self.table = log_factorial_table(self.eps)

    def log_weight(self, num: Sequence[int], den: Sequence[int]) -> float:
        t = self.table
        return sum(t(n) for n in num) - sum(t(n) for n in den)

    def power(self, k: int) -> float:
        return self.q**k


def q_backend(q):
    if isinstance(q, FormalQ):
        return _FormalQ(q.order)
    if isinstance(q, float):
        return _FloatQ(q)
    if isinstance(q, (int, Fraction, GaussianRational)):
        return _ExactQ(q)
    raise TypeError(f"unsupported q specification {q!r}")


def _check(p, spec: SpectralParams, qb) -> tuple[int, ...]:
    p = as_weight(p).entries
    if spec.nvars != len(p):
        raise ValueError(f"weight has {len(p)} entries but {spec.nvars} spectral variables given")
    if spec.mode == "formal" and qb.kind == "float":
        raise ValueError("formal z needs a formal or exact rational q")
    if spec.mode == "unit-circle" and qb.kind != "float":
        raise ValueError("unit-circle spectral parameters need a float q")
    return p


def zero_value(spec: SpectralParams, q):
    """The exact zero returned off the dominant cone for these arguments."""
    return _zero(spec, q_backend(q))


def _zero(spec: SpectralParams, qb):
    if qb.kind == "float":
        return LogComplex.zero()
    if spec.mode == "formal":
        return LaurentPoly.zero(spec.nvars)
    return qb.zero


# ---------------------------------------------------------------------------
# Direct pattern sum
# ---------------------------------------------------------------------------


def pattern_term(rows: Sequence[Sequence[int]]) -> tuple[tuple[int, ...], list[int], list[int]]:
    """z-exponent of one pattern together with its q-factorial arguments (numerator and denominator).

    ``rows`` runs top-down (row ``l+1`` first).
    """
    n = len(rows)
    row = lambda k: rows[n - k] if k >= 1 else ()  # noqa: E731  row p_{k,.}
    exponent = tuple(sum(row(k)) - sum(row(k - 1)) for k in range(1, n + 1))
    den: list[int] = []
    for k in range(1, n):
        upper, lower = row(k + 1), row(k)
        for i in range(k):
            den.append(upper[i] - lower[i])
            den.append(lower[i] - upper[i + 1])
    num: list[int] = []
    for k in range(2, n):
        r = row(k)
        for i in range(k - 1):
            num.append(r[i] - r[i + 1])
    return exponent, num, den


def _monomial_sums(p: tuple[int, ...], qb, threads: int) -> dict:
    """Per z-monomial sum of pattern weights (float mode: list of log-weights)."""
    if qb.kind == "float":

        def step(acc, rows):
            e, num, den = pattern_term(rows)
            acc.setdefault(e, []).append(qb.log_weight(num, den))
            return acc

        def merge(acc, part):
            for e, ws in part.items():
                acc.setdefault(e, []).extend(ws)
            return acc

    else:

        def step(acc, rows):
            e, num, den = pattern_term(rows)
            w = qb.weight(num, den)
            acc[e] = acc[e] + w if e in acc else w
            return acc

        def merge(acc, part):
            for e, w in part.items():
                acc[e] = acc[e] + w if e in acc else w
            return acc

    return fold_patterns(p, step, dict, merge, threads=threads)


def _monomial_log(exps: np.ndarray, log_abs: np.ndarray, arg: np.ndarray):
    exps = np.asarray(exps)
    if np.any((exps < 0) & np.isneginf(log_abs)):
        raise ZeroDivisionError("negative power of a zero spectral variable")
    with np.errstate(invalid="ignore"):
        lm = np.where(exps == 0, 0.0, exps * log_abs)
    return lm.sum(axis=-1), (exps * arg).sum(axis=-1)


def _finish(sums: dict, spec: SpectralParams, qb):
    n = spec.nvars
    if qb.kind == "float":
        if not sums:
            return LogComplex.zero()
        keys = sorted(sums)
        per_monomial = [log_sum_exp(np.array(sums[e]), np.zeros(len(sums[e]))) for e in keys]
        la, arg = spec.log_polar()
        lm, ph = _monomial_log(np.array(keys), la, arg)
        coeff = np.array([c.log_magnitude for c in per_monomial])
        return log_sum_exp(coeff + lm, ph)
    if spec.mode == "formal":
        return LaurentPoly(sums, n)
    total = qb.zero
    for e in sorted(sums):
        mono = Fraction(1)
        for z, k in zip(spec.values, e):
            mono = mono * (z**k if k >= 0 else (1 / z) ** (-k))
        total = total + sums[e] * mono
    return total


def psi_direct(p, spec: SpectralParams, q, threads: int = 1) -> QWhittakerValue:
    """Evaluate ``Psi_z(p)`` by summing over all GZ patterns with top row ``p``.

    Off the dominant cone the result is an exact zero of the mode's type.
    """
    qb = q_backend(q)
    p = _check(p, spec, qb)
    if not is_weakly_decreasing(p):
        return _zero(spec, qb)
    return _finish(_monomial_sums(p, qb, threads), spec, qb)


# ---------------------------------------------------------------------------
# Recursion over the top interlacing row
# ---------------------------------------------------------------------------


def branching_weight(upper: Sequence[int], lower: Sequence[int]):
    """q-factorial arguments ``(num, den)`` of ``Delta(lower) * Q(upper, lower)``."""
    num = [lower[i] - lower[i + 1] for i in range(len(lower) - 1)]
    den = []
    for i in range(len(lower)):
        den.append(upper[i] - lower[i])
        den.append(lower[i] - upper[i + 1])
    return num, den


def psi_recursive(p, spec: SpectralParams, q, threads: int = 1) -> QWhittakerValue:
    """Evaluate ``Psi_z(p)`` through the one-row-at-a-time recursion.

    Each lower-rank value is computed once per lower weight and reused.  In
    float mode the interlacing sums are vectorized in the log domain.
    """
    qb = q_backend(q)
    p = _check(p, spec, qb)
    if qb.kind == "float":
        return _psi_logfloat(p, spec, qb, threads)
    if not is_weakly_decreasing(p):
        return _zero(spec, qb)

    formal = spec.mode == "formal"
    memo: dict[tuple[int, ...], Any] = {}

    def rec(w: tuple[int, ...]):
        hit = memo.get(w)
        if hit is not None:
            return hit
        n = len(w)
        if n == 1:
            if formal:
                val = LaurentPoly.monomial(w, qb.one)
            else:
                z = spec.values[0]
                val = qb.one * (z ** w[0] if w[0] >= 0 else (1 / z) ** (-w[0]))
        else:
            val = LaurentPoly.zero(n) if formal else qb.zero
            for lower in interlacing_set(w):
                weight = qb.weight(*branching_weight(w, lower))
                k = sum(w) - sum(lower)
                sub = rec(lower)
                if formal:
                    val = val + sub.append_variable(k) * weight
                else:
                    z = spec.values[n - 1]
                    zk = z**k if k >= 0 else (1 / z) ** (-k)
                    val = val + sub * weight * zk
        memo[w] = val
        return val

    return rec(p)


def _psi_logfloat(p: tuple[int, ...], spec: SpectralParams, qb: _FloatQ, threads: int) -> LogComplex:
    if not is_weakly_decreasing(p):
        return LogComplex.zero()
    la, arg = spec.log_polar()
    table = qb.table
    memo: dict[tuple[int, ...], tuple[float, float]] = {}

    def combine(w: tuple[int, ...], lowers: np.ndarray, sub_lm, sub_ph) -> tuple[float, float]:
        n = len(w)
        wv = np.array(w)
        logw = -(table(wv[:-1] - lowers).sum(axis=1) + table(lowers - wv[1:]).sum(axis=1))
        if lowers.shape[1] > 1:
            logw = logw + table(lowers[:, :-1] - lowers[:, 1:]).sum(axis=1)
        k = sum(w) - lowers.sum(axis=1)
        mlm, mph = _monomial_log(k[:, None], la[n - 1 : n], arg[n - 1 : n])
        r = log_sum_exp(sub_lm + logw + mlm, sub_ph + mph)
        return r.log_magnitude, r.phase

    def rec(w: tuple[int, ...]) -> tuple[float, float]:
        hit = memo.get(w)
        if hit is not None:
            return hit
        lowers = np.array(list(interlacing_set(w)), dtype=np.int64)
        if len(w) == 2:
            sub_lm, sub_ph = _monomial_log(lowers, la[:1], arg[:1])
        else:
            subs = [rec(tuple(int(v) for v in row)) for row in lowers]
            sub_lm = np.array([s[0] for s in subs])
            sub_ph = np.array([s[1] for s in subs])
        val = combine(w, lowers, sub_lm, sub_ph)
        memo[w] = val
        return val

    if len(p) == 1:
        lm, ph = _monomial_log(np.array(p), la, arg)
        return LogComplex(float(lm), float(ph))
    if threads > 1 and len(p) > 2:
        # fill the memo for the rows below the top concurrently; the final
        # reduction below runs in fixed order
        tops = [tuple(int(v) for v in row) for row in interlacing_set(p)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(rec, tops))
    lm, ph = rec(p)
    if lm == -math.inf:
        return LogComplex.zero()
    return LogComplex(lm, ph)


# ---------------------------------------------------------------------------
# Character form and the q = 0 shadow
# ---------------------------------------------------------------------------


def delta_factor(p: Sequence[int], T: int = DEFAULT_TRUNCATION) -> QSeries:
    """``prod_i (p_i - p_{i+1})_q!`` as a truncated series."""
    acc = QSeries((1,), T)
    for a, b in zip(p, p[1:]):
        acc = acc * q_factorial_series(a - b, T)
    return acc


def psi_character(p, T: int = DEFAULT_TRUNCATION, threads: int = 1) -> LaurentPoly:
    """``Delta(p) * Psi(p)`` with formal z and q, every coefficient checked.

    Raises PositivityError on the first coefficient series that is not made
    of nonnegative integers up to order ``T``.
    """
    p = as_weight(p).entries
    if not is_weakly_decreasing(p):
        raise ValueError(f"psi_character needs a dominant weight, got {p}")
    psi = psi_direct(p, SpectralParams.formal(len(p)), FormalQ(T), threads=threads)
    out = psi * delta_factor(p, T)
    for e, series in out:
        if not (series.is_integral() and series.is_nonnegative()):
            raise PositivityError(e, series)
    return out


def schur_specialization(p, z: Sequence[Any]):
    """``Psi`` at ``q = 0``: the plain sum of pattern monomials at the point ``z``."""
    p = as_weight(p).entries
    if not is_weakly_decreasing(p):
        raise ValueError(f"schur_specialization needs a dominant weight, got {p}")
    return psi_direct(p, SpectralParams.exact(z), Fraction(0))
