"""Exact and floating-point arithmetic for q-factorials and q-series.

Three value types live here:

* :class:`QSeries`: a power series in ``q`` truncated at a fixed order, with
  exact (int / Fraction) coefficients.
* :class:`LaurentPoly`: a Laurent polynomial in the spectral variables
  ``z_1..z_n`` whose coefficients may be QSeries or plain numbers.
* :class:`LogComplex`: a complex number stored as ``(log|w|, arg w)`` so that
  sums whose terms span hundreds of orders of magnitude stay representable.

The q-factorial convention throughout is ``(n)_q! = (1-q)(1-q^2)...(1-q^n)``.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Any, Callable, Iterable, Mapping

import numpy as np

DEFAULT_TRUNCATION = 40


class InexactDivisionError(ArithmeticError):
    """Raised when a polynomial division that must be exact leaves a remainder."""


# ---------------------------------------------------------------------------
# Gaussian rationals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GaussianRational:
    """Exact complex number ``re + i*im`` with rational parts."""

    re: Fraction
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "im", Fraction(self.im))

    @staticmethod
    def _lift(other) -> GaussianRational | None:
        if isinstance(other, GaussianRational):
            return other
        if isinstance(other, (int, Fraction)):
            return GaussianRational(Fraction(other))
        return None

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return GaussianRational(
            self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re
        )

    __rmul__ = __mul__

    def reciprocal(self) -> GaussianRational:
        n = self.re * self.re + self.im * self.im
        if n == 0:
            raise ZeroDivisionError("GaussianRational division by zero")
        return GaussianRational(self.re / n, -self.im / n)

    def __truediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self * o.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        base = self if k >= 0 else self.reciprocal()
        result = GaussianRational(Fraction(1))
        for _ in range(abs(k)):
            result = result * base
        return result

    def __eq__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        return f"{self.re}+{self.im}i" if self.im > 0 else f"{self.re}{self.im}i"


# ---------------------------------------------------------------------------
# QSeries
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QSeries:
    """Power series ``sum_{j<=T} c_j q^j`` truncated at order ``T``."""

    coefficients: tuple
    truncation_order: int

    def __post_init__(self):
        T = self.truncation_order
        if T < 0:
            raise ValueError("truncation order must be nonnegative")
        coeffs = tuple(self.coefficients[: T + 1])
        coeffs = coeffs + (0,) * (T + 1 - len(coeffs))
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def constant(cls, c, T: int = DEFAULT_TRUNCATION) -> QSeries:
        return cls((c,), T)

    @classmethod
    def monomial(cls, power: int, T: int = DEFAULT_TRUNCATION, c=1) -> QSeries:
        if power < 0:
            raise ValueError("QSeries cannot hold negative powers of q")
        return cls((0,) * power + (c,), T)

    @property
    def order(self) -> int:
        return self.truncation_order

    def __getitem__(self, j: int):
        return self.coefficients[j]

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coefficients)

    def is_integral(self) -> bool:
        return all(Fraction(c).denominator == 1 for c in self.coefficients)

    def is_nonnegative(self) -> bool:
        return all(c >= 0 for c in self.coefficients)

    def _coerce(self, other) -> QSeries | None:
        if isinstance(other, QSeries):
            return other
        if isinstance(other, (int, Fraction, GaussianRational)):
            return QSeries((other,), self.truncation_order)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        T = min(self.truncation_order, o.truncation_order)
        return QSeries(
            tuple(a + b for a, b in zip(self.coefficients[: T + 1], o.coefficients)), T
        )

    __radd__ = __add__

    def __neg__(self):
        return QSeries(tuple(-c for c in self.coefficients), self.truncation_order)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, GaussianRational)):
            return QSeries(tuple(c * other for c in self.coefficients), self.truncation_order)
        if not isinstance(other, QSeries):
            return NotImplemented
        T = min(self.truncation_order, other.truncation_order)
        a, b = self.coefficients, other.coefficients
        out = [0] * (T + 1)
        for i in range(T + 1):
            ai = a[i]
            if ai == 0:
                continue
            for j in range(T + 1 - i):
                if b[j] != 0:
                    out[i + j] += ai * b[j]
        return QSeries(tuple(out), T)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = QSeries((other,), self.truncation_order)
        if not isinstance(other, QSeries):
            return NotImplemented
        T = min(self.truncation_order, other.truncation_order)
        return self.coefficients[: T + 1] == other.coefficients[: T + 1]

    def __hash__(self):
        return hash((self.coefficients, self.truncation_order))

    def evaluate(self, q):
        """Evaluate the truncated polynomial at a numeric ``q`` (Horner)."""
        acc = 0
        for c in reversed(self.coefficients):
            acc = acc * q + c
        return acc

    def __str__(self):
        terms = []
        for j, c in enumerate(self.coefficients):
            if c == 0:
                continue
            if j == 0:
                terms.append(str(c))
            else:
                mono = "q" if j == 1 else f"q^{j}"
                terms.append(mono if c == 1 else f"{c}*{mono}")
        body = " + ".join(terms) if terms else "0"
        return f"{body} + O(q^{self.truncation_order + 1})"


# ---------------------------------------------------------------------------
# Exact polynomial helpers (untruncated, integer coefficient lists)
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _q_factorial_poly(n: int) -> tuple[int, ...]:
    if n == 0:
        return (1,)
    prev = _q_factorial_poly(n - 1)
    out = list(prev) + [0] * n
    for j, c in enumerate(prev):
        out[j + n] -= c
    return tuple(out)


def _poly_mul(a: Iterable[int], b: Iterable[int]) -> list[int]:
    a, b = list(a), list(b)
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _poly_divmod(num: list[int], den: list[int]) -> tuple[list[Fraction], list[Fraction]]:
    num = [Fraction(c) for c in num]
    den = [Fraction(c) for c in den]
    while len(den) > 1 and den[-1] == 0:
        den.pop()
    if len(den) == 1 and den[0] == 0:
        raise ZeroDivisionError("polynomial division by zero")
    rem = num[:]
    quo = [Fraction(0)] * max(len(num) - len(den) + 1, 1)
    lead = den[-1]
    for shift in range(len(num) - len(den), -1, -1):
        c = rem[shift + len(den) - 1] / lead
        quo[shift] = c
        if c:
            for j, d in enumerate(den):
                rem[shift + j] -= c * d
    return quo, rem


# ---------------------------------------------------------------------------
# q-factorials
# ---------------------------------------------------------------------------


def q_factorial_series(n: int, T: int = DEFAULT_TRUNCATION) -> QSeries:
    """``prod_{k=1..n} (1 - q^k)`` truncated at order ``T``, integer coefficients."""
    if n < 0:
        raise ValueError("q-factorial needs n >= 0")
    return QSeries(_q_factorial_poly(n), T)


@lru_cache(maxsize=4096)
def inverse_q_factorial_series(n: int, T: int = DEFAULT_TRUNCATION) -> QSeries:
    """``1/(n)_q!`` as a power series: counts partitions with parts at most ``n``."""
    if n < 0:
        raise ValueError("q-factorial needs n >= 0")
    c = [1] + [0] * T
    for k in range(1, min(n, T) + 1):
        for j in range(k, T + 1):
            c[j] += c[j - k]
    return QSeries(tuple(c), T)


def q_factorial_exact(n: int, q) -> Any:
    """The q-factorial at an exact numeric ``q`` (rational or Gaussian rational)."""
    if n < 0:
        raise ValueError("q-factorial needs n >= 0")
    acc = Fraction(1)
    qk = Fraction(1)
    for _ in range(n):
        qk = qk * q
        acc = acc * (1 - qk)
    return acc


def gaussian_binomial(m: int, k: int, T: int = DEFAULT_TRUNCATION) -> QSeries:
    """``(m)_q! / ((k)_q! (m-k)_q!)`` by exact polynomial division.

    Raises InexactDivisionError if the division leaves a remainder, and
    AssertionError if a coefficient comes out negative or non-integral.
    """
    if not 0 <= k <= m:
        raise ValueError(f"need 0 <= k <= m, got m={m}, k={k}")
    den = _poly_mul(_q_factorial_poly(k), _q_factorial_poly(m - k))
    quo, rem = _poly_divmod(list(_q_factorial_poly(m)), den)
    if any(r != 0 for r in rem):
        raise InexactDivisionError(f"[{m} choose {k}]_q left a remainder")
    coeffs = []
    for c in quo:
        assert c.denominator == 1 and c >= 0, f"bad Gaussian binomial coefficient {c}"
        coeffs.append(int(c))
    return QSeries(tuple(coeffs), T)


class LogQFactorialTable:
    """Prefix sums ``L[n] = sum_{k<=n} ln(1 - e^{-k eps})`` for one ``eps``.

    The table grows on demand; growth is guarded by a lock, reads of an
    already-filled prefix never block.  Prefix sums use Neumaier compensation.
    """

    def __init__(self, eps: float):
        if not eps > 0:
            raise ValueError(f"eps must be positive, got {eps}")
        self.eps = float(eps)
        self._values = np.zeros(1)
        self._sum = 0.0
        self._comp = 0.0
        self._lock = threading.Lock()

    def _extend(self, n: int) -> None:
        with self._lock:
            have = len(self._values) - 1
            if n <= have:
                return
            target = max(n, 2 * have, 64)
            k = np.arange(have + 1, target + 1, dtype=float)
            terms = np.log(-np.expm1(-k * self.eps))
            out = np.empty(target - have)
            s, c = self._sum, self._comp
            for idx, t in enumerate(terms.tolist()):
                u = s + t
                if abs(s) >= abs(t):
                    c += (s - u) + t
                else:
                    c += (t - u) + s
                s = u
                out[idx] = s + c
            self._sum, self._comp = s, c
            self._values = np.concatenate([self._values, out])

    def __call__(self, n):
        """Scalar or integer-array lookup of ``ln (n)_q!``."""
        arr = np.asarray(n)
        if arr.size and arr.min() < 0:
            raise ValueError("q-factorial needs n >= 0")
        top = int(arr.max()) if arr.size else 0
        if top >= len(self._values):
            self._extend(top)
        values = self._values
        if arr.ndim == 0:
            return float(values[int(arr)])
        return values[arr]


_TABLES: dict[float, LogQFactorialTable] = {}
_TABLES_LOCK = threading.Lock()


def log_factorial_table(eps: float) -> LogQFactorialTable:
    table = _TABLES.get(eps)
    if table is None:
        with _TABLES_LOCK:
            table = _TABLES.setdefault(eps, LogQFactorialTable(eps))
    return table


def q_factorial_log(n: int, eps: float) -> float:
    """``ln (n)_q!`` at ``q = e^{-eps}``; repeated calls share a cached table."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    if n < 0:
        raise ValueError("q-factorial needs n >= 0")
    return log_factorial_table(float(eps))(int(n))


# ---------------------------------------------------------------------------
# Laurent polynomials in z
# ---------------------------------------------------------------------------


def _is_zero(c) -> bool:
    if isinstance(c, QSeries):
        return c.is_zero()
    return c == 0


@dataclass(frozen=True)
class LaurentPoly:
    """Finite sum ``sum_e c_e z^e`` over integer exponent vectors ``e``."""

    terms: Mapping[tuple[int, ...], Any]
    nvars: int

    def __post_init__(self):
        clean = {}
        for e, c in self.terms.items():
            e = tuple(int(v) for v in e)
            if len(e) != self.nvars:
                raise ValueError(f"exponent {e} does not have length {self.nvars}")
            if not _is_zero(c):
                clean[e] = c
        object.__setattr__(self, "terms", dict(sorted(clean.items())))

    @classmethod
    def zero(cls, nvars: int) -> LaurentPoly:
        return cls({}, nvars)

    @classmethod
    def monomial(cls, exponent: Iterable[int], coefficient=1) -> LaurentPoly:
        e = tuple(exponent)
        return cls({e: coefficient}, len(e))

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms.items())

    def coefficient(self, exponent: Iterable[int]):
        return self.terms.get(tuple(exponent), 0)

    def __add__(self, other):
        if isinstance(other, LaurentPoly):
            if other.nvars != self.nvars:
                raise ValueError("variable count mismatch")
            out = dict(self.terms)
            for e, c in other.terms.items():
                out[e] = out[e] + c if e in out else c
            return LaurentPoly(out, self.nvars)
        if _is_zero(other):
            return self
        return self + LaurentPoly({(0,) * self.nvars: other}, self.nvars)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly({e: -c for e, c in self.terms.items()}, self.nvars)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, LaurentPoly):
            if other.nvars != self.nvars:
                raise ValueError("variable count mismatch")
            out: dict = {}
            for e1, c1 in self.terms.items():
                for e2, c2 in other.terms.items():
                    e = tuple(a + b for a, b in zip(e1, e2))
                    prod = c1 * c2
                    out[e] = out[e] + prod if e in out else prod
            return LaurentPoly(out, self.nvars)
        return LaurentPoly({e: c * other for e, c in self.terms.items()}, self.nvars)

    def __rmul__(self, other):
        return LaurentPoly({e: other * c for e, c in self.terms.items()}, self.nvars)

    def __eq__(self, other):
        if isinstance(other, LaurentPoly):
            return self.nvars == other.nvars and self.terms == other.terms
        if _is_zero(other):
            return self.is_zero()
        return NotImplemented

    def __hash__(self):
        return hash((self.nvars, tuple(self.terms.items())))

    def shift(self, exponent: Iterable[int]) -> LaurentPoly:
        """Multiply by the monomial ``z^exponent``."""
        d = tuple(exponent)
        return LaurentPoly(
            {tuple(a + b for a, b in zip(e, d)): c for e, c in self.terms.items()},
            self.nvars,
        )

    def append_variable(self, power: int) -> LaurentPoly:
        """Embed into one more variable, multiplied by ``z_{n+1}^power``."""
        return LaurentPoly({e + (power,): c for e, c in self.terms.items()}, self.nvars + 1)

    def permute(self, perm: Iterable[int]) -> LaurentPoly:
        """Substitute ``z_i -> z_{perm[i]}``."""
        perm = tuple(perm)
        out = {}
        for e, c in self.terms.items():
            new = [0] * self.nvars
            for i, v in enumerate(e):
                new[perm[i]] = v
            out[tuple(new)] = c
        return LaurentPoly(out, self.nvars)

    def map_coefficients(self, fn: Callable[[Any], Any]) -> LaurentPoly:
        return LaurentPoly({e: fn(c) for e, c in self.terms.items()}, self.nvars)

    def evaluate(self, z: Iterable[Any]):
        z = tuple(z)
        total = 0
        for e, c in self.terms.items():
            mono = 1
            for zi, k in zip(z, e):
                mono = mono * _int_power(zi, k)
            total = total + c * mono
        return total

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.terms.items():
            mono = "*".join(
                f"z{i + 1}" if k == 1 else f"z{i + 1}^{k}" for i, k in enumerate(e) if k
            )
            coef = f"({c})" if isinstance(c, QSeries) else str(c)
            if mono and coef == "1":
                parts.append(mono)
            else:
                parts.append(f"{coef}*{mono}" if mono else coef)
        return " + ".join(parts)


def _int_power(z, k: int):
    if k == 0:
        return 1
    if k > 0:
        return z**k
    if isinstance(z, int):
        z = Fraction(z)
    return z**k


# ---------------------------------------------------------------------------
# Log-domain complex numbers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LogComplex:
    """``exp(log_magnitude) * exp(i*phase)``; ``is_zero`` marks exact zero."""

    log_magnitude: float = -math.inf
    phase: float = 0.0
    is_zero: bool = field(default=False)

    def __post_init__(self):
        if self.log_magnitude == -math.inf and not self.is_zero:
            object.__setattr__(self, "is_zero", True)
        if self.is_zero:
            object.__setattr__(self, "log_magnitude", -math.inf)
            object.__setattr__(self, "phase", 0.0)

    @classmethod
    def zero(cls) -> LogComplex:
        return cls(-math.inf, 0.0, True)

    @classmethod
    def from_complex(cls, w: complex) -> LogComplex:
        w = complex(w)
        if w == 0:
            return cls.zero()
        return cls(math.log(abs(w)), math.atan2(w.imag, w.real))

    def __mul__(self, other):
        if not isinstance(other, LogComplex):
            other = LogComplex.from_complex(other)
        if self.is_zero or other.is_zero:
            return LogComplex.zero()
        return LogComplex(self.log_magnitude + other.log_magnitude, self.phase + other.phase)

    __rmul__ = __mul__

    def __add__(self, other):
        if not isinstance(other, LogComplex):
            other = LogComplex.from_complex(other)
        return log_sum_exp(
            np.array([self.log_magnitude, other.log_magnitude]),
            np.array([self.phase, other.phase]),
        )

    __radd__ = __add__

    def scale_log(self, log_factor: float) -> LogComplex:
        if self.is_zero:
            return self
        return LogComplex(self.log_magnitude + log_factor, self.phase)

    def to_complex(self) -> complex:
        if self.is_zero:
            return 0j
        if self.log_magnitude > 709.0:
            raise OverflowError(f"log magnitude {self.log_magnitude} exceeds float range")
        r = math.exp(self.log_magnitude)
        return complex(r * math.cos(self.phase), r * math.sin(self.phase))

    def __complex__(self):
        return self.to_complex()

    def __str__(self):
        if self.is_zero:
            return "0"
        return f"exp({self.log_magnitude!r})*exp(i*{self.phase!r})"


def log_sum_exp(log_mag: np.ndarray, phase: np.ndarray) -> LogComplex:
    """Max-rescaled sum of ``exp(log_mag + i*phase)`` returned in log form."""
    log_mag = np.asarray(log_mag, dtype=float)
    if log_mag.size == 0:
        return LogComplex.zero()
    finite = np.isfinite(log_mag)
    if not finite.any():
        return LogComplex.zero()
    top = float(log_mag[finite].max())
    w = np.exp(log_mag[finite] - top)
    ph = np.asarray(phase, dtype=float)[finite]
    re = float(np.sum(w * np.cos(ph)))
    im = float(np.sum(w * np.sin(ph)))
    mag = math.hypot(re, im)
    if mag == 0.0:
        return LogComplex.zero()
    return LogComplex(top + math.log(mag), math.atan2(im, re))

