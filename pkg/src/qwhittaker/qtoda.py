"""q-deformed Toda Hamiltonians as shift operators on lattice functions.

``H_r`` sums over index subsets ``i_1 < ... < i_r`` of ``{1..n}``; each term
shifts ``p`` by ``e_{i_1} + ... + e_{i_r}`` and carries the coefficient
``prod_j X_{i_j}^{1 - [i_{j+1} = i_j + 1]}`` (with ``i_{r+1} = n + 1``), where
``X_i = 1 - q^{p_i - p_{i+1} + 1}`` for ``i < n`` and ``X_n = 1``.  The
coefficients are taken at the unshifted ``p``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Sequence

from .qarith import LaurentPoly
from .qpsi import QWhittakerValue, SpectralParams, psi_direct, q_backend, zero_value


@dataclass(frozen=True)
class HamiltonianSpec:
    rank: int
    order: int

    def __post_init__(self):
        if not 1 <= self.order <= self.rank:
            raise ValueError(f"Hamiltonian order must be in 1..{self.rank}, got {self.order}")


@dataclass
class LatticeFunction:
    """A function on ``Z^rank``; values are cached so repeated lookups agree."""

    evaluator: Callable[[tuple[int, ...]], Any]
    rank: int
    zero: Any = 0
    _cache: dict = field(default_factory=dict, repr=False)

    def __call__(self, p: Sequence[int]):
        p = tuple(int(v) for v in p)
        if len(p) != self.rank:
            raise ValueError(f"expected a point of length {self.rank}, got {p}")
        hit = self._cache.get(p)
        if hit is None:
            hit = self._cache.setdefault(p, self.evaluator(p))
        return hit

    @classmethod
    def from_psi(cls, spec: SpectralParams, q, threads: int = 1) -> LatticeFunction:
        """``p -> Psi_z(p)`` (zero off the dominant cone)."""
        zero = zero_value(spec, q)
        return cls(lambda p: psi_direct(p, spec, q, threads=threads), spec.nvars, zero)


def subset_coefficient_exponents(subset: Sequence[int], n: int) -> list[int]:
    """1-based indices ``i_j`` whose ``X`` factor survives in the term for ``subset``."""
    out = []
    for j, i in enumerate(subset):
        nxt = subset[j + 1] if j + 1 < len(subset) else n + 1
        if nxt - i != 1:
            out.append(i)
    return out


def apply_hamiltonian(h: HamiltonianSpec, f: LatticeFunction, p: Sequence[int], q) -> QWhittakerValue:
    """``(H_r f)(p)`` for the q-Toda Hamiltonian ``H_r`` of rank ``h.rank``."""
    n = h.rank
    p = tuple(int(v) for v in p)
    if len(p) != n:
        raise ValueError(f"point {p} does not have length {n}")
    qb = q_backend(q)
    total = None
    for subset in itertools.combinations(range(1, n + 1), h.order):
        coeff = 1
        for i in subset_coefficient_exponents(subset, n):
            if i < n:
                coeff = coeff * (1 - qb.power(p[i - 1] - p[i] + 1))
        shifted = list(p)
        for i in subset:
            shifted[i - 1] += 1
        term = f(shifted) * coeff
        total = term if total is None else total + term
    return total


def eigenvalue(r: int, spec: SpectralParams):
    """Elementary symmetric polynomial ``e_r(z_1..z_n)`` in the mode of ``spec``."""
    n = spec.nvars
    if not 1 <= r <= n:
        raise ValueError(f"order must be in 1..{n}, got {r}")
    subsets = itertools.combinations(range(n), r)
    if spec.mode == "formal":
        terms = {tuple(1 if i in s else 0 for i in range(n)): 1 for s in subsets}
        return LaurentPoly(terms, n)
    z = spec.values if spec.mode == "exact" else spec.complex_values()
    total = 0
    for s in subsets:
        prod = 1
        for i in s:
            prod = prod * z[i]
        total = total + prod
    return total


def compose(h: HamiltonianSpec, f: LatticeFunction, q) -> LatticeFunction:
    """The lattice function ``H f``."""
    return LatticeFunction(lambda p: apply_hamiltonian(h, f, p, q), f.rank, f.zero)


@dataclass(frozen=True)
class EigenReport:
    weight: tuple[int, ...]
    q: Any
    residuals: tuple[tuple[int, Any], ...]

    @property
    def ok(self) -> bool:
        return all(_is_exact_zero(res) for _, res in self.residuals)

    def to_dict(self) -> dict:
        return {
            "weight": list(self.weight),
            "q": str(self.q),
            "residuals": [{"r": r, "residual": str(res)} for r, res in self.residuals],
            "status": "ok" if self.ok else "failed",
        }


def _is_exact_zero(v) -> bool:
    if isinstance(v, LaurentPoly):
        return v.is_zero()
    if hasattr(v, "is_zero"):
        z = v.is_zero
        return z() if callable(z) else z
    return v == 0


def verify_eigen(p: Sequence[int], q, spec: SpectralParams | None = None, threads: int = 1) -> EigenReport:
    """Residuals ``H_r Psi(p) - e_r(z) Psi(p)`` for ``r = 1..n``.

    By default ``z`` is formal, so each residual is a Laurent polynomial with
    exact coefficients; a correct eigenfunction gives exactly zero for every r.
    """
    p = tuple(int(v) for v in p)
    n = len(p)
    if spec is None:
        spec = SpectralParams.formal(n)
    if isinstance(q, (int, str)):
        q = Fraction(q)
    psi = LatticeFunction.from_psi(spec, q, threads=threads)
    base = psi(p)
    residuals = []
    for r in range(1, n + 1):
        lhs = apply_hamiltonian(HamiltonianSpec(n, r), psi, p, q)
        residuals.append((r, lhs - eigenvalue(r, spec) * base))
    return EigenReport(p, q, tuple(residuals))
