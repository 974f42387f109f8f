"""The counterexample families: random sign cubic forms and Moebius AP forms.

Also holds the additive-combinatorics side: the Moebius function, square-free
counts, the Gowers U^3 norm on Z_n and the generalized von Neumann check
||f||_inf <= n^2 ||f_0||_{U^3} for AP forms.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Iterator, Sequence

import numpy as np

from .boolean_poly import DEFAULT_CAP, MultilinearPoly, NormBound, mask_of, p_norm, sup_norm
from .slices import delta

MASK64 = (1 << 64) - 1
GOWERS_CAP = 512


class CoprimalityError(ValueError):
    """The AP-form von Neumann bound needs gcd(n, 6) = 1."""


# -- portable PRNG ---------------------------------------------------------------


def splitmix64(seed: int) -> Iterator[int]:
    """SplitMix64 stream of 64-bit outputs.

    state <- state + 0x9E3779B97F4A7C15 (mod 2^64)
    z <- state
    z <- (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 (mod 2^64)
    z <- (z ^ (z >> 27)) * 0x94D049BB133111EB (mod 2^64)
    output z ^ (z >> 31)
    """
    state = seed & MASK64
    while True:
        state = (state + 0x9E3779B97F4A7C15) & MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        yield z ^ (z >> 31)


def random_cubic(n: int, seed: int) -> MultilinearPoly:
    """Cubic form with independent uniform sign coefficients on all 3-subsets.

    Subsets are visited in lexicographic order; each draws one SplitMix64
    output and takes sign -1 exactly when its top bit is set.
    """
    if not 3 <= n <= 64:
        raise ValueError(f"random_cubic needs 3 <= n <= 64, got {n}")
    stream = splitmix64(seed)
    coeffs = {}
    for s in combinations(range(1, n + 1), 3):
        coeffs[mask_of(s)] = -1.0 if next(stream) >> 63 else 1.0
    return MultilinearPoly(n, coeffs)


def chsh_form() -> MultilinearPoly:
    """(x1 (x3 + x4) + x2 (x3 - x4)) / 2."""
    return MultilinearPoly.from_terms(4, {(1, 3): 0.5, (1, 4): 0.5, (2, 3): 0.5, (2, 4): -0.5})


# -- functions on Z_n ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ZnFunction:
    """A real function on Z_n, stored as its values at 0, ..., n-1."""

    n: int
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        if v.shape != (self.n,):
            raise ValueError(f"expected {self.n} values, got shape {v.shape}")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __call__(self, a: int) -> float:
        return float(self.values[a % self.n])

    def is_bounded(self) -> bool:
        return bool(np.all(np.abs(self.values) <= 1.0))

    def scale(self, lam: float) -> "ZnFunction":
        return ZnFunction(self.n, lam * self.values)

    @classmethod
    def constant(cls, n: int, c: float) -> "ZnFunction":
        return cls(n, np.full(n, float(c)))

    @classmethod
    def indicator(cls, n: int, support: Iterable[int]) -> "ZnFunction":
        v = np.zeros(n)
        for a in support:
            v[a % n] = 1.0
        return cls(n, v)

    def to_json(self) -> dict:
        return {"n": self.n, "values": self.values.tolist()}


def _mobius_table(limit: int) -> list[int]:
    """mu(0..limit) by a linear sieve, with mu(0) set to 0."""
    mu = [0] * (limit + 1)
    if limit >= 1:
        mu[1] = 1
    primes: list[int] = []
    composite = [False] * (limit + 1)
    for i in range(2, limit + 1):
        if not composite[i]:
            primes.append(i)
            mu[i] = -1
        for p in primes:
            ip = i * p
            if ip > limit:
                break
            composite[ip] = True
            if i % p == 0:
                mu[ip] = 0
                break
            mu[ip] = -mu[i]
    return mu


def mobius(n: int) -> ZnFunction:
    """The Moebius function on {0, ..., n-1}, identified with Z_n."""
    if n < 2:
        raise ValueError(f"mobius needs n >= 2, got {n}")
    return ZnFunction(n, np.array(_mobius_table(n - 1), dtype=np.float64))


def squarefree_count(n: int) -> int:
    """Number of square-free integers in 1..n."""
    if n < 1:
        raise ValueError(f"squarefree_count needs n >= 1, got {n}")
    return sum(m * m for m in _mobius_table(n))


# -- AP forms ---------------------------------------------------------------------


@dataclass(frozen=True)
class APFormIndex:
    """Flattening of the variables [3] x Z_n: (i, a) -> (i - 1) n + a + 1."""

    n: int

    def var(self, i: int, a: int) -> int:
        if i not in (1, 2, 3):
            raise ValueError(f"block index must be 1, 2 or 3, got {i}")
        return (i - 1) * self.n + a % self.n + 1

    def pair(self, v: int) -> tuple[int, int]:
        if not 1 <= v <= 3 * self.n:
            raise ValueError(f"variable {v} outside 1..{3 * self.n}")
        i, a = divmod(v - 1, self.n)
        return i + 1, a


def ap_form(n: int, f0: ZnFunction) -> MultilinearPoly:
    """sum_{a,b in Z_n} x(1,a) x(2,a+b) x(3,a+2b) f0(a+3b) on 3n variables."""
    if f0.n != n:
        raise ValueError(f"f0 is defined on Z_{f0.n}, expected Z_{n}")
    if n < 2:
        raise ValueError(f"ap_form needs n >= 2, got {n}")
    if math.gcd(n, 6) != 1:
        warnings.warn(
            f"n={n} is not coprime to 6; the von Neumann bound does not apply",
            stacklevel=2,
        )
    idx = APFormIndex(n)
    coeffs = {}
    for a in range(n):
        for b in range(n):
            s = (idx.var(1, a), idx.var(2, a + b), idx.var(3, a + 2 * b))
            coeffs[mask_of(s)] = f0(a + 3 * b)
    return MultilinearPoly(3 * n, coeffs)


def gowers_u3(g: ZnFunction) -> float:
    """||g||_{U^3} = (E_{a,b,c,d} prod_{w in {0,1}^3} g(a + w.(b,c,d)))^(1/8).

    The d-average is summed in closed form: for fixed b, c put
    h(a) = g(a) g(a+b) g(a+c) g(a+b+c); then E_{a,d} h(a) h(a+d) = (E_a h)^2.
    That leaves an exact O(n^3) sum.
    """
    n = g.n
    if n > GOWERS_CAP:
        raise ValueError(f"gowers_u3 is exact only up to n={GOWERS_CAP}, got {n}")
    v = g.values
    shift = (np.arange(n)[None, :] + np.arange(n)[:, None]) % n  # [c, a] -> a + c
    total = 0.0
    for b in range(n):
        gb = v * np.roll(v, -b)
        inner = (gb[None, :] * gb[shift]).mean(axis=1)
        total += float(np.sum(inner * inner))
    avg = total / (n * n)
    if avg < -1e-12:
        raise ArithmeticError(f"negative U^3 average {avg}")
    return max(avg, 0.0) ** 0.125


@dataclass
class VonNeumannReport:
    n: int
    sup_norm: NormBound
    u3: float
    bound: float
    ratio: float

    @property
    def exact(self) -> bool:
        return self.sup_norm.exact

    @property
    def passed(self) -> bool:
        return self.ratio <= 1 + 1e-9

    @property
    def conclusive(self) -> bool:
        # a sampled sup-norm is only a lower bound: only a violation is conclusive
        return self.exact or not self.passed

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "sup_norm": self.sup_norm.value,
            "sup_norm_kind": self.sup_norm.label,
            "u3": self.u3,
            "bound": self.bound,
            "ratio": self.ratio,
            "passed": self.passed,
            "conclusive": self.conclusive,
        }


def check_von_neumann(
    n: int, f0: ZnFunction, cap: int = DEFAULT_CAP, sampling: bool = False, seed: int = 0
) -> VonNeumannReport:
    """Compare ||f||_inf with n^2 ||f0||_{U^3} for the AP form of ``f0``."""
    if math.gcd(n, 6) != 1:
        raise CoprimalityError(f"the generalized von Neumann inequality needs gcd(n, 6) = 1, got n={n}")
    f = ap_form(n, f0)
    sup = sup_norm(f, cap=cap, sampling=sampling, seed=seed)
    u3 = gowers_u3(f0)
    bound = n * n * u3
    ratio = sup.value / bound if bound > 0 else (0.0 if sup.value == 0 else math.inf)
    return VonNeumannReport(n, sup, u3, bound, ratio)


# -- lower-bound ratios --------------------------------------------------------------


def counterexample_ratio(f: MultilinearPoly, cap: int = DEFAULT_CAP) -> float:
    """||f||_2^2 / Delta(f), the ccb-norm lower bound for x_0 f."""
    d = delta(f)
    if d == 0:
        raise ValueError("Delta(f) = 0: the form is zero")
    weight = p_norm(f, 2, cap) ** 2 if f.n <= cap else f.fourier_weight()
    return weight / d


def normalized_ratio(f: MultilinearPoly, cap: int = DEFAULT_CAP) -> float:
    """||f||_2^2 / (Delta(f) ||f||_inf): the ratio for the bounded form f / ||f||_inf."""
    return counterexample_ratio(f, cap) / sup_norm(f, cap=cap).value


def random_ratio_trend(ns: Sequence[int], seeds: Sequence[int], cap: int = DEFAULT_CAP) -> dict[int, list[float]]:
    return {n: [normalized_ratio(random_cubic(n, s), cap) for s in seeds] for n in ns}
