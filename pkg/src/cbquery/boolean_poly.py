"""Multilinear polynomials on the Boolean cube {-1,1}^n.

A polynomial is stored on the Fourier side: a map from subsets S of
{1, ..., n} to real coefficients c_S, so that

    f(x) = sum_S c_S * prod_{i in S} x_i.

Subsets are encoded as integer bitmasks, variable ``i`` occupying bit
``i - 1``.  Cube points are encoded the same way: bit ``i - 1`` of a point
index ``z`` is set exactly when ``x_i = -1``, so the character value is
``(-1) ** popcount(z & S)``.

Norms are computed by exhaustive enumeration of all 2^n cube points.  The
enumeration is capped (``DEFAULT_CAP``); above the cap only the sup-norm has
a fallback, a seeded local search that yields a *lower bound*.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from types import MappingProxyType
from typing import Any, Iterable, Iterator, Mapping, NamedTuple, Sequence

import numpy as np

DEFAULT_CAP = 24
STRUCTURAL_ATOL = 1e-9
NORM_RTOL = 1e-6


class EnumerationCapError(ValueError):
    """Raised when exact cube enumeration is requested above the cap."""


def mask_of(subset: Iterable[int]) -> int:
    subset = tuple(subset)
    mask = 0
    for i in subset:
        if i < 1:
            raise ValueError(f"variable indices start at 1, got {i}")
        bit = 1 << (i - 1)
        if mask & bit:
            raise ValueError(f"repeated variable {i} in subset {subset}")
        mask |= bit
    return mask


def subset_of(mask: int) -> tuple[int, ...]:
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


@dataclass(frozen=True)
class MultilinearPoly:
    """Real multilinear polynomial in ``n`` variables, by Fourier coefficients.

    ``coeffs`` maps bitmasks to coefficients.  Exact zeros are dropped, so
    the zero polynomial has an empty map.  Instances are immutable.
    """

    n: int
    coeffs: Mapping[int, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"variable count must be nonnegative, got {self.n}")
        limit = 1 << self.n
        clean: dict[int, float] = {}
        for mask, c in self.coeffs.items():
            mask = int(mask)
            if mask < 0 or mask >= limit:
                raise ValueError(
                    f"monomial {subset_of(mask)} uses a variable outside 1..{self.n}"
                )
            c = float(c)
            if not math.isfinite(c):
                raise ValueError(f"non-finite coefficient {c} on {subset_of(mask)}")
            if c != 0.0:
                clean[mask] = c
        object.__setattr__(self, "coeffs", MappingProxyType(dict(sorted(clean.items()))))

    # -- construction -------------------------------------------------------

    @classmethod
    def from_terms(cls, n: int, terms: Mapping[Iterable[int], float] | Iterable[tuple[Iterable[int], float]]) -> "MultilinearPoly":
        """Build from ``{subset: coefficient}``; repeated subsets are summed."""
        items = terms.items() if isinstance(terms, Mapping) else terms
        coeffs: dict[int, float] = {}
        for subset, c in items:
            m = mask_of(subset)
            coeffs[m] = coeffs.get(m, 0.0) + float(c)
        return cls(n, coeffs)

    @classmethod
    def monomial(cls, n: int, subset: Iterable[int], c: float = 1.0) -> "MultilinearPoly":
        return cls(n, {mask_of(subset): c})

    @classmethod
    def zero(cls, n: int) -> "MultilinearPoly":
        return cls(n, {})

    # -- inspection -----------------------------------------------------------

    def terms(self) -> Iterator[tuple[tuple[int, ...], float]]:
        for mask, c in self.coeffs.items():
            yield subset_of(mask), c

    def coefficient(self, subset: Iterable[int]) -> float:
        return self.coeffs.get(mask_of(subset), 0.0)

    @property
    def degree(self) -> int:
        return max((m.bit_count() for m in self.coeffs), default=0)

    def is_homogeneous(self, k: int) -> bool:
        return all(m.bit_count() == k for m in self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    def fourier_weight(self) -> float:
        """Sum of squared coefficients (equals ||f||_2^2 by Parseval)."""
        return math.fsum(c * c for c in self.coeffs.values())

    # -- algebra ----------------------------------------------------------------

    def scale(self, lam: float) -> "MultilinearPoly":
        return MultilinearPoly(self.n, {m: lam * c for m, c in self.coeffs.items()})

    def __mul__(self, lam: float) -> "MultilinearPoly":
        if isinstance(lam, MultilinearPoly):
            return NotImplemented
        return self.scale(lam)

    __rmul__ = __mul__

    def __add__(self, other: "MultilinearPoly") -> "MultilinearPoly":
        if not isinstance(other, MultilinearPoly):
            return NotImplemented
        n = max(self.n, other.n)
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out.get(m, 0.0) + c
        return MultilinearPoly(n, out)

    def with_variables(self, n: int) -> "MultilinearPoly":
        """Same polynomial viewed in ``n >= self.n`` variables."""
        if n < self.n:
            raise ValueError(f"cannot shrink from {self.n} to {n} variables")
        return MultilinearPoly(n, self.coeffs)

    def times_monomial(self, subset: Iterable[int], n: int | None = None) -> "MultilinearPoly":
        """Multiply by chi_T and reduce with x_i^2 = 1."""
        t = mask_of(subset)
        n = max(self.n, t.bit_length()) if n is None else n
        return MultilinearPoly(n, {m ^ t: c for m, c in self.coeffs.items()})

    # -- serialization --------------------------------------------------------

    def to_json(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "coeffs": [{"S": list(subset_of(m)), "c": c} for m, c in self.coeffs.items()],
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "MultilinearPoly":
        n = int(data["n"])
        return cls.from_terms(n, [(tuple(int(i) for i in t["S"]), float(t["c"])) for t in data["coeffs"]])

    def __repr__(self) -> str:
        if not self.coeffs:
            return f"MultilinearPoly(n={self.n}, 0)"
        parts = []
        for subset, c in list(self.terms())[:8]:
            mono = "*".join(f"x{i}" for i in subset) or "1"
            parts.append(f"{c:+g}*{mono}")
        more = " ..." if len(self.coeffs) > 8 else ""
        return f"MultilinearPoly(n={self.n}, {' '.join(parts)}{more})"


@dataclass(frozen=True)
class RawPoly:
    """Polynomial with arbitrary nonnegative integer exponents.

    ``terms`` holds ``(alpha, coefficient)`` pairs with pairwise distinct
    exponent vectors ``alpha`` of length ``n``.
    """

    n: int
    terms: tuple[tuple[tuple[int, ...], float], ...] = ()

    def __post_init__(self):
        seen = set()
        clean = []
        for alpha, c in self.terms:
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != self.n:
                raise ValueError(f"exponent vector {alpha} has length {len(alpha)}, expected {self.n}")
            if any(a < 0 for a in alpha):
                raise ValueError(f"negative exponent in {alpha}")
            if alpha in seen:
                raise ValueError(f"duplicate exponent vector {alpha}")
            seen.add(alpha)
            clean.append((alpha, float(c)))
        object.__setattr__(self, "terms", tuple(clean))

    @classmethod
    def from_dict(cls, n: int, terms: Mapping[Sequence[int], float]) -> "RawPoly":
        merged: dict[tuple[int, ...], float] = {}
        for alpha, c in terms.items():
            alpha = tuple(alpha)
            merged[alpha] = merged.get(alpha, 0.0) + float(c)
        return cls(n, tuple(merged.items()))

    def coefficient(self, alpha: Sequence[int]) -> float:
        alpha = tuple(alpha)
        for a, c in self.terms:
            if a == alpha:
                return c
        return 0.0

    def fix_to_one(self, variables: Iterable[int]) -> "RawPoly":
        """Substitute 1 for the given (1-based) variables and drop them.

        Terms that collapse onto the same remaining exponent vector are
        merged, which is how ``h(x, 1)`` arises from a form ``h(x, z)``.
        """
        fixed = {i - 1 for i in variables}
        keep = [j for j in range(self.n) if j not in fixed]
        merged: dict[tuple[int, ...], float] = {}
        for alpha, c in self.terms:
            beta = tuple(alpha[j] for j in keep)
            merged[beta] = merged.get(beta, 0.0) + c
        return RawPoly(len(keep), tuple(merged.items()))

    def evaluate(self, x: Sequence[float]) -> float:
        _check_length(x, self.n)
        total = 0.0
        for alpha, c in self.terms:
            total += c * math.prod(xi ** a for xi, a in zip(x, alpha))
        return total

    def to_json(self) -> dict[str, Any]:
        return {"n": self.n, "terms": [{"alpha": list(a), "c": c} for a, c in self.terms]}

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "RawPoly":
        return cls(int(data["n"]), tuple((tuple(t["alpha"]), float(t["c"])) for t in data["terms"]))


def _check_length(x: Sequence[Any], n: int) -> None:
    if len(x) != n:
        raise ValueError(f"point has length {len(x)}, expected {n}")


def evaluate(f: MultilinearPoly, x: Sequence[int]) -> float:
    """Value of ``f`` at a sign vector ``x``."""
    _check_length(x, f.n)
    z = 0
    for i, xi in enumerate(x):
        if xi == -1:
            z |= 1 << i
        elif xi != 1:
            raise ValueError(f"entry {i + 1} of the point is {xi}, expected +1 or -1")
    total = 0.0
    for mask, c in f.coeffs.items():
        total += -c if (z & mask).bit_count() & 1 else c
    return total


def multilinear_reduce(g: RawPoly) -> MultilinearPoly:
    """Reduce with x_i^2 = 1: keep each exponent's parity, merge terms."""
    coeffs: dict[int, float] = {}
    for alpha, c in g.terms:
        mask = 0
        for j, a in enumerate(alpha):
            if a & 1:
                mask |= 1 << j
        coeffs[mask] = coeffs.get(mask, 0.0) + c
    return MultilinearPoly(g.n, coeffs)


def reduction_exhibit() -> RawPoly:
    """Quartic form h(x1, x2, z1, z2) whose restriction h(x, 1) vanishes on the cube.

    Coefficients: x1^2 x2^2 -> 1, z1^4 -> 1, x1^2 z1^2 -> -1, x2^2 z1^2 -> -1.
    Setting z = 1 gives x1^2 x2^2 - x1^2 - x2^2 + 1, which is 0 on {-1,1}^2
    although its raw coefficient on x1^2 x2^2 is 1.
    """
    return RawPoly.from_dict(
        4,
        {(2, 2, 0, 0): 1.0, (0, 0, 4, 0): 1.0, (2, 0, 2, 0): -1.0, (0, 2, 2, 0): -1.0},
    )


# -- exhaustive enumeration ----------------------------------------------------


def _character_table(masks: np.ndarray, bits: int) -> np.ndarray:
    """(len(masks), 2**bits) table of (-1)^popcount(z & mask)."""
    z = np.arange(1 << bits, dtype=np.uint64)
    parity = np.bitwise_count(masks[:, None] & z[None, :]) & 1
    return 1.0 - 2.0 * parity.astype(np.float64)


def cube_values(f: MultilinearPoly, cap: int = DEFAULT_CAP) -> np.ndarray:
    """All 2^n values of ``f``, indexed by the point encoding ``z``.

    The sum over monomials factors through a split of the variables into a
    high and a low half, which turns enumeration into one dense matrix
    product.  Integer coefficients give exact results in float64.
    """
    n = f.n
    if n > cap:
        raise EnumerationCapError(f"exact enumeration over 2^{n} points exceeds the cap 2^{cap}")
    if not f.coeffs:
        return np.zeros(1 << n)
    masks = np.fromiter(f.coeffs.keys(), dtype=np.uint64, count=len(f.coeffs))
    c = np.fromiter(f.coeffs.values(), dtype=np.float64, count=len(f.coeffs))
    low = n // 2
    high = n - low
    lo_table = _character_table(masks & np.uint64((1 << low) - 1), low)
    hi_table = _character_table(masks >> np.uint64(low), high)
    values = (hi_table.T * c) @ lo_table
    return values.reshape(-1)


def point_of(z: int, n: int) -> tuple[int, ...]:
    return tuple(-1 if (z >> i) & 1 else 1 for i in range(n))


class NormBound(NamedTuple):
    value: float
    exact: bool
    argmax: tuple[int, ...] | None = None

    @property
    def label(self) -> str:
        return "exact" if self.exact else "lower bound only"


def p_norm(f: MultilinearPoly, p: float, cap: int = DEFAULT_CAP) -> float:
    """||f||_p by exact enumeration of the cube (``p`` in [1, inf])."""
    if not (p >= 1):
        raise ValueError(f"p must lie in [1, inf], got {p}")
    values = cube_values(f, cap)
    if math.isinf(p):
        return float(np.max(np.abs(values)))
    a = np.abs(values)
    if p == 1:
        return float(np.mean(a))
    if p == 2:
        return math.sqrt(float(np.mean(a * a)))
    return float(np.mean(a**p)) ** (1.0 / p)


def sup_norm(
    f: MultilinearPoly,
    cap: int = DEFAULT_CAP,
    sampling: bool = False,
    seed: int = 0,
    restarts: int = 256,
) -> NormBound:
    """||f||_inf, exact up to the cap.

    Above the cap this raises unless ``sampling`` is set, in which case a
    seeded random-restart greedy search returns a value labelled as a
    lower bound.
    """
    if f.n <= cap:
        values = cube_values(f, cap)
        k = int(np.argmax(np.abs(values)))
        return NormBound(float(abs(values[k])), True, point_of(k, f.n))
    if not sampling:
        raise EnumerationCapError(
            f"n={f.n} exceeds the exact enumeration cap {cap}; enable sampling for a lower bound"
        )
    value, point = _local_search_sup(f, seed, restarts)
    return NormBound(value, False, point)


def _local_search_sup(f: MultilinearPoly, seed: int, restarts: int) -> tuple[float, tuple[int, ...]]:
    n = f.n
    if not f.coeffs:
        return 0.0, (1,) * n
    subsets = [subset_of(m) for m in f.coeffs]
    c = np.fromiter(f.coeffs.values(), dtype=np.float64, count=len(subsets))
    incidence = np.zeros((len(subsets), n), dtype=np.int64)
    for row, s in enumerate(subsets):
        incidence[row, [i - 1 for i in s]] = 1
    rng = np.random.default_rng(seed)
    best, best_x = -1.0, None
    for _ in range(restarts):
        neg = rng.integers(0, 2, size=n)
        for _ in range(10 * n + 10):
            chi = 1.0 - 2.0 * ((incidence @ neg) & 1)
            value = float(c @ chi)
            # flipping x_i negates every monomial containing i
            flipped = value - 2.0 * ((c * chi) @ incidence)
            i = int(np.argmax(np.abs(flipped)))
            if abs(flipped[i]) <= abs(value):
                break
            neg[i] ^= 1
        if abs(value) > best:
            best, best_x = abs(value), tuple(int(1 - 2 * b) for b in neg)
    return best, best_x


# -- Fourier-side identities ------------------------------------------------------


def hat_seq(phi: MultilinearPoly, seq: Sequence[int]) -> float:
    """E_x phi(x) * x_{i_1} ... x_{i_t}, with the convention x_{n+1} = 1.

    Repeated indices cancel pairwise, so this is the Fourier coefficient of
    ``phi`` at the symmetric difference of the indices in 1..n.
    """
    mask = 0
    for i in seq:
        if not 1 <= i <= phi.n + 1:
            raise ValueError(f"sequence index {i} outside 1..{phi.n + 1}")
        if i <= phi.n:
            mask ^= 1 << (i - 1)
    return phi.coeffs.get(mask, 0.0)


def character_inner(n: int, s: Iterable[int], t: Iterable[int]) -> float:
    """E_x chi_S(x) chi_T(x), summed exactly in integers over the cube."""
    ms, mt = mask_of(s), mask_of(t)
    if max(ms.bit_length(), mt.bit_length()) > n:
        raise ValueError(f"subsets must lie in 1..{n}")
    total = 0
    for z in range(1 << n):
        total += -1 if ((z & ms).bit_count() + (z & mt).bit_count()) & 1 else 1
    return total / (1 << n)


@dataclass
class OrthogonalityReport:
    n: int
    pairs: int
    max_deviation: float

    @property
    def passed(self) -> bool:
        return self.max_deviation == 0.0


def orthogonality_check(n: int) -> OrthogonalityReport:
    """Exhaustively compare E chi_S chi_T with delta_{S,T} for all S, T in [n].

    The Gram matrix of the full character table is formed as an integer
    matrix product (exact in float64 at these sizes).
    """
    if not 0 <= n <= 12:
        raise ValueError(f"orthogonality scan supports n <= 12, got {n}")
    masks = np.arange(1 << n, dtype=np.uint64)
    table = _character_table(masks, n)
    gram = table @ table.T
    deviation = np.abs(gram - (1 << n) * np.eye(1 << n)).max() / (1 << n)
    return OrthogonalityReport(n, 1 << (2 * n), float(deviation))


def all_subsets(n: int, k: int) -> Iterator[tuple[int, ...]]:
    return combinations(range(1, n + 1), k)
