"""Explicit commuting contractions realizing cubic and bilinear forms.

``build_trilinear`` gives, for a cubic form f, nilpotent commuting
contractions A_1..A_n of size 2n+2 with

    <u, A_i A_j A_k v> = c_{ijk} / Delta(f)

for distinct i, j, k, while all lower moments vanish.  Every A_i is a block
shift: it maps grading level l (levels 0..3 with sizes 1, n, n, 1) into
level l + 1.  That grading is recorded on the tuple, so the vanishing of
any product of four shifts is a structural fact rather than a numerical one.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import Any, Mapping, Sequence

import numpy as np

from ._report import CheckReport
from .boolean_poly import MultilinearPoly, subset_of
from .constructions import chsh_form
from .slices import all_slices, delta, require_cubic

NORM_SLACK = 1e-12
UNIT_TOL = 1e-12
COMMUTATOR_TOL = 1e-12
MOMENT_TOL = 1e-10
EXHAUSTIVE_MAX_N = 8


@dataclass(frozen=True, eq=False)
class CommutingTuple:
    """Matrices ``A(label)`` for labels in ``alphabet`` plus vectors u, v.

    ``levels[r]`` is the grading level of coordinate r, and ``shift_labels``
    lists the labels whose matrix is known to map level l into level l + 1.
    """

    d: int
    alphabet: tuple[int, ...]
    matrices: np.ndarray
    u: np.ndarray
    v: np.ndarray
    levels: np.ndarray | None = None
    shift_labels: tuple[int, ...] = ()

    def __post_init__(self):
        mats = np.array(self.matrices, dtype=np.float64)
        if mats.shape != (len(self.alphabet), self.d, self.d):
            raise ValueError(f"matrix stack has shape {mats.shape}, expected {(len(self.alphabet), self.d, self.d)}")
        object.__setattr__(self, "matrices", mats)
        object.__setattr__(self, "u", np.asarray(self.u, dtype=np.float64))
        object.__setattr__(self, "v", np.asarray(self.v, dtype=np.float64))
        object.__setattr__(self, "alphabet", tuple(int(a) for a in self.alphabet))

    def index(self, label: int) -> int:
        try:
            return self.alphabet.index(label)
        except ValueError:
            raise KeyError(f"label {label} not in alphabet {self.alphabet}") from None

    def A(self, label: int) -> np.ndarray:
        return self.matrices[self.index(label)]

    def moment(self, seq: Sequence[int]) -> float:
        """<u, A(i_1) ... A(i_t) v>."""
        vec = self.v
        for label in reversed(seq):
            vec = self.A(label) @ vec
        return float(self.u @ vec)

    def extended(self) -> "CommutingTuple":
        """Append A(0) = I and A(n+1) = 0 to a tuple labelled 1..n."""
        n = len(self.alphabet)
        if self.alphabet != tuple(range(1, n + 1)):
            raise ValueError(f"expected alphabet 1..{n}, got {self.alphabet}")
        mats = np.concatenate([np.eye(self.d)[None], self.matrices, np.zeros((1, self.d, self.d))])
        return replace(self, alphabet=tuple(range(0, n + 2)), matrices=mats)

    def with_matrix(self, label: int, M: np.ndarray) -> "CommutingTuple":
        mats = self.matrices.copy()
        mats[self.index(label)] = M
        return replace(self, matrices=mats, shift_labels=tuple(s for s in self.shift_labels if s != label))

    def to_json(self) -> dict[str, Any]:
        return {
            "d": self.d,
            "alphabet": list(self.alphabet),
            "matrices": [m.tolist() for m in self.matrices],
            "u": self.u.tolist(),
            "v": self.v.tolist(),
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "CommutingTuple":
        return cls(int(data["d"]), tuple(data["alphabet"]), np.array(data["matrices"]), data["u"], data["v"])


def build_trilinear(f: MultilinearPoly) -> CommutingTuple:
    """Block-shift matrices A_1..A_n (size 2n+2) for a nonzero cubic form.

    Coordinates: 0 | 1..n | n+1..2n | 2n+1.  A_i carries e_i from level 0 to
    level 1, W_i^T = (M_i / Delta(f))^T from level 1 to 2, and e_i^T from
    level 2 to 3.  u = e_{2n+1}, v = e_0 (0-based).
    """
    require_cubic(f)
    dlt = delta(f)
    if dlt == 0:
        raise ValueError("Delta(f) = 0: cannot normalize the slices of a zero form")
    n = f.n
    d = 2 * n + 2
    mats = np.zeros((n, d, d))
    for s in all_slices(f):
        i = s.i - 1
        W = s.M / dlt
        mats[i, 1 + i, 0] = 1.0
        mats[i, n + 1 : 2 * n + 1, 1 : n + 1] = W.T
        mats[i, 2 * n + 1, n + 1 + i] = 1.0
    levels = np.array([0] + [1] * n + [2] * n + [3])
    u = np.zeros(d)
    u[2 * n + 1] = 1.0
    v = np.zeros(d)
    v[0] = 1.0
    alphabet = tuple(range(1, n + 1))
    return CommutingTuple(d, alphabet, mats, u, v, levels, alphabet)


def _bilinear_tuple(f: MultilinearPoly, scale: float) -> CommutingTuple:
    """Size n+2 shifts with <e_last, A(i) A(j) e_0> = scale * c_{ij}; A(n+1) = 0."""
    n = f.n
    d = n + 2
    mats = np.zeros((n + 1, d, d))
    for i in range(1, n + 1):
        w = np.zeros(n)
        for j in range(1, n + 1):
            if j != i:
                w[j - 1] = f.coeffs.get((1 << (i - 1)) | (1 << (j - 1)), 0.0)
        mats[i - 1, 1 : n + 1, 0] = scale * w
        mats[i - 1, n + 1, i] = 1.0
    u = np.zeros(d)
    u[n + 1] = 1.0
    v = np.zeros(d)
    v[0] = 1.0
    levels = np.array([0] + [1] * n + [2])
    return CommutingTuple(d, tuple(range(1, n + 2)), mats, u, v, levels, tuple(range(1, n + 2)))


def build_chsh() -> CommutingTuple:
    """6x6 tuple for the CHSH form with A(5) = 0 and w_i = sqrt(2) sum_j c_ij e_j."""
    return _bilinear_tuple(chsh_form(), math.sqrt(2.0))


# -- verification ---------------------------------------------------------------------


def _moment_tensors(t: CommutingTuple, depth: int) -> list[np.ndarray]:
    """List of arrays T_k with T_k[i_1, ..., i_k] = <u, A(i_1) ... A(i_k) v> (by position)."""
    A = t.matrices
    m = A.shape[0]
    tensors = []
    right = t.v[None, :]  # shape (1, d) for k = 0
    for k in range(1, depth + 1):
        right = np.einsum("iab,jb->ija", A, right.reshape(-1, t.d)).reshape((m,) * k + (t.d,))
        tensors.append(right @ t.u)
    return tensors


def verify_tuple(t: CommutingTuple, f: MultilinearPoly) -> CheckReport:
    """Check the contraction/commutation invariants and the moment identities.

    Moments of order 1 and 2 must vanish for all index tuples, A_i^2 must be
    zero, and third moments must equal c_{ijk} / Delta(f) for distinct
    indices (zero otherwise).
    """
    require_cubic(f)
    n = f.n
    missing = set(range(1, n + 1)) - set(t.alphabet)
    if missing:
        raise ValueError(f"tuple alphabet does not cover labels {sorted(missing)}")
    idx = [t.index(i) for i in range(1, n + 1)]
    A = t.matrices[idx]
    dlt = delta(f)

    report = CheckReport("Varopoulos tuple")
    norms = [float(np.linalg.norm(M, 2)) for M in t.matrices]
    report.add("max operator norm", max(norms, default=0.0), 1 + NORM_SLACK)
    report.add("|‖u‖ - 1|", abs(np.linalg.norm(t.u) - 1), UNIT_TOL)
    report.add("|‖v‖ - 1|", abs(np.linalg.norm(t.v) - 1), UNIT_TOL)
    report.add("|<u, v>|", abs(float(t.u @ t.v)), UNIT_TOL)
    comm = 0.0
    for a in range(len(t.matrices)):
        for b in range(a + 1, len(t.matrices)):
            X, Y = t.matrices[a], t.matrices[b]
            comm = max(comm, float(np.linalg.norm(X @ Y - Y @ X, "fro")))
    report.add("max commutator (Frobenius)", comm, COMMUTATOR_TOL)

    squares = np.einsum("iab,ibc->iac", A, A)
    report.add("max |A_i^2|", float(np.abs(squares).max(initial=0.0)), MOMENT_TOL)

    sub = CommutingTuple(t.d, tuple(range(1, n + 1)), A, t.u, t.v)
    m1, m2, m3 = _moment_tensors(sub, 3)
    report.add("max |<u, A_i v>|", float(np.abs(m1).max(initial=0.0)), MOMENT_TOL)
    report.add("max |<u, A_i A_j v>|", float(np.abs(m2).max(initial=0.0)), MOMENT_TOL)
    expected = np.zeros((n,) * 3)
    for mask, c in f.coeffs.items():
        for perm in itertools.permutations(v - 1 for v in subset_of(mask)):
            expected[perm] = c / dlt
    report.add("max third-moment error", float(np.abs(m3 - expected).max(initial=0.0)), MOMENT_TOL)
    report.details.update(n=n, d=t.d, delta=dlt)
    return report


def quartic_moment(t: CommutingTuple, f: MultilinearPoly) -> float:
    """<u, h(A_0, ..., A_{n+1}) v> for h = x_0 f, with A_0 = I and A_{n+1} = 0."""
    require_cubic(f)
    n = f.n
    if t.alphabet == tuple(range(1, n + 1)):
        t = t.extended()
    elif t.alphabet != tuple(range(0, n + 2)):
        raise ValueError(f"alphabet {t.alphabet} matches neither 1..{n} nor 0..{n + 1}")
    total = 0.0
    for subset, c in f.terms():
        total += c * t.moment((0,) + subset)
    return total


def grading_is_exact(t: CommutingTuple) -> bool:
    """True when every shift label's matrix is supported on (level l+1, level l) pairs."""
    if t.levels is None or not t.shift_labels:
        return False
    allowed = t.levels[:, None] == t.levels[None, :] + 1
    return all(not np.any(t.A(label)[~allowed]) for label in t.shift_labels)


def _is_special(seq: Sequence[int], n: int) -> bool:
    """Multiset {0} u S with S a 3-subset of [n]."""
    s = sorted(seq)
    return s[0] == 0 and 1 <= s[1] < s[2] < s[3] <= n


def four_index_vanishing(
    t: CommutingTuple,
    exhaustive_max_n: int = EXHAUSTIVE_MAX_N,
    samples: int = 100_000,
    seed: int = 0,
) -> CheckReport:
    """<u, A_a A_b A_c A_d v> = 0 for every sequence over 0..n+1 except {0} u S.

    Exhaustive for n <= ``exhaustive_max_n``; otherwise a seeded uniform
    sample of ``samples`` sequences.  Also confirms that every product of
    four shift matrices is exactly zero.
    """
    m = len(t.alphabet)
    n = m - 2
    if t.alphabet != tuple(range(0, n + 2)):
        raise ValueError("four_index_vanishing expects an extended tuple labelled 0..n+1")
    report = CheckReport("four-index vanishing")
    if n <= exhaustive_max_n:
        T = _moment_tensors(t, 4)[3]
        grid = np.indices((m,) * 4).reshape(4, -1).T
        special = np.array([_is_special(s, n) for s in grid]).reshape(T.shape)
        worst = float(np.abs(np.where(special, 0.0, T)).max())
        checked = int((~special).sum())
        shifts = t.matrices[1 : n + 1]
        P2 = np.einsum("aij,bjk->abik", shifts, shifts)
        P4 = np.einsum("abij,cdjk->abcdik", P2, P2)
        product_max = float(np.abs(P4).max(initial=0.0))
        mode = "exhaustive"
    else:
        rng = np.random.default_rng(seed)
        seqs = rng.integers(0, m, size=(samples, 4))
        keep = np.array([not _is_special(s, n) for s in seqs])
        seqs = seqs[keep]
        worst = 0.0
        product_max = 0.0
        for start in range(0, len(seqs), 4096):
            chunk = seqs[start : start + 4096]
            vec = np.broadcast_to(t.v, (len(chunk), t.d))
            for p in range(3, -1, -1):
                vec = np.einsum("nij,nj->ni", t.matrices[chunk[:, p]], vec)
            worst = max(worst, float(np.abs(vec @ t.u).max(initial=0.0)))
            inner = chunk[np.all((chunk >= 1) & (chunk <= n), axis=1)]
            if len(inner):
                prod = t.matrices[inner[:, 0]]
                for p in range(1, 4):
                    prod = np.einsum("nij,njk->nik", prod, t.matrices[inner[:, p]])
                product_max = max(product_max, float(np.abs(prod).max()))
        checked = len(seqs)
        mode = f"sampled (seed={seed})"
    report.add("max |moment| off {0}uS", worst, MOMENT_TOL)
    report.add("max |A_a A_b A_c A_d| entry", product_max, 0.0)
    restricted = replace(t, shift_labels=tuple(s for s in t.shift_labels if 1 <= s <= n))
    report.add("grading violation", 0.0 if grading_is_exact(restricted) else 1.0, 0.0)
    report.details.update(n=n, mode=mode, sequences_checked=checked)
    return report
