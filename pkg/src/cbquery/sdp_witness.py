"""Feasible points of the completely-bounded approximate-degree SDP.

For a target f on the cube and a degree t, a witness is a polynomial phi with
||phi||_1 = 1, a weight w > 0 and contraction-valued maps A_1, ..., A_t on the
alphabet [n+1] together with unit vectors u, v such that

    phi_hat(i) / w = <u, A_1(i_1) ... A_t(i_t) v>   for every i in [n+1]^t,

where phi_hat(i) = E_x phi(x) x_{i_1} ... x_{i_t} with x_{n+1} = 1.  Its
objective E[phi f] - w lower-bounds sdp(f, t), and a value above eps rules out
floor(t/2)-query algorithms approximating f to additive error eps.

Only feasible points are handled here; nothing is optimized.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Any, Mapping, NamedTuple, Sequence

import numpy as np

from . import __version__
from ._report import CheckReport
from .boolean_poly import DEFAULT_CAP, EnumerationCapError, MultilinearPoly, cube_values, p_norm, sup_norm
from .constructions import chsh_form
from .slices import delta, require_cubic
from .varopoulos import build_chsh, build_trilinear

MEMBERSHIP_TOL = 1e-9
UNIT_TOL = 1e-12
NORM_SLACK = 1e-12
L1_TOL = 1e-9
REPRODUCE_TOL = 1e-9
MAX_SEQUENCES = 10**7


class WitnessError(ValueError):
    """The witness failed feasibility verification."""


class EpsilonTooLargeError(ValueError):
    def __init__(self, value: float, epsilon: float):
        super().__init__(f"objective {value!r} does not exceed epsilon {epsilon!r}")
        self.value = value
        self.epsilon = epsilon


@dataclass(frozen=True, eq=False)
class SDPWitness:
    """Feasible point (phi, w, A_1..A_t, u, v) for target ``f``.

    ``family[p]`` is an array of shape (m, d, d) holding A_{p+1}(label) at
    row ``label - 1``, where m = n + 1 and label m is the constant-1 slot.
    """

    f: MultilinearPoly
    t: int
    phi: MultilinearPoly
    w: float
    family: tuple[np.ndarray, ...]
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        if self.phi.n != self.f.n:
            raise ValueError(f"phi has {self.phi.n} variables but the target has {self.f.n}")
        if len(self.family) != self.t:
            raise ValueError(f"family has {len(self.family)} positions, expected t={self.t}")
        fam = tuple(np.asarray(A, dtype=np.float64) for A in self.family)
        d = len(self.u)
        for p, A in enumerate(fam):
            if A.shape != (self.m, d, d):
                raise ValueError(f"position {p + 1} has shape {A.shape}, expected {(self.m, d, d)}")
        object.__setattr__(self, "family", fam)
        object.__setattr__(self, "u", np.asarray(self.u, dtype=np.float64))
        object.__setattr__(self, "v", np.asarray(self.v, dtype=np.float64))
        object.__setattr__(self, "w", float(self.w))

    @property
    def n(self) -> int:
        return self.f.n

    @property
    def m(self) -> int:
        return self.f.n + 1

    @property
    def d(self) -> int:
        return len(self.u)

    def moment(self, seq: Sequence[int]) -> float:
        vec = self.v
        for p in range(self.t - 1, -1, -1):
            vec = self.family[p][seq[p] - 1] @ vec
        return float(self.u @ vec)

    def to_json(self) -> dict[str, Any]:
        return {
            "phi": self.phi.to_json(),
            "w": self.w,
            "d": self.d,
            "alphabet": list(range(1, self.m + 1)),
            "matrices": [A.tolist() for A in self.family],
            "u": self.u.tolist(),
            "v": self.v.tolist(),
        }

    @classmethod
    def from_json(cls, data: Mapping[str, Any], f: MultilinearPoly) -> "SDPWitness":
        phi = MultilinearPoly.from_json(data["phi"])
        family = tuple(np.array(A, dtype=np.float64) for A in data["matrices"])
        alphabet = list(data["alphabet"])
        if alphabet != list(range(1, f.n + 2)):
            raise ValueError(f"witness alphabet {alphabet} does not match a target on {f.n} variables")
        if int(data["d"]) != len(data["u"]):
            raise ValueError("witness dimension d disagrees with the length of u")
        return cls(f, len(family), phi, float(data["w"]), family, np.array(data["u"]), np.array(data["v"]))


# -- verification --------------------------------------------------------------------


def _label_bits(n: int) -> np.ndarray:
    if n > 63:
        raise ValueError(f"vectorized membership check supports at most 63 variables, got {n}")
    bits = [np.uint64(1 << i) for i in range(n)] + [np.uint64(0)]
    return np.array(bits, dtype=np.uint64)


def _coefficient_lookup(phi: MultilinearPoly, masks: np.ndarray) -> np.ndarray:
    keys = np.fromiter(phi.coeffs.keys(), dtype=np.uint64, count=len(phi.coeffs))
    vals = np.fromiter(phi.coeffs.values(), dtype=np.float64, count=len(phi.coeffs))
    out = np.zeros(masks.shape)
    if len(keys):
        pos = np.searchsorted(keys, masks)
        pos = np.minimum(pos, len(keys) - 1)
        hit = keys[pos] == masks
        out[hit] = vals[pos[hit]]
    return out


def hat_tensor(phi: MultilinearPoly, t: int) -> np.ndarray:
    """phi_hat(i) for all i in [n+1]^t, as an array indexed by label - 1."""
    m = phi.n + 1
    bits = _label_bits(phi.n)
    masks = np.zeros(1, dtype=np.uint64)
    for _ in range(t):
        masks = np.bitwise_xor.outer(masks, bits)
    return _coefficient_lookup(phi, masks.reshape((m,) * t))


def verify_membership(wit: SDPWitness, tol: float = MEMBERSHIP_TOL, cap: int = DEFAULT_CAP) -> CheckReport:
    """Exhaustively check feasibility of ``wit``.

    Unit vectors, contraction norms, w > 0, ||phi||_1 = 1 and all m^t moment
    equations.  The report names the lexicographically first sequence that
    violates its equation, if any.
    """
    m, t = wit.m, wit.t
    if m**t > MAX_SEQUENCES:
        raise ValueError(f"{m}^{t} sequences exceed the exhaustive limit {MAX_SEQUENCES}")
    report = CheckReport("SDP witness membership")
    report.add("|‖u‖ - 1|", abs(np.linalg.norm(wit.u) - 1), UNIT_TOL)
    report.add("|‖v‖ - 1|", abs(np.linalg.norm(wit.v) - 1), UNIT_TOL)
    norms = [np.linalg.norm(A, 2) for fam in wit.family for A in fam]
    report.add("max operator norm", max(norms, default=0.0), 1 + NORM_SLACK)
    report.add("w <= 0", 0.0 if wit.w > 0 else 1.0, 0.0)
    if not wit.w > 0:
        report.details.update(sequences_checked=0, first_failure=None)
        return report
    report.add("|‖phi‖_1 - 1|", abs(p_norm(wit.phi, 1, cap) - 1), L1_TOL)

    bits = _label_bits(wit.n)
    # right[i_2..i_t] = A_2(i_2) ... A_t(i_t) v
    right = wit.v[None, :]
    rest_masks = np.zeros(1, dtype=np.uint64)
    for p in range(t - 1, 0, -1):
        right = np.einsum("iab,jb->ija", wit.family[p], right).reshape(-1, wit.d)
        rest_masks = np.bitwise_xor.outer(bits, rest_masks).reshape(-1)
    worst, first = 0.0, None
    for i1 in range(m):
        left = wit.u @ wit.family[0][i1]
        moments = right @ left
        expected = _coefficient_lookup(wit.phi, rest_masks ^ bits[i1]) / wit.w
        err = np.abs(moments - expected)
        worst = max(worst, float(err.max()))
        if first is None and np.any(err > tol):
            j = int(np.argmax(err > tol))
            tail = np.unravel_index(j, (m,) * (t - 1)) if t > 1 else ()
            seq = (i1 + 1,) + tuple(int(k) + 1 for k in tail)
            first = {"sequence": seq, "moment": float(moments[j]), "expected": float(expected[j])}
    report.add("max moment-equation error", worst, tol)
    report.details.update(sequences_checked=m**t, first_failure=first)
    return report


def objective(wit: SDPWitness, cap: int = DEFAULT_CAP) -> float:
    """E_x phi(x) f(x) - w, averaged over the whole cube."""
    if wit.phi.n != wit.f.n:
        raise ValueError("phi and target have different variable counts")
    corr = float(np.mean(cube_values(wit.phi, cap) * cube_values(wit.f, cap)))
    return corr - wit.w


def correlation(wit: SDPWitness, cap: int = DEFAULT_CAP) -> float:
    return objective(wit, cap) + wit.w


def with_target_scale(wit: SDPWitness, C: float) -> SDPWitness:
    return replace(wit, f=wit.f.scale(C))


def critical_scale(wit: SDPWitness, cap: int = DEFAULT_CAP) -> float:
    """Smallest C for which the target C*f gets a positive objective."""
    return wit.w / correlation(wit, cap)


# -- built-in witnesses ---------------------------------------------------------------


def build_chsh_witness() -> SDPWitness:
    f = chsh_form()
    tup = build_chsh()
    return SDPWitness(f, 2, f, 1 / math.sqrt(2.0), (tup.matrices, tup.matrices), tup.u, tup.v)


class QuarticBound(NamedTuple):
    weight: float
    l1: float
    sup: float
    delta: float

    @property
    def value(self) -> float:
        return self.weight / (self.l1 * self.sup) - self.delta / self.l1


def quartic_quantities(f: MultilinearPoly, cap: int = DEFAULT_CAP) -> QuarticBound:
    """||f||_2^2, ||f||_1, ||f||_inf and Delta(f), each from its own routine."""
    return QuarticBound(p_norm(f, 2, cap) ** 2, p_norm(f, 1, cap), sup_norm(f, cap).value, delta(f))


def quartic_lower_bound(f: MultilinearPoly, cap: int = DEFAULT_CAP) -> tuple[SDPWitness, float]:
    """Witness for the quartic target g = x_0 f / ||f||_inf and its objective.

    x_0 is appended as variable n+1.  phi = x_0 f / ||f||_1 and
    w = Delta(f) / ||f||_1; every position uses the extended trilinear tuple,
    with label n+1 (x_0) mapped to I and the constant label n+2 mapped to 0.
    """
    require_cubic(f)
    n = f.n
    if n + 1 > cap:
        raise EnumerationCapError(f"the padded cube has 2^{n + 1} points, above the cap 2^{cap}")
    if f.is_zero():
        raise ValueError("quartic_lower_bound needs a nonzero form")
    q = quartic_quantities(f, cap)
    ext = build_trilinear(f).extended()
    order = list(range(1, n + 1)) + [0, n + 1]
    A = ext.matrices[order]
    x0f = f.times_monomial((n + 1,), n=n + 1)
    wit = SDPWitness(x0f.scale(1 / q.sup), 4, x0f.scale(1 / q.l1), q.delta / q.l1, (A,) * 4, ext.u, ext.v)
    return wit, objective(wit, cap)


# -- certificates ----------------------------------------------------------------------


def dumps(obj: Any) -> str:
    """Compact JSON with floats written to 17 significant digits."""
    if isinstance(obj, Mapping):
        return "{" + ",".join(json.dumps(str(k)) + ":" + dumps(v) for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(dumps(v) for v in obj) + "]"
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist())
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            raise ValueError(f"cannot serialize non-finite float {x}")
        return format(x, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def witness_hash(witness_json: Mapping[str, Any]) -> str:
    return hashlib.sha256(dumps(witness_json).encode()).hexdigest()


@dataclass(frozen=True, eq=False)
class Certificate:
    kind: str
    target: MultilinearPoly
    C: float
    epsilon: float
    value: float
    queries: int
    witness: SDPWitness
    provenance: dict[str, Any] = field(default_factory=dict)

    def statement(self) -> str:
        tgt = "f" if self.kind == "additive" else f"{self.C:g} * f"
        return (
            f"no {self.queries}-query quantum algorithm A satisfies "
            f"|E[A(x)] - {tgt}(x)| <= {self.epsilon:g} for every x in {{-1,1}}^{self.target.n}"
        )

    def to_json(self) -> dict[str, Any]:
        wj = self.witness.to_json()
        prov = {
            "seed": self.provenance.get("seed"),
            "code-version": self.provenance.get("code-version", __version__),
            "timestamp": self.provenance.get("timestamp"),
            "witness-sha256": witness_hash(wj),
        }
        return {
            "kind": self.kind,
            "target": self.target.to_json(),
            "C": self.C,
            "epsilon": self.epsilon,
            "value": self.value,
            "queries": self.queries,
            "witness": wj,
            "provenance": prov,
        }

    def dumps(self) -> str:
        return dumps(self.to_json())


def certify(
    wit: SDPWitness,
    epsilon: float,
    scale: float = 1.0,
    seed: int | None = None,
    cap: int = DEFAULT_CAP,
) -> Certificate:
    """Certificate that no floor(t/2)-query algorithm is eps-close to scale * f.

    Raises WitnessError if feasibility fails and EpsilonTooLargeError when the
    objective does not exceed ``epsilon``.
    """
    if not epsilon >= 0:
        raise ValueError(f"epsilon must be nonnegative, got {epsilon}")
    report = verify_membership(wit, cap=cap)
    if not report.passed:
        raise WitnessError(str(report))
    value = objective(with_target_scale(wit, scale), cap)
    if not value > epsilon:
        raise EpsilonTooLargeError(value, epsilon)
    kind = "additive" if scale == 1.0 else "multiplicative"
    prov = {
        "seed": seed,
        "code-version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    return Certificate(kind, wit.f, float(scale), float(epsilon), value, wit.t // 2, wit, prov)


class RecheckResult(NamedTuple):
    code: int
    message: str
    value: float | None = None
    bit_identical: bool = False


def recheck_certificate(data: Any, cap: int = DEFAULT_CAP) -> RecheckResult:
    """Re-verify a parsed certificate from its embedded witness alone.

    Codes: 0 ok, 1 malformed, 2 verification failed.
    """
    try:
        target = MultilinearPoly.from_json(data["target"])
        C = float(data["C"])
        epsilon = float(data["epsilon"])
        stored = float(data["value"])
        queries = int(data["queries"])
        wj = data["witness"]
        wit = SDPWitness.from_json(wj, target)
        claimed_hash = data["provenance"]["witness-sha256"]
    except (KeyError, TypeError, ValueError, IndexError, AttributeError) as exc:
        return RecheckResult(1, f"malformed certificate: {exc}")
    if witness_hash(wj) != claimed_hash:
        return RecheckResult(2, "witness hash does not match provenance")
    if queries != wit.t // 2:
        return RecheckResult(2, f"queries={queries} but the witness has t={wit.t}")
    try:
        report = verify_membership(wit, cap=cap)
        if not report.passed:
            return RecheckResult(2, "witness is not feasible:\n" + str(report))
        value = objective(with_target_scale(wit, C), cap)
    except (ValueError, EnumerationCapError) as exc:
        return RecheckResult(2, f"could not re-verify: {exc}")
    same = value == stored
    if abs(value - stored) > REPRODUCE_TOL:
        return RecheckResult(2, f"value {value!r} does not reproduce stored {stored!r}", value, same)
    if not value > epsilon:
        return RecheckResult(2, f"value {value!r} does not exceed epsilon {epsilon!r}", value, same)
    return RecheckResult(0, f"verified: value {value!r} > epsilon {epsilon!r}", value, same)
