"""Command line front end.

Exit codes: 0 ok, 1 parse error, 2 verification failed, 3 epsilon too large,
4 enumeration cap exceeded, 5 precondition violated.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path
from typing import Any

from . import __version__
from .boolean_poly import (
    DEFAULT_CAP,
    EnumerationCapError,
    RawPoly,
    multilinear_reduce,
    reduction_exhibit,
    sup_norm,
)
from .constructions import (
    CoprimalityError,
    ZnFunction,
    ap_form,
    check_von_neumann,
    gowers_u3,
    mobius,
    random_cubic,
    squarefree_count,
)
from .sdp_witness import (
    EpsilonTooLargeError,
    WitnessError,
    build_chsh_witness,
    certify,
    hat_tensor,
    objective,
    quartic_lower_bound,
    quartic_quantities,
    recheck_certificate,
    verify_membership,
)
from .slices import delta

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_VERIFY = 2
EXIT_EPSILON = 3
EXIT_CAP = 4
EXIT_PRECONDITION = 5

CHSH_EPSILON = 0.29
SQUAREFREE_DENSITY = 6 / math.pi**2


class CommandError(Exception):
    def __init__(self, code: int, message: str, payload: dict | None = None):
        super().__init__(message)
        self.code = code
        self.payload = payload or {}


def _write_certificate(cert, out: str | None) -> str | None:
    if out is None:
        return None
    Path(out).write_text(cert.dumps() + "\n")
    return out


def _cap(args) -> int:
    cap = DEFAULT_CAP if args.cap is None else args.cap
    if cap > DEFAULT_CAP and not args.unsound_ok:
        raise CommandError(EXIT_CAP, f"--cap {cap} exceeds the default {DEFAULT_CAP}; pass --unsound-ok to allow it")
    return cap


# -- commands ---------------------------------------------------------------------------


def cmd_chsh(args) -> dict[str, Any]:
    cap = _cap(args)
    eps = CHSH_EPSILON if args.epsilon is None else args.epsilon
    wit = build_chsh_witness()
    report = verify_membership(wit, cap=cap)
    hats = hat_tensor(wit.phi, wit.t)
    rows = []
    for i in range(1, wit.m + 1):
        for j in range(1, wit.m + 1):
            rows.append({"sequence": [i, j], "phi_hat_over_w": float(hats[i - 1, j - 1] / wit.w), "moment": wit.moment((i, j))})
    result: dict[str, Any] = {
        "command": "chsh",
        "objective": objective(wit, cap),
        "expected": 1 - 1 / math.sqrt(2),
        "epsilon": eps,
        "membership": report.to_dict(),
        "moments": rows,
    }
    if not report.passed:
        raise CommandError(EXIT_VERIFY, "CHSH witness failed verification", result)
    try:
        cert = certify(wit, eps, cap=cap)
    except EpsilonTooLargeError as exc:
        raise CommandError(EXIT_EPSILON, str(exc), result) from None
    result["statement"] = cert.statement()
    result["certificate_path"] = _write_certificate(cert, args.out)
    result["certificate"] = cert.to_json()
    return result


def _quartic_section(f, args, cap: int, seed: int | None) -> dict[str, Any]:
    wit, value = quartic_lower_bound(f, cap)
    report = verify_membership(wit, cap=cap)
    q = quartic_quantities(f, cap)
    section: dict[str, Any] = {
        "objective": value,
        "formula": q.value,
        "l1": q.l1,
        "sup": q.sup,
        "membership_passed": report.passed,
        "sequences_checked": report.details["sequences_checked"],
    }
    if not report.passed:
        raise CommandError(EXIT_VERIFY, "quartic witness failed verification", {"quartic": section})
    if value <= 0:
        section["note"] = "bound not positive: no certificate at this size"
        return section
    eps = value / 2 if args.epsilon is None else args.epsilon
    try:
        cert = certify(wit, eps, seed=seed, cap=cap)
    except EpsilonTooLargeError as exc:
        raise CommandError(EXIT_EPSILON, str(exc), {"quartic": section}) from None
    section["epsilon"] = eps
    section["statement"] = cert.statement()
    section["certificate_path"] = _write_certificate(cert, args.out)
    return section


def cmd_random(args) -> dict[str, Any]:
    cap = _cap(args)
    n = 10 if args.n is None else args.n
    seed = 1 if args.seed is None else args.seed
    if not 3 <= n <= 64:
        raise CommandError(EXIT_PRECONDITION, f"random forms need 3 <= n <= 64, got {n}")
    exact = n + 1 <= cap
    if not exact and not args.unsound_ok:
        raise CommandError(EXIT_CAP, f"n={n}: the padded cube 2^{n + 1} exceeds the cap 2^{cap}; pass --unsound-ok")
    f = random_cubic(n, seed)
    weight = f.fourier_weight()
    dlt = delta(f)
    sup = sup_norm(f, cap=cap, sampling=not exact, seed=seed)
    result: dict[str, Any] = {
        "command": "random",
        "n": n,
        "seed": seed,
        "l2_squared": weight,
        "binomial_n_3": math.comb(n, 3),
        "delta": dlt,
        "sup_norm": sup.value,
        "sup_norm_kind": sup.label,
        "counterexample_ratio": weight / dlt,
        "normalized_ratio": weight / (dlt * sup.value),
    }
    if exact:
        result["quartic"] = _quartic_section(f, args, cap, seed)
    else:
        result["note"] = "sup-norm is a sampled lower bound; quartic objective skipped"
    return result


def cmd_explicit(args) -> dict[str, Any]:
    cap = _cap(args)
    n = 5 if args.n is None else args.n
    if n < 2 or math.gcd(n, 6) != 1:
        raise CommandError(EXIT_PRECONDITION, f"n={n} must be at least 2 and coprime to 6")
    f0 = mobius(n)
    f = ap_form(n, f0)
    sq = squarefree_count(n)
    dlt = delta(f)
    weight = f.fourier_weight()
    result: dict[str, Any] = {
        "command": "explicit",
        "n": n,
        "variables": 3 * n,
        "u3": gowers_u3(f0),
        "squarefree_count": sq,
        "squarefree_density": sq / n,
        "asymptotic_density": SQUAREFREE_DENSITY,
        "density_gap": sq / n - SQUAREFREE_DENSITY,
        "delta": dlt,
        "l2_squared": weight,
        "counterexample_ratio": weight / dlt if dlt else None,
    }
    if 3 * n <= cap or args.unsound_ok:
        vn = check_von_neumann(n, f0, cap=cap, sampling=True)
        result["von_neumann"] = vn.to_dict()
    if 3 * n + 1 <= cap:
        result["quartic"] = _quartic_section(f, args, cap, None)
    return result


def cmd_verify(args) -> dict[str, Any]:
    if args.path is None:
        raise CommandError(EXIT_PARSE, "verify needs a certificate path")
    try:
        data = json.loads(Path(args.path).read_text())
    except (OSError, ValueError) as exc:
        raise CommandError(EXIT_PARSE, f"cannot read certificate: {exc}") from None
    res = recheck_certificate(data, cap=_cap(args))
    out = {"command": "verify", "path": args.path, "code": res.code, "message": res.message, "value": res.value, "bit_identical": res.bit_identical}
    if res.code:
        raise CommandError(res.code, res.message, out)
    return out


def cmd_gowers(args) -> dict[str, Any]:
    n = 5 if args.n is None else args.n
    kind = args.f0
    if kind == "mobius":
        g = mobius(n)
    elif kind == "ones":
        g = ZnFunction.constant(n, 1.0)
    else:
        g = ZnFunction.indicator(n, [0])
    return {"command": "gowers", "n": n, "f0": kind, "u3": gowers_u3(g)}


def cmd_reduce(args) -> dict[str, Any]:
    if args.path is None:
        raw = reduction_exhibit()
        restricted = raw.fix_to_one([3, 4])
        source = "exhibit: x1^2 x2^2 - x1^2 - x2^2 + 1 from h(x, z) at z = 1"
    else:
        try:
            raw = RawPoly.from_json(json.loads(Path(args.path).read_text()))
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise CommandError(EXIT_PARSE, f"cannot read polynomial: {exc}") from None
        restricted = raw
        source = args.path
    reduced = multilinear_reduce(restricted)
    return {
        "command": "reduce",
        "source": source,
        "raw": raw.to_json(),
        "restricted": restricted.to_json(),
        "reduced": reduced.to_json(),
        "is_zero": reduced.is_zero(),
    }


COMMANDS = {
    "chsh": cmd_chsh,
    "random": cmd_random,
    "explicit": cmd_explicit,
    "verify": cmd_verify,
    "gowers": cmd_gowers,
    "reduce": cmd_reduce,
}


# -- rendering --------------------------------------------------------------------------


def _render_text(result: dict[str, Any]) -> str:
    lines = []
    if result.get("command") == "chsh" and "moments" in result:
        lines.append(f"{'sequence':<10}{'phi_hat/w':>22}{'moment':>22}")
        for row in result["moments"]:
            i, j = row["sequence"]
            lines.append(f"({i}, {j}){'':<4}{row['phi_hat_over_w']!r:>22}{row['moment']!r:>22}")
    for key, value in result.items():
        if key in ("moments", "certificate", "membership", "raw"):
            continue
        if isinstance(value, dict):
            lines.append(f"{key}:")
            for k, v in value.items():
                lines.append(f"  {k}: {v!r}" if isinstance(v, float) else f"  {k}: {v}")
        else:
            lines.append(f"{key}: {value!r}" if isinstance(value, float) else f"{key}: {value}")
    if "membership" in result:
        lines.append(f"membership: {'PASS' if result['membership']['passed'] else 'FAIL'}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cbquery", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--n", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--epsilon", type=float)
        p.add_argument("--out")
        p.add_argument("--format", choices=("json", "text"), default="json")
        p.add_argument("--cap", type=int)
        p.add_argument("--unsound-ok", action="store_true")
        if name in ("verify", "reduce"):
            p.add_argument("path", nargs="?")
        if name == "gowers":
            p.add_argument("--f0", choices=("mobius", "ones", "indicator"), default="mobius")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    code = EXIT_OK
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            result = COMMANDS[args.command](args)
        except CommandError as exc:
            code = exc.code
            result = {"command": args.command, "error": str(exc), "exit_code": code, **exc.payload}
        except (EnumerationCapError,) as exc:
            code = EXIT_CAP
            result = {"command": args.command, "error": str(exc), "exit_code": code}
        except WitnessError as exc:
            code = EXIT_VERIFY
            result = {"command": args.command, "error": str(exc), "exit_code": code}
    if args.format == "json":
        print(json.dumps(result, indent=2))
    else:
        print(_render_text(result))
    return code


if __name__ == "__main__":
    sys.exit(main())
