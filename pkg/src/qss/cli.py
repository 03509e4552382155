"""Command-line front end.

Exit codes: 0 success, 1 verification or audit failure, 2 construction
rejected, 3 bad input, 4 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any

import numpy as np

from . import access, hybrid, oracle, qsim, schemes
from .errors import AuditError, CapExceeded, ConstructionError, DomainError, FormatError, NotFoundError, UnauthorizedError

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_REJECTED = 2
EXIT_INPUT = 3
EXIT_CAP = 4


class InputError(Exception):
    pass


def _read_json(path: str) -> dict[str, Any]:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"{path}: no such file")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from exc


def _check_out(path: str | None) -> None:
    if path and not Path(path).resolve().parent.is_dir():
        raise InputError(f"{path}: output directory does not exist")


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text + "\n")
    else:
        print(text)


def _load_descriptor(path: str) -> schemes.Scheme | hybrid.HybridScheme:
    data = _read_json(path)
    kind = data.get("kind")
    try:
        if kind == "scheme":
            return schemes.Scheme.from_dict(data)
        if kind == "hybrid":
            return hybrid.HybridScheme.from_dict(data)
        if kind == "encoded":
            return _load_descriptor_data(data["scheme"])
    except FormatError as exc:
        raise InputError(f"{path}: {exc}") from exc
    raise InputError(f"{path}: expected a scheme or hybrid descriptor, found kind {kind!r}")


def _load_descriptor_data(data: dict[str, Any]) -> schemes.Scheme | hybrid.HybridScheme:
    return hybrid.HybridScheme.from_dict(data) if data.get("kind") == "hybrid" else schemes.Scheme.from_dict(data)


def _load_structure(source: str) -> access.AccessStructure:
    """A structure file, or inline minimal sets such as ``"ABC,AD"`` or ``"ABC OR AD"``."""
    if Path(source).is_file():
        data = _read_json(source)
        try:
            return access.AccessStructure.from_dict(data)
        except (FormatError, DomainError) as exc:
            raise InputError(f"{source}: {exc}") from exc
    parts = [s for s in source.replace(" OR ", ",").replace(" ", ",").split(",") if s]
    if not parts or not all(s.isalpha() and s.isupper() for s in parts):
        raise InputError(f"{source}: neither a file nor a list of minimal sets like ABC,AD")
    return access.normalize(parts)


def _verify_scheme(sch: schemes.Scheme, args: argparse.Namespace) -> int:
    rep = oracle.report(sch, args.tolerance, args.mode, args.jobs)
    _emit(oracle.dumps_report(rep), args.report)
    print(f"verify: {rep['verdict']} found={rep['found']} declared={rep['declared']} "
          f"neither={rep['neither']} method={rep['method']}", file=sys.stderr)
    return EXIT_OK if rep["verdict"] == "PASS" else EXIT_FAIL


def _verify_hybrid(h: hybrid.HybridScheme, args: argparse.Namespace) -> int:
    rep = oracle.hybrid_report(h, args.tolerance, "literal" if args.mode == "literal" else "auto")
    _emit(oracle.dumps_report(rep), args.report)
    print(f"verify: {rep['verdict']} ({h.k},{h.n}) found={rep['found']} neither={rep['neither']}", file=sys.stderr)
    return EXIT_OK if rep["verdict"] == "PASS" else EXIT_FAIL


################################################################################
# commands


def cmd_threshold(args: argparse.Namespace) -> int:
    sch = schemes.build_threshold(args.k, args.n, args.p)
    _emit(sch.to_json(indent=2), args.out)
    return _verify_scheme(sch, args) if args.verify else EXIT_OK


def cmd_general(args: argparse.Namespace) -> int:
    structure = _load_structure(args.structure)
    sch = schemes.build_general(structure, args.p, args.completion)
    _emit(sch.to_json(indent=2), args.out)
    return _verify_scheme(sch, args) if args.verify else EXIT_OK


def cmd_hybrid(args: argparse.Namespace) -> int:
    h = hybrid.build_hybrid(args.k, args.n, args.p)
    _emit(h.to_json(indent=2), args.out)
    print(h.table(), file=sys.stderr)
    return _verify_hybrid(h, args) if args.verify else EXIT_OK


def _secret(args: argparse.Namespace, p: int) -> qsim.StateVector:
    if args.secret_file:
        state = qsim.loads(Path(args.secret_file).read_text())
        if not isinstance(state, qsim.StateVector):
            raise InputError(f"{args.secret_file}: secret must be a pure state")
        return state
    if args.secret is not None:
        if not 0 <= args.secret < p:
            raise InputError(f"--secret {args.secret} is not in [0, {p})")
        return qsim.StateVector.basis((p,), args.secret)
    return qsim.StateVector.random((p,), np.random.default_rng(args.seed))


def cmd_encode(args: argparse.Namespace) -> int:
    target = _load_descriptor(args.infile)
    if isinstance(target, hybrid.HybridScheme):
        if args.a is None or args.b is None:
            raise InputError("hybrid encoding needs --a and --b")
        rho = hybrid.encode_classical(target, args.a, args.b)
        payload = {"format": qsim.FORMAT, "kind": "encoded", "scheme": target.to_dict(),
                   "secret": {"a": args.a, "b": args.b}, "state": rho.to_dict()}
    else:
        secret = _secret(args, target.p)
        state = schemes.encode(target, secret)
        payload = {"format": qsim.FORMAT, "kind": "encoded", "scheme": target.to_dict(),
                   "secret": secret.to_dict(), "state": state.to_dict()}
    _emit(json.dumps(payload), args.out)
    return EXIT_OK


def cmd_reconstruct(args: argparse.Namespace) -> int:
    data = _read_json(args.infile)
    if data.get("kind") != "encoded":
        raise InputError(f"{args.infile}: expected an encoded state written by 'encode'")
    try:
        target = _load_descriptor_data(data["scheme"])
        state = qsim.loads(json.dumps(data["state"]))
    except (KeyError, FormatError) as exc:
        raise InputError(f"{args.infile}: {exc}") from exc
    if isinstance(target, hybrid.HybridScheme):
        coords = sorted(x - 1 for x in _parse_parties(args.set, target.n))
        rho_t = qsim.partial_trace(state, coords)
        a, b = hybrid.reconstruct_classical(target, coords, rho_t)
        print(json.dumps({"a": a, "b": b}))
        return EXIT_OK
    parties = _parse_parties(args.set, len(target.parties))
    result = schemes.decode(target, parties, state)
    if args.reference:
        reference = qsim.loads(Path(args.reference).read_text())
    else:
        reference = qsim.loads(json.dumps(data["secret"]))
    fid = qsim.fidelity(reference, result.secret)
    print(json.dumps({"register": result.register, "fidelity": fid,
                      "secret": qsim.DensityMatrix.to_dict(result.secret)["matrix"]}))
    return EXIT_OK if fid >= 1 - args.tolerance else EXIT_FAIL


def _parse_parties(text: str | None, n: int) -> frozenset[int]:
    if not text:
        return frozenset(range(1, n + 1))
    try:
        return access.parse_set(text)
    except DomainError as exc:
        raise InputError(f"--set {text}: {exc}") from exc


def cmd_verify(args: argparse.Namespace) -> int:
    target = _load_descriptor(args.infile)
    if isinstance(target, hybrid.HybridScheme):
        return _verify_hybrid(target, args)
    return _verify_scheme(target, args)


def cmd_audit(args: argparse.Namespace) -> int:
    target = _load_descriptor(args.infile)
    try:
        audit = oracle.size_audit(target)
        code = EXIT_OK
    except AuditError as exc:
        print(f"audit failed: {exc}", file=sys.stderr)
        audit = oracle.size_audit(target, strict=False)
        code = EXIT_FAIL
    _emit(json.dumps(audit.to_dict(), indent=2), args.out)
    return code


################################################################################
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qss", description="Perfect quantum secret sharing toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--tolerance", type=float, default=oracle.TOL)
        p.add_argument("--jobs", type=int, default=1, help="threads for oracle sweeps")
        p.add_argument("--mode", choices=["auto", "literal", "structural"], default="auto")
        p.add_argument("--report", help="file for the oracle report (default: stdout)")

    p = sub.add_parser("threshold", help="build a ((k,n)) threshold scheme")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=int)
    p.add_argument("--verify", action="store_true")
    common(p)
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("general", help="build a scheme for an access structure")
    p.add_argument("--structure", required=True, help="structure file or inline sets, e.g. ABC,AD")
    p.add_argument("--completion", choices=["greedy", "trivial"], default="greedy")
    p.add_argument("--p", type=int)
    p.add_argument("--verify", action="store_true")
    common(p)
    p.set_defaults(func=cmd_general)

    p = sub.add_parser("hybrid", help="build a classical-secret scheme with one qupit per share")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=int)
    p.add_argument("--verify", action="store_true")
    common(p)
    p.set_defaults(func=cmd_hybrid)

    p = sub.add_parser("encode", help="encode a secret with a descriptor")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--secret", type=int, help="basis secret |s>")
    p.add_argument("--secret-file", help="state file holding the secret")
    p.add_argument("--seed", type=int, default=0, help="seed for a random secret")
    p.add_argument("--a", type=int)
    p.add_argument("--b", type=int)
    common(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("reconstruct", help="recover the secret from a set of shares")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--set", help="party letters, e.g. AB (default: everyone)")
    p.add_argument("--reference", help="state file to compare against (default: the encoded secret)")
    common(p)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("verify", help="certify a descriptor with the oracle")
    p.add_argument("--in", dest="infile", required=True)
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("audit", help="check share sizes against the lower bounds")
    p.add_argument("--in", dest="infile", required=True)
    common(p)
    p.set_defaults(func=cmd_audit)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.tolerance <= 0:
            raise InputError("--tolerance must be positive")
        if args.jobs < 1:
            raise InputError("--jobs must be at least 1")
        _check_out(args.out)
        _check_out(args.report)
        return args.func(args)
    except ConstructionError as exc:
        print(f"rejected: {exc}", file=sys.stderr)
        return EXIT_REJECTED
    except CapExceeded as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (InputError, FormatError, DomainError, UnauthorizedError, NotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
