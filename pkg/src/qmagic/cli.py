"""Command line front end.

Subcommands cover validation, Birkhoff decomposition, semiclassical
membership, dilation synthesis, the matrix-convex-hull obstruction, and
exact certificate handling, plus scripted reproductions of the headline
separation results.  Machine-readable reports go to stdout as JSON, a
short human summary goes to stderr.

Exit codes: 0 affirmative/valid, 1 negative/infeasible (a certificate is
written when one is available), 2 inconclusive, 3 usage or input error.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .birkhoff import NotDoublyStochastic, birkhoff_decompose, magic_space_dimension
from .obstruction import (
    DENOMINATOR_LADDER,
    STRONG,
    WEAK,
    CertificateNotFound,
    CertificateSearchInconclusive,
    CertificationFailed,
    build_obstruction,
    certify_with_ladder,
    check_mconv_obstruction,
    counterexample_m2_3,
    find_dual_certificate,
    verify_certificate,
)
from .exact import GaussianRational
from .sampling import random_doubly_stochastic
from .sdp import DEFAULT_EPS
from .semiclassical import (
    BoundViolated,
    TooLarge,
    check_semiclassical,
    interior_map_decomposition,
    synthesize_commuting_dilation,
    verify_positive_unital_map,
)
from .serialize import (
    FormatError,
    birkhoff_to_json,
    certificate_from_json,
    certificate_to_json,
    decomposition_from_json,
    decomposition_to_json,
    dump_json,
    exact_matrix_from_json,
    float_matrix_to_json,
    load_json,
    rational_to_json,
    square_from_json,
    square_to_json,
)
from .structures import InvalidMagicSquare, MagicSquare, constant_square

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 3
MAX_WORKERS = 4


class UsageError(ValueError):
    pass


def _pairing_str(value) -> str:
    z = GaussianRational._coerce(value)
    return rational_to_json(z.re)


@dataclass
class RunReport:
    """Everything one invocation produced, in machine-readable form."""

    command: str
    inputs: list = field(default_factory=list)  # {"path", "digest"}
    verdicts: dict = field(default_factory=dict)  # input or scenario -> verdict
    residuals: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)  # seconds, informational only
    certificates: list = field(default_factory=list)  # files written
    details: dict = field(default_factory=dict)

    def render(self) -> dict:
        return asdict(self)


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()[:16]


def _gather(paths) -> list[Path]:
    """Expand directory arguments into their sorted *.json members."""
    out = []
    for raw in paths:
        p = Path(raw)
        if p.is_dir():
            members = sorted(p.glob("*.json"))
            if not members:
                raise UsageError(f"{p}: directory contains no .json files")
            out.extend(members)
        elif p.exists():
            out.append(p)
        else:
            raise UsageError(f"{p}: no such file")
    return out


def _parallel(work, files, jobs):
    if len(files) <= 1 or jobs <= 1:
        return [work(f) for f in files]
    with ThreadPoolExecutor(max_workers=min(jobs, len(files))) as pool:
        return list(pool.map(work, files))


def _combine(codes) -> int:
    codes = list(codes)
    for level in (EXIT_USAGE, EXIT_NEGATIVE, EXIT_INCONCLUSIVE):
        if level in codes:
            return level
    return EXIT_OK


def _coerce_repr(square: MagicSquare, args) -> MagicSquare:
    if getattr(args, "float", False) and square.exact:
        return square.to_float()
    if getattr(args, "exact", False) and not square.exact:
        raise UsageError("--exact requires an exact input square")
    return square


def _human(msg: str) -> None:
    print(msg, file=sys.stderr)


def _record(report: RunReport, path: Path) -> None:
    report.inputs.append({"path": str(path), "digest": _digest(path)})


# -- validate -----------------------------------------------------------------


def cmd_validate(args, report: RunReport) -> int:
    files = _gather(args.inputs)

    def work(path: Path):
        start = time.perf_counter()
        try:
            square = load_square_checked(path, args)
            entry = {
                "verdict": "valid",
                "n": square.n,
                "s": square.s,
                "repr": "exact" if square.exact else "float",
            }
            code = EXIT_OK
        except InvalidMagicSquare as err:
            entry = {
                "verdict": "invalid",
                "violations": [
                    {"kind": v.kind, "location": list(v.location), "margin": str(v.margin)}
                    for v in err.report.violations
                ],
            }
            code = EXIT_NEGATIVE
        return code, str(path), entry, time.perf_counter() - start

    results = _parallel(work, files, args.jobs)
    for code, name, entry, elapsed in results:
        report.verdicts[name] = entry["verdict"]
        report.details[name] = entry
        report.timings[name] = round(elapsed, 4)
        _human(f"{name}: {entry['verdict']}")
    for path in files:
        _record(report, path)
    return _combine(code for code, *_ in results)


def load_square_checked(path: Path, args) -> MagicSquare:
    square = square_from_json(load_json(path), tol=args.eps if args.eps else None)
    return _coerce_repr(square, args)


# -- birkhoff -----------------------------------------------------------------


def cmd_birkhoff(args, report: RunReport) -> int:
    path = _gather(args.inputs)[0]
    _record(report, path)
    data = load_json(path)
    if isinstance(data, dict) and "matrix" in data:
        data = data["matrix"]
    matrix = exact_matrix_from_json(data)
    grid = [[matrix[i, j] for j in range(matrix.cols)] for i in range(matrix.rows)]
    for i in range(matrix.rows):
        for j in range(matrix.cols):
            if grid[i][j].im != 0:
                raise UsageError("birkhoff input must be a real rational matrix")
            grid[i][j] = grid[i][j].re
    terms = birkhoff_decompose(grid)
    n = matrix.rows
    payload = birkhoff_to_json(terms)
    report.verdicts[str(path)] = "decomposed"
    report.details["terms"] = payload
    report.details["count"] = len(terms)
    report.details["bound"] = (n - 1) ** 2 + 1
    if n <= 6:
        report.details["affine_dimension"] = magic_space_dimension(n)
    if args.out:
        dump_json(payload, args.out)
        report.certificates.append(str(args.out))
    _human(f"{path}: {len(terms)} permutations (Caratheodory bound {(n - 1) ** 2 + 1})")
    return EXIT_OK


# -- check-semiclassical --------------------------------------------------------


def cmd_check_semiclassical(args, report: RunReport) -> int:
    files = _gather(args.inputs)

    def work(path: Path):
        start = time.perf_counter()
        square = load_square_checked(path, args)
        res = check_semiclassical(square, eps=args.eps or DEFAULT_EPS)
        entry = {"verdict": res.verdict, "residuals": _floats(res.residuals)}
        if res.verdict == "yes" and res.decomposition is not None:
            entry["decomposition"] = decomposition_to_json(res.decomposition)
            entry["exact"] = res.decomposition.exact
        if res.verdict == "no" and res.dual is not None:
            entry["dual_objective"] = float(res.dual.t_star)
        code = {"yes": EXIT_OK, "no": EXIT_NEGATIVE}.get(res.verdict, EXIT_INCONCLUSIVE)
        return code, str(path), entry, time.perf_counter() - start

    results = _parallel(work, files, args.jobs)
    for code, name, entry, elapsed in results:
        report.verdicts[name] = entry["verdict"]
        report.details[name] = entry
        report.residuals[name] = entry.get("residuals", {})
        report.timings[name] = round(elapsed, 4)
        _human(f"{name}: semiclassical = {entry['verdict']}")
    for path in files:
        _record(report, path)
    if args.out and len(files) == 1:
        entry = results[0][2]
        if "decomposition" in entry:
            dump_json(entry["decomposition"], args.out)
            report.certificates.append(str(args.out))
    return _combine(code for code, *_ in results)


def _floats(d: dict) -> dict:
    return {k: float(v) for k, v in d.items()}


# -- decompose ------------------------------------------------------------------


def cmd_decompose(args, report: RunReport) -> int:
    path = _gather(args.inputs)[0]
    _record(report, path)
    square = load_square_checked(path, args)
    if args.interior:
        dec = interior_map_decomposition(square)
        verdict = "yes"
    else:
        res = check_semiclassical(square, eps=args.eps or DEFAULT_EPS)
        verdict = res.verdict
        dec = res.decomposition
    report.verdicts[str(path)] = verdict
    if verdict != "yes":
        _human(f"{path}: no decomposition found (verdict {verdict})")
        return EXIT_NEGATIVE if verdict == "no" else EXIT_INCONCLUSIVE
    check = verify_positive_unital_map(dec, square, tol=max(args.eps or DEFAULT_EPS, 1e-9) * 10)
    report.details["decomposition"] = decomposition_to_json(dec)
    report.details["exact"] = dec.exact
    report.details["map_verified"] = bool(check.ok)
    out = args.out or path.with_suffix(".dec.json")
    dump_json(report.details["decomposition"], out)
    report.certificates.append(str(out))
    _human(f"{path}: decomposition with {len(dec.weights)} permutations -> {out}")
    return EXIT_OK


# -- dilate ----------------------------------------------------------------------


def cmd_dilate(args, report: RunReport) -> int:
    path = _gather(args.inputs)[0]
    _record(report, path)
    data = load_json(path)
    if isinstance(data, list):
        dec = decomposition_from_json(data)
        source = None
    else:
        source = _coerce_repr(square_from_json(data), args)
        res = check_semiclassical(source, eps=args.eps or DEFAULT_EPS)
        if res.verdict != "yes":
            report.verdicts[str(path)] = res.verdict
            _human(f"{path}: not semiclassical (verdict {res.verdict}), cannot dilate")
            return EXIT_NEGATIVE if res.verdict == "no" else EXIT_INCONCLUSIVE
        dec = res.decomposition
    dilation = synthesize_commuting_dilation(dec)
    compressed = dilation.compressed()
    payload = {
        "qpm": square_to_json(dilation.u),
        "isometry": float_matrix_to_json(np.asarray(dilation.v, dtype=np.complex128)),
        "compressed": square_to_json(compressed),
    }
    if source is not None:
        flo = source.to_float() if source.exact else source
        resid = max(
            float(np.abs(np.asarray(compressed.block(i, j)) - np.asarray(flo.block(i, j))).max())
            for i in range(source.n)
            for j in range(source.n)
        )
        report.residuals["compression"] = resid
    report.verdicts[str(path)] = "dilated"
    report.details["dilation"] = payload
    out = args.out or path.with_suffix(".dilation.json")
    dump_json(payload, out)
    report.certificates.append(str(out))
    _human(f"{path}: commuting dilation of block size {dilation.u.s} -> {out}")
    return EXIT_OK


# -- obstruction-check -----------------------------------------------------------


def _ladder(max_denominator) -> tuple:
    if not max_denominator:
        return DENOMINATOR_LADDER
    rungs = tuple(b for b in DENOMINATOR_LADDER if b < max_denominator)
    return rungs + (max_denominator,)


def cmd_obstruction_check(args, report: RunReport) -> int:
    files = _gather(args.inputs)

    def work(path: Path):
        start = time.perf_counter()
        square = load_square_checked(path, args)
        res = check_mconv_obstruction(square, mode=args.mode, eps=args.eps or DEFAULT_EPS)
        entry = {"verdict": res.verdict, "mode": args.mode}
        cert_path = None
        if res.verdict == "no":
            entry["dual_objective"] = float(res.solver.t_star)
            if args.mode == STRONG and square.exact:
                try:
                    witness = find_dual_certificate(res.problem, eps=args.eps or DEFAULT_EPS)
                    cert = certify_with_ladder(
                        witness.y, res.problem, _ladder(args.max_denominator)
                    )
                    cert_path = args.out or path.with_suffix(".cert.json")
                    dump_json(certificate_to_json(cert, square=square), cert_path)
                    entry["certificate"] = str(cert_path)
                    entry["trace_B0"] = _pairing_str(cert.pairings["B0"])
                except (CertificateSearchInconclusive, CertificationFailed) as err:
                    entry["certificate_error"] = str(err)
        code = {"yes": EXIT_OK, "no": EXIT_NEGATIVE}.get(res.verdict, EXIT_INCONCLUSIVE)
        return code, str(path), entry, time.perf_counter() - start, cert_path

    results = _parallel(work, files, args.jobs)
    for code, name, entry, elapsed, cert_path in results:
        report.verdicts[name] = entry["verdict"]
        report.details[name] = entry
        report.timings[name] = round(elapsed, 4)
        if cert_path:
            report.certificates.append(str(cert_path))
        suffix = f", certificate -> {cert_path}" if cert_path else ""
        _human(f"{name}: {args.mode} obstruction verdict = {entry['verdict']}{suffix}")
    for path in files:
        _record(report, path)
    return _combine(code for code, *_ in results)


# -- find-certificate -------------------------------------------------------------


def cmd_find_certificate(args, report: RunReport) -> int:
    path = _gather(args.inputs)[0]
    _record(report, path)
    square = square_from_json(load_json(path))
    if not square.exact:
        raise UsageError("exact certification requires an exact input square")
    if args.mode != STRONG:
        raise UsageError("certificates are built from the strong pencil; use --mode strong")
    problem = build_obstruction(square, STRONG)
    try:
        witness = find_dual_certificate(problem, eps=args.eps or DEFAULT_EPS)
    except CertificateNotFound:
        report.verdicts[str(path)] = "feasible"
        _human(f"{path}: pencil is feasible, no certificate exists")
        return EXIT_NEGATIVE
    except CertificateSearchInconclusive as err:
        report.verdicts[str(path)] = "inconclusive"
        _human(f"{path}: {err}")
        return EXIT_INCONCLUSIVE
    try:
        cert = certify_with_ladder(witness.y, problem, _ladder(args.max_denominator))
    except CertificationFailed as err:
        report.verdicts[str(path)] = "inconclusive"
        report.details["failure"] = {"condition": err.condition, "margin": str(err.margin)}
        _human(f"{path}: numeric dual found but exact certification failed: {err}")
        return EXIT_INCONCLUSIVE
    out = args.out or path.with_suffix(".cert.json")
    dump_json(certificate_to_json(cert, square=square), out)
    verification = verify_certificate(cert, square)
    report.verdicts[str(path)] = "certified"
    report.certificates.append(str(out))
    report.details["pairings"] = {
        label: _pairing_str(value) for label, value in cert.pairings.items()
    }
    report.details["reverified"] = bool(verification["ok"])
    report.residuals["numeric_dual"] = {
        "trace_B0": witness.trace_b0,
        "pairing_max": witness.pairing_max,
        "min_eigenvalue": witness.min_eigenvalue,
    }
    approx = float(GaussianRational._coerce(cert.pairings["B0"]).re)
    _human(f"{path}: exact certificate written to {out} (trace vs B0 = {approx:.6e})")
    return EXIT_OK


# -- verify-certificate ------------------------------------------------------------


def cmd_verify_certificate(args, report: RunReport) -> int:
    path = _gather(args.inputs)[0]
    _record(report, path)
    cert, embedded = certificate_from_json(load_json(path))
    if args.square:
        square = square_from_json(load_json(Path(args.square)))
        _record(report, Path(args.square))
    else:
        square = embedded
    if square is None:
        raise UsageError("no square: pass --square FILE or use a certificate with one embedded")
    if not square.exact:
        raise UsageError("exact verification requires an exact square")
    outcome = verify_certificate(cert, square)
    verdict = "verified" if outcome["ok"] else "rejected"
    report.verdicts[str(path)] = verdict
    report.details["checks"] = {
        k: (rational_to_json(v) if k == "trace_b0" else bool(v)) for k, v in outcome.items()
    }
    _human(f"{path}: certificate {verdict}")
    return EXIT_OK if outcome["ok"] else EXIT_NEGATIVE


# -- reproduce ---------------------------------------------------------------------


def scenario_separation(args, report: RunReport) -> int:
    """The n = 3, s = 2 square that is magic but outside the matrix convex
    hull of the quantum permutation matrices, with an exact dual
    certificate."""
    square = counterexample_m2_3()
    report.details["square"] = square_to_json(square)
    strong = check_mconv_obstruction(square, mode=STRONG, eps=args.eps or DEFAULT_EPS)
    weak = check_mconv_obstruction(square, mode=WEAK, eps=args.eps or DEFAULT_EPS)
    report.verdicts["strong"] = strong.verdict
    report.verdicts["weak"] = weak.verdict
    _human(f"strong pencil: {strong.verdict}; weak pencil: {weak.verdict}")
    if strong.verdict != "no" or weak.verdict != "no":
        return EXIT_INCONCLUSIVE if "inconclusive" in (strong.verdict, weak.verdict) else EXIT_NEGATIVE
    witness = find_dual_certificate(strong.problem, eps=args.eps or DEFAULT_EPS)
    cert = certify_with_ladder(witness.y, strong.problem, _ladder(args.max_denominator))
    verification = verify_certificate(cert, square)
    report.details["pairings"] = {
        label: _pairing_str(value) for label, value in cert.pairings.items()
    }
    report.details["certificate_ok"] = bool(verification["ok"])
    report.verdicts["certificate"] = "verified" if verification["ok"] else "rejected"
    if args.out:
        dump_json(certificate_to_json(cert, square=square), args.out)
        report.certificates.append(str(args.out))
        _human(f"certificate -> {args.out}")
    for label in sorted(report.details["pairings"]):
        value = report.details["pairings"][label]
        if len(value) > 64:  # exact value lives in the JSON report
            num, _, den = value.partition("/")
            value = f"({len(num)}-digit)/({len(den)}-digit) ~ {float(Fraction(value)):.6e}"
        _human(f"  trace(Y {label}) = {value}")
    return EXIT_OK if verification["ok"] else EXIT_NEGATIVE


def scenario_no_semiclassical(args, report: RunReport) -> int:
    """The same square fails the semiclassical LMI, while a strictly
    interior square decomposes through the positive-map route."""
    square = counterexample_m2_3()
    res = check_semiclassical(square, eps=args.eps or DEFAULT_EPS)
    report.verdicts["counterexample"] = res.verdict
    _human(f"counterexample semiclassical check: {res.verdict}")
    if res.verdict != "no":
        return EXIT_INCONCLUSIVE if res.verdict == "inconclusive" else EXIT_NEGATIVE
    report.residuals["lmi_dual_objective"] = float(res.dual.t_star)
    interior = constant_square(3, 2)
    dec = interior_map_decomposition(interior)
    rebuilt = dec.reconstruct()
    ok = all(
        (rebuilt.block(i, j) - interior.block(i, j)).is_zero()
        for i in range(3)
        for j in range(3)
    )
    report.verdicts["interior_constant"] = "yes" if ok else "rejected"
    _human(f"constant square interior decomposition exact: {ok}")
    return EXIT_OK if ok else EXIT_NEGATIVE


def scenario_birkhoff_demo(args, report: RunReport) -> int:
    """Random rational doubly stochastic matrices decompose into at most
    (n-1)^2 + 1 permutations, matching the affine dimension count."""
    rng = np.random.default_rng(2024)
    worst = 0
    for n in (3, 4, 5):
        ds = random_doubly_stochastic(rng, n)
        terms = birkhoff_decompose(ds)
        bound = (n - 1) ** 2 + 1
        worst = max(worst, len(terms) - bound)
        report.details[f"n{n}"] = {
            "terms": len(terms),
            "bound": bound,
            "affine_dimension": magic_space_dimension(n),
        }
        _human(f"n={n}: {len(terms)} permutations, bound {bound}")
    report.verdicts["birkhoff-demo"] = "within bound" if worst <= 0 else "violated"
    return EXIT_OK if worst <= 0 else EXIT_NEGATIVE


SCENARIOS = {
    "separation": scenario_separation,
    "no-semiclassical": scenario_no_semiclassical,
    "birkhoff-demo": scenario_birkhoff_demo,
}


def cmd_reproduce(args, report: RunReport) -> int:
    names = list(SCENARIOS) if args.scenario == "all" else [args.scenario]
    codes = []
    for name in names:
        _human(f"-- {name} --")
        start = time.perf_counter()
        codes.append(SCENARIOS[name](args, report))
        report.timings[name] = round(time.perf_counter() - start, 4)
    return _combine(codes)


# -- wiring ------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qmagic",
        description="Magic squares over matrix algebras: membership checks and certificates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, handler, summary, inputs="+", needs_square_flags=True):
        p = sub.add_parser(name, help=summary)
        if inputs:
            p.add_argument("inputs", nargs=inputs, help="input file(s) or directory")
        p.add_argument("--eps", type=float, default=None, help="numeric tolerance")
        p.add_argument("--out", type=Path, default=None, help="output file")
        p.add_argument("--jobs", type=int, default=MAX_WORKERS, help="parallel jobs for batches")
        if needs_square_flags:
            rep = p.add_mutually_exclusive_group()
            rep.add_argument("--exact", action="store_true", help="require exact input")
            rep.add_argument("--float", action="store_true", help="convert input to floating point")
        p.set_defaults(handler=handler)
        return p

    add("validate", cmd_validate, "check the magic-square axioms")
    add(
        "birkhoff",
        cmd_birkhoff,
        "decompose a rational doubly stochastic matrix into permutations",
        needs_square_flags=False,
    )
    add("check-semiclassical", cmd_check_semiclassical, "decide semiclassical membership")
    dec = add("decompose", cmd_decompose, "produce a semiclassical decomposition")
    dec.add_argument(
        "--interior",
        action="store_true",
        help="use the positive-map route for strictly interior squares",
    )
    add("dilate", cmd_dilate, "synthesize a commuting dilation from a decomposition")
    obs = add("obstruction-check", cmd_obstruction_check, "run the matrix-convex-hull obstruction")
    obs.add_argument("--mode", choices=(WEAK, STRONG), default=STRONG)
    obs.add_argument("--max-denominator", type=int, default=None)
    fc = add("find-certificate", cmd_find_certificate, "search and exactly certify a dual witness")
    fc.add_argument("--mode", choices=(WEAK, STRONG), default=STRONG)
    fc.add_argument("--max-denominator", type=int, default=None)
    vc = add(
        "verify-certificate",
        cmd_verify_certificate,
        "re-verify a certificate by exact arithmetic alone",
        inputs=None,
    )
    vc.add_argument("certificate", type=Path, help="certificate file")
    vc.add_argument("--square", type=Path, default=None, help="square file (overrides embedded)")
    rep = sub.add_parser("reproduce", help="rerun a scripted headline scenario")
    rep.add_argument("scenario", choices=sorted(SCENARIOS) + ["all"])
    rep.add_argument("--eps", type=float, default=None)
    rep.add_argument("--out", type=Path, default=None)
    rep.add_argument("--max-denominator", type=int, default=None)
    rep.set_defaults(handler=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return EXIT_USAGE if err.code else EXIT_OK
    if args.command == "verify-certificate":
        args.inputs = [args.certificate]
    report = RunReport(command=args.command)
    start = time.perf_counter()
    try:
        code = args.handler(args, report)
    except (UsageError, FormatError, NotDoublyStochastic, TooLarge, OSError) as err:
        _human(f"error: {err}")
        report.verdicts["error"] = str(err)
        print_json(report)
        return EXIT_USAGE
    except BoundViolated as err:
        _human(f"interior bound violated: {err}")
        report.verdicts["error"] = str(err)
        print_json(report)
        return EXIT_INCONCLUSIVE
    except InvalidMagicSquare as err:
        _human(f"input is not a magic square: {err}")
        report.verdicts["error"] = str(err)
        print_json(report)
        return EXIT_USAGE
    report.timings["total"] = round(time.perf_counter() - start, 4)
    print_json(report)
    return code


def print_json(report: RunReport) -> None:
    import json

    json.dump(report.render(), sys.stdout, indent=1, default=str)
    sys.stdout.write("\n")


if __name__ == "__main__":
    sys.exit(main())
