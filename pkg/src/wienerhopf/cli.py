"""Command-line interface.

Exit codes: 0 clean, 1 clean but with ambiguous rank flags, 2 invalid input
or arguments, 3 numerical failure (or a failed check in ``verify``).
"""
import argparse
import logging
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io
from .errors import AmbiguousRank, NumericalError, ValidationError
from .indices import analyze
from .linalg import DEFAULT_TOL
from .realization import winding_number
from .testgen import ProblemSpec, generate_problem

log = logging.getLogger(__name__)

EXIT_OK, EXIT_FLAGGED, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2, 3
TRUTH_NAME = "truth.json"


@dataclass
class RunConfig:
    tolerance: float = DEFAULT_TOL
    samples: int = 1024
    outputFormat: str = "human"
    outputDir: Path = None

    def __post_init__(self):
        if not 0.0 < self.tolerance < 1e-2:
            raise ValidationError(f"--tol must lie in (0, 1e-2), got {self.tolerance:g}")
        if self.samples < 256:
            raise ValidationError(f"--samples must be at least 256, got {self.samples}")


def _emit(cfg, payload, human):
    if cfg.outputFormat == "json":
        print(io.dump_json(payload))
    else:
        print(human)


def _fail(cfg, exc, path=None):
    code = EXIT_NUMERICAL if isinstance(exc, NumericalError) else EXIT_INVALID
    kind = type(exc).__name__
    stage = getattr(exc, "stage", None)
    where = f" in stage {stage}" if stage else ""
    msg = f"{path + ': ' if path else ''}{kind}{where}: {exc}"
    if cfg.outputFormat == "json":
        print(io.dump_json({"file": path, "error": kind, "stage": stage, "message": str(exc)}))
    print(msg, file=sys.stderr)
    return code


def _index_payload(res, cfg):
    idx, rep = res.indices, res.report
    return {
        **idx.to_dict(),
        "winding": rep.winding,
        "flags": rep.flags,
        "residuals": rep.residuals,
        "tol": cfg.tolerance,
    }


def _format_indices(idx, rep):
    lines = [
        f"negatives  {idx.negatives}",
        f"zeros      {idx.zeros}",
        f"positives  {idx.positives}",
        f"indices    {idx.as_list()}",
        f"winding    {rep.winding} ({'consistent' if rep.sum_rule else 'INCONSISTENT'})",
    ]
    lines += [f"flag       {f}" for f in rep.flags]
    return "\n".join(lines)


def _indices_one(path, tol, samples):
    # runs in a worker process when --jobs > 1; returns plain data only
    cfg = RunConfig(tol, samples, "json")
    try:
        r = io.load_realization(path)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", AmbiguousRank)
            res = analyze(r, cfg.tolerance, validate_samples=cfg.samples)
    except (ValidationError, NumericalError) as exc:
        kind, stage = type(exc).__name__, getattr(exc, "stage", None)
        code = EXIT_NUMERICAL if isinstance(exc, NumericalError) else EXIT_INVALID
        return code, {"file": str(path), "error": kind, "stage": stage, "message": str(exc)}, None
    payload = _index_payload(res, cfg)
    code = EXIT_FLAGGED if res.report.flags else EXIT_OK
    return code, io.to_jsonable(payload), _format_indices(res.indices, res.report)


def _problem_files(target):
    target = Path(target)
    if target.is_dir():
        return sorted(p for p in target.glob("*.json") if p.name != TRUTH_NAME)
    return [target]


def cmd_indices(args, cfg):
    files = _problem_files(args.file)
    if len(files) == 1 and not Path(args.file).is_dir():
        jobs = [_indices_one(files[0], cfg.tolerance, cfg.samples)]
    elif args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            jobs = list(pool.map(_indices_one, files, [cfg.tolerance] * len(files), [cfg.samples] * len(files)))
    else:
        jobs = [_indices_one(f, cfg.tolerance, cfg.samples) for f in files]
    batch = len(files) != 1 or Path(args.file).is_dir()
    for path, (code, payload, human) in zip(files, jobs):
        if "error" in payload:
            msg = f"{payload['file']}: {payload['error']}"
            msg += f" in stage {payload['stage']}" if payload["stage"] else ""
            print(f"{msg}: {payload['message']}", file=sys.stderr)
            if cfg.outputFormat == "json":
                print(io.dump_json(payload))
            continue
        if batch:
            payload = {"file": str(path), **payload}
            human = f"== {path}\n{human}"
        _emit(cfg, payload, human)
    return max((code for code, _, _ in jobs), default=EXIT_OK)


def _prepare_out(path):
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ValidationError(f"output directory {out} is not writable: {exc.strerror or exc}") from exc
    return out


def cmd_factor(args, cfg):
    try:
        r = io.load_realization(args.file)
        out = _prepare_out(args.out)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", AmbiguousRank)
            res = analyze(r, cfg.tolerance, validate_samples=cfg.samples)
    except (ValidationError, NumericalError) as exc:
        return _fail(cfg, exc, args.file)
    dss, rr = res.dss, res.report.residuals
    files = {
        "psi.json": io.outer_factor_to_dict(res.psi),
        "xi.json": io.unitary_factor_to_dict(res.xi_min),
        "v.json": io.bi_inner_to_dict(dss.V, {"system_unitary": rr["v_unitary"], "dss_product": rr["dss_product"]}),
        "w.json": io.bi_inner_to_dict(dss.W, {"system_unitary": rr["w_unitary"], "dss_product": rr["dss_product"]}),
        "x.json": io.coupling_to_dict(dss),
    }
    try:
        for name, doc in files.items():
            io.dump_json({**doc, "tol": cfg.tolerance}, out / name)
    except OSError as exc:
        return _fail(cfg, ValidationError(f"cannot write to {out}: {exc}"), args.file)
    payload = {"written": sorted(str(out / n) for n in files), **_index_payload(res, cfg)}
    _emit(cfg, payload, "\n".join(["wrote " + p for p in payload["written"]]))
    return EXIT_FLAGGED if res.report.flags else EXIT_OK


def _load_stored(directory):
    directory = Path(directory)
    x = io.read_json(directory / "x.json")
    if not isinstance(x, dict) or "X" not in x:
        raise io.ParseError("x.json: key 'X' is required")
    X = io.decode_matrix(x["X"], "x.X")
    shape = tuple(x.get("shape", X.shape))
    if X.size == 0:
        X = np.zeros(shape, dtype=np.complex128)
    V = W = None
    if (directory / "v.json").exists() and (directory / "w.json").exists():
        V = io.bi_inner_from_dict(io.read_json(directory / "v.json"), "v")
        W = io.bi_inner_from_dict(io.read_json(directory / "w.json"), "w")
    return X, V, W


def cmd_verify(args, cfg):
    from .verify import stored_coupling_checks, verification_suite

    try:
        r = io.load_realization(args.file)
        stored = _load_stored(args.factors) if args.factors else None
        res, checks = verification_suite(r, cfg.tolerance, cfg.samples)
    except (ValidationError, NumericalError) as exc:
        return _fail(cfg, exc, args.file)
    if stored is not None:
        checks += stored_coupling_checks(res.dss, *stored, tol=cfg.tolerance)
    ok = all(c.passed for c in checks)
    payload = {
        "pass": ok,
        "checks": [c.to_dict() for c in checks],
        **_index_payload(res, cfg),
    }
    rows = []
    for c in checks:
        value = "" if c.value is None else f"{c.value:.3e}"
        bound = "" if c.threshold is None else f"<= {c.threshold:.1e}"
        rows.append(f"{'PASS' if c.passed else 'FAIL'}  {c.name:<30} {value:>10} {bound:<10} {c.note}".rstrip())
    rows.append(f"overall: {'PASS' if ok else 'FAIL'}")
    _emit(cfg, payload, "\n".join(rows))
    if not ok:
        return EXIT_NUMERICAL
    return EXIT_FLAGGED if res.report.flags else EXIT_OK


def _parse_indices(text):
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ValidationError(f"--indices must be comma-separated integers, got {text!r}") from exc


def cmd_generate(args, cfg):
    try:
        spec = ProblemSpec(
            m=args.m, indices=tuple(_parse_indices(args.indices)), statePlus=args.state_plus,
            stateMinus=args.state_minus, seed=args.seed, spectralCap=args.spectral_cap,
        )
        out = _prepare_out(args.out)
        r, truth = generate_problem(spec)
    except (ValidationError, NumericalError) as exc:
        return _fail(cfg, exc)
    problem = out / args.name
    io.save_realization(r, problem)
    io.dump_json({"indices": list(spec.indices), **truth.to_dict()}, out / TRUTH_NAME)
    payload = {"problem": str(problem), "truth": str(out / TRUTH_NAME), "indices": list(spec.indices)}
    _emit(cfg, payload, f"wrote {problem} and {out / TRUTH_NAME}")
    return EXIT_OK


def cmd_winding(args, cfg):
    try:
        r = io.load_realization(args.file)
        w = winding_number(r, max(cfg.samples, 256))
    except (ValidationError, NumericalError) as exc:
        return _fail(cfg, exc, args.file)
    _emit(cfg, {"winding": w}, str(w))
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="rank and check tolerance (default 1e-9)")
    common.add_argument("--samples", type=int, default=1024, help="circle samples for checks (>= 256)")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="wienerhopf", description="Right Wiener-Hopf indices of rational matrix functions."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("indices", parents=[common], help="compute the indices of a problem file or directory")
    p.add_argument("file")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for a directory of problems")
    p.set_defaults(func=cmd_indices)

    p = sub.add_parser("factor", parents=[common], help="export psi, xi, v, w and x as JSON")
    p.add_argument("file")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_factor)

    p = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    p.add_argument("file")
    p.add_argument("--factors", help="directory written by 'factor' whose x.json is cross-checked")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("generate", parents=[common], help="write a problem with prescribed indices")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--indices", required=True, help="comma-separated, e.g. -1,0,2")
    p.add_argument("--state-plus", type=int, default=2)
    p.add_argument("--state-minus", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--spectral-cap", type=float, default=0.6)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--name", default="problem.json")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("winding", parents=[common], help="winding number of det R on the circle")
    p.add_argument("file")
    p.set_defaults(func=cmd_winding)
    return parser


def _glue_negative_values(argv):
    # "--indices -1,0,2" would otherwise read -1,0,2 as an option
    out, it = [], iter(argv)
    for tok in it:
        if tok == "--indices":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"--indices={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None):
    parser = build_parser()
    argv = _glue_negative_values(sys.argv[1:] if argv is None else list(argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors, which matches the contract
        return exc.code if isinstance(exc.code, int) else EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        cfg = RunConfig(args.tol, args.samples, "json" if args.json else "human")
    except ValidationError as exc:
        print(f"ValidationError: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return args.func(args, cfg)


if __name__ == "__main__":
    sys.exit(main())
