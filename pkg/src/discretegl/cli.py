"""Command-line interface.

Exit codes: 0 success, 1 certificate replay failed, 2 invalid input,
3 resource exhaustion.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import tempfile
import time

import jsonschema

from . import __version__
from .cayley import ball_stats, ball_table_csv, discreteness_probe, enumerate_ball, growth_profile
from .classify import Config, LambdaResult, classify, extract_lambda, virtually_abelian_probe
from .errors import DiscreteGLError, NonDiagonalizableFound, SingularMatrixError, TruncatedBallError
from .exactcore import EXACT, MODES, GroupSpec, format_scalar, mat_equal, matrix
from .spectral import assemble_jordan, jordan_basis, jordan_block_power
from .verify import verify_certificate

EXIT_OK, EXIT_VERIFY_FAILED, EXIT_INPUT, EXIT_RESOURCE = 0, 1, 2, 3

_SCALAR = {"type": ["string", "number"]}
CONFIG_KEYS = {
    "depth": {"type": "integer", "minimum": 0},
    "cap": {"type": "integer", "minimum": 1},
    "max_order": {"type": "integer", "minimum": 1},
    "exponent_max": {"type": "integer", "minimum": 1},
    "window": {"type": "integer", "minimum": 4},
    "precision": {"type": "number", "exclusiveMinimum": 0},
    "stats_max_elements": {"type": "integer", "minimum": 2},
    "ratio_samples": {"type": "integer", "minimum": 1},
    "heisenberg_depth": {"type": "integer", "minimum": 2},
}
INPUT_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["version", "group"],
    "properties": {
        "version": {"const": 1},
        "group": {
            "type": "object",
            "additionalProperties": False,
            "required": ["generators"],
            "properties": {
                "n": {"type": "integer", "minimum": 1},
                "generators": {
                    "type": "array",
                    "minItems": 1,
                    "items": {"type": "array", "minItems": 1,
                              "items": {"type": "array", "minItems": 1, "items": _SCALAR}},
                },
            },
        },
        "mode": {"enum": list(MODES)},
        "tolerance": {"type": "number", "exclusiveMinimum": 0},
        "config": {"type": "object", "additionalProperties": False, "properties": CONFIG_KEYS},
    },
}


class InputProblem(Exception):
    pass


class Input:
    def __init__(self, raw: bytes, doc: dict, spec: GroupSpec, config: Config):
        self.raw, self.doc, self.spec, self.config = raw, doc, spec, config

    @property
    def sha256(self) -> str:
        return hashlib.sha256(self.raw).hexdigest()


def load_input(path: str, args: argparse.Namespace) -> Input:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise InputProblem(f"cannot read {path}: {exc.strerror}") from exc
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise InputProblem(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    try:
        jsonschema.validate(doc, INPUT_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "(root)"
        raise InputProblem(f"{path}: schema violation at {where}: {exc.message}") from exc
    mode = args.mode or doc.get("mode", EXACT)
    tol = args.tolerance if args.tolerance is not None else doc.get("tolerance", 1e-9)
    gens = doc["group"]["generators"]
    n = doc["group"].get("n", len(gens[0]))
    for idx, g in enumerate(gens):
        if len(g) != n or any(len(r) != n for r in g):
            raise InputProblem(f"generator {idx} is not {n}x{n}")
    try:
        spec = GroupSpec(tuple(matrix(g, mode) for g in gens), mode, tol)
    except SingularMatrixError as exc:
        raise InputProblem(str(exc)) from exc
    except DiscreteGLError as exc:
        raise InputProblem(f"invalid generators: {exc}") from exc
    cfg = dict(doc.get("config", {}))
    for key in ("depth", "cap", "max_order", "exponent_max", "window", "precision"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return Input(raw, doc, spec, Config.from_dict(cfg))


def _jsonable(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else ("inf" if obj > 0 else "-inf" if obj < 0 else "nan")
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, ensure_ascii=False) + "\n"


def emit(text: str, output: str | None) -> None:
    """Write once: atomically to a file, or in a single call to stdout."""
    if output is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    d = os.path.dirname(os.path.abspath(output))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".report-")
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, output)


def _header(inp: Input, command: str) -> dict:
    return {"tool": {"name": "discretegl", "version": __version__, "command": command},
            "input_sha256": inp.sha256, "mode": inp.spec.mode, "tolerance": inp.spec.tolerance,
            "config": inp.config.to_dict()}


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_classify(inp: Input, args) -> tuple[dict, int]:
    start = time.perf_counter()
    verdict = classify(inp.spec, inp.config)
    report = _header(inp, "classify")
    report["verdict"] = verdict.summary()
    report["certificate"] = verdict.certificate
    report["diagnostics"] = verdict.diagnostics
    report["timing"] = {"seconds": round(time.perf_counter() - start, 6)}
    code = EXIT_RESOURCE if verdict.tag == "Inconclusive" and "resource" in verdict.diagnostics else EXIT_OK
    return report, code


def cmd_ball(inp: Input, args) -> tuple[dict | str, int]:
    ball = enumerate_ball(inp.spec, inp.config.depth, inp.config.cap)
    depths = [m for m in range(1, ball.depth_reached + 1)
              if 2 <= ball.sizes[m] <= inp.config.stats_max_elements]
    stats = ball_stats(ball, depths)
    code = EXIT_RESOURCE if ball.truncated else EXIT_OK
    if args.csv:
        return ball_table_csv(ball, stats), code
    report = _header(inp, "ball")
    report["sizes"] = ball.sizes
    report["truncated"] = ball.truncated
    report["closed"] = ball.closed
    report["stats"] = [{"m": m, "count": s.count, "diameter": s.diameter, "separation": s.separation,
                        "ratio": s.ratio, "norm_bound": s.norm_bound, "separation_floor": s.separation_floor}
                       for m, s in stats.items()]
    return report, code


def cmd_growth(inp: Input, args) -> tuple[dict, int]:
    ball = enumerate_ball(inp.spec, inp.config.depth, inp.config.cap)
    report = _header(inp, "growth")
    report["sizes"] = ball.sizes
    try:
        gc = growth_profile(ball.sizes, inp.config.window, ball.truncated)
    except TruncatedBallError as exc:
        report["growth"] = {"tag": "refused", "detail": str(exc)}
        return report, EXIT_RESOURCE
    report["growth"] = {"tag": gc.tag, "degree": gc.degree, "base": gc.base, "order": gc.order,
                        "residual_exponential": gc.residual_exponential,
                        "residual_polynomial": gc.residual_polynomial, "depths": list(gc.depths)}
    return report, EXIT_OK


def cmd_discreteness(inp: Input, args) -> tuple[dict, int]:
    rep = discreteness_probe(inp.spec, max(inp.config.depth, 1), inp.config.cap)
    report = _header(inp, "discreteness")
    report["discreteness"] = {"verdict": rep.verdict, "minima": rep.minima, "decreases": rep.decreases,
                              "witness": list(rep.witness) if rep.witness is not None else None,
                              "witness_value": rep.witness_value, "d_lower": rep.d_lower,
                              "truncated": rep.truncated}
    return report, EXIT_RESOURCE if rep.verdict == "Indeterminate" else EXIT_OK


def cmd_lambda(inp: Input, args) -> tuple[dict, int]:
    report = _header(inp, "lambda")
    try:
        wit = virtually_abelian_probe(inp.spec, inp.config.depth, inp.config.exponent_max)
    except NonDiagonalizableFound as exc:
        raise InputProblem(f"element {list(exc.word)} is not diagonalizable") from exc
    if wit is None:
        raise InputProblem("no commuting monomial family found; lambda needs (virtually) diagonal input")
    res = extract_lambda(wit, inp.spec, inp.config.depth, inp.config.max_order, inp.config.precision)
    if isinstance(res, LambdaResult):
        report["lambda"] = res.lam
        report["unit_order"] = res.unit_order
        report["alphas"] = res.alphas
        report["alpha_exponents"] = res.alpha_exponents
        report["rank"] = res.lattice.rank
        report["numeric"] = res.numeric
    else:
        report["lambda"] = None
        report["signal"] = res.reason
        report["detail"] = res.detail
        if res.lattice is not None:
            report["rank"] = res.lattice.rank
    return report, EXIT_OK


def cmd_jordan(inp: Input, args) -> tuple[dict, int]:
    spec = inp.spec
    idx = args.generator
    if not 0 <= idx < len(spec.generators):
        raise InputProblem(f"generator index {idx} out of range")
    g = spec.generators[idx]
    js = jordan_basis(g, spec.tolerance)
    report = _header(inp, "jordan")
    report["generator"] = idx
    report["blocks"] = [[format_scalar(lam), size] for lam, size in js.blocks]
    report["basis"] = js.basis.to_strings()
    checks = []
    binv = js.basis.inverse() if js.mode == EXACT else js.basis.inverse(spec.tolerance)
    power = g
    for k in range(1, args.powers + 1):
        local = js.basis @ power @ binv
        pos, ok = 0, True
        for lam, size in js.blocks:
            blk = jordan_block_power(lam, size, k)
            for i in range(size):
                for j in range(size):
                    a, b = local.entry(pos + i, pos + j), blk.entry(i, j)
                    ok &= (a == b) if js.mode == EXACT else abs(complex(a) - complex(b)) <= 1e-6 * max(1, abs(b))
            pos += size
        checks.append({"k": k, "ok": bool(ok)})
        power = power @ g
    report["power_checks"] = checks
    report["reconstruction_ok"] = bool(mat_equal(js.basis @ g @ binv, assemble_jordan(js.blocks, g.n, js.mode),
                                                 1e-6 if js.mode != EXACT else spec.tolerance))
    return report, EXIT_OK


def cmd_verify(inp: Input, args) -> tuple[dict, int]:
    try:
        with open(args.report, "rb") as fh:
            rep = json.loads(fh.read())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputProblem(f"cannot read report {args.report}: {exc}") from exc
    cert = rep.get("certificate") if isinstance(rep, dict) else None
    if cert is None:
        res_ok, failures = False, ["report carries no certificate"]
    else:
        res = verify_certificate(cert, inp.spec, inp.config)
        res_ok, failures = res.ok, res.failures
    out = {"verified": res_ok, "failures": failures}
    if not res_ok:
        sys.stderr.write("certificate replay failed\n")
        for f in failures[:10]:
            sys.stderr.write(f"  {f}\n")
    return out, EXIT_OK if res_ok else EXIT_VERIFY_FAILED


COMMANDS = {
    "classify": cmd_classify,
    "ball": cmd_ball,
    "growth": cmd_growth,
    "discreteness": cmd_discreteness,
    "lambda": cmd_lambda,
    "jordan": cmd_jordan,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("input", help="input JSON document")
    common.add_argument("--depth", type=int)
    common.add_argument("--cap", type=int)
    common.add_argument("--mode", choices=MODES)
    common.add_argument("--tolerance", type=float)
    common.add_argument("--max-order", dest="max_order", type=int)
    common.add_argument("--exponent-max", dest="exponent_max", type=int)
    common.add_argument("--window", type=int)
    common.add_argument("--precision", type=float)
    common.add_argument("--output", "-o", help="write the result here instead of stdout")

    parser = argparse.ArgumentParser(prog="discretegl", description="Classify finitely generated matrix groups.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("classify", parents=[common], help="run the full pipeline")
    p = sub.add_parser("ball", parents=[common], help="enumerate a ball and its separation statistics")
    p.add_argument("--csv", action="store_true", help="emit a CSV table instead of JSON")
    sub.add_parser("growth", parents=[common], help="fit the growth of ball sizes")
    sub.add_parser("discreteness", parents=[common], help="probe for elements near the identity")
    sub.add_parser("lambda", parents=[common], help="extract lambda from (virtually) diagonal input")
    p = sub.add_parser("jordan", parents=[common], help="Jordan structure of one generator")
    p.add_argument("--generator", type=int, default=0)
    p.add_argument("--powers", type=int, default=5, help="check block powers up to this exponent")
    p = sub.add_parser("verify", parents=[common], help="replay a report's certificate")
    p.add_argument("report", help="report JSON produced by classify")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for key, val in (("depth", args.depth), ("cap", args.cap), ("max_order", args.max_order),
                     ("exponent_max", args.exponent_max), ("window", args.window)):
        if val is not None and val < CONFIG_KEYS[key].get("minimum", 0):
            sys.stderr.write(f"error: --{key.replace('_', '-')} must be >= {CONFIG_KEYS[key]['minimum']}\n")
            return EXIT_INPUT
    try:
        inp = load_input(args.input, args)
        result, code = COMMANDS[args.command](inp, args)
    except InputProblem as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except MemoryError:
        sys.stderr.write("error: out of memory\n")
        return EXIT_RESOURCE
    except DiscreteGLError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    emit(result if isinstance(result, str) else dumps(result), args.output)
    return code


def deterministic_section(report: dict) -> dict:
    """Everything in a report except wall-clock timing."""
    return {k: v for k, v in report.items() if k != "timing"}


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
