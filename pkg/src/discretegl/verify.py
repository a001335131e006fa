"""Replay serialized certificates against the group they claim to describe.

Every check rebuilds the certificate's fields from its own key data (words,
exponents, depths) and compares them field by field; independent algebraic
checks run first so that a tampered certificate fails for a concrete reason.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

from . import cayley
from .classify import (
    Config,
    ball_sizes_from_words,
    LambdaResult,
    LambdaSignal,
    discreteness_section,
    extract_lambda,
    finite_certificate,
    generator_moduli,
    growth_certificate,
    moduli_certificate,
    nondiag_certificate,
    tame_certificate,
    va_witness_for_exponent,
)
from .errors import DiscreteGLError
from .exactcore import EXACT, FLOAT, GroupSpec, Polynomial, poly_gcd
from .spectral import is_diagonalizable, minimal_polynomial

REL_TOL = 1e-9


@dataclass
class VerifyResult:
    ok: bool
    failures: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


class _Fail(Exception):
    pass


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise _Fail(msg)


def _normalize(obj):
    return json.loads(json.dumps(obj))


def compare(a, b, path: str = "$") -> list[str]:
    """Differences between two JSON-like values; floats compared with a relative tolerance."""
    if isinstance(a, bool) or isinstance(b, bool):
        return [] if type(a) is type(b) and a == b else [f"{path}: {a!r} != {b!r}"]
    if isinstance(a, float) or isinstance(b, float):
        if isinstance(a, (int, float)) and isinstance(b, (int, float)):
            if math.isclose(a, b, rel_tol=REL_TOL, abs_tol=1e-12) or (math.isinf(a) and a == b):
                return []
        return [f"{path}: {a!r} != {b!r}"]
    if isinstance(a, dict) and isinstance(b, dict):
        if set(a) != set(b):
            return [f"{path}: keys {sorted(a)} != {sorted(b)}"]
        out = []
        for k in a:
            out += compare(a[k], b[k], f"{path}.{k}")
        return out
    if isinstance(a, list) and isinstance(b, list):
        if len(a) != len(b):
            return [f"{path}: length {len(a)} != {len(b)}"]
        out = []
        for i, (x, y) in enumerate(zip(a, b)):
            out += compare(x, y, f"{path}[{i}]")
            if out:
                break
        return out
    return [] if type(a) is type(b) and a == b else [f"{path}: {a!r} != {b!r}"]


def _word(obj, spec: GroupSpec) -> tuple:
    _require(isinstance(obj, list) and all(type(x) is int for x in obj), "word is not a list of integers")
    labels = {lab for lab, _ in spec.symmetric}
    _require(all(x in labels for x in obj), f"word {obj} uses labels outside the symmetric generating set")
    return tuple(obj)


def _words(obj, spec: GroupSpec) -> list:
    _require(isinstance(obj, list), "words must be a list")
    return [_word(w, spec) for w in obj]


def _working_spec(cert: dict, spec: GroupSpec) -> GroupSpec:
    mode = cert.get("mode")
    if mode == spec.mode:
        return spec
    _require(mode == FLOAT and spec.mode == EXACT, f"certificate mode {mode!r} does not match input")
    return spec.to_float()


def _canonical_key(spec: GroupSpec):
    pos = {lab: i for i, (lab, _) in enumerate(spec.symmetric)}
    return lambda w: (len(w), [pos[x] for x in w])


def _replay_ball(spec: GroupSpec, words: list, closed: bool) -> list:
    """Check that words enumerate a full ball (or, if closed, a finite group) in canonical order."""
    _require(len(words) >= 1 and words[0] == (), "ball must start with the empty word")
    key = _canonical_key(spec)
    _require(all(key(a) < key(b) for a, b in zip(words, words[1:])), "words are not in canonical order")
    wordset = set(words)
    _require(all(w[:-1] in wordset for w in words if w), "word set is not prefix-closed")
    elems = [spec.evaluate(w) for w in words]
    exact = spec.mode == EXACT

    def k(m):
        return m if exact else m.grid_key(spec.tolerance)

    index = {}
    for i, m in enumerate(elems):
        _require(k(m) not in index, f"words {list(words[index.get(k(m), 0)])} and {list(words[i])} coincide")
        index[k(m)] = i
    depth = len(words[-1])
    for w, m in zip(words, elems):
        if len(w) < depth or closed:
            for _, s in spec.symmetric:
                _require(k(m @ s) in index, f"ball not closed: {list(w)} times a generator is missing")
    return elems


def _verify_nondiag(cert: dict, spec: GroupSpec, config: Config) -> dict:
    _require(cert.get("mode") == spec.mode, "mode mismatch")
    word = _word(cert.get("word"), spec)
    M = spec.evaluate(word)
    if spec.mode == EXACT:
        mp = Polynomial.from_strings(cert.get("minimal_polynomial") or [])
        g = Polynomial.from_strings(cert.get("gcd_with_derivative") or [])
        _require(not any(v for r in mp.eval_matrix(M).rows() for v in r),
                 "stored minimal polynomial does not annihilate")
        _require(mp == minimal_polynomial(M), "stored minimal polynomial is not minimal")
        _require(g == poly_gcd(mp, mp.derivative()) and g.degree >= 1, "minimal polynomial is squarefree")
    else:
        _require(not is_diagonalizable(M, spec.tolerance), "element is numerically diagonalizable")
    return nondiag_certificate(spec, word)


def _verify_growth(cert: dict, spec: GroupSpec, config: Config) -> dict:
    _require(cert.get("mode") == spec.mode, "mode mismatch")
    words = _words(cert.get("words"), spec)
    sizes = cert.get("sizes")
    _require(sizes == ball_sizes_from_words(words), "sizes do not match stored words")
    window = cert.get("window")
    _require(type(window) is int and window >= 4, "bad window")
    gc = cayley.growth_profile(sizes, window)
    _require(gc.tag == "Exponential", f"growth fit is {gc.tag}")
    stats = cert.get("stats")
    _require(isinstance(stats, list) and len(stats) >= 2, "need statistics at two depths or more")
    depths = [s.get("m") if isinstance(s, dict) else None for s in stats]
    _require(all(type(m) is int and 2 <= m < len(sizes) for m in depths), "bad statistics depths")
    _require(len(set(depths)) == len(depths), "repeated statistics depth")
    elems = _replay_ball(spec, words, closed=False)
    expected = growth_certificate(spec, elems, words, window, depths)
    _require(expected["beta"] > 0, "Assouad slope is not positive")
    _require(all(r["ok"] for r in expected["ratio_bound"]), "ratio bound replay fails")
    return expected


def _verify_finite(cert: dict, spec: GroupSpec, config: Config) -> dict:
    _require(cert.get("mode") == spec.mode, "mode mismatch")
    words = _words(cert.get("words"), spec)
    _replay_ball(spec, words, closed=True)
    return finite_certificate(spec, words)


def _verify_tame(cert: dict, spec: GroupSpec, config: Config) -> dict:
    work = _working_spec(cert, spec)
    N = cert.get("exponent")
    _require(type(N) is int and N >= 1, "bad exponent")
    wit = va_witness_for_exponent(work, N)
    _require(wit is not None, f"exponent {N} does not give a commuting monomial family")
    lam = extract_lambda(wit, work, max_order=config.max_order, precision=config.precision)
    _require(isinstance(lam, LambdaResult), "lambda extraction does not succeed")
    if work.mode == EXACT:
        gen = lam.lattice.generator
        gen = gen if gen > 1 else 1 / gen
        for w in lam.schreier_words:
            D = wit.basis @ work.evaluate(w) @ wit.basis_inverse
            _require(D.is_diagonal(), f"kernel element {list(w)} is not diagonal")
            for i in range(work.n):
                z = D.entry(i, i)
                _require(_is_power(z.abs2(), gen), f"modulus^2 {z.abs2()} is not a power of {gen}")
                _require((z ** lam.unit_order).is_real() and (z ** lam.unit_order).re > 0,
                         "unit part order does not divide the stored order")
    return tame_certificate(work, wit, lam)


def _is_power(x: Fraction, base: Fraction) -> bool:
    if x == 1:
        return True
    k = round(math.log(float(x)) / math.log(float(base)))
    return k != 0 and base ** k == x


def _verify_moduli(cert: dict, spec: GroupSpec, config: Config) -> dict:
    _require(cert.get("mode") == spec.mode == EXACT, "independent-moduli certificates are exact only")
    source = cert.get("source")
    if source == "generators":
        _require(spec.n == 1 and all(g.entry(0, 0).is_real() for g in spec.generators),
                 "generator rule needs real 1x1 generators")
        words, lat = generator_moduli(spec)
        _require(lat.rank >= 2, "moduli are dependent")
        disc = cert.get("discreteness")
        _require(isinstance(disc, dict) and type(disc.get("depth")) is int and disc["depth"] >= 1,
                 "missing discreteness section")
        _require(disc["depth"] == config.depth, f"probe depth {disc['depth']} differs from configured {config.depth}")
        report = cayley.discreteness_probe(spec, disc["depth"], config.cap)
        _require(report.verdict == "ApproachingIdentity", f"probe verdict is {report.verdict}")
        return moduli_certificate(spec, "generators", words, lat,
                                  discreteness=discreteness_section(spec, disc["depth"], report))
    _require(source == "schreier", f"unknown source {source!r}")
    N = cert.get("exponent")
    _require(type(N) is int and N >= 1, "bad exponent")
    wit = va_witness_for_exponent(spec, N)
    _require(wit is not None, f"exponent {N} does not give a commuting monomial family")
    res = extract_lambda(wit, spec, max_order=config.max_order, precision=config.precision)
    _require(isinstance(res, LambdaSignal) and res.reason == "IndependentModuli", "moduli are dependent")
    return moduli_certificate(spec, "schreier", res.schreier_words, res.lattice, exponent=N, basis=wit.basis)


VERIFIERS = {
    "non_diagonalizable": _verify_nondiag,
    "exponential_growth": _verify_growth,
    "finite": _verify_finite,
    "tame": _verify_tame,
    "independent_moduli": _verify_moduli,
}


def verify_certificate(cert, spec: GroupSpec, config: Config | None = None) -> VerifyResult:
    """Replay a certificate; ok only if every stored field is reproduced."""
    config = config or Config()
    if not isinstance(cert, dict):
        return VerifyResult(False, ["certificate is not an object"])
    handler = VERIFIERS.get(cert.get("kind"))
    if handler is None:
        return VerifyResult(False, [f"unknown certificate kind {cert.get('kind')!r}"])
    try:
        expected = handler(cert, spec, config)
    except _Fail as exc:
        return VerifyResult(False, [str(exc)])
    except (DiscreteGLError, ValueError, TypeError, KeyError, ArithmeticError, AttributeError) as exc:
        return VerifyResult(False, [f"replay error: {type(exc).__name__}: {exc}"])
    diffs = compare(_normalize(cert), _normalize(expected))
    return VerifyResult(not diffs, diffs)
