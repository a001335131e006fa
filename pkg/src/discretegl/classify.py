"""Decision pipeline: evidence gathering, virtual-abelian probing and lambda extraction."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any

import numpy as np

from . import cayley
from .cayley import Ball, enumerate_ball, growth_profile
from .errors import (
    NonDiagonalizableFound,
    PreconditionError,
    SpectrumNotRepresentable,
    TruncatedBallError,
)
from .exactcore import (
    EXACT,
    FLOAT,
    GaussianRational,
    GroupSpec,
    format_scalar,
    invert_word,
    mat_equal,
    mat_inverse,
    poly_gcd,
)
from .intlattice import ExponentLattice, multiplicative_rank
from .spectral import (
    DEFAULT_MAX_ORDER,
    is_diagonalizable,
    jordan_basis,
    minimal_polynomial,
    simultaneous_diagonalize,
    unit_part_order,
)
from .structure import build_ratio_function, density_statistic, sample_ratio_image, search_heisenberg

CERTIFICATE_RATIO_SAMPLES = 5


@dataclass(frozen=True)
class Config:
    depth: int = cayley.DEFAULT_DEPTH
    cap: int = cayley.DEFAULT_CAP
    max_order: int = DEFAULT_MAX_ORDER
    exponent_max: int = 12
    window: int = cayley.DEFAULT_WINDOW
    precision: float = 1e-9
    stats_max_elements: int = 5000
    ratio_samples: int = 20
    heisenberg_depth: int = 2

    @classmethod
    def from_dict(cls, d: dict | None) -> "Config":
        return replace(cls(), **(d or {}))

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


# ---------------------------------------------------------------------------
# Virtual-abelian probe
# ---------------------------------------------------------------------------

@dataclass
class VAWitness:
    """Commuting family {w^N}, a basis diagonalizing it, and the induced permutation action."""

    exponent: int
    family_words: list
    family: list
    basis: Any
    basis_inverse: Any
    permutations: dict  # symmetric label -> tuple, perm[j] = row of the nonzero entry in column j
    coset_words: list
    coset_reps: list
    coset_perms: list
    mode: str

    @property
    def index(self) -> int:
        return len(self.coset_words)


def _family_words(spec: GroupSpec, N: int) -> list[tuple]:
    labels = [lab for lab, _ in spec.symmetric]
    words = [(lab,) * N for lab in labels]
    for s in labels:
        for t in labels:
            if s != t and s != -t:
                words.append((s, t) * N)
    return words


def _dedup(spec: GroupSpec, words: list, mats: list) -> tuple[list, list]:
    out_w, out_m = [], []
    for w, m in zip(words, mats):
        if spec.is_identity(m) or any(spec.equal(m, x) for x in out_m):
            continue
        out_w.append(w)
        out_m.append(m)
    return out_w, out_m


def monomial_permutation(M, tol: float) -> tuple | None:
    """perm[j] = i for the unique nonzero M[i, j], or None if M is not monomial."""
    n = M.n
    if M.mode == EXACT:
        nz = [[bool(M.entry(i, j)) for j in range(n)] for i in range(n)]
    else:
        a = M.to_numpy()
        scale = max(1.0, float(np.max(np.abs(a))))
        nz = [[abs(a[i, j]) > max(tol, 1e-9) * 10 * scale for j in range(n)] for i in range(n)]
    perm = []
    for j in range(n):
        rows = [i for i in range(n) if nz[i][j]]
        if len(rows) != 1:
            return None
        perm.append(rows[0])
    return tuple(perm) if sorted(perm) == list(range(n)) else None


def compose(p: tuple, q: tuple) -> tuple:
    return tuple(p[q[j]] for j in range(len(q)))


def _coset_bfs(spec: GroupSpec, perms: dict) -> tuple[list, list]:
    n = spec.n
    start = tuple(range(n))
    seen = {start: ()}
    order = [start]
    for p in order:
        for label, _ in spec.symmetric:
            q = compose(p, perms[label])
            if q not in seen:
                seen[q] = seen[p] + (label,)
                order.append(q)
    return [seen[p] for p in order], order


def va_witness_for_exponent(spec: GroupSpec, N: int) -> VAWitness | None:
    """The probe's check for a single exponent N; None if N does not work."""
    tol = spec.tolerance
    words = _family_words(spec, N)
    words, mats = _dedup(spec, words, [spec.evaluate(w) for w in words])
    for w, m in zip(words, mats):
        if not is_diagonalizable(m, tol):
            raise NonDiagonalizableFound(w, m)
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            if not mat_equal(mats[i] @ mats[j], mats[j] @ mats[i], tol):
                return None
    if mats:
        wit = simultaneous_diagonalize(mats, tol, check=False)
        P = wit.basis
    else:
        P = spec.identity
    Pinv = mat_inverse(P, tol)
    perms = {}
    for label, g in spec.symmetric:
        perm = monomial_permutation(P @ g @ Pinv, tol)
        if perm is None:
            return None
        perms[label] = perm
    coset_words, coset_perms = _coset_bfs(spec, perms)
    reps = [spec.evaluate(w) for w in coset_words]
    return VAWitness(N, words, mats, P, Pinv, perms, coset_words, reps, coset_perms, spec.mode)


def virtually_abelian_probe(spec: GroupSpec, depth: int = cayley.DEFAULT_DEPTH,
                            exponent_max: int = 12) -> VAWitness | None:
    """Find N such that the N-th powers of generators and 2-letter products commute,
    and every generator is monomial in their common eigenbasis.

    Sound but incomplete; raises NonDiagonalizableFound if a family member turns
    out not to be diagonalizable. ``depth`` is accepted for interface symmetry.
    """
    for N in range(1, exponent_max + 1):
        wit = va_witness_for_exponent(spec, N)
        if wit is not None:
            return wit
    return None


# ---------------------------------------------------------------------------
# Lambda extraction
# ---------------------------------------------------------------------------

def _sqrt_fraction(q: Fraction) -> Fraction | None:
    a, b = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if a * a == q.numerator and b * b == q.denominator:
        return Fraction(a, b)
    return None


def sqrt_text(q: Fraction) -> str:
    """Text form of sqrt(q) for rational q > 0."""
    r = _sqrt_fraction(q)
    if r is not None:
        return format_scalar(GaussianRational(r))
    return f"sqrt({format_scalar(GaussianRational(q))})"


@dataclass
class LambdaResult:
    lam: str
    lam_float: float
    unit_order: int
    unit_orders: list
    alphas: list  # per coordinate, text
    alpha_exponents: list  # alpha_i = lam ** alpha_exponents[i]
    lattice: ExponentLattice
    schreier_words: list
    numeric: bool


@dataclass
class LambdaSignal:
    """extract_lambda could not produce a tame answer."""

    reason: str  # IndependentModuli | NotDiscreteEvidence | FiniteSuspected
    detail: str
    lattice: ExponentLattice | None = None
    schreier_words: list = field(default_factory=list)


def schreier_words(spec: GroupSpec, wit: VAWitness) -> list[tuple]:
    """Words for Schreier generators of the kernel of the permutation action."""
    rep_of = {p: w for p, w in zip(wit.coset_perms, wit.coset_words)}
    out = []
    for p, w in zip(wit.coset_perms, wit.coset_words):
        for label, _ in spec.symmetric:
            q = compose(p, wit.permutations[label])
            out.append(w + (label,) + invert_word(rep_of[q]))
    return out


def diagonal_coordinates(spec: GroupSpec, wit: VAWitness, words: list) -> tuple[list, list]:
    """Non-identity kernel elements (deduplicated) and their diagonal entries in the witness basis."""
    kept, coords, seen = [], [], []
    for w in words:
        g = spec.evaluate(w)
        if spec.is_identity(g) or any(spec.equal(g, x) for x in seen):
            continue
        seen.append(g)
        D = wit.basis @ g @ wit.basis_inverse
        kept.append(w)
        coords.append([D.entry(i, i) for i in range(spec.n)])
    return kept, coords


def extract_lambda(wit: VAWitness, spec: GroupSpec, depth: int = cayley.DEFAULT_DEPTH,
                   max_order: int = DEFAULT_MAX_ORDER, precision: float = 1e-9) -> LambdaResult | LambdaSignal:
    """Split kernel coordinates into unit parts and moduli and find the common base lambda.

    The kernel of the permutation action is generated by Schreier generators, so
    their coordinates generate every projection; unit orders combine by lcm.
    """
    words, coords = diagonal_coordinates(spec, wit, schreier_words(spec, wit))
    exact = wit.mode == EXACT
    values = [z for row in coords for z in row]
    if not values:
        return LambdaSignal("FiniteSuspected", "diagonal part is trivial", None, words)
    orders = []
    for z in values:
        k = unit_part_order(z, max_order, precision)
        if k is None:
            return LambdaSignal("NotDiscreteEvidence",
                                f"unit part of {format_scalar(z)} has no order <= {max_order}", None, words)
        orders.append(k)
    m = 1
    for k in orders:
        m = m * k // math.gcd(m, k)
    if exact:
        moduli = [z.abs2() for z in values]
        lat = multiplicative_rank(moduli, EXACT)
    else:
        moduli = [abs(complex(z)) for z in values]
        lat = multiplicative_rank(moduli, FLOAT, precision)
    if lat.rank >= 2:
        return LambdaSignal("IndependentModuli", f"moduli generate a rank-{lat.rank} exponent lattice", lat, words)
    if lat.rank == 0:
        return LambdaSignal("FiniteSuspected", "every modulus equals 1", lat, words)
    gen, exps = lat.generator, list(lat.exponents)
    if gen < 1:
        gen, exps = 1 / gen, [-e for e in exps]
    n = spec.n
    alpha_exps = []
    for i in range(n):
        g = 0
        for r in range(len(coords)):
            g = math.gcd(g, exps[r * n + i])
        alpha_exps.append(g)
    if exact:
        lam = sqrt_text(gen)
        lam_float = math.sqrt(float(gen))
        alphas = [sqrt_text(gen ** k) for k in alpha_exps]
    else:
        lam_float = float(gen)
        lam = repr(lam_float)
        alphas = [repr(lam_float ** k) for k in alpha_exps]
    unit_orders = [orders[r * n:(r + 1) * n] for r in range(len(coords))]
    return LambdaResult(lam, lam_float, m, unit_orders, alphas, alpha_exps, lat, words, not exact)


# ---------------------------------------------------------------------------
# Certificates
# ---------------------------------------------------------------------------

def _mat_text(M) -> list:
    return M.to_strings()


def _poly_text(p) -> list:
    return p.to_strings()


def nondiag_certificate(spec: GroupSpec, word: tuple) -> dict:
    """Evidence that spec.evaluate(word) is not diagonalizable."""
    M = spec.evaluate(word)
    cert: dict = {"kind": "non_diagonalizable", "mode": spec.mode, "word": list(word), "depth": len(word),
                  "matrix": _mat_text(M)}
    if spec.mode == EXACT:
        mp = minimal_polynomial(M)
        g = poly_gcd(mp, mp.derivative())
        cert["minimal_polynomial"] = _poly_text(mp)
        cert["gcd_with_derivative"] = _poly_text(g)
        try:
            js = jordan_basis(M)
            cert["jordan_blocks"] = [[format_scalar(lam), size] for lam, size in js.blocks]
            rf = build_ratio_function(M, spec.tolerance)
            k = CERTIFICATE_RATIO_SAMPLES
            cert["ratio_samples"] = [[i, j, format_scalar(GaussianRational(v))]
                                     for i, j, v in sample_ratio_image(rf, k, k).entries]
        except SpectrumNotRepresentable:
            cert["jordan_blocks"] = None
            cert["ratio_samples"] = None
        cert["numeric"] = False
    else:
        res = is_diagonalizable(M, spec.tolerance)
        cert["condition"] = res.condition
        cert["residual"] = res.residual
        cert["numeric"] = True
    return cert


def growth_certificate(spec: GroupSpec, elements: list, words: list, window: int, stats_depths: list) -> dict:
    """Growth fit, separation statistics and ratio-bound replay for a ball given by its words."""
    sizes = ball_sizes_from_words(words)
    gc = growth_profile(sizes, window)
    stack = np.array([e.to_numpy() for e in elements], dtype=complex)
    stats = {m: cayley.separation_stats(stack[: sizes[m]], spec) for m in stats_depths}
    beta = cayley.assouad_lower_bound([stats[m] for m in stats_depths])
    D = min(s.separation_floor for s in stats.values())
    B = max(s.norm_bound for s in stats.values())
    replay = cayley.ratio_bound_replay(stats, D, B)
    return {
        "kind": "exponential_growth",
        "mode": spec.mode,
        "depth": len(sizes) - 1,
        "window": window,
        "words": [list(w) for w in words],
        "sizes": sizes,
        "growth": {"tag": gc.tag, "base": gc.base, "degree": gc.degree,
                   "residual_exponential": gc.residual_exponential,
                   "residual_polynomial": gc.residual_polynomial},
        "stats": [{"m": m, "count": s.count, "diameter": s.diameter, "separation": s.separation,
                   "norm_bound": s.norm_bound, "separation_floor": s.separation_floor}
                  for m, s in stats.items()],
        "beta": beta.beta,
        "beta_degenerate": beta.degenerate,
        "ratio_bound": replay,
    }


def ball_sizes_from_words(words: list) -> list:
    depth = max((len(w) for w in words), default=0)
    counts = [0] * (depth + 1)
    for w in words:
        counts[len(w)] += 1
    sizes, total = [], 0
    for c in counts:
        total += c
        sizes.append(total)
    return sizes


def finite_certificate(spec: GroupSpec, words: list) -> dict:
    return {"kind": "finite", "mode": spec.mode, "order": len(words), "words": [list(w) for w in words]}


def tame_certificate(spec: GroupSpec, wit: VAWitness, lam: LambdaResult) -> dict:
    lat = lam.lattice
    return {
        "kind": "tame",
        "mode": spec.mode,
        "exponent": wit.exponent,
        "family_words": [list(w) for w in wit.family_words],
        "basis": _mat_text(wit.basis),
        "permutations": [[label, list(wit.permutations[label])] for label, _ in spec.symmetric],
        "index": wit.index,
        "coset_words": [list(w) for w in wit.coset_words],
        "schreier_words": [list(w) for w in lam.schreier_words],
        "lambda": lam.lam,
        "unit_order": lam.unit_order,
        "unit_orders": lam.unit_orders,
        "alphas": lam.alphas,
        "alpha_exponents": lam.alpha_exponents,
        "exponent_lattice": _lattice_dict(lat),
        "numeric": lam.numeric,
    }


def _lattice_dict(lat: ExponentLattice) -> dict:
    def text(x):
        return format_scalar(GaussianRational(x)) if isinstance(x, (Fraction, int)) else repr(float(x))

    return {
        "moduli": [text(x) for x in lat.moduli],
        "basis": [text(x) for x in lat.basis],
        "vectors": [list(v) for v in lat.vectors],
        "hnf": [list(r) for r in lat.lattice.basis] if lat.lattice is not None else [],
        "rank": lat.rank,
        "generator": text(lat.generator) if lat.generator is not None else None,
        "exponents": list(lat.exponents) if lat.exponents is not None else None,
        "confidence": lat.confidence,
    }


def moduli_certificate(spec: GroupSpec, source: str, words: list, lat: ExponentLattice,
                       exponent: int | None = None, basis=None, discreteness: dict | None = None) -> dict:
    cert = {"kind": "independent_moduli", "mode": spec.mode, "source": source,
            "words": [list(w) for w in words], "exponent_lattice": _lattice_dict(lat)}
    if exponent is not None:
        cert["exponent"] = exponent
        cert["basis"] = _mat_text(basis)
    if discreteness is not None:
        cert["discreteness"] = discreteness
    return cert


def generator_moduli(spec: GroupSpec) -> tuple[list, ExponentLattice]:
    """Exponent lattice of the (squared) moduli of 1x1 exact generators."""
    words = [(k + 1,) for k in range(len(spec.generators))]
    vals = [g.entry(0, 0).abs2() for g in spec.generators]
    return words, multiplicative_rank(vals, EXACT)


def discreteness_section(spec: GroupSpec, depth: int, report) -> dict:
    value = spec.evaluate(report.witness) if report.witness is not None else None
    return {"depth": depth, "witness": list(report.witness) if report.witness is not None else None,
            "value": cayley.operator_norms(np.array([value.to_numpy() - np.eye(spec.n)]))[0].item()
            if value is not None else None,
            "decreases": report.decreases}


# ---------------------------------------------------------------------------
# Verdict
# ---------------------------------------------------------------------------

@dataclass
class Verdict:
    tag: str  # DefinesZ | Tame | FiniteGroup | Inconclusive
    reason: str | None = None
    certificate: dict | None = None
    diagnostics: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)
    lam: str | None = None
    unit_order: int | None = None
    coset_reps: list | None = None
    order: int | None = None

    def summary(self) -> dict:
        out: dict = {"tag": self.tag}
        if self.reason is not None:
            out["reason"] = self.reason
        if self.tag == "Tame":
            out["lambda"] = self.lam
            out["unit_order"] = self.unit_order
            out["index"] = len(self.coset_reps)
            out["coset_reps"] = [M.to_strings() for M in self.coset_reps]
        if self.tag == "FiniteGroup":
            out["order"] = self.order
        out["flags"] = list(self.flags)
        return out


def _growth_summary(gc) -> dict:
    return {"tag": gc.tag, "base": gc.base, "degree": gc.degree, "order": gc.order,
            "residual_exponential": gc.residual_exponential, "residual_polynomial": gc.residual_polynomial}


def _scan_nondiagonalizable(ball: Ball, tol: float):
    for w, g in zip(ball.words, ball.elements):
        if not is_diagonalizable(g, tol):
            return w, g
    return None


def _nondiag_verdict(spec: GroupSpec, word: tuple, M, config: Config, diag: dict) -> Verdict:
    flags = ["numeric-confidence"] if spec.mode == FLOAT else []
    cert = nondiag_certificate(spec, word)
    try:
        rf = build_ratio_function(M, spec.tolerance)
        k = config.ratio_samples
        samples = sample_ratio_image(rf, k, k, spec.tolerance)
        vals = [v for _, _, v in samples.entries if 0 <= v <= 1]
        diag["ratio_density"] = {"samples": len(samples.entries), "skipped": samples.skipped,
                                 "cells": 100, "coverage": density_statistic(vals, 0, 1, 100),
                                 "exact": rf.mode == EXACT}
    except (PreconditionError, ZeroDivisionError) as exc:
        diag["ratio_density"] = {"error": str(exc)}
    diag["witness_depth"] = len(word)
    return Verdict("DefinesZ", "NonDiagonalizableElement", cert, diag, flags)


def classify(spec: GroupSpec, config: Config | None = None) -> Verdict:
    """Run the evidence pipeline and return the first decisive verdict."""
    config = config or Config()
    tol = spec.tolerance
    diag: dict = {}
    ball = enumerate_ball(spec, config.depth, config.cap)
    diag["ball"] = {"depth": config.depth, "sizes": list(ball.sizes), "truncated": ball.truncated,
                    "closed": ball.closed}
    if spec.mode == FLOAT:
        diag["ball"]["max_merged_distance"] = ball.max_merged_distance

    # discreteness
    probe = cayley.discreteness_probe(spec, config.depth, config.cap, ball=ball)
    diag["discreteness"] = {"verdict": probe.verdict, "minima": probe.minima, "decreases": probe.decreases,
                            "witness": list(probe.witness) if probe.witness is not None else None}
    if probe.verdict == "ApproachingIdentity":
        if spec.mode == EXACT and spec.n == 1 and all(g.entry(0, 0).is_real() for g in spec.generators):
            words, lat = generator_moduli(spec)
            if lat.rank >= 2:
                cert = moduli_certificate(spec, "generators", words, lat,
                                          discreteness=discreteness_section(spec, config.depth, probe))
                return Verdict("DefinesZ", "IndependentModuli", cert, diag,
                               ["outside-hypothesis: not discrete"])
        diag["signal"] = "NotDiscreteEvidence"
        return Verdict("Inconclusive", None, None, diag, ["outside-hypothesis: not discrete"])

    # finite groups
    if ball.closed:
        flags = ["numeric-confidence"] if spec.mode == FLOAT else []
        return Verdict("FiniteGroup", None, finite_certificate(spec, ball.words), diag, flags,
                       order=len(ball.elements))

    # exponential growth
    if not ball.truncated:
        try:
            gc = growth_profile(ball.sizes, config.window)
        except TruncatedBallError:  # pragma: no cover
            gc = None
        if gc is not None:
            diag["growth"] = _growth_summary(gc)
            if gc.tag == "Exponential":
                depths = [m for m in range(2, ball.depth_reached + 1) if ball.sizes[m] <= config.stats_max_elements]
                suspicious = spec.mode == FLOAT and ball.max_merged_distance > tol / 10
                if len(depths) >= 2 and not suspicious:
                    cert = growth_certificate(spec, ball.elements, ball.words, config.window, depths)
                    if spec.mode == FLOAT and min(s["separation"] for s in cert["stats"]) < 10 * tol:
                        diag["growth_refused"] = "separation within 10x tolerance"
                    else:
                        flags = ["numeric-confidence"] if spec.mode == FLOAT else []
                        diag["assouad"] = {"beta": cert["beta"], "degenerate": cert["beta_degenerate"]}
                        hit = _scan_nondiagonalizable(ball, tol)
                        if hit is not None:
                            # kept so that a witness found at a smaller depth persists
                            diag["nondiagonalizable_word"] = list(hit[0])
                        return Verdict("DefinesZ", "ExponentialGrowthAssouad", cert, diag, flags)
                else:
                    diag["growth_refused"] = ("float dedup merged near-collisions" if suspicious
                                              else "too few depths for statistics")
    else:
        diag["growth"] = {"tag": "refused", "detail": "ball truncated at cap"}

    # non-diagonalizable element
    hit = _scan_nondiagonalizable(ball, tol)
    if hit is not None:
        return _nondiag_verdict(spec, hit[0], hit[1], config, diag)

    # virtual abelianness and lambda
    try:
        work = spec
        try:
            wit = virtually_abelian_probe(work, config.depth, config.exponent_max)
        except SpectrumNotRepresentable:
            work = spec.to_float()
            diag["probe_fallback"] = "float"
            wit = virtually_abelian_probe(work, config.depth, config.exponent_max)
    except NonDiagonalizableFound as exc:
        M = spec.evaluate(exc.word)
        if spec.mode == EXACT and is_diagonalizable(M, tol):
            # numeric failure on an exactly diagonalizable element: no certificate
            diag["probe_error"] = f"word {list(exc.word)} failed the numeric diagonalizability test only"
            wit = None
        else:
            return _nondiag_verdict(spec, exc.word, M, config, diag)
    if wit is not None:
        diag["probe"] = {"exponent": wit.exponent, "index": wit.index}
        res = extract_lambda(wit, work, config.depth, config.max_order, config.precision)
        if isinstance(res, LambdaResult):
            cert = tame_certificate(work, wit, res)
            flags = ["numeric-confidence"] if res.numeric else []
            return Verdict("Tame", None, cert, diag, flags, lam=res.lam, unit_order=res.unit_order,
                           coset_reps=list(wit.coset_reps))
        elif res.reason == "IndependentModuli" and work.mode == EXACT and res.lattice is not None:
            cert = moduli_certificate(spec, "schreier", res.schreier_words, res.lattice,
                                      exponent=wit.exponent, basis=wit.basis)
            return Verdict("DefinesZ", "IndependentModuli", cert, diag, [])
        else:
            diag["signal"] = res.reason
            diag["signal_detail"] = res.detail
    else:
        diag["probe"] = {"exponent_max": config.exponent_max, "witness": None}

    search = search_heisenberg(spec, config.heisenberg_depth, config.max_order, config.cap, ball=ball)
    diag["heisenberg"] = {"pairs_tested": search.pairs_tested,
                          "found": search.triple is not None,
                          "words": [list(search.triple.word_a), list(search.triple.word_b)]
                          if search.triple is not None else None}
    if ball.truncated:
        diag["resource"] = "cap reached"
    return Verdict("Inconclusive", None, None, diag, [])
