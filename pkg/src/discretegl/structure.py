"""Commutators, Heisenberg triples and the Jordan-block ratio function."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .cayley import Ball, enumerate_ball
from .errors import DomainError, PreconditionError, SpectrumNotRepresentable
from .exactcore import (
    DEFAULT_TOLERANCE,
    EXACT,
    FLOAT,
    GaussianRational,
    GroupSpec,
    convert,
    identity,
    mat_equal,
    mat_inverse,
)
from .spectral import DEFAULT_MAX_ORDER, exact_eigenvalues, is_diagonalizable, jordan_basis, root_of_unity_order


def commutator(x, y, tol: float = DEFAULT_TOLERANCE):
    """x y x^-1 y^-1."""
    return x @ y @ mat_inverse(x, tol) @ mat_inverse(y, tol)


# ---------------------------------------------------------------------------
# Heisenberg triples
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TorsionEvidence:
    kind: str  # unipotent | eigenvalue_modulus | numeric_eigenvalue_modulus | no_small_order
    certified: bool
    detail: str


def _is_unipotent(c) -> bool:
    n = c.n
    N = c - identity(n, c.mode)
    P = N
    for _ in range(n - 1):
        P = P @ N
    return all(not v for r in P.rows() for v in r)


def torsion_evidence(c, max_order: int = DEFAULT_MAX_ORDER, tol: float = DEFAULT_TOLERANCE) -> TorsionEvidence | None:
    """Evidence that c has infinite order, or None when c looks torsion."""
    if c.is_identity(tol):
        return None
    if c.mode == EXACT:
        if _is_unipotent(c):
            return TorsionEvidence("unipotent", True, "c - I is nilpotent and c != I")
        try:
            for lam, _ in exact_eigenvalues(c):
                if lam.abs2() != 1:
                    return TorsionEvidence("eigenvalue_modulus", True, f"eigenvalue {lam} has modulus^2 {lam.abs2()}")
        except SpectrumNotRepresentable:
            pass
    w = np.linalg.eigvals(c.to_numpy())
    for lam in w:
        if abs(abs(lam) - 1.0) > 1e-6:
            return TorsionEvidence("numeric_eigenvalue_modulus", False, f"numeric eigenvalue modulus {abs(lam):.12g}")
    orders = [root_of_unity_order(lam / abs(lam), max_order, 1e-8) for lam in w]
    if any(o is None for o in orders):
        floor = _power_floor(c, max_order, tol)
        if floor is None:
            return None
        return TorsionEvidence("no_small_order", False, f"min ||c^k - I|| over k <= {max_order} is {floor:.6g}")
    return None


def _power_floor(c, max_order: int, tol: float) -> float | None:
    A = c.to_numpy()
    P = np.eye(c.n, dtype=complex)
    best = math.inf
    for _ in range(max_order):
        P = P @ A
        d = float(np.max(np.abs(P - np.eye(c.n))))
        if d <= max(tol, 1e-9) * 10:
            return None
        best = min(best, d)
    return best


@dataclass(frozen=True)
class HeisenbergTriple:
    """a, b with c = [a, b] commuting with every generator (hence central)."""

    a: object
    b: object
    c: object
    word_a: tuple
    word_b: tuple
    relations: dict
    torsion: TorsionEvidence
    central_depth: int


@dataclass
class HeisenbergSearch:
    triple: HeisenbergTriple | None
    pairs_tested: int
    truncated: bool
    exhausted: bool = True
    diagnostics: list = field(default_factory=list)


def check_triple_relations(a, b, c, generators: Sequence, tol: float = DEFAULT_TOLERANCE) -> dict:
    return {
        "[a,b]=c": mat_equal(commutator(a, b, tol), c, tol),
        "ac=ca": mat_equal(a @ c, c @ a, tol),
        "bc=cb": mat_equal(b @ c, c @ b, tol),
        "c!=I": not c.is_identity(tol),
        "c central": all(mat_equal(g @ c, c @ g, tol) for g in generators),
    }


def search_heisenberg(spec: GroupSpec, depth: int = 3, max_order: int = DEFAULT_MAX_ORDER,
                      cap: int = 200_000, max_pairs: int = 50_000, ball: Ball | None = None) -> HeisenbergSearch:
    """Scan pairs of ball elements in canonical order for a central non-torsion commutator."""
    if depth < 2:
        raise DomainError("depth must be >= 2")
    if ball is None or ball.depth_reached < depth:
        ball = enumerate_ball(spec, depth, cap)
    tol = spec.tolerance
    if ball.truncated:
        return HeisenbergSearch(None, 0, True, False, ["ball truncated before search depth"])
    limit = ball.sizes[min(depth, ball.depth_reached)]
    elems, words = ball.elements[1:limit], ball.words[1:limit]
    gens = [m for _, m in spec.symmetric]
    tested = 0
    for i in range(len(elems)):
        for j in range(i + 1, len(elems)):
            if tested >= max_pairs:
                return HeisenbergSearch(None, tested, False, False, [f"stopped after {max_pairs} pairs"])
            tested += 1
            a, b = elems[i], elems[j]
            if mat_equal(a @ b, b @ a, tol):
                continue
            c = commutator(a, b, tol)
            if not all(mat_equal(g @ c, c @ g, tol) for g in gens):
                continue
            ev = torsion_evidence(c, max_order, tol)
            if ev is None:
                continue
            rel = check_triple_relations(a, b, c, gens, tol)
            triple = HeisenbergTriple(a, b, c, words[i], words[j], rel, ev, depth)
            return HeisenbergSearch(triple, tested, False, True)
    return HeisenbergSearch(None, tested, False, True)


def find_heisenberg_triple(spec: GroupSpec, depth: int = 3, max_order: int = DEFAULT_MAX_ORDER,
                           cap: int = 200_000, ball: Ball | None = None) -> HeisenbergTriple | None:
    return search_heisenberg(spec, depth, max_order, cap, ball=ball).triple


def replay_triple(triple: HeisenbergTriple, spec: GroupSpec, max_order: int = DEFAULT_MAX_ORDER) -> bool:
    """Re-derive a, b from their words and re-check every stored claim."""
    tol = spec.tolerance
    a, b = spec.evaluate(triple.word_a), spec.evaluate(triple.word_b)
    if not (mat_equal(a, triple.a, tol) and mat_equal(b, triple.b, tol)):
        return False
    rel = check_triple_relations(a, b, triple.c, [m for _, m in spec.symmetric], tol)
    if not all(rel.values()):
        return False
    ev = torsion_evidence(triple.c, max_order, tol)
    return ev is not None and ev.kind == triple.torsion.kind


# ---------------------------------------------------------------------------
# Ratio function on a Jordan block of size >= 2
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RatioFunction:
    """h(g, g') = G[s,s+1] G'[s+1,s+1] / (G'[s,s+1] G[s+1,s+1]) with G = b g b^-1.

    ``offset`` s is the start of the first Jordan block of size >= 2.
    """

    witness: object
    basis: object
    basis_inverse: object
    offset: int
    block: tuple
    mode: str

    @property
    def entries(self) -> tuple:
        s = self.offset
        return (s, s + 1), (s + 1, s + 1)

    def local(self, g):
        return self.basis @ g @ self.basis_inverse

    def __call__(self, g, g2):
        G, G2 = self.local(g), self.local(g2)
        (p, q), (r, t) = self.entries
        den = G2.entry(p, q) * G.entry(r, t)
        if not den:
            raise ZeroDivisionError("h undefined: vanishing denominator entry")
        return G.entry(p, q) * G2.entry(r, t) / den


def build_ratio_function(a, tol: float = DEFAULT_TOLERANCE) -> RatioFunction:
    """Jordan basis of a non-diagonalizable witness plus the entry positions used by h."""
    if is_diagonalizable(a, tol):
        raise PreconditionError("witness is diagonalizable")
    try:
        js = jordan_basis(a, tol)
    except SpectrumNotRepresentable:
        a = convert(a, FLOAT)
        js = jordan_basis(a, tol)
    pos = 0
    for lam, size in js.blocks:
        if size >= 2:
            return RatioFunction(a, js.basis, mat_inverse(js.basis, tol), pos, (lam, size), js.mode)
        pos += size
    raise PreconditionError("no Jordan block of size >= 2 found")  # pragma: no cover


@dataclass
class RatioSamples:
    """Values h(a^i, a^j); exact entries are Fractions, float entries are floats."""

    entries: list  # (i, j, value)
    skipped: int = 0
    max_imag: float = 0.0

    @property
    def values(self) -> list[float]:
        return [float(v) for _, _, v in self.entries]

    def to_csv(self) -> str:
        lines = ["i,j,value"]
        lines += [f"{i},{j},{v}" for i, j, v in self.entries]
        return "\n".join(lines) + "\n"


def sample_ratio_image(rf: RatioFunction, I: int, J: int, tol: float = DEFAULT_TOLERANCE) -> RatioSamples:
    """h(a^i, a^j) for 1 <= i <= I, 1 <= j <= J, real parts only."""
    if I < 1 or J < 1:
        raise DomainError("I and J must be >= 1")
    (p, q), (r, t) = rf.entries
    A = rf.local(rf.witness)
    K = max(I, J)
    xs, ys = [], []
    P = A
    for _ in range(K):
        xs.append(P.entry(p, q))
        ys.append(P.entry(r, t))
        P = P @ A
    out = RatioSamples([])
    exact = rf.mode == EXACT
    for i in range(1, I + 1):
        for j in range(1, J + 1):
            den = xs[j - 1] * ys[i - 1]
            if (not den) if exact else abs(den) == 0:
                out.skipped += 1
                continue
            v = xs[i - 1] * ys[j - 1] / den
            if exact:
                v = GaussianRational(v) if not isinstance(v, GaussianRational) else v
                if v.im:
                    raise PreconditionError(f"h({i},{j}) is not real")
                out.entries.append((i, j, v.re))
            else:
                v = complex(v)
                out.max_imag = max(out.max_imag, abs(v.imag))
                if abs(v.imag) > max(tol, 1e-6) * max(1.0, abs(v.real)):
                    raise PreconditionError(f"h({i},{j}) has imaginary part {v.imag:.3g}")
                out.entries.append((i, j, v.real))
    return out


def density_statistic(values, lo: float, hi: float, cells: int) -> float:
    """Fraction of the equal-width cells of [lo, hi] holding at least one value.

    Cells are half-open on the right except the last, which also takes hi.
    Fractions are binned exactly.
    """
    if not lo < hi:
        raise DomainError("need lo < hi")
    if cells < 1:
        raise DomainError("need at least one cell")
    hit = set()
    exact_lo, exact_hi = Fraction(lo), Fraction(hi)
    for v in values:
        if isinstance(v, (Fraction, int)):
            if v < exact_lo or v > exact_hi:
                continue
            k = math.floor((Fraction(v) - exact_lo) * cells / (exact_hi - exact_lo))
        else:
            v = float(v)
            if not lo <= v <= hi:
                continue
            k = math.floor((v - lo) * cells / (hi - lo))
        hit.add(min(k, cells - 1))
    return len(hit) / cells
