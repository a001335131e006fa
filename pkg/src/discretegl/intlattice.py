"""Hermite normal form, lattice membership and multiplicative exponent lattices."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from sympy import factorint

from .errors import DomainError
from .exactcore import EXACT, FLOAT, GaussianRational

DEFAULT_MAX_DENOMINATOR = 10**6


@dataclass(frozen=True)
class IntLattice:
    """Row-style HNF basis: upper echelon, positive pivots, entries above pivots in [0, pivot)."""

    n: int
    basis: tuple

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def pivots(self) -> tuple:
        return tuple(next(j for j, x in enumerate(r) if x) for r in self.basis)

    def __contains__(self, v) -> bool:
        return lattice_member(self, v)


def hnf(vectors: Sequence[Sequence[int]], n: int | None = None) -> IntLattice:
    """Canonical HNF of the lattice spanned by integer vectors (zero vectors ignored)."""
    rows = [list(map(int, v)) for v in vectors]
    if n is None:
        if not rows:
            raise DomainError("dimension unknown for empty input")
        n = len(rows[0])
    if any(len(r) != n for r in rows):
        raise DomainError("vectors must share one dimension")
    rows = [r for r in rows if any(r)]
    r = 0
    for col in range(n):
        while True:
            live = [i for i in range(r, len(rows)) if rows[i][col]]
            if not live:
                break
            p = min(live, key=lambda i: abs(rows[i][col]))
            rows[r], rows[p] = rows[p], rows[r]
            piv = rows[r]
            done = True
            for i in range(r + 1, len(rows)):
                if rows[i][col]:
                    q = rows[i][col] // piv[col]
                    rows[i] = [x - q * y for x, y in zip(rows[i], piv)]
                    if rows[i][col]:
                        done = False
            if done:
                break
        if r < len(rows) and rows[r][col]:
            if rows[r][col] < 0:
                rows[r] = [-x for x in rows[r]]
            piv = rows[r]
            for i in range(r):
                q = rows[i][col] // piv[col]
                if q:
                    rows[i] = [x - q * y for x, y in zip(rows[i], piv)]
            r += 1
    basis = tuple(tuple(row) for row in rows[:r])
    return IntLattice(n, basis)


def lattice_member(L: IntLattice, v: Sequence[int]) -> bool:
    """Back-substitute v through the echelon basis."""
    v = [int(x) for x in v]
    if len(v) != L.n:
        raise DomainError(f"vector has dimension {len(v)}, lattice has {L.n}")
    for row, p in zip(L.basis, L.pivots):
        if any(v[:p]):
            return False
        q, rem = divmod(v[p], row[p])
        if rem:
            return False
        v = [x - q * y for x, y in zip(v, row)]
    return not any(v)


def lattice_coordinates(L: IntLattice, v: Sequence[int]) -> list[int] | None:
    """Integer coefficients of v on the basis rows, or None if v is not in L."""
    v = [int(x) for x in v]
    coeffs = []
    for row, p in zip(L.basis, L.pivots):
        if any(v[:p]):
            return None
        q, rem = divmod(v[p], row[p])
        if rem:
            return None
        coeffs.append(q)
        v = [x - q * y for x, y in zip(v, row)]
    return coeffs if not any(v) else None


@dataclass(frozen=True)
class MixedSubgroup:
    """Preimage in Z^(l+n) of a subgroup of (Z/m)^l x Z^n."""

    m: int
    l: int
    n: int
    lattice: IntLattice

    def member(self, v: Sequence[int]) -> bool:
        if len(v) != self.l + self.n:
            raise DomainError("dimension mismatch")
        return lattice_member(self.lattice, v)


def mixed_subgroup_lift(gens: Sequence[Sequence[int]], m: int, l: int, n: int) -> MixedSubgroup:
    if m < 1 or l < 0 or n < 0:
        raise DomainError("need m >= 1 and l, n >= 0")
    dim = l + n
    lifted = []
    for g in gens:
        g = [int(x) for x in g]
        if len(g) != dim:
            raise DomainError(f"generator {g} does not have dimension {dim}")
        if any(not 0 <= x < m for x in g[:l]):
            raise DomainError(f"torsion coordinates of {g} must lie in [0, {m})")
        lifted.append(g)
    kernel = [[m if j == i else 0 for j in range(dim)] for i in range(l)]
    return MixedSubgroup(m, l, n, hnf(lifted + kernel, dim))


# ---------------------------------------------------------------------------
# Multiplicative dependencies
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExponentLattice:
    """Exponent vectors of positive scalars over a prime (or logarithmic) basis.

    When ``rank == 1``, ``generator ** exponents[i] == moduli[i]``.
    """

    moduli: tuple
    basis: tuple  # primes (exact) or the reference modulus (numeric)
    vectors: tuple
    lattice: IntLattice | None
    rank: int
    generator: object | None
    exponents: tuple | None
    confidence: str  # exact | numeric


def _as_positive_rational(x) -> Fraction:
    if isinstance(x, GaussianRational):
        if x.im:
            raise DomainError(f"{x} is not real")
        x = x.re
    if isinstance(x, float):
        raise DomainError("exact path needs rationals")
    x = Fraction(x)
    if x <= 0:
        raise DomainError(f"modulus {x} is not positive")
    return x


def _exact_rank(moduli: Sequence) -> ExponentLattice:
    qs = [_as_positive_rational(x) for x in moduli]
    facts = []
    for q in qs:
        f = {p: e for p, e in factorint(q.numerator).items()}
        for p, e in factorint(q.denominator).items():
            f[p] = f.get(p, 0) - e
        facts.append(f)
    primes = sorted({p for f in facts for p in f})
    vectors = [tuple(f.get(p, 0) for p in primes) for f in facts]
    if not primes:
        return ExponentLattice(tuple(qs), (), tuple(vectors), None, 0, Fraction(1), tuple(0 for _ in qs), "exact")
    L = hnf(vectors, len(primes))
    gen, exps = None, None
    if L.rank == 1:
        row = L.basis[0]
        gen = Fraction(1)
        for p, e in zip(primes, row):
            gen *= Fraction(p) ** e
        exps = tuple(lattice_coordinates(L, v)[0] for v in vectors)
    return ExponentLattice(tuple(qs), tuple(primes), tuple(vectors), L, L.rank, gen, exps, "exact")


def rational_approximation(r: float, max_denominator: int, tol: float) -> Fraction | None:
    """Best p/q with q <= max_denominator if it passes the tolerance and significance tests.

    Significance: q^2 |r - p/q| must be small, so that a match is not just the
    generic Dirichlet approximation every real number has.
    """
    for cand in _convergents(r, max_denominator):
        err = abs(r - cand.numerator / cand.denominator)
        if err < tol and cand.denominator ** 2 * err < 1e-3:
            return cand
    return None


def _convergents(x: float, max_den: int):
    h0, h1, k0, k1 = 0, 1, 1, 0
    y = x
    for _ in range(64):
        a = math.floor(y)
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        if k1 > max_den:
            return
        yield Fraction(h1, k1)
        frac = y - a
        if frac < 1e-15:
            return
        y = 1 / frac


def _numeric_rank(moduli: Sequence, precision: float, max_den: int) -> ExponentLattice:
    xs = []
    for x in moduli:
        x = float(abs(complex(x))) if isinstance(x, complex) else float(x)
        if not x > 0:
            raise DomainError(f"modulus {x} is not positive")
        xs.append(x)
    logs = [math.log(x) for x in xs]
    live = [i for i, t in enumerate(logs) if abs(t) > precision]
    if not live:
        return ExponentLattice(tuple(xs), (), (), None, 0, 1.0, tuple(0 for _ in xs), "numeric")
    ref = max(live, key=lambda i: (abs(logs[i]), -i))
    basis = [ref]
    ratios: dict[int, Fraction] = {ref: Fraction(1)}
    for i in live:
        if i == ref:
            continue
        f = rational_approximation(logs[i] / logs[ref], max_den, precision)
        if f is None:
            if all(rational_approximation(logs[i] / logs[b], max_den, precision) is None for b in basis[1:]):
                basis.append(i)
            continue
        ratios[i] = f
    for i in range(len(xs)):
        if i not in live:
            ratios[i] = Fraction(0)
    rank = len(basis)
    if rank > 1:
        return ExponentLattice(tuple(xs), tuple(xs[b] for b in basis), (), None, rank, None, None, "numeric")
    L = 1
    for f in ratios.values():
        L = L * f.denominator // math.gcd(L, f.denominator)
    ints = [int(ratios[i] * L) for i in range(len(xs))]
    g = 0
    for e in ints:
        g = math.gcd(g, e)
    gen = math.exp(logs[ref] * g / L)
    exps = tuple(e // g for e in ints)
    if gen < 1:
        gen, exps = 1 / gen, tuple(-e for e in exps)
    vectors = tuple((e,) for e in exps)
    return ExponentLattice(tuple(xs), (xs[ref],), vectors, hnf(vectors, 1), 1, gen, exps, "numeric")


def multiplicative_rank(moduli: Sequence, mode: str = EXACT, precision: float = 1e-9,
                        max_denominator: int = DEFAULT_MAX_DENOMINATOR) -> ExponentLattice:
    """Rank of the multiplicative group generated by positive scalars.

    Exact mode factors rationals into primes. Float mode looks for rational
    relations between logarithms with continued fractions; its rank is only as
    good as the precision allows.
    """
    if not moduli:
        raise DomainError("no moduli given")
    if mode == EXACT:
        return _exact_rank(moduli)
    if mode == FLOAT:
        return _numeric_rank(moduli, precision, max_denominator)
    raise DomainError(f"unknown mode {mode!r}")
