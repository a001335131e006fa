"""Minimal polynomials, diagonalizability, Jordan structure and related checks."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Sequence

import numpy as np

from .errors import DomainError, ModeError, PreconditionError, SpectrumNotRepresentable
from .exactcore import (
    DEFAULT_TOLERANCE,
    EXACT,
    FLOAT,
    ONE,
    ZERO,
    ExactMatrix,
    FloatMatrix,
    GaussianRational,
    Polynomial,
    identity,
    mat_equal,
    mat_inverse,
    matrix,
    nullspace,
    poly_gcd,
    rref,
)

DEFAULT_CONDITION_CAP = 1e8
DEFAULT_MAX_ORDER = 360


def canonical_key(z):
    """Sort key putting eigenvalues in canonical (descending re, then im) order."""
    if isinstance(z, GaussianRational):
        return (-z.re, -z.im)
    z = complex(z)
    return (-z.real, -z.imag)


# ---------------------------------------------------------------------------
# Minimal polynomial and diagonalizability
# ---------------------------------------------------------------------------

def minimal_polynomial(M: ExactMatrix) -> Polynomial:
    """First linear dependency among I, M, M^2, ... found by exact elimination."""
    if M.mode != EXACT:
        raise ModeError("minimal_polynomial is exact-only")
    n = M.n
    basis: list[tuple[list, int, list]] = []
    power = identity(n, EXACT)
    for k in range(n + 1):
        vec = [v for r in power.rows() for v in r]
        combo = [ZERO] * (n + 1)
        combo[k] = ONE
        for row, piv, crow in basis:
            f = vec[piv]
            if f:
                f = f / row[piv]
                vec = [x - f * y for x, y in zip(vec, row)]
                combo = [x - f * y for x, y in zip(combo, crow)]
        piv = next((i for i, x in enumerate(vec) if x), None)
        if piv is None:
            return Polynomial(combo[: k + 1])
        basis.append((vec, piv, combo))
        power = power @ M
    raise AssertionError("Cayley-Hamilton violated")  # pragma: no cover


@dataclass(frozen=True)
class DiagonalizabilityResult:
    diagonalizable: bool
    reason: str
    minimal_polynomial: Polynomial | None = None
    condition: float | None = None
    residual: float | None = None

    def __bool__(self):
        return self.diagonalizable


def numeric_diagonalizability(a: np.ndarray, tol: float = DEFAULT_TOLERANCE,
                              condition_cap: float = DEFAULT_CONDITION_CAP) -> tuple[bool, float, float]:
    """Eigendecompose, then report (ok, cond(V), reconstruction residual)."""
    a = np.asarray(a, dtype=complex)
    w, V = np.linalg.eig(a)
    cond = float(np.linalg.cond(V))
    if not math.isfinite(cond) or cond > 1e300:
        return False, math.inf, math.inf
    recon = V @ np.diag(w) @ np.linalg.inv(V)
    scale = max(1.0, float(np.max(np.abs(a))))
    residual = float(np.max(np.abs(recon - a))) / scale
    return (cond < condition_cap and residual <= max(tol, 1e-12)), cond, residual


def is_diagonalizable(M, tol: float = DEFAULT_TOLERANCE, condition_cap: float = DEFAULT_CONDITION_CAP,
                      fast: bool = True) -> DiagonalizabilityResult:
    """Exact: minimal polynomial squarefree. Float: well-conditioned eigendecomposition.

    ``fast`` enables shortcuts for diagonal and 2x2 exact inputs; they give the same
    answer as the squarefree test but skip the polynomial arithmetic.
    """
    if M.mode == FLOAT:
        ok, cond, res = numeric_diagonalizability(M.a, tol, condition_cap)
        if ok:
            reason = "eigendecomposition reconstructs within tolerance"
        elif cond >= condition_cap:
            reason = f"eigenvector condition number {cond:.3g} exceeds cap {condition_cap:.3g}"
        else:
            reason = f"reconstruction residual {res:.3g} exceeds tolerance"
        return DiagonalizabilityResult(ok, reason, condition=cond, residual=res)
    if fast:
        if M.is_diagonal():
            return DiagonalizabilityResult(True, "already diagonal")
        if M.n == 2:
            a, b = M.entry(0, 0), M.entry(0, 1)
            c, d = M.entry(1, 0), M.entry(1, 1)
            disc = (a - d) * (a - d) + 4 * b * c
            if disc:
                return DiagonalizabilityResult(True, "distinct eigenvalues")
            # repeated eigenvalue and not scalar (diagonal case handled above)
            return DiagonalizabilityResult(False, "repeated eigenvalue on a non-scalar 2x2 matrix",
                                           minimal_polynomial(M))
    mp = minimal_polynomial(M)
    g = poly_gcd(mp, mp.derivative())
    if g.degree == 0:
        return DiagonalizabilityResult(True, "minimal polynomial is squarefree", mp)
    return DiagonalizabilityResult(False, f"minimal polynomial shares a factor of degree {g.degree} "
                                          f"with its derivative", mp)


def characteristic_polynomial(M: ExactMatrix) -> Polynomial:
    """Faddeev-LeVerrier; exact only."""
    if M.mode != EXACT:
        raise ModeError("characteristic_polynomial is exact-only")
    n = M.n
    coeffs = [ZERO] * (n + 1)
    coeffs[n] = ONE
    ident = identity(n, EXACT)
    Mk = ident.scale(0)
    c = ONE
    for k in range(1, n + 1):
        Mk = M @ (Mk + ident.scale(c))
        c = -Mk.trace() / k
        coeffs[n - k] = c
    return Polynomial(coeffs)


# ---------------------------------------------------------------------------
# Roots in Q(i)
# ---------------------------------------------------------------------------

def _gaussian_integer_coefficients(p: Polynomial) -> list[complex]:
    den = 1
    for c in p.coeffs:
        den = den * c.re_den // math.gcd(den, c.re_den)
        den = den * c.im_den // math.gcd(den, c.im_den)
    return [GaussianRational(c.re * den, c.im * den) for c in p.coeffs]


def qi_roots(p: Polynomial) -> list[tuple[GaussianRational, int]]:
    """All roots of an exact polynomial, with multiplicity, provided they lie in Q(i).

    Candidates come from numeric roots of the squarefree part: any root x of a
    polynomial with Gaussian-integer coefficients satisfies lead * x in Z[i], so
    rounding lead * (numeric root) and checking exactly is enough.
    """
    if p.mode != EXACT:
        raise ModeError("qi_roots is exact-only")
    if p.degree == 0:
        return []
    sqf = p // poly_gcd(p, p.derivative())
    ints = _gaussian_integer_coefficients(sqf)
    lead = ints[-1]
    numeric = np.roots([complex(c) for c in reversed(ints)])
    roots: list[GaussianRational] = []
    lead_c = complex(lead)
    for r in numeric:
        t = r * lead_c
        cand = GaussianRational(round(t.real), round(t.imag)) / lead
        if cand not in roots and not sqf(cand):
            roots.append(cand)
    if len(roots) != sqf.degree:
        raise SpectrumNotRepresentable(
            f"only {len(roots)} of {sqf.degree} distinct eigenvalues lie in Q(i)")
    out = []
    for r in sorted(roots, key=canonical_key):
        mult, rem = 0, p
        lin = Polynomial.linear(r)
        while True:
            q, m = rem.divmod(lin)
            if not m.is_zero:
                break
            mult += 1
            rem = q
        out.append((r, mult))
    return out


def exact_eigenvalues(M: ExactMatrix) -> list[tuple[GaussianRational, int]]:
    """Distinct eigenvalues with their multiplicity in the minimal polynomial."""
    return qi_roots(minimal_polynomial(M))


# ---------------------------------------------------------------------------
# Jordan blocks
# ---------------------------------------------------------------------------

def jordan_block_power(lam, m: int, k: int):
    """The k-th power of the m x m upper Jordan block with eigenvalue lam.

    Entry (i, i+j) is binom(k, j) * lam^(k-j), zero when j > k.
    """
    if m < 1:
        raise DomainError("block size must be >= 1")
    if k < 0:
        raise DomainError("power must be >= 0")
    exact = isinstance(lam, (GaussianRational, int, Fraction))
    if exact:
        lam = GaussianRational(lam) if not isinstance(lam, GaussianRational) else lam
    else:
        lam = complex(lam)
    if not lam:
        raise DomainError("eigenvalue 0 gives a singular block")
    zero = ZERO if exact else 0j
    powers = [lam ** (k - j) if j <= k else zero for j in range(m)]
    rows = [[comb(k, j - i) * powers[j - i] if j >= i and j - i <= k else zero for j in range(m)]
            for i in range(m)]
    return matrix(rows, EXACT if exact else FLOAT)


def jordan_block(lam, m: int):
    return jordan_block_power(lam, m, 1)


@dataclass(frozen=True)
class JordanStructure:
    """Blocks (eigenvalue, size) and a basis b with b @ a @ b^-1 in Jordan form."""

    blocks: tuple
    basis: object
    jordan: object
    mode: str

    @property
    def offsets(self) -> list[int]:
        out, pos = [], 0
        for _, size in self.blocks:
            out.append(pos)
            pos += size
        return out


def assemble_jordan(blocks, n: int, mode: str):
    zero = ZERO if mode == EXACT else 0j
    one = ONE if mode == EXACT else 1.0
    rows = [[zero] * n for _ in range(n)]
    pos = 0
    for lam, size in blocks:
        for t in range(size):
            rows[pos + t][pos + t] = lam
            if t + 1 < size:
                rows[pos + t][pos + t + 1] = one
        pos += size
    return matrix(rows, mode)


def _sub_scalar(rows, lam):
    return [[v - lam if i == j else v for j, v in enumerate(r)] for i, r in enumerate(rows)]


def _mat_vec(rows, v):
    return [sum((a * b for a, b in zip(r, v)), ZERO) for r in rows]


def _mat_mul_rows(A, B):
    cols = list(zip(*B))
    return [[sum((a * b for a, b in zip(r, c)), ZERO) for c in cols] for r in A]


class _Echelon:
    """Incremental exact span membership test."""

    def __init__(self, dim: int):
        self.rows: list[tuple[list, int]] = []

    def reduce(self, v):
        v = list(v)
        for row, piv in self.rows:
            f = v[piv]
            if f:
                v = [x - f * y for x, y in zip(v, row)]
        return v

    def add(self, v) -> bool:
        r = self.reduce(v)
        piv = next((i for i, x in enumerate(r) if x), None)
        if piv is None:
            return False
        inv = ONE / r[piv]
        r = [x * inv for x in r]
        new_rows = []
        for row, p in self.rows:
            f = row[piv]
            if f:
                row = [x - f * y for x, y in zip(row, r)]
            new_rows.append((row, p))
        new_rows.append((r, piv))
        self.rows = new_rows
        return True


def _exact_jordan(M: ExactMatrix) -> JordanStructure:
    n = M.n
    rows = [list(r) for r in M.rows()]
    columns = []
    blocks = []
    for lam, top in exact_eigenvalues(M):
        N = _sub_scalar(rows, lam)
        powers = [None, N]
        for _ in range(2, top + 1):
            powers.append(_mat_mul_rows(powers[-1], N))
        kernels = [[]] + [nullspace(powers[j], n) for j in range(1, top + 1)]
        tops: list[tuple[list, int]] = []
        for s in range(top, 0, -1):
            ech = _Echelon(n)
            for v in kernels[s - 1]:
                ech.add(v)
            for w, t in tops:
                u = w
                for _ in range(t - s):
                    u = _mat_vec(N, u)
                ech.add(u)
            for v in kernels[s]:
                if ech.add(v):
                    tops.append((v, s))
        tops.sort(key=lambda item: -item[1])
        for v, s in tops:
            chain = [v]
            for _ in range(s - 1):
                chain.append(_mat_vec(N, chain[-1]))
            columns.extend(reversed(chain))
            blocks.append((lam, s))
    if len(columns) != n:
        raise SpectrumNotRepresentable("generalized eigenspaces do not span")  # pragma: no cover
    P = matrix([[columns[j][i] for j in range(n)] for i in range(n)], EXACT)
    b = P.inverse()
    J = b @ M @ P
    expected = assemble_jordan(blocks, n, EXACT)
    if J != expected:
        raise AssertionError("exact Jordan reconstruction failed")  # pragma: no cover
    return JordanStructure(tuple(blocks), b, J, EXACT)


def _cluster_eigenvalues(w: np.ndarray, radius: float) -> list[tuple[complex, int]]:
    remaining = sorted((complex(x) for x in w), key=canonical_key)
    clusters: list[list[complex]] = []
    for z in remaining:
        for cl in clusters:
            c = sum(cl) / len(cl)
            if abs(z - c) <= radius * max(1.0, abs(c)):
                cl.append(z)
                break
        else:
            clusters.append([z])
    out = [(sum(cl) / len(cl), len(cl)) for cl in clusters]
    return sorted(out, key=lambda t: canonical_key(t[0]))


def _numeric_null(a: np.ndarray, rel: float) -> np.ndarray:
    u, s, vh = np.linalg.svd(a)
    thresh = max(rel * (s[0] if s.size else 0.0), 1e-12)
    r = int(np.sum(s > thresh))
    return vh[r:].conj().T


def _numeric_rank(vectors: list[np.ndarray], rel: float = 1e-8) -> int:
    if not vectors:
        return 0
    s = np.linalg.svd(np.column_stack(vectors), compute_uv=False)
    return int(np.sum(s > rel * max(s[0], 1e-300)))


def _float_jordan(M: FloatMatrix, tol: float, condition_cap: float) -> JordanStructure:
    a = M.a
    n = M.n
    radius = max(1e-5, tol ** (1.0 / max(n, 1)))
    clusters = _cluster_eigenvalues(np.linalg.eigvals(a), radius)
    rel = max(1e-8, radius * 1e-2)
    columns, blocks = [], []
    for lam, mult in clusters:
        N = a - lam * np.eye(n)
        kernels = [np.zeros((n, 0))]
        Np = np.eye(n, dtype=complex)
        for _ in range(mult):
            Np = Np @ N
            kernels.append(_numeric_null(Np, rel))
            if kernels[-1].shape[1] >= mult:
                break
        top = len(kernels) - 1
        tops = []
        for s in range(top, 0, -1):
            base = [kernels[s - 1][:, i] for i in range(kernels[s - 1].shape[1])]
            for w, t in tops:
                base.append(np.linalg.matrix_power(N, t - s) @ w)
            r0 = _numeric_rank(base)
            for i in range(kernels[s].shape[1]):
                v = kernels[s][:, i]
                if _numeric_rank(base + [v]) > r0:
                    base.append(v)
                    r0 += 1
                    tops.append((v, s))
        tops.sort(key=lambda item: -item[1])
        for v, s in tops:
            chain = [v]
            for _ in range(s - 1):
                chain.append(N @ chain[-1])
            columns.extend(reversed(chain))
            blocks.append((complex(lam), s))
    if len(columns) != n:
        raise PreconditionError("numeric Jordan decomposition did not find a full basis")
    P = np.column_stack(columns)
    cond = float(np.linalg.cond(P))
    if not cond < condition_cap:
        raise PreconditionError(f"Jordan basis condition number {cond:.3g} exceeds cap")
    b = np.linalg.inv(P)
    J = assemble_jordan(blocks, n, FLOAT)
    recon = P @ J.a @ b
    if np.max(np.abs(recon - a)) > max(1e-6, tol) * max(1.0, float(np.max(np.abs(a)))):
        raise PreconditionError("numeric Jordan reconstruction outside tolerance")
    return JordanStructure(tuple(blocks), FloatMatrix(b), FloatMatrix(b @ a @ P), FLOAT)


def jordan_basis(M, tol: float = DEFAULT_TOLERANCE,
                 condition_cap: float = DEFAULT_CONDITION_CAP) -> JordanStructure:
    """Jordan blocks and a basis b with b @ M @ b^-1 block diagonal.

    Blocks come in canonical eigenvalue order, larger blocks first. Exact mode
    needs the whole spectrum in Q(i) and raises SpectrumNotRepresentable otherwise.
    """
    if M.mode == EXACT:
        return _exact_jordan(M)
    return _float_jordan(M, tol, condition_cap)


# ---------------------------------------------------------------------------
# Simultaneous diagonalization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiagonalizationWitness:
    """P with P @ M_j @ P^-1 diagonal for every input M_j."""

    basis: object
    diagonals: tuple
    mode: str


def _solve_columns(W: list[list], B: list[list]) -> list[list]:
    """X with W X = B, where W (n x d) has independent columns."""
    n, d = len(W), len(W[0])
    aug = [list(W[i]) + list(B[i]) for i in range(n)]
    red, piv = rref(aug)
    if piv[:d] != list(range(d)):
        raise PreconditionError("subspace is not invariant")  # pragma: no cover
    if len(piv) > d:
        raise PreconditionError("subspace is not invariant")
    return [r[d:] for r in red[:d]]


def _check_family(Ms: Sequence, tol: float) -> None:
    for i in range(len(Ms)):
        for j in range(i + 1, len(Ms)):
            if not mat_equal(Ms[i] @ Ms[j], Ms[j] @ Ms[i], tol):
                raise PreconditionError(f"matrices {i} and {j} do not commute")
    for i, M in enumerate(Ms):
        if not is_diagonalizable(M, tol):
            raise PreconditionError(f"matrix {i} is not diagonalizable")


def simultaneous_diagonalize(Ms: Sequence, tol: float = DEFAULT_TOLERANCE, check: bool = True) -> DiagonalizationWitness:
    """One basis diagonalizing a commuting family of diagonalizable matrices."""
    Ms = list(Ms)
    if not Ms:
        raise DomainError("empty family")
    mode = Ms[0].mode
    if any(M.mode != mode for M in Ms):
        raise ModeError("mixed modes")
    if check:
        _check_family(Ms, tol)
    n = Ms[0].n
    if all(M.is_diagonal() if mode == EXACT else M.is_diagonal(tol) for M in Ms):
        return DiagonalizationWitness(identity(n, mode), tuple(Ms), mode)
    if mode == EXACT:
        spaces =[[[ONE if i == j else ZERO for j in range(n)] for i in range(n)]]  # n x n, columns
        for M in Ms:
            rows = [list(r) for r in M.rows()]
            new_spaces = []
            for W in spaces:
                d = len(W[0])
                MW = _mat_mul_rows(rows, W)
                R = _solve_columns(W, MW)
                Rm = matrix(R, EXACT)
                pieces = []
                for lam, _ in exact_eigenvalues(Rm):
                    ys = nullspace(_sub_scalar(R, lam), d)
                    cols = [_mat_vec(W, y) for y in ys]
                    pieces.append([[c[i] for c in cols] for i in range(n)])
                if sum(len(p[0]) for p in pieces) != d:
                    raise PreconditionError("family is not simultaneously diagonalizable")
                new_spaces.extend(pieces)
            spaces = new_spaces
        cols = [[W[i][k] for i in range(n)] for W in spaces for k in range(len(W[0]))]
        V = matrix([[cols[j][i] for j in range(n)] for i in range(n)], EXACT)
        P = V.inverse()
        diagonals = tuple(P @ M @ V for M in Ms)
        for D in diagonals:
            if not D.is_diagonal():
                raise PreconditionError("family is not simultaneously diagonalizable")  # pragma: no cover
        return DiagonalizationWitness(P, diagonals, EXACT)
    rng = np.random.default_rng(20240601)
    coeffs = rng.normal(size=len(Ms)) + 1j * rng.normal(size=len(Ms))
    C = sum(c * M.a for c, M in zip(coeffs, Ms))
    _, V = np.linalg.eig(C)
    for k in range(n):
        col = V[:, k]
        pivot = col[np.argmax(np.abs(col) > 1e-12 * np.max(np.abs(col)))]
        V[:, k] = col / (pivot / abs(pivot)) / np.linalg.norm(col)
    P = np.linalg.inv(V)
    diagonals = tuple(FloatMatrix(P @ M.a @ V) for M in Ms)
    scale = max(1.0, max(float(np.max(np.abs(M.a))) for M in Ms))
    for i, D in enumerate(diagonals):
        if not D.is_diagonal(max(tol, 1e-9) * scale * max(1.0, float(np.linalg.cond(V)))):
            raise PreconditionError(f"matrix {i} is not diagonal in the computed basis")
    return DiagonalizationWitness(FloatMatrix(P), diagonals, FLOAT)


# ---------------------------------------------------------------------------
# Roots of unity
# ---------------------------------------------------------------------------

def continued_fraction(x: float, max_terms: int = 64) -> list[int]:
    terms = []
    for _ in range(max_terms):
        a = math.floor(x)
        terms.append(a)
        frac = x - a
        if frac < 1e-15:
            break
        x = 1.0 / frac
        if x > 1e15:
            break
    return terms


def convergents(terms: Sequence[int]) -> list[Fraction]:
    h0, h1 = 0, 1
    k0, k1 = 1, 0
    out = []
    for a in terms:
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        out.append(Fraction(h1, k1))
    return out


def root_of_unity_order(z, max_order: int = DEFAULT_MAX_ORDER, tol: float = DEFAULT_TOLERANCE) -> int | None:
    """Least k <= max_order with z^k = 1, or None."""
    if isinstance(z, (GaussianRational, int, Fraction)):
        z = GaussianRational(z) if not isinstance(z, GaussianRational) else z
        if z.abs2() != 1:
            raise DomainError("root_of_unity_order needs |z| = 1")
        w = ONE
        # the only roots of unity in Q(i) are +-1, +-i
        for k in range(1, min(max_order, 4) + 1):
            w = w * z
            if w == ONE:
                return k
        return None
    z = complex(z)
    if abs(abs(z) - 1.0) > max(tol, 1e-9) * 10:
        raise DomainError("root_of_unity_order needs |z| = 1")
    if abs(z - 1) < tol:
        return 1
    x = (cmath.phase(z) / (2 * math.pi)) % 1.0
    candidates = sorted({c.denominator for c in convergents(continued_fraction(x)) if c.denominator <= max_order})
    for q in candidates:
        if abs(z ** q - 1) < tol:
            return q
    return None


def unit_part_order(z, max_order: int = DEFAULT_MAX_ORDER, tol: float = DEFAULT_TOLERANCE) -> int | None:
    """Order of z/|z| as a root of unity, or None when it has none up to max_order.

    For z in Q(i) the test is exact: z^k must be a positive rational.
    """
    if isinstance(z, GaussianRational):
        if not z:
            raise DomainError("zero has no unit part")
        w = ONE
        # (z/|z|)^2 lies in Q(i), so a finite order divides 8
        for k in range(1, min(max_order, 8) + 1):
            w = w * z
            if w.im == 0 and w.re > 0:
                return k
        return None
    z = complex(z)
    if z == 0:
        raise DomainError("zero has no unit part")
    return root_of_unity_order(z / abs(z), max_order, tol)


# ---------------------------------------------------------------------------
# Eigenvalue-chain verifier for Heisenberg-type triples
# ---------------------------------------------------------------------------

@dataclass
class ChainReport:
    lambda_a: complex
    lambda_c: complex
    vector: list
    holds: list = field(default_factory=list)
    first_failure: int | None = None
    distinct_eigenvalues: int = 0
    contradiction: bool = False
    relation_residuals: dict = field(default_factory=dict)


def _relation_residuals(a, b, c, tol):
    from .structure import commutator  # local import: structure depends on spectral

    out = {}
    pairs = {"[a,b]=c": (commutator(a, b), c), "ac=ca": (a @ c, c @ a), "bc=cb": (b @ c, c @ b)}
    for name, (x, y) in pairs.items():
        out[name] = float(np.max(np.abs(x.to_numpy() - y.to_numpy())))
    return out


def eigen_chain_verify(a, b, c, K: int | None = None, max_order: int = DEFAULT_MAX_ORDER,
                       tol: float = DEFAULT_TOLERANCE, strict: bool = True) -> ChainReport:
    """Replay the eigenvalue chain a(b^k v) = lambda_a lambda_c^k (b^k v), k = 1..K.

    v is a shared eigenvector of a and c whose c-eigenvalue is not a root of
    unity. Under the relations [a,b] = c, ac = ca, bc = cb the identity would hold
    for all k, giving a more than n eigenvalues once K > n; the report records where
    it actually breaks.  ``strict=False`` records relation residuals instead of
    raising when the relations fail.
    """
    n = a.n
    K = n + 1 if K is None else K
    residuals = _relation_residuals(a, b, c, tol)
    if strict:
        for name, r in residuals.items():
            if r > tol:
                raise PreconditionError(f"relation {name} fails (residual {r:.3g})")
    if not is_diagonalizable(a, tol):
        raise PreconditionError("a is not diagonalizable")
    if not is_diagonalizable(c, tol):
        raise PreconditionError("c is not diagonalizable")
    if not mat_equal(a @ c, c @ a, max(tol, 1e-9) * 10 if a.mode == FLOAT else tol):
        raise PreconditionError("a and c do not commute")
    wit = simultaneous_diagonalize([a, c], tol, check=False)
    P = wit.basis
    V = mat_inverse(P).to_numpy()
    da = np.diag(wit.diagonals[0].to_numpy())
    dc = np.diag(wit.diagonals[1].to_numpy())
    chosen = None
    for idx in range(n):
        lc = complex(dc[idx])
        if abs(abs(lc) - 1.0) > 1e-9:
            chosen = idx
            break
        if root_of_unity_order(lc / abs(lc), max_order, max(tol, 1e-9)) is None:
            chosen = idx
            break
    if chosen is None:
        orders = []
        for idx in range(n):
            lc = complex(dc[idx])
            orders.append(root_of_unity_order(lc / abs(lc), max_order, max(tol, 1e-9)))
        raise PreconditionError(f"c is torsion (eigenvalue orders {orders})")
    la, lc = complex(da[chosen]), complex(dc[chosen])
    v = V[:, chosen]
    report = ChainReport(la, lc, v.tolist(), relation_residuals=residuals)
    A, B = a.to_numpy(), b.to_numpy()
    w = v.copy()
    seen = [la]
    for k in range(1, K + 1):
        w = B @ w
        target = la * lc ** k
        lhs = A @ w
        scale = max(float(np.linalg.norm(w)), 1e-300) * max(1.0, abs(target))
        ok = float(np.linalg.norm(lhs - target * w)) <= max(tol, 1e-9) * 1e3 * scale
        report.holds.append(ok)
        if not ok:
            report.first_failure = k
            break
        if all(abs(target - s) > 1e-9 * max(1.0, abs(s)) for s in seen):
            seen.append(target)
    report.distinct_eigenvalues = len(seen)
    report.contradiction = report.first_failure is None and len(seen) > n
    return report
