"""Scalar, polynomial and matrix arithmetic over Q(i), with a complex float fallback.

Exact matrices are stored as a common positive denominator plus flat tuples of
integer real/imaginary numerators, normalized so that the gcd of everything is
one.  That keeps products and hashing cheap, which matters for ball enumeration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import zip_longest
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import DomainError, ModeError, SingularMatrixError

EXACT = "exact"
FLOAT = "float"
MODES = (EXACT, FLOAT)
DEFAULT_TOLERANCE = 1e-9


# ---------------------------------------------------------------------------
# Scalars
# ---------------------------------------------------------------------------

class GaussianRational:
    """An element re + im*i of Q(i), both parts held as reduced Fractions."""

    __slots__ = ("_re", "_im")

    def __init__(self, re=0, im=0):
        if isinstance(re, GaussianRational):
            if im:
                raise TypeError("cannot combine a GaussianRational real part with an imaginary part")
            self._re, self._im = re._re, re._im
            return
        if isinstance(re, (float, complex)) or isinstance(im, (float, complex)):
            raise ModeError("float values cannot enter exact arithmetic implicitly")
        self._re = Fraction(re)
        self._im = Fraction(im)

    @classmethod
    def from_parts(cls, re_num, re_den, im_num=0, im_den=1):
        return cls(Fraction(re_num, re_den), Fraction(im_num, im_den))

    re = property(lambda self: self._re)
    im = property(lambda self: self._im)
    re_num = property(lambda self: self._re.numerator)
    re_den = property(lambda self: self._re.denominator)
    im_num = property(lambda self: self._im.numerator)
    im_den = property(lambda self: self._im.denominator)

    def normalized(self) -> "GaussianRational":
        return GaussianRational.from_parts(self.re_num, self.re_den, self.im_num, self.im_den)

    def is_real(self) -> bool:
        return self._im == 0

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self._re, -self._im)

    def abs2(self) -> Fraction:
        return self._re * self._re + self._im * self._im

    def __bool__(self):
        return bool(self._re) or bool(self._im)

    def __complex__(self):
        return complex(float(self._re), float(self._im))

    def __eq__(self, other):
        if isinstance(other, GaussianRational):
            return self._re == other._re and self._im == other._im
        if isinstance(other, (int, Fraction)):
            return self._im == 0 and self._re == other
        return NotImplemented

    def __hash__(self):
        if self._im == 0:
            return hash(self._re)
        return hash((self._re, self._im))

    def __neg__(self):
        return GaussianRational(-self._re, -self._im)

    def __pos__(self):
        return self

    def __add__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self._re + o._re, self._im + o._im)

    __radd__ = __add__

    def __sub__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self._re - o._re, self._im - o._im)

    def __rsub__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        a, b, c, d = self._re, self._im, o._re, o._im
        if b == 0 and d == 0:
            return GaussianRational(a * c)
        return GaussianRational(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        if not o:
            raise ZeroDivisionError("division by zero in Q(i)")
        if o._im == 0:
            return GaussianRational(self._re / o._re, self._im / o._re)
        den = o.abs2()
        num = self * o.conjugate()
        return GaussianRational(num._re / den, num._im / den)

    def __rtruediv__(self, other):
        o = _coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return (GaussianRational(1) / self) ** (-k)
        result, base = GaussianRational(1), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __repr__(self):
        return f"GaussianRational({format_scalar(self)!r})"

    def __str__(self):
        return format_scalar(self)


def _coerce(x) -> GaussianRational | None:
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, (int, Fraction)):
        return GaussianRational(x)
    return None


GR = GaussianRational
ZERO = GaussianRational(0)
ONE = GaussianRational(1)
I_UNIT = GaussianRational(0, 1)

Scalar = Union[GaussianRational, complex]


def format_scalar(z) -> str:
    """Text form ``a/b`` or ``a/b+c/d*i``; floats use repr of each part."""
    if isinstance(z, GaussianRational):
        re, im = z.re, z.im
    else:
        z = complex(z)
        re, im = z.real, z.imag
        if im == 0:
            return repr(float(re))
        sign = "-" if im < 0 else "+"
        return f"{re!r}{sign}{abs(im)!r}*i"
    if im == 0:
        return str(re)
    sign = "-" if im < 0 else "+"
    return f"{re}{sign}{abs(im)}*i"


def _split_complex_text(s: str) -> tuple[str, str | None]:
    body = s
    if not body.endswith("i"):
        return body, None
    body = body[:-1]
    if body.endswith("*"):
        body = body[:-1]
    cut = 0
    for k in range(len(body) - 1, 0, -1):
        if body[k] in "+-" and body[k - 1] not in "eE":
            cut = k
            break
    return body[:cut], body[cut:]


def parse_scalar(value, mode: str = EXACT) -> Scalar:
    """Parse a JSON scalar (string or number) into the given arithmetic mode.

    Accepts ``"3"``, ``"-1/2"``, ``"1/2+3/4*i"``, ``"-i"``, ``"2*i"``, ``"0.25"``.
    """
    if mode not in MODES:
        raise ModeError(f"unknown mode {mode!r}")
    if isinstance(value, bool):
        raise DomainError(f"not a scalar: {value!r}")
    if isinstance(value, GaussianRational):
        return value if mode == EXACT else complex(value)
    if isinstance(value, (int, Fraction)):
        return GaussianRational(value) if mode == EXACT else complex(float(value))
    if isinstance(value, float):
        if not math.isfinite(value):
            raise DomainError(f"non-finite scalar {value!r}")
        return GaussianRational(Fraction(repr(value))) if mode == EXACT else complex(value)
    if isinstance(value, complex):
        if mode == EXACT:
            raise ModeError("complex floats cannot be parsed exactly")
        return value
    if not isinstance(value, str):
        raise DomainError(f"not a scalar: {value!r}")
    s = value.replace(" ", "")
    if not s:
        raise DomainError("empty scalar")
    re_txt, im_txt = _split_complex_text(s)
    try:
        re = Fraction(re_txt) if re_txt not in ("", "+") else Fraction(0)
        if im_txt is None:
            im = Fraction(0)
        elif im_txt in ("", "+"):
            im = Fraction(1)
        elif im_txt == "-":
            im = Fraction(-1)
        else:
            im = Fraction(im_txt)
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"cannot parse scalar {value!r}") from exc
    if mode == EXACT:
        return GaussianRational(re, im)
    return complex(float(re), float(im))


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------

def _is_exact_scalar(c) -> bool:
    return isinstance(c, GaussianRational)


class Polynomial:
    """Univariate polynomial, coefficients lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable):
        cs = list(coeffs)
        exact = all(isinstance(c, (GaussianRational, int, Fraction)) for c in cs)
        if exact:
            cs = [GaussianRational(c) if not isinstance(c, GaussianRational) else c for c in cs]
            while cs and not cs[-1]:
                cs.pop()
        else:
            cs = [complex(c) for c in cs]
            while cs and cs[-1] == 0:
                cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def x(cls) -> "Polynomial":
        return cls([ZERO, ONE])

    @classmethod
    def linear(cls, root) -> "Polynomial":
        """The monic polynomial x - root."""
        return cls([-root, ONE if isinstance(root, GaussianRational) else 1.0])

    @property
    def mode(self) -> str:
        return FLOAT if any(not _is_exact_scalar(c) for c in self.coeffs) else EXACT

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def degree(self) -> int:
        return max(len(self.coeffs) - 1, 0)

    @property
    def leading(self):
        return self.coeffs[-1] if self.coeffs else ZERO

    def monic(self) -> "Polynomial":
        if self.is_zero:
            return self
        lead = self.leading
        return Polynomial([c / lead for c in self.coeffs])

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __add__(self, other):
        zero = ZERO if self.mode == EXACT else 0j
        return Polynomial([a + b for a, b in zip_longest(self.coeffs, other.coeffs, fillvalue=zero)])

    def __sub__(self, other):
        zero = ZERO if self.mode == EXACT else 0j
        return Polynomial([a - b for a, b in zip_longest(self.coeffs, other.coeffs, fillvalue=zero)])

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            return Polynomial([c * other for c in self.coeffs])
        if self.is_zero or other.is_zero:
            return Polynomial([])
        zero = ZERO if self.mode == EXACT and other.mode == EXACT else 0j
        out = [zero] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return Polynomial(out)

    def __pow__(self, k: int):
        result = Polynomial([ONE if self.mode == EXACT else 1.0])
        for _ in range(k):
            result = result * self
        return result

    def divmod(self, other: "Polynomial") -> tuple["Polynomial", "Polynomial"]:
        if other.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = len(rem) - len(other.coeffs)
        if dq < 0:
            return Polynomial([]), self
        zero = ZERO if self.mode == EXACT else 0j
        quot = [zero] * (dq + 1)
        lead = other.leading
        for k in range(dq, -1, -1):
            c = rem[k + len(other.coeffs) - 1] / lead
            quot[k] = c
            if c:
                for j, b in enumerate(other.coeffs):
                    rem[k + j] = rem[k + j] - c * b
        return Polynomial(quot), Polynomial(rem[: len(other.coeffs) - 1])

    def __mod__(self, other):
        return self.divmod(other)[1]

    def __floordiv__(self, other):
        return self.divmod(other)[0]

    def derivative(self) -> "Polynomial":
        return Polynomial([c * k for k, c in enumerate(self.coeffs)][1:])

    def __call__(self, x):
        acc = ZERO if self.mode == EXACT and isinstance(x, GaussianRational) else 0j
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def eval_matrix(self, M):
        n = M.n
        acc = zero_matrix(n, M.mode)
        ident = identity(n, M.mode)
        for c in reversed(self.coeffs):
            acc = acc @ M + ident.scale(c)
        return acc

    def is_squarefree(self) -> bool:
        return poly_gcd(self, self.derivative()).degree == 0

    def to_strings(self) -> list[str]:
        return [format_scalar(c) for c in self.coeffs]

    @classmethod
    def from_strings(cls, items, mode: str = EXACT) -> "Polynomial":
        return cls([parse_scalar(s, mode) for s in items])

    def __repr__(self):
        return f"Polynomial({self.to_strings()})"


def poly_gcd(p: Polynomial, q: Polynomial) -> Polynomial:
    """Monic gcd over Q(i) by the Euclidean algorithm."""
    if p.mode != EXACT or q.mode != EXACT:
        raise ModeError("poly_gcd is exact-only")
    if p.is_zero and q.is_zero:
        raise DomainError("gcd(0, 0) is undefined")
    a, b = p, q
    while not b.is_zero:
        a, b = b, a % b
    return a.monic()


# ---------------------------------------------------------------------------
# Exact elimination over Q(i)
# ---------------------------------------------------------------------------

def rref(rows: Sequence[Sequence[GaussianRational]]) -> tuple[list[list[GaussianRational]], list[int]]:
    """Reduced row echelon form; returns (nonzero rows, pivot columns)."""
    m = [list(r) for r in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pr = next((i for i in range(r, len(m)) if m[i][c]), None)
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        inv = ONE / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(rows) -> int:
    return len(rref(rows)[1])


def nullspace(rows: Sequence[Sequence[GaussianRational]], ncols: int) -> list[list[GaussianRational]]:
    """Basis of {x : rows @ x = 0} as a list of column vectors."""
    if not rows:
        return [[ONE if i == j else ZERO for i in range(ncols)] for j in range(ncols)]
    red, piv = rref(rows)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        v = [ZERO] * ncols
        v[f] = ONE
        for r, pc in enumerate(piv):
            v[pc] = -red[r][f]
        basis.append(v)
    return basis


def _gauss_inverse(rows: Sequence[Sequence[GaussianRational]]) -> list[list[GaussianRational]]:
    n = len(rows)
    aug = [list(r) + [ONE if i == j else ZERO for j in range(n)] for i, r in enumerate(rows)]
    red, piv = rref(aug)
    if piv[:n] != list(range(n)) or len(piv) < n:
        raise SingularMatrixError("matrix is singular")
    return [r[n:] for r in red]


def _gauss_det(rows: Sequence[Sequence[GaussianRational]]) -> GaussianRational:
    m = [list(r) for r in rows]
    n = len(m)
    det = ONE
    for c in range(n):
        pr = next((i for i in range(c, n) if m[i][c]), None)
        if pr is None:
            return ZERO
        if pr != c:
            m[c], m[pr] = m[pr], m[c]
            det = -det
        p = m[c][c]
        det = det * p
        inv = ONE / p
        for i in range(c + 1, n):
            if m[i][c]:
                f = m[i][c] * inv
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return det


# ---------------------------------------------------------------------------
# Matrices
# ---------------------------------------------------------------------------

def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


class ExactMatrix:
    """n x n matrix over Q(i): entries (re[k] + i*im[k]) / den, row-major."""

    mode = EXACT
    __slots__ = ("n", "den", "re", "im", "_hash")

    def __init__(self, n: int, den: int, re: Sequence[int], im: Sequence[int] | None = None):
        if den == 0:
            raise DomainError("zero denominator")
        re = tuple(re)
        im = tuple(im) if im is not None else None
        if len(re) != n * n or (im is not None and len(im) != n * n):
            raise DomainError("entry count does not match dimension")
        if im is not None and not any(im):
            im = None
        g = math.gcd(den, *re, *(im or ()))
        if den < 0:
            g = -g
        if g != 1:
            den //= g
            re = tuple(x // g for x in re)
            if im is not None:
                im = tuple(x // g for x in im)
        self.n = n
        self.den = den
        self.re = re
        self.im = im
        self._hash = None

    @classmethod
    def from_rows(cls, rows) -> "ExactMatrix":
        rows = [[v if isinstance(v, GaussianRational) else parse_scalar(v, EXACT) for v in r] for r in rows]
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise DomainError("matrix must be square and nonempty")
        den = 1
        for r in rows:
            for v in r:
                den = _lcm(den, _lcm(v.re_den, v.im_den))
        re = [int(v.re * den) for r in rows for v in r]
        im = [int(v.im * den) for r in rows for v in r]
        return cls(n, den, re, im)

    def rows(self) -> tuple[tuple[GaussianRational, ...], ...]:
        n, d = self.n, self.den
        im = self.im or (0,) * (n * n)
        return tuple(
            tuple(GaussianRational(Fraction(self.re[i * n + j], d), Fraction(im[i * n + j], d)) for j in range(n))
            for i in range(n)
        )

    def entry(self, i: int, j: int) -> GaussianRational:
        k = i * self.n + j
        return GaussianRational(Fraction(self.re[k], self.den), Fraction(self.im[k] if self.im else 0, self.den))

    def __eq__(self, other):
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return self.n == other.n and self.den == other.den and self.re == other.re and self.im == other.im

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n, self.den, self.re, self.im))
        return self._hash

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        n = self.n
        if other.n != n:
            raise DomainError("dimension mismatch")
        ar, br = self.re, other.re
        bcols_r = [br[j::n] for j in range(n)]
        if self.im is None and other.im is None:
            out = [sum(map(int.__mul__, ar[i * n:(i + 1) * n], col)) for i in range(n) for col in bcols_r]
            return ExactMatrix(n, self.den * other.den, out)
        ai = self.im or (0,) * (n * n)
        bi = other.im or (0,) * (n * n)
        bcols_i = [bi[j::n] for j in range(n)]
        out_r, out_i = [], []
        for i in range(n):
            rr, ri = ar[i * n:(i + 1) * n], ai[i * n:(i + 1) * n]
            for j in range(n):
                cr, ci = bcols_r[j], bcols_i[j]
                out_r.append(sum(x * y for x, y in zip(rr, cr)) - sum(x * y for x, y in zip(ri, ci)))
                out_i.append(sum(x * y for x, y in zip(rr, ci)) + sum(x * y for x, y in zip(ri, cr)))
        return ExactMatrix(n, self.den * other.den, out_r, out_i)

    def _combine(self, other: "ExactMatrix", sign: int) -> "ExactMatrix":
        n = self.n
        d1, d2 = self.den, other.den
        re = [a * d2 + sign * b * d1 for a, b in zip(self.re, other.re)]
        zeros = (0,) * (n * n)
        im = [a * d2 + sign * b * d1 for a, b in zip(self.im or zeros, other.im or zeros)]
        return ExactMatrix(n, d1 * d2, re, im)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return ExactMatrix(self.n, self.den, [-x for x in self.re], [-x for x in self.im] if self.im else None)

    def scale(self, c) -> "ExactMatrix":
        c = GaussianRational(c) if not isinstance(c, GaussianRational) else c
        return ExactMatrix.from_rows([[c * v for v in r] for r in self.rows()])

    def is_identity(self, tol: float | None = None) -> bool:
        n = self.n
        if self.im is not None:
            return False
        d = self.den
        return all(self.re[i * n + j] == (d if i == j else 0) for i in range(n) for j in range(n))

    def is_diagonal(self, tol: float | None = None) -> bool:
        n = self.n
        im = self.im or (0,) * (n * n)
        return all(self.re[i * n + j] == 0 and im[i * n + j] == 0 for i in range(n) for j in range(n) if i != j)

    def is_integral(self) -> bool:
        return self.den == 1

    def det(self) -> GaussianRational:
        return _gauss_det(self.rows())

    def trace(self) -> GaussianRational:
        return sum((self.entry(i, i) for i in range(self.n)), ZERO)

    def inverse(self) -> "ExactMatrix":
        n = self.n
        if n == 2 and self.im is None:
            a, b, c, d = self.re
            det = a * d - b * c
            if det == 0:
                raise SingularMatrixError("matrix is singular")
            # (N/den)^-1 = den * adj(N) / det(N)
            return ExactMatrix(2, det, [d * self.den, -b * self.den, -c * self.den, a * self.den])
        return ExactMatrix.from_rows(_gauss_inverse(self.rows()))

    def transpose(self) -> "ExactMatrix":
        n = self.n
        idx = [j * n + i for i in range(n) for j in range(n)]
        return ExactMatrix(n, self.den, [self.re[k] for k in idx], [self.im[k] for k in idx] if self.im else None)

    def to_numpy(self) -> np.ndarray:
        n = self.n
        re = np.array([Fraction(x, self.den) for x in self.re], dtype=float).reshape(n, n)
        if self.im is None:
            return re.astype(complex)
        im = np.array([Fraction(x, self.den) for x in self.im], dtype=float).reshape(n, n)
        return re + 1j * im

    def to_strings(self) -> list[list[str]]:
        return [[format_scalar(v) for v in r] for r in self.rows()]

    def __repr__(self):
        return f"ExactMatrix({self.to_strings()})"


class FloatMatrix:
    """n x n complex double matrix; immutable wrapper around a numpy array."""

    mode = FLOAT
    __slots__ = ("a",)

    def __init__(self, a):
        arr = np.array(a, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
            raise DomainError("matrix must be square and nonempty")
        arr.setflags(write=False)
        self.a = arr

    @classmethod
    def from_rows(cls, rows) -> "FloatMatrix":
        return cls([[parse_scalar(v, FLOAT) for v in r] for r in rows])

    @property
    def n(self) -> int:
        return self.a.shape[0]

    def rows(self):
        return tuple(tuple(complex(x) for x in r) for r in self.a)

    def entry(self, i, j) -> complex:
        return complex(self.a[i, j])

    def __matmul__(self, other):
        if not isinstance(other, FloatMatrix):
            return NotImplemented
        return FloatMatrix(self.a @ other.a)

    def __add__(self, other):
        return FloatMatrix(self.a + other.a)

    def __sub__(self, other):
        return FloatMatrix(self.a - other.a)

    def __neg__(self):
        return FloatMatrix(-self.a)

    def scale(self, c) -> "FloatMatrix":
        return FloatMatrix(self.a * complex(c))

    def is_identity(self, tol: float = DEFAULT_TOLERANCE) -> bool:
        return bool(np.max(np.abs(self.a - np.eye(self.n))) <= tol)

    def is_diagonal(self, tol: float = DEFAULT_TOLERANCE) -> bool:
        off = self.a - np.diag(np.diag(self.a))
        return bool(np.max(np.abs(off)) <= tol)

    def det(self) -> complex:
        return complex(np.linalg.det(self.a))

    def trace(self) -> complex:
        return complex(np.trace(self.a))

    def inverse(self, tol: float = DEFAULT_TOLERANCE) -> "FloatMatrix":
        if abs(self.det()) <= tol:
            raise SingularMatrixError("matrix is singular within tolerance")
        return FloatMatrix(np.linalg.inv(self.a))

    def transpose(self) -> "FloatMatrix":
        return FloatMatrix(self.a.T)

    def to_numpy(self) -> np.ndarray:
        return np.array(self.a)

    def grid_key(self, pitch: float) -> tuple:
        flat = self.a.ravel()
        return tuple(np.rint(flat.real / pitch).astype(np.int64).tolist()) + tuple(
            np.rint(flat.imag / pitch).astype(np.int64).tolist()
        )

    def to_strings(self) -> list[list[str]]:
        return [[format_scalar(v) for v in r] for r in self.rows()]

    def __repr__(self):
        return f"FloatMatrix({self.a.tolist()})"


SquareMatrix = Union[ExactMatrix, FloatMatrix]


def identity(n: int, mode: str = EXACT) -> SquareMatrix:
    if mode == EXACT:
        return ExactMatrix(n, 1, [1 if i == j else 0 for i in range(n) for j in range(n)])
    return FloatMatrix(np.eye(n, dtype=complex))


def zero_matrix(n: int, mode: str = EXACT) -> SquareMatrix:
    if mode == EXACT:
        return ExactMatrix(n, 1, [0] * (n * n))
    return FloatMatrix(np.zeros((n, n), dtype=complex))


def matrix(rows, mode: str = EXACT) -> SquareMatrix:
    """Build a matrix from nested rows of scalars (strings, ints, Fractions, ...)."""
    if isinstance(rows, (ExactMatrix, FloatMatrix)):
        return rows if rows.mode == mode else convert(rows, mode)
    if mode == EXACT:
        return ExactMatrix.from_rows(rows)
    if isinstance(rows, np.ndarray):
        return FloatMatrix(rows)
    return FloatMatrix.from_rows(rows)


def diag(*values, mode: str = EXACT) -> SquareMatrix:
    n = len(values)
    zero = 0 if mode == EXACT else 0.0
    return matrix([[values[i] if i == j else zero for j in range(n)] for i in range(n)], mode)


def convert(M: SquareMatrix, mode: str) -> SquareMatrix:
    """Explicit mode conversion; exact -> float is lossy, float -> exact is refused."""
    if M.mode == mode:
        return M
    if mode == FLOAT:
        return FloatMatrix(M.to_numpy())
    raise ModeError("float matrices cannot be converted to exact mode")


def mat_inverse(M: SquareMatrix, tol: float = DEFAULT_TOLERANCE) -> SquareMatrix:
    if M.mode == FLOAT:
        return M.inverse(tol)
    return M.inverse()


def mat_equal(A: SquareMatrix, B: SquareMatrix, tol: float = DEFAULT_TOLERANCE) -> bool:
    if A.mode != B.mode:
        raise ModeError("cannot compare matrices of different modes")
    if A.mode == EXACT:
        return A == B
    return bool(np.max(np.abs(A.a - B.a)) <= tol)


def operator_norm(M) -> float:
    """Largest singular value, via the symmetric eigenproblem of M^H M."""
    a = M.to_numpy() if hasattr(M, "to_numpy") else np.asarray(M, dtype=complex)
    ev = np.linalg.eigvalsh(a.conj().T @ a)
    return float(math.sqrt(max(float(ev[-1]), 0.0)))


def operator_norms(stack: np.ndarray) -> np.ndarray:
    """Batched operator norms of an array of shape (k, n, n)."""
    stack = np.asarray(stack)
    k, n = stack.shape[0], stack.shape[1]
    if k == 0:
        return np.zeros(0)
    if n == 1:
        return np.abs(stack[:, 0, 0])
    if n == 2:
        a, b, c, d = stack[:, 0, 0], stack[:, 0, 1], stack[:, 1, 0], stack[:, 1, 1]
        fro = (np.abs(a) ** 2 + np.abs(b) ** 2 + np.abs(c) ** 2 + np.abs(d) ** 2)
        det2 = np.abs(a * d - b * c) ** 2
        disc = np.sqrt(np.maximum(fro * fro - 4.0 * det2, 0.0))
        return np.sqrt((fro + disc) / 2.0)
    return np.linalg.svd(stack, compute_uv=False)[:, 0]


# ---------------------------------------------------------------------------
# Group specifications
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GroupSpec:
    """Generators of a subgroup of GL_n(C) plus the arithmetic mode.

    ``symmetric`` lists ``(label, matrix)`` pairs where label ``+k`` is generator
    ``k-1`` and ``-k`` its inverse; duplicates and identity matrices are dropped.
    """

    generators: tuple
    mode: str = EXACT
    tolerance: float = DEFAULT_TOLERANCE
    symmetric: tuple = field(init=False, repr=False, compare=False)
    inverses: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        gens = tuple(self.generators)
        object.__setattr__(self, "generators", gens)
        if self.mode not in MODES:
            raise ModeError(f"unknown mode {self.mode!r}")
        if not gens:
            raise DomainError("at least one generator is required")
        if not self.tolerance > 0:
            raise DomainError("tolerance must be positive")
        n = gens[0].n
        inverses = []
        for idx, g in enumerate(gens):
            if g.mode != self.mode:
                raise ModeError(f"generator {idx} is in {g.mode} mode, spec is {self.mode}")
            if g.n != n:
                raise DomainError(f"generator {idx} has dimension {g.n}, expected {n}")
            if self.mode == EXACT:
                invertible = bool(g.det())
            else:
                invertible = abs(g.det()) > self.tolerance
            if not invertible:
                raise SingularMatrixError(f"generator {idx} not invertible")
            inverses.append(mat_inverse(g, self.tolerance))
        object.__setattr__(self, "inverses", tuple(inverses))
        sym = []
        seen = []
        for idx, (g, gi) in enumerate(zip(gens, inverses)):
            for label, m in ((idx + 1, g), (-(idx + 1), gi)):
                if m.is_identity(self.tolerance):
                    continue
                if any(mat_equal(m, s, self.tolerance) for s in seen):
                    continue
                seen.append(m)
                sym.append((label, m))
        object.__setattr__(self, "symmetric", tuple(sym))

    @classmethod
    def from_entries(cls, generators, mode: str = EXACT, tolerance: float = DEFAULT_TOLERANCE) -> "GroupSpec":
        return cls(tuple(matrix(g, mode) for g in generators), mode, tolerance)

    @property
    def n(self) -> int:
        return self.generators[0].n

    @property
    def identity(self) -> SquareMatrix:
        return identity(self.n, self.mode)

    def letter(self, label: int) -> SquareMatrix:
        k = abs(label) - 1
        if label == 0 or k >= len(self.generators):
            raise DomainError(f"invalid generator label {label}")
        return self.generators[k] if label > 0 else self.inverses[k]

    def evaluate(self, word: Sequence[int]) -> SquareMatrix:
        result = self.identity
        for label in word:
            result = result @ self.letter(label)
        return result

    def to_float(self) -> "GroupSpec":
        if self.mode == FLOAT:
            return self
        return GroupSpec(tuple(convert(g, FLOAT) for g in self.generators), FLOAT, self.tolerance)

    def equal(self, A: SquareMatrix, B: SquareMatrix) -> bool:
        return mat_equal(A, B, self.tolerance)

    def is_identity(self, M: SquareMatrix) -> bool:
        return M.is_identity(self.tolerance)


def invert_word(word: Sequence[int]) -> tuple[int, ...]:
    return tuple(-x for x in reversed(word))
