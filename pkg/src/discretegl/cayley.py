"""Cayley balls, growth fits, separation statistics and discreteness probing."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DomainError, TruncatedBallError
from .exactcore import EXACT, GroupSpec, operator_norms

DEFAULT_DEPTH = 8
DEFAULT_CAP = 200_000
DEFAULT_WINDOW = 6
GROWTH_MARGIN = 0.20
EXPONENTIAL_BASE_MARGIN = 0.05

Word = tuple  # signed generator labels, see GroupSpec.symmetric


@dataclass
class Ball:
    """Products of at most ``depth`` symmetric generators, in canonical order.

    Elements are ordered by word length, then lexicographically by the position
    of each letter in ``spec.symmetric``; ``sizes[m]`` is the size of the ball of
    radius m, so the first ``sizes[m]`` elements form that ball.
    """

    spec: GroupSpec
    depth: int
    elements: list
    words: list
    sizes: list
    truncated: bool = False
    closed: bool = False
    max_merged_distance: float = 0.0
    _stack: np.ndarray | None = field(default=None, repr=False)

    def __len__(self):
        return len(self.elements)

    @property
    def depth_reached(self) -> int:
        return len(self.sizes) - 1

    def prefix(self, m: int) -> list:
        return self.elements[: self.sizes[m]]

    def level(self, m: int) -> range:
        start = self.sizes[m - 1] if m > 0 else 0
        return range(start, self.sizes[m])

    def stack(self) -> np.ndarray:
        """All elements as a complex array of shape (N, n, n)."""
        if self._stack is None or len(self._stack) != len(self.elements):
            n = self.spec.n
            self._stack = (np.array([e.to_numpy() for e in self.elements], dtype=complex)
                           if self.elements else np.zeros((0, n, n), dtype=complex))
        return self._stack


def enumerate_ball(spec: GroupSpec, depth: int = DEFAULT_DEPTH, cap: int = DEFAULT_CAP) -> Ball:
    """Breadth-first closure of the identity under right multiplication by generators."""
    if depth < 0:
        raise DomainError("depth must be >= 0")
    if cap < 1:
        raise DomainError("cap must be >= 1")
    exact = spec.mode == EXACT
    pitch = spec.tolerance

    def key(m):
        return m if exact else m.grid_key(pitch)

    ident = spec.identity
    elements, words = [ident], [()]
    index = {key(ident): 0}
    sizes = [1]
    frontier = [0]
    truncated = closed = False
    merged = 0.0
    for _ in range(depth):
        nxt = []
        for idx in frontier:
            g, w = elements[idx], words[idx]
            for label, s in spec.symmetric:
                h = g @ s
                k = key(h)
                hit = index.get(k)
                if hit is not None:
                    if not exact:
                        merged = max(merged, float(np.max(np.abs(h.a - elements[hit].a))))
                    continue
                if len(elements) >= cap:
                    truncated = True
                    break
                index[k] = len(elements)
                nxt.append(len(elements))
                elements.append(h)
                words.append(w + (label,))
            if truncated:
                break
        if truncated:
            break
        sizes.append(len(elements))
        frontier = nxt
        if not frontier:
            closed = True
    return Ball(spec, depth, elements, words, sizes, truncated, closed, merged)


# ---------------------------------------------------------------------------
# Growth
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GrowthClass:
    tag: str  # Finite | Polynomial | Exponential | Indeterminate
    degree: float | None = None
    base: float | None = None
    order: int | None = None
    residual_exponential: float | None = None
    residual_polynomial: float | None = None
    depths: tuple = ()


def _fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    A = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sum((A @ coef - y) ** 2))
    return float(coef[0]), float(coef[1]), resid


def growth_profile(sizes: Sequence[int], window: int = DEFAULT_WINDOW, truncated: bool = False) -> GrowthClass:
    """Classify ball sizes |S_0|, ..., |S_m| by two least-squares fits.

    log|S_m| is fitted against m and against log m over the last ``window``
    depths; the winner must beat the other residual by the 20% margin.
    """
    if truncated:
        raise TruncatedBallError("growth conclusions need an untruncated ball")
    if window < 4:
        raise DomainError("window must be >= 4")
    sizes = list(sizes)
    if len(sizes) >= 2 and sizes[-1] == sizes[-2]:
        return GrowthClass("Finite", order=sizes[-1])
    ms = [m for m in range(1, len(sizes))][-window:]
    if len(ms) < 3:
        return GrowthClass("Indeterminate", depths=tuple(ms))
    x = np.array(ms, dtype=float)
    y = np.log(np.array([sizes[m] for m in ms], dtype=float))
    _, slope_e, res_e = _fit(x, y)
    _, slope_p, res_p = _fit(np.log(x), y)
    base = math.exp(slope_e)
    common = dict(residual_exponential=res_e, residual_polynomial=res_p, depths=tuple(ms),
                  degree=slope_p, base=base)
    if res_e <= (1 - GROWTH_MARGIN) * res_p and base > 1 + EXPONENTIAL_BASE_MARGIN:
        return GrowthClass("Exponential", **common)
    if res_p <= (1 - GROWTH_MARGIN) * res_e:
        return GrowthClass("Polynomial", **common)
    return GrowthClass("Indeterminate", **common)


# ---------------------------------------------------------------------------
# Separation statistics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SeparationStats:
    diameter: float
    separation: float
    count: int
    norm_bound: float
    separation_floor: float

    @property
    def ratio(self) -> float:
        return self.diameter / self.separation if self.separation > 0 else math.inf


def _as_stack(elements, n: int) -> np.ndarray:
    if isinstance(elements, np.ndarray):
        stack = elements.astype(complex, copy=False)
    else:
        stack = np.array([e.to_numpy() for e in elements], dtype=complex)
    if stack.size and stack.shape[1:] != (n, n):
        raise DomainError(f"elements have shape {stack.shape[1:]}, spec dimension is {n}")
    return stack.reshape(-1, n, n)


def pairwise_extremes(stack: np.ndarray, chunk: int = 512) -> tuple[float, float]:
    """(max, min) operator-norm distance over unordered pairs of distinct indices."""
    N = len(stack)
    hi, lo = 0.0, math.inf
    for start in range(0, N - 1, chunk):
        block = stack[start:start + chunk]
        for off in range(len(block)):
            i = start + off
            rest = stack[i + 1:]
            if not len(rest):
                continue
            d = operator_norms(rest - block[off])
            hi = max(hi, float(d.max()))
            lo = min(lo, float(d.min()))
    return hi, lo


def separation_stats(elements, spec: GroupSpec) -> SeparationStats:
    """Diameter, separation, generator norm bound B and identity gap D of a finite set."""
    n = spec.n
    stack = _as_stack(elements, n)
    if len(stack) < 2:
        raise DomainError("separation statistics need at least two elements")
    diameter, separation = pairwise_extremes(stack)
    gens = np.array([m.to_numpy() for _, m in spec.symmetric] or [spec.identity.to_numpy()])
    B = float(operator_norms(gens).max())
    gaps = operator_norms(stack - np.eye(n))
    nonid = gaps[gaps > spec.tolerance]
    D = float(nonid.min()) if nonid.size else math.inf
    return SeparationStats(diameter, separation, len(stack), B, D)


def ball_stats(ball: Ball, depths: Sequence[int]) -> dict[int, SeparationStats]:
    full = ball.stack()
    return {m: separation_stats(full[: ball.sizes[m]], ball.spec) for m in depths}


class AssouadEstimate(NamedTuple):
    beta: float
    degenerate: bool


def assouad_lower_bound(stats_seq: Sequence[SeparationStats]) -> AssouadEstimate:
    """Slope of log(count) against log(diameter/separation) across depths."""
    pts = [(math.log(s.ratio), math.log(s.count)) for s in stats_seq
           if s.count >= 2 and math.isfinite(s.ratio) and s.ratio > 0]
    if len(pts) < 2:
        return AssouadEstimate(0.0, True)
    x = np.array([p[0] for p in pts])
    y = np.array([p[1] for p in pts])
    if float(np.ptp(x)) < 1e-12:
        return AssouadEstimate(0.0, True)
    _, slope, _ = _fit(x, y)
    return AssouadEstimate(max(slope, 0.0), False)


def ratio_bound_replay(stats: dict[int, SeparationStats], D: float, B: float) -> list[dict]:
    """Check diameter/separation <= (2/D) * B^(2m) + 1e-6 for each depth m."""
    rows = []
    for m in sorted(stats):
        s = stats[m]
        bound = (2.0 / D) * B ** (2 * m) + 1e-6
        rows.append({"m": m, "ratio": s.ratio, "bound": bound, "ok": s.ratio <= bound})
    return rows


def ball_table_csv(ball: Ball, stats: dict[int, SeparationStats] | None = None) -> str:
    """CSV rows (m, size, diameter, separation, ratio) for plotting."""
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["m", "size", "diameter", "separation", "ratio"])
    for m, size in enumerate(ball.sizes):
        s = (stats or {}).get(m)
        if s is None:
            w.writerow([m, size, "", "", ""])
        else:
            w.writerow([m, size, repr(s.diameter), repr(s.separation), repr(s.ratio)])
    return out.getvalue()


# ---------------------------------------------------------------------------
# Discreteness
# ---------------------------------------------------------------------------

@dataclass
class DiscretenessReport:
    """Per-depth minima of ||g - I|| over non-identity ball elements.

    ``minima[m-1]`` and ``witnesses[m-1]`` belong to the ball of radius m.
    """

    verdict: str  # SeparatedSoFar | ApproachingIdentity | TrivialGroup | Indeterminate
    minima: list
    witnesses: list
    decreases: int
    depth: int
    d_lower: float | None = None
    witness: tuple | None = None
    truncated: bool = False

    @property
    def witness_value(self) -> float | None:
        return self.minima[-1] if self.minima else None


def discreteness_probe(spec: GroupSpec, depth: int = DEFAULT_DEPTH, cap: int = DEFAULT_CAP,
                       ball: Ball | None = None) -> DiscretenessReport:
    """Look for elements creeping towards the identity.

    ApproachingIdentity is reported when the smallest gap drops below ten times
    the tolerance, or when the per-depth minima strictly decrease at least three
    times. Otherwise the last minimum is a separation floor for the explored ball.
    """
    if depth < 1:
        raise DomainError("depth must be >= 1")
    if ball is None or ball.depth < depth:
        ball = enumerate_ball(spec, depth, cap)
    n = spec.n
    stack = ball.stack()
    gaps = operator_norms(stack - np.eye(n)) if len(stack) else np.zeros(0)
    if spec.mode == EXACT:
        nonid = np.array([not e.is_identity() for e in ball.elements], dtype=bool)
    else:
        nonid = np.array([not e.is_identity(spec.tolerance) for e in ball.elements], dtype=bool)
    minima, witnesses = [], []
    best, best_idx = math.inf, None
    reached = min(depth, ball.depth_reached)
    for m in range(1, reached + 1):
        for idx in ball.level(m):
            if nonid[idx] and gaps[idx] < best:
                best, best_idx = float(gaps[idx]), idx
        minima.append(best)
        witnesses.append(ball.words[best_idx] if best_idx is not None else None)
    decreases = sum(1 for a, b in zip(minima, minima[1:]) if b < a)
    if ball.truncated and reached < depth:
        return DiscretenessReport("Indeterminate", minima, witnesses, decreases, reached, truncated=True)
    if best_idx is None:
        return DiscretenessReport("TrivialGroup", minima, witnesses, 0, reached)
    witness = ball.words[best_idx]
    if best < 10 * spec.tolerance or decreases >= 3:
        return DiscretenessReport("ApproachingIdentity", minima, witnesses, decreases, reached,
                                  witness=witness, truncated=ball.truncated)
    return DiscretenessReport("SeparatedSoFar", minima, witnesses, decreases, reached,
                              d_lower=best, witness=witness, truncated=ball.truncated)
