import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, strategies as st

from discretegl.cayley import (
    assouad_lower_bound,
    ball_stats,
    ball_table_csv,
    discreteness_probe,
    enumerate_ball,
    growth_profile,
    ratio_bound_replay,
    separation_stats,
    SeparationStats,
)
from discretegl.errors import DomainError, TruncatedBallError
from discretegl.exactcore import FLOAT, GroupSpec, diag, operator_norm

from conftest import load_spec

SANOV_SIZES = [1, 5, 17, 53, 161, 485, 1457, 4373, 13121]


def reduced_word_count(m, letters=4):
    """Free-reduction oracle: words of length <= m with no x x^-1 adjacency, by explicit listing."""
    inverse = {0: 1, 1: 0, 2: 3, 3: 2}
    total = 0
    for length in range(m + 1):
        for w in product(range(letters), repeat=length):
            if all(inverse[a] != b for a, b in zip(w, w[1:])):
                total += 1
    return total


def spec_1x1(*values):
    return GroupSpec.from_entries([[[str(v)]] for v in values])


# enumeration

def test_sanov_depth_2(sanov):
    assert len(enumerate_ball(sanov, 2)) == 17 == reduced_word_count(2)


def test_sanov_sizes_against_free_reduction(sanov):
    ball = enumerate_ball(sanov, 8)
    assert ball.sizes == SANOV_SIZES
    assert ball.sizes[:6] == [reduced_word_count(m) for m in range(6)]
    assert ball.sizes == [2 * 3 ** m - 1 for m in range(9)]


@pytest.mark.parametrize("m", [0, 1, 4, 9])
def test_single_generator_ball(m):
    assert len(enumerate_ball(spec_1x1(2), m)) == 2 * m + 1


def test_identity_generator():
    spec = GroupSpec.from_entries([[["1", "0"], ["0", "1"]]])
    for m in range(4):
        ball = enumerate_ball(spec, m)
        assert len(ball) == 1
    assert enumerate_ball(spec, 2).closed


def test_rotation_closes():
    ball = enumerate_ball(load_spec("rotation.json"), 6)
    assert ball.closed and len(ball) == 4


def test_truncation_flag(sanov):
    ball = enumerate_ball(sanov, 8, cap=100)
    assert ball.truncated and len(ball) == 100
    with pytest.raises(TruncatedBallError):
        growth_profile(ball.sizes, 4, truncated=ball.truncated)


def test_words_evaluate_and_are_canonical(sanov):
    ball = enumerate_ball(sanov, 4)
    pos = {lab: i for i, (lab, _) in enumerate(sanov.symmetric)}
    keys = [(len(w), [pos[x] for x in w]) for w in ball.words]
    assert keys == sorted(keys)
    for w, e in zip(ball.words, ball.elements):
        assert sanov.evaluate(w) == e
    assert len(set(ball.elements)) == len(ball.elements)


def test_deterministic_order(heisenberg):
    a, b = enumerate_ball(heisenberg, 5), enumerate_ball(heisenberg, 5)
    assert a.words == b.words and a.elements == b.elements


@given(st.lists(st.sampled_from(["2", "3", "1/2", "-1", "2*i", "-3/4"]), min_size=1, max_size=2),
       st.integers(1, 5))
def test_ball_sizes_monotone(entries, depth):
    spec = GroupSpec.from_entries([[[e]] for e in entries])
    ball = enumerate_ball(spec, depth)
    s = ball.sizes
    assert all(x <= y for x, y in zip(s, s[1:]))
    if not ball.closed:
        assert all(x < y for x, y in zip(s, s[1:]))
    assert ball.prefix(depth - 1) == ball.elements[: s[depth - 1]]


def test_float_ball_matches_exact(heisenberg):
    exact = enumerate_ball(heisenberg, 4)
    flt = enumerate_ball(heisenberg.to_float(), 4)
    assert flt.sizes == exact.sizes
    assert flt.max_merged_distance < 1e-9


# growth

def test_growth_linear():
    g = growth_profile([2 * m + 1 for m in range(12)], 6)
    assert g.tag == "Polynomial" and g.degree == pytest.approx(1, abs=0.2)


def test_growth_free():
    g = growth_profile([2 * 3 ** m - 1 for m in range(9)], 6)
    assert g.tag == "Exponential" and g.base == pytest.approx(3, abs=0.2)


def test_growth_finite():
    assert growth_profile([1, 4, 8, 8, 8, 8], 4).tag == "Finite"


def test_growth_window_minimum():
    with pytest.raises(DomainError):
        growth_profile([1, 3, 5, 7, 9], 3)


@given(st.floats(1.0, 1.04), st.integers(4, 8))
def test_exponential_needs_base_margin(c, window):
    sizes = [math.ceil(10 * c ** m) + m for m in range(12)]
    g = growth_profile(sizes, window)
    assert g.tag != "Exponential" or g.base > 1.05


def test_heisenberg_polynomial(heisenberg):
    ball = enumerate_ball(heisenberg, 12)
    g = growth_profile(ball.sizes, 7)
    assert g.depths == tuple(range(6, 13))
    assert g.tag == "Polynomial" and 3 <= g.degree <= 5


# separation statistics

def test_separation_two_points():
    spec = GroupSpec.from_entries([[["2", "0"], ["0", "2"]]])
    s = separation_stats([diag(1, 1), diag(2, 2)], spec)
    assert (s.diameter, s.separation, s.count) == pytest.approx((1, 1, 2))


def test_separation_three_scalars():
    s = separation_stats([diag(1), diag(2), diag(4)], spec_1x1(2))
    assert (s.diameter, s.separation) == pytest.approx((3, 1))


def test_separation_needs_two():
    with pytest.raises(DomainError):
        separation_stats([diag(1)], spec_1x1(2))
    with pytest.raises(DomainError):
        separation_stats([diag(1, 1), diag(2, 2)], spec_1x1(2))


def test_sanov_depth3_separation(sanov):
    ball = enumerate_ball(sanov, 3)
    s = separation_stats(ball.elements, sanov)
    # brute force: operator norm dominates the max entry modulus of the difference
    brute = min(max(abs(x - y) for x, y in zip(a.to_numpy().ravel(), b.to_numpy().ravel()))
                for i, a in enumerate(ball.elements) for b in ball.elements[i + 1:])
    assert brute >= 1
    assert s.separation >= brute - 1e-12 >= 1 - 1e-12
    assert s.separation <= s.diameter


@given(st.lists(st.integers(-6, 6), min_size=2, max_size=8, unique=True))
def test_separation_matches_pairwise(values):
    spec = spec_1x1(2)
    s = separation_stats([diag(v) for v in values], spec)
    diffs = [abs(a - b) for i, a in enumerate(values) for b in values[i + 1:]]
    assert s.diameter == pytest.approx(max(diffs)) and s.separation == pytest.approx(min(diffs))
    assert s.separation <= s.diameter and s.count >= 2


# Assouad estimate

def test_sanov_assouad(sanov):
    ball = enumerate_ball(sanov, 7)
    stats = ball_stats(ball, range(3, 8))
    est = assouad_lower_bound([stats[m] for m in range(3, 8)])
    assert est.beta > 0.2 and not est.degenerate
    for m in range(3, 8):
        assert stats[m].count >= 3 ** (m - 1)


def _closed_form_slope(ms):
    x = np.array([math.log(2 ** (2 * m) - 1) for m in ms])
    y = np.array([math.log(2 * m + 1) for m in ms])
    return float(np.polyfit(x, y, 1)[0])


def test_single_generator_assouad():
    ball = enumerate_ball(spec_1x1(2), 10)
    stats = ball_stats(ball, range(3, 11))
    for m in range(3, 11):
        assert stats[m].count == 2 * m + 1
        assert stats[m].ratio == pytest.approx(2 ** (2 * m) - 1)
    beta = assouad_lower_bound([stats[m] for m in range(3, 10)]).beta
    assert beta == pytest.approx(_closed_form_slope(range(3, 10)), rel=1e-9)
    assert beta == pytest.approx(0.117784, abs=1e-6)
    windows = [assouad_lower_bound([stats[m] for m in range(lo, lo + 4)]).beta for lo in range(3, 8)]
    assert all(a > b for a, b in zip(windows, windows[1:]))


def test_constant_stats_degenerate():
    s = SeparationStats(2.0, 1.0, 5, 2.0, 1.0)
    est = assouad_lower_bound([s, s, s])
    assert est == (0.0, True)


def test_ratio_bound_replay(sanov):
    ball = enumerate_ball(sanov, 6)
    stats = ball_stats(ball, range(2, 7))
    B = max(operator_norm(m) for _, m in sanov.symmetric)
    probe = discreteness_probe(sanov, 6, ball=ball)
    assert probe.verdict == "SeparatedSoFar"
    rows = ratio_bound_replay(stats, probe.d_lower, B)
    for r in rows:
        assert r["ratio"] <= (2 / probe.d_lower) * B ** (2 * r["m"]) + 1e-6 and r["ok"]


def test_ball_table_csv(sanov):
    ball = enumerate_ball(sanov, 4)
    lines = ball_table_csv(ball).strip().splitlines()
    assert lines[0] == "m,size,diameter,separation,ratio"
    assert [int(l.split(",")[1]) for l in lines[1:]] == [1, 5, 17, 53, 161]


# discreteness

def test_sanov_separated(sanov):
    rep = discreteness_probe(sanov, 4)
    assert rep.verdict == "SeparatedSoFar" and rep.d_lower >= 1


def test_two_three_approaching_identity():
    spec = spec_1x1(2, 3)
    rep = discreteness_probe(spec, 14)
    assert rep.verdict == "ApproachingIdentity"
    # exhaustive oracle over exponent pairs |a| + |b| <= 14
    best = min(abs(2.0 ** a * 3.0 ** b - 1) for a in range(-14, 15) for b in range(-14, 15)
               if abs(a) + abs(b) <= 14 and (a, b) != (0, 0))
    assert best == pytest.approx(abs(243 / 256 - 1))
    assert rep.witness_value == pytest.approx(best)
    a = sum(1 if x == 1 else -1 if x == -1 else 0 for x in rep.witness)
    b = sum(1 if x == 2 else -1 if x == -2 else 0 for x in rep.witness)
    assert 2.0 ** a * 3.0 ** b == pytest.approx(243 / 256)


def test_trivial_group():
    assert discreteness_probe(spec_1x1(1), 3).verdict == "TrivialGroup"


def test_truncated_probe(sanov):
    assert discreteness_probe(sanov, 8, cap=50).verdict == "Indeterminate"


@given(st.lists(st.sampled_from(["2", "3", "5/4", "-1", "3/2"]), min_size=1, max_size=2), st.integers(1, 8))
def test_minima_non_increasing(entries, depth):
    rep = discreteness_probe(GroupSpec.from_entries([[[e]] for e in entries]), depth)
    assert all(b <= a for a, b in zip(rep.minima, rep.minima[1:]))


def test_float_probe():
    spec = GroupSpec.from_entries([[[2]], [[3]]], mode=FLOAT)
    rep = discreteness_probe(spec, 14)
    assert rep.verdict == "ApproachingIdentity"
