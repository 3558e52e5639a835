"""Step law, memory schedules, and single-trajectory simulation."""

import math
from fractions import Fraction

import numpy as np
import pytest

from erwlab import (
    GrowthRule,
    MemorySchedule,
    MemoryView,
    StepHistory,
    WalkParams,
    draw_first_step,
    make_run_stream,
    memory_view,
    simulate_path,
    step_distribution,
)


# ---------------------------------------------------------------------------
# parameters
# ---------------------------------------------------------------------------


def test_params_basic():
    pr = WalkParams(p=0.7)
    assert pr.q == pytest.approx(0.3, abs=1e-15)
    assert pr.r == 0.0
    assert pr.s == 0.7
    assert not pr.delayed
    assert pr.drift == pytest.approx(0.4, abs=1e-15)


def test_params_delayed_triple():
    pr = WalkParams(p=0.5, q=0.2, r=0.3)
    assert pr.delayed
    assert pr.p + pr.q + pr.r == 1.0


@pytest.mark.parametrize("kwargs", [
    dict(p=0.0),
    dict(p=1.0),
    dict(p=0.5, r=1.0),          # r = 1 forces p = 0, rejected
    dict(p=0.5, q=0.1, r=0.3),   # does not sum to 1
    dict(p=0.9, q=-0.1, r=0.2),
    dict(p=0.5, s=1.5),
])
def test_params_rejections(kwargs):
    with pytest.raises(ValueError):
        WalkParams(**kwargs)


# ---------------------------------------------------------------------------
# growth rules and schedules
# ---------------------------------------------------------------------------


def test_growth_rule_validation():
    with pytest.raises(ValueError):
        GrowthRule(kind="power", beta=0.0)
    with pytest.raises(ValueError):
        GrowthRule(kind="power", beta=1.5)
    with pytest.raises(ValueError):
        GrowthRule(kind="exp")
    with pytest.raises(ValueError):
        GrowthRule(c=-1.0)


@pytest.mark.parametrize("sched", [
    MemorySchedule.full(),
    MemorySchedule.first_fixed(5),
    MemorySchedule.first_increasing(GrowthRule(kind="power", c=1.0, beta=0.5)),
    MemorySchedule.first_increasing(GrowthRule(kind="power", c=3.0, beta=0.3)),
    MemorySchedule.first_increasing(GrowthRule(kind="power", c=0.5, beta=1.0)),
    MemorySchedule.first_increasing(GrowthRule(kind="log", c=2.0)),
    MemorySchedule.last_fixed(4),
    MemorySchedule.last_increasing(GrowthRule(kind="power", c=1.0, beta=0.6)),
])
def test_block_size_bounds_and_monotone(sched):
    prev = 0
    for n in range(1, 2000):
        m = sched.block_size(n)
        assert 1 <= m <= n
        assert m >= prev
        assert m - prev <= 1 or prev == 0
        prev = m


def test_alpha_schedule_tracks_fraction():
    sched = MemorySchedule.first_increasing(GrowthRule(kind="power", c=0.5, beta=1.0))
    assert sched.block_size(10**6) == pytest.approx(0.5 * 10**6, rel=1e-5)


def test_frozen_at_horizon():
    sched = MemorySchedule.first_increasing()
    frozen = sched.frozen_at_horizon(10_000)
    assert frozen.variant == "first-fixed"
    assert frozen.m == 100
    aug = MemorySchedule.first_plus_recent(growth=GrowthRule(), recent=2)
    frozen_aug = aug.frozen_at_horizon(10_000)
    assert frozen_aug.variant == "first-plus-recent"
    assert frozen_aug.m == 100 and frozen_aug.recent == 2


def test_memory_indices_examples():
    sched = MemorySchedule.first_plus_recent(growth=GrowthRule(), recent=1)
    assert sched.memory_indices(9) == [1, 2, 3, 9]
    assert MemorySchedule.last_fixed(2).memory_indices(5) == [4, 5]
    assert MemorySchedule.full().memory_indices(3) == [1, 2, 3]


# ---------------------------------------------------------------------------
# memory views
# ---------------------------------------------------------------------------


def _history(steps):
    h = StepHistory()
    for x in steps:
        h.append(x)
    return h


def test_memory_view_first_increasing_all_ones():
    h = _history([1] * 9)
    v = memory_view(h, MemorySchedule.first_increasing(), 9)
    assert (v.size, v.sum, v.nonzero) == (3, 3, 3)


def test_memory_view_plus_recent_size():
    h = _history([1] * 9)
    v = memory_view(h, MemorySchedule.first_plus_recent(growth=GrowthRule(), recent=1), 9)
    assert v.size == 4


def test_memory_view_last_window():
    h = _history([1, -1, 1, 1, -1])
    v = memory_view(h, MemorySchedule.last_fixed(2), 5)
    assert (v.size, v.sum, v.nonzero) == (2, 0, 2)


def test_memory_view_needs_time():
    with pytest.raises(ValueError):
        memory_view(_history([1]), MemorySchedule.full(), 0)


def test_view_invariants_enforced():
    with pytest.raises(ValueError):
        MemoryView(size=2, sum=3, nonzero=2)
    with pytest.raises(ValueError):
        MemoryView(size=3, sum=1, nonzero=2)  # parity


# ---------------------------------------------------------------------------
# one-step law
# ---------------------------------------------------------------------------


def _exact_step_law(p, q, r, steps):
    """Independent oracle: average the coin law over each remembered step."""
    m = len(steps)
    pp = Fraction(0)
    pz = Fraction(0)
    pm = Fraction(0)
    for x in steps:
        if x == 1:
            pp += p
            pm += q
            pz += r
        elif x == -1:
            pp += q
            pm += p
            pz += r
        else:
            pz += 1
    return pp / m, pz / m, pm / m


def test_step_distribution_two_valued_example():
    got = step_distribution(WalkParams(p=0.7), MemoryView(4, 2, 4))
    want = _exact_step_law(Fraction(7, 10), Fraction(3, 10), Fraction(0), [1, 1, 1, -1])
    assert got[0] == pytest.approx(float(want[0]), abs=1e-15)
    assert got == pytest.approx((0.6, 0.0, 0.4), abs=1e-15)


def test_step_distribution_symmetric_is_coin():
    # r = 0 keeps the memory free of zeros, so reachable views have nonzero == size
    for view in (MemoryView(5, 3, 5), MemoryView(8, 0, 8), MemoryView(3, -1, 3)):
        assert step_distribution(WalkParams(p=0.5), view) == pytest.approx(
            (0.5, 0.0, 0.5), abs=1e-15)


def test_step_distribution_delayed_example():
    got = step_distribution(WalkParams(p=0.5, q=0.2, r=0.3), MemoryView(3, 0, 2))
    want = _exact_step_law(Fraction(1, 2), Fraction(1, 5), Fraction(3, 10), [1, -1, 0])
    assert want == (Fraction(7, 30), Fraction(16, 30), Fraction(7, 30))
    assert got == pytest.approx(tuple(float(x) for x in want), abs=1e-15)


def test_step_distribution_simplex_and_mean_identity():
    rng = np.random.default_rng(1)
    for _ in range(300):
        pi = Fraction(rng.integers(1, 99)), Fraction(rng.integers(0, 99))
        p = pi[0] / 100
        r = min(pi[1] / 100, 1 - p - Fraction(1, 100))
        r = max(r, Fraction(0))
        q = 1 - p - r
        size = int(rng.integers(1, 40))
        nonzero = int(rng.integers(0, size + 1)) if r > 0 else size
        ssum = int(rng.integers(-nonzero, nonzero + 1))
        if (ssum - nonzero) % 2:
            ssum += 1 if ssum < nonzero else -1
        params = WalkParams(p=float(p), q=float(q), r=float(r))
        view = MemoryView(size, ssum, nonzero)
        pp, pz, pm = step_distribution(params, view)
        assert 0.0 <= min(pp, pz, pm) and max(pp, pz, pm) <= 1.0 + 1e-15
        assert pp + pz + pm == pytest.approx(1.0, abs=1e-14)
        # conditional mean identity, exact in rational arithmetic
        mean_rational = (p - q) * Fraction(ssum, size)
        assert pp - pm == pytest.approx(float(mean_rational), abs=1e-14)


def test_step_distribution_zero_memory_rejected():
    with pytest.raises(ValueError):
        MemoryView(0, 0, 0)


# ---------------------------------------------------------------------------
# first step
# ---------------------------------------------------------------------------


def test_first_step_degenerate():
    params = WalkParams(p=0.3, s=1.0)
    rng = make_run_stream(0, 0)
    assert all(draw_first_step(params, rng) == 1 for _ in range(200))


def test_first_step_frequency():
    params = WalkParams(p=0.7)
    rng = make_run_stream(2024, 0)
    n = 10**6
    hits = sum(draw_first_step(params, rng) == 1 for _ in range(n))
    assert hits / n == pytest.approx(0.7, abs=0.0014)  # 3 sigma


def test_first_step_delayed_weights():
    params = WalkParams(p=0.5, q=0.2, r=0.3)
    rng = make_run_stream(7, 1)
    draws = np.array([draw_first_step(params, rng) for _ in range(60_000)])
    assert np.mean(draws == 1) == pytest.approx(0.5, abs=0.01)
    assert np.mean(draws == 0) == pytest.approx(0.3, abs=0.01)
    assert np.mean(draws == -1) == pytest.approx(0.2, abs=0.01)


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------


def test_trajectory_invariants_two_valued():
    params = WalkParams(p=0.6)
    sched = MemorySchedule.first_increasing()
    grid = [1, 2, 3, 10, 50, 321, 1000]
    for i in range(20):
        t = simulate_path(params, sched, 1000, grid, make_run_stream(5, i))
        prev_n = 0
        prev_nstar = 0
        for n, s, nstar in t.checkpoints:
            assert abs(s) <= nstar <= n
            assert nstar == n  # r = 0: every step nonzero
            assert (s - n) % 2 == 0  # parity
            assert nstar >= prev_nstar and n > prev_n
            prev_n, prev_nstar = n, nstar


def test_trajectory_absorption_delayed():
    params = WalkParams(p=0.5, q=0.2, r=0.3)
    sched = MemorySchedule.first_increasing()
    saw_degenerate = False
    for i in range(300):
        t = simulate_path(params, sched, 60, [5, 20, 60], make_run_stream(11, i))
        vals = dict((n, (s, nstar)) for n, s, nstar in t.checkpoints)
        for early, late in ((5, 20), (20, 60)):
            if vals[early][1] == 0:
                saw_degenerate = True
                assert vals[late] == (0, 0)
    assert saw_degenerate  # P(X_1 = 0) = 0.3, so 300 runs certainly hit one


def test_simulate_path_checkpoint_validation():
    params = WalkParams(p=0.6)
    with pytest.raises(ValueError):
        simulate_path(params, MemorySchedule.full(), 10, [0, 5], make_run_stream(0, 0))
    with pytest.raises(ValueError):
        simulate_path(params, MemorySchedule.full(), 10, [], make_run_stream(0, 0))
    with pytest.raises(ValueError):
        simulate_path(params, MemorySchedule.full(), 10, [11], make_run_stream(0, 0))


def test_run_streams_are_independent_and_reproducible():
    a1 = make_run_stream(42, 0).random(5)
    a2 = make_run_stream(42, 0).random(5)
    b = make_run_stream(42, 1).random(5)
    c = make_run_stream(43, 0).random(5)
    assert np.array_equal(a1, a2)
    assert not np.array_equal(a1, b)
    assert not np.array_equal(a1, c)
