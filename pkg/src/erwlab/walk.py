"""Core step dynamics for elephant random walks with restricted memory.

The walk takes steps in {-1, 0, +1}.  At time n it recalls a subset M_n of
its past step indices, picks one uniformly at random, and repeats that step
with probability p, flips it with probability q, or stays put with
probability r (p + q + r = 1).  A remembered zero step yields a zero step
regardless of the coin.  With r = 0 and q = 1 - p this is the classic
two-valued walk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "WalkParams",
    "GrowthRule",
    "MemorySchedule",
    "MemoryView",
    "StepHistory",
    "Trajectory",
    "step_distribution",
    "draw_first_step",
    "simulate_path",
    "make_run_stream",
]

_PROB_TOL = 1e-12


@dataclass(frozen=True)
class WalkParams:
    """Probability triple (p, q, r) plus the first-step law.

    p: probability of repeating the remembered step.
    q: probability of flipping it (derived as 1 - p - r when omitted).
    r: probability of staying put; r = 0 gives the two-valued walk.
    s: probability that the first step is +1 when r = 0 (defaults to p).
       When r > 0 the first step is (+1, 0, -1) with probabilities (p, r, q).
    """

    p: float
    q: float = -1.0
    r: float = 0.0
    s: float = -1.0

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"need 0 < p < 1, got p={self.p}")
        if not 0.0 <= self.r < 1.0:
            raise ValueError(f"need 0 <= r < 1, got r={self.r}")
        if self.q < 0.0:
            object.__setattr__(self, "q", 1.0 - self.p - self.r)
        if self.q < -_PROB_TOL:
            raise ValueError(f"need q >= 0, got q={self.q}")
        if abs(self.p + self.q + self.r - 1.0) > _PROB_TOL:
            raise ValueError(
                f"need p + q + r = 1, got {self.p} + {self.q} + {self.r}"
                f" = {self.p + self.q + self.r}"
            )
        # renormalise q so the triple sums to 1 exactly
        object.__setattr__(self, "q", 1.0 - self.p - self.r)
        if self.s < 0.0:
            object.__setattr__(self, "s", self.p)
        if not 0.0 <= self.s <= 1.0:
            raise ValueError(f"need 0 <= s <= 1, got s={self.s}")

    @property
    def delayed(self) -> bool:
        return self.r > 0.0

    @property
    def drift(self) -> float:
        """Mean of a step given a remembered +1: p - q (= 2p - 1 when r = 0)."""
        return self.p - self.q

    def first_step_thresholds(self) -> tuple[float, float]:
        """(t1, t2) so that u < t1 -> +1, u < t2 -> 0, else -1 for uniform u."""
        if self.r == 0.0:
            return self.s, self.s
        return self.p, self.p + self.r


@dataclass(frozen=True)
class GrowthRule:
    """Memory-size rule m(n) = c * n**beta (0 < beta <= 1) or c * log(n)."""

    kind: str = "power"  # "power" or "log"
    c: float = 1.0
    beta: float = 0.5

    def __post_init__(self):
        if self.kind not in ("power", "log"):
            raise ValueError(f"unknown growth kind {self.kind!r}")
        if self.c <= 0.0:
            raise ValueError(f"need c > 0, got c={self.c}")
        if self.kind == "power" and not 0.0 < self.beta <= 1.0:
            raise ValueError(f"need 0 < beta <= 1, got beta={self.beta}")

    def raw(self, n: int) -> float:
        if self.kind == "power":
            return self.c * n**self.beta

        return self.c * math.log(n) if n > 1 else 0.0


@dataclass(frozen=True)
class MemorySchedule:
    """Which past indices the walker recalls at time n.

    variant:
        "full"                    M_n = {1..n}
        "first-fixed"             M_n = {1..min(n, m)}
        "first-increasing"        M_n = {1..m_n}, m_n from the growth rule
        "first-plus-recent"       first block plus the k most recent steps
        "last-fixed"              M_n = trailing window of min(n, m) steps
        "last-increasing"         trailing window of m_n steps

    For the first-* variants the effective block size is
    m_n = min(n, max(1, floor(rule(n)))), nondecreasing with 1 <= m_n <= n.
    "first-plus-recent" with fixed=True freezes the block at a given size,
    which is the per-horizon form used when verifying the limit theorems.
    """

    variant: str
    m: int = 0
    growth: Optional[GrowthRule] = None
    recent: int = 0

    _FIRST = ("first-fixed", "first-increasing", "first-plus-recent")
    _LAST = ("last-fixed", "last-increasing")

    def __post_init__(self):
        known = ("full",) + self._FIRST + self._LAST
        if self.variant not in known:
            raise ValueError(f"unknown schedule variant {self.variant!r}")
        if self.variant in ("first-fixed", "last-fixed") and self.m < 1:
            raise ValueError("fixed schedules need m >= 1")
        if self.variant in ("first-increasing", "last-increasing") and self.growth is None:
            raise ValueError("increasing schedules need a growth rule")
        if self.variant == "first-plus-recent":
            if self.recent < 1:
                raise ValueError("first-plus-recent needs recent >= 1")
            if self.growth is None and self.m < 1:
                raise ValueError("first-plus-recent needs a growth rule or fixed m")

    # ---- constructors ----

    @classmethod
    def full(cls) -> "MemorySchedule":
        return cls("full")

    @classmethod
    def first_fixed(cls, m: int) -> "MemorySchedule":
        return cls("first-fixed", m=m)

    @classmethod
    def first_increasing(cls, growth: GrowthRule = GrowthRule()) -> "MemorySchedule":
        return cls("first-increasing", growth=growth)

    @classmethod
    def first_plus_recent(
        cls, growth: Optional[GrowthRule] = None, recent: int = 1, m: int = 0
    ) -> "MemorySchedule":
        return cls("first-plus-recent", m=m, growth=growth, recent=recent)

    @classmethod
    def last_fixed(cls, m: int) -> "MemorySchedule":
        return cls("last-fixed", m=m)

    @classmethod
    def last_increasing(cls, growth: GrowthRule = GrowthRule()) -> "MemorySchedule":
        return cls("last-increasing", growth=growth)

    # ---- geometry ----

    @property
    def is_first_block(self) -> bool:
        return self.variant in self._FIRST

    @property
    def is_last_window(self) -> bool:
        return self.variant in self._LAST

    def block_size(self, n: int) -> int:
        """Effective m_n: block size (first-*) or window length (last-*); n for full."""
        if n < 1:
            raise ValueError("time index must be >= 1")
        if self.variant == "full":
            return n
        if self.growth is not None:
            return min(n, max(1, math.floor(self.growth.raw(n))))
        return min(n, self.m)

    def frozen_at_horizon(self, n: int) -> "MemorySchedule":
        """Per-horizon schedule: the block frozen at its size at time n.

        The limit statements concern a family of walks indexed by the horizon;
        the walk observed at horizon n recalls {1..m_n} throughout (so it has
        full memory while k <= m_n).  This helper builds that walk's schedule.
        """
        if self.variant == "full":
            return self
        if self.is_last_window:
            return MemorySchedule("last-fixed", m=self.block_size(n))
        if self.variant == "first-plus-recent":
            return MemorySchedule.first_plus_recent(m=self.block_size(n), recent=self.recent)
        return MemorySchedule.first_fixed(self.block_size(n))

    def memory_indices(self, n: int) -> list[int]:
        """Explicit M_n as 1-based indices (small n only; used by enumeration/tests)."""
        m = self.block_size(n)
        if self.variant == "full":
            return list(range(1, n + 1))
        if self.is_last_window:
            return list(range(n - m + 1, n + 1))
        idx = set(range(1, m + 1))
        if self.variant == "first-plus-recent":
            idx |= set(range(max(1, n - self.recent + 1), n + 1))
        return sorted(idx)


@dataclass(frozen=True)
class MemoryView:
    """Sufficient statistics of the remembered steps."""

    size: int
    sum: int
    nonzero: int

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("memory must contain at least one step")
        if not (abs(self.sum) <= self.nonzero <= self.size):
            raise ValueError(f"inconsistent view {self}")
        if (self.sum - self.nonzero) % 2 != 0:
            raise ValueError(f"sum and nonzero count have different parity: {self}")


class StepHistory:
    """Step sequence accessor with prefix sums, O(1) window/block statistics."""

    def __init__(self):
        self._csum = [0]      # csum[i] = X_1 + .. + X_i
        self._cnz = [0]       # cnz[i]  = #{j <= i : X_j != 0}

    def append(self, x: int) -> None:
        if x not in (-1, 0, 1):
            raise ValueError(f"step must be in {{-1, 0, 1}}, got {x}")
        self._csum.append(self._csum[-1] + x)
        self._cnz.append(self._cnz[-1] + (x != 0))

    def __len__(self) -> int:
        return len(self._csum) - 1

    def range_stats(self, lo: int, hi: int) -> tuple[int, int]:
        """(sum, nonzero count) over indices lo..hi inclusive, 1-based."""
        return self._csum[hi] - self._csum[lo - 1], self._cnz[hi] - self._cnz[lo - 1]

    def step(self, i: int) -> int:
        return self._csum[i] - self._csum[i - 1]


def memory_view(history: StepHistory, schedule: MemorySchedule, n: int) -> MemoryView:
    """Statistics of the remembered steps M_n given the first n steps."""
    if n < 1:
        raise ValueError("memory_view needs n >= 1")
    if len(history) < n:
        raise ValueError(f"history holds {len(history)} steps, need {n}")
    m = schedule.block_size(n)
    if schedule.variant == "full":
        s, nz = history.range_stats(1, n)
        return MemoryView(n, s, nz)
    if schedule.is_last_window:
        s, nz = history.range_stats(n - m + 1, n)
        return MemoryView(m, s, nz)
    s, nz = history.range_stats(1, m)
    size = m
    if schedule.variant == "first-plus-recent":
        lo = max(m, n - schedule.recent) + 1
        if lo <= n:
            s2, nz2 = history.range_stats(lo, n)
            s, nz, size = s + s2, nz + nz2, size + (n - lo + 1)
    return MemoryView(size, s, nz)


def _cut_points(p, q, r, w, size, sm, nz):
    """Cumulative cut points (t1, t2): u < t1 -> +1, u < t2 -> 0, else -1.

    Shared by the scalar and vectorized engines (arguments may be scalars or
    arrays) so both see identical floating-point thresholds.
    """
    n_plus = (nz + sm) * 0.5
    n_minus = (nz - sm) * 0.5
    t1 = (p * n_plus + q * n_minus) / size
    t2 = t1 + (r + w * (size - nz) / size)
    return t1, t2


def step_distribution(params: WalkParams, view: MemoryView) -> tuple[float, float, float]:
    """One-step law (P_plus, P_zero, P_minus) given the memory statistics.

    With m remembered steps of which n_plus are +1, n_minus are -1 and z are 0:

        P_plus  = (p * n_plus + q * n_minus) / m
        P_minus = (q * n_plus + p * n_minus) / m
        P_zero  = r + (p + q) * z / m

    so the conditional mean is (p - q) * sum / m.  Remembered zeros produce
    zeros whatever the coin does, hence the (p + q) * z / m excess on P_zero.
    """
    m = view.size
    n_plus = (view.nonzero + view.sum) / 2.0
    n_minus = (view.nonzero - view.sum) / 2.0
    p_plus = (params.p * n_plus + params.q * n_minus) / m
    p_minus = (params.q * n_plus + params.p * n_minus) / m
    p_zero = params.r + (params.p + params.q) * (m - view.nonzero) / m
    return p_plus, p_zero, p_minus


def draw_first_step(params: WalkParams, rng: np.random.Generator) -> int:
    """First step: +1 w.p. s / -1 otherwise (r = 0), or (p, r, q) weights (r > 0)."""
    t1, t2 = params.first_step_thresholds()
    u = rng.random()
    if u < t1:
        return 1
    if u < t2:
        return 0
    return -1


def make_run_stream(master_seed: int, run_index: int) -> np.random.Generator:
    """Counter-based stream for one run, derived from (master_seed, run_index).

    Philox keys are 128-bit, so every (seed, run) pair gets an independent
    stream and results never depend on how runs are batched across workers.
    """
    key = np.array([np.uint64(master_seed & 0xFFFFFFFFFFFFFFFF),
                    np.uint64(run_index & 0xFFFFFFFFFFFFFFFF)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class Trajectory:
    """(n, S_n, N*_n) at the requested checkpoint times, plus run provenance."""

    checkpoints: tuple[tuple[int, int, int], ...]
    params: WalkParams
    schedule: MemorySchedule

    def final(self) -> tuple[int, int, int]:
        return self.checkpoints[-1]


def _step_from_uniform(u: float, t1: float, t2: float) -> int:
    if u < t1:
        return 1
    if u < t2:
        return 0
    return -1


def simulate_path(
    params: WalkParams,
    schedule: MemorySchedule,
    n_max: int,
    checkpoints: Sequence[int],
    rng: np.random.Generator,
) -> Trajectory:
    """Simulate one trajectory, recording (S_n, N*_n) on the checkpoint grid.

    One uniform is consumed per step, so a path is reproducible from its
    run stream alone.  Storage is bounded by the schedule: first-* variants
    keep prefix sums up to the largest block size, last-* variants keep a
    ring buffer of the window.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    grid = sorted(set(int(c) for c in checkpoints))
    if not grid or grid[0] < 1 or grid[-1] > n_max:
        raise ValueError("checkpoints must be a nonempty subset of [1, n_max]")

    p, q, r = params.p, params.q, params.r
    first_t1, first_t2 = params.first_step_thresholds()

    out: list[tuple[int, int, int]] = []
    grid_set = set(grid)
    S = 0
    nstar = 0

    w = p + q
    if schedule.is_last_window:
        w_max = schedule.block_size(n_max)
        ring = np.zeros(w_max, dtype=np.int8)
        wsum = 0
        wnz = 0
        w_prev = 0
        for k in range(1, n_max + 1):
            if k == 1:
                x = _step_from_uniform(rng.random(), first_t1, first_t2)
            else:
                t1, t2 = _cut_points(p, q, r, w, float(w_prev), wsum, wnz)
                x = _step_from_uniform(rng.random(), t1, t2)
            # insert step k; evict whatever leaves the window of size w_k
            w_k = schedule.block_size(k)
            if w_prev == w_k:  # window did not grow: step k - w_k leaves
                old = int(ring[(k - w_k - 1) % w_max])
                wsum -= old
                wnz -= old != 0
            ring[(k - 1) % w_max] = x
            wsum += x
            wnz += x != 0
            w_prev = w_k
            S += x
            nstar += x != 0
            if k in grid_set:
                out.append((k, S, nstar))
        return Trajectory(tuple(out), params, schedule)

    # full memory and first-block variants share the prefix-sum state
    is_full = schedule.variant == "full"
    keep = 0 if is_full else schedule.block_size(n_max)
    stored = np.zeros(keep, dtype=np.int8)  # X_1..X_keep for later block joins
    bsize = 0   # current block length covered by (bsum, bnz)
    bsum = 0
    bnz = 0
    recent_k = schedule.recent if schedule.variant == "first-plus-recent" else 0
    recent = [0] * recent_k
    for k in range(1, n_max + 1):
        if k == 1:
            x = _step_from_uniform(rng.random(), first_t1, first_t2)
        else:
            n_prev = k - 1
            if is_full:
                size, s, nz = n_prev, S, nstar
            else:
                m = schedule.block_size(n_prev)
                while bsize < m:
                    bsize += 1
                    v = int(stored[bsize - 1])
                    bsum += v
                    bnz += v != 0
                size, s, nz = m, bsum, bnz
                if recent_k:
                    lo = max(m, n_prev - recent_k) + 1
                    for i in range(lo, n_prev + 1):
                        v = recent[(i - 1) % recent_k]
                        s += v
                        nz += v != 0
                        size += 1
            t1, t2 = _cut_points(p, q, r, w, float(size), s, nz)
            x = _step_from_uniform(rng.random(), t1, t2)
        if k <= keep:
            stored[k - 1] = x
        if recent_k:
            recent[(k - 1) % recent_k] = x
        S += x
        nstar += x != 0
        if k in grid_set:
            out.append((k, S, nstar))
    return Trajectory(tuple(out), params, schedule)
