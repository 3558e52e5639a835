"""A first look at memory-limited elephant walks.

The walker repeats a uniformly chosen remembered step with probability p and
flips it with probability q = 1 - p.  What it remembers is the schedule's
business: everything, a growing first block, a trailing window, or a block
plus the most recent step.  This script walks a few paths under each schedule
and prints where they end up.
"""

import numpy as np

from erwlab import (
    GrowthRule,
    MemorySchedule,
    MemoryView,
    WalkParams,
    make_run_stream,
    simulate_path,
    step_distribution,
)

params = WalkParams(p=0.7)
print(f"walk parameters: p={params.p}, q={params.q:.1f}, first step +1 w.p. {params.s}")
print()

# the one-step law is driven entirely by the remembered steps' statistics
view = MemoryView(size=4, sum=2, nonzero=4)  # remembers +1,+1,+1,-1
p_plus, p_zero, p_minus = step_distribution(params, view)
print(f"memory (+1,+1,+1,-1): next step +1 w.p. {p_plus:.3f}, -1 w.p. {p_minus:.3f}")
print(f"conditional mean = (p-q) * sum/size = {p_plus - p_minus:.3f}")
print()

schedules = {
    "full memory": MemorySchedule.full(),
    "first block ~ sqrt(n)": MemorySchedule.first_increasing(),
    "first block + last step": MemorySchedule.first_plus_recent(
        growth=GrowthRule(), recent=1),
    "last 10 steps": MemorySchedule.last_fixed(10),
}

n = 10_000
grid = [100, 1000, n]
print(f"five paths per schedule, positions at n = {grid}:")
for name, sched in schedules.items():
    finals = []
    for run in range(5):
        t = simulate_path(params, sched, n, grid, make_run_stream(2024, run))
        finals.append([s for _, s, _ in t.checkpoints])
    print(f"  {name:26s} {finals}")
print()

# persistence shows up in the spread: the full-memory walk at p = 0.7 drifts
# hard, the windowed walk stays diffusive
print("sample spread of S_n/n over 200 paths:")
for name, sched in schedules.items():
    ends = np.array([simulate_path(params, sched, 2000, [2000],
                                   make_run_stream(7, i)).final()[1]
                     for i in range(200)], dtype=float)
    print(f"  {name:26s} mean {ends.mean() / 2000:+.3f}   sd {ends.std() / 2000:.3f}")
