"""The three regimes of the block-memory walk.

With a first block of m_n remembered steps (m_n -> infinity, m_n/n -> 0) the
scaled position has a phase transition in the drift a = 2p - 1:

    p < 3/4   S_n sqrt(m)/n        -> normal, variance (2p-1)^2 / (3-4p)
    p = 3/4   S_n sqrt(m/log m)/n  -> normal, variance 1/4
    p > 3/4   S_n m^(2(1-p))/n     -> (2p-1) L, law of L unknown

The closed-form moments let us watch the convergence without simulating:
each horizon n is its own walk with the block frozen at m_n.
"""

from erwlab import (
    MemorySchedule,
    WalkParams,
    classify_regime,
    limit_moments,
    moment_convergence_table,
)

sched = MemorySchedule.first_increasing()  # m_n = floor(sqrt(n))

for p in (0.6, 0.75, 0.85):
    params = WalkParams(p=p)
    rep = limit_moments(params)
    print(f"p = {p}: {rep.regime} regime, statistic S_n * {rep.normalization}")
    if rep.regime == "superdiffusive":
        print(f"  limit mean {rep.limit_mean:.6f}, limit variance {rep.limit_var:.6f}"
              f"  (moments of (2p-1) L)")
    else:
        print(f"  limit variance {rep.limit_var:.6f}")
    rows = moment_convergence_table(params, sched, [10**3, 10**4, 10**5, 10**6, 10**7])
    for row in rows:
        tag = (f"mean {row['scaled_mean']:+.5f}" if rep.regime == "superdiffusive"
               else f"var {row['scaled_var']:.5f}")
        print(f"    n = {row['n']:>9,}  m = {row['m']:>5}  {tag}"
              f"   gap to limit {100 * row['rel_var_gap']:.2f}%"
              if rep.regime != "superdiffusive" else
              f"    n = {row['n']:>9,}  m = {row['m']:>5}  {tag}")
    print()

# the boundary is a genuine line in the (p, q) simplex once delays enter:
print("delayed walks classify by p - q against 1/2:")
for (p, q, r) in ((0.5, 0.2, 0.3), (0.625, 0.125, 0.25), (0.8, 0.1, 0.1)):
    rep = classify_regime(WalkParams(p=p, q=q, r=r))
    print(f"  p={p}, q={q}, r={r}: drift {rep.drift:+.3f} -> {rep.regime}"
          f"  [{rep.normalization}]")
