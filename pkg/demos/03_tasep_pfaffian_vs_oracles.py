"""The totally asymmetric case: Pfaffian formulas against two oracles.

Particles on {1, 2, ...} jump right at rate 1 under exclusion; new particles
enter at site 1 at rate alpha.  The transition probability is a single
Pfaffian of contour-integral kernels.  Here it is checked against exact
uniformization of the generator and against a Gillespie simulation, and the
derived quantities (joint thresholds, particle-count probability, the
Schuetz determinant reduction) are exercised.
"""

import math

from hsep.kernels import ModelParams
from hsep.markov_oracle import oracle_distribution, simulate
from hsep.tasep_formulas import (
    boundary_current_probability,
    joint_distribution,
    tasep_transition_probability,
)

params = ModelParams(q=0.0, alpha=0.6, gamma=0.0, t=1.0)

# Transition probabilities from the empty state, all three ways.
dist = oracle_distribution((), 1.0, params, s_max=16)
emp = simulate((), 1.0, params, 200_000, seed=5)
print("P(empty -> x) at t = 1, alpha = 0.6:")
print(f"{'x':>10s} {'pfaffian':>12s} {'uniformization':>15s} {'monte carlo':>12s}")
for x in ((), (1,), (2, 1), (3, 1), (4, 2, 1)):
    f = tasep_transition_probability((), x, 1.0, params)
    print(
        f"{str(x):>10s} {f:12.8f} {dist.probability(x):15.8f} "
        f"{emp.probability(x):12.8f}"
    )

# General initial data needs the separation y_M > N - M + 1; outside it the
# Pfaffian structure genuinely breaks and the call is rejected.
y = (6, 4)
disty = oracle_distribution(y, 1.0, params, s_max=17)
f = tasep_transition_probability(y, (7, 5, 2), 1.0, params)
print(
    f"\nP({y} -> (7,5,2)): pfaffian {f:.10f}, oracle "
    f"{disty.probability((7, 5, 2)):.10f}"
)
try:
    tasep_transition_probability((2, 1), (4, 2, 1), 1.0, params)
except ValueError as exc:
    print("non-separated data rejected:", str(exc)[:60], "...")

# Joint distribution of positions and the particle-number probability.
jd = joint_distribution((), (4, 2), 1.0, params)
brute = sum(
    tasep_transition_probability((), (x1, x2), 1.0, params)
    for x1 in range(4, 18)
    for x2 in range(2, x1)
)
print(f"\nP(X(1) >= 4, X(2) >= 2, |X|=2): pfaffian {jd:.10f}, summed {brute:.10f}")

print("\nparticle-number distribution P(|X_t| = N):")
total = 0.0
for n in range(0, 7):
    c = boundary_current_probability(n, (), 1.0, params)
    total += c
    print(f"  N={n}: {c:.8f}")
print("  sum:", total)

# With M = N the Pfaffian collapses to the Schuetz determinant of the
# full-space process: alpha drops out entirely.
y3, x3 = (7, 5, 2), (9, 6, 3)
for alpha in (0.3, 0.9):
    p = ModelParams(q=0.0, alpha=alpha, gamma=0.0, t=1.0)
    v = tasep_transition_probability(y3, x3, 1.0, p) * math.exp(alpha)
    print(f"full-space reduction at alpha={alpha}: e^at * P = {v:.12f}")
