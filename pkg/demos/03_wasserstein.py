#!/usr/bin/env python3
"""Exact optimal transport between atomic measures on the sphere.

Three routes to the same W_p numbers: exhaustive search over matchings
(ground truth for small N), min-cost assignment (uniform equal-size
measures), and the transport linear program (general weights).  Includes
the two closed forms that anchor the metric: W_p between Diracs is the
chordal distance, and the one-vs-two-atom program has an explicit optimum.
"""

import numpy as np

from lohesphere import (
    EmpiricalMeasure,
    wasserstein_bruteforce,
    wasserstein_general,
    wasserstein_uniform,
)
from lohesphere.sampling import random_sphere_states

rng = np.random.default_rng(3)

print("solver agreement on random uniform instances (N <= 7):")
for n in (2, 4, 7):
    mu = EmpiricalMeasure.uniform(random_sphere_states(rng, n, 3))
    nu = EmpiricalMeasure.uniform(random_sphere_states(rng, n, 3))
    brute = wasserstein_bruteforce(mu, nu, 2.0)
    assign = wasserstein_uniform(mu, nu, 2.0)
    lp, plan = wasserstein_general(mu, nu, 2.0)
    print(f"  N = {n}: exhaustive {brute:.12f}  assignment {assign:.12f}  LP {lp:.12f}")

print("\nclosed form 1: W_p(delta_x, delta_y) = ||x - y||")
x = random_sphere_states(rng, 1, 4)[0]
y = random_sphere_states(rng, 1, 4)[0]
for p in (1.0, 2.0, 4.0):
    w = wasserstein_uniform(EmpiricalMeasure.uniform(x[None]), EmpiricalMeasure.uniform(y[None]), p)
    print(f"  p = {p:g}: {w:.12f}  vs chordal {np.linalg.norm(x - y):.12f}")

print("\nclosed form 2: W2^2(delta_x, m delta_y + (1-m) delta_-y)"
      " = m ||x-y||^2 + (1-m) ||x+y||^2")
m = 0.3
mu = EmpiricalMeasure(atoms=x[None], weights=np.array([1.0]))
nu = EmpiricalMeasure(atoms=np.stack([y, -y]), weights=np.array([m, 1 - m]))
dist, plan = wasserstein_general(mu, nu, 2.0)
closed = m * np.linalg.norm(x - y) ** 2 + (1 - m) * np.linalg.norm(x + y) ** 2
print(f"  LP: {dist**2:.12f}   closed form: {closed:.12f}")
print(f"  optimal plan row: {plan.coupling[0]}  (splits mass {m:g} / {1 - m:g})")

print("\nthe antipodal half-mass case (x = y, m = 1/2) gives W2^2 = 2 on the unit sphere:")
nu = EmpiricalMeasure(atoms=np.stack([x, -x]), weights=np.array([0.5, 0.5]))
dist, _ = wasserstein_general(mu, nu, 2.0)
print(f"  W2^2 = {dist**2:.12f}")
