"""m-majorization of discrete measures: checking and generating."""

import numpy as np

from starmaj import DiscreteMeasure, check_majorization, generate_instance, is_monotone_string

# Three equal weights; x is a constant string, y spreads around it.
x, z = np.array([0.5, -0.25]), np.array([0.3, 0.2])
mu = DiscreteMeasure([1 / 3] * 3, [x, x, x])
nu = DiscreteMeasure([1 / 3] * 3, [x, x + z, x - z])
v = check_majorization(mu, nu, m=1.0, kind="mL_down")
print("holds:", v.holds)
print("prefix slacks:\n", v.prefix_slacks)
print("y decreasing?", is_monotone_string(nu.points, "decreasing"))

# Swapping the roles breaks the string order of x.
print("swapped:", check_majorization(nu, mu, 1.0, "mL_down").failed_condition)

# Generated instances: prefix slacks are drawn first and y is solved for.
for kind in ("mL_down", "wmL_down", "mR_up", "wmR_up"):
    a, b = generate_instance(kind, 4, 2, 0.9, seed=0)
    verdict = check_majorization(a, b, 0.9, kind)
    print(f"{kind:9s} holds={verdict.holds} last slack={verdict.terminal_residual}")
