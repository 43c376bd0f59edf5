"""Star-convexity of a nonconvex quartic, and what the certificate sees."""

import numpy as np

from starmaj import (FunctionModel, midpoint_convexity_check, mocanu_bracketing,
                     mocanu_m_estimate, perspective, star_convexity_certificate)

f = FunctionModel("x0^4 - 5*x0^3 + 9*x0^2 - 5*x0", 1, [(0, 10)], m=16 / 17)

# The certificate samples a 21-point grid of (x, y) pairs at 39 values of lambda,
# plus 2000 random triples, and reports the smallest slack.
rep = star_convexity_certificate(f)
print("m = 16/17:", rep.passed, "worst slack", rep.worst_slack)

# At m = 1 the inequality is plain convexity, which fails.
rep1 = star_convexity_certificate(f.with_m(1.0))
print("m = 1:    ", rep1.passed, "witness", rep1.witness)

# A quick midpoint scan finds the same kind of failure.
print("midpoint convexity:", midpoint_convexity_check(f).passed)

# The difference-quotient estimator recovers the largest admissible m.
est = mocanu_m_estimate(f, grid=2000)
br = mocanu_bracketing(f, est)
print(f"estimated m = {est.value:.6f} (16/17 = {16 / 17:.6f}), bracketing holds: {br['holds']}")
print("slack just above the estimate, at small lambda:", br["upper_witness_slack"])

# Perspective t * f(x / t): positively homogeneous, but the certificate at
# m = 16/17 finds a violation on [0,5] x [0.5,5].
p = perspective(FunctionModel(f.body, 1, [(0, 5)], 16 / 17), (0.5, 5))
rp = star_convexity_certificate(p)
print("perspective:", rp.passed, "worst slack", round(rp.worst_slack, 6), "at", rp.witness)
s = 1.7
pt = np.array([2.0, 1.5])
print("homogeneity:", p(s * pt), s * p(pt))
