"""Weighted power means and the Mp-star variant."""

import math

import numpy as np

from starmaj import FunctionModel, mp_mean, mp_star_convexity_certificate

for p in (-math.inf, -1, 0, 1, 2, math.inf):
    print(f"M_{p}(4, 9; 1/2) = {mp_mean(4, 9, 0.5, p):.10f}")

# Near p = 0 the mean moves at rate M_0 * Var(log) / 2, so the gap to the
# geometric mean at p = 1e-4 depends on how far apart the arguments are.
for a, b in ((1.0, 1.1), (1.0, 2.0), (0.1, 10.0)):
    m0 = mp_mean(a, b, 0.5, 0)
    gap = mp_mean(a, b, 0.5, 1e-4) - m0
    rate = m0 * 0.25 * math.log(a / b) ** 2 / 2
    print(f"a={a}, b={b}: M_1e-4 - M_0 = {gap:.3e}, first-order prediction {1e-4 * rate:.3e}")

sq = FunctionModel("sqrt(x0^2 + 1)", 1, [(-2, 2)])
print("sqrt(x^2+1), p=2:", mp_star_convexity_certificate(sq, 2).passed)
print("sqrt(x^2+1), p=1:", mp_star_convexity_certificate(sq, 1).passed)
lc = FunctionModel("exp(x0^2)", 1, [(-1, 1)])
print("exp(x^2),    p=0:", mp_star_convexity_certificate(lc, 0).passed)
print("vectorized:", mp_mean(np.array([1.0, 4.0]), np.array([1.0, 9.0]), 0.5, 0))
