"""The majorization inequality m E_nu[Phi] >= E_mu[Phi] on instances."""

import numpy as np

from starmaj import (DiscreteMeasure, FunctionModel, catalog_function, generate_instance,
                     perturbed_hlp_check, verify_hlp)

# Hand instance: x = (2, 2), y = (3, 1), Phi = x^2.
mu = DiscreteMeasure([0.5, 0.5], [[2.0], [2.0]])
nu = DiscreteMeasure([0.5, 0.5], [[3.0], [1.0]])
rep = verify_hlp(mu, nu, FunctionModel("x0^2", 1, [(0, 4)]), "classic")
print("lhs", rep.lhs, "rhs", rep.rhs, "slack", rep.slack)

# A sweep over generated instances, with the summation-by-parts terms.
worst, boundary = np.inf, 0.0
for seed in range(200):
    m = (0.5, 0.9, 1.0)[seed % 3]
    d = 1 + seed % 4
    model = catalog_function("exp-sum", d, m)
    a, b = generate_instance("mL_down", 1 + seed % 6, d, m, seed)
    r = verify_hlp(a, b, model, advisories=False)
    worst = min(worst, r.slack / r.scale)
    boundary = max(boundary, abs(r.abel.boundary_term) / r.scale)
print("200 instances: min slack/scale", worst, "max |boundary|/scale", boundary)

# A bounded perturbation costs at most (1 + m) delta.
model = catalog_function("exp-sum", 2, 0.9)
a, b = generate_instance("mL_down", 3, 2, 0.9, seed=5)
base = verify_hlp(a, b, model, advisories=False)
pert = perturbed_hlp_check(a, b, model, "0.05*sign(x0)", 0.05)
print("base slack", base.slack, "perturbed raw slack", pert.advisories["perturbation"]["raw_slack"],
      "allowance", pert.advisories["perturbation"]["allowance"])
