"""Classify candidate points and check the constraint qualification."""

import numpy as np

from mpecfunnel import MpecMultipliers, classify, estimate_multipliers, evaluate, mfcq_diagnostic, registry_get

# origin of quad_branch: grad f = (-2, -2) forces nu_hat = xi_hat = -2
ev = evaluate(registry_get("quad_branch"), [0.0, 0.0])
mult = estimate_multipliers(ev)
print(classify(ev, mult))  # C-stationary, a descent direction exists along either branch

# origin of lin_biactive: both multipliers +1, S-stationary
ev = evaluate(registry_get("lin_biactive"), [0.0, 0.0])
print(classify(ev, estimate_multipliers(ev)))
print(mfcq_diagnostic(ev))

# hand-made multipliers walk down the hierarchy
for nu, xi in [(1.0, 1.0), (0.0, -1.0), (-1.0, -1.0), (1.0, -1.0)]:
    from mpecfunnel import MpecProblem
    lin = registry_get("lin_biactive")
    prob = MpecProblem(n=2, m=0, p=0, q=1, f_eval=lambda x, a=nu, b=xi: a * x[0] + b * x[1],
                       grad_f=lambda x, a=nu, b=xi: np.array([a, b]),
                       G_eval=lin.G_eval, jac_G=lin.jac_G, H_eval=lin.H_eval, jac_H=lin.jac_H)
    m = MpecMultipliers(lam=np.zeros(0), mu=np.zeros(0), nu_hat=np.array([nu]), xi_hat=np.array([xi]))
    print((nu, xi), classify(evaluate(prob, [0.0, 0.0]), m).level.name)
