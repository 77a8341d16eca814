"""Solve the built-in fixtures and look at what comes back."""

import numpy as np

from mpecfunnel import registry_get, registry_names, solve

for name in registry_names():
    problem = registry_get(name)
    result = solve(problem)  # starts from problem.info["x0"]
    print(f"{name:14s} {result.status.value:18s} k={result.iterations:4d} "
          f"x={np.array2string(result.x_final, precision=6)} f={result.f_final:.8f}")

# the multipliers at a biactive solution carry the certificate
result = solve(registry_get("lin_biactive"), [1.0, 1.0])
print(result.stationarity)
print("nu_hat", result.multipliers.nu_hat, "xi_hat", result.multipliers.xi_hat)

# quad_branch has two minimizers; the start decides which branch is found
for x0 in ([2.0, 0.1], [0.1, 2.0]):
    r = solve(registry_get("quad_branch"), x0)
    print(x0, "->", np.round(r.x_final, 6))
