"""Follow the funnel: theta_max only shrinks, theta stays below it."""

import io

import numpy as np

from mpecfunnel import SolverConfig, registry_get, solve
from mpecfunnel.cli import emit_trace

result = solve(registry_get("mixed_eq"), [0.3, 0.436])
print(f"{'k':>3} {'kind':12s} {'theta':>10} {'theta_max':>10} {'f':>10} {'alpha':>8} {'gamma':>6}")
for rec in result.trace:
    print(f"{rec.k:3d} {rec.kind.value:12s} {rec.theta:10.3e} {rec.theta_max:10.3e} "
          f"{rec.f:10.6f} {rec.alpha:8.3g} {rec.gamma:6.3f}")

# restoration records have no alpha; gamma < 1 marks a scaled tangential step
kinds = [rec.kind.value for rec in result.trace]
print({k: kinds.count(k) for k in set(kinds)})

# the CSV written by the command line tool
buf = io.StringIO()
emit_trace(result.trace[:3], buf)
print(buf.getvalue())

# a slower funnel: shrink theta_max less per h-iteration
slow = solve(registry_get("quad_branch"), [2.0, 0.1], SolverConfig(kappa8=0.99))
fast = solve(registry_get("quad_branch"), [2.0, 0.1])
print("iterations with kappa8=0.99:", slow.iterations, " default:", fast.iterations)
maxes = np.array([rec.theta_max for rec in fast.trace])
print("theta_max nonincreasing:", bool(np.all(np.diff(maxes) <= 0)))
