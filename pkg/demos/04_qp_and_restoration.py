"""The two inner solvers on their own: dense active-set QP and restoration."""

import numpy as np

from mpecfunnel import Infeasible, QpProblem, evaluate, infeasibility, registry_get, restore, solve_qp

# min 0.5|t|^2 + 2 t1  s.t.  t1 >= -1
sol = solve_qp(QpProblem(np.eye(2), [2.0, 0.0], Ain=[[1.0, 0.0]], bin=[-1.0]))
print("t", sol.t, "lambda", sol.lam_in, "active", sol.active, "kkt", sol.kkt_residual)

# an empty feasible set is detected by phase 1
try:
    solve_qp(QpProblem(np.eye(2), [0.0, 0.0], Ain=[[1.0, 0.0], [-1.0, 0.0]], bin=[1.0, 1.0]))
except Infeasible as exc:
    print("infeasible:", exc)

# restoration from the negative orthant of lin_biactive
p = registry_get("lin_biactive")
rep = restore(p, [-1.0, -1.0], target=0.5)
print("theta history", np.round(rep.theta_history, 4), "x_r", rep.x_r)
print("theta at x_r", infeasibility(evaluate(p, rep.x_r)).theta)
