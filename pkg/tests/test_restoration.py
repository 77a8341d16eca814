import numpy as np
import pytest

from mpecfunnel.errors import RestorationFailure
from mpecfunnel.measures import infeasibility
from mpecfunnel.model import MpecProblem, evaluate
from mpecfunnel.problems import registry_get
from mpecfunnel.restoration import build_elastic, restore


def test_compliant_input_unchanged():
    p = registry_get("lin_biactive")
    rep = restore(p, [0.5, 0.0], target=0.1)
    np.testing.assert_array_equal(rep.x_r, [0.5, 0.0])
    assert rep.inner_iterations == 0 and rep.converged


def test_lin_biactive_from_negative_orthant():
    p = registry_get("lin_biactive")
    assert infeasibility(evaluate(p, [-1.0, -1.0])).theta == pytest.approx(3.0)
    rep = restore(p, [-1.0, -1.0], target=0.5)
    assert rep.converged and rep.inner_iterations <= 200
    assert infeasibility(evaluate(p, rep.x_r)).theta <= 0.5
    assert all(b <= a for a, b in zip(rep.theta_history, rep.theta_history[1:]))
    assert all(b <= a for a, b in zip(rep.phi_history, rep.phi_history[1:]))


def test_empty_feasible_set_fails():
    # G = x1 >= 0, H = x2 >= 0 and x1 + x2 <= -1
    prob = MpecProblem(n=2, m=1, p=0, q=1, f_eval=lambda x: 0.0, grad_f=lambda x: np.zeros(2),
                       g_eval=lambda x: np.array([-1.0 - x[0] - x[1]]), jac_g=lambda x: -np.ones((2, 1)),
                       G_eval=lambda x: np.array([x[0]]), jac_G=lambda x: np.array([[1.0], [0.0]]),
                       H_eval=lambda x: np.array([x[1]]), jac_H=lambda x: np.array([[0.0], [1.0]]))
    with pytest.raises(RestorationFailure) as info:
        restore(prob, [0.3, 0.2], target=1e-3)
    rep = info.value.report
    assert rep is not None and not rep.converged and rep.theta_after > 1e-3
    assert rep.theta_after <= rep.theta_before


def test_build_elastic_examples():
    p = registry_get("lin_biactive")
    el = build_elastic(evaluate(p, [0.4, 0.0]))
    assert el.objective() == 0.0 and el.zeta == 0.0
    el = build_elastic(evaluate(p, [-1.0, 2.0]))
    assert el.r.size == 0
    np.testing.assert_array_equal(el.y, [1.0])
    np.testing.assert_array_equal(el.z, [0.0])
    assert el.zeta == 0.0
    el = build_elastic(evaluate(p, [1.0, 1.0]))
    assert el.objective() == 1.0 and el.zeta == 1.0 and not np.any(el.y) and not np.any(el.z)


@pytest.mark.parametrize("name", ["mixed_eq", "cstat_fixture"])
def test_elastic_start_is_feasible(name):
    p = registry_get(name)
    rng = np.random.default_rng(13)
    for _ in range(20):
        ev = evaluate(p, rng.uniform(-2, 2, p.n))
        el = build_elastic(ev)
        assert el.constraint_violation(ev) == 0.0
        expected = (np.sum(np.maximum(-ev.g, 0)) + np.sum(np.abs(ev.h)) + np.sum(np.maximum(-ev.G, 0))
                    + np.sum(np.maximum(-ev.H, 0)) + max(ev.Q, 0.0))
        assert el.objective() == pytest.approx(expected, rel=1e-14, abs=1e-14)


def test_restoration_never_worsens_theta():
    rng = np.random.default_rng(21)
    for name in ("mixed_eq", "cstat_fixture"):
        p = registry_get(name)
        for _ in range(5):
            x = rng.uniform(-2, 2, p.n)
            theta0 = infeasibility(evaluate(p, x)).theta
            try:
                rep = restore(p, x, target=0.5 * theta0 + 1e-12)
            except RestorationFailure as exc:
                rep = exc.report
            assert infeasibility(evaluate(p, rep.x_r)).theta <= theta0
