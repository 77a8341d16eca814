import math
import json
import warnings

import numpy as np
import pytest

from mpecfunnel.errors import DimensionMismatch, NonFiniteValue, ParseError, UnknownProblem
from mpecfunnel.model import MpecProblem, check_gradients, evaluate
from mpecfunnel.problems import dump_quadratic_mpec, load_quadratic_mpec, registry_get, registry_names

from oracles import QUAD_DOCS, QUAD_OFFSETS, quad_doc_text


def test_evaluate_lin_biactive_origin():
    ev = evaluate(registry_get("lin_biactive"), [0.0, 0.0])
    assert ev.Q == 0.0 and ev.f == 0.0
    np.testing.assert_array_equal(ev.grad_Q, [0.0, 0.0])


def test_evaluate_lin_biactive_ones():
    ev = evaluate(registry_get("lin_biactive"), [1.0, 1.0])
    assert ev.Q == 1.0 and ev.f == 2.0
    np.testing.assert_array_equal(ev.grad_Q, [1.0, 1.0])


def test_evaluate_quad_branch():
    ev = evaluate(registry_get("quad_branch"), [1.0, 0.0])
    assert ev.f == 1.0 and ev.Q == 0.0
    np.testing.assert_array_equal(ev.grad_Q, [0.0, 1.0])


def test_evaluate_rejects_wrong_length_and_nonfinite():
    p = registry_get("lin_biactive")
    with pytest.raises(DimensionMismatch):
        evaluate(p, [1.0, 2.0, 3.0])
    bad = MpecProblem(n=1, m=0, p=0, q=1, f_eval=lambda x: math.nan if x[0] < 0 else x[0], grad_f=lambda x: np.ones(1),
                      G_eval=lambda x: x, jac_G=lambda x: np.ones((1, 1)),
                      H_eval=lambda x: x, jac_H=lambda x: np.ones((1, 1)))
    with pytest.raises(NonFiniteValue):
        evaluate(bad, [-1.0])


def test_evaluation_is_read_only():
    ev = evaluate(registry_get("quad_branch"), [0.3, 0.4])
    with pytest.raises(ValueError):
        ev.x[0] = 1.0


def test_gradcheck_linear_exact():
    rep = check_gradients(registry_get("lin_biactive"), [0.7, -1.3], step=1e-6)
    assert rep.passed and rep.worst <= 1e-9


def test_gradcheck_quad_branch():
    assert check_gradients(registry_get("quad_branch"), [0.3, 0.7], step=1e-6, tol=1e-6).passed


def test_gradcheck_catches_planted_bug():
    p = registry_get("quad_branch")
    wrong = MpecProblem(n=2, m=0, p=0, q=1, f_eval=p.f_eval, grad_f=lambda x: 2.0 * (x - 1.0) + [0.1, 0.0],
                        G_eval=p.G_eval, jac_G=p.jac_G, H_eval=p.H_eval, jac_H=p.jac_H)
    rep = check_gradients(wrong, [0.3, 0.7])
    assert not rep.passed and rep.worst > 1e-2


@pytest.mark.parametrize("name", ["lin_biactive", "quad_branch", "mixed_eq", "cstat_fixture"])
def test_builtin_gradients_random_points(name):
    p = registry_get(name)
    rng = np.random.default_rng(7)
    for _ in range(20):
        x = rng.uniform(-2, 2, p.n)
        assert check_gradients(p, x, step=1e-6, tol=1e-6).passed
        # grad_Q against differences of Q
        Q = lambda z: evaluate(p, z).Q
        fd = np.array([(Q(x + 1e-6 * e) - Q(x - 1e-6 * e)) / 2e-6 for e in np.eye(p.n)])
        gq = evaluate(p, x).grad_Q
        assert np.max(np.abs(fd - gq) / np.maximum(1, np.abs(gq))) <= 1e-6


def test_registry():
    assert {"lin_biactive", "quad_branch", "mixed_eq", "cstat_fixture"} <= set(registry_names())
    lin = registry_get("lin_biactive")
    np.testing.assert_array_equal(lin.info["solutions"][0], [0.0, 0.0])
    qb = registry_get("quad_branch")
    assert qb.info["f_star"] == 1.0
    assert {tuple(s) for s in qb.info["solutions"]} == {(1.0, 0.0), (0.0, 1.0)}
    with pytest.raises(UnknownProblem):
        registry_get("nosuch")


def test_loader_lin_biactive_dims():
    p = load_quadratic_mpec(quad_doc_text("lin_biactive"))
    assert (p.n, p.q, p.m, p.p) == (2, 1, 0, 0)


def test_loader_requires_complementarity():
    doc = dict(QUAD_DOCS["lin_biactive"])
    doc["G"] = {"A": [], "b": []}
    doc["H"] = {"A": [], "b": []}
    with pytest.raises(ParseError):
        load_quadratic_mpec(json.dumps(doc))
    doc = dict(QUAD_DOCS["lin_biactive"])
    del doc["H"]
    with pytest.raises(ParseError):
        load_quadratic_mpec(json.dumps(doc))


def test_loader_symmetrizes():
    doc = dict(QUAD_DOCS["quad_branch"])
    doc["objective"] = {"P": [[2, 1], [0, 2]], "c": [0, 0]}
    with pytest.warns(UserWarning):
        p = load_quadratic_mpec(json.dumps(doc))
    assert p.info["symmetrized"]
    x = np.array([0.3, -0.8])
    assert evaluate(p, x).f == pytest.approx(0.5 * x @ np.array([[2, 0.5], [0.5, 2]]) @ x, abs=1e-15)


def test_loader_errors_have_locus():
    with pytest.raises(ParseError, match="line 1"):
        load_quadratic_mpec('{"n": 2,')
    doc = dict(QUAD_DOCS["lin_biactive"])
    doc["objective"] = {"P": [[1, 0]], "c": [1, 1]}
    with pytest.raises((ParseError, DimensionMismatch), match="P"):
        load_quadratic_mpec(json.dumps(doc))


@pytest.mark.parametrize("name", sorted(QUAD_DOCS))
def test_loader_matches_registry_twin(name):
    twin = load_quadratic_mpec(quad_doc_text(name))
    ref = registry_get(name)
    rng = np.random.default_rng(11)
    for _ in range(50):
        x = rng.uniform(-2, 2, 2)
        a, b = evaluate(twin, x), evaluate(ref, x)
        assert abs(a.f + QUAD_OFFSETS[name] - b.f) <= 1e-12 * max(1.0, abs(b.f))
        for attr in ("g", "h", "G", "H", "grad_f", "jac_g", "jac_h", "jac_G", "jac_H", "grad_Q"):
            np.testing.assert_allclose(getattr(a, attr), getattr(b, attr), rtol=0, atol=1e-12)
        assert abs(a.Q - b.Q) <= 1e-12


def test_dump_round_trip():
    text = dump_quadratic_mpec(P=np.eye(2), c=[1.0, -1.0], G=(np.array([[1.0, 0.0]]), [0.5]),
                               H=(np.array([[0.0, 1.0]]), [0.0]), h=(np.array([[1.0, 1.0]]), [-1.0]),
                               x0=[0.2, 0.3], name="rt")
    p = load_quadratic_mpec(text)
    ev = evaluate(p, [0.2, 0.3])
    assert p.name == "rt" and ev.G[0] == pytest.approx(0.7) and ev.h[0] == pytest.approx(-0.5)
    np.testing.assert_array_equal(p.info["x0"], [0.2, 0.3])
