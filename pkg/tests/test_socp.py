import cvxpy as cp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from csmimo.solver.socp import OPTIMAL, NTScaling, jdiv, jnorm, jprod, max_step, solve_socp


def _interior_points(rng, k, q):
    v = rng.standard_normal((k, q))
    v[:, 0] = np.linalg.norm(v[:, 1:], axis=1) + rng.uniform(0.1, 2.0, k)
    return v


def _random_program(seed, n=5, k=6, q=3):
    """Strictly primal and dual feasible cone program, so an optimum exists."""
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((k * q, n))
    x0 = rng.standard_normal(n)
    h = G @ x0 + _interior_points(rng, k, q).ravel()
    c = -G.T @ _interior_points(rng, k, q).ravel()
    return c, G, h


def _cvxpy_value(c, G, h, q):
    x = cp.Variable(len(c))
    s = h - G @ x
    cons = [cp.SOC(s[i * q], s[i * q + 1:(i + 1) * q]) for i in range(len(h) // q)]
    prob = cp.Problem(cp.Minimize(c @ x), cons)
    prob.solve(solver=cp.CLARABEL)
    return prob.value


@pytest.mark.parametrize("seed", range(8))
def test_matches_cvxpy(seed):
    c, G, h = _random_program(seed)
    res = solve_socp(c, G, h, 3)
    assert res.status == OPTIMAL
    ref = _cvxpy_value(c, G, h, 3)
    assert res.primal_objective == pytest.approx(ref, rel=1e-6, abs=1e-7)
    # weak duality: the dual objective bounds the primal from below up to the gap
    assert res.dual_objective <= res.primal_objective + 1e-6 * max(1.0, abs(ref))
    s = (h - G @ res.x).reshape(-1, 3)
    assert np.all(s[:, 0] >= np.linalg.norm(s[:, 1:], axis=1) - 1e-6)


def test_rejects_bad_cone_dimension():
    with pytest.raises(ValueError):
        solve_socp(np.ones(2), np.ones((5, 2)), np.ones(5), 3)


vec = st.lists(st.floats(-3, 3), min_size=3, max_size=3)


@settings(max_examples=50)
@given(vec, vec)
def test_jordan_product_symmetric_and_jdiv_inverts(a, b):
    x = np.array([a]); y = np.array([b])
    np.testing.assert_allclose(jprod(x, y), jprod(y, x))
    lam = x.copy()
    lam[0, 0] = np.linalg.norm(lam[0, 1:]) + 0.5
    np.testing.assert_allclose(jprod(lam, jdiv(lam, y)), y, atol=1e-8)


@settings(max_examples=50)
@given(st.integers(0, 2 ** 31))
def test_nt_scaling_maps_both_points_to_lambda(seed):
    rng = np.random.default_rng(seed)
    s = _interior_points(rng, 4, 3)
    z = _interior_points(rng, 4, 3)
    w = NTScaling.from_pair(s, z)
    np.testing.assert_allclose(w.apply(z), w.apply_inverse(s), rtol=1e-8, atol=1e-10)
    # W^-2 from the closed form equals applying W^-1 twice
    m = w.inverse_squared()
    v = rng.standard_normal((4, 3))
    np.testing.assert_allclose(np.einsum("kij,kj->ki", m, v), w.apply_inverse(w.apply_inverse(v)),
                               rtol=1e-8, atol=1e-10)
    np.testing.assert_allclose(jnorm(w.w), 1.0, rtol=1e-10)
    # the scaling preserves the duality measure: s^T z = lambda^T lambda
    np.testing.assert_allclose(np.sum(s * z, axis=1), np.sum(w.apply(z) ** 2, axis=1), rtol=1e-8)
    np.testing.assert_allclose(jnorm(s) * jnorm(z), jnorm(w.apply(z)) ** 2, rtol=1e-8)


def test_max_step_hits_boundary():
    x = np.array([[2.0, 0.0, 0.0]])
    d = np.array([[0.0, 1.0, 0.0]])
    assert max_step(x, d) == pytest.approx(2.0)
    assert max_step(x, np.array([[1.0, 0.0, 0.0]])) == np.inf
