import numpy as np
import pytest
from scipy.optimize import linprog

from shallowrelu.lp import chebyshev_center, maximize, maximize_free


@pytest.mark.parametrize("seed", range(40))
def test_maximize_matches_scipy(seed):
    rng = np.random.default_rng(seed)
    m, k = rng.integers(2, 7), rng.integers(1, 5)
    A = rng.normal(size=(m, k))
    b = rng.uniform(-0.5, 2.0, m)
    c = rng.normal(size=k)
    ref = linprog(-c, A_ub=A, b_ub=b, bounds=[(0, 10)] * k, method="highs")
    A2 = np.vstack([A, np.eye(k)])
    b2 = np.concatenate([b, np.full(k, 10.0)])
    res = maximize(c, A2, b2)
    if ref.status == 2:
        assert res.status == "infeasible"
    else:
        assert res.status == "optimal"
        assert res.value == pytest.approx(-ref.fun, abs=1e-8)
        assert np.all(A2 @ res.x <= b2 + 1e-9)


def test_free_variables_reach_negative_optimum():
    # max -x s.t. x >= -3  ->  x = -3
    res = maximize_free(np.array([-1.0]), np.array([[-1.0]]), np.array([3.0]))
    assert res.status == "optimal"
    assert res.x[0] == pytest.approx(-3.0)


def test_chebyshev_center_of_unit_square():
    A = np.vstack([-np.eye(2), np.eye(2)])
    c = np.array([0, 0, 1, 1.0])
    x, r = chebyshev_center(A, c)
    assert r == pytest.approx(0.5)
    assert np.allclose(x, 0.5)


def test_chebyshev_center_of_empty_set():
    A = np.array([[1.0], [-1.0]])
    c = np.array([0.2, -0.5])
    x, r = chebyshev_center(A, c)
    assert x is None and r == -np.inf
