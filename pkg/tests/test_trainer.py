import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _support import canonical_spline
from shallowrelu.trainer import (BUILTINS, ConstantTargets, Dataset, DivergedAtStep, TrainConfig, builtin_function,
                                 fit_report, init_params, lattice, loss_and_grad, make_dataset, relative_error, train)


# error metric

def test_perfect_fit_zero_error():
    z = np.array([0.0, 0.3, 1.0])
    assert relative_error(z, z) == 0.0


def test_constant_offset_over_unit_range():
    z = np.linspace(0, 1, 11)
    assert relative_error(z, z + 0.1) == pytest.approx(0.1)


def test_constant_targets_rejected():
    with pytest.raises(ConstantTargets):
        relative_error(np.ones(4), np.zeros(4))


def test_length_mismatch_rejected():
    with pytest.raises(ValueError):
        relative_error(np.arange(3.0), np.arange(4.0))


# datasets

def test_poly16_lattice():
    ds = make_dataset("poly16", 2, 0.1)
    assert ds.inputs.shape == (121, 2)
    assert ds.targets[np.all(ds.inputs == 1.0, axis=1)][0] == 35.0


def test_quad_minimum():
    f = builtin_function("quad", 2)
    assert f(np.array([[0.6, 0.3]]))[0] == 0.0


def test_sinsum_at_origin():
    f = builtin_function("sinsum", 2)
    assert f(np.array([[0.0, 0.0]]))[0] == pytest.approx(np.sin(3.0) + 3.0, abs=1e-15)


def test_unknown_builtin():
    with pytest.raises(ValueError):
        make_dataset("cubic", 2, 0.1)


def test_step_must_divide_one():
    with pytest.raises(ValueError):
        lattice(2, 0.3)


@pytest.mark.parametrize("name", BUILTINS)
def test_builtins_are_vectorized_in_3d(name):
    X = lattice(3, 0.5)
    assert builtin_function(name, 3)(X).shape == (27,)


def test_dataset_validation():
    with pytest.raises(ValueError):
        Dataset(np.zeros((3, 1)), np.zeros(2))
    with pytest.raises(ValueError):
        Dataset(np.zeros((1, 1)), np.array([np.nan]))


# gradients

def _away_from_kinks(W, b, X, gap=1e-4):
    Z = X @ W.T + b
    return np.all(np.abs(Z) > gap * np.linalg.norm(np.c_[W, b], axis=1))


@pytest.mark.parametrize("seed", range(10))
def test_gradient_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    n, units = int(rng.integers(1, 3)), int(rng.integers(2, 21))
    X = rng.uniform(size=(30, n))
    y = rng.normal(size=30)
    while True:
        W = rng.uniform(-1, 1, (units, n))
        b = rng.uniform(-1, 1, units)
        if _away_from_kinks(W, b, X):
            break
    lam = rng.uniform(-1, 1, units)
    c = float(rng.normal())
    _, dW, db, dlam, dc = loss_and_grad(W, b, lam, c, X, y)
    analytic = np.concatenate([dW.ravel(), db, dlam, [dc]])
    theta = np.concatenate([W.ravel(), b, lam, [c]])

    def loss(t):
        k = units * n
        return loss_and_grad(t[:k].reshape(units, n), t[k:k + units], t[k + units:k + 2 * units], t[-1], X, y)[0]

    h = 1e-6
    numeric = np.array([(loss(theta + h * e) - loss(theta - h * e)) / (2 * h) for e in np.eye(theta.size)])
    assert np.linalg.norm(analytic - numeric) <= 1e-4 * max(1.0, np.linalg.norm(numeric))


def test_relu_derivative_at_zero_is_zero():
    W = np.array([[1.0]])
    b = np.array([-0.5])
    X = np.array([[0.5]])
    _, dW, db, _, _ = loss_and_grad(W, b, np.array([1.0]), 0.0, X, np.array([1.0]))
    assert dW[0, 0] == 0 and db[0] == 0


# training

def test_init_order_is_row_major():
    cfg = TrainConfig(units=3, seed=5)
    W, b, lam = init_params(2, cfg)
    flat = np.random.Generator(np.random.Philox(5)).uniform(-1, 1, 12).reshape(3, 4)
    assert np.array_equal(W, flat[:, :2]) and np.array_equal(b, flat[:, 2]) and np.array_equal(lam, flat[:, 3])


def test_training_is_deterministic():
    ds = make_dataset("quad", 2, 0.25)
    cfg = TrainConfig(units=5, lr=0.05, steps=200, seed=3)
    n1, r1 = train(ds, cfg)
    n2, r2 = train(ds, cfg)
    assert n1.to_dict() == n2.to_dict() and r1.epsilon == r2.epsilon


def test_small_lr_reduces_loss():
    rng = np.random.default_rng(0)
    X = rng.uniform(size=(40, 2))
    ds = Dataset(X, np.sin(3 * X.sum(axis=1)))
    _, rep = train(ds, TrainConfig(units=8, lr=1e-4, steps=500, seed=1))
    assert rep.loss_curve[-1][1] < rep.loss_curve[0][1]


def test_exact_step_count_and_report():
    ds = make_dataset("poly16", 1, 0.1)
    net, rep = train(ds, TrainConfig(units=4, lr=0.001, steps=37, seed=0, log_every=10))
    assert [k for k, _ in rep.loss_curve] == [0, 10, 20, 30, 37]
    assert rep.epsilon == fit_report(net, ds.inputs, ds.targets).epsilon
    assert rep.samples == 11 and rep.z_max == 19.0 and rep.z_min == 3.0


def test_huge_lr_diverges_cleanly():
    with pytest.raises(DivergedAtStep) as e:
        train(make_dataset("poly16", 2, 0.1), TrainConfig(units=20, lr=10.0, steps=4000, seed=0))
    assert e.value.step < 4000 and e.value.report is not None


def test_output_bias_option_learns_offset():
    ds = Dataset(np.linspace(0, 1, 11)[:, None], np.linspace(0, 1, 11) + 5.0)
    net, _ = train(ds, TrainConfig(units=3, lr=0.05, steps=300, seed=0, output_bias=True))
    assert net.output_bias != 0.0
    net0, _ = train(ds, TrainConfig(units=3, lr=0.05, steps=300, seed=0))
    assert net0.output_bias == 0.0


def test_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(init_low=1, init_high=0)
    with pytest.raises(ValueError):
        TrainConfig(lr=0)


def test_spline_dataset_protocol_runs():
    s = canonical_spline()
    X = lattice(1, 0.01)
    net, rep = train(Dataset(X, s(X[:, 0])), TrainConfig(units=9, lr=0.002, steps=200, seed=0))
    assert net.theta == 9 and rep.samples == 101 and np.isfinite(rep.epsilon)


@settings(max_examples=20)
@given(st.integers(0, 2 ** 32 - 1))
def test_relative_error_scale_invariant(seed):
    rng = np.random.default_rng(seed)
    z = rng.normal(size=20)
    p = z + rng.normal(size=20) * 0.1
    assert relative_error(3 * z + 1, 3 * p + 1) == pytest.approx(relative_error(z, p))
