"""Full-batch gradient descent for two-layer ReLU networks.

Loss is 0.5 * mean((y_hat - y)^2), the ReLU derivative at 0 is taken as 0,
and all parameters are drawn from a Philox stream (numpy's counter-based
generator) in the order unit 0 (w..., b, lambda), unit 1, ...
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .network import ReluNetwork, ReluUnit


class ConstantTargets(ValueError):
    """Relative error is undefined when all targets are equal."""


# loss this many times the initial loss counts as divergence; at very large
# learning rates every unit can die right after the blow-up, so waiting
# for a non-finite value would miss it
BLOWUP_FACTOR = 1e4


class DivergedAtStep(ArithmeticError):
    def __init__(self, step, report=None, network=None):
        super().__init__(f"training diverged at step {step}")
        self.step = step
        self.report = report
        self.network = network


@dataclass
class TrainConfig:
    units: int = 20
    lr: float = 0.01
    steps: int = 4000
    seed: int = 0
    init_low: float = -1.0
    init_high: float = 1.0
    output_bias: bool = False
    log_every: int = 100

    def __post_init__(self):
        if self.units < 1 or self.steps < 0 or self.lr <= 0:
            raise ValueError("units and lr must be positive, steps non-negative")
        if not self.init_low < self.init_high:
            raise ValueError("init_low must be below init_high")


@dataclass
class Dataset:
    inputs: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        self.inputs = np.atleast_2d(np.asarray(self.inputs, float))
        self.targets = np.asarray(self.targets, float).ravel()
        if self.inputs.shape[0] != self.targets.size or self.targets.size == 0:
            raise ValueError("dataset needs matching, non-empty inputs and targets")
        if not (np.all(np.isfinite(self.inputs)) and np.all(np.isfinite(self.targets))):
            raise ValueError("dataset values must be finite")

    @property
    def n(self):
        return self.inputs.shape[1]


@dataclass
class FitReport:
    epsilon: float
    z_max: float
    z_min: float
    samples: int = 0
    loss_curve: list = field(default_factory=list)

    def to_dict(self):
        d = {"epsilon": self.epsilon, "z_max": self.z_max, "z_min": self.z_min, "samples": self.samples}
        if self.loss_curve:
            d["loss_curve"] = [[int(k), float(v)] for k, v in self.loss_curve]
        return d


def relative_error(targets, predictions):
    """Range-normalized RMSE."""
    z = np.asarray(targets, float).ravel()
    zh = np.asarray(predictions, float).ravel()
    if z.size == 0 or z.size != zh.size:
        raise ValueError("targets and predictions need equal, non-zero length")
    zmax, zmin = z.max(), z.min()
    if zmax == zmin:
        raise ConstantTargets("targets are constant; relative error is undefined")
    return float(np.sqrt(np.mean((z - zh) ** 2)) / (zmax - zmin))


def fit_report(net, X, z, loss_curve=None):
    z = np.asarray(z, float)
    return FitReport(relative_error(z, net.eval(X)), float(z.max()), float(z.min()), int(z.size),
                     list(loss_curve or []))


BUILTINS = ("poly16", "sinsum", "quad")


def builtin_function(name, n):
    """Vectorized builtin target on an (N, n) array."""
    if name == "poly16":
        return lambda X: 16.0 * np.sum(np.asarray(X, float) ** 3, axis=1) + 3.0
    if name == "sinsum":
        return lambda X: np.sin(3.0 * (np.sum(np.asarray(X, float), axis=1) + 1.0)) + 3.0
    if name == "quad":
        centre = np.resize([0.6, 0.3], n)
        return lambda X: np.sum((np.asarray(X, float) - centre) ** 2, axis=1)
    raise ValueError(f"unknown builtin {name!r}; choose from {', '.join(BUILTINS)}")


def lattice(n, step):
    k = round(1.0 / step)
    if k < 1 or abs(k * step - 1.0) > 1e-9:
        raise ValueError(f"step {step} does not divide 1 evenly")
    ticks = np.linspace(0.0, 1.0, k + 1)
    grids = np.meshgrid(*([ticks] * n), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def make_dataset(fn, n, step):
    f = builtin_function(fn, n)
    X = lattice(n, step)
    return Dataset(X, f(X))


def init_params(n, cfg: TrainConfig):
    rng = np.random.Generator(np.random.Philox(cfg.seed))
    P = rng.uniform(cfg.init_low, cfg.init_high, size=(cfg.units, n + 2))
    return P[:, :n].copy(), P[:, n].copy(), P[:, n + 1].copy()


def loss_and_grad(W, b, lam, c, X, y):
    """Loss 0.5*mean(r^2) and its gradient with respect to (W, b, lam, c)."""
    Z = X @ W.T + b
    H = np.maximum(Z, 0.0)
    r = H @ lam + c - y
    N = y.size
    loss = 0.5 * float(r @ r) / N
    g = r / N
    dlam = H.T @ g
    D = (Z > 0.0) * np.outer(g, lam)
    dW = D.T @ X
    db = D.sum(axis=0)
    dc = float(g.sum())
    return loss, dW, db, dlam, dc


def to_network(W, b, lam, c=0.0):
    n = W.shape[1]
    return ReluNetwork(n, [ReluUnit(W[i], b[i], lam[i]) for i in range(W.shape[0])], float(c))


def train(data: Dataset, cfg: TrainConfig):
    with np.errstate(over="ignore", invalid="ignore"):
        return _train(data, cfg)


def _train(data: Dataset, cfg: TrainConfig):
    X, y = data.inputs, data.targets
    W, b, lam = init_params(data.n, cfg)
    c = 0.0
    curve = []
    limit = None
    for step in range(cfg.steps):
        loss, dW, db, dlam, dc = loss_and_grad(W, b, lam, c, X, y)
        if limit is None:
            limit = BLOWUP_FACTOR * max(loss, 1e-12)
        if not math.isfinite(loss) or loss > limit:
            raise DivergedAtStep(step, FitReport(math.inf, float(y.max()), float(y.min()), y.size, curve))
        if step % cfg.log_every == 0:
            curve.append((step, loss))
        W -= cfg.lr * dW
        b -= cfg.lr * db
        lam -= cfg.lr * dlam
        if cfg.output_bias:
            c -= cfg.lr * dc
        if not (np.all(np.isfinite(W)) and np.all(np.isfinite(b)) and np.all(np.isfinite(lam))):
            raise DivergedAtStep(step + 1, FitReport(math.inf, float(y.max()), float(y.min()), y.size, curve))
    net = to_network(W, b, lam, c)
    final = loss_and_grad(W, b, lam, c, X, y)[0]
    if not math.isfinite(final):
        raise DivergedAtStep(cfg.steps, FitReport(math.inf, float(y.max()), float(y.min()), y.size, curve))
    curve.append((cfg.steps, final))
    return net, fit_report(net, X, y, curve)
