"""Maximum-likelihood fitting of the transform pair at a fixed copula rho.

Training follows the usual recipe for this model family: shuffle and
split the data 8:1:1, minimize the mean negative log-likelihood with an
adaptive-moment optimizer (lr 3e-4, batch 128), early-stop on validation
NLL, and report per-sample NLL on the held-out test split evaluated only
after the best parameters are selected.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergedFitError, InvalidInputError
from . import copula
from .transforms import (
    FlowHyper,
    FlowParams,
    batch_nll,
    forward_a,
    forward_y,
    init_params,
    nll_and_gradient,
)

EVAL_CHUNK = 65536


@dataclass(frozen=True)
class TrainConfig:
    rho: float
    batch_size: int = 128
    learning_rate: float = 3e-4
    max_epochs: int = 200
    patience: int = 20
    split_ratio: tuple = (0.8, 0.1, 0.1)
    seed: int = 0
    n_bins: int = 8
    hidden: tuple = (20, 15, 10)

    def __post_init__(self):
        rho = getattr(self.rho, "rho", self.rho)
        object.__setattr__(self, "rho", float(rho))
        if abs(self.rho) >= 1.0:
            raise InvalidInputError("training requires |rho| < 1")
        if self.batch_size < 1 or self.max_epochs < 1 or self.patience < 1:
            raise InvalidInputError("batch_size, max_epochs, patience must be >= 1")
        if self.learning_rate <= 0:
            raise InvalidInputError("learning_rate must be positive")
        ratio = tuple(float(r) for r in self.split_ratio)
        if len(ratio) != 3 or any(r <= 0 for r in ratio):
            raise InvalidInputError("split_ratio needs three positive weights")
        total = sum(ratio)
        object.__setattr__(self, "split_ratio", tuple(r / total for r in ratio))

    def to_dict(self):
        return {
            "rho": self.rho,
            "batch_size": self.batch_size,
            "learning_rate": self.learning_rate,
            "max_epochs": self.max_epochs,
            "patience": self.patience,
            "split_ratio": list(self.split_ratio),
            "seed": self.seed,
            "n_bins": self.n_bins,
            "hidden": list(self.hidden),
        }


@dataclass
class FitReport:
    final_params: FlowParams
    train_nll: float
    val_nll: float
    test_nll: float
    epochs_run: int
    best_epoch: int
    history: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "train_nll": self.train_nll,
            "val_nll": self.val_nll,
            "test_nll": self.test_nll,
            "epochs_run": self.epochs_run,
            "best_epoch": self.best_epoch,
            "history": self.history,
        }


def joint_log_density(params: FlowParams, rho, a, y):
    """log f(a, y) under the model: copula log-pdf plus both Jacobians."""
    rho = getattr(rho, "rho", rho)
    ev_a = forward_a(params, a)
    ev_y = forward_y(params, y, a)
    base = copula.log_density(
        copula.CopulaParam(rho), copula.NoisePair(ev_a.value, ev_y.value)
    )
    return base + ev_a.log_deriv + ev_y.log_deriv


def evaluate_nll(params: FlowParams, rho, dataset) -> float:
    """Mean negative log-likelihood per sample over a dataset."""
    rho = getattr(rho, "rho", rho)
    a, y = _as_columns(dataset)
    if a.size == 0:
        raise InvalidInputError("dataset must be non-empty")
    total = 0.0
    for start in range(0, a.size, EVAL_CHUNK):
        sl = slice(start, start + EVAL_CHUNK)
        total += batch_nll(params, a[sl], y[sl], rho) * (len(a[sl]))
    return total / a.size


def _as_columns(dataset):
    if isinstance(dataset, tuple) and len(dataset) == 2:
        a = np.asarray(dataset[0], dtype=np.float64).reshape(-1)
        y = np.asarray(dataset[1], dtype=np.float64).reshape(-1)
        if a.shape != y.shape:
            raise InvalidInputError("a and y must have equal length")
        return a, y
    arr = np.asarray(dataset, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvalidInputError("dataset must be an (n, 2) array of (a, y) pairs")
    return arr[:, 0].copy(), arr[:, 1].copy()


class _Adam:
    """Adaptive-moment estimation on a flat parameter vector."""

    def __init__(self, size, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = np.zeros(size)
        self.v = np.zeros(size)
        self.t = 0

    def update(self, vec, grad):
        self.t += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * grad * grad
        m_hat = self.m / (1.0 - self.beta1 ** self.t)
        v_hat = self.v / (1.0 - self.beta2 ** self.t)
        return vec - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def split_indices(n, ratio, rng):
    """Deterministic shuffled train/val/test index partition."""
    perm = rng.permutation(n)
    n_train = int(math.floor(ratio[0] * n))
    n_val = int(math.floor(ratio[1] * n))
    n_train = max(n_train, 1)
    n_val = max(n_val, 1)
    if n_train + n_val >= n:
        raise InvalidInputError("split leaves no test data")
    return perm[:n_train], perm[n_train:n_train + n_val], perm[n_train + n_val:]


def fit(dataset, config: TrainConfig) -> FitReport:
    """Fit the transform pair by mini-batch maximum likelihood.

    Deterministic given the dataset and config: the same seed drives the
    split, the conditioner initialization, and every epoch's shuffle.
    Returns the parameters from the best validation epoch; the test split
    is only evaluated after that choice is frozen.
    """
    a, y = _as_columns(dataset)
    n = a.size
    if n < 100:
        raise InvalidInputError(f"need at least 100 samples, got {n}")

    rng = np.random.default_rng(config.seed)
    idx_train, idx_val, idx_test = split_indices(n, config.split_ratio, rng)
    if config.batch_size > idx_train.size:
        raise InvalidInputError("batch_size exceeds the training split")

    a_train, y_train = a[idx_train], y[idx_train]
    a_val, y_val = a[idx_val], y[idx_val]

    hyper = FlowHyper.from_data(
        a_train, y_train, n_bins=config.n_bins, hidden=tuple(config.hidden)
    )
    params = init_params(hyper, rng)
    vec = params.as_vector()
    opt = _Adam(vec.size, config.learning_rate)

    best_vec = vec.copy()
    best_val = math.inf
    best_epoch = 0
    bad_epochs = 0
    hist_train, hist_val = [], []
    epochs_run = 0

    n_train = idx_train.size
    for epoch in range(1, config.max_epochs + 1):
        epochs_run = epoch
        order = rng.permutation(n_train)
        epoch_loss = 0.0
        n_batches = 0
        for start in range(0, n_train - config.batch_size + 1, config.batch_size):
            take = order[start:start + config.batch_size]
            params = FlowParams.from_vector(vec, hyper)
            loss, grad = nll_and_gradient(
                params, a_train[take], y_train[take], config.rho
            )
            if not math.isfinite(loss):
                raise DivergedFitError(epoch)
            vec = opt.update(vec, grad)
            epoch_loss += loss
            n_batches += 1
        train_nll = epoch_loss / n_batches
        params = FlowParams.from_vector(vec, hyper)
        val_nll = batch_nll(params, a_val, y_val, config.rho)
        if not math.isfinite(val_nll):
            raise DivergedFitError(epoch)
        hist_train.append(train_nll)
        hist_val.append(val_nll)

        if val_nll < best_val:
            best_val = val_nll
            best_vec = vec.copy()
            best_epoch = epoch
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs >= config.patience:
                break

    best_params = FlowParams.from_vector(best_vec, hyper)
    train_final = evaluate_nll(best_params, config.rho, (a_train, y_train))
    # the test split stays sealed until the best epoch is already chosen
    a_test, y_test = a[idx_test], y[idx_test]
    test_final = evaluate_nll(best_params, config.rho, (a_test, y_test))

    return FitReport(
        final_params=best_params,
        train_nll=train_final,
        val_nll=best_val,
        test_nll=test_final,
        epochs_run=epochs_run,
        best_epoch=best_epoch,
        history={"train_nll": hist_train, "val_nll": hist_val},
    )
