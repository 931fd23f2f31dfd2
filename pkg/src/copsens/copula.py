"""Bivariate Gaussian copula base distribution and rank-correlation tools.

The noise pair (z_a, z_y) underlying the model is standard normal in each
margin with Pearson correlation ``rho``.  Spearman/Kendall estimators and
the exact Gaussian-copula conversion formulas between Pearson's rho and
the rank measures live here as well.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCopulaError, InvalidInputError

LOG_TWO_PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class CopulaParam:
    """Correlation of the bivariate standard-normal noise base."""

    rho: float

    def __post_init__(self):
        if not math.isfinite(self.rho) or abs(self.rho) > 1.0:
            raise InvalidInputError(f"rho must lie in [-1, 1], got {self.rho}")


@dataclass(frozen=True)
class NoisePair:
    """A draw (or array of draws) from the correlated noise base."""

    z_a: np.ndarray
    z_y: np.ndarray


@dataclass(frozen=True)
class RankStats:
    spearman: float
    kendall: float
    pearson: float


def sample_pair(param: CopulaParam, rng: np.random.Generator, size=None) -> NoisePair:
    """Draw (z_a, z_y) with correlation ``param.rho``.

    Uses the Cholesky construction ``z_y = rho*z_a + sqrt(1 - rho^2)*e``
    with independent standard-normal ``z_a`` and ``e``.  ``rho = +/-1`` is
    allowed and yields ``z_y = +/-z_a`` exactly.
    """
    rho = param.rho
    z_a = rng.standard_normal(size)
    e = rng.standard_normal(size)
    z_y = rho * z_a + math.sqrt(max(1.0 - rho * rho, 0.0)) * e
    return NoisePair(z_a=z_a, z_y=z_y)


def log_density(param: CopulaParam, pair: NoisePair):
    """Joint log-pdf of the correlated standard-normal pair.

    Requires ``|rho| < 1``; the density is degenerate at the endpoints.
    """
    rho = param.rho
    if abs(rho) >= 1.0:
        raise DegenerateCopulaError(f"log-density undefined at rho={rho}")
    one_m = 1.0 - rho * rho
    z_a = np.asarray(pair.z_a, dtype=np.float64)
    z_y = np.asarray(pair.z_y, dtype=np.float64)
    quad = (z_a * z_a - 2.0 * rho * z_a * z_y + z_y * z_y) / (2.0 * one_m)
    return -LOG_TWO_PI - 0.5 * math.log(one_m) - quad


def _validate_sequences(xs, ys):
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.ndim != 1 or ys.ndim != 1:
        raise InvalidInputError("inputs must be one-dimensional sequences")
    if xs.shape[0] != ys.shape[0]:
        raise InvalidInputError(f"length mismatch: {xs.shape[0]} vs {ys.shape[0]}")
    if xs.shape[0] < 2:
        raise InvalidInputError("need at least two observations")
    if not (np.isfinite(xs).all() and np.isfinite(ys).all()):
        raise InvalidInputError("inputs must be finite")
    if np.all(xs == xs[0]) or np.all(ys == ys[0]):
        raise InvalidInputError("constant input has no defined rank correlation")
    return xs, ys


def average_ranks(x) -> np.ndarray:
    """Ranks 1..n with ties sharing their group's average rank."""
    x = np.asarray(x, dtype=np.float64)
    _, inverse, counts = np.unique(x, return_inverse=True, return_counts=True)
    cum = np.cumsum(counts)
    return (cum - (counts - 1) / 2.0)[inverse]


def _pearson(xs, ys):
    xd = xs - xs.mean()
    yd = ys - ys.mean()
    return float(xd @ yd / math.sqrt((xd @ xd) * (yd @ yd)))


def pearson_corr(xs, ys) -> float:
    xs, ys = _validate_sequences(xs, ys)
    return _pearson(xs, ys)


def spearman_rho(xs, ys) -> float:
    """Pearson correlation of the average-rank sequences."""
    xs, ys = _validate_sequences(xs, ys)
    return _pearson(average_ranks(xs), average_ranks(ys))


def _strict_inversions(a):
    # pairs (i < j) with a[i] > a[j], counted by merge halves
    n = a.shape[0]
    if n < 2:
        return 0, a
    mid = n // 2
    inv_l, left = _strict_inversions(a[:mid])
    inv_r, right = _strict_inversions(a[mid:])
    pos = np.searchsorted(left, right, side="right")
    cross = int((left.shape[0] - pos).sum())
    merged = np.concatenate([left, right])
    merged.sort()
    return inv_l + inv_r + cross, merged


def _tie_pair_count(x):
    _, counts = np.unique(x, return_counts=True)
    return int((counts * (counts - 1) // 2).sum())


def kendall_tau(xs, ys) -> float:
    """(concordant - discordant) / total pairs; tied pairs count in neither."""
    xs, ys = _validate_sequences(xs, ys)
    n = xs.shape[0]
    order = np.lexsort((ys, xs))
    y_sorted = ys[order]
    discordant, _ = _strict_inversions(y_sorted)
    n0 = n * (n - 1) // 2
    n1 = _tie_pair_count(xs)
    n2 = _tie_pair_count(ys)
    n3 = _tie_pair_count(xs + 1j * ys)
    concordant = n0 - n1 - n2 + n3 - discordant
    return (concordant - discordant) / n0


def _check_unit_interval(value, name):
    if not math.isfinite(value) or abs(value) > 1.0:
        raise InvalidInputError(f"{name} must lie in [-1, 1], got {value}")


def spearman_from_rho(rho: float) -> float:
    """Spearman's rho implied by a Gaussian copula with Pearson ``rho``."""
    _check_unit_interval(rho, "rho")
    return (6.0 / math.pi) * math.asin(rho / 2.0)


def rho_from_spearman(rho_s: float) -> float:
    _check_unit_interval(rho_s, "rho_s")
    return 2.0 * math.sin(math.pi * rho_s / 6.0)


def kendall_from_rho(rho: float) -> float:
    """Kendall's tau implied by a Gaussian copula with Pearson ``rho``."""
    _check_unit_interval(rho, "rho")
    return (2.0 / math.pi) * math.asin(rho)


def rho_from_kendall(tau: float) -> float:
    _check_unit_interval(tau, "tau")
    return math.sin(math.pi * tau / 2.0)


def rank_stats(xs, ys) -> RankStats:
    """Spearman, Kendall and Pearson correlations of two sequences."""
    xs, ys = _validate_sequences(xs, ys)
    return RankStats(
        spearman=spearman_rho(xs, ys),
        kendall=kendall_tau(xs, ys),
        pearson=_pearson(xs, ys),
    )
