"""Ground-truth data generating processes and their oracles.

Three families back the benchmark suite:

* a linear-Gaussian SCM ``A := e_A``, ``Y := alpha*A + e_Y`` with
  correlated noise, whose copula-model ACE has a closed form in the
  assumed noise correlation;
* binary confounded DGPs (hidden binary U) with the backdoor-adjustment
  ACE and the classical assumption-free observational bounds of constant
  width 1;
* a multi-dimension binary DGP whose outcome is the sum of several binary
  dimensions sharing one confounder and one treatment, giving a
  categorical outcome with summable assumption-free bounds.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCopulaError, InvalidInputError


@dataclass(frozen=True)
class LinearScmParams:
    """alpha: causal coefficient; beta: noise covariance; delta: noise variance."""

    alpha: float
    beta: float
    delta: float

    def __post_init__(self):
        if self.delta <= 0:
            raise InvalidInputError("delta must be positive")
        if self.beta * self.beta >= self.delta:
            raise InvalidInputError(
                "noise covariance matrix must be positive definite "
                f"(need beta^2 < delta, got beta={self.beta}, delta={self.delta})"
            )

    @property
    def sigma_y(self):
        return math.sqrt(self.alpha ** 2 + self.delta + 2.0 * self.alpha * self.beta)

    @property
    def rho_obs(self):
        """Observational Pearson correlation of (A, Y)."""
        return (self.alpha + self.beta) / self.sigma_y

    @property
    def rho_noise(self):
        """Correlation of the standardized noise pair (the true copula rho)."""
        return self.beta / math.sqrt(self.delta)

    @property
    def true_ace(self):
        return self.alpha


def benchmark_linear_scms():
    """Six observationally equivalent linear SCM triples.

    Rows 0-2 share the negative-correlation observational law, rows 3-5
    the positive one; causal coefficients run over {0.2, 0.0, -0.2} in
    each group.
    """
    return (
        LinearScmParams(0.2, -0.6, 0.72),
        LinearScmParams(0.0, -0.4, 0.52),
        LinearScmParams(-0.2, -0.2, 0.40),
        LinearScmParams(0.2, 0.2, 0.40),
        LinearScmParams(0.0, 0.4, 0.52),
        LinearScmParams(-0.2, 0.6, 0.72),
    )


def sample_linear_scm(params: LinearScmParams, n, rng: np.random.Generator):
    """Draw n observational (a, y) pairs from the linear-Gaussian SCM."""
    if n < 1:
        raise InvalidInputError("n must be positive")
    e_a = rng.standard_normal(n)
    resid_sd = math.sqrt(params.delta - params.beta ** 2)
    e_y = params.beta * e_a + resid_sd * rng.standard_normal(n)
    a = e_a
    y = params.alpha * a + e_y
    return a, y


def linear_ace_oracle(params: LinearScmParams, rho_assumed: float) -> float:
    """Closed-form copula-model ACE for the linear-Gaussian family.

    For a bivariate Gaussian observational law with correlation r and
    outcome scale sigma_y, the copula model with assumed noise
    correlation rho yields

        ACE(rho) = sigma_y * (r - rho * sqrt(1 - r^2) / sqrt(1 - rho^2)).

    Verified against direct numerical integration of the interventional
    mean in the test suite before use.
    """
    if abs(rho_assumed) >= 1.0:
        raise DegenerateCopulaError("|rho| must be < 1")
    r = params.rho_obs
    return params.sigma_y * (
        r - rho_assumed * math.sqrt(1.0 - r * r) / math.sqrt(1.0 - rho_assumed ** 2)
    )


# ---------------------------------------------------------------------------
# binary confounded DGPs

def _check_prob(x, name):
    x = np.asarray(x, dtype=np.float64)
    if np.any((x < 0) | (x > 1)) or not np.isfinite(x).all():
        raise InvalidInputError(f"{name} entries must lie in [0, 1]")
    return x


@dataclass(frozen=True)
class BinaryDgpParams:
    """P(U=1), P(A=1|U=u) for u in {0,1}, and P(Y=1|A=a,U=u) indexed [a][u]."""

    p_u: float
    p_a_given_u: tuple
    p_y_given_au: tuple

    def __post_init__(self):
        _check_prob(self.p_u, "p_u")
        pa = _check_prob(self.p_a_given_u, "p_a_given_u")
        py = _check_prob(self.p_y_given_au, "p_y_given_au")
        if pa.shape != (2,):
            raise InvalidInputError("p_a_given_u must have two entries (u=0, u=1)")
        if py.shape != (2, 2):
            raise InvalidInputError("p_y_given_au must be 2x2, indexed [a][u]")
        object.__setattr__(self, "p_a_given_u", tuple(pa.tolist()))
        object.__setattr__(self, "p_y_given_au", tuple(map(tuple, py.tolist())))


def random_binary_dgp(rng: np.random.Generator) -> BinaryDgpParams:
    """All Bernoulli parameters drawn uniformly on [0, 1]."""
    return BinaryDgpParams(
        p_u=float(rng.random()),
        p_a_given_u=tuple(rng.random(2).tolist()),
        p_y_given_au=tuple(map(tuple, rng.random((2, 2)).tolist())),
    )


def sample_binary_dgp(params: BinaryDgpParams, n, rng: np.random.Generator):
    """Draw (a, y) with the confounder U hidden."""
    if n < 1:
        raise InvalidInputError("n must be positive")
    pa = np.asarray(params.p_a_given_u)
    py = np.asarray(params.p_y_given_au)
    u = (rng.random(n) < params.p_u).astype(np.int64)
    a = (rng.random(n) < pa[u]).astype(np.int64)
    y = (rng.random(n) < py[a, u]).astype(np.int64)
    return a.astype(np.float64), y.astype(np.float64)


def binary_true_ace(params: BinaryDgpParams) -> float:
    """Backdoor adjustment over the hidden confounder."""
    py = np.asarray(params.p_y_given_au)
    pu = np.array([1.0 - params.p_u, params.p_u])
    return float(((py[1] - py[0]) * pu).sum())


@dataclass(frozen=True)
class BinaryObsStats:
    """Observational marginals: P(A=1), P(A=0), P(Y=1|A=1), P(Y=1|A=0)."""

    p1: float
    p0: float
    q1: float
    q0: float

    def __post_init__(self):
        for name in ("p1", "p0", "q1", "q0"):
            _check_prob(getattr(self, name), name)
        if abs(self.p1 + self.p0 - 1.0) > 1e-9:
            raise InvalidInputError("p1 + p0 must equal 1")


def exact_obs_stats(params: BinaryDgpParams) -> BinaryObsStats:
    """Marginalize the DGP tables exactly."""
    pa = np.asarray(params.p_a_given_u)
    py = np.asarray(params.p_y_given_au)
    pu = np.array([1.0 - params.p_u, params.p_u])
    p1 = float((pa * pu).sum())
    p0 = 1.0 - p1

    def q(a):
        # P(u | A=a) weights
        pa_u = pa if a == 1 else 1.0 - pa
        denom = float((pa_u * pu).sum())
        if denom == 0.0:
            return 0.0
        return float((py[a] * pa_u * pu).sum() / denom)

    return BinaryObsStats(p1=p1, p0=p0, q1=q(1), q0=q(0))


def empirical_obs_stats(a, y) -> BinaryObsStats:
    a = np.asarray(a, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if not (np.isin(a, (0.0, 1.0)).all() and np.isin(y, (0.0, 1.0)).all()):
        raise InvalidInputError("empirical stats need binary 0/1 columns")
    p1 = float(a.mean())
    q1 = float(y[a == 1].mean()) if (a == 1).any() else 0.0
    q0 = float(y[a == 0].mean()) if (a == 0).any() else 0.0
    return BinaryObsStats(p1=p1, p0=1.0 - p1, q1=q1, q0=q0)


def af_bounds(stats: BinaryObsStats):
    """Assumption-free ACE bounds for binary treatment/outcome (width 1)."""
    core = stats.q1 * stats.p1 - stats.q0 * stats.p0
    return (core - stats.p1, core + stats.p0)


def categorical_af_bounds(per_dimension):
    """Component-wise sum of binary bounds over outcome dimensions."""
    dims = list(per_dimension)
    if not dims:
        raise InvalidInputError("need at least one dimension")
    lowers, uppers = zip(*(af_bounds(s) if isinstance(s, BinaryObsStats) else tuple(s)
                           for s in dims))
    return (float(sum(lowers)), float(sum(uppers)))


# ---------------------------------------------------------------------------
# categorical outcome: several binary dimensions sharing one U and one A

@dataclass(frozen=True)
class CategoricalDgpParams:
    """One hidden U and one treatment shared by several binary outcome dims."""

    p_u: float
    p_a_given_u: tuple
    dims: tuple  # of 2x2 P(Y_d=1|A=a,U=u) tables

    def __post_init__(self):
        _check_prob(self.p_u, "p_u")
        pa = _check_prob(self.p_a_given_u, "p_a_given_u")
        if pa.shape != (2,):
            raise InvalidInputError("p_a_given_u must have two entries")
        if len(self.dims) < 1:
            raise InvalidInputError("need at least one outcome dimension")
        fixed = []
        for tbl in self.dims:
            t = _check_prob(tbl, "dim table")
            if t.shape != (2, 2):
                raise InvalidInputError("each dimension table must be 2x2 [a][u]")
            fixed.append(tuple(map(tuple, t.tolist())))
        object.__setattr__(self, "dims", tuple(fixed))

    @property
    def n_classes(self):
        return len(self.dims) + 1

    def dimension_dgp(self, d) -> BinaryDgpParams:
        return BinaryDgpParams(self.p_u, self.p_a_given_u, self.dims[d])


def random_categorical_dgp(rng: np.random.Generator, n_dims=7) -> CategoricalDgpParams:
    return CategoricalDgpParams(
        p_u=float(rng.random()),
        p_a_given_u=tuple(rng.random(2).tolist()),
        dims=tuple(tuple(map(tuple, rng.random((2, 2)).tolist())) for _ in range(n_dims)),
    )


def sample_categorical_dgp(params: CategoricalDgpParams, n, rng: np.random.Generator,
                           return_dimensions=False):
    """Draw (a, y) where y sums the binary dimensions; U stays hidden."""
    if n < 1:
        raise InvalidInputError("n must be positive")
    pa = np.asarray(params.p_a_given_u)
    u = (rng.random(n) < params.p_u).astype(np.int64)
    a = (rng.random(n) < pa[u]).astype(np.int64)
    parts = []
    for tbl in params.dims:
        py = np.asarray(tbl)
        parts.append((rng.random(n) < py[a, u]).astype(np.int64))
    dims = np.column_stack(parts)
    y = dims.sum(axis=1)
    if return_dimensions:
        return a.astype(np.float64), y.astype(np.float64), dims
    return a.astype(np.float64), y.astype(np.float64)


def categorical_true_ace(params: CategoricalDgpParams) -> float:
    """Sum of per-dimension backdoor ACEs (linearity of expectation)."""
    return float(sum(binary_true_ace(params.dimension_dgp(d))
                     for d in range(len(params.dims))))


def categorical_exact_bounds(params: CategoricalDgpParams):
    """Summed assumption-free bounds from exact per-dimension marginals."""
    stats = [exact_obs_stats(params.dimension_dgp(d)) for d in range(len(params.dims))]
    return categorical_af_bounds(stats)


# ---------------------------------------------------------------------------
# plain-text serialization of DGP specs

def true_ace(dgp) -> float:
    if isinstance(dgp, LinearScmParams):
        return dgp.true_ace
    if isinstance(dgp, BinaryDgpParams):
        return binary_true_ace(dgp)
    if isinstance(dgp, CategoricalDgpParams):
        return categorical_true_ace(dgp)
    raise InvalidInputError(f"unknown DGP type {type(dgp)!r}")


def sample_dgp(dgp, n, rng):
    if isinstance(dgp, LinearScmParams):
        return sample_linear_scm(dgp, n, rng)
    if isinstance(dgp, BinaryDgpParams):
        return sample_binary_dgp(dgp, n, rng)
    if isinstance(dgp, CategoricalDgpParams):
        return sample_categorical_dgp(dgp, n, rng)
    raise InvalidInputError(f"unknown DGP type {type(dgp)!r}")


def dgp_to_dict(dgp) -> dict:
    if isinstance(dgp, LinearScmParams):
        return {"kind": "linear_scm", "alpha": dgp.alpha, "beta": dgp.beta,
                "delta": dgp.delta}
    if isinstance(dgp, BinaryDgpParams):
        return {"kind": "binary", "p_u": dgp.p_u,
                "p_a_given_u": list(dgp.p_a_given_u),
                "p_y_given_au": [list(r) for r in dgp.p_y_given_au]}
    if isinstance(dgp, CategoricalDgpParams):
        return {"kind": "categorical", "p_u": dgp.p_u,
                "p_a_given_u": list(dgp.p_a_given_u),
                "dims": [[list(r) for r in tbl] for tbl in dgp.dims]}
    raise InvalidInputError(f"unknown DGP type {type(dgp)!r}")


def dgp_from_dict(doc: dict):
    kind = doc.get("kind")
    if kind == "linear_scm":
        return LinearScmParams(float(doc["alpha"]), float(doc["beta"]),
                               float(doc["delta"]))
    if kind == "binary":
        return BinaryDgpParams(
            p_u=float(doc["p_u"]),
            p_a_given_u=tuple(doc["p_a_given_u"]),
            p_y_given_au=tuple(map(tuple, doc["p_y_given_au"])),
        )
    if kind == "categorical":
        return CategoricalDgpParams(
            p_u=float(doc["p_u"]),
            p_a_given_u=tuple(doc["p_a_given_u"]),
            dims=tuple(tuple(map(tuple, tbl)) for tbl in doc["dims"]),
        )
    raise InvalidInputError(f"unknown DGP kind {kind!r}")
