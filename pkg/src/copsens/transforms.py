"""Learnable strictly-increasing scalar transforms.

Each variable gets a monotone piecewise rational-quadratic spline on an
auto-scaled interval, with linear tails carrying the boundary derivative
outside it.  The treatment transform owns its spline parameters directly;
the outcome transform adds the output of a small fully connected network
evaluated on the (normalized) treatment value, so the learned map is
conditioned on the treatment while staying strictly increasing in the
outcome for every conditioning value.

Raw parameters are unconstrained reals.  Bin widths pass through a
softmax onto the fixed input interval, bin heights through a softplus
(so the output interval, including its lower offset, is free to move and
stretch), and knot derivatives through a shifted softplus with a small
positive floor.  All constraint maps are chosen so that a zero raw vector
yields the identity transform exactly.

Gradients of the training objective are produced by a reverse
accumulation pass over the explicit compute graph (see ``autodiff``).
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import value_of
from .copula import LOG_TWO_PI
from .errors import DegenerateCopulaError, InvalidInputError, InversionError

PARAMS_FORMAT = "copsens-params"
PARAMS_VERSION = 1

INVERSION_TOL = 1e-9
MAX_BISECT_ITERS = 200


def _softplus_inv(y):
    return math.log(math.expm1(y))


@dataclass(frozen=True)
class FlowHyper:
    """Architecture descriptor for the transform pair."""

    n_bins: int = 8
    a_range: tuple = (-1.0, 1.0)
    y_range: tuple = (-1.0, 1.0)
    hidden: tuple = (20, 15, 10)
    activation: str = "tanh"
    min_bin_frac: float = 1e-3
    min_derivative: float = 1e-3

    @property
    def n_spline_params(self):
        # widths, heights, K+1 derivatives, output offset
        return 3 * self.n_bins + 2

    def conditioner_shapes(self):
        dims = (1,) + tuple(self.hidden) + (self.n_spline_params,)
        shapes = []
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            shapes.append((fan_in, fan_out))
            shapes.append((fan_out,))
        return shapes

    @property
    def n_theta_a(self):
        return self.n_spline_params

    @property
    def n_theta_y(self):
        return self.n_spline_params + sum(
            int(np.prod(s)) for s in self.conditioner_shapes()
        )

    def to_dict(self):
        return {
            "n_bins": self.n_bins,
            "a_range": list(self.a_range),
            "y_range": list(self.y_range),
            "hidden": list(self.hidden),
            "activation": self.activation,
            "min_bin_frac": self.min_bin_frac,
            "min_derivative": self.min_derivative,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            n_bins=int(d["n_bins"]),
            a_range=tuple(d["a_range"]),
            y_range=tuple(d["y_range"]),
            hidden=tuple(d["hidden"]),
            activation=d["activation"],
            min_bin_frac=float(d["min_bin_frac"]),
            min_derivative=float(d["min_derivative"]),
        )

    @classmethod
    def from_data(cls, a, y, **kwargs):
        """Derive the per-variable input intervals from training data.

        The interval is the observed range padded by half the range on
        each side; inputs beyond it run through the linear tails.
        """
        return cls(a_range=_padded_range(a), y_range=_padded_range(y), **kwargs)


def _padded_range(x):
    x = np.asarray(x, dtype=np.float64)
    lo, hi = float(x.min()), float(x.max())
    span = max(hi - lo, 1e-8)
    return (lo - 0.5 * span, hi + 0.5 * span)


@dataclass
class FlowParams:
    """Flat parameter vectors for the transform pair plus the descriptor."""

    theta_a: np.ndarray
    theta_y: np.ndarray
    hyper: FlowHyper

    def copy(self):
        return FlowParams(self.theta_a.copy(), self.theta_y.copy(), self.hyper)

    def as_vector(self):
        return np.concatenate([self.theta_a, self.theta_y])

    @classmethod
    def from_vector(cls, vec, hyper):
        na = hyper.n_theta_a
        return cls(vec[:na].copy(), vec[na:].copy(), hyper)


@dataclass(frozen=True)
class TransformEval:
    value: np.ndarray
    log_deriv: np.ndarray


def init_params(hyper: FlowHyper, rng: np.random.Generator) -> FlowParams:
    """Identity-initialized parameters.

    Spline raw parameters start at zero (exact identity map); conditioner
    hidden layers get small random weights and the output layer starts at
    zero so conditioning is neutral until trained.
    """
    theta_a = np.zeros(hyper.n_theta_a)
    blocks = [np.zeros(hyper.n_spline_params)]
    shapes = hyper.conditioner_shapes()
    for i, shape in enumerate(shapes):
        last_layer = i >= len(shapes) - 2
        if last_layer or len(shape) == 1:
            blocks.append(np.zeros(int(np.prod(shape))))
        else:
            fan_in = shape[0]
            blocks.append(rng.standard_normal(int(np.prod(shape))) / math.sqrt(fan_in))
    return FlowParams(theta_a, np.concatenate(blocks), hyper)


# ---------------------------------------------------------------------------
# spline machinery (works on Vars for gradients and on ndarrays for values)

def spline_knots(raw, hyper, box):
    """Map raw parameters to knot locations, heights and derivatives."""
    k = hyper.n_bins
    left, right = box
    span = right - left
    lead = value_of(raw).shape[0]
    zeros = np.zeros((lead, 1))

    w_raw = ad.slice_last(raw, 0, k)
    h_raw = ad.slice_last(raw, k, 2 * k)
    d_raw = ad.slice_last(raw, 2 * k, 3 * k + 1)
    offset = ad.slice_last(raw, 3 * k + 1, 3 * k + 2)

    widths = ad.add(
        ad.mul(ad.softmax_last(w_raw), span * (1.0 - k * hyper.min_bin_frac)),
        span * hyper.min_bin_frac,
    )
    xk = ad.add(ad.concat_last([zeros, ad.cumsum_last(widths)]), left)

    h_shift = _softplus_inv(span / k)
    heights = ad.softplus(ad.add(h_raw, h_shift))
    yk = ad.add(
        ad.concat_last([zeros, ad.cumsum_last(heights)]),
        ad.add(offset, left),
    )

    d_shift = _softplus_inv(1.0 - hyper.min_derivative)
    derivs = ad.add(ad.softplus(ad.add(d_raw, d_shift)), hyper.min_derivative)
    return xk, yk, derivs


def spline_apply(x, knots, box):
    """Evaluate the spline-with-tails and its log-derivative at ``x``.

    ``x`` is a constant (B, 1) array; knot tensors may have leading
    dimension 1 (shared) or B (per-sample conditioning).
    """
    xk, yk, derivs = knots
    left, right = box
    x = np.asarray(x, dtype=np.float64).reshape(-1, 1)
    x_in = np.clip(x, left, right)

    xk_vals = value_of(xk)
    idx = np.sum(x_in >= xk_vals, axis=-1, keepdims=True) - 1
    np.clip(idx, 0, xk_vals.shape[-1] - 2, out=idx)

    x0 = ad.gather_last(xk, idx)
    x1 = ad.gather_last(xk, idx + 1)
    y0 = ad.gather_last(yk, idx)
    y1 = ad.gather_last(yk, idx + 1)
    d0 = ad.gather_last(derivs, idx)
    d1 = ad.gather_last(derivs, idx + 1)

    w = ad.sub(x1, x0)
    h = ad.sub(y1, y0)
    s = ad.div(h, w)
    xi = ad.div(ad.sub(x_in, x0), w)
    xi_one = ad.mul(xi, ad.sub(1.0, xi))

    denom = ad.add(s, ad.mul(ad.sub(ad.add(d0, d1), ad.mul(s, 2.0)), xi_one))
    numer = ad.mul(h, ad.add(ad.mul(s, ad.square(xi)), ad.mul(d0, xi_one)))
    y_mid = ad.add(y0, ad.div(numer, denom))

    deriv_numer = ad.add(
        ad.add(ad.mul(d1, ad.square(xi)), ad.mul(ad.mul(s, 2.0), xi_one)),
        ad.mul(d0, ad.square(ad.sub(1.0, xi))),
    )
    log_deriv_mid = ad.sub(
        ad.add(ad.mul(ad.log(s), 2.0), ad.log(deriv_numer)),
        ad.mul(ad.log(denom), 2.0),
    )

    n_knots = xk_vals.shape[-1]
    d_lo = ad.slice_last(derivs, 0, 1)
    d_hi = ad.slice_last(derivs, n_knots - 1, n_knots)
    y_lo_edge = ad.slice_last(yk, 0, 1)
    y_hi_edge = ad.slice_last(yk, n_knots - 1, n_knots)

    below = x < left
    above = x > right
    y_tail_lo = ad.add(y_lo_edge, ad.mul(d_lo, x - left))
    y_tail_hi = ad.add(y_hi_edge, ad.mul(d_hi, x - right))

    y = ad.where(below, y_tail_lo, ad.where(above, y_tail_hi, y_mid))
    log_deriv = ad.where(
        below, ad.log(d_lo), ad.where(above, ad.log(d_hi), log_deriv_mid)
    )
    return y, log_deriv


def _norm_cond(a_cond, hyper):
    left, right = hyper.a_range
    center = 0.5 * (left + right)
    scale = 0.5 * (right - left)
    return (np.asarray(a_cond, dtype=np.float64).reshape(-1, 1) - center) / scale


def conditioner_raw(theta_y, a_cond, hyper):
    """Per-sample raw spline parameters for the outcome transform."""
    p = hyper.n_spline_params
    base = ad.slice_last(_as_row(theta_y), 0, p)
    h = _norm_cond(a_cond, hyper)
    pos = p
    blocks = []
    for shape in hyper.conditioner_shapes():
        size = int(np.prod(shape))
        blk = ad.slice_last(_as_row(theta_y), pos, pos + size)
        blocks.append((blk, shape))
        pos += size
    out = h
    n_layers = len(blocks) // 2
    for i in range(n_layers):
        w_blk, w_shape = blocks[2 * i]
        b_blk, _ = blocks[2 * i + 1]
        w = _reshape(w_blk, w_shape)
        out = ad.add(ad.matmul(out, w), b_blk)
        if i < n_layers - 1:
            out = ad.tanh(out)
    return ad.add(base, out)


def _as_row(theta):
    if isinstance(theta, ad.Var):
        return theta
    return np.asarray(theta, dtype=np.float64).reshape(1, -1)


def _reshape(blk, shape):
    if isinstance(blk, ad.Var):
        v = blk.value.reshape(shape)
        def vjp(g):
            return [g.reshape(blk.value.shape)]
        return ad.Var(v, (blk,), vjp)
    return np.asarray(blk).reshape(shape)


def _theta_row(theta):
    return np.asarray(theta, dtype=np.float64).reshape(1, -1)


def _check_finite(x, name):
    x = np.asarray(x, dtype=np.float64)
    if not np.isfinite(x).all():
        raise InvalidInputError(f"{name} must be finite")
    return x


# ---------------------------------------------------------------------------
# public transform API

def forward_a(params: FlowParams, a) -> TransformEval:
    """Treatment transform value and log-derivative at ``a``."""
    a_arr = _check_finite(a, "a")
    scalar = a_arr.ndim == 0
    knots = spline_knots(_theta_row(params.theta_a), params.hyper, params.hyper.a_range)
    y, ld = spline_apply(a_arr.reshape(-1, 1), knots, params.hyper.a_range)
    return _squeeze_eval(y, ld, scalar, a_arr.shape)


def forward_y(params: FlowParams, y, a_cond) -> TransformEval:
    """Outcome transform at ``y`` conditioned on treatment value ``a_cond``."""
    y_arr = _check_finite(y, "y")
    a_arr = _check_finite(a_cond, "a_cond")
    scalar = y_arr.ndim == 0 and a_arr.ndim == 0
    y_b, a_b = np.broadcast_arrays(np.atleast_1d(y_arr), np.atleast_1d(a_arr))
    raw = conditioner_raw(params.theta_y, a_b, params.hyper)
    knots = spline_knots(raw, params.hyper, params.hyper.y_range)
    z, ld = spline_apply(y_b.reshape(-1, 1), knots, params.hyper.y_range)
    return _squeeze_eval(z, ld, scalar, y_b.shape)


def _squeeze_eval(y, ld, scalar, shape):
    yv = value_of(y).reshape(shape)
    ldv = value_of(ld).reshape(shape)
    if scalar:
        return TransformEval(float(yv.reshape(-1)[0]), float(ldv.reshape(-1)[0]))
    return TransformEval(yv, ldv)


def _bisect_inverse(z, knots, box):
    """Invert a monotone spline-with-tails by bisection.

    Tail segments are linear, so targets beyond the knot range invert
    exactly; interior targets are bracketed by the input interval.
    """
    left, right = box
    xk, yk, d = (value_of(t) for t in knots)
    z = np.asarray(z, dtype=np.float64).reshape(-1, 1)

    rows = max(z.shape[0], yk.shape[0])
    y_lo = np.broadcast_to(yk[:, :1], (rows, 1))
    y_hi = np.broadcast_to(yk[:, -1:], (rows, 1))
    d_lo = np.broadcast_to(d[:, :1], (rows, 1))
    d_hi = np.broadcast_to(d[:, -1:], (rows, 1))

    below = z < y_lo
    above = z > y_hi
    interior = ~(below | above)

    x = np.where(below, left + (z - y_lo) / d_lo, 0.0)
    x = np.where(above, right + (z - y_hi) / d_hi, x)

    if interior.any():
        lo = np.full_like(z, left)
        hi = np.full_like(z, right)
        mid = 0.5 * (lo + hi)
        converged = False
        for _ in range(MAX_BISECT_ITERS):
            mid = 0.5 * (lo + hi)
            f_mid, _ = spline_apply(mid, knots, box)
            f_mid = value_of(f_mid)
            err = np.abs(f_mid - z)[interior]
            if err.max() <= INVERSION_TOL:
                converged = True
                break
            go_right = f_mid < z
            lo = np.where(go_right, mid, lo)
            hi = np.where(go_right, hi, mid)
        if not converged:
            f_mid, _ = spline_apply(mid, knots, box)
            if np.abs(value_of(f_mid) - z)[interior].max() > INVERSION_TOL:
                raise InversionError("bisection failed to reach tolerance")
        x = np.where(interior, mid, x)
    return x


def inverse_a(params: FlowParams, z):
    """Solve ``forward_a(x) = z`` for x."""
    z_arr = _check_finite(z, "z")
    scalar = z_arr.ndim == 0
    knots = spline_knots(_theta_row(params.theta_a), params.hyper, params.hyper.a_range)
    x = _bisect_inverse(z_arr.reshape(-1, 1), knots, params.hyper.a_range)
    x = x.reshape(z_arr.shape if not scalar else ())
    return float(x.reshape(-1)[0]) if scalar else x


def inverse_y(params: FlowParams, z, a_cond):
    """Solve ``forward_y(x, a_cond) = z`` for x."""
    z_arr = _check_finite(z, "z")
    a_arr = _check_finite(a_cond, "a_cond")
    scalar = z_arr.ndim == 0 and a_arr.ndim == 0
    z_b, a_b = np.broadcast_arrays(np.atleast_1d(z_arr), np.atleast_1d(a_arr))
    raw = conditioner_raw(params.theta_y, a_b, params.hyper)
    knots = tuple(value_of(t) for t in spline_knots(raw, params.hyper, params.hyper.y_range))
    x = _bisect_inverse(z_b.reshape(-1, 1), knots, params.hyper.y_range)
    x = x.reshape(z_b.shape)
    return float(x.reshape(-1)[0]) if scalar else x


# ---------------------------------------------------------------------------
# training objective

def nll_graph(theta_a, theta_y, a, y, rho, hyper):
    """Mean negative log-likelihood node for a batch.

    ``theta_a``/``theta_y`` may be Vars (for gradients) or plain vectors.
    """
    if abs(rho) >= 1.0:
        raise DegenerateCopulaError(f"training requires |rho| < 1, got {rho}")
    a = np.asarray(a, dtype=np.float64).reshape(-1, 1)
    y = np.asarray(y, dtype=np.float64).reshape(-1, 1)

    knots_a = spline_knots(_as_row(theta_a), hyper, hyper.a_range)
    z_a, ld_a = spline_apply(a, knots_a, hyper.a_range)

    raw_y = conditioner_raw(theta_y, a, hyper)
    knots_y = spline_knots(raw_y, hyper, hyper.y_range)
    z_y, ld_y = spline_apply(y, knots_y, hyper.y_range)

    one_m = 1.0 - rho * rho
    quad = ad.mul(
        ad.sub(
            ad.add(ad.square(z_a), ad.square(z_y)),
            ad.mul(ad.mul(z_a, z_y), 2.0 * rho),
        ),
        1.0 / (2.0 * one_m),
    )
    log_base = ad.sub(-LOG_TWO_PI - 0.5 * math.log(one_m), quad)
    log_lik = ad.add(log_base, ad.add(ld_a, ld_y))
    return ad.mean_all(ad.mul(log_lik, -1.0))


def batch_nll(params: FlowParams, a, y, rho) -> float:
    """Mean negative log-likelihood value over a batch."""
    node = nll_graph(params.theta_a, params.theta_y, a, y, rho, params.hyper)
    return float(node.value)


def nll_and_gradient(params: FlowParams, a, y, rho):
    """Loss plus its gradient with respect to (theta_a, theta_y) stacked."""
    batch = np.asarray(a)
    if batch.size == 0:
        raise InvalidInputError("batch must be non-empty")
    va = ad.Var(params.theta_a.reshape(1, -1))
    vy = ad.Var(params.theta_y.reshape(1, -1))
    loss = nll_graph(va, vy, a, y, rho, params.hyper)
    ad.backward(loss)
    ga = va.grad.reshape(-1) if va.grad is not None else np.zeros_like(params.theta_a)
    gy = vy.grad.reshape(-1) if vy.grad is not None else np.zeros_like(params.theta_y)
    return float(loss.value), np.concatenate([ga, gy])


def param_gradient(params: FlowParams, batch, rho) -> np.ndarray:
    """Gradient of the mean batch NLL with respect to every parameter.

    ``batch`` is a sequence of (a, y) pairs; ``rho`` may be a float or a
    ``CopulaParam``-like object with a ``rho`` attribute.
    """
    rho = getattr(rho, "rho", rho)
    arr = np.asarray(batch, dtype=np.float64)
    if arr.size == 0:
        raise InvalidInputError("batch must be non-empty")
    arr = arr.reshape(-1, 2)
    _, grad = nll_and_gradient(params, arr[:, 0], arr[:, 1], rho)
    return grad


# ---------------------------------------------------------------------------
# serialization

def params_to_json(params: FlowParams) -> str:
    doc = {
        "format": PARAMS_FORMAT,
        "version": PARAMS_VERSION,
        "hyper": params.hyper.to_dict(),
        "theta_a": params.theta_a.tolist(),
        "theta_y": params.theta_y.tolist(),
    }
    return json.dumps(doc)


def params_from_json(text: str) -> FlowParams:
    doc = json.loads(text)
    if doc.get("format") != PARAMS_FORMAT:
        raise InvalidInputError("not a parameter document")
    if doc.get("version") != PARAMS_VERSION:
        raise InvalidInputError(f"unsupported parameter version {doc.get('version')}")
    hyper = FlowHyper.from_dict(doc["hyper"])
    theta_a = np.asarray(doc["theta_a"], dtype=np.float64)
    theta_y = np.asarray(doc["theta_y"], dtype=np.float64)
    if theta_a.shape != (hyper.n_theta_a,) or theta_y.shape != (hyper.n_theta_y,):
        raise InvalidInputError("parameter vector length mismatch")
    return FlowParams(theta_a, theta_y, hyper)
