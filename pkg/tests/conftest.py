import numpy as np
import pytest

from copsens import FlowHyper, FlowParams, init_params
from copsens.transforms import batch_nll, nll_and_gradient


@pytest.fixture
def rng():
    return np.random.default_rng(20250811)


def make_random_params(seed, scale_a=0.5, scale_y=0.3,
                       a_range=(-3.0, 3.0), y_range=(-3.0, 3.0), n_bins=8):
    """Identity-initialized params nudged by small random perturbations."""
    gen = np.random.default_rng(seed)
    hyper = FlowHyper(n_bins=n_bins, a_range=a_range, y_range=y_range)
    params = init_params(hyper, gen)
    params.theta_a = params.theta_a + scale_a * gen.standard_normal(params.theta_a.shape)
    params.theta_y = params.theta_y + scale_y * gen.standard_normal(params.theta_y.shape)
    return params


def gradient_check(seed, n_coords=24, h=1e-5, rtol=1e-4, atol=1e-8):
    """Central-difference check of the analytic batch gradient.

    Randomizes architecture, parameters, batch and rho from the seed;
    verifies a random coordinate subset spanning both parameter vectors
    plus a full-vector directional derivative.  Returns the worst
    violation ratio (<= 1 means within tolerance).
    """
    gen = np.random.default_rng(seed)
    n_bins = int(gen.choice([4, 8, 12]))
    half_a = float(gen.uniform(1.5, 4.0))
    half_y = float(gen.uniform(1.5, 4.0))
    params = make_random_params(
        seed + 1, scale_a=0.4, scale_y=0.25,
        a_range=(-half_a, half_a), y_range=(-half_y, half_y), n_bins=n_bins,
    )
    hyper = params.hyper
    a = gen.uniform(-half_a - 1, half_a + 1, 16)
    y = gen.uniform(-half_y - 1, half_y + 1, 16)
    rho = float(gen.uniform(-0.9, 0.9))

    _, grad = nll_and_gradient(params, a, y, rho)
    vec = params.as_vector()

    def loss_at(v):
        return batch_nll(FlowParams.from_vector(v, hyper), a, y, rho)

    n_a = hyper.n_theta_a
    coords = set(gen.choice(n_a, 6, replace=False).tolist())
    coords |= set((n_a + gen.choice(vec.size - n_a, n_coords - 6,
                                    replace=False)).tolist())
    worst = 0.0
    for i in sorted(coords):
        vp, vm = vec.copy(), vec.copy()
        vp[i] += h
        vm[i] -= h
        fd = (loss_at(vp) - loss_at(vm)) / (2 * h)
        worst = max(worst, abs(grad[i] - fd) / (rtol * abs(fd) + atol))

    direction = gen.standard_normal(vec.size)
    direction /= np.linalg.norm(direction)
    fd_dir = (loss_at(vec + h * direction) - loss_at(vec - h * direction)) / (2 * h)
    an_dir = float(grad @ direction)
    worst = max(worst, abs(an_dir - fd_dir) / (rtol * abs(fd_dir) + atol))
    return worst
