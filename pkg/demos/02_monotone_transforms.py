"""The learnable strictly-increasing transforms.

Shows the identity initialization, what randomly perturbed transforms
look like (spline body, linear tails), how the outcome transform reacts
to its conditioning input, and the bisection inverse.  Saves a figure to
demos/output/.
"""

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from copsens import FlowHyper, forward_a, forward_y, init_params, inverse_a

OUT = Path(__file__).parent / "output"


def main():
    OUT.mkdir(exist_ok=True)
    rng = np.random.default_rng(3)
    hyper = FlowHyper(a_range=(-3, 3), y_range=(-3, 3))
    params = init_params(hyper, rng)

    grid = np.linspace(-5, 5, 600)
    print("fresh transform is the identity:",
          np.abs(forward_a(params, grid).value - grid).max())

    fig, axes = plt.subplots(1, 3, figsize=(13, 4))
    axes[0].plot(grid, forward_a(params, grid).value, label="identity init")
    for k, scale in enumerate((0.4, 0.8, 1.4)):
        p = init_params(hyper, rng)
        p.theta_a = p.theta_a + scale * rng.standard_normal(p.theta_a.shape)
        ev = forward_a(p, grid)
        axes[0].plot(grid, ev.value, label=f"perturbed x{scale}")
        assert np.all(np.diff(ev.value) > 0), "must stay strictly increasing"
    axes[0].axvspan(-3, 3, alpha=0.08, color="gray", label="spline interval")
    axes[0].set_title("treatment transform")
    axes[0].legend(fontsize=7)

    p = init_params(hyper, rng)
    p.theta_y = p.theta_y + 0.6 * rng.standard_normal(p.theta_y.shape)
    for a_cond in (-1.5, 0.0, 1.5):
        axes[1].plot(grid, forward_y(p, grid, a_cond).value,
                     label=f"conditioning input {a_cond:+.1f}")
    axes[1].set_title("outcome transform, conditioned")
    axes[1].legend(fontsize=7)

    z = forward_a(p, grid).value if False else None
    p2 = init_params(hyper, rng)
    p2.theta_a = p2.theta_a + 0.9 * rng.standard_normal(p2.theta_a.shape)
    x = rng.uniform(-4, 4, 2000)
    z = forward_a(p2, x).value
    x_back = inverse_a(p2, z)
    axes[2].scatter(x, x_back - x, s=2)
    axes[2].set_title(f"bisection inverse residual (max {np.abs(x_back - x).max():.1e})")
    print("max inverse roundtrip error over 2000 points:",
          np.abs(x_back - x).max())

    fig.tight_layout()
    fig.savefig(OUT / "transforms.png", dpi=110)
    print(f"wrote {OUT / 'transforms.png'}")


if __name__ == "__main__":
    main()
