"""Compute the Lloyd-Max MSE of a unit-variance Gaussian scalar quantizer.

The values printed here are frozen into ``hybrid_secrecy.quantization.LLOYD_MAX_MSE``.
Run ``python scripts/lloyd_max_table.py`` to regenerate them.
"""
import numpy as np
from scipy import integrate, stats


def lloyd_max_mse(bits, iters=20000, tol=1e-15):
    n = 2 ** bits
    # symmetric start: uniform levels on +-2 sigma
    levels = np.linspace(-2.0, 2.0, n) if n > 1 else np.zeros(1)
    for _ in range(iters):
        edges = np.concatenate(([-np.inf], 0.5 * (levels[1:] + levels[:-1]), [np.inf]))
        lo, hi = edges[:-1], edges[1:]
        mass = stats.norm.cdf(hi) - stats.norm.cdf(lo)
        first = stats.norm.pdf(lo) - stats.norm.pdf(hi)
        new = first / mass
        if np.max(np.abs(new - levels)) < tol:
            levels = new
            break
        levels = new
    edges = np.concatenate(([-np.inf], 0.5 * (levels[1:] + levels[:-1]), [np.inf]))
    mse = 0.0
    for lev, a, b in zip(levels, edges[:-1], edges[1:]):
        val, _ = integrate.quad(lambda x: (x - lev) ** 2 * stats.norm.pdf(x), a, b,
                                epsabs=1e-14, epsrel=1e-12)
        mse += val
    return mse


def main():
    for b in range(1, 6):
        print(f"{b}: {lloyd_max_mse(b):.10g},")


if __name__ == "__main__":
    main()
