"""Independent reference computations used by the tests.

Nothing here calls the closed forms under test: covariances are built
densely, power normalization is done numerically, expectations over Eve's
gains are summed path by path, the Lloyd-Max table is recomputed from
Gaussian partial moments and the GPI is checked against a sphere grid.
"""
import itertools

import numpy as np
from scipy.stats import norm

from hybrid_secrecy.optimizer import (init_anpm, init_digital_cm, inner_loop, pa_search)
from hybrid_secrecy.rates import HybridPrecoder, unit_modulus


def lloyd_max_mse(bits, iters=4000):
    """Lloyd iteration for a unit Gaussian using closed-form truncated moments."""
    n = 2 ** bits
    c = norm.ppf((np.arange(n) + 0.5) / n)
    for _ in range(iters):
        t = np.concatenate(([-np.inf], 0.5 * (c[1:] + c[:-1]), [np.inf]))
        p = np.diff(norm.cdf(t))
        c_new = (norm.pdf(t[:-1]) - norm.pdf(t[1:])) / p
        if np.max(np.abs(c_new - c)) < 1e-15:
            c = c_new
            break
        c = c_new
    t = np.concatenate(([-np.inf], 0.5 * (c[1:] + c[:-1]), [np.inf]))
    p = np.diff(norm.cdf(t))
    return float(1 - np.sum(p * c ** 2))


def block_analog(d, k):
    n_sub = len(d) // k
    f = np.zeros((len(d), k), dtype=complex)
    for c in range(k):
        f[c * n_sub:(c + 1) * n_sub, c] = d[c * n_sub:(c + 1) * n_sub]
    return f


def transmit_covariance(f_rf, f_bb, t_bb, beta, p, eta):
    """``E[x x^H]`` for ``x = F_RF ((1-eta) u + n_q)`` with dense matrices."""
    r_uu = beta * p * np.outer(f_bb, f_bb.conj()) + (1 - beta) * p * t_bb @ t_bb.conj().T
    r_nq = eta * (1 - eta) * np.diag(np.diag(r_uu))
    return f_rf @ ((1 - eta) ** 2 * r_uu + r_nq) @ f_rf.conj().T


def normalized_power(f_rf, f_bb, t_bb, beta, p_t, eta):
    """Pre-DAC power that makes the radiated power equal ``p_t``, found numerically."""
    unit = np.trace(transmit_covariance(f_rf, f_bb, t_bb, beta, 1.0, eta)).real
    return p_t / unit


def bob_sinr(h, f_rf, f_bb, t_bb, beta, p_t, eta, sigma2):
    p = normalized_power(f_rf, f_bb, t_bb, beta, p_t, eta)
    lin = (1 - eta) ** 2 * p
    r_uu = beta * p * np.outer(f_bb, f_bb.conj()) + (1 - beta) * p * t_bb @ t_bb.conj().T
    r_nq = eta * (1 - eta) * np.diag(np.diag(r_uu))
    g = h @ f_rf
    sig = beta * lin * abs(g @ f_bb) ** 2
    an = (1 - beta) * lin * np.real(g @ t_bb @ t_bb.conj().T @ g.conj())
    qn = np.real(g @ r_nq @ g.conj())
    return sig / (an + qn + sigma2)


def eve_mean_sinr_ratio(steering_e, f_rf, f_bb, t_bb, beta, p_t, eta, sigma2):
    """``E[signal] / E[interference + noise]``, expectations summed path by path."""
    n_paths, n_t = steering_e.shape
    p = normalized_power(f_rf, f_bb, t_bb, beta, p_t, eta)
    lin = (1 - eta) ** 2 * p
    r_uu = beta * p * np.outer(f_bb, f_bb.conj()) + (1 - beta) * p * t_bb @ t_bb.conj().T
    r_nq = eta * (1 - eta) * np.diag(np.diag(r_uu))
    sig = den = 0.0
    for a in steering_e:
        # E|g_l|^2 = 1 and distinct paths are uncorrelated
        g = np.sqrt(n_t / n_paths) * (a @ f_rf)
        sig += beta * lin * abs(g @ f_bb) ** 2
        den += (1 - beta) * lin * np.real(g @ t_bb @ t_bb.conj().T @ g.conj())
        den += np.real(g @ r_nq @ g.conj())
    return sig / (den + sigma2)


def approx_secrecy_rate(h, steering_e, d, f_bb, t_bb, beta, p_t, eta, sigma2, k):
    f_rf = block_analog(d, k)
    rb = np.log2(1 + bob_sinr(h, f_rf, f_bb, t_bb, beta, p_t, eta, sigma2))
    re = np.log2(1 + eve_mean_sinr_ratio(steering_e, f_rf, f_bb, t_bb, beta, p_t, eta, sigma2))
    return rb - re


def sphere_grid_max(a1, b1, a2, b2, n_mag=32, n_phase=32, zooms=3):
    """Brute-force maximum of ``log2`` of the quotient product over unit vectors in C^3.

    ``x = (cos a, sin a cos b e^{j p}, sin a sin b e^{j q})`` up to a global
    phase; a coarse grid of ``n_mag^2 * n_phase^2`` points (about 1e6) is
    followed by ``zooms`` finer grids around the incumbent.
    """
    lo = np.array([0.0, 0.0, 0.0, 0.0])
    hi = np.array([np.pi / 2, np.pi / 2, 2 * np.pi, 2 * np.pi])
    best_val, best_pt = -np.inf, None
    for _ in range(zooms + 1):
        axes = [np.linspace(lo[i], hi[i], n) for i, n in enumerate((n_mag, n_mag, n_phase, n_phase))]
        aa, bb, pp, qq = np.meshgrid(*axes, indexing="ij")
        x = np.stack([np.cos(aa) + 0j, np.sin(aa) * np.cos(bb) * np.exp(1j * pp),
                      np.sin(aa) * np.sin(bb) * np.exp(1j * qq)], axis=-1).reshape(-1, 3)

        def quad(m):
            return np.einsum("ni,ij,nj->n", x.conj(), m, x).real

        vals = np.log2(quad(a1) / quad(b1) * quad(a2) / quad(b2))
        i = int(np.argmax(vals))
        if vals[i] > best_val:
            best_val = float(vals[i])
            best_pt = np.array([aa.reshape(-1)[i], bb.reshape(-1)[i], pp.reshape(-1)[i],
                                qq.reshape(-1)[i]])
        width = (hi - lo) / 8
        lo, hi = best_pt - width, best_pt + width
    return best_val


def exhaustive_analog_optimum(h, stats, q, cfg, eps=1e-4, gpi=None):
    """Best approximate SR over every on-grid analog vector, each followed by the inner loop."""
    grid = q.phase_set
    best = -np.inf
    for phases in itertools.product(grid, repeat=cfg.n_t):
        d = unit_modulus(np.array(phases), cfg.n_sub)
        w = HybridPrecoder(d, init_digital_cm(d, h, stats, q, cfg, gpi), init_anpm(d, h, cfg), 1.0)
        w = w.with_(beta=pa_search(w, h, stats, q, cfg))
        best = max(best, inner_loop(w, h, stats, q, cfg, eps, gpi=gpi).trace[-1])
    return best
