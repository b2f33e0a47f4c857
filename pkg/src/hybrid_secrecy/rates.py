"""Bob's rate, Eve's approximate mean SINR and the secrecy-rate objective."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .channel import ChannelRealization, EveChannelStats, SystemConfig
from .quantization import QuantizationModel, effective_power, quantization_noise_covariance


def analog_matrix(d, k):
    """Block-diagonal ``n_t x k`` analog precoder whose nonzeros are ``d``."""
    d = np.asarray(d)
    n_sub = d.shape[0] // k
    f_rf = np.zeros((d.shape[0], k), dtype=complex)
    for c in range(k):
        f_rf[c * n_sub:(c + 1) * n_sub, c] = d[c * n_sub:(c + 1) * n_sub]
    return f_rf


def unit_modulus(phases, n_sub):
    """Analog weights ``exp(j*phases) / sqrt(n_sub)``."""
    return np.exp(1j * np.asarray(phases, dtype=float)) / np.sqrt(n_sub)


@dataclass(frozen=True)
class HybridPrecoder:
    """Analog nonzeros ``d``, digital CM precoder ``f_bb``, AN matrix ``t_bb``, PA ``beta``."""

    d: np.ndarray
    f_bb: np.ndarray
    t_bb: np.ndarray
    beta: float

    @property
    def k(self) -> int:
        return self.f_bb.shape[0]

    @property
    def n_sub(self) -> int:
        return self.d.shape[0] // self.k

    @property
    def f_rf(self) -> np.ndarray:
        return analog_matrix(self.d, self.k)

    def with_(self, **kw) -> "HybridPrecoder":
        return replace(self, **kw)

    def check(self, tol=1e-10):
        """Raise ``ValueError`` if any feasibility constraint is violated."""
        if np.max(np.abs(np.abs(self.d) - 1 / np.sqrt(self.n_sub))) > tol:
            raise ValueError("analog weights must have modulus 1/sqrt(n_sub)")
        if abs(np.linalg.norm(self.f_bb) - 1) > tol:
            raise ValueError("f_bb must have unit norm")
        if abs(np.linalg.norm(self.t_bb) - 1) > tol:
            raise ValueError("t_bb must have unit Frobenius norm")
        if not -tol <= self.beta <= 1 + tol:
            raise ValueError("beta must lie in [0, 1]")
        return self


@dataclass(frozen=True)
class LinkTerms:
    """Beta-independent received powers; SINRs are rational in ``beta``.

    Each entry is the power of one component per unit of its PA share:
    ``sig`` (CM), ``an`` (artificial noise), ``qf``/``qt`` (DAC noise driven
    by the CM and AN parts). ``*_e`` are Eve's expected counterparts.
    """

    sig: float
    an: float
    qf: float
    qt: float
    sig_e: float
    an_e: float
    qf_e: float
    qt_e: float
    sigma2: float

    def sinr_bob(self, beta):
        beta = np.asarray(beta, dtype=float)
        den = (1 - beta) * (self.an + self.qt) + beta * self.qf + self.sigma2
        return beta * self.sig / den

    def sinr_eve(self, beta):
        beta = np.asarray(beta, dtype=float)
        den = (1 - beta) * (self.an_e + self.qt_e) + beta * self.qf_e + self.sigma2
        return beta * self.sig_e / den

    def secrecy_rate(self, beta):
        return np.log2(1 + self.sinr_bob(beta)) - np.log2(1 + self.sinr_eve(beta))


def link_terms(w: HybridPrecoder, h: ChannelRealization, stats: EveChannelStats,
               q: QuantizationModel, cfg: SystemConfig) -> LinkTerms:
    p = effective_power(cfg.p_t, q.eta)
    lin = p * (1 - q.eta) ** 2
    dist = p * q.eta * (1 - q.eta)
    scale = cfg.n_t / cfg.l_paths
    f_rf = w.f_rf
    hb = h.h @ f_rf
    ae = stats.steering_e @ f_rf
    t_rows = np.sum(np.abs(w.t_bb) ** 2, axis=1)
    f_pow = np.abs(w.f_bb) ** 2
    hb_pow = np.abs(hb) ** 2
    ae_pow = np.sum(np.abs(ae) ** 2, axis=0)
    return LinkTerms(
        sig=lin * abs(hb @ w.f_bb) ** 2,
        an=lin * np.sum(np.abs(hb @ w.t_bb) ** 2),
        qf=dist * hb_pow @ f_pow,
        qt=dist * hb_pow @ t_rows,
        sig_e=scale * lin * np.sum(np.abs(ae @ w.f_bb) ** 2),
        an_e=scale * lin * np.sum(np.abs(ae @ w.t_bb) ** 2),
        qf_e=scale * dist * ae_pow @ f_pow,
        qt_e=scale * dist * ae_pow @ t_rows,
        sigma2=cfg.sigma2,
    )


def _rnq(w, q, cfg):
    p = effective_power(cfg.p_t, q.eta)
    return quantization_noise_covariance(w.f_bb, w.t_bb, w.beta, p, q.eta)


def sinr_bob(h, w, q, cfg) -> float:
    p = effective_power(cfg.p_t, q.eta)
    lin = p * (1 - q.eta) ** 2
    hb = h.h @ w.f_rf
    num = w.beta * lin * abs(hb @ w.f_bb) ** 2
    interf = (1 - w.beta) * lin * np.linalg.norm(hb @ w.t_bb) ** 2
    qnoise = np.real(hb @ _rnq(w, q, cfg) @ hb.conj())
    return num / (interf + qnoise + cfg.sigma2)


def rate_bob(h: ChannelRealization, w: HybridPrecoder, q: QuantizationModel,
             cfg: SystemConfig) -> float:
    """Achievable rate of Bob in bits/s/Hz."""
    return float(np.log2(1 + sinr_bob(h, w, q, cfg)))


def expected_sinr_eve(stats: EveChannelStats, w: HybridPrecoder, q: QuantizationModel,
                      cfg: SystemConfig) -> float:
    """Ratio-of-expectations approximation of Eve's mean SINR over her path gains."""
    p = effective_power(cfg.p_t, q.eta)
    lin = p * (1 - q.eta) ** 2
    scale = cfg.n_t / cfg.l_paths
    ae = stats.steering_e @ w.f_rf
    num = w.beta * lin * scale * np.linalg.norm(ae @ w.f_bb) ** 2
    interf = (1 - w.beta) * lin * scale * np.linalg.norm(ae @ w.t_bb) ** 2
    qnoise = scale * np.real(np.trace(ae @ _rnq(w, q, cfg) @ ae.conj().T))
    return float(num / (interf + qnoise + cfg.sigma2))


def secrecy_rate_approx(h, stats, w, q, cfg) -> float:
    """Approximate secrecy rate ``R_b - log2(1 + E[SINR_e])``; may be negative."""
    return rate_bob(h, w, q, cfg) - float(np.log2(1 + expected_sinr_eve(stats, w, q, cfg)))


def eve_rate_samples(stats, w, q, cfg, gains):
    """``log2(1 + SINR_e)`` for each row of path gains ``gains`` (n, L)."""
    p = effective_power(cfg.p_t, q.eta)
    lin = p * (1 - q.eta) ** 2
    rnq = np.real(np.diag(_rnq(w, q, cfg)))
    # y = h_e F_RF for every draw, shape (n, K)
    y = np.sqrt(cfg.n_t / cfg.l_paths) * (np.atleast_2d(gains) @ (stats.steering_e @ w.f_rf))
    num = w.beta * lin * np.abs(y @ w.f_bb) ** 2
    interf = (1 - w.beta) * lin * np.sum(np.abs(y @ w.t_bb) ** 2, axis=1)
    qnoise = np.abs(y) ** 2 @ rnq
    return np.log2(1 + num / (interf + qnoise + cfg.sigma2))


def secrecy_rate_mc(h, stats, w, q, cfg, n_samples=10_000, rng=None, gains=None,
                    chunk=20_000):
    """Monte Carlo secrecy rate ``R_b - E[log2(1 + SINR_e)]`` and its standard error.

    Eve's path gains are drawn from ``rng`` unless ``gains`` pins them.
    """
    if gains is None:
        if n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if rng is None:
            raise ValueError("an rng is required to draw Eve's gains")
        parts = []
        left = n_samples
        while left:
            m = min(left, chunk)
            # interleaved real/imaginary draws keep the stream independent of ``chunk``
            z = rng.standard_normal((m, stats.l_paths, 2))
            g = (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2)
            parts.append(eve_rate_samples(stats, w, q, cfg, g))
            left -= m
        re = np.concatenate(parts)
    else:
        re = eve_rate_samples(stats, w, q, cfg, gains)
    n = re.shape[0]
    se = float(np.std(re, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    return rate_bob(h, w, q, cfg) - float(np.mean(re)), se


@dataclass(frozen=True)
class SrCoefficients:
    """Scalar coefficients of the per-block quadratic-form rewrites.

    ``xi*``/``gamma_b`` and ``lambda*``/``gamma_e`` belong to the f_BB
    subproblem, ``alpha*``/``kappa*``/``omega*`` to the AN-matrix subproblem,
    ``mu*`` to the no-AN initialization.
    """

    xi1: float
    xi2: float
    gamma_b: float
    lambda1: float
    lambda2: float
    gamma_e: float
    alpha1: float
    alpha2: float
    alpha3: float
    alpha4: float
    kappa_b: float
    omega_b: float
    kappa_e: float
    omega_e: float
    mu1: float
    mu2: float
    mu3: float
    mu4: float


def sr_coefficients(w, h, stats, q, cfg) -> SrCoefficients:
    p = effective_power(cfg.p_t, q.eta)
    eta, beta = q.eta, w.beta
    lin = p * (1 - eta) ** 2
    dist = p * eta * (1 - eta)
    scale = cfg.n_t / cfg.l_paths
    t = link_terms(w, h, stats, q, cfg)
    # gamma_b / gamma_e collect every f_BB-independent part of the denominators
    # (AN, AN-driven DAC noise and thermal noise) so that the rewrite is exact.
    return SrCoefficients(
        xi1=beta * lin,
        xi2=beta * dist,
        gamma_b=(1 - beta) * (t.an + t.qt) + cfg.sigma2,
        lambda1=beta * lin * scale,
        lambda2=beta * dist * scale,
        gamma_e=(1 - beta) * (t.an_e + t.qt_e) + cfg.sigma2,
        alpha1=(1 - beta) * lin,
        alpha2=(1 - beta) * dist,
        alpha3=(1 - beta) * lin * scale,
        alpha4=(1 - beta) * dist * scale,
        kappa_b=beta * t.sig,
        omega_b=beta * t.qf + cfg.sigma2,
        kappa_e=beta * t.sig_e,
        omega_e=beta * t.qf_e + cfg.sigma2,
        mu1=lin,
        mu2=dist,
        mu3=lin * scale,
        mu4=dist * scale,
    )
