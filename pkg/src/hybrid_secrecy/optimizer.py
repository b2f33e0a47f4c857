"""Two-layer alternating optimization of the secure hybrid precoder.

The outer layer alternates between the analog phases (gradient ascent on the
sparse vector ``d`` of nonzeros of ``F_RF``) and the digital part; the inner
layer alternates the AN matrix ``T_BB`` and the CM precoder ``f_BB``, each
solved as a product of two Rayleigh quotients.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelRealization, EveChannelStats, SystemConfig
from .gpi import GpiSettings, RayleighProductObjective, gpi_maximize, objective_value
from .quantization import QuantizationModel, effective_power
from .rates import (HybridPrecoder, SrCoefficients, analog_matrix, link_terms,
                    sr_coefficients, unit_modulus)


class DegenerateChannelError(ValueError):
    """Bob's effective channel ``h F_RF`` vanishes."""


@dataclass(frozen=True)
class GaSettings:
    alpha0: float = 1.0
    alpha_min: float = 1e-4
    eps: float = 1e-4
    max_steps: int = 200

    def __post_init__(self):
        if not (self.alpha0 > self.alpha_min > 0) or self.eps < 0:
            raise ValueError("need alpha0 > alpha_min > 0 and eps >= 0")


@dataclass(frozen=True)
class TlaisSettings:
    ga: GaSettings = field(default_factory=GaSettings)
    gpi: GpiSettings = field(default_factory=GpiSettings)
    eps: float = 1e-4
    max_outer: int = 20
    max_inner: int = 50
    with_an: bool = True


# -- quadratic forms over the analog vector d ---------------------------------

def build_gamma(f_small, a, n_sub=None):
    """Sparse extraction of ``f_small^T``-weighted ``kron`` blocks.

    Block ``(m, n)`` (size ``n_sub``) of the result is
    ``f_small[m, n] * a[block m, block n]`` so that
    ``d^H Gamma d == vec(F_RF)^H (f_small kron a) vec(F_RF)``.
    """
    f_small = np.atleast_2d(np.asarray(f_small))
    a = np.asarray(a)
    k = f_small.shape[0]
    if f_small.shape != (k, k) or a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] % k:
        raise ValueError(f"incompatible shapes {f_small.shape} and {a.shape}")
    n_sub = a.shape[0] // k if n_sub is None else n_sub
    if n_sub * k != a.shape[0]:
        raise ValueError("a must be (k*n_sub) x (k*n_sub)")
    return a * np.repeat(np.repeat(f_small, n_sub, axis=0), n_sub, axis=1)


def _rnq_diag(w, c: SrCoefficients):
    return c.xi2 * np.abs(w.f_bb) ** 2 + c.alpha2 * np.sum(np.abs(w.t_bb) ** 2, axis=1)


def analog_objective_matrices(w: HybridPrecoder, h: ChannelRealization, stats: EveChannelStats,
                              coeffs: SrCoefficients, cfg: SystemConfig) -> RayleighProductObjective:
    """Objective over ``d``: ``(A_b1 / A_b2) * (A_e2 / A_e1)``."""
    k = w.k
    scale = cfg.n_t / cfg.l_paths
    h_b = np.outer(h.h.conj(), h.h)
    a_e = stats.steering_e.conj().T @ stats.steering_e
    ff = np.outer(w.f_bb, w.f_bb.conj()).T
    tt = (w.t_bb @ w.t_bb.conj().T).T
    rnq = np.diag(_rnq_diag(w, coeffs))
    noise = cfg.sigma2 / k * np.eye(cfg.n_t)
    a_b2 = build_gamma(coeffs.alpha1 * tt + rnq, h_b) + noise
    a_b1 = a_b2 + build_gamma(coeffs.xi1 * ff, h_b)
    a_e2 = build_gamma(coeffs.alpha3 * tt + scale * rnq, a_e) + noise
    a_e1 = a_e2 + build_gamma(coeffs.lambda1 * ff, a_e)
    return RayleighProductObjective(a_b1, a_b2, a_e2, a_e1)


def analog_gradient(d, obj: RayleighProductObjective):
    """Conjugate gradient of ``log2(f(d) g(d))``; equals half of ``dR/dRe + j dR/dIm``."""
    d = np.asarray(d, dtype=complex)
    ab1, ab2, ae2, ae1 = obj.a1 @ d, obj.b1 @ d, obj.a2 @ d, obj.b2 @ d
    qb1, qb2 = np.vdot(d, ab1).real, np.vdot(d, ab2).real
    qe2, qe1 = np.vdot(d, ae2).real, np.vdot(d, ae1).real
    f, g = qb1 / qb2, qe2 / qe1
    df = (ab1 * qb2 - qb1 * ab2) / qb2 ** 2
    dg = (ae2 * qe1 - qe2 * ae1) / qe1 ** 2
    return (df * g + f * dg) / (f * g * np.log(2))


# -- power allocation -----------------------------------------------------------

def beta_grid(step: float) -> np.ndarray:
    n = int(round(1 / step))
    return np.linspace(0.0, 1.0, n + 1)


def pa_search(w, h, stats, q, cfg, return_value=False):
    """Grid search for the PA factor; ties go to the larger ``beta``."""
    grid = beta_grid(cfg.beta_grid_step)
    vals = link_terms(w, h, stats, q, cfg).secrecy_rate(grid)
    best = np.max(vals)
    idx = np.flatnonzero(vals >= best - 1e-12 * max(1.0, abs(best)))[-1]
    if return_value:
        return float(grid[idx]), float(vals[idx])
    return float(grid[idx])


def _score(w, h, stats, q, cfg, with_an):
    """Best PA factor for ``w`` and the resulting approximate secrecy rate."""
    if with_an:
        return pa_search(w, h, stats, q, cfg, return_value=True)
    return 1.0, float(link_terms(w, h, stats, q, cfg).secrecy_rate(1.0))


def sr_value(w, h, stats, q, cfg) -> float:
    return float(link_terms(w, h, stats, q, cfg).secrecy_rate(w.beta))


# -- analog precoder: gradient ascent -----------------------------------------

@dataclass(frozen=True)
class GaResult:
    precoder: HybridPrecoder
    trace: tuple
    steps: int
    accepted: int


def ga_analog(w, h, stats, q, cfg, ga: GaSettings | None = None, with_an=True) -> GaResult:
    """Gradient ascent on the analog phases with step halving on rejection."""
    ga = ga or GaSettings()
    n_sub = cfg.n_sub
    r_cur = sr_value(w, h, stats, q, cfg)
    trace = [r_cur]
    alpha = ga.alpha0
    steps = accepted = 0
    grad = None
    while alpha > ga.alpha_min and steps < ga.max_steps:
        if grad is None:
            obj = analog_objective_matrices(w, h, stats, sr_coefficients(w, h, stats, q, cfg), cfg)
            grad = analog_gradient(w.d, obj)
            if np.linalg.norm(grad) <= 1e-14 * np.linalg.norm(w.d):
                break
        cand_d = unit_modulus(np.angle(w.d + alpha * grad), n_sub)
        cand = w.with_(d=cand_d)
        beta, r_new = _score(cand, h, stats, q, cfg, with_an)
        steps += 1
        if r_new - r_cur > ga.eps:
            w, r_cur = cand.with_(beta=beta), r_new
            trace.append(r_cur)
            accepted += 1
            grad = None
        else:
            alpha /= 2
    return GaResult(w, tuple(trace), steps, accepted)


# -- digital precoders ------------------------------------------------------------

def _effective(w, h, stats):
    f_rf = w.f_rf
    hb = h.h @ f_rf
    ae = stats.steering_e @ f_rf
    return np.outer(hb.conj(), hb), ae.conj().T @ ae


def digital_cm_objective(w, h, stats, q, cfg) -> RayleighProductObjective:
    """Objective over ``f_BB``: ``(Q_b / P_b) * (P_e / Q_e)``."""
    c = sr_coefficients(w, h, stats, q, cfg)
    g_b, g_e = _effective(w, h, stats)
    eye = np.eye(w.k)
    p_b = c.xi2 * np.diag(np.diag(g_b)) + c.gamma_b * eye
    q_b = p_b + c.xi1 * g_b
    p_e = c.lambda2 * np.diag(np.diag(g_e)) + c.gamma_e * eye
    q_e = p_e + c.lambda1 * g_e
    return RayleighProductObjective(q_b, p_b, p_e, q_e)


def vec(t):
    return np.asarray(t).reshape(-1, order="F")


def unvec(x, k):
    return np.asarray(x).reshape(k, k, order="F")


def anpm_matrices(w, h, stats, q, cfg):
    """The ``K x K`` matrices ``(E_b, F_b, F_e, E_e)`` of the AN-matrix subproblem."""
    c = sr_coefficients(w, h, stats, q, cfg)
    g_b, g_e = _effective(w, h, stats)
    eye = np.eye(w.k)
    f_b = c.alpha1 * g_b + c.alpha2 * np.diag(np.diag(g_b)) + c.omega_b * eye
    e_b = f_b + c.kappa_b * eye
    f_e = c.alpha3 * g_e + c.alpha4 * np.diag(np.diag(g_e)) + c.omega_e * eye
    e_e = f_e + c.kappa_e * eye
    return e_b, f_b, f_e, e_e


def anpm_objective(w, h, stats, q, cfg) -> RayleighProductObjective:
    """Objective over ``vec(T_BB)`` built from ``I_K kron`` the per-column matrices."""
    eye = np.eye(w.k)
    return RayleighProductObjective(*(np.kron(eye, m) for m in anpm_matrices(w, h, stats, q, cfg)))


def solve_anpm(w, h, stats, q, cfg, gpi: GpiSettings | None = None):
    """Best AN matrix for fixed ``F_RF``, ``f_BB`` and ``beta``.

    The objective over ``vec(T_BB)`` depends on ``T_BB`` only through
    ``S = T_BB T_BB^H`` via ``tr(F_b S)`` and ``tr(F_e S)``. The joint
    numerical range of two Hermitian matrices is convex, so every value
    reachable with a general ``S`` is reachable with a rank-one ``S = t t^H``
    and the ``K^2``-dimensional problem reduces to a ``K``-dimensional one in
    ``t``; ``T_BB = t z^H`` for any unit ``z``. If the reduced solution does not
    beat the current matrix, the full problem is warm-started instead.
    Returns ``(t_bb, value)``.
    """
    gpi = gpi or GpiSettings()
    k = w.k
    mats = anpm_matrices(w, h, stats, q, cfg)
    full = RayleighProductObjective(*(np.kron(np.eye(k), m) for m in mats))
    cur = objective_value(full, vec(w.t_bb))
    u, _, vh = np.linalg.svd(w.t_bb)
    res = gpi_maximize(RayleighProductObjective(*mats), gpi, x0=u[:, 0])
    if res.value >= cur:
        t = res.x / np.linalg.norm(res.x)
        return np.outer(t, vh[0]), res.value
    res = gpi_maximize(full, gpi, x0=vec(w.t_bb), starts=[])
    return unvec(res.x / np.linalg.norm(res.x), k), res.value


@dataclass(frozen=True)
class InnerResult:
    precoder: HybridPrecoder
    trace: tuple
    iterations: int


def inner_loop(w, h, stats, q, cfg, eps=1e-4, with_an=True, max_iter=50,
               gpi: GpiSettings | None = None) -> InnerResult:
    """Alternate the AN matrix and the CM precoder for a fixed analog part."""
    gpi = gpi or GpiSettings()
    k = w.k
    beta, r_cur = _score(w, h, stats, q, cfg, with_an)
    r_in = sr_value(w, h, stats, q, cfg)
    if r_in > r_cur:
        beta, r_cur = w.beta, r_in
    w = w.with_(beta=beta)
    if w.beta == 0:
        # without message power both digital subproblems are flat in f_BB;
        # restart the message precoder from the no-AN solution instead
        f_bb = init_digital_cm(w.d, h, stats, q, cfg, gpi)
        beta_f, r_f = _score(w.with_(f_bb=f_bb), h, stats, q, cfg, with_an)
        if r_f > r_cur:
            w, r_cur = w.with_(f_bb=f_bb, beta=beta_f), r_f
    trace = [r_cur]
    it = 0
    while it < max_iter:
        it += 1
        if with_an:
            w = w.with_(t_bb=solve_anpm(w, h, stats, q, cfg, gpi)[0])
        res = gpi_maximize(digital_cm_objective(w, h, stats, q, cfg), gpi, x0=w.f_bb)
        w = w.with_(f_bb=res.x / np.linalg.norm(res.x))
        beta, r_new = _score(w, h, stats, q, cfg, with_an)
        # the grid may miss a current off-grid beta; never step backwards
        r_keep = sr_value(w, h, stats, q, cfg)
        if r_keep > r_new:
            beta, r_new = w.beta, r_keep
        w = w.with_(beta=beta)
        trace.append(r_new)
        improved = r_new - r_cur
        r_cur = r_new
        if improved <= eps:
            break
    return InnerResult(w, tuple(trace), it)


# -- initialization -----------------------------------------------------------------

def _no_an_objective(g_b, g_e, q, cfg):
    """``(X_b / Y_b) * (Y_e / X_e)`` with all power on the CM (``beta = 1``)."""
    p = effective_power(cfg.p_t, q.eta)
    scale = cfg.n_t / cfg.l_paths
    mu1, mu2 = p * (1 - q.eta) ** 2, p * q.eta * (1 - q.eta)
    eye = np.eye(g_b.shape[0])
    y_b = mu2 * np.diag(np.diag(g_b)) + cfg.sigma2 * eye
    x_b = y_b + mu1 * g_b
    y_e = scale * mu2 * np.diag(np.diag(g_e)) + cfg.sigma2 * eye
    x_e = y_e + scale * mu1 * g_e
    return RayleighProductObjective(x_b, y_b, y_e, x_e)


def fully_digital_precoder(h, stats, q, cfg, gpi: GpiSettings | None = None):
    """No-AN fully digital precoder ``f_FD`` (length ``n_t``) maximizing the approximate SR."""
    g_b = np.outer(h.h.conj(), h.h)
    g_e = stats.steering_e.conj().T @ stats.steering_e
    obj = _no_an_objective(g_b, g_e, q, cfg)
    return gpi_maximize(obj, gpi).x


def init_analog(h, stats, q, cfg, gpi: GpiSettings | None = None):
    """Quantized phases of the fully digital solution, one subarray per RF chain.

    Returns the analog vector ``d``; ``analog_matrix(d, k)`` gives ``F_RF``.
    """
    f_fd = fully_digital_precoder(h, stats, q, cfg, gpi)
    return unit_modulus(q.quantize(np.angle(f_fd)), cfg.n_sub)


def init_digital_cm(d, h, stats, q, cfg, gpi: GpiSettings | None = None):
    """No-AN digital CM precoder for a fixed analog part (unit norm)."""
    f_rf = analog_matrix(d, cfg.k)
    hb = h.h @ f_rf
    ae = stats.steering_e @ f_rf
    obj = _no_an_objective(np.outer(hb.conj(), hb), ae.conj().T @ ae, q, cfg)
    x = gpi_maximize(obj, gpi).x
    # fix the irrelevant global phase: first nonzero entry real positive
    j = int(np.flatnonzero(np.abs(x) > 1e-12)[0])
    return x * (abs(x[j]) / x[j]) / np.linalg.norm(x)


def nsp_projector(d, h, cfg):
    """Unnormalized projector onto the null space of ``h F_RF``."""
    hb = h.h @ analog_matrix(d, cfg.k)
    nrm2 = np.vdot(hb, hb).real
    if nrm2 <= 1e-300:
        raise DegenerateChannelError("effective channel h F_RF is zero")
    return np.eye(cfg.k) - np.outer(hb.conj(), hb) / nrm2


def init_anpm(d, h, cfg):
    """Null-space-projection AN matrix with unit Frobenius norm.

    With a single RF chain the null space is empty; the only feasible
    1x1 matrix ``[[1]]`` is returned.
    """
    proj = nsp_projector(d, h, cfg)
    nrm = np.linalg.norm(proj)
    if nrm < 1e-12:
        return np.eye(cfg.k, dtype=complex) / np.sqrt(cfg.k)
    return proj / nrm


def initial_precoder(h, stats, q, cfg, with_an=True, gpi=None) -> HybridPrecoder:
    d = init_analog(h, stats, q, cfg, gpi)
    w = HybridPrecoder(d, init_digital_cm(d, h, stats, q, cfg, gpi), init_anpm(d, h, cfg), 1.0)
    if with_an:
        w = w.with_(beta=pa_search(w, h, stats, q, cfg))
    return w


# -- baselines ------------------------------------------------------------------------

def mrt_precoder(h, stats, q, cfg, with_an=True, d=None, gpi=None) -> HybridPrecoder:
    """Matched filter on the effective channel through the initial analog precoder."""
    if d is None:
        d = init_analog(h, stats, q, cfg, gpi)
    hb = h.h @ analog_matrix(d, cfg.k)
    nrm = np.linalg.norm(hb)
    if nrm <= 1e-150:
        raise DegenerateChannelError("effective channel h F_RF is zero")
    w = HybridPrecoder(d, hb.conj() / nrm, init_anpm(d, h, cfg), 1.0)
    if with_an:
        w = w.with_(beta=pa_search(w, h, stats, q, cfg))
    return w


# -- outer loop ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OuterRecord:
    sr: float
    beta: float
    inner_iterations: int
    ga_steps: int
    wall_s: float


@dataclass(frozen=True)
class TlaisReport:
    """Outer-iteration records plus the final on-grid precoder.

    ``records`` trace the continuous-phase iterates (nondecreasing in
    ``sr``); ``precoder`` is the best precoder found whose phases lie on the
    ``b_ps`` grid and ``sr`` its approximate secrecy rate.
    """

    records: tuple
    precoder: HybridPrecoder
    sr: float
    initial_sr: float

    @property
    def trace(self):
        return tuple(r.sr for r in self.records)

    @property
    def outer_iterations(self) -> int:
        return len(self.records) - 1


def quantize_analog(w: HybridPrecoder, q: QuantizationModel) -> HybridPrecoder:
    return w.with_(d=unit_modulus(q.quantize(np.angle(w.d)), w.n_sub))


def polish_phases(w, h, stats, q, cfg, with_an=True, max_sweeps=10):
    """Greedy coordinate ascent on the phase grid with the digital part fixed.

    Each sweep tries moving every phase one grid step either way and keeps a
    move whenever it raises the (PA-optimized) approximate secrecy rate.
    Returns the polished precoder and its rate.
    """
    n_sub = w.n_sub
    step = 2 * np.pi / 2 ** q.b_ps
    idx = np.rint(np.mod(np.angle(w.d), 2 * np.pi) / step).astype(int) % 2 ** q.b_ps
    beta, r_cur = _score(w, h, stats, q, cfg, with_an)
    w = w.with_(beta=beta)
    for _ in range(max_sweeps):
        moved = False
        for m in range(idx.shape[0]):
            for delta in (1, -1):
                cand_idx = idx.copy()
                cand_idx[m] = (cand_idx[m] + delta) % 2 ** q.b_ps
                cand = w.with_(d=unit_modulus(cand_idx * step, n_sub))
                b, r = _score(cand, h, stats, q, cfg, with_an)
                if r > r_cur + 1e-12:
                    idx, w, r_cur, moved = cand_idx, cand.with_(beta=b), r, True
                    break
        if not moved:
            break
    return w, r_cur


def _on_grid(w, h, stats, q, cfg, s):
    """Quantize the analog phases, polish them on the grid and re-fit the digital part."""
    w = quantize_analog(w, q)
    r_prev = -np.inf
    for _ in range(3):
        w, _ = polish_phases(w, h, stats, q, cfg, s.with_an)
        inner = inner_loop(w, h, stats, q, cfg, s.eps, s.with_an, s.max_inner, s.gpi)
        w, r = inner.precoder, inner.trace[-1]
        if r - r_prev <= s.eps:
            break
        r_prev = r
    return w, r


def tlais(h, stats, q, cfg, settings: TlaisSettings | None = None) -> TlaisReport:
    """Two-layer alternating iterative structure.

    The outer iterations run with continuous analog phases; the result is
    then projected onto the phase grid, polished there and compared with the
    (already on-grid) initial solution.
    """
    s = settings or TlaisSettings()
    t0 = time.perf_counter()
    w0 = initial_precoder(h, stats, q, cfg, s.with_an, s.gpi)
    inner = inner_loop(w0, h, stats, q, cfg, s.eps, s.with_an, s.max_inner, s.gpi)
    w = inner.precoder
    r_prev = inner.trace[-1]
    records = [OuterRecord(r_prev, w.beta, inner.iterations, 0, time.perf_counter() - t0)]
    grid_w, grid_r = w, r_prev
    for _ in range(s.max_outer):
        t1 = time.perf_counter()
        ga = ga_analog(w, h, stats, q, cfg, s.ga, s.with_an)
        inner = inner_loop(ga.precoder, h, stats, q, cfg, s.eps, s.with_an, s.max_inner, s.gpi)
        w = inner.precoder
        r_new = inner.trace[-1]
        records.append(OuterRecord(r_new, w.beta, inner.iterations, ga.steps,
                                   time.perf_counter() - t1))
        if r_new - r_prev <= s.eps:
            break
        r_prev = r_new
    wq, rq = _on_grid(w, h, stats, q, cfg, s)
    if rq > grid_r:
        grid_w, grid_r = wq, rq
    return TlaisReport(tuple(records), grid_w, grid_r, records[0].sr)
