import numpy as np
import pytest
from hypothesis import given, strategies as st

from hybrid_secrecy.channel import SystemConfig, channel_from_paths, sample_eve_gains
from hybrid_secrecy.optimizer import init_anpm
from hybrid_secrecy.quantization import QuantizationModel, effective_power
from hybrid_secrecy.rates import (HybridPrecoder, analog_matrix, eve_rate_samples,
                                  expected_sinr_eve, link_terms, rate_bob,
                                  secrecy_rate_approx, secrecy_rate_mc, sinr_bob,
                                  sr_coefficients, unit_modulus)
from conftest import random_setup
from oracles import approx_secrecy_rate, block_analog, bob_sinr, eve_mean_sinr_ratio

seeds = st.integers(0, 2 ** 32 - 1)


def test_scalar_awgn_rate():
    cfg = SystemConfig(n_t=1, k=1, l_paths=1)
    h = channel_from_paths([1.0], [0.0], 1)
    w = HybridPrecoder(np.array([1.0 + 0j]), np.array([1.0 + 0j]), np.array([[1.0 + 0j]]), 1.0)
    assert rate_bob(h, w, QuantizationModel.ideal(), cfg) == pytest.approx(1.0)


def test_precoder_invariants():
    rng = np.random.default_rng(0)
    d = unit_modulus(rng.uniform(0, 6, 8), 4)
    f_rf = analog_matrix(d, 2)
    np.testing.assert_allclose(f_rf.conj().T @ f_rf, np.eye(2), atol=1e-14)
    assert np.all(f_rf[4:, 0] == 0) and np.all(f_rf[:4, 1] == 0)
    w = HybridPrecoder(d, np.array([1, 0j]), np.eye(2) / np.sqrt(2), 0.5).check()
    with pytest.raises(ValueError):
        w.with_(beta=1.5).check()
    with pytest.raises(ValueError):
        w.with_(f_bb=np.array([1, 1j])).check()
    with pytest.raises(ValueError):
        w.with_(d=2 * d).check()


@given(seeds)
def test_rates_match_dense_oracle(seed):
    h, stats, q, cfg, w = random_setup(seed)
    f_rf = block_analog(w.d, cfg.k)
    args = (w.f_bb, w.t_bb, w.beta, cfg.p_t, q.eta, cfg.sigma2)
    assert sinr_bob(h, w, q, cfg) == pytest.approx(bob_sinr(h.h, f_rf, *args), rel=1e-10)
    assert expected_sinr_eve(stats, w, q, cfg) == pytest.approx(
        eve_mean_sinr_ratio(stats.steering_e, f_rf, *args), rel=1e-10)
    sr = secrecy_rate_approx(h, stats, w, q, cfg)
    assert sr == pytest.approx(approx_secrecy_rate(h.h, stats.steering_e, w.d, *args, cfg.k),
                               abs=1e-10)
    assert sr <= rate_bob(h, w, q, cfg)
    # the beta-rational form used by the PA search agrees with the direct evaluation
    assert link_terms(w, h, stats, q, cfg).secrecy_rate(w.beta) == pytest.approx(sr, abs=1e-12)


def test_zero_beta_and_collapse():
    h, stats, q, cfg, w = random_setup(4)
    w0 = w.with_(beta=0.0)
    assert rate_bob(h, w0, q, cfg) == 0
    assert expected_sinr_eve(stats, w0, q, cfg) == 0
    est, _ = secrecy_rate_mc(h, stats, w0, q, cfg, 200, np.random.default_rng(0))
    assert est <= 0
    ideal = QuantizationModel.ideal(3)
    w1 = w.with_(beta=1.0)
    ae = stats.steering_e @ w1.f_rf
    expect = cfg.p_t * cfg.n_t / cfg.l_paths * np.linalg.norm(ae @ w1.f_bb) ** 2 / cfg.sigma2
    assert expected_sinr_eve(stats, w1, ideal, cfg) == pytest.approx(expect, rel=1e-12)


def test_eve_moments_match_monte_carlo():
    h, stats, q, cfg, w = random_setup(7, b_dac=3)
    g = sample_eve_gains(stats, np.random.default_rng(1), 100_000)
    p = effective_power(cfg.p_t, q.eta)
    y = np.sqrt(cfg.n_t / cfg.l_paths) * g @ stats.steering_e @ w.f_rf
    sig = w.beta * p * (1 - q.eta) ** 2 * np.abs(y @ w.f_bb) ** 2
    t = link_terms(w, h, stats, q, cfg)
    assert sig.mean() == pytest.approx(w.beta * t.sig_e, rel=0.02)
    an = (1 - w.beta) * p * (1 - q.eta) ** 2 * np.sum(np.abs(y @ w.t_bb) ** 2, axis=1)
    assert an.mean() == pytest.approx((1 - w.beta) * t.an_e, rel=0.02)


def test_mc_examples():
    h, stats, q, cfg, w = random_setup(11)
    g = sample_eve_gains(stats, np.random.default_rng(0), 1)
    est, se = secrecy_rate_mc(h, stats, w, q, cfg, gains=g)
    assert se == 0
    assert est == pytest.approx(rate_bob(h, w, q, cfg) - eve_rate_samples(stats, w, q, cfg, g)[0])
    a = secrecy_rate_mc(h, stats, w, q, cfg, 10_000, np.random.default_rng(3))
    b = secrecy_rate_mc(h, stats, w, q, cfg, 100_000, np.random.default_rng(4))
    assert abs(a[0] - b[0]) <= 3 * np.hypot(a[1], b[1])
    assert secrecy_rate_mc(h, stats, w, q, cfg, 500, np.random.default_rng(9)) == \
        secrecy_rate_mc(h, stats, w, q, cfg, 500, np.random.default_rng(9))
    # chunking does not change the draws
    assert secrecy_rate_mc(h, stats, w, q, cfg, 5000, np.random.default_rng(9), chunk=700) == \
        secrecy_rate_mc(h, stats, w, q, cfg, 5000, np.random.default_rng(9))
    with pytest.raises(ValueError):
        secrecy_rate_mc(h, stats, w, q, cfg, 0, np.random.default_rng(0))


@given(seeds, st.sampled_from([0.25, 4.0, 1024.0]))
def test_snr_scale_invariance(seed, c):
    h, stats, q, cfg, w = random_setup(seed)
    scaled = SystemConfig(n_t=cfg.n_t, k=cfg.k, l_paths=cfg.l_paths, p_t=c * cfg.p_t,
                          sigma2=c * cfg.sigma2)
    assert rate_bob(h, w, q, scaled) == pytest.approx(rate_bob(h, w, q, cfg), abs=1e-9)
    assert secrecy_rate_approx(h, stats, w, q, scaled) == \
        pytest.approx(secrecy_rate_approx(h, stats, w, q, cfg), abs=1e-9)


@given(seeds)
def test_bob_rate_monotone_in_beta_with_null_space_an(seed):
    h, stats, q, cfg, w = random_setup(seed)
    w = w.with_(t_bb=init_anpm(w.d, h, cfg))
    rates = [rate_bob(h, w.with_(beta=b), q, cfg) for b in np.linspace(0, 1, 21)]
    assert all(b >= a - 1e-12 for a, b in zip(rates, rates[1:]))


@given(seeds)
def test_coefficients_nonnegative(seed):
    h, stats, q, cfg, w = random_setup(seed)
    c = sr_coefficients(w, h, stats, q, cfg)
    vals = np.array(list(vars(c).values()))
    assert np.all(vals >= 0)
    for name in ("gamma_b", "gamma_e", "omega_b", "omega_e"):
        assert getattr(c, name) >= cfg.sigma2


def test_eve_trace_form_matches_vector_form():
    h, stats, q, cfg, w = random_setup(21)
    ae = stats.steering_e @ w.f_rf
    trace_form = np.trace(ae @ np.outer(w.f_bb, w.f_bb.conj()) @ ae.conj().T).real
    vector_form = sum(abs(a @ w.f_rf @ w.f_bb) ** 2 for a in stats.steering_e)
    assert trace_form == pytest.approx(vector_form, rel=1e-12)
