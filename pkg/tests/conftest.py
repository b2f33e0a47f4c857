import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hybrid_secrecy.channel import SystemConfig, sample_channel, sample_eve_stats
from hybrid_secrecy.quantization import QuantizationModel
from hybrid_secrecy.rates import HybridPrecoder, unit_modulus

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_CRITERIA = []


def random_unit(rng, shape):
    x = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return x / np.linalg.norm(x)


def random_precoder(rng, cfg, beta=None):
    d = unit_modulus(rng.uniform(0, 2 * np.pi, cfg.n_t), cfg.n_sub)
    return HybridPrecoder(d, random_unit(rng, cfg.k), random_unit(rng, (cfg.k, cfg.k)),
                          float(rng.uniform()) if beta is None else beta)


def random_setup(seed, n_t=8, k=2, l_paths=4, snr_db=None, b_dac=None, b_ps=3):
    """Channel, Eve statistics, quantizer, config and a random precoder."""
    rng = np.random.default_rng(seed)
    snr_db = float(rng.uniform(-5, 20)) if snr_db is None else snr_db
    b_dac = int(rng.integers(1, 9)) if b_dac is None else b_dac
    cfg = SystemConfig.from_snr_db(snr_db, n_t=n_t, k=k, l_paths=l_paths, b_dac=b_dac, b_ps=b_ps)
    q = QuantizationModel.from_bits(b_dac, b_ps)
    h = sample_channel(cfg, rng)
    stats = sample_eve_stats(cfg, rng)
    return h, stats, q, cfg, random_precoder(rng, cfg)


@pytest.fixture
def criterion():
    """Record one acceptance line; printed in the terminal summary."""
    def record(number, title, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} -- {detail}"
        _CRITERIA.append((number, line))
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_CRITERIA, key=lambda c: c[0]):
        terminalreporter.write_line(line)
