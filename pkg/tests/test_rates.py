import numpy as np
import pytest

from pinchsim import (SystemConfig, mmse_receiver, mse_terms, mrt_equal_power,
                      sinr_and_rate, sum_rate, wmmse_objective)
from tests.conftest import grid_instance


def test_single_user_no_interference():
    cfg = SystemConfig(users=1, waveguides=1, pas_per_guide=4)
    _, _, h_eff = grid_instance(cfg, 0)
    w = np.sqrt(cfg.p_max_w) * h_eff.conj().T / np.linalg.norm(h_eff)
    rep = sinr_and_rate(h_eff, w, cfg.noise_w)
    expect = cfg.p_max_w * np.linalg.norm(h_eff) ** 2 / cfg.noise_w
    assert rep.sinr[0] == pytest.approx(expect, rel=1e-12)
    assert rep.sum_rate == pytest.approx(np.log2(1 + expect), rel=1e-12)


def test_zero_precoder_zero_rate(cfg):
    _, _, h_eff = grid_instance(cfg, 1)
    rep = sinr_and_rate(h_eff, np.zeros((cfg.waveguides, cfg.users), dtype=complex),
                        cfg.noise_w)
    assert np.all(rep.sinr == 0)
    assert rep.sum_rate == 0


def test_orthogonal_rows_no_interference():
    cfg = SystemConfig(users=2, waveguides=2, pas_per_guide=1)
    h_eff = np.array([[2.0, 0.0], [0.0, 1.0 + 1.0j]], dtype=complex)
    w = h_eff.conj().T / np.linalg.norm(h_eff.conj().T, axis=0) * np.sqrt(cfg.p_max_w / 2)
    a = h_eff @ w
    assert a[0, 1] == 0 and a[1, 0] == 0
    rep = sinr_and_rate(h_eff, w, cfg.noise_w)
    assert rep.sinr[0] == pytest.approx(np.abs(a[0, 0]) ** 2 / cfg.noise_w)


def test_sinr_invariant_to_column_phase(cfg):
    _, _, h_eff = grid_instance(cfg, 2)
    rng = np.random.default_rng(0)
    w = rng.standard_normal((cfg.waveguides, cfg.users)) * (1 + 0.3j)
    rep1 = sinr_and_rate(h_eff, w, cfg.noise_w)
    w2 = w.copy()
    w2[:, 1] *= np.exp(1j * 1.234)
    rep2 = sinr_and_rate(h_eff, w2, cfg.noise_w)
    assert np.allclose(rep1.sinr, rep2.sinr, rtol=1e-12)


def test_mse_zero_receiver(cfg):
    _, _, h_eff = grid_instance(cfg, 3)
    w = mrt_equal_power(h_eff, cfg)
    e = mse_terms(h_eff, w, np.zeros(cfg.users, dtype=complex), cfg.noise_w)
    assert np.allclose(e, 1.0)


def test_mmse_receiver_error_identity(cfg):
    # with the minimizing receiver, E_k = 1 / (1 + sinr_k)
    _, _, h_eff = grid_instance(cfg, 4)
    w = mrt_equal_power(h_eff, cfg)
    u = mmse_receiver(h_eff, w, cfg.noise_w)
    e = mse_terms(h_eff, w, u, cfg.noise_w)
    rep = sinr_and_rate(h_eff, w, cfg.noise_w)
    assert np.allclose(e, 1.0 / (1.0 + rep.sinr), rtol=1e-10)


def test_single_user_perfect_equalization():
    cfg = SystemConfig(users=1, waveguides=1, pas_per_guide=4)
    _, _, h_eff = grid_instance(cfg, 5)
    w = np.sqrt(cfg.p_max_w) * h_eff.conj().T / np.linalg.norm(h_eff)
    gain = (h_eff @ w)[0, 0]
    u = np.array([1.0 / gain])
    e = mse_terms(h_eff, w, u, cfg.noise_w)
    assert e[0] == pytest.approx(cfg.noise_w * np.abs(u[0]) ** 2, rel=1e-9)


def test_strict_paper_mse_variant(cfg):
    _, _, h_eff = grid_instance(cfg, 6)
    w = mrt_equal_power(h_eff, cfg)
    u = mmse_receiver(h_eff, w, cfg.noise_w)
    loose = mse_terms(h_eff, w, u, cfg.noise_w)
    strict = mse_terms(h_eff, w, u, cfg.noise_w, strict_paper=True)
    assert np.all(strict >= loose)
    assert np.allclose(strict - loose, (1 - cfg.noise_w) * np.abs(u) ** 2, rtol=1e-9)


def test_objective_at_optimal_weights(cfg):
    # m = 1/E gives sum(1 + ln E), which is K minus the nats sum rate at the
    # minimizing receiver
    _, _, h_eff = grid_instance(cfg, 7)
    w = mrt_equal_power(h_eff, cfg)
    u = mmse_receiver(h_eff, w, cfg.noise_w)
    e = mse_terms(h_eff, w, u, cfg.noise_w)
    obj = wmmse_objective(h_eff, w, u, 1.0 / e, cfg.noise_w)
    assert obj == pytest.approx(np.sum(1.0 + np.log(e)), rel=1e-12)
    rep = sinr_and_rate(h_eff, w, cfg.noise_w)
    assert obj == pytest.approx(cfg.users - np.log(1.0 + rep.sinr).sum(), rel=1e-9)


def test_objective_unit_weights_zero_receiver(cfg):
    _, _, h_eff = grid_instance(cfg, 8)
    w = mrt_equal_power(h_eff, cfg)
    obj = wmmse_objective(h_eff, w, np.zeros(cfg.users, dtype=complex),
                          np.ones(cfg.users), cfg.noise_w)
    assert obj == pytest.approx(float(cfg.users), rel=1e-12)


def test_objective_decreases_toward_optimal_weight(cfg):
    _, _, h_eff = grid_instance(cfg, 9)
    w = mrt_equal_power(h_eff, cfg)
    u = mmse_receiver(h_eff, w, cfg.noise_w)
    e = mse_terms(h_eff, w, u, cfg.noise_w)
    vals = []
    for frac in (0.0, 0.3, 0.7, 1.0):
        m = (1 - frac) * np.ones_like(e) + frac / e
        vals.append(wmmse_objective(h_eff, w, u, m, cfg.noise_w))
    assert all(b < a + 1e-12 for a, b in zip(vals, vals[1:]))


def test_objective_rejects_bad_weights(cfg):
    _, _, h_eff = grid_instance(cfg, 10)
    w = mrt_equal_power(h_eff, cfg)
    with pytest.raises(ValueError):
        wmmse_objective(h_eff, w, np.zeros(cfg.users, dtype=complex),
                        np.zeros(cfg.users), cfg.noise_w)


def test_rate_mse_equivalence(cfg):
    # sum rate equals sum log2(1/E) at the minimizing receiver
    for seed in range(5):
        _, _, h_eff = grid_instance(cfg, 20 + seed)
        w = mrt_equal_power(h_eff, cfg)
        u = mmse_receiver(h_eff, w, cfg.noise_w)
        e = mse_terms(h_eff, w, u, cfg.noise_w)
        assert sum_rate(h_eff, w, cfg.noise_w) == pytest.approx(
            float(np.log2(1.0 / e).sum()), abs=1e-8)
