"""Bussgang linearization, least squares, and the covariance recursion."""

import numpy as np
import pytest

from onebit_mimo.estimator import (
    BussgangOperator,
    EstimatorState,
    blmmse_estimate,
    bussgang_gain,
    cov_yp,
    cov_yp_diag,
    estimate_channel_pipeline,
    instantaneous_estimate,
    lra_ls_estimate,
    make_bussgang_operator,
    symbol_pulse,
    update_rhat,
)
from onebit_mimo.model import SystemConfig, build_phi, combined_pulse
from onebit_mimo.simulate import (
    QuantizedBatch,
    draw_channel,
    noise_var_from_snr_db,
    orthogonal_pilots,
    simulate_pilot_batch,
    substream,
)


def _random_psd(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return a @ a.conj().T / n


def test_bussgang_gain_known_value():
    gains = bussgang_gain(np.full(5, 2.0))
    np.testing.assert_allclose(gains, 1.0 / np.sqrt(np.pi), rtol=1e-15)


def test_bussgang_gain_rejects_nonpositive_diagonal():
    with pytest.raises(ValueError):
        bussgang_gain(np.array([1.0, 0.0, 2.0]))


def test_cov_yp_hermitian_and_positive():
    cfg = SystemConfig(2, 2, 2, 4)
    rng = substream(51)
    pilots = orthogonal_pilots(cfg.block_len, cfg.n_users, rng)
    phi = build_phi(pilots, cfg.n_rx, cfg.oversampling, cfg.rolloff)
    c = cov_yp(phi, np.eye(cfg.n_coefficients), 0.7, cfg)
    np.testing.assert_array_equal(c, c.conj().T)
    assert np.linalg.eigvalsh(c).min() > 0.0


@pytest.mark.parametrize("dims", [(2, 2, 1, 6), (2, 3, 2, 4), (3, 2, 2, 6)])
def test_cov_yp_diag_matches_dense(dims):
    cfg = SystemConfig(*dims)
    rng = substream(52, *dims)
    pilots = orthogonal_pilots(cfg.block_len, cfg.n_users, rng)
    phi = build_phi(pilots, cfg.n_rx, cfg.oversampling, cfg.rolloff)
    r_h = _random_psd(rng, cfg.n_coefficients)
    dense = np.real(np.diagonal(cov_yp(phi, r_h, 0.9, cfg)))
    fast = cov_yp_diag(phi, r_h, 0.9, cfg)
    np.testing.assert_allclose(fast, dense, rtol=1e-12, atol=1e-12)


def test_cov_yp_diag_zero_channel_is_noise_floor():
    cfg = SystemConfig(2, 2, 2, 4)
    rng = substream(53)
    pilots = orthogonal_pilots(cfg.block_len, cfg.n_users, rng)
    phi = build_phi(pilots, cfg.n_rx, cfg.oversampling, cfg.rolloff)
    diag = cov_yp_diag(phi, np.zeros((cfg.n_coefficients,) * 2), 0.35, cfg)
    np.testing.assert_allclose(diag, 0.35, rtol=1e-13)


def test_cov_yp_rejects_wrong_prior_shape():
    cfg = SystemConfig(2, 2, 1, 4)
    rng = substream(54)
    pilots = orthogonal_pilots(cfg.block_len, cfg.n_users, rng)
    phi = build_phi(pilots, cfg.n_rx, cfg.oversampling, cfg.rolloff)
    with pytest.raises(ValueError):
        cov_yp(phi, np.eye(3), 0.5, cfg)


def test_make_bussgang_operator_clamps_zero_variance():
    phi = np.eye(3, dtype=complex)
    op = make_bussgang_operator(phi, np.zeros(3))
    assert np.all(op.c_yp_diag == 1e-12)
    assert np.all(np.isfinite(op.a_p))
    np.testing.assert_allclose(op.phi_eff, op.a_p[:, None] * phi)


def test_lra_ls_recovers_channel_without_noise():
    cfg = SystemConfig(2, 3, 2, 6)
    rng = substream(55)
    pilots = orthogonal_pilots(cfg.block_len, cfg.n_users, rng)
    phi = build_phi(pilots, cfg.n_rx, cfg.oversampling, cfg.rolloff)
    h = draw_channel(rng, cfg).h_true
    y = phi @ h
    batch = QuantizedBatch(y_unquantized=y, y_quantized=y, phi=phi, noise_var=0.0)
    op = BussgangOperator(a_p=np.ones(len(y)), c_yp_diag=np.ones(len(y)), phi_eff=phi)
    h_hat = lra_ls_estimate(batch, op)
    np.testing.assert_allclose(h_hat, h, atol=1e-10)


def test_lra_ls_raises_on_rank_deficient_pilots():
    cfg = SystemConfig(2, 2, 1, 4)
    rng = substream(56)
    pilots = orthogonal_pilots(cfg.block_len, cfg.n_users, rng)
    pilots[:, 1] = pilots[:, 0]
    phi = build_phi(pilots, cfg.n_rx, cfg.oversampling, cfg.rolloff)
    y = np.ones(phi.shape[0], dtype=complex)
    batch = QuantizedBatch(y_unquantized=y, y_quantized=y, phi=phi, noise_var=0.0)
    op = BussgangOperator(a_p=np.ones(len(y)), c_yp_diag=np.ones(len(y)), phi_eff=phi)
    with pytest.raises(ValueError, match="rank deficient"):
        lra_ls_estimate(batch, op)


def test_symbol_pulse_reads_combined_pulse_tail():
    for m in (1, 2, 3):
        v = symbol_pulse(m, 6, 0.8)
        z = combined_pulse(m, 6, 0.8)
        center = len(z) // 2
        np.testing.assert_array_equal(v, z[[center + (m - 1 - k) for k in range(m)]])
        assert v[-1] == 1.0
    np.testing.assert_array_equal(symbol_pulse(1, 6, 0.8), [1.0])


def test_instantaneous_estimate_matches_pseudo_inverse():
    m, n_rx, n_users = 2, 3, 2
    rng = substream(57)
    x = (rng.standard_normal(n_users) + 1j * rng.standard_normal(n_users)) / np.sqrt(2)
    v = symbol_pulse(m, 8, 0.8)
    samples = rng.standard_normal(n_rx * m) + 1j * rng.standard_normal(n_rx * m)

    got = instantaneous_estimate(samples, x, v)

    a = np.kron(x[None, :], np.kron(np.eye(n_rx), v[:, None]))
    expected = np.linalg.pinv(a) @ samples
    np.testing.assert_allclose(got, expected, atol=1e-12)


def test_instantaneous_estimate_rejects_zero_pilot():
    with pytest.raises(ValueError):
        instantaneous_estimate(np.ones(4, dtype=complex), np.zeros(2), np.array([1.0, 0.5]))


def test_update_rhat_recursion():
    h = np.array([1.0 + 1.0j, -0.5j])
    state = EstimatorState(r_hat=np.eye(2, dtype=complex), forgetting=0.5)
    new = update_rhat(state, h)
    expected = 0.5 * np.eye(2) + np.outer(h, h.conj())
    np.testing.assert_allclose(new.r_hat, expected, atol=1e-14)
    np.testing.assert_array_equal(new.r_hat, new.r_hat.conj().T)
    assert new.step == 2
    assert new.forgetting == 0.5


def test_pipeline_adaptive_runs_full_recursion():
    cfg = SystemConfig(2, 2, 2, 6)
    rng = substream(58)
    pilots = orthogonal_pilots(cfg.block_len, cfg.n_users, rng)
    state = draw_channel(rng, cfg)
    batch = simulate_pilot_batch(rng, state, pilots, cfg, noise_var=1.0)
    h_hat, est_state = estimate_channel_pipeline(batch, pilots, cfg, forgetting=0.91)
    assert h_hat.shape == (cfg.n_coefficients,)
    assert np.all(np.isfinite(h_hat.view(float)))
    assert est_state.step == cfg.block_len + 1
    np.testing.assert_allclose(est_state.r_hat, est_state.r_hat.conj().T, atol=1e-12)


def test_pipeline_genie_prior_skips_recursion():
    cfg = SystemConfig(2, 2, 1, 8)
    rng = substream(59)
    pilots = orthogonal_pilots(cfg.block_len, cfg.n_users, rng)
    state = draw_channel(rng, cfg)
    batch = simulate_pilot_batch(rng, state, pilots, cfg, noise_var=0.5)
    prior = np.eye(cfg.n_coefficients, dtype=complex)
    h_hat, est_state = estimate_channel_pipeline(batch, pilots, cfg, forgetting=0.91, r_hat=prior)
    assert est_state.step == 1
    np.testing.assert_array_equal(est_state.r_hat, prior)
    assert h_hat.shape == (cfg.n_coefficients,)


def test_pipeline_estimates_track_channel():
    cfg = SystemConfig(2, 4, 1, 24)
    noise_var = noise_var_from_snr_db(0.0, cfg.n_users)
    errs = []
    for trial in range(30):
        rng = substream(60, trial)
        pilots = orthogonal_pilots(cfg.block_len, cfg.n_users, rng)
        state = draw_channel(rng, cfg)
        batch = simulate_pilot_batch(rng, state, pilots, cfg, noise_var)
        h_hat, _ = estimate_channel_pipeline(batch, pilots, cfg, forgetting=0.91)
        errs.append(
            np.linalg.norm(h_hat - state.h_true) ** 2 / np.linalg.norm(state.h_true) ** 2
        )
    nmse_db = 10.0 * np.log10(np.mean(errs))
    assert nmse_db < -2.0


def test_blmmse_baseline_reduces_error():
    cfg = SystemConfig(2, 4, 1, 16)
    rng = substream(61)
    pilots = orthogonal_pilots(cfg.block_len, cfg.n_users, rng)
    state = draw_channel(rng, cfg)
    batch = simulate_pilot_batch(rng, state, pilots, cfg, noise_var=0.5)
    h_hat = blmmse_estimate(batch, np.eye(cfg.n_coefficients), cfg)
    assert h_hat.shape == (cfg.n_coefficients,)
    err = np.linalg.norm(h_hat - state.h_true) ** 2 / np.linalg.norm(state.h_true) ** 2
    assert err < 1.0
