"""Bussgang linearization and low-resolution aware least squares.

The quantizer output is decomposed as y_Q = A_p y + n_q with a diagonal
gain A_p fixed by the input covariance; least squares on the linearized
model then estimates the channel. The covariance of the channel vector
that enters A_p is either supplied (genie) or accumulated on the fly
from cheap per-symbol estimates with exponential forgetting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve

from .model import SystemConfig, build_g, combined_pulse, symbol_view
from .simulate import QuantizedBatch

_SQRT_2_OVER_PI = np.sqrt(2.0 / np.pi)
_DIAG_CLAMP = 1e-12


@dataclass
class BussgangOperator:
    """Diagonal Bussgang gain and the effective observation matrix."""

    a_p: np.ndarray         # diagonal of A_p, strictly positive
    c_yp_diag: np.ndarray   # diagonal of C_yp the gain was built from
    phi_eff: np.ndarray     # A_p @ Phi_p


@dataclass
class EstimatorState:
    """Recursive estimate of the channel autocorrelation matrix."""

    r_hat: np.ndarray
    forgetting: float
    step: int = 1


def cov_yp(phi, r_h, noise_var: float, cfg: SystemConfig) -> np.ndarray:
    """Unquantized receive covariance Phi R_h Phi^H + sigma^2 (I kron G G^H)."""
    phi = np.asarray(phi)
    r_h = np.asarray(r_h)
    if r_h.shape != (phi.shape[1],) * 2:
        raise ValueError(f"r_h must be {(phi.shape[1],) * 2}, got {r_h.shape}")
    g = build_g(cfg.oversampling, cfg.block_len, cfg.rolloff)
    c = phi @ r_h @ phi.conj().T + noise_var * np.kron(np.eye(cfg.n_rx), g @ g.T)
    return 0.5 * (c + c.conj().T)


def cov_yp_diag(phi, r_h, noise_var: float, cfg: SystemConfig) -> np.ndarray:
    """diag(C_yp) without forming the full covariance.

    Phi has the block form [I kron (W x_0) | ...], so the signal part of
    each diagonal entry only mixes channel coefficients of one antenna.
    With unit-energy taps the filtered-noise part is noise_var exactly.
    """
    phi = np.asarray(phi)
    width = cfg.samples_per_antenna
    v = phi[:width, :: cfg.n_rx]  # (M*N, n_users), column t = W x_t
    r4 = np.asarray(r_h).reshape(cfg.n_users, cfg.n_rx, cfg.n_users, cfg.n_rx)
    r_per_antenna = np.diagonal(r4, axis1=1, axis2=3)  # (t, t', r)
    sig = np.einsum("st,tur,su->rs", v, r_per_antenna, v.conj()).real
    return (sig + noise_var).ravel()


def bussgang_gain(c_yp_diag) -> np.ndarray:
    """Diagonal of A_p = sqrt(2/pi) diag(C_yp)^{-1/2}."""
    d = np.real(np.asarray(c_yp_diag))
    if d.ndim == 2:
        d = np.diagonal(d).real
    if np.any(d <= 0.0):
        raise ValueError("C_yp diagonal must be strictly positive (zero-variance observation)")
    return _SQRT_2_OVER_PI / np.sqrt(d)


def make_bussgang_operator(phi, c_yp_diag) -> BussgangOperator:
    d = np.maximum(np.real(np.asarray(c_yp_diag)), _DIAG_CLAMP)
    a_p = bussgang_gain(d)
    return BussgangOperator(a_p=a_p, c_yp_diag=d, phi_eff=a_p[:, None] * np.asarray(phi))


def lra_ls_estimate(batch: QuantizedBatch, op: BussgangOperator) -> np.ndarray:
    """Least-squares channel estimate from the linearized quantized model."""
    h_hat, _, rank, _ = np.linalg.lstsq(op.phi_eff, batch.y_quantized, rcond=1e-10)
    if rank < op.phi_eff.shape[1]:
        raise ValueError(
            f"effective observation matrix is rank deficient ({rank} < {op.phi_eff.shape[1]}); "
            "pilot design too short or degenerate"
        )
    return h_hat


def symbol_pulse(oversampling: int, block_len: int, rolloff: float) -> np.ndarray:
    """Intra-symbol samples of the combined pulse, Z'u.

    Z' is the leading M x M block of Z and u selects its last column,
    so entry k is z((M-1-k)/M) and the final entry is z(0) = 1.
    """
    z = combined_pulse(oversampling, block_len, rolloff)
    center = 2 * oversampling * block_len
    k = np.arange(oversampling)
    return z[center + (oversampling - 1 - k)]


def instantaneous_estimate(y_q_n, x_n, pulse) -> np.ndarray:
    """Single-symbol channel estimate via the pseudo-inverse.

    Applies (x^T kron I kron v)^+ = conj(x)/|x|^2 kron I kron v^T/|v|^2
    to the M*n_rx samples of one symbol instant (antenna-major).
    """
    x = np.asarray(x_n, dtype=complex).ravel()
    v = np.asarray(pulse, dtype=float).ravel()
    x_energy = np.real(np.vdot(x, x))
    if x_energy == 0.0:
        raise ValueError("pilot symbol vector is all-zero")
    y = np.asarray(y_q_n).reshape(-1, v.size)
    w = (y @ v) / np.vdot(v, v).real
    return np.kron(x.conj() / x_energy, w)


def update_rhat(state: EstimatorState, h_inst) -> EstimatorState:
    """One forgetting-factor step of the autocorrelation recursion."""
    h = np.asarray(h_inst, dtype=complex).ravel()
    r = state.forgetting * state.r_hat + np.outer(h, h.conj())
    r = 0.5 * (r + r.conj().T)
    return EstimatorState(r_hat=r, forgetting=state.forgetting, step=state.step + 1)


def estimate_channel_pipeline(
    batch: QuantizedBatch,
    pilots,
    cfg: SystemConfig,
    forgetting: float,
    r_hat: np.ndarray | None = None,
):
    """Full LRA-LS pipeline on one pilot batch.

    When r_hat is None the channel autocorrelation is accumulated over
    the pilot symbols from instantaneous per-symbol estimates; passing
    a matrix (for example the true identity prior) skips the recursion.
    Returns (h_hat, EstimatorState).
    """
    pilots = np.asarray(pilots)
    n_coef = cfg.n_coefficients
    if r_hat is None:
        state = EstimatorState(
            r_hat=np.zeros((n_coef, n_coef), dtype=complex), forgetting=forgetting
        )
        pulse = symbol_pulse(cfg.oversampling, cfg.block_len, cfg.rolloff)
        per_symbol = symbol_view(
            batch.y_quantized, cfg.oversampling, cfg.block_len, cfg.n_rx
        )
        for n in range(cfg.block_len):
            h_n = instantaneous_estimate(per_symbol[n], pilots[n], pulse)
            state = update_rhat(state, h_n)
    else:
        state = EstimatorState(r_hat=np.asarray(r_hat), forgetting=forgetting)

    diag = cov_yp_diag(batch.phi, state.r_hat, batch.noise_var, cfg)
    op = make_bussgang_operator(batch.phi, diag)
    return lra_ls_estimate(batch, op), state


def blmmse_estimate(batch: QuantizedBatch, r_h, cfg: SystemConfig) -> np.ndarray:
    """Bussgang LMMSE baseline using the arcsine law for C_yQ.

    Provided for comparison runs only; the LRA-LS pipeline above is the
    primary estimator.
    """
    c_yp = cov_yp(batch.phi, r_h, batch.noise_var, cfg)
    d = np.sqrt(np.maximum(np.real(np.diagonal(c_yp)), _DIAG_CLAMP))
    corr = c_yp / np.outer(d, d)
    c_yq = (2.0 / np.pi) * (
        np.arcsin(np.clip(corr.real, -1.0, 1.0))
        + 1j * np.arcsin(np.clip(corr.imag, -1.0, 1.0))
    )
    a_p = _SQRT_2_OVER_PI / d
    cross = np.asarray(r_h) @ batch.phi.conj().T * a_p[None, :]
    return cross @ solve(c_yq, batch.y_quantized)
