"""One-bit quantization and its closed-form output statistics.

Simulates a tiny oversampled link, pushes the received samples through
the complex sign quantizer, and compares Monte Carlo moments of the
quantizer output against the analytic mean and covariance built from
Gaussian orthant probabilities.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from onebit_mimo.fisher import quantized_cov, quantized_mean
from onebit_mimo.model import SystemConfig, build_g, build_phi
from onebit_mimo.simulate import (
    draw_channel,
    noise_var_from_snr_db,
    orthogonal_pilots,
    quantize,
    substream,
)

HERE = pathlib.Path(__file__).resolve().parent

cfg = SystemConfig(n_users=1, n_rx=1, oversampling=2, block_len=4)
rng = substream(42)
pilots = orthogonal_pilots(cfg.block_len, cfg.n_users, rng)
h = draw_channel(rng, cfg).h_true
phi = build_phi(pilots, cfg.n_rx, cfg.oversampling, cfg.rolloff)
noise_var = noise_var_from_snr_db(0.0, cfg.n_users)
g = build_g(cfg.oversampling, cfg.block_len, cfg.rolloff)
c_n = noise_var * (g @ g.T)

mu_r, mu_i = quantized_mean(phi, h, c_n)
cov_r, cov_i = quantized_cov(phi, h, c_n)
k = phi.shape[0]
print(f"{k} complex samples per block, noise variance {noise_var:g}")
print("analytic quantized means (real channel):", np.round(mu_r, 4))

n_draws = 200_000
a = phi @ h
w = np.sqrt(noise_var / 2.0) * (
    rng.standard_normal((n_draws, g.shape[1])) + 1j * rng.standard_normal((n_draws, g.shape[1]))
)
q = quantize(a + w @ g.T)
emp_mu_r = q.real.mean(axis=0)
emp_cov_r = q.real.T @ q.real / n_draws - np.outer(emp_mu_r, emp_mu_r)

print("empirical means  (real channel):", np.round(emp_mu_r, 4))
print(f"worst mean error: {np.max(np.abs(emp_mu_r - mu_r)):.2e}")
print(f"worst covariance error: {np.max(np.abs(emp_cov_r - cov_r)):.2e}")
print("(both shrink as 1/sqrt(draws); the analytic values are exact)")

fig, axes = plt.subplots(1, 2, figsize=(9, 4))
pairs_theory = cov_r[np.triu_indices(k)]
pairs_emp = emp_cov_r[np.triu_indices(k)]
axes[0].plot(pairs_theory, pairs_emp, "o", ms=5)
lims = [min(pairs_theory.min(), 0) - 0.02, pairs_theory.max() + 0.02]
axes[0].plot(lims, lims, "k--", lw=0.8)
axes[0].set_xlabel("analytic covariance entry")
axes[0].set_ylabel(f"Monte Carlo ({n_draws} draws)")
axes[0].set_title("quantizer output covariance")

im = axes[1].imshow(cov_r, cmap="RdBu_r", vmin=-0.5, vmax=0.5)
axes[1].set_title("analytic C_yQ (real channel)")
fig.colorbar(im, ax=axes[1], shrink=0.8)
fig.tight_layout()
out = HERE / "02_quantizer_moments.png"
fig.savefig(out, dpi=120)
print(f"wrote {out}")
