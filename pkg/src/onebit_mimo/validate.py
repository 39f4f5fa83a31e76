"""Fast self-checks behind the command-line `validate` verb.

Each check is small enough to run on every build: structural checks on
the Toeplitz operators, quantizer properties, the symbol-rate equality
of the exact and lower-bound information matrices, orthant closed
forms, and the mean-Jacobian gradient check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fisher
from .model import build_g, build_phi, build_z, rrc_taps
from .simulate import orthogonal_pilots, quantize, substream


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def check_toeplitz_structure():
    m, n, beta = 2, 6, 0.8
    z = build_z(m, n, beta)
    shift_error = float(np.max(np.abs(z[:-1, :-1] - z[1:, 1:])))
    g = build_g(m, n, beta)
    taps = rrc_taps(m, n, beta)
    band_error = 0.0
    for r in range(g.shape[0]):
        band_error = max(band_error, float(np.max(np.abs(g[r, r : r + taps.size] - taps))))
        outside = np.abs(g[r]).sum() - np.abs(g[r, r : r + taps.size]).sum()
        band_error = max(band_error, float(outside))
    ok = shift_error == 0.0 and band_error == 0.0
    return ok, f"diagonal-shift error {shift_error:g}, band error {band_error:g}"


def check_quantizer():
    rng = substream(20240, 1)
    y = rng.standard_normal(512) + 1j * rng.standard_normal(512)
    q = quantize(y)
    idem = bool(np.array_equal(quantize(q), q))
    mags = bool(np.allclose(np.abs(q) ** 2, 1.0, atol=1e-15))
    signs = bool(
        np.array_equal(np.sign(q.real), np.where(y.real >= 0, 1.0, -1.0))
        and np.array_equal(np.sign(q.imag), np.where(y.imag >= 0, 1.0, -1.0))
    )
    zero = quantize(np.array([0.0 + 0.0j]))[0] == (1 + 1j) / np.sqrt(2)
    ok = idem and mags and signs and bool(zero)
    return ok, f"idempotent={idem} unit-magnitude={mags} signs={signs} zero-positive={bool(zero)}"


def check_fisher_equality_m1():
    rng = substream(20240, 2)
    pilots = orthogonal_pilots(4, 1, rng)
    phi = build_phi(pilots, 1, 1, 0.8)
    h = (rng.standard_normal(1) + 1j * rng.standard_normal(1)) / np.sqrt(2)
    noise_var = 0.5
    exact = fisher.fisher_white(phi, h, noise_var).fi_matrix
    bound = fisher.fisher_lower_bound(phi, h, noise_var * np.eye(phi.shape[0])).fi_matrix
    rel = float(np.linalg.norm(exact - bound) / np.linalg.norm(exact))
    return rel <= 1e-6, f"relative Frobenius distance {rel:.3e}"


def check_orthant_closed_forms():
    worst = 0.0
    eye_like = lambda rho: ((1.0, rho), (rho, 1.0))
    for rho in (-0.9, -0.5, 0.0, 0.5, 0.9):
        got = fisher.orthant_probability((0.0, 0.0), eye_like(rho))
        expect = 0.25 + np.arcsin(rho) / (2.0 * np.pi)
        worst = max(worst, abs(got - expect))
    for rho in (-0.95, -0.3, 0.6, 0.97):
        got = fisher.orthant_probability((0.0, 0.0), eye_like(rho))
        mirrored = fisher.orthant_probability((0.0, 0.0), eye_like(-rho))
        worst = max(worst, abs(got + mirrored - 0.5))
    return worst <= 1e-9, f"worst closed-form deviation {worst:.3e}"


def check_gradient():
    rng = substream(20240, 3)
    k, p = 6, 2
    phi = (rng.standard_normal((k, p)) + 1j * rng.standard_normal((k, p))) / np.sqrt(2)
    h = (rng.standard_normal(p) + 1j * rng.standard_normal(p)) / np.sqrt(2)
    c_diag = rng.uniform(0.5, 2.0, size=k)
    jac_r, jac_i = fisher.quantized_mean_grad(phi, h, c_diag)
    step = 1e-5
    theta = np.concatenate([h.real, h.imag])
    worst = 0.0
    for channel, jac in ((0, jac_r), (1, jac_i)):
        fd = np.zeros_like(jac)
        for i in range(theta.size):
            up, down = theta.copy(), theta.copy()
            up[i] += step
            down[i] -= step
            mu_up = fisher.quantized_mean(phi, up[:p] + 1j * up[p:], c_diag)[channel]
            mu_down = fisher.quantized_mean(phi, down[:p] + 1j * down[p:], c_diag)[channel]
            fd[:, i] = (mu_up - mu_down) / (2.0 * step)
        worst = max(worst, float(np.max(np.abs(jac - fd)) / np.max(np.abs(jac))))
    return worst <= 1e-6, f"max normalized gradient error {worst:.3e}"


CHECKS = (
    ("toeplitz_structure", check_toeplitz_structure),
    ("quantizer", check_quantizer),
    ("fisher_equality_m1", check_fisher_equality_m1),
    ("orthant_closed_forms", check_orthant_closed_forms),
    ("gradient", check_gradient),
)


def run_all():
    results = []
    for name, fn in CHECKS:
        try:
            passed, detail = fn()
        except Exception as exc:  # noqa: BLE001 - a crashing check is a failing check
            passed, detail = False, f"raised {exc!r}"
        results.append(CheckResult(name=name, passed=bool(passed), detail=detail))
    return results
