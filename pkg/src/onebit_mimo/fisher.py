"""Fisher information and Cramer-Rao bounds for the 1-bit receiver.

Everything here works on the real-valued parameter stacking
theta = [Re(h'); Im(h')]. The real and imaginary observation channels
are independent given the channel, so every information matrix is the
sum of a real-part and an imaginary-part contribution.

Two regimes are covered:

* symbol-rate sampling with white noise, where the likelihood factors
  per sample and the information matrix has a closed form built from
  Gaussian tail probabilities (``fisher_white``);
* oversampled, correlated noise, where only a moment-based lower bound
  is available, built from the quantizer-output mean, its Jacobian, and
  its covariance via bivariate-normal orthant probabilities
  (``fisher_lower_bound``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve
from scipy.special import log_ndtr, ndtr

KIND_EXACT_WHITE = "exact_white"
KIND_LOWER_BOUND = "lower_bound_colored"

_TWO_PI = 2.0 * np.pi
_COND_LIMIT = 1e12
_DIAG_LOAD = 1e-10

# 20-point Gauss-Legendre half rule (weights, nodes), mirrored below.
_GL_W_HALF = np.array(
    [
        0.01761400713915212, 0.04060142980038694, 0.06267204833410906,
        0.08327674157670475, 0.1019301198172404, 0.1181945319615184,
        0.1316886384491766, 0.1420961093183821, 0.1491729864726037,
        0.1527533871307259,
    ]
)
_GL_X_HALF = np.array(
    [
        0.9931285991850949, 0.9639719272779138, 0.9122344282513259,
        0.8391169718222188, 0.7463319064601508, 0.6360536807265150,
        0.5108670019508271, 0.3737060887154196, 0.2277858511416451,
        0.07652652113349733,
    ]
)
_GL_W = np.tile(_GL_W_HALF, 2)
_GL_X = np.concatenate((1.0 - _GL_X_HALF, 1.0 + _GL_X_HALF))


@dataclass
class FisherResult:
    """Information matrix over theta = [Re(h'); Im(h')]."""

    fi_matrix: np.ndarray
    kind: str
    crb_diag: np.ndarray | None = None


@dataclass(frozen=True)
class OrthantQuery:
    """Positive-quadrant query for a bivariate Gaussian."""

    mean2: tuple
    cov2: tuple


def _bvn_upper_low_rho(h, k, rho):
    """Vectorized P(X>h, Y>k), standard bivariate normal, |rho| < 0.925.

    Drezner-Wesolowsky integral over the correlation with the arcsine
    substitution, 20-point Gauss-Legendre (after Genz's bvnl).
    """
    hk = h * k
    hs = 0.5 * (h * h + k * k)
    asr = 0.5 * np.arcsin(rho)
    sn = np.sin(asr[:, None] * _GL_X[None, :])
    integrand = np.exp((sn * hk[:, None] - hs[:, None]) / (1.0 - sn**2))
    return (integrand @ _GL_W) * asr / _TWO_PI + ndtr(-h) * ndtr(-k)


def _bvn_upper_high_rho(h, k, rho):
    """Scalar P(X>h, Y>k) for 0.925 <= |rho| < 1 (Genz's transformed series)."""
    hk = h * k
    if rho < 0.0:
        k = -k
        hk = -hk
    ass = 1.0 - rho * rho
    a = np.sqrt(ass)
    bs = (h - k) ** 2
    asr = -0.5 * (bs / ass + hk)
    c = (4.0 - hk) / 8.0
    d = (12.0 - hk) / 80.0
    bvn = 0.0
    if asr > -100.0:
        bvn = a * np.exp(asr) * (1.0 - c * (bs - ass) * (1.0 - d * bs) / 3.0 + c * d * ass**2)
    if hk > -100.0:
        b = np.sqrt(bs)
        sp = np.sqrt(_TWO_PI) * ndtr(-b / a)
        bvn -= np.exp(-0.5 * hk) * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0)
    a *= 0.5
    xs = (a * _GL_X) ** 2
    asr = -0.5 * (bs / xs + hk)
    keep = asr > -100.0
    xs = xs[keep]
    sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs)
    rs = np.sqrt(1.0 - xs)
    ep = np.exp(-0.5 * hk * xs / (1.0 + rs) ** 2) / rs
    bvn = (a * np.dot(np.exp(asr[keep]) * (sp - ep), _GL_W[keep]) - bvn) / _TWO_PI
    if rho > 0.0:
        return bvn + ndtr(-max(h, k))
    if h >= k:
        return -bvn
    if h < 0.0:
        return (ndtr(k) - ndtr(h)) - bvn
    return (ndtr(-h) - ndtr(-k)) - bvn


def _bvn_upper(h, k, rho):
    """P(X>h, Y>k) for standard bivariate normal pairs (vectorized)."""
    h, k, rho = np.broadcast_arrays(
        np.asarray(h, float), np.asarray(k, float), np.asarray(rho, float)
    )
    shape = h.shape
    h, k, rho = h.ravel(), k.ravel(), rho.ravel()
    if np.any(np.abs(rho) >= 1.0 - 1e-12):
        raise ValueError("correlation too close to +-1 for the orthant quadrature")
    out = np.empty(h.shape)
    low = np.abs(rho) < 0.925
    if np.any(low):
        out[low] = _bvn_upper_low_rho(h[low], k[low], rho[low])
    for i in np.nonzero(~low)[0]:
        out[i] = _bvn_upper_high_rho(h[i], k[i], rho[i])
    return np.clip(out, 0.0, 1.0).reshape(shape)


def orthant_probability(query, cov2=None) -> float:
    """P(z1 > 0, z2 > 0) for a bivariate Gaussian.

    Accepts either an OrthantQuery or a (mean2, cov2) pair. The
    covariance must be positive definite with correlation bounded away
    from +-1 by 1e-12.
    """
    if cov2 is None:
        mean = np.asarray(query.mean2, float)
        cov = np.asarray(query.cov2, float)
    else:
        mean = np.asarray(query, float)
        cov = np.asarray(cov2, float)
    if mean.shape != (2,) or cov.shape != (2, 2):
        raise ValueError("orthant_probability expects a 2-vector mean and 2x2 covariance")
    s1, s2 = np.sqrt(cov[0, 0]), np.sqrt(cov[1, 1])
    if not (s1 > 0.0 and s2 > 0.0):
        raise ValueError("covariance diagonal must be strictly positive")
    rho = cov[0, 1] / (s1 * s2)
    if np.abs(rho) >= 1.0 - 1e-12:
        raise ValueError(f"|correlation|={abs(rho):.17g} too close to 1")
    return float(_bvn_upper(-mean[0] / s1, -mean[1] / s2, np.asarray(rho)))


def _noiseless_parts(phi, h):
    a = np.asarray(phi) @ np.asarray(h, dtype=complex).ravel()
    return a.real, a.imag


def _cov_diag(c_n):
    c = np.asarray(c_n)
    d = np.real(np.diagonal(c)) if c.ndim == 2 else np.real(c)
    if np.any(d <= 0.0):
        raise ValueError("noise covariance diagonal must be strictly positive")
    return d


def quantized_mean(phi, h, c_n):
    """Means of the quantized real and imaginary channels.

    Per entry, mu_k = (1/sqrt2)(1 - 2 Q(a_k / sqrt(c_kk/2))) where a_k
    is the noiseless value and c_kk the complex noise variance. c_n may
    be the full covariance or just its diagonal.
    """
    a_r, a_i = _noiseless_parts(phi, h)
    d = _cov_diag(c_n)
    scale = np.sqrt(2.0 / d)
    mu_r = (2.0 * ndtr(a_r * scale) - 1.0) / np.sqrt(2.0)
    mu_i = (2.0 * ndtr(a_i * scale) - 1.0) / np.sqrt(2.0)
    return mu_r, mu_i


def _mean_slope(a, d):
    # d mu / d a for one channel; a is the noiseless part, d = diag(C_n).
    return np.sqrt(2.0 / np.pi) * np.exp(-(a**2) / d) / np.sqrt(d)


def _stacked_jacobians(phi):
    phi = np.asarray(phi)
    d_r = np.concatenate([phi.real, -phi.imag], axis=1)
    d_i = np.concatenate([phi.imag, phi.real], axis=1)
    return d_r, d_i


def quantized_mean_grad(phi, h, c_n):
    """Jacobians of the quantized means with respect to theta.

    Returns (J_R, J_I); row k of J_R is dmu^R_k/dtheta, a scaled row of
    the real-stacked observation matrix.
    """
    a_r, a_i = _noiseless_parts(phi, h)
    d = _cov_diag(c_n)
    d_r, d_i = _stacked_jacobians(phi)
    return _mean_slope(a_r, d)[:, None] * d_r, _mean_slope(a_i, d)[:, None] * d_i


def _quantized_cov_channel(a, c, d, mu):
    """Covariance of one quantized channel given noiseless values a."""
    n = a.size
    out = np.diag(0.5 - mu**2)
    iu, ju = np.triu_indices(n, k=1)
    nz = c[iu, ju] != 0.0
    if np.any(nz):
        ii, jj = iu[nz], ju[nz]
        sd = np.sqrt(d / 2.0)
        rho = c[ii, jj] / np.sqrt(d[ii] * d[jj])
        if np.any(np.abs(rho) >= 1.0 - 1e-12):
            raise ValueError("noise correlation too close to +-1")
        hi, hj = a[ii] / sd[ii], a[jj] / sd[jj]
        both_pos = _bvn_upper(-hi, -hj, rho)
        both_neg = _bvn_upper(hi, hj, rho)
        vals = both_pos + both_neg - 0.5 - mu[ii] * mu[jj]
        out[ii, jj] = vals
        out[jj, ii] = vals
    return out


def quantized_cov(phi, h, c_n):
    """Covariance matrices of the quantized real and imaginary channels.

    Diagonal entries are 1/2 - mu_k^2; off-diagonal entries combine the
    positive and negative orthant probabilities of the corresponding
    bivariate marginal. Entries with zero noise covariance are exactly
    zero and skipped.
    """
    a_r, a_i = _noiseless_parts(phi, h)
    c = np.real(np.asarray(c_n))
    d = _cov_diag(c)
    mu_r, mu_i = quantized_mean(phi, h, c)
    return (
        _quantized_cov_channel(a_r, c, d, mu_r),
        _quantized_cov_channel(a_i, c, d, mu_i),
    )


def fisher_white(phi, h, noise_var, oversampling: int = 1) -> FisherResult:
    """Exact information matrix for symbol-rate sampling in white noise.

    Each quantized sample contributes a rank-one term weighted by
    exp(-x^2) / (pi sigma^2 Phi(x) Phi(-x)) with x = a sqrt(2)/sigma;
    the product of tail probabilities is evaluated in log space so the
    weight stays finite far into the tails.
    """
    if oversampling != 1:
        raise ValueError("exact Fisher information requires symbol-rate sampling (oversampling=1)")
    if noise_var <= 0.0:
        raise ValueError("noise_var must be positive")
    a_r, a_i = _noiseless_parts(phi, h)
    d_r, d_i = _stacked_jacobians(phi)
    fi = np.zeros((d_r.shape[1], d_r.shape[1]))
    for a, dmat in ((a_r, d_r), (a_i, d_i)):
        x = a * np.sqrt(2.0 / noise_var)
        weight = np.exp(-(x**2) - log_ndtr(x) - log_ndtr(-x)) / (np.pi * noise_var)
        fi += dmat.T @ (weight[:, None] * dmat)
    fi = 0.5 * (fi + fi.T)
    return FisherResult(fi_matrix=fi, kind=KIND_EXACT_WHITE)


def _regularized_solve(c, b):
    cond = np.linalg.cond(c)
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        c = c + _DIAG_LOAD * np.eye(c.shape[0])
    try:
        return solve(c, b, assume_a="pos")
    except np.linalg.LinAlgError as exc:
        raise ValueError("quantized covariance not invertible after regularization") from exc


def fisher_lower_bound(phi, h, c_n, n_blocks: int = 1) -> FisherResult:
    """Moment-based information lower bound for correlated noise.

    Computes J^T C^{-1} J per channel, with J the mean Jacobian and C
    the quantized covariance. When the noise covariance has the block
    structure I_{n_blocks} kron B (independent antennas), pass the
    single block as c_n and set n_blocks; the bound then assembles per
    block instead of touching the full covariance.
    """
    phi = np.asarray(phi)
    a_r, a_i = _noiseless_parts(phi, h)
    d_r, d_i = _stacked_jacobians(phi)
    c = np.real(np.asarray(c_n))
    total = phi.shape[0]
    if total % n_blocks:
        raise ValueError("row count not divisible by n_blocks")
    width = total // n_blocks
    if c.shape != (width, width):
        raise ValueError(f"c_n must be {(width, width)} for n_blocks={n_blocks}")
    d = _cov_diag(c)

    p2 = d_r.shape[1]
    fi = np.zeros((p2, p2))
    for b in range(n_blocks):
        rows = slice(b * width, (b + 1) * width)
        for a, dmat in ((a_r[rows], d_r[rows]), (a_i[rows], d_i[rows])):
            mu = (2.0 * ndtr(a * np.sqrt(2.0 / d)) - 1.0) / np.sqrt(2.0)
            cov_q = _quantized_cov_channel(a, c, d, mu)
            jac = _mean_slope(a, d)[:, None] * dmat
            fi += jac.T @ _regularized_solve(cov_q, jac)
    fi = 0.5 * (fi + fi.T)
    return FisherResult(fi_matrix=fi, kind=KIND_LOWER_BOUND)


def crb(result: FisherResult) -> np.ndarray:
    """Diagonal of the inverse information matrix.

    Raises with a condition-number diagnostic when the matrix is
    numerically singular. The diagonal is cached on the result.
    """
    fi = result.fi_matrix
    cond = np.linalg.cond(fi)
    if not np.isfinite(cond) or cond > 1e14:
        raise ValueError(f"Fisher information singular or near-singular (cond={cond:.3e})")
    diag = np.diagonal(np.linalg.inv(fi)).copy()
    result.crb_diag = diag
    return diag


def fisher_summary(result: FisherResult) -> str:
    """One-line summary: kind, trace, eigenvalue range, mean CRB."""
    eigs = np.linalg.eigvalsh(result.fi_matrix)
    try:
        mean_crb = float(np.mean(crb(result)))
        crb_part = f"mean_crb={mean_crb:.6g}"
    except ValueError as exc:
        crb_part = f"crb=n/a ({exc})"
    return (
        f"kind={result.kind} dim={result.fi_matrix.shape[0]} "
        f"trace={np.trace(result.fi_matrix):.6g} "
        f"min_eig={eigs[0]:.6g} max_eig={eigs[-1]:.6g} {crb_part}"
    )


def write_fisher_csv(result: FisherResult, path) -> None:
    """Dump the information matrix as full-precision CSV."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in result.fi_matrix:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def biased_bound(estimator, h, fisher_lb: FisherResult, n_mc: int, fd_step: float = 0.05, seed: int = 0) -> np.ndarray:
    """Variance bound for a biased estimator via its mean Jacobian.

    The Jacobian of E[theta_hat] is estimated by central finite
    differences in each real parameter, with common random numbers
    across the +/- evaluations: the j-th Monte Carlo draw reuses one
    generator state on both sides, so the noise cancels in the
    difference. Returns the diagonal of J F^{-1} J^T.

    Args:
        estimator: callable (h_complex, rng) -> complex estimate vector.
        h: complex channel vector at which to expand.
        fisher_lb: information matrix (typically the lower bound).
        n_mc: Monte Carlo draws per Jacobian column (>= 1000 advised).
        fd_step: finite-difference step on each real parameter.
        seed: base seed for the common-random-number streams.
    """
    h = np.asarray(h, dtype=complex).ravel()
    theta = np.concatenate([h.real, h.imag])
    p2 = theta.size
    half = p2 // 2

    def run_mean(th):
        acc = np.zeros(p2)
        hc = th[:half] + 1j * th[half:]
        for j in range(n_mc):
            est = np.asarray(estimator(hc, np.random.default_rng((seed, j))), dtype=complex).ravel()
            acc += np.concatenate([est.real, est.imag])
        return acc / n_mc

    jac = np.zeros((p2, p2))
    for i in range(p2):
        up, down = theta.copy(), theta.copy()
        up[i] += fd_step
        down[i] -= fd_step
        jac[:, i] = (run_mean(up) - run_mean(down)) / (2.0 * fd_step)
    if not np.all(np.isfinite(jac)):
        raise ValueError("non-finite entries in the finite-difference Jacobian")
    fi_inv = np.linalg.inv(fisher_lb.fi_matrix)
    return np.diagonal(jac @ fi_inv @ jac.T).copy()
