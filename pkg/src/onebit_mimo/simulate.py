"""Random draws for the quantized pilot observation model."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import hadamard

from .model import SystemConfig, build_g, build_phi

_SQRT2 = np.sqrt(2.0)

# Exponent table (entries are j**e) of a 6-row quaternary block with
# exactly orthogonal columns, found once by exhaustive search over
# Gaussian-integer matrices. Together with 4x4 Hadamard tiles it covers
# every even pilot length >= 4 for up to four users; odd lengths admit
# no exact orthogonal QPSK design for more than one user.
_QUAD6_EXP = np.array(
    [
        [0, 2, 0, 0],
        [0, 0, 1, 1],
        [0, 3, 2, 3],
        [0, 1, 0, 2],
        [0, 1, 2, 0],
        [0, 3, 3, 2],
    ]
)


@dataclass
class ChannelState:
    r"""True channel vector plus the prior covariance assumed for it."""

    h_true: np.ndarray
    cov_assumed: np.ndarray = field(default=None)

    def __post_init__(self):
        self.h_true = np.asarray(self.h_true, dtype=complex).ravel()
        if self.cov_assumed is None:
            self.cov_assumed = np.eye(self.h_true.size)


@dataclass
class QuantizedBatch:
    r"""One pilot transmission: raw samples, their signs, and the model."""

    y_unquantized: np.ndarray
    y_quantized: np.ndarray
    phi: np.ndarray
    noise_var: float


def _as_entropy(value) -> int:
    r"""Map a seed component to a nonnegative integer for SeedSequence."""
    if isinstance(value, (float, np.floating)):
        return int(np.float64(value).view(np.uint64))
    return int(value) % (1 << 64)


def substream(seed, *keys) -> np.random.Generator:
    r"""Counter-based generator for a (seed, key, ...) identity.

    Floats enter through their IEEE-754 bit pattern, so a key list like
    (seed, m, snr_db, tau, trial) names the same stream regardless of
    iteration order or worker count.
    """
    entropy = [_as_entropy(seed)] + [_as_entropy(k) for k in keys]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def draw_channel(rng: np.random.Generator, cfg: SystemConfig) -> ChannelState:
    r"""i.i.d. circular complex Gaussian channel, unit variance per entry."""
    shape = (cfg.n_rx * cfg.n_users,)
    h = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / _SQRT2
    return ChannelState(h_true=h)


def orthogonal_pilots(pilot_len: int, n_users: int, rng: np.random.Generator | None = None) -> np.ndarray:
    r"""QPSK pilot matrix with exactly orthogonal columns.

    Entries lie in {(+-1 +-j)/sqrt(2)} and X^H X = pilot_len * I. Built
    from 4x4 Hadamard and 6x4 quaternary tiles for up to 4 users, and
    from the next power-of-two Hadamard matrix above that. Passing an
    rng randomizes the matrix by an independent QPSK phase per row,
    which preserves both the alphabet and the Gram matrix.
    """
    if n_users < 1:
        raise ValueError("n_users must be >= 1")
    if pilot_len < n_users:
        raise ValueError(f"pilot_len={pilot_len} is shorter than n_users={n_users}")

    if n_users == 1:
        base = np.ones((pilot_len, 1), dtype=complex)
    elif n_users <= 4:
        tiles = _tile_plan(pilot_len)
        if tiles is None:
            raise ValueError(
                f"pilot_len={pilot_len} admits no orthogonal QPSK design for "
                f"n_users={n_users}; any even length >= 4 is supported"
            )
        n4, n6 = tiles
        blocks = [hadamard(4).astype(complex)[:, :n_users]] * n4
        blocks += [(1j ** _QUAD6_EXP).astype(complex)[:, :n_users]] * n6
        base = np.concatenate(blocks, axis=0)
    else:
        order = 1 << int(np.ceil(np.log2(n_users)))
        if pilot_len % order:
            raise ValueError(
                f"pilot_len={pilot_len} must be a multiple of {order} for n_users={n_users}"
            )
        tile = hadamard(order).astype(complex)[:, :n_users]
        base = np.concatenate([tile] * (pilot_len // order), axis=0)

    if rng is not None:
        base = (1j ** rng.integers(0, 4, size=pilot_len))[:, None] * base
    return base * ((1.0 + 1j) / _SQRT2)


def _tile_plan(pilot_len: int):
    r"""Counts (n4, n6) with 4*n4 + 6*n6 == pilot_len, or None."""
    if pilot_len % 2 or pilot_len < 4:
        return None
    if pilot_len % 4 == 0:
        return pilot_len // 4, 0
    return (pilot_len - 6) // 4, 1


def draw_pilots(rng: np.random.Generator, cfg: SystemConfig) -> np.ndarray:
    r"""Phase-randomized orthogonal QPSK pilot block of cfg dimensions."""
    return orthogonal_pilots(cfg.block_len, cfg.n_users, rng)


def draw_noise(
    rng: np.random.Generator,
    cfg: SystemConfig,
    noise_var: float,
    g: np.ndarray | None = None,
) -> np.ndarray:
    r"""Matched-filtered receiver noise, antenna-major.

    Per antenna, 3*M*N white CN(0, noise_var) samples pass through the
    convolution operator G, yielding M*N correlated samples with
    covariance noise_var * G G^T. Pass a prebuilt G to skip
    reconstruction in tight loops.
    """
    if g is None:
        g = build_g(cfg.oversampling, cfg.block_len, cfg.rolloff)
    raw_len = 3 * cfg.samples_per_antenna
    scale = np.sqrt(noise_var / 2.0)
    w = scale * (
        rng.standard_normal((cfg.n_rx, raw_len))
        + 1j * rng.standard_normal((cfg.n_rx, raw_len))
    )
    return (w @ g.T).ravel()


def quantize(y: np.ndarray) -> np.ndarray:
    r"""Per-component sign quantizer; zero maps to the positive level."""
    y = np.asarray(y)
    re = np.where(y.real >= 0.0, 1.0, -1.0)
    im = np.where(y.imag >= 0.0, 1.0, -1.0)
    return (re + 1j * im) / _SQRT2


def simulate_pilot_batch(
    rng: np.random.Generator,
    state: ChannelState,
    pilots: np.ndarray,
    cfg: SystemConfig,
    noise_var: float,
    g: np.ndarray | None = None,
) -> QuantizedBatch:
    r"""Transmit one pilot block through the channel and the quantizer."""
    if pilots.shape != (cfg.block_len, cfg.n_users):
        raise ValueError(
            f"pilots shape {pilots.shape} does not match "
            f"(block_len, n_users)=({cfg.block_len}, {cfg.n_users})"
        )
    phi = build_phi(pilots, cfg.n_rx, cfg.oversampling, cfg.rolloff)
    y = phi @ state.h_true + draw_noise(rng, cfg, noise_var, g=g)
    return QuantizedBatch(
        y_unquantized=y,
        y_quantized=quantize(y),
        phi=phi,
        noise_var=float(noise_var),
    )


def noise_var_from_snr_db(snr_db: float, n_users: int) -> float:
    r"""Noise variance from SNR = 10 log10(n_users / noise_var)."""
    return n_users / (10.0 ** (snr_db / 10.0))
