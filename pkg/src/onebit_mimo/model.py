"""Discrete-time model of the oversampled multi-user uplink.

Each user transmits a block of symbols shaped by a root-raised-cosine
(RRC) pulse over a frequency-flat channel. The receiver applies the
matched RRC filter and samples at ``oversampling`` times the symbol
rate, so the combined pulse seen at the sampler is a raised cosine.
This module builds the deterministic pieces of that chain: the filter
taps, the Toeplitz filtering operators, the pilot observation matrix,
and the real-valued stacking used by the Fisher-information code.

Conventions
-----------
* The symbol period is normalized to 1; taps are evaluated on the grid
  t = k / oversampling.
* Received sample vectors are antenna-major: antenna r occupies the
  contiguous slice [r*M*N, (r+1)*M*N) where M is the oversampling
  factor and N the block length.
* The channel matrix H' is n_rx x n_users and its vectorization is
  column-major (all antennas of user 0, then user 1, ...).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SystemConfig:
    """Dimensions and pulse parameters of one uplink configuration."""

    n_users: int = 4        # N_t, single-antenna transmitters
    n_rx: int = 16          # N_r, base-station antennas
    oversampling: int = 1   # M, samples per symbol at the receiver
    block_len: int = 40     # N, symbols per transmission block
    rolloff: float = 0.8    # RRC roll-off factor, in (0, 1]

    def __post_init__(self):
        for name in ("n_users", "n_rx", "oversampling", "block_len"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        if not 0.0 < self.rolloff <= 1.0:
            raise ValueError(f"rolloff must lie in (0, 1], got {self.rolloff}")

    @property
    def samples_per_antenna(self) -> int:
        return self.oversampling * self.block_len

    @property
    def n_observations(self) -> int:
        """Complex samples per received block, all antennas."""
        return self.samples_per_antenna * self.n_rx

    @property
    def n_coefficients(self) -> int:
        """Complex channel coefficients to estimate."""
        return self.n_rx * self.n_users


def rrc_taps(oversampling: int, span: int, rolloff: float) -> np.ndarray:
    """Root-raised-cosine taps with unit energy.

    Args:
        oversampling: samples per symbol period.
        span: filter extent in symbol periods on each side of t=0.
        rolloff: excess-bandwidth factor, in (0, 1].

    Returns:
        Array of 2*span*oversampling + 1 taps at t = k/oversampling,
        normalized so that sum(taps**2) == 1.
    """
    if not 0.0 < rolloff <= 1.0:
        raise ValueError(f"rolloff must lie in (0, 1], got {rolloff}")
    beta = float(rolloff)
    k = np.arange(-span * oversampling, span * oversampling + 1)
    t = k / oversampling

    taps = np.zeros(t.shape)
    at_zero = np.isclose(t, 0.0)
    at_break = np.isclose(np.abs(t), 1.0 / (4.0 * beta))
    regular = ~(at_zero | at_break)

    taps[at_zero] = 1.0 - beta + 4.0 * beta / np.pi
    taps[at_break] = (beta / np.sqrt(2.0)) * (
        (1.0 + 2.0 / np.pi) * np.sin(np.pi / (4.0 * beta))
        + (1.0 - 2.0 / np.pi) * np.cos(np.pi / (4.0 * beta))
    )
    tr = t[regular]
    taps[regular] = (
        np.sin(np.pi * tr * (1.0 - beta))
        + 4.0 * beta * tr * np.cos(np.pi * tr * (1.0 + beta))
    ) / (np.pi * tr * (1.0 - (4.0 * beta * tr) ** 2))

    return taps / np.sqrt(np.sum(taps**2))


def combined_pulse(oversampling: int, span: int, rolloff: float) -> np.ndarray:
    """Transmit pulse cascaded with its matched filter.

    Returns the 4*span*oversampling + 1 taps of the raised-cosine
    autocorrelation sequence, scaled so the center tap (t = 0) is 1.
    """
    p = rrc_taps(oversampling, span, rolloff)
    z = np.convolve(p, p[::-1])
    return z / z[z.size // 2]


def build_g(oversampling: int, block_len: int, rolloff: float) -> np.ndarray:
    """Matched-filter convolution operator acting on the raw noise.

    Row r holds the full RRC tap vector starting at column r, so the
    result is a banded Toeplitz matrix of shape (M*N, 3*M*N).
    """
    p = rrc_taps(oversampling, block_len, rolloff)
    mn = oversampling * block_len
    g = np.zeros((mn, 3 * mn))
    for r in range(mn):
        g[r, r : r + p.size] = p
    return g


def build_z(oversampling: int, block_len: int, rolloff: float) -> np.ndarray:
    """Toeplitz matrix of the combined pulse, Z[i, j] = z((j-i)/M)."""
    z = combined_pulse(oversampling, block_len, rolloff)
    center = 2 * oversampling * block_len
    idx = np.arange(oversampling * block_len)
    return z[center + (idx[None, :] - idx[:, None])]


def symbol_projection(oversampling: int, block_len: int, rolloff: float) -> np.ndarray:
    """Columns of Z at the symbol instants (last sample of each symbol).

    Equals Z @ (I_N kron u) with u the length-M selector of the final
    intra-symbol sample; shape (M*N, N). Column n is the sampled pulse
    response to a unit symbol at instant n.
    """
    zmat = build_z(oversampling, block_len, rolloff)
    return zmat[:, oversampling - 1 :: oversampling]


def build_phi(pilots: np.ndarray, n_rx: int, oversampling: int, rolloff: float) -> np.ndarray:
    """Observation matrix of the vectorized channel.

    With x_t the pilot column of user t, the noiseless receive vector is
    Phi @ vec(H') where Phi = [I_nrx kron (W x_0) | ... | I_nrx kron (W x_{nt-1})]
    and W = symbol_projection(...). Rows are antenna-major; columns
    follow the column-major vectorization of H'.

    Args:
        pilots: (tau, n_users) complex pilot matrix.
        n_rx: number of receive antennas.
        oversampling: samples per symbol.
        rolloff: RRC roll-off factor.

    Returns:
        Complex matrix of shape (M*tau*n_rx, n_rx*n_users).
    """
    pilots = np.asarray(pilots)
    if pilots.ndim != 2:
        raise ValueError("pilots must be a (tau, n_users) matrix")
    tau, n_users = pilots.shape
    w = symbol_projection(oversampling, tau, rolloff)
    filtered = w @ pilots  # (M*tau, n_users), column t is W x_t
    eye = np.eye(n_rx)
    blocks = [np.kron(eye, filtered[:, t : t + 1]) for t in range(n_users)]
    return np.concatenate(blocks, axis=1)


def channel_matrix(hprime: np.ndarray, oversampling: int, block_len: int, rolloff: float) -> np.ndarray:
    """Full receive operator mapping stacked pilot symbols to samples.

    Builds (I_nrx kron Z) @ (I_{nrx*N} kron u) @ (H' kron I_N), the
    direct form of the filtered, oversampled, frequency-flat channel.
    The input vector is user-major: x = vec of the (tau, n_users) pilot
    matrix in column-major order. Intended for small-instance checks;
    build_phi is the efficient route.
    """
    hprime = np.asarray(hprime)
    n_rx, _ = hprime.shape
    m, n = oversampling, block_len
    zmat = build_z(m, n, rolloff)
    u = np.zeros((m, 1))
    u[-1, 0] = 1.0
    upsample = np.kron(np.eye(n_rx * n), u)
    return np.kron(np.eye(n_rx), zmat) @ upsample @ np.kron(hprime, np.eye(n))


def stack_real(a: np.ndarray) -> np.ndarray:
    """Real-valued stacking [[Re, -Im], [Im, Re]] of a complex matrix."""
    return np.block([[a.real, -a.imag], [a.imag, a.real]])


def symbol_view(y: np.ndarray, oversampling: int, block_len: int, n_rx: int) -> np.ndarray:
    """Regroup an antenna-major sample vector by symbol instant.

    Returns an array of shape (block_len, n_rx*oversampling) whose row n
    holds the M samples of symbol n from every antenna (antenna-major
    within the row), matching the per-symbol estimator's input layout.
    """
    y = np.asarray(y)
    blocks = y.reshape(n_rx, block_len, oversampling)
    return blocks.transpose(1, 0, 2).reshape(block_len, n_rx * oversampling)
