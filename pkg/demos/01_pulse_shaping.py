"""Pulse shaping and the deterministic receive operators.

Walks through the building blocks of the oversampled receiver: the
root-raised-cosine taps, their autocorrelation (the combined pulse),
the Toeplitz filtering matrix Z, and the symbol-instant projection W.
Saves a two-panel figure next to this script.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from onebit_mimo.model import build_g, build_z, combined_pulse, rrc_taps, symbol_projection

HERE = pathlib.Path(__file__).resolve().parent

oversampling, block_len, rolloff = 3, 12, 0.8

taps = rrc_taps(oversampling, block_len, rolloff)
pulse = combined_pulse(oversampling, block_len, rolloff)
print(f"RRC taps: {taps.size} samples, energy {np.sum(taps**2):.12f}")
print(f"combined pulse: {pulse.size} samples, center value {pulse[pulse.size // 2]:.12f}")

# at symbol instants the combined pulse is close to a unit sample: the
# raised cosine has (near) zero inter-symbol interference
center = pulse.size // 2
symbol_offsets = np.arange(-4, 5)
at_symbols = pulse[center + symbol_offsets * oversampling]
print("pulse at integer symbol offsets:")
for off, val in zip(symbol_offsets, at_symbols):
    print(f"  k={off:+d}: {val:+.3e}")

z = build_z(oversampling, block_len, rolloff)
g = build_g(oversampling, block_len, rolloff)
w = symbol_projection(oversampling, block_len, rolloff)
print(f"\nZ: {z.shape}, G: {g.shape}, W: {w.shape}")

# G G^T reproduces Z: filtering white noise with the matched filter
# leaves the combined pulse as the sample correlation
gram_error = np.max(np.abs(g @ g.T - z))
print(f"max |G G^T - Z| = {gram_error:.3e} (the noise coloring IS the pulse)")

fig, axes = plt.subplots(1, 2, figsize=(10, 4))
t = (np.arange(pulse.size) - center) / oversampling
axes[0].plot(t, pulse, lw=1.2, label="combined pulse z(t)")
axes[0].plot(symbol_offsets, at_symbols, "o", ms=5, label="symbol instants")
axes[0].set_xlim(-5, 5)
axes[0].set_xlabel("t / T")
axes[0].legend()
axes[0].set_title(f"raised-cosine autocorrelation (rolloff {rolloff})")

im = axes[1].imshow(z, cmap="RdBu_r", vmin=-1, vmax=1)
axes[1].set_title("Toeplitz filter matrix Z")
fig.colorbar(im, ax=axes[1], shrink=0.8)
fig.tight_layout()
out = HERE / "01_pulse_shaping.png"
fig.savefig(out, dpi=120)
print(f"\nwrote {out}")
