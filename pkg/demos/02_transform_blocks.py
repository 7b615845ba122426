# %% [markdown]
# # Learnable transforms versus the truncated DFT
#
# A learnable block maps `v -> relu(W v + b + N(R . M(v)))`. `M` contracts
# each spatial axis with its own `d_i x k_i` matrix and `N` maps back with a
# separate `k_i x d_i` matrix. The baseline fixes `M` and `N` to a truncated
# DFT and its inverse, which makes `R` complex.

# %%
import numpy as np

from lnop.blocks import (
    SpectralBaselineParams,
    TransformBlockParams,
    block_update,
    dft_truncated,
    idft_padded,
    max_modes,
    param_breakdown,
    param_difference,
    spectral_block_update,
)

rng = np.random.default_rng(1)
learn = TransformBlockParams.init(width=4, dims=(32, 32), modes=(8, 8), rng=rng)
base = SpectralBaselineParams.init(width=4, dims=(32, 32), modes=(8, 8), rng=rng)
v = rng.standard_normal((2, 4, 32, 32))
print("learnable block output", block_update(v, learn).shape)
print("baseline block output ", spectral_block_update(v, base).shape)

# %% [markdown]
# Per-block parameter budget. The learnable block swaps the complex `R`
# (two real tensors) for a single real `R` plus the factor matrices.

# %%
for width, dims, modes in [(32, (64, 64), (12, 12)), (64, (1024,), (16,))]:
    lb = param_breakdown("learnable", width, dims, modes)
    fb = param_breakdown("fourier", width, dims, modes)
    print(f"d_v={width} d={dims} k={modes}: learnable {lb['total']}, fourier {fb['total']}, "
          f"saved {param_difference(width, dims, modes)}")

# %% [markdown]
# With every mode kept the DFT pair is an exact inverse, and it matches numpy's
# real FFT.

# %%
u = rng.standard_normal((1, 16, 12))
re, im = dft_truncated(u, max_modes((16, 12)))
print("round trip error:", np.abs(idft_padded(re, im, (16, 12)).data - u).max())
print("vs numpy rfft2:  ", np.abs(re.data + 1j * im.data - np.fft.rfft2(u)).max())

# %% [markdown]
# Because its tables follow the input grid, the baseline kernel transfers to a
# finer grid unchanged for band-limited inputs.

# %%
x = np.arange(64) / 64
fine = np.stack([np.sin(2 * np.pi * x) + np.cos(2 * np.pi * 3 * x)] * 4)
base_1d = SpectralBaselineParams.init(4, (32,), (6,), rng)
coarse_out = spectral_block_update(fine[:, ::2], base_1d, activation=None).data
fine_out = spectral_block_update(fine, base_1d, activation=None).data
print("coarse vs fine (subsampled) kernel output:", np.abs(fine_out[:, ::2] - coarse_out).max())
