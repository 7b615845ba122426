# %% [markdown]
# # PDE solvers and dataset generation
#
# Inputs are Gaussian random fields; targets come from spectral solvers run on a
# grid 4x finer than the stored one. Each check below is also part of
# `lnop verify`.

# %%
import tempfile
from pathlib import Path

import numpy as np

from lnop.data import (
    PdeDataset,
    burgers_solve,
    darcy_solve,
    generate,
    grf_sample,
    navier_stokes_solve,
)

x = np.arange(128) / 128
u0 = np.sin(2 * np.pi * x)
a, b = burgers_solve(u0, 0.1), burgers_solve(u0, 0.1, cfl=0.125)
print("Burgers: halving the step changes u(1) by", np.linalg.norm(a - b) / np.linalg.norm(b))

# %%
u = darcy_solve(np.ones((32, 32)))
fine = darcy_solve(np.ones((128, 128)))
print("Darcy: centre value", u[16, 16], "vs 4x refined", fine[64, 64])

# %%
g = np.arange(32) / 32
x1, x2 = np.meshgrid(g, g, indexing="ij")
w0 = np.cos(2 * np.pi * (2 * x1 + x2))
w = navier_stokes_solve(w0, 1e-3, None, [1.0])[..., 0]
print("Navier-Stokes single mode: error vs exp(-nu |k|^2 t) =",
      np.abs(w - w0 * np.exp(-1e-3 * (2 * np.pi) ** 2 * 5)).max())

# %%
field = grf_sample((64,), alpha=2.5, tau=7.0, seed=0, sigma=49.0)
print("GRF sample: mean", field.mean(), "std", field.std())

# %% [markdown]
# Datasets carry their generator config and round-trip through the binary
# container bit for bit.

# %%
data = generate("burgers", count=4, res=64, seed=7)
with tempfile.TemporaryDirectory() as tmp:
    digest = data.write(Path(tmp) / "burgers.lnop")
    back = PdeDataset.read(Path(tmp) / "burgers.lnop")
print("digest", digest[:16], "| identical after reload:", np.array_equal(back.targets, data.targets))
print("config:", back.config)
