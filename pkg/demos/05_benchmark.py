# %% [markdown]
# # Per-epoch timing
#
# `bench` trains each configuration for a warm-up epoch plus a few timed
# epochs and reports the median together with per-block parameter counts.

# %%
import dataclasses

import numpy as np

from lnop.data import PdeDataset
from lnop.model import GridSpec
from lnop.train import TrainConfig, bench

rng = np.random.default_rng(0)
data = PdeDataset("synthetic", rng.standard_normal((8, 1, 32, 32)), rng.standard_normal((8, 1, 32, 32)),
                  GridSpec.unit((32, 32)))
base = TrainConfig(width=16, modes=[8, 8], depth=2, batch_size=8)
result = bench([base, dataclasses.replace(base, arch="fourier")], data, epochs=3)
for row in result["rows"]:
    print(f"{row['arch']:9s} {row['median_epoch_seconds'] * 1e3:7.1f} ms/epoch  block params {row['params_block']}")
print("difference per block:", result["difference_per_block"])
