# %% [markdown]
# # Training and super-resolution
#
# Train both architectures on a small Burgers set at 64 points and evaluate at
# 64 and 128. The learnable model reaches 128 by pooling the input, running
# its blocks at 64 and interpolating the width-channel features before the
# projection. The baseline evaluates its DFT directly on the finer grid.

# %%
import dataclasses

from lnop.data import generate
from lnop.train import TrainConfig, train

data = generate("burgers", count=40, res=128, seed=3)
config = TrainConfig(arch="learnable", width=12, modes=[12], depth=3, epochs=30, batch_size=4,
                     n_train=32, n_test=8, resolution=64, eval_resolutions=[64, 128], eval_every=10)

for arch in ("learnable", "fourier"):
    model, report = train(dataclasses.replace(config, arch=arch), data)
    print(f"{arch:9s} params {model.num_parameters():6d}  loss {report.train_loss[0]:.3f} -> "
          f"{report.train_loss[-1]:.3f}")
    for row in report.eval_table:
        print(f"    res {row['resolution']:4d}  rel-L2 {row['rel_l2']:6.2f}%  ({row['pipeline']})")
