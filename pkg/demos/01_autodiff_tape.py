# %% [markdown]
# # Reverse-mode gradients on a tape
#
# Every operation on a `Tensor` that touches a `Parameter` is appended to a
# thread-local tape. `backward` walks the tape in reverse and accumulates
# gradients into each parameter's `.grad`.

# %%
import numpy as np

from lnop import oracles
from lnop.tensor import Parameter, Tensor, adam_step, backward, contract_axis, mul, no_grad, relu, step_lr, tsum

rng = np.random.default_rng(0)
x = Tensor(rng.standard_normal((4, 3)))
w = Parameter(rng.standard_normal((3, 2)), name="w")
probe = Tensor(rng.standard_normal((4, 2)))


def loss():
    return tsum(mul(relu(contract_axis(x, w, 1)), probe))


backward(loss())
print("tape gradient:\n", w.grad)

# %% [markdown]
# Central differences agree to roughly 1e-9.

# %%
def value():
    with no_grad():
        return loss().item()


fd = oracles.finite_difference(value, w.data)
print("max |tape - finite difference| =", np.abs(w.grad - fd).max())

# %% [markdown]
# Adam with bias correction and the step schedule used for training.

# %%
for epoch in range(3):
    w.zero_grad()
    backward(loss())
    adam_step([w], lr=step_lr(epoch, 1e-2, period=2))
    print(f"epoch {epoch}: lr {step_lr(epoch, 1e-2, period=2):.4f}, loss {value():+.4f}")
