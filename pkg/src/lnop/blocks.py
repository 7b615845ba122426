"""Operator blocks: learnable factorized transforms and the truncated-DFT baseline.

Tensors entering a block have shape ``(..., c, d_1, ..., d_n)``: optional
leading batch axes, one channel axis, then n spatial axes.

Learnable block::

    v -> relu(W v + b + N(R . M(v)))

where ``M`` contracts spatial axis i with ``L_f[i]`` (d_i x k_i), ``R`` mixes
channels independently at every retained mode, and ``N`` contracts mode axis i
with ``L_b[i]`` (k_i x d_i). ``N`` is not tied to ``M``.

Baseline block: same layout with ``M``/``N`` replaced by a truncated DFT and
its zero-padded inverse, and ``R`` complex (stored as real/imaginary pairs).

DFT convention (unnormalized forward, 1/d inverse)::

    X[f] = sum_x v[x] exp(-2 pi i f x / d),   f = 0 .. k-1

Only the k lowest non-negative frequencies are kept on every axis. The last
spatial axis is treated as the half-spectrum of a real signal: at inversion
each kept frequency other than 0 (and the Nyquist bin of an even length) is
counted twice, which restores its negative partner by conjugate symmetry.
With ``k = d // 2 + 1`` on the last axis and ``k = d`` elsewhere the pair is
an exact inverse.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, DimensionError, ModeError
from .tensor import Parameter, Tensor, add, add_bias, contract_axis, mode_mix, relu, sub

Activation = Callable[[Tensor], Tensor]

ARCHITECTURES = ("learnable", "fourier")


def _uniform(rng: np.random.Generator, shape, bound: float) -> np.ndarray:
    return rng.uniform(-bound, bound, size=shape)


@dataclass
class TransformBlockParams:
    """Learnables of one learnable-transform block."""

    dims: tuple[int, ...]
    modes: tuple[int, ...]
    L_f: list[Parameter]
    L_b: list[Parameter]
    R: Parameter
    W: Parameter
    W_bias: Parameter

    @property
    def width(self) -> int:
        return self.W.shape[0]

    @classmethod
    def init(
        cls,
        width: int,
        dims: Sequence[int],
        modes: Sequence[int],
        rng: np.random.Generator,
        prefix: str = "",
        r_init: str = "random",
    ) -> "TransformBlockParams":
        dims, modes = tuple(int(d) for d in dims), tuple(int(k) for k in modes)
        if len(dims) != len(modes):
            raise ConfigError(f"dims {dims} and modes {modes} differ in length")
        for i, (d, k) in enumerate(zip(dims, modes)):
            if not 1 <= k <= d:
                raise ModeError(f"axis {i}: need 1 <= k <= d, got k={k}, d={d}")
        L_f = [Parameter(_uniform(rng, (d, k), np.sqrt(1.0 / d)), name=f"{prefix}L_f{i}")
               for i, (d, k) in enumerate(zip(dims, modes))]
        L_b = [Parameter(_uniform(rng, (k, d), np.sqrt(1.0 / k)), name=f"{prefix}L_b{i}")
               for i, (d, k) in enumerate(zip(dims, modes))]
        r = rng.uniform(0.0, 1.0, size=(width, width, *modes)) / width**2
        if r_init == "identity":
            eye = np.eye(width).reshape(width, width, *([1] * len(modes)))
            r = r + eye
        elif r_init != "random":
            raise ConfigError(f"unknown r_init {r_init!r}; expected 'random' or 'identity'")
        bound = np.sqrt(1.0 / width)
        return cls(
            dims=dims,
            modes=modes,
            L_f=L_f,
            L_b=L_b,
            R=Parameter(r, name=f"{prefix}R"),
            W=Parameter(_uniform(rng, (width, width), bound), name=f"{prefix}W"),
            W_bias=Parameter(_uniform(rng, (width,), bound), name=f"{prefix}W_bias"),
        )

    def parameters(self) -> list[Parameter]:
        return [*self.L_f, *self.L_b, self.R, self.W, self.W_bias]


@dataclass
class SpectralBaselineParams:
    """Learnables of one truncated-DFT block; ``R`` is complex, kept as two real tensors."""

    dims: tuple[int, ...]
    modes: tuple[int, ...]
    R_re: Parameter
    R_im: Parameter
    W: Parameter
    W_bias: Parameter

    @property
    def width(self) -> int:
        return self.W.shape[0]

    @classmethod
    def init(
        cls,
        width: int,
        dims: Sequence[int],
        modes: Sequence[int],
        rng: np.random.Generator,
        prefix: str = "",
    ) -> "SpectralBaselineParams":
        dims, modes = tuple(int(d) for d in dims), tuple(int(k) for k in modes)
        check_modes(dims, modes)
        scale = 1.0 / width**2
        bound = np.sqrt(1.0 / width)
        return cls(
            dims=dims,
            modes=modes,
            R_re=Parameter(scale * rng.uniform(0.0, 1.0, size=(width, width, *modes)), name=f"{prefix}R_re"),
            R_im=Parameter(scale * rng.uniform(0.0, 1.0, size=(width, width, *modes)), name=f"{prefix}R_im"),
            W=Parameter(_uniform(rng, (width, width), bound), name=f"{prefix}W"),
            W_bias=Parameter(_uniform(rng, (width,), bound), name=f"{prefix}W_bias"),
        )

    def parameters(self) -> list[Parameter]:
        return [self.R_re, self.R_im, self.W, self.W_bias]


# ------------------------------------------------------- learnable transforms


def _spatial_axes(v: Tensor, n: int) -> list[int]:
    if v.ndim < n + 1:
        raise DimensionError(f"expected a channel axis plus {n} spatial axes, got shape {v.shape}")
    return list(range(v.ndim - n, v.ndim))


def forward_transform_M(v, params: TransformBlockParams, order: Sequence[int] | None = None) -> Tensor:
    """Contract each spatial axis i with ``L_f[i]``: (..., c, d_1..d_n) -> (..., c, k_1..k_n)."""
    n = len(params.dims)
    axes = _spatial_axes(v, n)
    for i, ax in enumerate(axes):
        if v.shape[ax] != params.dims[i]:
            raise DimensionError(
                f"forward_transform_M: spatial axis {i} has extent {v.shape[ax]}, expected {params.dims[i]}"
            )
    z = v
    for i in order if order is not None else range(n):
        z = contract_axis(z, params.L_f[i], axes[i])
    return z


def mode_mix_R(z, R) -> Tensor:
    """Channel mixing at every retained mode: ``out[j, m] = sum_i R[i, j, m] z[i, m]``."""
    return mode_mix(z, R)


def inverse_transform_N(z, params: TransformBlockParams) -> Tensor:
    """Contract each mode axis i with ``L_b[i]``: (..., c, k_1..k_n) -> (..., c, d_1..d_n)."""
    n = len(params.modes)
    axes = _spatial_axes(z, n)
    for i, ax in enumerate(axes):
        if z.shape[ax] != params.modes[i]:
            raise DimensionError(
                f"inverse_transform_N: mode axis {i} has extent {z.shape[ax]}, expected {params.modes[i]}"
            )
    out = z
    for i, ax in enumerate(axes):
        out = contract_axis(out, params.L_b[i], ax)
    return out


def channel_mix(v, W, bias, n: int) -> Tensor:
    """Pointwise ``W v + b`` over the channel axis (the one before the n spatial axes)."""
    ch = v.ndim - n - 1
    return add_bias(contract_axis(v, W, ch), bias, ch)


def block_update(v, params: TransformBlockParams, activation: Activation | None = relu) -> Tensor:
    """One learnable block: ``activation(W v + b + N(R . M(v)))``."""
    n = len(params.dims)
    kernel = inverse_transform_N(mode_mix_R(forward_transform_M(v, params), params.R), params)
    out = add(channel_mix(v, params.W, params.W_bias, n), kernel)
    return activation(out) if activation is not None else out


# ------------------------------------------------------------ truncated DFT


def max_modes(dims: Sequence[int]) -> tuple[int, ...]:
    """Untruncated mode counts: every frequency on leading axes, half spectrum on the last."""
    dims = tuple(dims)
    return (*dims[:-1], dims[-1] // 2 + 1)


def check_modes(dims: Sequence[int], modes: Sequence[int]) -> None:
    if len(dims) != len(modes):
        raise ModeError(f"dims {tuple(dims)} and modes {tuple(modes)} differ in length")
    for i, (k, kmax) in enumerate(zip(modes, max_modes(dims))):
        if not 1 <= k <= kmax:
            raise ModeError(f"axis {i}: {k} modes requested, at most {kmax} available for extent {dims[i]}")


@lru_cache(maxsize=64)
def _dft_pair(d: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    """cos/sin tables of shape (d, k) for frequencies 0..k-1."""
    phase = 2.0 * np.pi * np.outer(np.arange(d), np.arange(k)) / d
    c, s = np.cos(phase), np.sin(phase)
    c.setflags(write=False)
    s.setflags(write=False)
    return c, s


@lru_cache(maxsize=64)
def _half_spectrum_weights(d: int, k: int) -> np.ndarray:
    w = np.full(k, 2.0)
    w[0] = 1.0
    if d % 2 == 0 and k > d // 2:
        w[d // 2] = 1.0
    w.setflags(write=False)
    return w


def dft_truncated(v, modes: Sequence[int]) -> tuple[Tensor, Tensor]:
    """Truncated n-dim DFT over the last ``len(modes)`` axes; returns (real, imag)."""
    v = v if isinstance(v, Tensor) else Tensor(v)
    n = len(modes)
    axes = _spatial_axes(v, n)
    dims = tuple(v.shape[ax] for ax in axes)
    check_modes(dims, modes)
    # real -> complex along the last axis: v (C - iS)
    c, s = _dft_pair(dims[-1], modes[-1])
    re = contract_axis(v, Tensor(c), axes[-1])
    im = contract_axis(v, Tensor(-s), axes[-1])
    for i in range(n - 1):
        c, s = _dft_pair(dims[i], modes[i])
        c, s = Tensor(c), Tensor(s)
        # (a + ib)(C - iS) = (aC + bS) + i(bC - aS)
        re, im = (
            add(contract_axis(re, c, axes[i]), contract_axis(im, s, axes[i])),
            sub(contract_axis(im, c, axes[i]), contract_axis(re, s, axes[i])),
        )
    return re, im


def idft_padded(re, im, dims: Sequence[int]) -> Tensor:
    """Inverse of :func:`dft_truncated`: zero-pad missing modes, 1/d scaling, real output."""
    re = re if isinstance(re, Tensor) else Tensor(re)
    im = im if isinstance(im, Tensor) else Tensor(im)
    if re.shape != im.shape:
        raise DimensionError(f"idft_padded: real/imag shapes differ {re.shape} vs {im.shape}")
    dims = tuple(int(d) for d in dims)
    n = len(dims)
    axes = _spatial_axes(re, n)
    modes = tuple(re.shape[ax] for ax in axes)
    check_modes(dims, modes)
    for i in range(n - 1):
        c, s = _dft_pair(dims[i], modes[i])
        ci, si = Tensor(c.T / dims[i]), Tensor(s.T / dims[i])
        # (a + ib)(C + iS) = (aC - bS) + i(aS + bC)
        re, im = (
            sub(contract_axis(re, ci, axes[i]), contract_axis(im, si, axes[i])),
            add(contract_axis(re, si, axes[i]), contract_axis(im, ci, axes[i])),
        )
    d, k = dims[-1], modes[-1]
    c, s = _dft_pair(d, k)
    w = _half_spectrum_weights(d, k)[:, None] / d
    return sub(contract_axis(re, Tensor(w * c.T), axes[-1]), contract_axis(im, Tensor(w * s.T), axes[-1]))


def spectral_mode_mix(re, im, R_re, R_im) -> tuple[Tensor, Tensor]:
    """Complex per-mode channel mixing via the four-product rule."""
    out_re = sub(mode_mix(re, R_re), mode_mix(im, R_im))
    out_im = add(mode_mix(re, R_im), mode_mix(im, R_re))
    return out_re, out_im


def spectral_block_update(v, params: SpectralBaselineParams, activation: Activation | None = relu) -> Tensor:
    """Baseline block: ``activation(W v + b + IDFT(R . DFT(v)))``.

    Spatial extents may differ from ``params.dims``; the DFT tables follow the
    input grid, so the block transfers across resolutions natively.
    """
    v = v if isinstance(v, Tensor) else Tensor(v)
    n = len(params.modes)
    dims = tuple(v.shape[v.ndim - n:])
    re, im = dft_truncated(v, params.modes)
    re, im = spectral_mode_mix(re, im, params.R_re, params.R_im)
    kernel = idft_padded(re, im, dims)
    out = add(channel_mix(v, params.W, params.W_bias, n), kernel)
    return activation(out) if activation is not None else out


# --------------------------------------------------------- parameter counts


def param_breakdown(arch: str, width: int, dims: Sequence[int], modes: Sequence[int]) -> dict[str, int]:
    """Per-block parameter counts split by component.

    ``total`` covers the transform path (M, R, N) only; the pointwise map W and
    its bias are listed separately.
    """
    dims, modes = tuple(dims), tuple(modes)
    if len(dims) != len(modes):
        raise ConfigError(f"dims {dims} and modes {modes} differ in length")
    prod_k = int(np.prod(modes, dtype=np.int64))
    dk = sum(int(d) * int(k) for d, k in zip(dims, modes))
    if arch == "learnable":
        parts = {"M": dk, "R": width**2 * prod_k, "N": dk}
    elif arch == "fourier":
        parts = {"M": 0, "R": 2 * width**2 * prod_k, "N": 0}
    else:
        raise ConfigError(f"unknown architecture {arch!r}; expected one of {ARCHITECTURES}")
    parts["total"] = parts["M"] + parts["R"] + parts["N"]
    parts["W"] = width**2
    parts["W_bias"] = width
    return parts


def param_count(arch: str, width: int, dims: Sequence[int], modes: Sequence[int]) -> int:
    """Transform-path parameters per block (excludes W)."""
    return param_breakdown(arch, width, dims, modes)["total"]


def param_difference(width: int, dims: Sequence[int], modes: Sequence[int]) -> int:
    """How many more per-block parameters the DFT baseline carries than the learnable block."""
    prod_k = int(np.prod(tuple(modes), dtype=np.int64))
    return width**2 * prod_k - 2 * sum(int(d) * int(k) for d, k in zip(dims, modes))
