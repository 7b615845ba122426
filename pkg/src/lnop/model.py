"""Full operator: lifting P, a stack of blocks, projection Q, and resolution transfer."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import __version__
from .blocks import (
    ARCHITECTURES,
    SpectralBaselineParams,
    TransformBlockParams,
    block_update,
    channel_mix,
    spectral_block_update,
)
from .container import read_bundle, write_bundle
from .errors import ConfigError, DimensionError, FormatError, ResolutionError
from .tensor import Parameter, Tensor, contract_axis, no_grad, relu, reshape

DEFAULT_INTERP = {1: "nearest", 2: "bilinear", 3: "trilinear"}
_INTERP_RANK = {"linear": 1, "bilinear": 2, "trilinear": 3}


@dataclass(frozen=True)
class GridSpec:
    extents: tuple[int, ...]
    bounds: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.extents) != len(self.bounds):
            raise ConfigError(f"{len(self.extents)} extents but {len(self.bounds)} bound pairs")
        for e, (lo, hi) in zip(self.extents, self.bounds):
            if e < 2:
                raise ConfigError(f"grid extent {e} < 2")
            if not lo < hi:
                raise ConfigError(f"grid bounds ({lo}, {hi}) not ordered")

    @classmethod
    def unit(cls, extents: Sequence[int], length: float = 1.0) -> "GridSpec":
        return cls(tuple(int(e) for e in extents), tuple((0.0, float(length)) for _ in extents))

    def coordinates(self, axis: int) -> np.ndarray:
        """Left-aligned nodes ``lo + i * (hi - lo) / extent`` (periodic-friendly, nested under refinement)."""
        lo, hi = self.bounds[axis]
        return lo + (hi - lo) * np.arange(self.extents[axis]) / self.extents[axis]

    def to_dict(self) -> dict:
        return {"extents": list(self.extents), "bounds": [list(b) for b in self.bounds]}

    @classmethod
    def from_dict(cls, d: dict) -> "GridSpec":
        return cls(tuple(d["extents"]), tuple(tuple(b) for b in d["bounds"]))


# ---------------------------------------------------------------- resampling


@lru_cache(maxsize=64)
def pool_matrix(d: int, factor: int) -> np.ndarray:
    """(d, d // factor) matrix taking means over non-overlapping windows."""
    if factor < 1 or d % factor:
        raise ResolutionError(f"extent {d} is not divisible by pooling factor {factor}")
    m = np.zeros((d, d // factor))
    m[np.arange(d), np.arange(d) // factor] = 1.0 / factor
    m.setflags(write=False)
    return m


@lru_cache(maxsize=64)
def interp_matrix(d_src: int, d_dst: int, mode: str) -> np.ndarray:
    """(d_src, d_dst) weights for half-pixel-aligned resampling along one axis.

    Source coordinate ``(j + 0.5) * d_src / d_dst - 0.5`` is clamped to
    ``[0, d_src - 1]``; ``nearest`` breaks ties toward the lower index.
    """
    j = np.arange(d_dst)
    src = np.clip((j + 0.5) * (d_src / d_dst) - 0.5, 0.0, d_src - 1)
    m = np.zeros((d_src, d_dst))
    if mode == "nearest":
        idx = np.ceil(src - 0.5).astype(int)
        m[idx, j] = 1.0
    else:
        i0 = np.floor(src).astype(int)
        i1 = np.minimum(i0 + 1, d_src - 1)
        w = src - i0
        np.add.at(m, (i0, j), 1.0 - w)
        np.add.at(m, (i1, j), w)
    m.setflags(write=False)
    return m


def avg_pool(x, factors: Sequence[int]):
    """Mean over non-overlapping windows on the last ``len(factors)`` axes."""
    t = x if isinstance(x, Tensor) else Tensor(x)
    n = len(factors)
    for i, f in enumerate(factors):
        ax = t.ndim - n + i
        if f != 1:
            t = contract_axis(t, Tensor(pool_matrix(t.shape[ax], int(f))), ax)
    return t if isinstance(x, Tensor) else t.data


def interpolate(x, extents: Sequence[int], mode: str | None = None):
    """Resample the last ``len(extents)`` axes to ``extents``.

    ``nearest`` works at any rank; ``linear``, ``bilinear`` and ``trilinear``
    require 1, 2 and 3 axes respectively.
    """
    n = len(extents)
    mode = mode or DEFAULT_INTERP.get(n, "nearest")
    if mode != "nearest":
        if mode not in _INTERP_RANK:
            raise ConfigError(f"unknown interpolation mode {mode!r}")
        if _INTERP_RANK[mode] != n:
            raise ConfigError(f"interpolation mode {mode!r} needs {_INTERP_RANK[mode]} axes, got {n}")
    t = x if isinstance(x, Tensor) else Tensor(x)
    for i, e in enumerate(extents):
        ax = t.ndim - n + i
        if t.shape[ax] != e:
            t = contract_axis(t, Tensor(interp_matrix(t.shape[ax], int(e), mode)), ax)
    return t if isinstance(x, Tensor) else t.data


# --------------------------------------------------------------------- model


@dataclass
class OperatorModel:
    """Lifting P, ``depth`` blocks of one architecture, and a two-layer projection Q.

    Inputs are ``(d_a, *dims)`` or batched ``(batch, d_a, *dims)``. With
    ``positional=True`` the normalized grid coordinates are appended as extra
    input channels before P.
    """

    arch: str
    in_channels: int
    out_channels: int
    dims: tuple[int, ...]
    modes: tuple[int, ...]
    width: int
    depth: int
    positional: bool = True
    lift_hidden: int = 0
    seed: int = 0
    r_init: str = "random"
    params: dict[str, Parameter] = field(default_factory=dict, repr=False)
    blocks: list = field(default_factory=list, repr=False)

    @classmethod
    def create(
        cls,
        arch: str,
        in_channels: int,
        out_channels: int,
        dims: Sequence[int],
        modes: Sequence[int],
        width: int,
        depth: int = 4,
        *,
        positional: bool = True,
        lift_hidden: int = 0,
        seed: int = 0,
        r_init: str = "random",
    ) -> "OperatorModel":
        if arch not in ARCHITECTURES:
            raise ConfigError(f"unknown architecture {arch!r}; expected one of {ARCHITECTURES}")
        if depth < 1:
            raise ConfigError(f"depth must be >= 1, got {depth}")
        dims, modes = tuple(int(d) for d in dims), tuple(int(k) for k in modes)
        if len(dims) != len(modes):
            raise ConfigError(f"dims {dims} and modes {modes} differ in length")
        model = cls(arch, int(in_channels), int(out_channels), dims, modes, int(width), int(depth),
                    positional, int(lift_hidden), int(seed), r_init)
        model._init_params(np.random.default_rng(seed))
        return model

    @property
    def n(self) -> int:
        return len(self.dims)

    @property
    def lifted_channels(self) -> int:
        return self.in_channels + (self.n if self.positional else 0)

    def _dense(self, name: str, fan_in: int, fan_out: int, rng) -> None:
        bound = np.sqrt(1.0 / fan_in)
        self.params[f"{name}_w"] = Parameter(rng.uniform(-bound, bound, (fan_in, fan_out)), name=f"{name}_w")
        self.params[f"{name}_b"] = Parameter(rng.uniform(-bound, bound, (fan_out,)), name=f"{name}_b")

    def _init_params(self, rng: np.random.Generator) -> None:
        self.params = {}
        self.blocks = []
        if self.lift_hidden:
            self._dense("P0", self.lifted_channels, self.lift_hidden, rng)
            self._dense("P", self.lift_hidden, self.width, rng)
        else:
            self._dense("P", self.lifted_channels, self.width, rng)
        for t in range(self.depth):
            prefix = f"block{t}."
            if self.arch == "learnable":
                blk = TransformBlockParams.init(self.width, self.dims, self.modes, rng, prefix, self.r_init)
            else:
                blk = SpectralBaselineParams.init(self.width, self.dims, self.modes, rng, prefix)
            self.blocks.append(blk)
            for p in blk.parameters():
                self.params[p.name] = p
        self._dense("Q1", self.width, 4 * self.width, rng)
        self._dense("Q2", 4 * self.width, self.out_channels, rng)

    def parameters(self) -> list[Parameter]:
        return list(self.params.values())

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.zero_grad()

    def num_parameters(self) -> int:
        return sum(p.size for p in self.params.values())

    # ------------------------------------------------------------- forward

    def _batched(self, a) -> tuple[np.ndarray, bool]:
        arr = np.asarray(a.data if isinstance(a, Tensor) else a, dtype=np.float64)
        single = arr.ndim == self.n + 1
        if single:
            arr = arr[None]
        if arr.ndim != self.n + 2 or arr.shape[1] != self.in_channels:
            raise DimensionError(
                f"input shape {arr.shape if not single else arr.shape[1:]} does not match "
                f"(batch?, {self.in_channels}, <{self.n} spatial axes>)"
            )
        return arr, single

    def _with_coordinates(self, arr: np.ndarray) -> np.ndarray:
        if not self.positional:
            return arr
        extents = arr.shape[2:]
        grids = np.meshgrid(*[np.arange(e) / e for e in extents], indexing="ij")
        coords = np.broadcast_to(np.stack(grids), (arr.shape[0], self.n, *extents))
        return np.concatenate([arr, coords], axis=1)

    def lift(self, arr: np.ndarray) -> Tensor:
        x = Tensor(self._with_coordinates(arr))
        if self.lift_hidden:
            x = relu(channel_mix(x, self.params["P0_w"], self.params["P0_b"], self.n))
        return channel_mix(x, self.params["P_w"], self.params["P_b"], self.n)

    def run_blocks(self, v: Tensor) -> Tensor:
        for blk in self.blocks:
            v = block_update(v, blk) if self.arch == "learnable" else spectral_block_update(v, blk)
        return v

    def project(self, v: Tensor) -> Tensor:
        h = relu(channel_mix(v, self.params["Q1_w"], self.params["Q1_b"], self.n))
        return channel_mix(h, self.params["Q2_w"], self.params["Q2_b"], self.n)

    def features(self, a) -> Tensor:
        """Representation after the last block (before Q), batched."""
        arr, _ = self._batched(a)
        self._check_extents(arr.shape[2:])
        return self.run_blocks(self.lift(arr))

    def _check_extents(self, extents) -> None:
        if tuple(extents) != self.dims:
            raise DimensionError(
                f"input extents {tuple(extents)} differ from training extents {self.dims}; "
                "use forward_superres for other resolutions"
            )

    def forward(self, a) -> Tensor:
        """``Q(blocks(P(a)))`` at the training resolution."""
        arr, single = self._batched(a)
        self._check_extents(arr.shape[2:])
        u = self.project(self.run_blocks(self.lift(arr)))
        return reshape(u, u.shape[1:]) if single else u

    __call__ = forward

    def superres_factors(self, extents: Sequence[int]) -> tuple[int, ...]:
        factors = []
        for e, d in zip(extents, self.dims):
            if e % d or e < d:
                raise ResolutionError(f"resolution {tuple(extents)} is not an integer multiple of {self.dims}")
            factors.append(e // d)
        return tuple(factors)

    def forward_superres(self, a, pipeline: str | None = None, mode: str | None = None) -> Tensor:
        """Evaluate at an integer multiple of the training resolution.

        ``pool-interp``: average-pool the input to the training grid, run P and
        the blocks, interpolate the width-channel representation back to the
        input grid, then apply Q. ``native``: run the DFT baseline directly on
        the fine grid (its transforms follow the input extents). The default is
        ``pool-interp`` for learnable models and ``native`` for the baseline.
        """
        pipeline = pipeline or self.default_pipeline
        arr, single = self._batched(a)
        extents = arr.shape[2:]
        factors = self.superres_factors(extents)
        if all(f == 1 for f in factors):
            return self.forward(a)
        if pipeline == "native":
            if self.arch != "fourier":
                raise ConfigError("the native pipeline needs resolution-independent (fourier) blocks")
            u = self.project(self.run_blocks(self.lift(arr)))
        elif pipeline == "pool-interp":
            pooled = avg_pool(arr, factors)
            v = self.run_blocks(self.lift(pooled))
            u = self.project(interpolate(v, extents, mode))
        else:
            raise ConfigError(f"unknown super-resolution pipeline {pipeline!r}")
        return reshape(u, u.shape[1:]) if single else u

    @property
    def default_pipeline(self) -> str:
        return "pool-interp" if self.arch == "learnable" else "native"

    def predict(self, a, batch_size: int = 32) -> np.ndarray:
        """Tape-free batched inference at any supported resolution."""
        arr, single = self._batched(a)
        outs = []
        with no_grad():
            for s in range(0, arr.shape[0], batch_size):
                outs.append(self.forward_superres(arr[s:s + batch_size]).data)
        out = np.concatenate(outs, axis=0)
        return out[0] if single else out

    # ---------------------------------------------------------- checkpoint

    def metadata(self) -> dict:
        return {
            "kind": "checkpoint",
            "architecture": self.arch,
            "in_channels": self.in_channels,
            "out_channels": self.out_channels,
            "dims": list(self.dims),
            "modes": list(self.modes),
            "width": self.width,
            "depth": self.depth,
            "positional": self.positional,
            "lift_hidden": self.lift_hidden,
            "seed": self.seed,
            "r_init": self.r_init,
            "param_names": list(self.params),
            "version": __version__,
        }

    def save(self, path, extra: dict | None = None) -> None:
        meta = self.metadata()
        if extra:
            meta.update(extra)
        write_bundle(path, [p.data for p in self.params.values()], meta)

    @classmethod
    def load(cls, path) -> "OperatorModel":
        tensors, meta = read_bundle(path)
        if meta.get("kind") != "checkpoint":
            raise FormatError(f"{path}: sidecar does not describe a checkpoint")
        model = cls.create(
            meta["architecture"], meta["in_channels"], meta["out_channels"], meta["dims"], meta["modes"],
            meta["width"], meta["depth"], positional=meta["positional"], lift_hidden=meta["lift_hidden"],
            seed=meta["seed"], r_init=meta.get("r_init", "random"),
        )
        if list(model.params) != meta["param_names"] or len(tensors) != len(model.params):
            raise FormatError(f"{path}: parameter list does not match the architecture in its sidecar")
        for p, arr in zip(model.params.values(), tensors):
            if p.shape != arr.shape:
                raise FormatError(f"{path}: parameter {p.name} has shape {arr.shape}, expected {p.shape}")
            p.data = arr.copy()
        return model

