"""Training loop, relative-L2 metric, resolution sweeps and timing benchmarks."""
from __future__ import annotations

import csv
import dataclasses
import json
import logging
import platform
import statistics
import subprocess
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .blocks import param_breakdown, param_difference
from .data import PdeDataset
from .errors import ConfigError, MetricError, NonFiniteError, ResolutionError
from .model import OperatorModel
from .tensor import adam_step, backward, mse_loss, no_grad, relative_l2_loss, step_lr

log = logging.getLogger(__name__)

LOSSES = ("rel_l2", "mse")


def relative_l2(pred, target) -> float:
    """Mean over samples of ``100 * ||pred - target|| / ||target||`` (leading axis = samples).

    1-D inputs are treated as a single sample.
    """
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise MetricError(f"relative_l2: shape mismatch {pred.shape} vs {target.shape}")
    if pred.ndim <= 1:
        pred, target = pred[None], target[None]
    b = pred.shape[0]
    tnorm = np.linalg.norm(target.reshape(b, -1), axis=1)
    if np.any(tnorm == 0):
        raise MetricError("relative_l2: target has zero norm")
    err = np.linalg.norm((pred - target).reshape(b, -1), axis=1) / tnorm
    return float(100.0 * np.mean(err))


@dataclass
class TrainConfig:
    dataset: str = ""
    arch: str = "learnable"
    width: int = 16
    modes: list = field(default_factory=lambda: [16])
    depth: int = 4
    epochs: int = 500
    batch_size: int = 20
    lr0: float = 1e-3
    lr_period: int = 100
    lr_factor: float = 0.5
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.0
    grad_clip: float | None = None
    loss: str = "rel_l2"
    seed: int = 0
    n_train: int | None = None
    n_test: int = 0
    resolution: int | None = None
    eval_resolutions: list = field(default_factory=list)
    eval_every: int = 1
    positional: bool = True
    r_init: str = "random"
    out_dir: str | None = None

    def validate(self, dataset_size: int | None = None) -> None:
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.depth < 1:
            raise ConfigError(f"depth must be >= 1, got {self.depth}")
        if self.loss not in LOSSES:
            raise ConfigError(f"loss must be one of {LOSSES}, got {self.loss!r}")
        if self.arch not in ("learnable", "fourier"):
            raise ConfigError(f"arch must be 'learnable' or 'fourier', got {self.arch!r}")
        if self.lr_period < 1:
            raise ConfigError(f"lr_period must be >= 1, got {self.lr_period}")
        if dataset_size is not None:
            n_train = self.n_train if self.n_train is not None else dataset_size - self.n_test
            if n_train < 1 or n_train + self.n_test > dataset_size:
                raise ConfigError(
                    f"split n_train={n_train}, n_test={self.n_test} does not fit a dataset of {dataset_size}"
                )

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**d)


@dataclass
class RunReport:
    config: dict
    seed: int
    epochs: list[int] = field(default_factory=list)
    lr: list[float] = field(default_factory=list)
    train_loss: list[float] = field(default_factory=list)
    test_curve: list[float] = field(default_factory=list)
    per_epoch_seconds: list[float] = field(default_factory=list)
    test_rel_l2: dict = field(default_factory=dict)
    eval_table: list[dict] = field(default_factory=list)
    param_counts: dict = field(default_factory=dict)
    version: str = ""
    machine: dict = field(default_factory=dict)
    aborted: dict | None = None

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def write(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def read(cls, path) -> "RunReport":
        d = json.loads(Path(path).read_text())
        known = {f.name for f in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in known})


def version_stamp() -> str:
    try:
        rev = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"], capture_output=True, text=True, timeout=5,
            cwd=Path(__file__).resolve().parent,
        )
        if rev.returncode == 0 and rev.stdout.strip():
            return f"{__version__}+g{rev.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def machine_info() -> dict:
    return {
        "platform": platform.platform(),
        "processor": platform.processor() or platform.machine(),
        "python": platform.python_version(),
        "numpy": np.__version__,
    }


def param_summary(model: OperatorModel) -> dict:
    other = "fourier" if model.arch == "learnable" else "learnable"
    return {
        "per_block": param_breakdown(model.arch, model.width, model.dims, model.modes),
        "per_block_other_arch": {other: param_breakdown(other, model.width, model.dims, model.modes)},
        "difference_per_block": param_difference(model.width, model.dims, model.modes),
        "blocks": model.depth,
        "total": model.num_parameters(),
    }


def _modes_for(config: TrainConfig, n: int) -> tuple[int, ...]:
    modes = config.modes if isinstance(config.modes, (list, tuple)) else [config.modes]
    modes = [int(k) for k in modes]
    if len(modes) == 1:
        modes = modes * n
    if len(modes) != n:
        raise ConfigError(f"{len(modes)} mode counts given for a rank-{n} grid")
    return tuple(modes)


def split_dataset(config: TrainConfig, dataset: PdeDataset) -> tuple[PdeDataset, PdeDataset | None]:
    config.validate(len(dataset))
    n_train = config.n_train if config.n_train is not None else len(dataset) - config.n_test
    train_set = dataset.subset(0, n_train)
    test_set = dataset.subset(n_train, n_train + config.n_test) if config.n_test else None
    return train_set, test_set


def build_model(config: TrainConfig, dataset: PdeDataset) -> OperatorModel:
    dims = dataset.extents if config.resolution is None else dataset.resample(config.resolution).extents
    return OperatorModel.create(
        config.arch,
        dataset.inputs.shape[1],
        dataset.targets.shape[1],
        dims,
        _modes_for(config, len(dims)),
        config.width,
        config.depth,
        positional=config.positional,
        seed=config.seed,
        r_init=config.r_init,
    )


def _clip(params, max_norm: float) -> None:
    total = np.sqrt(sum(float(np.sum(p.grad**2)) for p in params))
    if total > max_norm:
        for p in params:
            p.grad = p.grad * (max_norm / total)


def train(config: TrainConfig, dataset: PdeDataset | None = None, model: OperatorModel | None = None
          ) -> tuple[OperatorModel, RunReport]:
    """Mini-batch Adam on the configured split, with a step learning-rate schedule.

    Each epoch shuffles the training set with a seeded generator, makes one full
    pass, and records the sample-weighted mean loss, the learning rate, the
    wall time of the pass, and (every ``eval_every`` epochs) the test error at
    the training resolution. Checkpoints go to ``out_dir`` at every schedule
    boundary and at the end.
    """
    if dataset is None:
        if not config.dataset:
            raise ConfigError("no dataset given: set config.dataset or pass a PdeDataset")
        dataset = PdeDataset.read(config.dataset)
    train_full, test_full = split_dataset(config, dataset)
    train_set = train_full if config.resolution is None else train_full.resample(config.resolution)
    test_native = None
    if test_full is not None:
        test_native = test_full if config.resolution is None else test_full.resample(config.resolution)
    model = model or build_model(config, dataset)
    params = model.parameters()
    loss_fn = relative_l2_loss if config.loss == "rel_l2" else mse_loss
    out_dir = Path(config.out_dir) if config.out_dir else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)

    report = RunReport(config=config.to_dict(), seed=config.seed, version=version_stamp(),
                       machine=machine_info(), param_counts=param_summary(model))
    shuffle_rng = np.random.default_rng([config.seed, 1])
    x_all, y_all = train_set.inputs, train_set.targets
    n = len(train_set)
    for epoch in range(config.epochs):
        lr = step_lr(epoch, config.lr0, config.lr_period, config.lr_factor)
        perm = shuffle_rng.permutation(n)
        total = 0.0
        start = time.perf_counter()
        for b, s in enumerate(range(0, n, config.batch_size)):
            idx = perm[s:s + config.batch_size]
            model.zero_grad()
            try:
                loss = loss_fn(model.forward(x_all[idx]), y_all[idx])
                backward(loss)
                if config.grad_clip:
                    _clip(params, config.grad_clip)
                adam_step(params, lr, config.beta1, config.beta2, config.eps, config.weight_decay)
            except NonFiniteError as exc:
                report.aborted = {"epoch": epoch + 1, "batch": b, "error": str(exc)}
                err = NonFiniteError(f"training aborted at epoch {epoch + 1}, batch {b}: {exc}")
                err.report = report
                raise err from exc
            total += loss.item() * len(idx)
        elapsed = time.perf_counter() - start
        report.epochs.append(epoch + 1)
        report.lr.append(lr)
        report.train_loss.append(total / n)
        report.per_epoch_seconds.append(elapsed)
        if test_native is not None and ((epoch + 1) % config.eval_every == 0 or epoch + 1 == config.epochs):
            report.test_curve.append(relative_l2(model.predict(test_native.inputs), test_native.targets))
        if out_dir and (epoch + 1) % config.lr_period == 0:
            model.save(out_dir / f"checkpoint_e{epoch + 1}.lnop", {"epoch": epoch + 1})
        log.info("epoch %d lr %.3g loss %.5f (%.2fs)", epoch + 1, lr, total / n, elapsed)

    if test_full is not None:
        resolutions = list(config.eval_resolutions) or [model.dims[0]]
        report.eval_table = evaluate(model, test_full, resolutions)
        report.test_rel_l2 = {str(row["resolution"]): row["rel_l2"] for row in report.eval_table}
    if out_dir:
        model.save(out_dir / "model.lnop", {"epoch": config.epochs, "config": config.to_dict()})
        report.write(out_dir / "report.json")
    return model, report


def _extents_for(model: OperatorModel, resolution) -> tuple[int, ...]:
    if isinstance(resolution, (list, tuple)):
        return tuple(int(e) for e in resolution)
    resolution = int(resolution)
    base = model.dims[0]
    if resolution % base:
        raise ResolutionError(f"resolution {resolution} is not an integer multiple of training extent {base}")
    return tuple(d * (resolution // base) for d in model.dims)


def evaluate(model: OperatorModel, dataset: PdeDataset, resolutions: Sequence, pipeline: str | None = None,
             batch_size: int = 32) -> list[dict]:
    """Mean % relative L2 at each resolution (an int scales every axis by ``res / dims[0]``).

    The dataset is point-subsampled to each resolution, so it must be at least
    as fine as the finest one requested.
    """
    rows = []
    for res in resolutions:
        extents = _extents_for(model, res)
        model.superres_factors(extents)
        data = dataset if tuple(dataset.extents) == extents else dataset.resample(extents)
        preds = []
        with no_grad():
            for s in range(0, len(data), batch_size):
                preds.append(model.forward_superres(data.inputs[s:s + batch_size], pipeline=pipeline).data)
        pred = np.concatenate(preds)
        native = extents == tuple(model.dims)
        rows.append({
            "resolution": res if not isinstance(res, (list, tuple)) else "x".join(map(str, res)),
            "extents": list(extents),
            "rel_l2": relative_l2(pred, data.targets),
            "pipeline": "direct" if native else (pipeline or model.default_pipeline),
        })
    return rows


def write_table_csv(rows: list[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["resolution", "extents", "rel_l2", "pipeline"])
        writer.writeheader()
        for row in rows:
            writer.writerow({**row, "extents": "x".join(map(str, row["extents"]))})


def bench(configs: Sequence[TrainConfig], dataset: PdeDataset, epochs: int = 5, warmup: int = 1) -> dict:
    """Median per-epoch training time after warm-up, with per-block parameter counts."""
    if len(configs) < 2:
        raise ConfigError("bench needs at least two configurations to compare")
    rows = []
    for cfg in configs:
        cfg = dataclasses.replace(cfg, epochs=warmup + epochs, n_test=0, out_dir=None)
        model, report = train(cfg, dataset)
        times = report.per_epoch_seconds[warmup:]
        counts = param_breakdown(model.arch, model.width, model.dims, model.modes)
        rows.append({
            "arch": model.arch,
            "width": model.width,
            "dims": list(model.dims),
            "modes": list(model.modes),
            "depth": model.depth,
            "median_epoch_seconds": statistics.median(times),
            "epoch_seconds": times,
            "params_M": counts["M"],
            "params_R": counts["R"],
            "params_N": counts["N"],
            "params_block": counts["total"],
            "params_W": counts["W"],
            "params_total": model.num_parameters(),
        })
    ref = configs[0]
    n = len(rows[0]["dims"])
    return {
        "rows": rows,
        "difference_per_block": param_difference(ref.width, rows[0]["dims"], _modes_for(ref, n)),
        "machine": machine_info(),
        "version": version_stamp(),
    }
