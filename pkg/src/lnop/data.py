"""PDE data: random inputs, reference solvers, and the on-disk dataset container.

All grids are left-aligned, ``x_i = i * L / m`` for ``i = 0 .. m-1``, so a grid
of ``r * m`` points contains the ``m``-point grid as every r-th node. Datasets
are generated on a fine grid and subsampled by striding.
"""
from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterator, Sequence

import numpy as np

from . import __version__
from .container import file_digest, read_pairs, write_pairs
from .errors import ConfigError, FormatError, ResolutionError, SolverError
from .model import GridSpec

log = logging.getLogger(__name__)

FAMILIES = ("burgers", "advection", "darcy", "navier_stokes", "kolmogorov")


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("LNOP_THREADS", "1")))
    except ValueError:
        return 1


# ------------------------------------------------------- gaussian random fields


def grf_sample(
    extents: Sequence[int],
    alpha: float,
    tau: float,
    seed=None,
    *,
    sigma: float = 1.0,
    length: float = 1.0,
    max_mode: int | None = None,
) -> np.ndarray:
    """Periodic zero-mean Gaussian random field by spectral synthesis.

    Coefficient amplitudes are ``sigma * (|k|^2 + tau^2) ** (-alpha / 2)`` with
    angular wavenumber ``k = 2 pi f / length``; the zero-frequency coefficient
    is dropped. ``max_mode`` zeroes every frequency with ``max |f_i| > max_mode``.
    """
    extents = tuple(int(e) for e in extents)
    if alpha <= 0:
        raise ConfigError(f"grf_sample: decay exponent must be positive, got {alpha}")
    if any(e < 4 for e in extents):
        raise ConfigError(f"grf_sample: every extent must be >= 4, got {extents}")
    rng = np.random.default_rng(seed)
    freqs = [np.fft.fftfreq(e, 1.0 / e) for e in extents[:-1]] + [np.fft.rfftfreq(extents[-1], 1.0 / extents[-1])]
    grids = np.meshgrid(*freqs, indexing="ij")
    k2 = sum((2.0 * np.pi * g / length) ** 2 for g in grids)
    amp = sigma * (k2 + tau**2) ** (-alpha / 2.0)
    amp.flat[0] = 0.0
    if max_mode is not None:
        amp[np.max(np.abs(np.stack(grids)), axis=0) > max_mode] = 0.0
    shape = amp.shape
    coef = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    # irfftn keeps only the real part of self-conjugate bins, which symmetrizes the spectrum
    return np.fft.irfftn(coef * amp, s=extents, axes=tuple(range(len(extents)))) * math.prod(extents)


# ----------------------------------------------------------------- burgers


def burgers_solve(
    u0,
    nu: float,
    t_end: float = 1.0,
    *,
    cfl: float = 0.25,
    save_times: Sequence[float] | None = None,
    max_steps: int = 10_000_000,
) -> np.ndarray:
    """Viscous Burgers on the periodic unit interval.

    Pseudo-spectral in space with the 2/3 dealiasing rule; viscosity handled
    exactly by an integrating factor; classical RK4 in time. The step is fixed
    by ``cfl * dx / max|u0|`` (the maximum of |u| cannot grow) and shrunk so the
    output times are hit exactly. ``u0`` may carry leading batch axes.

    Returns ``u(t_end)``, or the stacked snapshots at ``save_times``.
    """
    if nu <= 0:
        raise ConfigError(f"burgers_solve: viscosity must be positive, got {nu}")
    u0 = np.asarray(u0, dtype=np.float64)
    m = u0.shape[-1]
    k = 2.0 * np.pi * np.fft.rfftfreq(m, 1.0 / m)
    dealias = np.abs(np.fft.rfftfreq(m, 1.0 / m)) <= m / 3.0
    times = [float(t_end)] if save_times is None else [float(t) for t in save_times]
    umax = float(np.max(np.abs(u0))) if u0.size else 0.0
    dt_cfl = cfl * (1.0 / m) / umax if umax > 0 else math.inf

    def nonlinear(uh):
        u = np.fft.irfft(uh, n=m)
        return -0.5j * k * np.fft.rfft(u * u) * dealias

    uh = np.fft.rfft(u0)
    t = 0.0
    snaps = []
    total = 0
    for target in times:
        span = target - t
        if span < 0:
            raise ConfigError("burgers_solve: save_times must be non-decreasing")
        if span == 0:
            steps = 0
        elif dt_cfl == math.inf:
            steps = 1
        else:
            steps = math.ceil(span / dt_cfl)
        total += steps
        if total > max_steps:
            raise SolverError(f"burgers_solve: CFL step {dt_cfl:.3e} needs more than {max_steps} steps")
        if steps:
            dt = span / steps
            e_half = np.exp(-nu * k**2 * dt / 2.0)
            e_full = e_half * e_half
            for _ in range(steps):
                k1 = nonlinear(uh)
                k2 = nonlinear(e_half * (uh + 0.5 * dt * k1))
                k3 = nonlinear(e_half * uh + 0.5 * dt * k2)
                k4 = nonlinear(e_full * uh + dt * e_half * k3)
                uh = e_full * uh + dt / 6.0 * (e_full * k1 + 2.0 * e_half * (k2 + k3) + k4)
        t = target
        snaps.append(np.fft.irfft(uh, n=m))
    out = np.stack(snaps)
    if not np.isfinite(out).all():
        raise SolverError("burgers_solve: non-finite solution")
    return out[0] if save_times is None else out


# --------------------------------------------------------------- advection


def advection_initial(x, c: float, width: float, height: float, bump: float | None = None) -> np.ndarray:
    """Square wave of ``width``/``height`` centred at ``c`` plus ``sqrt(max(h^2 - (bump (x - c))^2, 0))``.

    Distances to ``c`` wrap around the unit period. ``bump`` defaults to
    ``2 * height / width`` (semicircle half as wide as the square wave).
    """
    x = np.asarray(x, dtype=np.float64)
    if bump is None:
        bump = 2.0 * height / width
    r = (x - c + 0.5) % 1.0 - 0.5
    square = np.where(np.abs(r) <= width / 2.0, height, 0.0)
    return square + np.sqrt(np.maximum(height**2 - (bump * r) ** 2, 0.0))


def advection_solution(params: Sequence[float], t: float, extents: int) -> tuple[np.ndarray, np.ndarray]:
    """Initial field and its exact unit-speed periodic translate ``u0(x - t)``."""
    c, width, height, *rest = params
    if not 0 < width < 1:
        raise ConfigError(f"advection: width must lie in (0, 1), got {width}")
    bump = rest[0] if rest else None
    x = np.arange(extents) / extents
    return advection_initial(x, c, width, height, bump), advection_initial(x - t, c, width, height, bump)


# ------------------------------------------------------------------- darcy


def _harmonic(a, b):
    return 2.0 * a * b / (a + b)


def darcy_solve(a, f: float = 1.0, *, tol: float = 1e-10, maxiter: int | None = None) -> np.ndarray:
    """``-div(a grad u) = f`` on the unit square, ``u = 0`` on the boundary.

    Nodes sit at ``(i/m, j/m)``; row and column 0 are the boundary at 0 and the
    boundary at 1 is the implicit node m. Face coefficients are harmonic means
    of the adjacent nodal values (``a`` is continued periodically to node m).
    Solved with unpreconditioned conjugate gradients to a relative residual of
    ``tol``.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ConfigError(f"darcy_solve: need a square coefficient grid, got {a.shape}")
    if not np.all(a > 0):
        raise ConfigError("darcy_solve: coefficient must be positive everywhere")
    m = a.shape[0]
    h2 = (1.0 / m) ** 2
    ap = np.pad(a, ((0, 1), (0, 1)), mode="wrap")
    fx = _harmonic(ap[:-1, 1:m], ap[1:, 1:m])      # faces (i, i+1) along axis 0, i = 0..m-1
    fy = _harmonic(ap[1:m, :-1], ap[1:m, 1:])      # faces (j, j+1) along axis 1
    diag = (fx[:-1] + fx[1:] + fy[:, :-1] + fy[:, 1:]) / h2

    def apply(x):
        p = np.zeros((m + 1, m + 1))
        p[1:m, 1:m] = x
        out = diag * x
        out -= fx[1:] * p[2:, 1:m] / h2
        out -= fx[:-1] * p[:-2, 1:m] / h2
        out -= fy[:, 1:] * p[1:m, 2:] / h2
        out -= fy[:, :-1] * p[1:m, :-2] / h2
        return out

    b = np.full((m - 1, m - 1), float(f))
    x = np.zeros_like(b)
    r = b.copy()
    p = r.copy()
    rr = float(np.vdot(r, r))
    bnorm = math.sqrt(float(np.vdot(b, b)))
    limit = maxiter if maxiter is not None else 10 * m * m
    it = 0
    while math.sqrt(rr) > tol * bnorm:
        if it >= limit:
            raise SolverError(f"darcy_solve: CG did not reach {tol:g} in {limit} iterations")
        ap_ = apply(p)
        alpha = rr / float(np.vdot(p, ap_))
        x += alpha * p
        r -= alpha * ap_
        rr_new = float(np.vdot(r, r))
        p = r + (rr_new / rr) * p
        rr = rr_new
        it += 1
    u = np.zeros((m, m))
    u[1:, 1:] = x
    return u


def darcy_coefficient(field_values, high: float = 12.0, low: float = 3.0) -> np.ndarray:
    """Two-phase medium: ``high`` where the field is non-negative, ``low`` elsewhere."""
    return np.where(np.asarray(field_values) >= 0.0, high, low)


def darcy_coefficient_sample(extents: Sequence[int], seed=None, *, alpha: float = 2.0, tau: float = 3.0) -> np.ndarray:
    return darcy_coefficient(grf_sample(extents, alpha, tau, seed))


# ------------------------------------------------------------ navier-stokes


def _forcing(tag, m: int, length: float) -> np.ndarray:
    x = length * np.arange(m) / m
    x1, x2 = np.meshgrid(x, x, indexing="ij")
    if tag is None or tag == "none":
        return np.zeros((m, m))
    if tag == "ns":
        s = 2.0 * np.pi * (x1 + x2)
        return 0.1 * (np.sin(s) + np.cos(s))
    if isinstance(tag, (tuple, list)) and tag[0] == "kolmogorov":
        n = tag[1]
        # curl of sin(n x2) e_1
        return -n * np.cos(n * x2)
    raise ConfigError(f"unknown forcing {tag!r}; expected None, 'ns' or ('kolmogorov', n)")


def navier_stokes_solve(
    w0,
    nu: float,
    forcing=None,
    t_grid: Sequence[float] = (1.0,),
    *,
    length: float | None = None,
    cfl: float = 0.5,
    dt_max: float = 1e-2,
    blowup: float = 1e6,
) -> np.ndarray:
    """2D incompressible Navier-Stokes in vorticity form on a periodic square.

    ``psi`` solves ``-lap psi = w``, velocity is ``(d2 psi, -d1 psi)``, the
    advection term is dealiased by the 2/3 rule and stepped with Heun's method,
    diffusion with Crank-Nicolson. ``forcing`` is None, ``"ns"`` (the
    ``0.1(sin + cos)(2 pi (x1 + x2))`` vorticity source on the unit square) or
    ``("kolmogorov", n)`` (curl of ``sin(n x2) e_1`` on ``(0, 2 pi)^2``).

    Returns ``w`` at each time of ``t_grid``, shape ``(m, m, len(t_grid))``.
    """
    w0 = np.asarray(w0, dtype=np.float64)
    if w0.ndim != 2 or w0.shape[0] != w0.shape[1]:
        raise ConfigError(f"navier_stokes_solve: need a square grid, got {w0.shape}")
    if nu <= 0:
        raise ConfigError(f"navier_stokes_solve: viscosity must be positive, got {nu}")
    if length is None:
        length = 2.0 * np.pi if isinstance(forcing, (tuple, list)) else 1.0
    m = w0.shape[0]
    f_int = np.fft.fftfreq(m, 1.0 / m)
    r_int = np.fft.rfftfreq(m, 1.0 / m)
    k1 = (2.0 * np.pi / length) * f_int[:, None] * np.ones((1, r_int.size))
    k2 = (2.0 * np.pi / length) * r_int[None, :] * np.ones((m, 1))
    lap = k1**2 + k2**2
    lap_safe = lap.copy()
    lap_safe[0, 0] = 1.0
    dealias = (np.abs(f_int)[:, None] <= m / 3.0) & (np.abs(r_int)[None, :] <= m / 3.0)
    f_h = np.fft.rfft2(_forcing(forcing, m, length))
    dx = length / m
    scale0 = max(float(np.max(np.abs(w0))), 1.0)

    def velocity(wh):
        psi = wh / lap_safe
        psi[0, 0] = 0.0
        return np.fft.irfft2(1j * k2 * psi, s=(m, m)), np.fft.irfft2(-1j * k1 * psi, s=(m, m))

    def advection(wh):
        u1, u2 = velocity(wh)
        w1 = np.fft.irfft2(1j * k1 * wh, s=(m, m))
        w2 = np.fft.irfft2(1j * k2 * wh, s=(m, m))
        return -np.fft.rfft2(u1 * w1 + u2 * w2) * dealias

    wh = np.fft.rfft2(w0)
    t = 0.0
    out = np.empty((m, m, len(t_grid)))
    for idx, target in enumerate(t_grid):
        span = float(target) - t
        if span < 0:
            raise ConfigError("navier_stokes_solve: t_grid must be non-decreasing")
        if span > 0:
            u1, u2 = velocity(wh)
            umax = float(max(np.max(np.abs(u1)), np.max(np.abs(u2))))
            dt = min(dt_max, cfl * dx / umax) if umax > 0 else dt_max
            steps = max(1, math.ceil(span / dt))
            dt = span / steps
            lo = 1.0 - 0.5 * dt * nu * lap
            hi = 1.0 + 0.5 * dt * nu * lap
            for _ in range(steps):
                a0 = advection(wh)
                pred = (lo * wh + dt * (a0 + f_h)) / hi
                a1 = advection(pred)
                wh = (lo * wh + dt * (0.5 * (a0 + a1) + f_h)) / hi
            w = np.fft.irfft2(wh, s=(m, m))
            if not np.isfinite(w).all() or np.max(np.abs(w)) > blowup * scale0:
                raise SolverError(f"navier_stokes_solve: vorticity blew up before t={target}")
        out[..., idx] = np.fft.irfft2(wh, s=(m, m))
        t = float(target)
    return out


# ------------------------------------------------------------------ datasets


@dataclass
class PdeSample:
    a: np.ndarray
    u: np.ndarray
    grid: GridSpec


@dataclass
class PdeDataset:
    """Stacked (input, target) pairs sharing one grid.

    ``inputs`` has shape (samples, d_a, *extents), ``targets`` (samples, d_u, *extents).
    """

    name: str
    inputs: np.ndarray
    targets: np.ndarray
    grid: GridSpec
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.inputs.shape[0] != self.targets.shape[0] or self.inputs.shape[2:] != self.targets.shape[2:]:
            raise ConfigError(f"inputs {self.inputs.shape} and targets {self.targets.shape} are not paired")
        if tuple(self.inputs.shape[2:]) != self.grid.extents:
            raise ConfigError(f"grid {self.grid.extents} does not match data extents {self.inputs.shape[2:]}")

    def __len__(self) -> int:
        return self.inputs.shape[0]

    def __iter__(self) -> Iterator[PdeSample]:
        for a, u in zip(self.inputs, self.targets):
            yield PdeSample(a, u, self.grid)

    @property
    def samples(self) -> list[PdeSample]:
        return list(self)

    @property
    def extents(self) -> tuple[int, ...]:
        return self.grid.extents

    def subset(self, start: int, stop: int) -> "PdeDataset":
        if not 0 <= start <= stop <= len(self):
            raise ConfigError(f"subset [{start}, {stop}) outside a dataset of {len(self)} samples")
        return PdeDataset(self.name, self.inputs[start:stop], self.targets[start:stop], self.grid, self.config)

    def resample(self, extents: Sequence[int] | int) -> "PdeDataset":
        """Point-subsample to coarser nested ``extents`` (int = every axis scaled alike)."""
        if isinstance(extents, (int, np.integer)):
            ratio = self.extents[0] / int(extents)
            extents = tuple(int(round(e / ratio)) for e in self.extents)
        extents = tuple(int(e) for e in extents)
        if len(extents) != len(self.extents):
            raise ResolutionError(f"{len(extents)} extents given for a rank-{len(self.extents)} grid")
        strides = []
        for have, want in zip(self.extents, extents):
            if want <= 0 or have % want:
                raise ResolutionError(f"cannot subsample extent {have} to {want}: not an integer divisor")
            strides.append(have // want)
        sl = (slice(None), slice(None), *[slice(None, None, s) for s in strides])
        grid = GridSpec(extents, self.grid.bounds)
        return PdeDataset(self.name, self.inputs[sl].copy(), self.targets[sl].copy(), grid, self.config)

    def write(self, path) -> str:
        meta = {
            "kind": "dataset",
            "name": self.name,
            "grid": self.grid.to_dict(),
            "config": self.config,
            "version": __version__,
        }
        write_pairs(path, self.inputs, self.targets, meta)
        return file_digest(path)

    @classmethod
    def read(cls, path) -> "PdeDataset":
        inputs, targets, meta = read_pairs(path)
        if meta.get("kind", "dataset") != "dataset":
            raise FormatError(f"{path}: sidecar does not describe a dataset")
        grid = GridSpec.from_dict(meta["grid"]) if "grid" in meta else GridSpec.unit(inputs.shape[2:])
        return cls(meta.get("name", "dataset"), inputs, targets, grid, meta.get("config", {}))


def dataset_write(path, dataset: PdeDataset) -> str:
    return dataset.write(path)


def dataset_read(path) -> PdeDataset:
    return PdeDataset.read(path)


# ---------------------------------------------------------------- generators


def _map(fn: Callable[[int], tuple], count: int, threads: int) -> list:
    if threads <= 1 or count <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(count)))


def _check_finite(name: str, *arrays) -> None:
    for arr in arrays:
        if not np.isfinite(arr).all():
            raise SolverError(f"{name}: generated non-finite values")


def _nonincreasing(series: np.ndarray, rtol: float = 1e-10) -> bool:
    return bool(np.all(np.diff(series) <= rtol * max(float(series[0]), 1e-300)))


def generate_burgers(count: int, res: int, seed: int = 0, *, nu: float = 1e-3, t_end: float = 1.0,
                     fine_factor: int = 4, alpha: float = 2.5, tau: float = 7.0, sigma: float = 49.0,
                     threads: int = 1) -> PdeDataset:
    fine = res * fine_factor
    checks = np.linspace(0.0, t_end, 6)

    def one(i):
        u0 = grf_sample((fine,), alpha, tau, [seed, i], sigma=sigma)
        snaps = burgers_solve(u0, nu, save_times=checks)
        energy = np.sum(snaps**2, axis=-1)
        if not _nonincreasing(energy):
            raise SolverError(f"burgers sample {i}: energy increased over time")
        return u0[::fine_factor], snaps[-1][::fine_factor]

    pairs = _map(one, count, threads)
    a = np.stack([p[0] for p in pairs])[:, None]
    u = np.stack([p[1] for p in pairs])[:, None]
    _check_finite("burgers", a, u)
    cfg = dict(family="burgers", count=count, res=res, seed=seed, nu=nu, t_end=t_end, fine_factor=fine_factor,
               alpha=alpha, tau=tau, sigma=sigma)
    return PdeDataset("burgers", a, u, GridSpec.unit((res,)), cfg)


def generate_advection(count: int, res: int, seed: int = 0, *, t: float = 0.5,
                       threads: int = 1) -> PdeDataset:
    def one(i):
        rng = np.random.default_rng([seed, i])
        c = rng.uniform(0.25, 0.75)
        width = rng.uniform(0.1, 0.3)
        height = rng.uniform(0.5, 1.5)
        bump = height / rng.uniform(0.05, 0.2)
        return advection_solution((c, width, height, bump), t, res)

    pairs = _map(one, count, threads)
    a = np.stack([p[0] for p in pairs])[:, None]
    u = np.stack([p[1] for p in pairs])[:, None]
    cfg = dict(family="advection", count=count, res=res, seed=seed, t=t)
    return PdeDataset("advection", a, u, GridSpec.unit((res,)), cfg)


def generate_darcy(count: int, res: int, seed: int = 0, *, fine_factor: int = 4, alpha: float = 2.0,
                   tau: float = 3.0, threads: int = 1) -> PdeDataset:
    fine = res * fine_factor

    def one(i):
        coef = darcy_coefficient_sample((fine, fine), [seed, i], alpha=alpha, tau=tau)
        sol = darcy_solve(coef)
        if sol.min() < 0.0:
            raise SolverError(f"darcy sample {i}: negative pressure violates the maximum principle")
        return coef[::fine_factor, ::fine_factor], sol[::fine_factor, ::fine_factor]

    pairs = _map(one, count, threads)
    a = np.stack([p[0] for p in pairs])[:, None]
    u = np.stack([p[1] for p in pairs])[:, None]
    _check_finite("darcy", a, u)
    cfg = dict(family="darcy", count=count, res=res, seed=seed, fine_factor=fine_factor, alpha=alpha, tau=tau)
    return PdeDataset("darcy", a, u, GridSpec.unit((res, res)), cfg)


def generate_navier_stokes(count: int, res: int, seed: int = 0, *, nu: float = 1e-3, t_in: int = 10,
                           t_out: int = 10, dt: float = 1.0, fine_factor: int = 4, threads: int = 1) -> PdeDataset:
    """Space-time samples: the first ``t_in`` snapshots, broadcast along the output
    time axis, map to the next ``t_out`` snapshots."""
    fine = res * fine_factor
    times = dt * np.arange(t_in + t_out)

    def one(i):
        w0 = grf_sample((fine, fine), 2.5, 7.0, [seed, i], sigma=7.0**1.5)
        traj = navier_stokes_solve(w0, nu, "ns", times, length=1.0)[::fine_factor, ::fine_factor]
        cond = np.broadcast_to(np.moveaxis(traj[..., :t_in], -1, 0)[..., None], (t_in, res, res, t_out))
        return cond, traj[None, ..., t_in:]

    pairs = _map(one, count, threads)
    a = np.stack([p[0] for p in pairs])
    u = np.stack([p[1] for p in pairs])
    _check_finite("navier_stokes", a, u)
    cfg = dict(family="navier_stokes", count=count, res=res, seed=seed, nu=nu, t_in=t_in, t_out=t_out, dt=dt,
               fine_factor=fine_factor)
    grid = GridSpec((res, res, t_out), ((0.0, 1.0), (0.0, 1.0), (t_in * dt, (t_in + t_out) * dt)))
    return PdeDataset("navier_stokes", a, u, grid, cfg)


def generate_kolmogorov(count: int, res: int, seed: int = 0, *, re: float = 100.0, n: int = 4, dt: float = 0.5,
                        burn_in: float = 5.0, pairs_per_trajectory: int = 10, fine_factor: int = 4,
                        threads: int = 1) -> PdeDataset:
    """One-step pairs ``w(t) -> w(t + dt)`` cut from forced trajectories after a burn-in."""
    fine = res * fine_factor
    length = 2.0 * np.pi
    trajectories = math.ceil(count / pairs_per_trajectory)
    times = burn_in + dt * np.arange(pairs_per_trajectory + 1)

    def one(i):
        w0 = grf_sample((fine, fine), 2.5, 7.0, [seed, i], sigma=7.0**1.5, length=length)
        traj = navier_stokes_solve(w0, 1.0 / re, ("kolmogorov", n), times, length=length)
        return traj[::fine_factor, ::fine_factor]

    trajs = _map(one, trajectories, threads)
    a, u = [], []
    for traj in trajs:
        for j in range(pairs_per_trajectory):
            a.append(traj[..., j])
            u.append(traj[..., j + 1])
    a = np.stack(a[:count])[:, None]
    u = np.stack(u[:count])[:, None]
    _check_finite("kolmogorov", a, u)
    cfg = dict(family="kolmogorov", count=count, res=res, seed=seed, re=re, n=n, dt=dt, burn_in=burn_in,
               pairs_per_trajectory=pairs_per_trajectory, fine_factor=fine_factor)
    return PdeDataset("kolmogorov", a, u, GridSpec.unit((res, res), length), cfg)


GENERATORS: dict[str, Callable[..., PdeDataset]] = {
    "burgers": generate_burgers,
    "advection": generate_advection,
    "darcy": generate_darcy,
    "navier_stokes": generate_navier_stokes,
    "kolmogorov": generate_kolmogorov,
}


def generate(family: str, **kwargs) -> PdeDataset:
    try:
        gen = GENERATORS[family]
    except KeyError:
        raise ConfigError(f"unknown PDE family {family!r}; expected one of {FAMILIES}") from None
    return gen(**kwargs)
