"""Self-check suites behind ``lnop verify``.

Each suite returns a :class:`SuiteResult`; :func:`run_suites` runs them in a
fixed order. Inputs are seeded, so repeated runs give identical verdicts.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import oracles
from .blocks import (
    TransformBlockParams,
    block_update,
    dft_truncated,
    forward_transform_M,
    idft_padded,
    inverse_transform_N,
    mode_mix_R,
)
from .data import advection_solution, burgers_solve, darcy_solve, navier_stokes_solve
from .model import OperatorModel
from .tensor import Tensor, backward, mul, no_grad, tsum


@dataclass
class SuiteResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


def gradient_errors(arch: str, n: int, seed: int = 0, eps: float = 1e-6) -> dict[str, float]:
    """Worst scaled mismatch between tape and finite-difference gradients, per parameter.

    The scale is ``max(1e-4 * max(|g|, |fd|), 1e-7)``, so a value <= 1 passes.
    """
    rng = np.random.default_rng([seed, n, arch == "fourier"])
    dims = (8,) * n
    model = OperatorModel.create(arch, 1, 1, dims, (3,) * n, width=2, depth=2, seed=seed)
    x = rng.standard_normal((2, 1, *dims))
    probe = rng.standard_normal((2, 1, *dims))

    def loss_tensor():
        return tsum(mul(model.forward(x), Tensor(probe)))

    def loss_value():
        with no_grad():
            return loss_tensor().item()

    model.zero_grad()
    backward(loss_tensor())
    worst = {}
    for name, p in model.params.items():
        fd = oracles.finite_difference(loss_value, p.data, eps)
        tol = np.maximum(1e-4 * np.maximum(np.abs(p.grad), np.abs(fd)), 1e-7)
        worst[name] = float(np.max(np.abs(p.grad - fd) / tol))
    return worst


def suite_gradients() -> SuiteResult:
    failures, checked = [], 0
    for arch in ("learnable", "fourier"):
        for n in (1, 2):
            for name, ratio in gradient_errors(arch, n).items():
                checked += 1
                if not ratio <= 1.0:
                    failures.append(f"{arch}/{n}d/{name} ({ratio:.2g}x tolerance)")
    if failures:
        return SuiteResult("gradients", False, f"{len(failures)} of {checked} parameters off: {', '.join(failures[:4])}")
    return SuiteResult("gradients", True, f"{checked} parameters match central differences")


def suite_dft() -> SuiteResult:
    rng = np.random.default_rng(11)
    worst = 0.0
    for dims, modes in (((12,), (5,)), ((8, 6), (5, 4)), ((6, 4, 6), (3, 2, 4))):
        v = rng.standard_normal((2, *dims))
        re, im = dft_truncated(Tensor(v), modes)
        ref = oracles.dft(v, modes)
        worst = max(worst, float(np.max(np.abs(re.data + 1j * im.data - ref))) / max(1.0, float(np.abs(ref).max())))
        full = tuple(d if i < len(dims) - 1 else d // 2 + 1 for i, d in enumerate(dims))
        re, im = dft_truncated(Tensor(v), full)
        worst = max(worst, float(np.max(np.abs(idft_padded(re, im, dims).data - v))))
    ok = worst <= 1e-10
    return SuiteResult("dft", ok, f"max deviation from direct sum / round trip {worst:.2e} (tol 1e-10)")


def suite_contractions(instances: int = 50) -> SuiteResult:
    rng = np.random.default_rng(13)
    worst = 0.0
    for t in range(instances):
        n = 1 + t % 3
        dims = tuple(int(d) for d in rng.integers(2, 6, size=n))
        modes = tuple(int(rng.integers(1, d + 1)) for d in dims)
        width = int(rng.integers(1, 4))
        params = TransformBlockParams.init(width, dims, modes, rng)
        v = rng.standard_normal((width, *dims))
        L_f = [L.data for L in params.L_f]
        L_b = [L.data for L in params.L_b]
        z = forward_transform_M(Tensor(v), params).data
        worst = max(worst, float(np.max(np.abs(z - oracles.forward_transform(v, L_f)))))
        y = mode_mix_R(Tensor(z), params.R).data
        worst = max(worst, float(np.max(np.abs(y - oracles.mode_mix(z, params.R.data)))))
        out = inverse_transform_N(Tensor(y), params).data
        worst = max(worst, float(np.max(np.abs(out - oracles.inverse_transform(y, L_b)))))
        upd = block_update(Tensor(v), params).data
        ref = oracles.block(v, L_f, params.R.data, L_b, params.W.data, params.W_bias.data)
        worst = max(worst, float(np.max(np.abs(upd - ref))))
    ok = worst <= 1e-12
    return SuiteResult("contractions", ok, f"{instances} instances, max deviation {worst:.2e} (tol 1e-12)")


def _rel(a, b) -> float:
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def solver_checks() -> dict[str, tuple[float, float]]:
    """Measured value and tolerance for each solver invariant."""
    out = {}
    x = np.arange(128) / 128
    u0 = np.sin(2 * np.pi * x)
    coarse = burgers_solve(u0, 0.1)
    out["burgers refinement"] = (_rel(coarse, burgers_solve(u0, 0.1, cfl=0.125)), 1e-6)
    snaps = burgers_solve(u0, 0.1, save_times=np.linspace(0, 1, 11))
    out["burgers energy increase"] = (float(max(0.0, np.diff(np.sum(snaps**2, axis=1)).max())), 0.0)

    u = darcy_solve(np.ones((32, 32)))
    fine = darcy_solve(np.ones((128, 128)))
    out["darcy refinement"] = (abs(u[16, 16] - fine[64, 64]) / fine[64, 64], 1e-3)
    inner = u[1:, 1:]
    sym = max(np.abs(inner - inner.T).max(), np.abs(inner - inner[::-1]).max(), np.abs(inner - inner[:, ::-1]).max())
    out["darcy symmetry"] = (float(sym), 1e-9)
    out["darcy negativity"] = (float(max(0.0, -u.min())), 0.0)

    m = 32
    g = np.arange(m) / m
    x1, x2 = np.meshgrid(g, g, indexing="ij")
    w0 = np.cos(2 * np.pi * (2 * x1 + x2))
    nu, times = 1e-3, [0.5, 1.0]
    w = navier_stokes_solve(w0, nu, None, times)
    decay = max(float(np.abs(w[..., i] - w0 * np.exp(-nu * (2 * np.pi) ** 2 * 5 * t)).max())
                for i, t in enumerate(times))
    out["navier-stokes mode decay"] = (decay, 1e-6)
    w0 = sum(np.sin(2 * np.pi * (a * x1 + b * x2) + a) for a, b in ((1, 2), (3, 1), (2, 2)))
    ens = np.sum(navier_stokes_solve(w0, 1e-2, None, np.linspace(0.1, 1.0, 10)) ** 2, axis=(0, 1))
    out["navier-stokes enstrophy increase"] = (float(max(0.0, np.diff(ens).max() / ens[0])), 1e-12)

    shift = 0.0
    for t, steps in ((0.0, 0), (0.5, 32), (1.0, 0)):
        a, ut = advection_solution((0.25, 0.2, 1.0, 8.0), t, 64)
        shift = max(shift, float(np.abs(ut - np.roll(a, steps)).max()))
    out["advection shift"] = (shift, 0.0)
    return out


def suite_solvers() -> SuiteResult:
    checks = solver_checks()
    bad = [f"{k} {v:.2e} > {tol:g}" for k, (v, tol) in checks.items() if not v <= tol]
    if bad:
        return SuiteResult("solvers", False, "; ".join(bad))
    return SuiteResult("solvers", True, f"{len(checks)} refinement and invariant checks hold")


SUITES: dict[str, Callable[[], SuiteResult]] = {
    "gradients": suite_gradients,
    "dft": suite_dft,
    "contractions": suite_contractions,
    "solvers": suite_solvers,
}


def run_suites(names=None) -> list[SuiteResult]:
    results = []
    for name in names or SUITES:
        try:
            results.append(SUITES[name]())
        except Exception as exc:  # a crashing suite is a failing suite
            results.append(SuiteResult(name, False, f"raised {type(exc).__name__}: {exc}"))
    return results
