import numpy as np
import pytest

from lnop.data import (
    FAMILIES,
    PdeDataset,
    _forcing,
    advection_solution,
    burgers_solve,
    darcy_coefficient,
    darcy_coefficient_sample,
    darcy_solve,
    dataset_read,
    dataset_write,
    default_threads,
    generate,
    grf_sample,
    navier_stokes_solve,
)
from lnop.errors import ConfigError, ResolutionError, SolverError

# ----------------------------------------------------------------------- GRF


def test_grf_zero_mean_and_seeded():
    a = grf_sample((64, 32), 2.5, 7.0, seed=3)
    assert abs(a.mean()) < 1e-10
    np.testing.assert_array_equal(a, grf_sample((64, 32), 2.5, 7.0, seed=3))
    assert not np.array_equal(a, grf_sample((64, 32), 2.5, 7.0, seed=4))


def test_grf_with_only_dc_is_zero():
    np.testing.assert_array_equal(grf_sample((16,), 2.0, 3.0, seed=0, max_mode=0), np.zeros(16))


def test_grf_max_mode_band_limits(rng):
    a = grf_sample((32,), 2.0, 3.0, seed=1, max_mode=4)
    spec = np.abs(np.fft.rfft(a))
    assert spec[5:].max() < 1e-10 and spec[1:5].min() > 0


def test_grf_spectral_slope():
    alpha, tau, n = 2.0, 3.0, 256
    power = np.mean([np.abs(np.fft.rfft(grf_sample((n,), alpha, tau, seed=s))) ** 2 for s in range(64)], axis=0)
    k = 2 * np.pi * np.arange(1, n // 2)
    slope = np.polyfit(np.log(k**2 + tau**2), np.log(power[1:n // 2]), 1)[0]
    # amplitude ~ (k^2 + tau^2)^(-alpha/2), so power ~ (k^2 + tau^2)^(-alpha)
    assert slope == pytest.approx(-alpha, rel=0.15)


def test_grf_rejects_bad_arguments():
    with pytest.raises(ConfigError):
        grf_sample((16,), 0.0, 1.0)
    with pytest.raises(ConfigError):
        grf_sample((3,), 2.0, 1.0)


def test_darcy_coefficient_phases():
    np.testing.assert_array_equal(darcy_coefficient(np.ones((4, 4))), np.full((4, 4), 12.0))
    fractions = []
    for s in range(64):
        a = darcy_coefficient_sample((32, 32), seed=s)
        assert set(np.unique(a)) <= {3.0, 12.0}
        fractions.append(np.mean(a == 12.0))
    assert abs(np.mean(fractions) - 0.5) <= 0.1


# ------------------------------------------------------------------- burgers


def test_burgers_zero_stays_zero():
    np.testing.assert_array_equal(burgers_solve(np.zeros(32), 1e-3), np.zeros(32))


def test_burgers_refinement_and_energy():
    x = np.arange(128) / 128
    u0 = np.sin(2 * np.pi * x)
    a, b = burgers_solve(u0, 0.1), burgers_solve(u0, 0.1, cfl=0.125)
    assert np.linalg.norm(a - b) / np.linalg.norm(b) < 1e-6
    snaps = burgers_solve(u0, 1e-3, save_times=np.linspace(0, 1, 21))
    assert snaps.shape == (21, 128)
    assert np.all(np.diff(np.sum(snaps**2, axis=1)) <= 1e-12)


def test_burgers_linear_decay_limit():
    x = np.arange(64) / 64
    u0 = 1e-9 * np.sin(2 * np.pi * x)
    u = burgers_solve(u0, 0.05, 0.5)
    # the quadratic term is O(amplitude) relative to the linear decay
    np.testing.assert_allclose(u, u0 * np.exp(-0.05 * (2 * np.pi) ** 2 * 0.5), rtol=1e-7, atol=1e-22)


def test_burgers_batch_axes_and_errors():
    x = np.arange(32) / 32
    u0 = np.stack([np.sin(2 * np.pi * x), np.cos(2 * np.pi * x)])
    both = burgers_solve(u0, 0.1)
    np.testing.assert_allclose(both[0], burgers_solve(u0[0], 0.1, cfl=0.25 * np.abs(u0[0]).max() / np.abs(u0).max()))
    with pytest.raises(ConfigError):
        burgers_solve(u0, 0.0)
    with pytest.raises(SolverError):
        burgers_solve(u0, 1e-3, max_steps=3)


# ----------------------------------------------------------------- advection


def test_advection_exact_shift():
    params = (0.25, 0.2, 1.0, 8.0)
    a, u = advection_solution(params, 0.0, 64)
    np.testing.assert_array_equal(a, u)
    a, u = advection_solution(params, 1.0, 64)
    np.testing.assert_allclose(u, a, atol=1e-15)
    a, u = advection_solution(params, 0.5, 64)
    np.testing.assert_array_equal(u, np.roll(a, 32))
    support = np.arange(64)[u >= 1.0] / 64
    assert support.mean() == pytest.approx(0.75, abs=1 / 64)


def test_advection_rejects_bad_width():
    with pytest.raises(ConfigError):
        advection_solution((0.5, 1.2, 1.0), 0.1, 16)


# --------------------------------------------------------------------- darcy


def test_darcy_symmetry_and_maximum_principle():
    u = darcy_solve(np.ones((32, 32)))
    inner = u[1:, 1:]
    for img in (inner.T, inner[::-1], inner[:, ::-1]):
        np.testing.assert_allclose(inner, img, atol=1e-9)
    assert u.min() >= 0 and np.all(u[0] == 0) and np.all(u[:, 0] == 0)
    assert np.unravel_index(np.argmax(u), u.shape) == (16, 16)


def test_darcy_refinement():
    coarse, fine = darcy_solve(np.ones((32, 32))), darcy_solve(np.ones((128, 128)))
    assert abs(coarse[16, 16] - fine[64, 64]) / fine[64, 64] < 1e-3


def test_darcy_two_phase_is_nonnegative():
    u = darcy_solve(darcy_coefficient_sample((32, 32), seed=0))
    assert u.min() >= 0 and u.max() > 0


def test_darcy_errors():
    with pytest.raises(ConfigError):
        darcy_solve(np.ones((4, 5)))
    with pytest.raises(ConfigError):
        darcy_solve(-np.ones((4, 4)))
    with pytest.raises(SolverError):
        darcy_solve(np.ones((16, 16)), maxiter=2)


# ------------------------------------------------------------- navier-stokes


def _grid(m):
    g = np.arange(m) / m
    return np.meshgrid(g, g, indexing="ij")


def test_ns_zero_stays_zero():
    np.testing.assert_array_equal(navier_stokes_solve(np.zeros((16, 16)), 1e-3, None, [0.5, 1.0]), 0.0)


def test_ns_single_mode_decay():
    x1, x2 = _grid(32)
    w0 = np.cos(2 * np.pi * (2 * x1 + x2))
    w = navier_stokes_solve(w0, 1e-3, None, [0.5, 1.0])
    for i, t in enumerate([0.5, 1.0]):
        np.testing.assert_allclose(w[..., i], w0 * np.exp(-1e-3 * (2 * np.pi) ** 2 * 5 * t), atol=1e-6)


def test_ns_enstrophy_is_non_increasing():
    w0 = grf_sample((32, 32), 2.5, 7.0, seed=2, sigma=7.0**1.5)
    w = navier_stokes_solve(w0, 1e-3, None, np.linspace(0.2, 2.0, 10))
    ens = np.sum(w**2, axis=(0, 1))
    assert np.all(np.diff(ens) <= 1e-12 * ens[0])


def test_ns_forcing_fields():
    x1, x2 = _grid(16)
    s = 2 * np.pi * (x1 + x2)
    np.testing.assert_allclose(_forcing("ns", 16, 1.0), 0.1 * (np.sin(s) + np.cos(s)), atol=1e-15)
    y1, y2 = np.meshgrid(*(2 * np.pi * np.arange(16) / 16,) * 2, indexing="ij")
    np.testing.assert_allclose(_forcing(("kolmogorov", 4), 16, 2 * np.pi), -4 * np.cos(4 * y2), atol=1e-14)
    with pytest.raises(ConfigError):
        _forcing("tidal", 16, 1.0)


def test_ns_blowup_detector():
    with pytest.raises(SolverError, match="blew up"):
        navier_stokes_solve(np.zeros((16, 16)), 1e-3, "ns", [1.0], blowup=1e-3)


def test_ns_errors():
    with pytest.raises(ConfigError):
        navier_stokes_solve(np.zeros((8, 4)), 1e-3)
    with pytest.raises(ConfigError):
        navier_stokes_solve(np.zeros((8, 8)), 0.0)
    with pytest.raises(ConfigError):
        navier_stokes_solve(np.zeros((8, 8)), 1e-3, None, [1.0, 0.5])


# ------------------------------------------------------------------ datasets


SMALL = {
    "burgers": dict(count=3, res=32),
    "advection": dict(count=3, res=32, t=0.25),
    "darcy": dict(count=2, res=16, fine_factor=2),
    "navier_stokes": dict(count=2, res=8, fine_factor=2, t_in=2, t_out=3, dt=0.1),
    "kolmogorov": dict(count=3, res=8, fine_factor=2, dt=0.1, burn_in=0.2, pairs_per_trajectory=2),
}


@pytest.mark.parametrize("family", FAMILIES)
def test_generators_are_deterministic_and_finite(family):
    a = generate(family, seed=9, **SMALL[family])
    b = generate(family, seed=9, **SMALL[family])
    np.testing.assert_array_equal(a.inputs, b.inputs)
    np.testing.assert_array_equal(a.targets, b.targets)
    assert np.isfinite(a.inputs).all() and np.isfinite(a.targets).all()
    assert len(a) == SMALL[family]["count"]
    assert a.inputs.shape[2:] == a.targets.shape[2:] == a.extents
    assert a.config["seed"] == 9


def test_generator_threads_do_not_change_results():
    one = generate("burgers", count=4, res=32, seed=1, threads=1)
    many = generate("burgers", count=4, res=32, seed=1, threads=3)
    np.testing.assert_array_equal(one.inputs, many.inputs)
    np.testing.assert_array_equal(one.targets, many.targets)


def test_navier_stokes_packing():
    d = generate("navier_stokes", seed=0, **SMALL["navier_stokes"])
    assert d.inputs.shape == (2, 2, 8, 8, 3) and d.targets.shape == (2, 1, 8, 8, 3)
    # conditioning snapshots are constant along the output-time axis
    np.testing.assert_array_equal(d.inputs[..., 0], d.inputs[..., 2])


def test_advection_generator_at_time_zero_is_identity():
    d = generate("advection", count=3, res=32, seed=0, t=0.0)
    np.testing.assert_array_equal(d.inputs, d.targets)


def test_darcy_generator_targets_nonnegative():
    d = generate("darcy", seed=0, **SMALL["darcy"])
    assert d.targets.min() >= 0


def test_unknown_family():
    with pytest.raises(ConfigError):
        generate("heat", count=1, res=8)


def test_dataset_round_trip_and_resample(tmp_path):
    d = generate("burgers", count=3, res=32, seed=2)
    digest = dataset_write(tmp_path / "d.lnop", d)
    back = dataset_read(tmp_path / "d.lnop")
    np.testing.assert_array_equal(back.inputs, d.inputs)
    np.testing.assert_array_equal(back.targets, d.targets)
    assert back.grid == d.grid and back.config == d.config and back.name == "burgers"
    assert dataset_write(tmp_path / "e.lnop", back) == digest
    coarse = d.resample(8)
    np.testing.assert_array_equal(coarse.inputs, d.inputs[..., ::4])
    with pytest.raises(ResolutionError):
        d.resample(12)
    with pytest.raises(ConfigError):
        d.subset(2, 5)
    assert [s.a.shape for s in d.samples] == [(1, 32)] * 3


def test_dataset_rejects_unpaired_arrays():
    from lnop.model import GridSpec

    with pytest.raises(ConfigError):
        PdeDataset("x", np.zeros((2, 1, 8)), np.zeros((3, 1, 8)), GridSpec.unit((8,)))


def test_default_threads_reads_environment(monkeypatch):
    monkeypatch.setenv("LNOP_THREADS", "3")
    assert default_threads() == 3
    monkeypatch.setenv("LNOP_THREADS", "many")
    assert default_threads() == 1
