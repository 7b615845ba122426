"""Slow reference implementations used by ``lnop verify`` and the test suite.

Everything here is written as explicit loops or direct sums over plain numpy
arrays, independent of the tape machinery, so it can serve as ground truth for
the vectorized operators.
"""
from __future__ import annotations

import itertools
from typing import Callable, Sequence

import numpy as np


def forward_transform(v: np.ndarray, L_f: Sequence[np.ndarray]) -> np.ndarray:
    """``z[c, k1..kn] = sum_{x} v[c, x1..xn] * prod_i L_f[i][x_i, k_i]`` for one sample."""
    dims = v.shape[1:]
    modes = tuple(L.shape[1] for L in L_f)
    out = np.zeros((v.shape[0], *modes))
    for c in range(v.shape[0]):
        for kk in itertools.product(*map(range, modes)):
            total = 0.0
            for xx in itertools.product(*map(range, dims)):
                w = 1.0
                for i, (x, k) in enumerate(zip(xx, kk)):
                    w *= L_f[i][x, k]
                total += v[(c, *xx)] * w
            out[(c, *kk)] = total
    return out


def mode_mix(z: np.ndarray, R: np.ndarray) -> np.ndarray:
    """``out[j, m] = sum_i R[i, j, m] z[i, m]`` for one sample."""
    c_in, c_out = R.shape[:2]
    modes = z.shape[1:]
    out = np.zeros((c_out, *modes))
    for mm in itertools.product(*map(range, modes)):
        for j in range(c_out):
            out[(j, *mm)] = sum(R[(i, j, *mm)] * z[(i, *mm)] for i in range(c_in))
    return out


def inverse_transform(z: np.ndarray, L_b: Sequence[np.ndarray]) -> np.ndarray:
    modes = z.shape[1:]
    dims = tuple(L.shape[1] for L in L_b)
    out = np.zeros((z.shape[0], *dims))
    for c in range(z.shape[0]):
        for xx in itertools.product(*map(range, dims)):
            total = 0.0
            for kk in itertools.product(*map(range, modes)):
                w = 1.0
                for i, (k, x) in enumerate(zip(kk, xx)):
                    w *= L_b[i][k, x]
                total += z[(c, *kk)] * w
            out[(c, *xx)] = total
    return out


def block(v, L_f, R, L_b, W, b) -> np.ndarray:
    """One learnable block for one sample, composed from the loop oracles."""
    pointwise = np.einsum("ij,i...->j...", W, v) + b.reshape(-1, *([1] * (v.ndim - 1)))
    return np.maximum(pointwise + inverse_transform(mode_mix(forward_transform(v, L_f), R), L_b), 0.0)


def dft(v: np.ndarray, modes: Sequence[int]) -> np.ndarray:
    """Direct O(N^2) DFT sum over the trailing ``len(modes)`` axes, frequencies 0..k-1 per axis."""
    n = len(modes)
    dims = v.shape[-n:]
    lead = v.shape[:-n]
    out = np.zeros((*lead, *modes), dtype=complex)
    for kk in itertools.product(*map(range, modes)):
        acc = np.zeros(lead, dtype=complex)
        for xx in itertools.product(*map(range, dims)):
            phase = sum(k * x / d for k, x, d in zip(kk, xx, dims))
            acc = acc + v[(..., *xx)] * np.exp(-2j * np.pi * phase)
        out[(..., *kk)] = acc
    return out


def spectral_kernel(v: np.ndarray, R: np.ndarray, modes: Sequence[int]) -> np.ndarray:
    """Truncated spectral convolution of one sample by a direct sum over the full spectrum.

    ``R`` is complex with shape (c_in, c_out, *modes); frequencies on the leading
    axes run over 0..k-1 and the last axis is Hermitian-completed.
    """
    n = len(modes)
    dims = v.shape[1:]
    spec = np.fft.fftn(v, axes=tuple(range(1, n + 1)))
    full = np.zeros((R.shape[1], *dims), dtype=complex)
    for kk in itertools.product(*map(range, modes)):
        mixed = np.einsum("ij,i->j", R[(slice(None), slice(None), *kk)], spec[(slice(None), *kk)])
        full[(slice(None), *kk)] += mixed
        conj = tuple((-k) % d for k, d in zip(kk, dims))
        if kk[-1] != 0 and conj[-1] != kk[-1]:
            full[(slice(None), *conj)] += mixed.conj()
    return np.real(np.fft.ifftn(full, axes=tuple(range(1, n + 1))))


def finite_difference(f: Callable[[], float], arr: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    """Central differences of ``f`` with respect to every entry of ``arr`` (perturbed in place)."""
    grad = np.zeros_like(arr)
    flat = arr.reshape(-1)
    for i in range(flat.size):
        old = flat[i]
        flat[i] = old + eps
        up = f()
        flat[i] = old - eps
        down = f()
        flat[i] = old
        grad.flat[i] = (up - down) / (2.0 * eps)
    return grad
