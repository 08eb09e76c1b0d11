"""Finite-difference utilities shared by the gradient tests."""

from __future__ import annotations

from typing import Callable

import numpy as np


def finite_difference_grad(loss_fn: Callable[[], float], arr: np.ndarray,
                           h: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of loss_fn w.r.t. every entry of arr.

    loss_fn must read arr by reference (it is perturbed in place and
    restored). Any randomness inside loss_fn must be frozen: rebuilt from a
    fixed seed on every call, so the two evaluations of a central difference
    see identical draws.
    """
    grad = np.zeros_like(arr, dtype=np.float64)
    flat = arr.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        up = loss_fn()
        flat[i] = orig - h
        down = loss_fn()
        flat[i] = orig
        gflat[i] = (up - down) / (2.0 * h)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray,
                   zero_floor: float = 1e-7) -> float:
    """Normwise relative disagreement.

    Groups where both gradients are below zero_floor count as exact: a
    genuinely zero gradient (the final affine bias is absorbed by the batch
    norm's mean subtraction) would otherwise divide finite-difference noise
    by itself.
    """
    a = np.asarray(analytic, dtype=np.float64).ravel()
    b = np.asarray(numeric, dtype=np.float64).ravel()
    scale = max(np.linalg.norm(a), np.linalg.norm(b))
    if scale < zero_floor:
        return 0.0
    return float(np.linalg.norm(a - b) / scale)
