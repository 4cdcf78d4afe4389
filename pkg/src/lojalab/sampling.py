"""Deterministic point sequences for sampled bounds and checks.

Every sampler here is a pure function of its arguments, so sampled constants
and pass/fail verdicts are reproducible run to run and independent of any
worker count.  The seed shifts the start index of the underlying
low-discrepancy sequence; the anchor points are always included.

Direction meshes deliberately include the coordinate axis directions: for
products of coordinate powers those are exactly the degenerate directions
where gradient/value ratios are extremal, and a uniformly random mesh would
need O(1/r) points to find them at radius r.
"""

from __future__ import annotations

import math
from typing import Iterable

import numpy as np

_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29)


def halton(count: int, dim: int, start: int = 1) -> np.ndarray:
    """First ``count`` points of the Halton sequence in [0, 1)^dim."""
    if dim > len(_PRIMES):
        raise ValueError(f"halton supports dimension <= {len(_PRIMES)}")
    out = np.empty((count, dim))
    for j in range(dim):
        base = _PRIMES[j]
        for i in range(count):
            n = start + i
            value = 0.0
            scale = 1.0 / base
            while n:
                n, digit = divmod(n, base)
                value += digit * scale
                scale /= base
            out[i, j] = value
    return out


def sphere_directions(dim: int, count: int) -> np.ndarray:
    """Quasi-uniform unit directions, always including +/- each axis."""
    if dim < 1:
        raise ValueError("dimension must be positive")
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        n = max(4, 4 * math.ceil(count / 4))
        angles = 2.0 * np.pi * np.arange(n) / n
        return np.column_stack([np.cos(angles), np.sin(angles)])
    axes = np.concatenate([np.eye(dim), -np.eye(dim)])
    if dim == 3:
        # Fibonacci spiral: near-uniform area coverage.
        k = np.arange(count, dtype=float)
        golden = (1.0 + math.sqrt(5.0)) / 2.0
        z = 1.0 - 2.0 * (k + 0.5) / count
        rho = np.sqrt(np.maximum(0.0, 1.0 - z * z))
        phi = 2.0 * np.pi * k / golden
        pts = np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])
        return np.concatenate([pts, axes])
    cube = halton(3 * count, dim) * 2.0 - 1.0
    norms = np.linalg.norm(cube, axis=1)
    keep = norms > 0.2
    pts = cube[keep][:count]
    pts = pts / np.linalg.norm(pts, axis=1, keepdims=True)
    return np.concatenate([pts, axes])


def ball_points(dim: int, count: int, radius: float, seed: int = 0) -> np.ndarray:
    """Quasi-uniform sample of the closed ball of the given radius.

    Includes the origin and the points ``+/- radius * e_i`` exactly, so
    extrema attained on the axes or at the boundary are sampled exactly.
    """
    if dim < 1:
        raise ValueError("dimension must be positive")
    anchors = [np.zeros(dim)]
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = radius
        anchors.append(e.copy())
        anchors.append(-e)
    # Rejection from the enclosing cube; oversample by the inverse volume
    # ratio so roughly `count` interior points survive.
    ratio = {1: 1.0, 2: 4.0 / math.pi, 3: 6.0 / math.pi}.get(dim, 3.0 ** (dim / 2.0))
    need = int(count * ratio * 1.3) + 16
    cube = halton(need, dim, start=1 + seed * 104729) * 2.0 - 1.0
    keep = np.linalg.norm(cube, axis=1) <= 1.0
    pts = cube[keep][:count] * radius
    return np.concatenate([np.array(anchors), pts])


def geometric_radii(r_min: float, r_max: float, count: int) -> np.ndarray:
    """Geometrically spaced radii from ``r_max`` down to ``r_min``."""
    if not (0.0 < r_min <= r_max):
        raise ValueError("need 0 < r_min <= r_max")
    if count < 1:
        raise ValueError("need at least one radius")
    if count == 1 or r_min == r_max:
        return np.array([r_max])
    return np.exp(np.linspace(math.log(r_max), math.log(r_min), count))


def subspace_grid(indices: Iterable[int], dim: int, count: int, radius: float) -> np.ndarray:
    """Quasi-uniform points of a coordinate subspace ball, embedded in R^dim."""
    indices = list(indices)
    if not indices:
        return np.zeros((1, dim))
    block = ball_points(len(indices), count, radius)
    out = np.zeros((block.shape[0], dim))
    for j, idx in enumerate(indices):
        out[:, idx] = block[:, j]
    return out
