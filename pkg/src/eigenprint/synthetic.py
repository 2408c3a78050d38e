"""Deterministic synthetic image families for tests and demo experiments.

The in-class family imitates fingerprint-like parallel ridge flow: oriented
sinusoidal stripes with small per-image jitter in angle, frequency, and
phase. The out-class families (concentric rings, checkerboards) share the
value range and scale but none of the ridge structure, so an edge-based
eigenspace separates the two cleanly.
"""

from __future__ import annotations

import numpy as np

from .imaging import GrayImage

__all__ = [
    "ridge_image",
    "ring_image",
    "checker_image",
    "build_separation_sets",
]


def _grid(height: int, width: int) -> tuple[np.ndarray, np.ndarray]:
    y, x = np.mgrid[0:height, 0:width].astype(np.float64)
    return y, x


def ridge_image(rng: np.random.Generator, height: int, width: int) -> GrayImage:
    """One ridge-flow image: oriented stripes with jittered parameters."""
    angle = np.deg2rad(30.0 + rng.uniform(-6.0, 6.0))
    cycles = rng.uniform(5.0, 7.0)
    phase = rng.uniform(0.0, 2.0 * np.pi)
    y, x = _grid(height, width)
    t = np.cos(angle) * x + np.sin(angle) * y
    pixels = 0.5 + 0.5 * np.sin(2.0 * np.pi * cycles * t / width + phase)
    return GrayImage(pixels)


def ring_image(rng: np.random.Generator, height: int, width: int) -> GrayImage:
    """Concentric rings around a jittered center."""
    cy = height / 2.0 + rng.uniform(-4.0, 4.0)
    cx = width / 2.0 + rng.uniform(-4.0, 4.0)
    cycles = rng.uniform(4.0, 6.0)
    phase = rng.uniform(0.0, 2.0 * np.pi)
    y, x = _grid(height, width)
    r = np.sqrt((x - cx) ** 2 + (y - cy) ** 2)
    pixels = 0.5 + 0.5 * np.sin(2.0 * np.pi * cycles * r / width + phase)
    return GrayImage(pixels)


def checker_image(rng: np.random.Generator, height: int, width: int) -> GrayImage:
    """Hard 0/1 checkerboard with a random cell size and offset."""
    cell = int(rng.integers(4, 9))
    ox = int(rng.integers(0, cell))
    oy = int(rng.integers(0, cell))
    y, x = _grid(height, width)
    pixels = ((((x + ox) // cell) + ((y + oy) // cell)) % 2).astype(np.float64)
    return GrayImage(pixels)


def build_separation_sets(
    seed: int = 0,
    n_in: int = 20,
    n_out: int = 20,
    height: int = 48,
    width: int = 48,
) -> tuple[list[GrayImage], list[GrayImage]]:
    """Fixed-seed in-class (ridges) and out-class (rings/checkers) image sets."""
    rng = np.random.default_rng(seed)
    in_images = [ridge_image(rng, height, width) for _ in range(n_in)]
    out_images = [
        ring_image(rng, height, width) if i % 2 == 0 else checker_image(rng, height, width)
        for i in range(n_out)
    ]
    return in_images, out_images
