"""Grayscale image ingestion, vectorization, and seeded Gaussian noise.

Pixel convention: every image in the pipeline is a 2-D grid of float64
intensities in [0, 1], stored row-major. 8-bit sources are normalized by
dividing the raw byte value by 255, exactly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "GENERATOR_NAME",
    "GrayImage",
    "ImageVector",
    "ImageLabel",
    "FingerprintDatabase",
    "NoiseSpec",
    "ImageFormatError",
    "load_image",
    "load_pgm",
    "load_tiff",
    "write_pgm",
    "vectorize",
    "image_from_vector",
    "database_from_images",
    "ingest_database",
    "gaussian_field",
    "add_gaussian_noise",
]

# Seedable generator used for every random draw in the pipeline. Recorded in
# output metadata so results can be reproduced bit-for-bit.
GENERATOR_NAME = "numpy-pcg64"

_FVC_NAME = re.compile(r"^(\d+)_(\d+)$")


class ImageFormatError(ValueError):
    """Raised when an image file cannot be decoded as 8-bit grayscale."""


@dataclass
class GrayImage:
    """A 2-D grid of intensities in [0, 1], float64, row-major."""

    pixels: np.ndarray

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.float64)
        if self.pixels.ndim != 2:
            raise ValueError(f"expected a 2-D pixel grid, got ndim={self.pixels.ndim}")
        if self.pixels.shape[0] == 0 or self.pixels.shape[1] == 0:
            raise ValueError(f"zero-dimension image: shape {self.pixels.shape}")
        if not np.all(np.isfinite(self.pixels)):
            raise ValueError("image contains non-finite pixels")
        if self.pixels.min() < 0.0 or self.pixels.max() > 1.0:
            raise ValueError("pixel intensities must lie in [0, 1]")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass
class ImageVector:
    """Row-major flattening of a GrayImage, tagged with its source dims."""

    values: np.ndarray
    height: int
    width: int

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 1 or self.values.size != self.height * self.width:
            raise ValueError("vector length must equal height * width")


@dataclass
class ImageLabel:
    """Provenance of one database column.

    ``parsed`` is False when the source filename did not follow the
    ``<finger>_<impression>`` convention; the whole database then falls back
    to lexicographic column order.
    """

    finger: int | None
    impression: int | None
    path: str
    parsed: bool = True


@dataclass
class FingerprintDatabase:
    """Column-stacked image vectors: column m is image m, shape (N*K, M)."""

    data: np.ndarray
    labels: list[ImageLabel]
    height: int
    width: int

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 2:
            raise ValueError("database data must be a 2-D matrix")
        if self.data.shape[0] != self.height * self.width:
            raise ValueError("database row count must equal height * width")
        if self.data.shape[1] < 2:
            raise ValueError(f"insufficient images: need at least 2, got {self.data.shape[1]}")
        if len(self.labels) != self.data.shape[1]:
            raise ValueError("one label required per column")

    @property
    def size(self) -> int:
        """Number of enrolled images M."""
        return self.data.shape[1]

    def image(self, m: int) -> GrayImage:
        """Reconstruct column m as a GrayImage."""
        return GrayImage(self.data[:, m].reshape(self.height, self.width))


@dataclass
class NoiseSpec:
    """Additive Gaussian noise parameters: mean, variance, and a 64-bit seed."""

    mean: float = 0.0
    variance: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.variance < 0:
            raise ValueError(f"noise variance must be >= 0, got {self.variance}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")


def load_pgm(path) -> GrayImage:
    """Load a binary PGM (P5) file with maxval 255.

    Pixels are normalized as byte / 255. PGM comments (lines starting with
    ``#`` inside the header) are skipped.
    """
    data = Path(path).read_bytes()
    pos = 0

    def next_token() -> bytes:
        nonlocal pos
        while pos < len(data):
            if data[pos : pos + 1] == b"#":
                nl = data.find(b"\n", pos)
                if nl < 0:
                    raise ImageFormatError(f"{path}: truncated PGM header")
                pos = nl + 1
            elif data[pos : pos + 1].isspace():
                pos += 1
            else:
                break
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ImageFormatError(f"{path}: truncated PGM header")
        return data[start:pos]

    magic = next_token()
    if magic != b"P5":
        raise ImageFormatError(f"{path}: not a binary PGM (P5) file")
    try:
        width = int(next_token())
        height = int(next_token())
        maxval = int(next_token())
    except ValueError as exc:
        raise ImageFormatError(f"{path}: malformed PGM header") from exc
    if width <= 0 or height <= 0:
        raise ImageFormatError(f"{path}: zero-dimension image")
    if maxval != 255:
        raise ImageFormatError(f"{path}: only 8-bit PGM (maxval 255) is supported, got {maxval}")
    pos += 1  # single whitespace byte separating header from raster
    raster = data[pos : pos + width * height]
    if len(raster) < width * height:
        raise ImageFormatError(f"{path}: PGM raster shorter than header promises")
    pixels = np.frombuffer(raster, dtype=np.uint8).astype(np.float64).reshape(height, width)
    return GrayImage(pixels / 255.0)


def load_tiff(path) -> GrayImage:
    """Load an 8-bit single-channel grayscale TIFF."""
    from PIL import Image, UnidentifiedImageError

    try:
        with Image.open(path) as img:
            if img.mode != "L":
                raise ImageFormatError(
                    f"{path}: expected 8-bit grayscale TIFF (mode L), got mode {img.mode}"
                )
            arr = np.asarray(img, dtype=np.uint8)
    except UnidentifiedImageError as exc:
        raise ImageFormatError(f"{path}: unreadable image file") from exc
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ImageFormatError(f"{path}: zero-dimension image")
    return GrayImage(arr.astype(np.float64) / 255.0)


def load_image(path, format: str | None = None) -> GrayImage:
    """Load an 8-bit grayscale image.

    ``format`` is ``"pgm"`` or ``"tiff"``; when None it is inferred from the
    file extension (.pgm / .tif / .tiff).
    """
    if format is None:
        suffix = Path(path).suffix.lower()
        if suffix == ".pgm":
            format = "pgm"
        elif suffix in (".tif", ".tiff"):
            format = "tiff"
        else:
            raise ImageFormatError(f"{path}: cannot infer format from extension {suffix!r}")
    if format == "pgm":
        return load_pgm(path)
    if format == "tiff":
        return load_tiff(path)
    raise ValueError(f"unknown image format {format!r}")


def write_pgm(img: GrayImage, path) -> None:
    """Write a GrayImage as binary PGM (P5), maxval 255."""
    raster = np.rint(img.pixels * 255.0).astype(np.uint8)
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + raster.tobytes())


def vectorize(img: GrayImage) -> ImageVector:
    """Stack an image into a single column vector, row by row."""
    return ImageVector(img.pixels.flatten(), img.height, img.width)


def image_from_vector(values: np.ndarray, height: int, width: int) -> GrayImage:
    """Inverse of vectorize: reshape a row-major vector back into an image."""
    values = np.asarray(values, dtype=np.float64)
    return GrayImage(values.reshape(height, width))


def database_from_images(images, labels=None) -> FingerprintDatabase:
    """Column-stack GrayImages of identical dimensions into a database."""
    images = list(images)
    if len(images) < 2:
        raise ValueError(f"insufficient images: need at least 2, got {len(images)}")
    h, w = images[0].height, images[0].width
    for img in images[1:]:
        if (img.height, img.width) != (h, w):
            raise ValueError(
                f"mixed image dimensions: {img.height}x{img.width} vs {h}x{w}"
            )
    data = np.stack([vectorize(img).values for img in images], axis=1)
    if labels is None:
        labels = [ImageLabel(None, None, f"<memory:{i}>", parsed=False) for i in range(len(images))]
    return FingerprintDatabase(data, list(labels), h, w)


def ingest_database(directory, pattern: str = "*.tif") -> FingerprintDatabase:
    """Load every image matching ``pattern`` under ``directory`` into a database.

    Filenames following the ``<finger>_<impression>`` convention (e.g.
    ``101_3.tif``) order the columns by (finger, impression) ascending. If any
    filename does not parse, column order falls back to lexicographic filename
    order and the offending labels carry ``parsed=False``.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise ValueError(f"not a directory: {directory}")
    paths = sorted(p for p in directory.glob(pattern) if p.is_file())
    if len(paths) < 2:
        raise ValueError(
            f"insufficient images: need at least 2 matching {pattern!r}, got {len(paths)}"
        )

    parsed_keys = []
    all_parse = True
    for p in paths:
        m = _FVC_NAME.match(p.stem)
        if m:
            parsed_keys.append((int(m.group(1)), int(m.group(2))))
        else:
            parsed_keys.append(None)
            all_parse = False

    order = sorted(range(len(paths)), key=lambda i: parsed_keys[i]) if all_parse else range(len(paths))

    images, labels = [], []
    for i in order:
        img = load_image(paths[i])
        key = parsed_keys[i]
        if key is None:
            labels.append(ImageLabel(None, None, str(paths[i]), parsed=False))
        else:
            labels.append(ImageLabel(key[0], key[1], str(paths[i]), parsed=True))
        images.append(img)

    h, w = images[0].height, images[0].width
    for img, lab in zip(images, labels):
        if (img.height, img.width) != (h, w):
            raise ValueError(f"mixed image dimensions: {lab.path} is {img.height}x{img.width}, expected {h}x{w}")
    data = np.stack([vectorize(img).values for img in images], axis=1)
    return FingerprintDatabase(data, labels, h, w)


def gaussian_field(spec: NoiseSpec, shape: tuple[int, int]) -> np.ndarray:
    """The raw additive noise field mean + sqrt(variance) * Z, before clamping.

    Z is drawn i.i.d. standard normal from a PCG64 generator seeded with
    ``spec.seed``, filled in row-major pixel order, one draw per pixel.
    """
    if spec.variance == 0.0:
        return np.full(shape, float(spec.mean))
    rng = np.random.default_rng(int(spec.seed))
    z = rng.standard_normal(shape)
    return spec.mean + np.sqrt(spec.variance) * z


def add_gaussian_noise(img: GrayImage, spec: NoiseSpec) -> GrayImage:
    """Add seeded Gaussian noise and clamp the result back into [0, 1].

    Identical (img, spec) pairs produce bit-identical outputs.
    """
    noisy = img.pixels + gaussian_field(spec, img.pixels.shape)
    return GrayImage(np.clip(noisy, 0.0, 1.0))
