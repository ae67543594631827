"""Feature grids, image I/O, color conversion, and the BFM tensor format.

A :class:`FeatureGrid` is an ``H x W x d`` array of real feature channels.
Images come in as binary PPM (P6, 8-bit) scaled to [0, 1]; arbitrary feature
maps (e.g. externally extracted deep features) use the BFM binary format:

    magic ``b"BFM1"``, three little-endian uint32 (height, width, channels),
    then ``H*W*d`` IEEE-754 float32 little-endian values, row-major,
    channel-interleaved.

The format is deliberately trivial so fixtures are bit-exact across languages.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, FormatError

BFM_MAGIC = b"BFM1"


@dataclass(frozen=True)
class FeatureGrid:
    """H x W x d grid of real-valued feature channels.

    Data is stored as float32 (the BFM payload type); values must be finite.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float32)
        if arr.ndim != 3:
            raise DimensionError(f"expected H x W x d array, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1 or arr.shape[2] < 1:
            raise DimensionError(f"degenerate grid shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise FormatError("feature grid contains non-finite values")
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    def crop(self, x: int, y: int, w: int, h: int) -> "FeatureGrid":
        """Return the sub-grid with top-left pixel (x, y) and size w x h."""
        if x < 0 or y < 0 or x + w > self.width or y + h > self.height:
            raise DimensionError(
                f"crop ({x},{y},{w},{h}) outside grid {self.width}x{self.height}"
            )
        return FeatureGrid(self.data[y : y + h, x : x + w].copy())


def _read_ppm_header_token(f) -> bytes:
    """Read one whitespace-delimited header token, skipping '#' comments."""
    token = b""
    while True:
        c = f.read(1)
        if c == b"":
            raise FormatError("unexpected end of file in PPM header")
        if c == b"#":
            while c not in (b"\n", b""):
                c = f.read(1)
            continue
        if c.isspace():
            if token:
                return token
            continue
        token += c


def load_image(path) -> FeatureGrid:
    """Load a binary PPM (P6, 8-bit) image as a d=3 grid scaled to [0, 1]."""
    with open(path, "rb") as f:
        magic = f.read(2)
        if magic != b"P6":
            raise FormatError(f"{path}: not a binary PPM (magic {magic!r})")
        width = int(_read_ppm_header_token(f))
        height = int(_read_ppm_header_token(f))
        maxval = int(_read_ppm_header_token(f))
        if maxval != 255:
            raise FormatError(f"{path}: only 8-bit PPM supported (maxval {maxval})")
        if width < 1 or height < 1:
            raise FormatError(f"{path}: bad dimensions {width}x{height}")
        payload = f.read(width * height * 3)
    if len(payload) != width * height * 3:
        raise FormatError(
            f"{path}: truncated payload ({len(payload)} of {width * height * 3} bytes)"
        )
    raw = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, 3)
    return FeatureGrid(raw.astype(np.float32) / 255.0)


def save_image(grid: FeatureGrid, path) -> None:
    """Write a d=3 grid with values in [0, 1] as binary PPM (P6, 8-bit)."""
    if grid.channels != 3:
        raise DimensionError(f"PPM requires 3 channels, got {grid.channels}")
    quant = np.clip(np.rint(grid.data * 255.0), 0, 255).astype(np.uint8)
    with open(path, "wb") as f:
        f.write(b"P6\n%d %d\n255\n" % (grid.width, grid.height))
        f.write(quant.tobytes())


def save_pgm(values: np.ndarray, path) -> None:
    """Write a 2-D array as 8-bit PGM (P5), min-max scaled for visualization."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionError(f"PGM requires a 2-D array, got shape {arr.shape}")
    lo, hi = arr.min(), arr.max()
    if hi > lo:
        scaled = (arr - lo) / (hi - lo)
    else:
        scaled = np.zeros_like(arr)
    quant = np.clip(np.rint(scaled * 255.0), 0, 255).astype(np.uint8)
    with open(path, "wb") as f:
        f.write(b"P5\n%d %d\n255\n" % (arr.shape[1], arr.shape[0]))
        f.write(quant.tobytes())


def load_feature_grid(path) -> FeatureGrid:
    """Read a BFM file; lossless float32 round-trip with :func:`save_feature_grid`."""
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != BFM_MAGIC:
            raise FormatError(f"{path}: bad BFM magic {magic!r}")
        header = f.read(12)
        if len(header) != 12:
            raise FormatError(f"{path}: truncated BFM header")
        height, width, channels = struct.unpack("<III", header)
        if height < 1 or width < 1 or channels < 1:
            raise FormatError(f"{path}: bad BFM dims {height}x{width}x{channels}")
        count = height * width * channels
        payload = f.read(count * 4)
    if len(payload) != count * 4:
        raise FormatError(
            f"{path}: BFM payload holds {len(payload) // 4} floats, header says {count}"
        )
    data = np.frombuffer(payload, dtype="<f4").reshape(height, width, channels)
    if not np.isfinite(data).all():
        raise FormatError(f"{path}: BFM payload contains non-finite values")
    return FeatureGrid(data.copy())


def save_feature_grid(grid: FeatureGrid, path) -> None:
    """Write a grid as BFM."""
    with open(path, "wb") as f:
        f.write(BFM_MAGIC)
        f.write(struct.pack("<III", grid.height, grid.width, grid.channels))
        f.write(np.ascontiguousarray(grid.data, dtype="<f4").tobytes())


def rgb_to_hsv(grid: FeatureGrid) -> FeatureGrid:
    """Convert RGB in [0,1] to hexcone HSV with all channels in [0,1].

    Hue is divided by 360 degrees; hue of achromatic pixels (saturation 0)
    is defined as 0.
    """
    if grid.channels != 3:
        raise DimensionError(f"rgb_to_hsv requires 3 channels, got {grid.channels}")
    rgb = grid.data.astype(np.float64)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    v = rgb.max(axis=-1)
    c = v - rgb.min(axis=-1)
    s = np.where(v > 0, c / np.where(v > 0, v, 1.0), 0.0)

    h = np.zeros_like(v)
    safe_c = np.where(c > 0, c, 1.0)
    mask_r = (v == r) & (c > 0)
    mask_g = (v == g) & (c > 0) & ~mask_r
    mask_b = (c > 0) & ~mask_r & ~mask_g
    h = np.where(mask_r, ((g - b) / safe_c) % 6.0, h)
    h = np.where(mask_g, (b - r) / safe_c + 2.0, h)
    h = np.where(mask_b, (r - g) / safe_c + 4.0, h)
    h = h / 6.0
    return FeatureGrid(np.stack([h, s, v], axis=-1).astype(np.float32))


def normalize_per_window(window: FeatureGrid) -> FeatureGrid:
    """Shift/scale each channel to zero mean and unit (population) variance.

    Channels whose variance falls below 1e-12 are zeroed after mean
    subtraction rather than divided by a tiny epsilon.
    """
    data = window.data.astype(np.float64)
    mean = data.mean(axis=(0, 1), keepdims=True)
    var = data.var(axis=(0, 1), keepdims=True)
    centered = data - mean
    out = np.where(var < 1e-12, 0.0, centered / np.sqrt(np.where(var < 1e-12, 1.0, var)))
    return FeatureGrid(out.astype(np.float32))
