"""Grayscale frame sequences and PGM (P5) ingestion.

Frame planes hold intensities in [0, 255] as float64 so that interpolated
sub-frames stay exact. Color inputs are converted by the caller; the
``luminance`` helper applies the fixed Rec.601 weights.
"""

from __future__ import annotations

import csv
import io
import os
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError, ValidationError
from .events import SensorGeometry

REC601_WEIGHTS = (0.299, 0.587, 0.114)


@dataclass(frozen=True)
class FrameSequence:
    """Intensity planes plus strictly increasing microsecond timestamps."""

    geometry: SensorGeometry
    frames: np.ndarray      # (T, H, W) float64, values in [0, 255]
    timestamps: np.ndarray  # (T,) int64, strictly increasing, non-negative

    def __post_init__(self):
        frames = np.ascontiguousarray(self.frames, dtype=np.float64)
        timestamps = np.ascontiguousarray(self.timestamps, dtype=np.int64)
        if frames.ndim != 3:
            raise ValidationError(f"frames must be (T, H, W), got shape {frames.shape}")
        t, h, w = frames.shape
        if t < 1:
            raise ValidationError("frame sequence must contain at least one frame")
        if (h, w) != (self.geometry.height, self.geometry.width):
            raise ValidationError(
                f"frame planes are {w}x{h} but geometry is {self.geometry}"
            )
        if timestamps.shape != (t,):
            raise ValidationError(
                f"need {t} timestamps, got shape {timestamps.shape}"
            )
        if timestamps[0] < 0:
            raise ValidationError("timestamps must be non-negative")
        if t > 1 and not np.all(np.diff(timestamps) > 0):
            raise ValidationError("timestamps must be strictly increasing")
        if not np.isfinite(frames).all():
            raise ValidationError("frame intensities must be finite")
        if frames.size and (frames.min() < 0.0 or frames.max() > 255.0):
            raise ValidationError("frame intensities must lie in [0, 255]")
        frames.setflags(write=False)
        timestamps.setflags(write=False)
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "timestamps", timestamps)

    def __len__(self) -> int:
        return self.frames.shape[0]


def luminance(rgb: np.ndarray) -> np.ndarray:
    """Rec.601 luma of an (..., 3) RGB array, same scale as the input."""
    rgb = np.asarray(rgb, dtype=np.float64)
    if rgb.shape[-1] != 3:
        raise ValidationError(f"expected trailing RGB axis of size 3, got {rgb.shape}")
    return rgb @ np.asarray(REC601_WEIGHTS)


_PGM_TOKEN = re.compile(rb"(?:\s|#[^\n\r]*[\n\r])*(\S+)")


def read_pgm(source) -> np.ndarray:
    """Decode a binary PGM (P5, maxval 255) into an (H, W) float64 plane."""
    if isinstance(source, (str, os.PathLike)):
        data = Path(source).read_bytes()
    else:
        data = bytes(source)
    pos = 0
    tokens = []
    while len(tokens) < 4:
        m = _PGM_TOKEN.match(data, pos)
        if m is None:
            raise FormatError("PGM header truncated")
        tokens.append(m.group(1))
        pos = m.end()
    if tokens[0] != b"P5":
        raise FormatError(f"expected binary PGM magic P5, got {tokens[0]!r}")
    try:
        width, height, maxval = (int(tok) for tok in tokens[1:])
    except ValueError:
        raise FormatError(f"non-numeric PGM header fields {tokens[1:]!r}") from None
    if maxval != 255:
        raise FormatError(f"only maxval 255 PGM is supported, got {maxval}")
    if width < 1 or height < 1:
        raise FormatError(f"PGM declares empty image {width}x{height}")
    pos += 1  # single whitespace byte after maxval
    expected = width * height
    raster = data[pos : pos + expected]
    if len(raster) != expected:
        raise FormatError(
            f"PGM raster has {len(raster)} bytes, expected {expected}"
        )
    plane = np.frombuffer(raster, dtype=np.uint8).reshape(height, width)
    return plane.astype(np.float64)


def write_pgm(plane: np.ndarray) -> bytes:
    """Encode an (H, W) plane of [0, 255] values as binary PGM (P5)."""
    arr = np.asarray(plane)
    if arr.ndim != 2:
        raise ValidationError(f"plane must be 2-D, got shape {arr.shape}")
    if arr.size == 0:
        raise ValidationError("cannot write an empty plane")
    if arr.min() < 0 or arr.max() > 255:
        raise ValidationError("plane values must lie in [0, 255]")
    h, w = arr.shape
    header = f"P5\n{w} {h}\n255\n".encode("ascii")
    return header + np.rint(arr).astype(np.uint8).tobytes()


def load_frame_dir(
    directory,
    period_us: int | None = None,
    fps: float | None = None,
    manifest=None,
) -> FrameSequence:
    """Load a directory of PGM frames into a FrameSequence.

    Frames are taken in lexicographic filename order with timestamps
    ``i * period_us`` (``fps`` is shorthand for ``round(1e6 / fps)``), or, if
    ``manifest`` is given, from a ``filename,timestamp_us`` CSV instead.
    """
    directory = Path(directory)
    if manifest is not None:
        names, stamps = _read_manifest(manifest)
    else:
        if (period_us is None) == (fps is None):
            raise ValidationError("provide exactly one of period_us/fps (or a manifest)")
        if fps is not None:
            if fps <= 0:
                raise ValidationError(f"fps must be positive, got {fps}")
            period_us = round(1e6 / fps)
        if period_us <= 0:
            raise ValidationError(f"frame period must be positive, got {period_us}")
        names = sorted(
            p.name for p in directory.iterdir() if p.suffix.lower() == ".pgm"
        )
        stamps = [i * period_us for i in range(len(names))]
    if not names:
        raise ValidationError(f"no PGM frames found in {directory}")
    planes = [read_pgm(directory / name) for name in names]
    shape = planes[0].shape
    for name, plane in zip(names, planes):
        if plane.shape != shape:
            raise ValidationError(
                f"frame {name} is {plane.shape[1]}x{plane.shape[0]}, "
                f"expected {shape[1]}x{shape[0]}"
            )
    geometry = SensorGeometry(shape[1], shape[0])
    return FrameSequence(geometry, np.stack(planes), np.asarray(stamps, dtype=np.int64))


def _read_manifest(manifest):
    if isinstance(manifest, (str, os.PathLike)):
        text = Path(manifest).read_text(encoding="utf-8")
    else:
        text = bytes(manifest).decode("utf-8")
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["filename", "timestamp_us"]:
        raise FormatError(
            f"manifest header must be filename,timestamp_us, got {header!r}"
        )
    names, stamps = [], []
    for i, row in enumerate(reader):
        if not row:
            continue
        if len(row) != 2:
            raise FormatError(f"manifest row {i}: expected 2 fields, got {len(row)}")
        try:
            stamp = int(row[1])
        except ValueError:
            raise FormatError(f"manifest row {i}: bad timestamp {row[1]!r}") from None
        names.append(row[0])
        stamps.append(stamp)
    return names, stamps
