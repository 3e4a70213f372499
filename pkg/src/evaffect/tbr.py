"""Temporal Binary Representation encoding and the TBR1 tensor codec.

A stream is cut into consecutive accumulation intervals of delta_t
microseconds. Each interval becomes a binary slice: pixel = 1 iff at least
one event (of either polarity) hit that pixel during the interval. N
consecutive slices are then packed per pixel into one decimal code, read
as a binary numeral left to right, so the EARLIEST slice is the most
significant bit. One packed frame spans N * delta_t microseconds.

TBR1 layout (little-endian): magic ``TBR1``, u16 width, u16 height,
u8 bits, u8 reserved(0), u32 delta_t_us, u64 frame_count, then per frame
``{u64 t_start_us, row-major payload}`` with u8 pixels when bits <= 8 and
u16 pixels otherwise.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import FormatError, ValidationError
from .events import EventStream, SensorGeometry

DEFAULT_DELTA_T_US = 5000  # 5 ms accumulation interval
DEFAULT_BITS = 8

TBR1_MAGIC = b"TBR1"
_HEADER = struct.Struct("<4sHHBBIQ")
_FRAME_PREFIX = struct.Struct("<Q")


@dataclass(frozen=True)
class TbrConfig:
    """Accumulation interval, bit depth, and window origin.

    ``origin_us=None`` means: start the first interval at the stream's first
    event timestamp floored to a delta_t multiple.
    """

    delta_t_us: int = DEFAULT_DELTA_T_US
    bits: int = DEFAULT_BITS
    origin_us: int | None = None

    def __post_init__(self):
        if not isinstance(self.delta_t_us, int) or self.delta_t_us <= 0:
            raise ValidationError(
                f"delta_t must be a positive integer microsecond count, got {self.delta_t_us!r}"
            )
        if not isinstance(self.bits, int) or not 1 <= self.bits <= 16:
            raise ValidationError(f"bits must be an integer in [1, 16], got {self.bits!r}")
        if self.origin_us is not None and self.origin_us < 0:
            raise ValidationError(f"origin must be non-negative, got {self.origin_us}")

    @property
    def span_us(self) -> int:
        return self.bits * self.delta_t_us


def storage_dtype(bits: int):
    return np.uint8 if bits <= 8 else np.uint16


@dataclass(frozen=True)
class BinarySlice:
    """Per-pixel event-presence indicator over one accumulation interval."""

    geometry: SensorGeometry
    plane: np.ndarray  # (H, W) bool
    t_start_us: int
    delta_t_us: int

    def __post_init__(self):
        plane = np.ascontiguousarray(self.plane, dtype=bool)
        if plane.shape != (self.geometry.height, self.geometry.width):
            raise ValidationError(
                f"slice plane shape {plane.shape} does not match geometry {self.geometry}"
            )
        plane.setflags(write=False)
        object.__setattr__(self, "plane", plane)


@dataclass(frozen=True)
class TbrFrame:
    """One decimal-coded plane spanning bits * delta_t microseconds."""

    geometry: SensorGeometry
    plane: np.ndarray  # (H, W) uint8 or uint16
    t_start_us: int
    span_us: int
    bits: int

    def __post_init__(self):
        if not 1 <= self.bits <= 16:
            raise ValidationError(f"bits must be in [1, 16], got {self.bits}")
        raw = np.asarray(self.plane)
        if raw.shape != (self.geometry.height, self.geometry.width):
            raise ValidationError(
                f"frame plane shape {raw.shape} does not match geometry {self.geometry}"
            )
        limit = (1 << self.bits) - 1
        if raw.size and (int(raw.min()) < 0 or int(raw.max()) > limit):
            raise ValidationError(
                f"pixel value {int(raw.max())} exceeds 2^{self.bits}-1"
            )
        plane = np.ascontiguousarray(raw, dtype=storage_dtype(self.bits))
        plane.setflags(write=False)
        object.__setattr__(self, "plane", plane)


@dataclass(frozen=True)
class TbrTensorSet:
    """The consecutive TBR frames of one clip plus their shared config."""

    geometry: SensorGeometry
    config: TbrConfig
    frames: tuple[TbrFrame, ...]

    def __post_init__(self):
        object.__setattr__(self, "frames", tuple(self.frames))
        if self.config.origin_us is None:
            raise ValidationError("tensor set requires a resolved (integer) origin")
        span = self.config.span_us
        for k, frame in enumerate(self.frames):
            if frame.geometry != self.geometry:
                raise ValidationError(f"frame {k} geometry differs from set geometry")
            if frame.bits != self.config.bits:
                raise ValidationError(f"frame {k} bit depth differs from config")
            expected = self.config.origin_us + k * span
            if frame.t_start_us != expected or frame.span_us != span:
                raise ValidationError(
                    f"frame {k} must start at {expected} and span {span}, "
                    f"got start {frame.t_start_us} span {frame.span_us}"
                )

    def __len__(self) -> int:
        return len(self.frames)


def binarize(stream: EventStream, t_start: int, delta_t: int) -> BinarySlice:
    """Presence indicator over [t_start, t_start + delta_t); polarity ignored."""
    if delta_t <= 0:
        raise ValidationError(f"delta_t must be positive, got {delta_t}")
    lo, hi = np.searchsorted(stream.t, [t_start, t_start + delta_t], side="left")
    plane = np.zeros((stream.geometry.height, stream.geometry.width), dtype=bool)
    plane[stream.y[lo:hi], stream.x[lo:hi]] = True
    return BinarySlice(stream.geometry, plane, t_start, delta_t)


def resolve_origin(stream: EventStream, config: TbrConfig) -> int:
    """The configured origin, or the first event time floored to delta_t."""
    if config.origin_us is not None:
        return config.origin_us
    if len(stream) == 0:
        return 0
    first = int(stream.t[0])
    return first - first % config.delta_t_us


def encode(stream: EventStream, config: TbrConfig | None = None) -> TbrTensorSet:
    """Encode a stream into consecutive TBR frames.

    Frames cover ceil((t_last - origin + 1) / (bits * delta_t)) windows; the
    final window is zero-padded where the stream ends mid-window. Events
    before the origin (possible only with an explicit origin override) are
    outside every window and are ignored.
    """
    if config is None:
        config = TbrConfig()
    origin = resolve_origin(stream, config)
    resolved = replace(config, origin_us=origin)
    height, width = stream.geometry.height, stream.geometry.width
    bits, span = config.bits, resolved.span_us

    start = np.searchsorted(stream.t, origin, side="left")
    t = stream.t[start:]
    if t.size == 0:
        return TbrTensorSet(stream.geometry, resolved, ())

    n_frames = (int(t[-1]) - origin) // span + 1
    slice_idx = (t - origin) // config.delta_t_us
    frame_idx = slice_idx // bits
    bit_idx = slice_idx % bits

    dtype = storage_dtype(bits)
    tensor = np.zeros(n_frames * height * width, dtype=dtype)
    flat = frame_idx * (height * width) + stream.y[start:].astype(np.int64) * width + stream.x[start:]
    codes = (1 << (bits - 1 - bit_idx)).astype(dtype)
    np.bitwise_or.at(tensor, flat, codes)

    planes = tensor.reshape(n_frames, height, width)
    frames = tuple(
        TbrFrame(stream.geometry, planes[k], origin + k * span, span, bits)
        for k in range(n_frames)
    )
    return TbrTensorSet(stream.geometry, resolved, frames)


def unpack_frame(frame: TbrFrame) -> np.ndarray:
    """Split a frame's decimal codes back into its (bits, H, W) slice bits."""
    shifts = np.arange(frame.bits - 1, -1, -1, dtype=np.uint32)
    return ((frame.plane[None, :, :] >> shifts[:, None, None]) & 1).astype(bool)


def padded_slices(tensors: TbrTensorSet, stream: EventStream) -> int:
    """How many trailing zero-padded intervals the final frame contains."""
    if not tensors.frames:
        return 0
    origin = tensors.config.origin_us
    start = np.searchsorted(stream.t, origin, side="left")
    t = stream.t[start:]
    if t.size == 0:
        return len(tensors) * tensors.config.bits
    used = (int(t[-1]) - origin) // tensors.config.delta_t_us + 1
    return len(tensors) * tensors.config.bits - used


def write_tensors(tensors: TbrTensorSet) -> bytes:
    """Serialize to TBR1; lossless for every valid tensor set."""
    config = tensors.config
    parts = [
        _HEADER.pack(
            TBR1_MAGIC,
            tensors.geometry.width,
            tensors.geometry.height,
            config.bits,
            0,
            config.delta_t_us,
            len(tensors),
        )
    ]
    for frame in tensors.frames:
        parts.append(_FRAME_PREFIX.pack(frame.t_start_us))
        parts.append(np.ascontiguousarray(frame.plane, dtype="<" + frame.plane.dtype.char).tobytes())
    return b"".join(parts)


def read_tensors(source) -> TbrTensorSet:
    """Parse TBR1 bytes or a TBR1 file back into a tensor set."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            data = fh.read()
    else:
        data = bytes(source)
    if len(data) < _HEADER.size:
        raise FormatError(f"TBR1 file truncated: {len(data)} bytes, need {_HEADER.size}")
    magic, width, height, bits, reserved, delta_t, frame_count = _HEADER.unpack_from(data)
    if magic != TBR1_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {TBR1_MAGIC!r}")
    if reserved != 0:
        raise FormatError(f"reserved header byte must be 0, got {reserved}")
    if not 1 <= bits <= 16:
        raise FormatError(f"bits must be in [1, 16], got {bits}")
    if delta_t == 0:
        raise FormatError("delta_t must be positive")
    if width == 0 or height == 0:
        raise FormatError(f"TBR1 header declares empty geometry {width}x{height}")
    geometry = SensorGeometry(width, height)
    dtype = storage_dtype(bits)
    pixel_bytes = np.dtype(dtype).itemsize
    frame_bytes = _FRAME_PREFIX.size + width * height * pixel_bytes
    expected = _HEADER.size + frame_count * frame_bytes
    if len(data) != expected:
        raise FormatError(
            f"TBR1 size mismatch: header declares {frame_count} frames "
            f"({expected} bytes) but file has {len(data)} bytes"
        )
    span = bits * delta_t
    frames = []
    offset = _HEADER.size
    for _ in range(frame_count):
        (t_start,) = _FRAME_PREFIX.unpack_from(data, offset)
        offset += _FRAME_PREFIX.size
        plane = np.frombuffer(
            data, dtype="<" + np.dtype(dtype).char, count=width * height, offset=offset
        ).reshape(height, width)
        offset += width * height * pixel_bytes
        frames.append(TbrFrame(geometry, plane, t_start, span, bits))
    origin = frames[0].t_start_us if frames else 0
    config = TbrConfig(delta_t_us=delta_t, bits=bits, origin_us=origin)
    return TbrTensorSet(geometry, config, tuple(frames))


def tensor_sets_equal(a: TbrTensorSet, b: TbrTensorSet) -> bool:
    return (
        a.geometry == b.geometry
        and a.config == b.config
        and len(a) == len(b)
        and all(
            fa.t_start_us == fb.t_start_us and np.array_equal(fa.plane, fb.plane)
            for fa, fb in zip(a.frames, b.frames)
        )
    )


def frame_sequence_bits(tensors: TbrTensorSet) -> Sequence[np.ndarray]:
    """Unpacked slice bits for every frame, earliest slice first."""
    return [unpack_frame(frame) for frame in tensors.frames]
