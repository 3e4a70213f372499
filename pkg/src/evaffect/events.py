"""Event data model and the EVT1 binary / CSV codecs.

An event is a timestamped polarity spike at one pixel; a stream is a
time-sorted sequence of them over a fixed sensor geometry. Streams are
stored columnar (one numpy array per field) and are immutable after
construction, so every operation here is a pure function that is safe to
call concurrently.

EVT1 layout (little-endian): magic ``EVT1``, u16 width, u16 height,
u64 event count, then one 13-byte record ``{u64 t_us, u16 x, u16 y,
i8 polarity}`` per event. The CSV form has header ``t_us,x,y,polarity``
with the geometry supplied out-of-band.
"""

from __future__ import annotations

import csv
import io
import os
import struct
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple

import numpy as np

from .errors import FormatError, ValidationError

EVT1_MAGIC = b"EVT1"

_HEADER = struct.Struct("<4sHHQ")
_RECORD_DTYPE = np.dtype([("t", "<u8"), ("x", "<u2"), ("y", "<u2"), ("p", "<i1")])
_CSV_HEADER = ["t_us", "x", "y", "polarity"]

_MAX_T = np.iinfo(np.int64).max


@dataclass(frozen=True)
class SensorGeometry:
    """Pixel grid dimensions of the (simulated) sensor."""

    width: int
    height: int

    def __post_init__(self):
        for name, value in (("width", self.width), ("height", self.height)):
            if not isinstance(value, int) or not 1 <= value <= 0xFFFF:
                raise ValidationError(
                    f"geometry {name} must be an integer in [1, 65535], got {value!r}"
                )

    def __str__(self):
        return f"{self.width}x{self.height}"

    @classmethod
    def parse(cls, text: str) -> "SensorGeometry":
        """Parse a ``WxH`` string, as used by the ``--geometry`` CLI flag."""
        parts = text.lower().split("x")
        if len(parts) != 2:
            raise ValidationError(f"geometry must look like WxH, got {text!r}")
        try:
            width, height = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValidationError(f"geometry must look like WxH, got {text!r}") from None
        return cls(width, height)


class Event(NamedTuple):
    """One polarity spike: microsecond timestamp, pixel, +1/-1 polarity."""

    t: int
    x: int
    y: int
    polarity: int


class EventStream:
    """Immutable, time-sorted event sequence over one sensor geometry.

    Events are kept as parallel arrays (int64 t, uint16 x/y, int8 polarity).
    Construction validates the stream invariants: timestamps non-decreasing,
    coordinates inside the geometry, polarity in {+1, -1}. Equal-timestamp
    events keep their input order.
    """

    def __init__(self, geometry: SensorGeometry, t, x, y, polarity):
        self.geometry = geometry
        self.t = np.ascontiguousarray(t, dtype=np.int64)
        self.x = np.ascontiguousarray(x, dtype=np.uint16)
        self.y = np.ascontiguousarray(y, dtype=np.uint16)
        self.polarity = np.ascontiguousarray(polarity, dtype=np.int8)
        n = self.t.size
        if not (self.x.size == self.y.size == self.polarity.size == n):
            raise ValidationError("event field arrays must have equal length")
        if n:
            self._validate()
        for arr in (self.t, self.x, self.y, self.polarity):
            arr.setflags(write=False)

    def _validate(self):
        if self.t[0] < 0:
            raise ValidationError("record 0: negative timestamp")
        decreasing = np.nonzero(np.diff(self.t) < 0)[0]
        if decreasing.size:
            i = int(decreasing[0]) + 1
            raise ValidationError(
                f"record {i}: timestamp {int(self.t[i])} decreases below "
                f"{int(self.t[i - 1])}"
            )
        oob = np.nonzero(
            (self.x >= self.geometry.width) | (self.y >= self.geometry.height)
        )[0]
        if oob.size:
            i = int(oob[0])
            raise ValidationError(
                f"record {i}: coordinate ({int(self.x[i])}, {int(self.y[i])}) "
                f"outside geometry {self.geometry}"
            )
        badp = np.nonzero((self.polarity != 1) & (self.polarity != -1))[0]
        if badp.size:
            i = int(badp[0])
            raise ValidationError(
                f"record {i}: polarity must be +1 or -1, got {int(self.polarity[i])}"
            )

    @classmethod
    def from_events(
        cls, geometry: SensorGeometry, events: Iterable[Event]
    ) -> "EventStream":
        rows = list(events)
        if not rows:
            return cls.empty(geometry)
        t, x, y, p = zip(*rows)
        return cls(geometry, t, x, y, p)

    @classmethod
    def empty(cls, geometry: SensorGeometry) -> "EventStream":
        return cls(geometry, [], [], [], [])

    def __len__(self) -> int:
        return self.t.size

    def __getitem__(self, i: int) -> Event:
        return Event(int(self.t[i]), int(self.x[i]), int(self.y[i]), int(self.polarity[i]))

    def __iter__(self) -> Iterator[Event]:
        for i in range(len(self)):
            yield self[i]

    def __eq__(self, other) -> bool:
        if not isinstance(other, EventStream):
            return NotImplemented
        return (
            self.geometry == other.geometry
            and np.array_equal(self.t, other.t)
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.y, other.y)
            and np.array_equal(self.polarity, other.polarity)
        )

    def __repr__(self):
        return f"EventStream(geometry={self.geometry}, n={len(self)})"


def concat_streams(streams: Iterable[EventStream]) -> EventStream:
    """Concatenate streams sharing one geometry; result must stay sorted."""
    streams = list(streams)
    if not streams:
        raise ValidationError("cannot concatenate zero streams")
    geometry = streams[0].geometry
    for s in streams[1:]:
        if s.geometry != geometry:
            raise ValidationError("cannot concatenate streams with differing geometry")
    return EventStream(
        geometry,
        np.concatenate([s.t for s in streams]),
        np.concatenate([s.x for s in streams]),
        np.concatenate([s.y for s in streams]),
        np.concatenate([s.polarity for s in streams]),
    )


def slice_by_time(stream: EventStream, t_start: int, t_end: int) -> EventStream:
    """Events with t_start <= t < t_end, order preserved, geometry unchanged."""
    if t_start > t_end:
        raise ValidationError(f"t_start {t_start} exceeds t_end {t_end}")
    lo, hi = np.searchsorted(stream.t, [t_start, t_end], side="left")
    return EventStream(
        stream.geometry,
        stream.t[lo:hi],
        stream.x[lo:hi],
        stream.y[lo:hi],
        stream.polarity[lo:hi],
    )


def _as_bytes(source) -> bytes:
    if isinstance(source, (bytes, bytearray, memoryview)):
        return bytes(source)
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            return fh.read()
    raise TypeError(f"source must be bytes or a path, got {type(source).__name__}")


def read_events(source, format: str = "binary", geometry: SensorGeometry | None = None) -> EventStream:
    """Read an event stream from EVT1 bytes or CSV text.

    ``source`` may be a byte string or a filesystem path. CSV input needs the
    sensor ``geometry`` out-of-band; for binary input a supplied geometry is
    cross-checked against the file header.
    """
    data = _as_bytes(source)
    if format == "binary":
        return _read_binary(data, geometry)
    if format == "csv":
        if geometry is None:
            raise ValidationError("csv event input requires an explicit geometry")
        return _read_csv(data, geometry)
    raise ValidationError(f"unknown event format {format!r}")


def write_events(stream: EventStream, format: str = "binary") -> bytes:
    """Serialize a stream; read_events(write_events(s)) reconstructs s exactly."""
    if format == "binary":
        return _write_binary(stream)
    if format == "csv":
        return _write_csv(stream)
    raise ValidationError(f"unknown event format {format!r}")


def _read_binary(data: bytes, geometry: SensorGeometry | None) -> EventStream:
    if len(data) < _HEADER.size:
        raise FormatError(f"EVT1 file truncated: {len(data)} bytes, need {_HEADER.size}")
    magic, width, height, count = _HEADER.unpack_from(data)
    if magic != EVT1_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {EVT1_MAGIC!r}")
    if width == 0 or height == 0:
        raise FormatError(f"EVT1 header declares empty geometry {width}x{height}")
    expected = _HEADER.size + count * _RECORD_DTYPE.itemsize
    if len(data) != expected:
        raise FormatError(
            f"EVT1 size mismatch: header declares {count} records "
            f"({expected} bytes) but file has {len(data)} bytes"
        )
    file_geometry = SensorGeometry(width, height)
    if geometry is not None and geometry != file_geometry:
        raise ValidationError(
            f"geometry {geometry} does not match file header {file_geometry}"
        )
    records = np.frombuffer(data, dtype=_RECORD_DTYPE, count=count, offset=_HEADER.size)
    t = records["t"]
    if t.size and int(t.max()) > _MAX_T:
        raise FormatError("EVT1 timestamp exceeds the supported 63-bit range")
    return EventStream(file_geometry, t.astype(np.int64), records["x"], records["y"], records["p"])


def _write_binary(stream: EventStream) -> bytes:
    header = _HEADER.pack(
        EVT1_MAGIC, stream.geometry.width, stream.geometry.height, len(stream)
    )
    records = np.empty(len(stream), dtype=_RECORD_DTYPE)
    records["t"] = stream.t.astype(np.uint64)
    records["x"] = stream.x
    records["y"] = stream.y
    records["p"] = stream.polarity
    return header + records.tobytes()


def _read_csv(data: bytes, geometry: SensorGeometry) -> EventStream:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(f"event CSV is not valid UTF-8: {exc}") from None
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != _CSV_HEADER:
        raise FormatError(
            f"event CSV header must be {','.join(_CSV_HEADER)}, got {header!r}"
        )
    t, x, y, p = [], [], [], []
    for i, row in enumerate(reader):
        if not row:
            continue
        if len(row) != 4:
            raise FormatError(f"row {i}: expected 4 fields, got {len(row)}")
        try:
            t.append(int(row[0]))
            x.append(int(row[1]))
            y.append(int(row[2]))
            p.append(int(row[3]))
        except ValueError:
            raise FormatError(f"row {i}: non-integer field in {row!r}") from None
    # Range-check before the numpy conversion, which would wrap silently.
    for i in range(len(t)):
        if not 0 <= t[i] <= _MAX_T:
            raise ValidationError(f"record {i}: timestamp {t[i]} out of range")
        if not (0 <= x[i] <= 0xFFFF and 0 <= y[i] <= 0xFFFF):
            raise ValidationError(
                f"record {i}: coordinate ({x[i]}, {y[i]}) outside geometry {geometry}"
            )
        if p[i] not in (1, -1):
            raise ValidationError(f"record {i}: polarity must be +1 or -1, got {p[i]}")
    return EventStream(geometry, t, x, y, p)


def _write_csv(stream: EventStream) -> bytes:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(_CSV_HEADER)
    for ev in stream:
        writer.writerow([ev.t, ev.x, ev.y, ev.polarity])
    return out.getvalue().encode("utf-8")
