"""Annotation transfer from source-video frames onto TBR frames.

Each TBR frame is labeled with the annotation whose timestamp is closest
to the mean timestamp of the events inside the frame's window. Event-free
windows fall back to the window midpoint so the rule stays total; at equal
distance the earlier annotation wins. Raw valence/arousal values in
[-10, 10] are normalized to [-1, 1] on the way through.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .affect import VaPair, normalize_va
from .errors import FormatError, ValidationError
from .events import EventStream
from .tbr import TbrFrame, TbrTensorSet

_ANNOTATION_HEADER = ["frame_index", "timestamp_us", "valence", "arousal"]
_ANNOTATION_HEADER_NO_TS = ["frame_index", "valence", "arousal"]
_LABELED_HEADER = [
    "tbr_frame_index",
    "t_start_us",
    "valence_norm",
    "arousal_norm",
    "source_annotation_index",
]


@dataclass(frozen=True)
class Annotation:
    """One source-video frame annotation in raw [-10, 10] units."""

    frame_index: int
    timestamp_us: int
    valence: float
    arousal: float

    def __post_init__(self):
        if self.timestamp_us < 0:
            raise ValidationError(
                f"annotation timestamp must be non-negative, got {self.timestamp_us}"
            )
        for name, value in (("valence", self.valence), ("arousal", self.arousal)):
            if not -10.0 <= value <= 10.0:
                raise ValidationError(f"{name} {value} outside [-10, 10]")


class AnnotationTrack:
    """Time-ordered annotations for one clip."""

    def __init__(self, annotations: Sequence[Annotation]):
        self.annotations = tuple(annotations)
        stamps = [a.timestamp_us for a in self.annotations]
        if any(b < a for a, b in zip(stamps, stamps[1:])):
            raise ValidationError("annotation timestamps must be non-decreasing")
        self._stamps = np.asarray(stamps, dtype=np.int64)

    def __len__(self) -> int:
        return len(self.annotations)

    def __getitem__(self, i: int) -> Annotation:
        return self.annotations[i]

    @property
    def timestamps(self) -> np.ndarray:
        return self._stamps


@dataclass(frozen=True)
class LabeledTbrFrame:
    """A TBR frame's normalized annotation and where it came from."""

    tbr_frame_index: int
    t_start_us: int
    va: VaPair
    source_annotation_index: int


def frame_event_mean_time(stream: EventStream, frame: TbrFrame) -> int:
    """Mean event timestamp inside the frame window, rounded half up.

    An event-free window yields the window midpoint (floor of the half-span).
    """
    lo, hi = np.searchsorted(
        stream.t, [frame.t_start_us, frame.t_start_us + frame.span_us], side="left"
    )
    n = int(hi - lo)
    if n == 0:
        return frame.t_start_us + frame.span_us // 2
    total = int(stream.t[lo:hi].sum())
    return (2 * total + n) // (2 * n)


def align(
    track: AnnotationTrack, tensors: TbrTensorSet, stream: EventStream
) -> list[LabeledTbrFrame]:
    """Label every TBR frame with its nearest-in-time annotation."""
    if len(track) == 0:
        raise ValidationError("annotation track is empty")
    stamps = track.timestamps
    labeled = []
    for k, frame in enumerate(tensors.frames):
        mean_t = frame_event_mean_time(stream, frame)
        idx = int(np.argmin(np.abs(stamps - mean_t)))
        ann = track[idx]
        labeled.append(
            LabeledTbrFrame(
                tbr_frame_index=k,
                t_start_us=frame.t_start_us,
                va=VaPair(normalize_va(ann.valence), normalize_va(ann.arousal)),
                source_annotation_index=idx,
            )
        )
    return labeled


def _read_text(source) -> str:
    if isinstance(source, (str, os.PathLike)):
        return Path(source).read_text(encoding="utf-8")
    return bytes(source).decode("utf-8")


def read_annotations(source, frame_period_us: int | None = None) -> AnnotationTrack:
    """Read an annotation CSV.

    The full header is ``frame_index,timestamp_us,valence,arousal``. Datasets
    that only index frames may omit the timestamp column, in which case
    ``frame_period_us`` must be given and timestamps become
    frame_index * frame_period_us.
    """
    reader = csv.reader(io.StringIO(_read_text(source)))
    header = next(reader, None)
    header = [h.strip() for h in header] if header else None
    if header == _ANNOTATION_HEADER:
        has_ts = True
    elif header == _ANNOTATION_HEADER_NO_TS:
        has_ts = False
        if frame_period_us is None:
            raise ValidationError(
                "annotation CSV has no timestamp column; a frame period is required"
            )
        if frame_period_us <= 0:
            raise ValidationError(f"frame period must be positive, got {frame_period_us}")
    else:
        raise FormatError(
            f"annotation header must be {','.join(_ANNOTATION_HEADER)} "
            f"or {','.join(_ANNOTATION_HEADER_NO_TS)}, got {header!r}"
        )
    annotations = []
    for i, row in enumerate(reader):
        if not row:
            continue
        try:
            if has_ts:
                index, stamp = int(row[0]), int(row[1])
                valence, arousal = float(row[2]), float(row[3])
            else:
                index = int(row[0])
                stamp = index * frame_period_us
                valence, arousal = float(row[1]), float(row[2])
        except (ValueError, IndexError):
            raise FormatError(f"annotation row {i}: bad fields {row!r}") from None
        annotations.append(Annotation(index, stamp, valence, arousal))
    return AnnotationTrack(annotations)


def write_labeled(labeled: Sequence[LabeledTbrFrame]) -> bytes:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(_LABELED_HEADER)
    for row in labeled:
        writer.writerow(
            [
                row.tbr_frame_index,
                row.t_start_us,
                repr(row.va.valence),
                repr(row.va.arousal),
                row.source_annotation_index,
            ]
        )
    return out.getvalue().encode("utf-8")


def read_labeled(source) -> list[LabeledTbrFrame]:
    reader = csv.reader(io.StringIO(_read_text(source)))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != _LABELED_HEADER:
        raise FormatError(
            f"labeled-dataset header must be {','.join(_LABELED_HEADER)}, got {header!r}"
        )
    rows = []
    for i, row in enumerate(reader):
        if not row:
            continue
        try:
            rows.append(
                LabeledTbrFrame(
                    tbr_frame_index=int(row[0]),
                    t_start_us=int(row[1]),
                    va=VaPair(float(row[2]), float(row[3])),
                    source_annotation_index=int(row[4]),
                )
            )
        except (ValueError, IndexError):
            raise FormatError(f"labeled row {i}: bad fields {row!r}") from None
    return rows
