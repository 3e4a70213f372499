"""Valence-arousal value domain and zero-shot emotion classification.

Classification never trains anything: a clip's representative frame is the
one farthest (Euclidean) from the clip's mean valence-arousal point, and
the predicted emotion is the label whose template lies nearest to it.
Templates are frame-level means over every frame of every clip carrying a
given label.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import FormatError, TemplateCoverageError, ValidationError

_TEMPLATE_HEADER = ["emotion", "valence", "arousal"]
_PREDICTION_HEADER = ["frame_index", "timestamp_us", "valence", "arousal"]


class EmotionLabel(Enum):
    """The seven emotion categories, in canonical (tie-breaking) order."""

    DISGUST = "Disgust"
    CONTEMPT = "Contempt"
    HAPPINESS = "Happiness"
    FEAR = "Fear"
    ANGER = "Anger"
    SURPRISE = "Surprise"
    SADNESS = "Sadness"

    @classmethod
    def from_name(cls, name: str) -> "EmotionLabel":
        for label in cls:
            if label.value == name:
                return label
        raise ValidationError(f"unknown emotion label {name!r}")


def normalize_va(raw: float) -> float:
    """Map a raw [-10, 10] annotation value linearly onto [-1, 1]."""
    if not -10.0 <= raw <= 10.0:
        raise ValidationError(f"raw affect value {raw} outside [-10, 10]")
    return raw / 10.0


@dataclass(frozen=True)
class VaPair:
    """One (valence, arousal) point in the closed unit square."""

    valence: float
    arousal: float

    def __post_init__(self):
        for name, value in (("valence", self.valence), ("arousal", self.arousal)):
            if not (math.isfinite(value) and -1.0 <= value <= 1.0):
                raise ValidationError(f"{name} {value} outside [-1, 1]")
        # keep plain floats so repr/round-tripping never picks up numpy scalars
        object.__setattr__(self, "valence", float(self.valence))
        object.__setattr__(self, "arousal", float(self.arousal))

    def distance_to(self, other: "VaPair") -> float:
        return math.hypot(self.valence - other.valence, self.arousal - other.arousal)


class VaSeries:
    """Per-frame valence/arousal series, stored as parallel float64 arrays."""

    def __init__(self, valence, arousal):
        v = np.ascontiguousarray(valence, dtype=np.float64)
        a = np.ascontiguousarray(arousal, dtype=np.float64)
        if v.ndim != 1 or a.ndim != 1 or v.size != a.size:
            raise ValidationError("valence and arousal must be equal-length 1-D arrays")
        for name, arr in (("valence", v), ("arousal", a)):
            if arr.size and not (
                np.isfinite(arr).all() and arr.min() >= -1.0 and arr.max() <= 1.0
            ):
                raise ValidationError(f"{name} series has values outside [-1, 1]")
        v.setflags(write=False)
        a.setflags(write=False)
        self.valence = v
        self.arousal = a

    @classmethod
    def from_pairs(cls, pairs: Iterable[VaPair]) -> "VaSeries":
        pairs = list(pairs)
        return cls([p.valence for p in pairs], [p.arousal for p in pairs])

    def __len__(self) -> int:
        return self.valence.size

    def __getitem__(self, i: int) -> VaPair:
        return VaPair(float(self.valence[i]), float(self.arousal[i]))

    def mean(self) -> VaPair:
        if len(self) == 0:
            raise ValidationError("mean of an empty series is undefined")
        return VaPair(float(self.valence.mean()), float(self.arousal.mean()))


@dataclass(frozen=True)
class RepresentativeFrame:
    """The frame farthest from the series mean, with its distance."""

    index: int
    va: VaPair
    distance: float


class EmotionTemplateSet:
    """One prototype VaPair per emotion label; all seven must be present."""

    def __init__(self, templates: Mapping[EmotionLabel, VaPair]):
        missing = [label for label in EmotionLabel if label not in templates]
        if missing:
            raise TemplateCoverageError(missing)
        self._templates = {label: templates[label] for label in EmotionLabel}

    def __getitem__(self, label: EmotionLabel) -> VaPair:
        return self._templates[label]

    def items(self):
        return self._templates.items()

    def __eq__(self, other):
        if not isinstance(other, EmotionTemplateSet):
            return NotImplemented
        return self._templates == other._templates


def select_representative(series: VaSeries) -> RepresentativeFrame:
    """Frame maximizing Euclidean distance to the series mean; ties -> lowest index."""
    if len(series) == 0:
        raise ValidationError("cannot select a representative of an empty series")
    mean = series.mean()
    dist = np.hypot(series.valence - mean.valence, series.arousal - mean.arousal)
    idx = int(np.argmax(dist))
    return RepresentativeFrame(idx, series[idx], float(dist[idx]))


def build_templates(
    labeled: Iterable[tuple[EmotionLabel, VaSeries]]
) -> EmotionTemplateSet:
    """Average valence/arousal over every frame of every clip per label.

    Pooling is frame-level: a 3-frame clip weighs three times a 1-frame clip.
    """
    sums = {label: np.zeros(2) for label in EmotionLabel}
    counts = {label: 0 for label in EmotionLabel}
    for label, series in labeled:
        if not isinstance(label, EmotionLabel):
            raise ValidationError(f"expected an EmotionLabel, got {label!r}")
        sums[label][0] += float(series.valence.sum())
        sums[label][1] += float(series.arousal.sum())
        counts[label] += len(series)
    missing = [label for label in EmotionLabel if counts[label] == 0]
    if missing:
        raise TemplateCoverageError(missing)
    return EmotionTemplateSet(
        {
            label: VaPair(sums[label][0] / counts[label], sums[label][1] / counts[label])
            for label in EmotionLabel
        }
    )


def classify(series: VaSeries, templates: EmotionTemplateSet) -> EmotionLabel:
    """Nearest-template label for the series' representative frame.

    Distance ties resolve in canonical label order.
    """
    rep = select_representative(series)
    labels = list(EmotionLabel)
    dist = np.array([rep.va.distance_to(templates[label]) for label in labels])
    return labels[int(np.argmin(dist))]


def _read_text(source) -> str:
    if isinstance(source, (str, os.PathLike)):
        return Path(source).read_text(encoding="utf-8")
    return bytes(source).decode("utf-8")


def write_templates(templates: EmotionTemplateSet) -> bytes:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(_TEMPLATE_HEADER)
    for label, pair in templates.items():
        writer.writerow([label.value, repr(pair.valence), repr(pair.arousal)])
    return out.getvalue().encode("utf-8")


def read_templates(source) -> EmotionTemplateSet:
    reader = csv.reader(io.StringIO(_read_text(source)))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != _TEMPLATE_HEADER:
        raise FormatError(
            f"template header must be {','.join(_TEMPLATE_HEADER)}, got {header!r}"
        )
    templates: dict[EmotionLabel, VaPair] = {}
    for i, row in enumerate(reader):
        if not row:
            continue
        if len(row) != 3:
            raise FormatError(f"template row {i}: expected 3 fields, got {len(row)}")
        label = EmotionLabel.from_name(row[0])
        if label in templates:
            raise ValidationError(f"duplicate template for {label.value}")
        try:
            templates[label] = VaPair(float(row[1]), float(row[2]))
        except ValueError:
            raise FormatError(f"template row {i}: bad numbers {row!r}") from None
    return EmotionTemplateSet(templates)


def read_emotion_frames(source) -> list[tuple[EmotionLabel, VaPair]]:
    """Read per-frame ``emotion,valence,arousal`` rows (template training input)."""
    reader = csv.reader(io.StringIO(_read_text(source)))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != _TEMPLATE_HEADER:
        raise FormatError(
            f"emotion-frame header must be {','.join(_TEMPLATE_HEADER)}, got {header!r}"
        )
    rows = []
    for i, row in enumerate(reader):
        if not row:
            continue
        if len(row) != 3:
            raise FormatError(f"emotion-frame row {i}: expected 3 fields, got {len(row)}")
        label = EmotionLabel.from_name(row[0])
        try:
            rows.append((label, VaPair(float(row[1]), float(row[2]))))
        except ValueError:
            raise FormatError(f"emotion-frame row {i}: bad numbers {row!r}") from None
    return rows


def write_predictions(
    frame_indices: Sequence[int], timestamps_us: Sequence[int], series: VaSeries
) -> bytes:
    if not (len(frame_indices) == len(timestamps_us) == len(series)):
        raise ValidationError("prediction columns must have equal length")
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(_PREDICTION_HEADER)
    for i in range(len(series)):
        writer.writerow(
            [
                frame_indices[i],
                timestamps_us[i],
                repr(float(series.valence[i])),
                repr(float(series.arousal[i])),
            ]
        )
    return out.getvalue().encode("utf-8")


def read_predictions(source) -> tuple[list[int], list[int], VaSeries]:
    """Read a prediction CSV into (frame indices, timestamps, series)."""
    reader = csv.reader(io.StringIO(_read_text(source)))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != _PREDICTION_HEADER:
        raise FormatError(
            f"prediction header must be {','.join(_PREDICTION_HEADER)}, got {header!r}"
        )
    indices, stamps, valence, arousal = [], [], [], []
    for i, row in enumerate(reader):
        if not row:
            continue
        try:
            indices.append(int(row[0]))
            stamps.append(int(row[1]))
            valence.append(float(row[2]))
            arousal.append(float(row[3]))
        except (ValueError, IndexError):
            raise FormatError(f"prediction row {i}: bad fields {row!r}") from None
    return indices, stamps, VaSeries(valence, arousal)
