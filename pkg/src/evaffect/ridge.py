"""Closed-form ridge regression from pooled TBR features to valence-arousal.

Features are grid-pooled means of a TBR frame, scaled to [0, 1] by the
full-scale code 2^bits - 1, with a trailing constant-1 bias term. The
weights solve the normal equations (X'X + lambda*D) W = X'Y through a
Cholesky factorization, where D is the identity with a zero in the bias
position so the intercept is never shrunk.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .affect import VaPair, VaSeries
from .errors import FormatError, ValidationError
from .labeling import LabeledTbrFrame
from .tbr import TbrFrame, TbrTensorSet

DEFAULT_GRID = (16, 16)
DEFAULT_LAMBDA = 1.0

_MODEL_HEADER = ["grid_h", "grid_w", "bits", "lambda"]


@dataclass(frozen=True)
class RidgeModel:
    """Immutable fitted weights plus the pooling setup they expect."""

    weights: np.ndarray  # (grid_h * grid_w + 1, 2); columns valence, arousal
    lam: float
    grid_h: int
    grid_w: int
    bits: int

    def __post_init__(self):
        weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        expected = (self.grid_h * self.grid_w + 1, 2)
        if weights.shape != expected:
            raise ValidationError(
                f"weights must have shape {expected}, got {weights.shape}"
            )
        if not np.isfinite(weights).all():
            raise ValidationError("model weights must be finite")
        if not self.lam > 0:
            raise ValidationError(f"lambda must be positive, got {self.lam}")
        weights.setflags(write=False)
        object.__setattr__(self, "weights", weights)


def _cell_bounds(size: int, cells: int) -> np.ndarray:
    return (np.arange(cells + 1) * size) // cells


def pool_features(frame: TbrFrame, grid: tuple[int, int]) -> np.ndarray:
    """Grid-pooled, full-scale-normalized cell means plus a bias term."""
    gh, gw = grid
    h, w = frame.geometry.height, frame.geometry.width
    if not (1 <= gh <= h and 1 <= gw <= w):
        raise ValidationError(
            f"grid {gh}x{gw} does not fit the {w}x{h} frame"
        )
    rows = _cell_bounds(h, gh)
    cols = _cell_bounds(w, gw)
    plane = frame.plane.astype(np.float64)
    scale = float((1 << frame.bits) - 1)
    features = np.empty(gh * gw + 1)
    k = 0
    for i in range(gh):
        band = plane[rows[i] : rows[i + 1]]
        for j in range(gw):
            features[k] = band[:, cols[j] : cols[j + 1]].mean() / scale
            k += 1
    features[-1] = 1.0
    return features


def fit(features: np.ndarray, targets: np.ndarray, lam: float,
        grid: tuple[int, int], bits: int) -> RidgeModel:
    """Solve the ridge normal equations, leaving the bias unregularized."""
    x = np.ascontiguousarray(features, dtype=np.float64)
    y = np.ascontiguousarray(targets, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 2 or y.shape[1] != 2:
        raise ValidationError(
            f"need features (n, d) and targets (n, 2), got {x.shape} and {y.shape}"
        )
    if x.shape[0] != y.shape[0] or x.shape[0] < 1:
        raise ValidationError(
            f"features and targets must pair up, got {x.shape[0]} and {y.shape[0]} rows"
        )
    if x.shape[1] != grid[0] * grid[1] + 1:
        raise ValidationError(
            f"feature width {x.shape[1]} does not match grid {grid[0]}x{grid[1]} plus bias"
        )
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise ValidationError("features and targets must be finite")
    if grid[0] < 1 or grid[1] < 1:
        raise ValidationError(f"grid dimensions must be >= 1, got {grid[0]}x{grid[1]}")
    if not lam > 0:
        raise ValidationError(f"lambda must be positive, got {lam}")
    d = x.shape[1]
    penalty = np.full(d, lam)
    penalty[-1] = 0.0  # bias column
    normal = x.T @ x + np.diag(penalty)
    weights = cho_solve(cho_factor(normal, lower=True), x.T @ y)
    return RidgeModel(weights=weights, lam=lam, grid_h=grid[0], grid_w=grid[1], bits=bits)


def predict(model: RidgeModel, frame: TbrFrame) -> VaPair:
    """Pooled linear prediction, clamped into the valid VA square."""
    if frame.bits != model.bits:
        raise ValidationError(
            f"frame bit depth {frame.bits} does not match model bit depth {model.bits}"
        )
    features = pool_features(frame, (model.grid_h, model.grid_w))
    raw = features @ model.weights
    clipped = np.clip(raw, -1.0, 1.0)
    return VaPair(float(clipped[0]), float(clipped[1]))


def predict_series(model: RidgeModel, tensors: TbrTensorSet) -> VaSeries:
    pairs = [predict(model, frame) for frame in tensors.frames]
    return VaSeries.from_pairs(pairs)


def design_matrix(
    tensor_sets: Sequence[TbrTensorSet],
    labeled_sets: Sequence[Sequence[LabeledTbrFrame]],
    grid: tuple[int, int],
) -> tuple[np.ndarray, np.ndarray, int]:
    """Stack pooled features and normalized targets across clips.

    Labeled rows address frames by index within their clip's tensor set.
    Returns (features, targets, bits); all clips must share one bit depth.
    """
    if len(tensor_sets) != len(labeled_sets):
        raise ValidationError(
            f"{len(tensor_sets)} tensor sets but {len(labeled_sets)} labeled sets"
        )
    if not tensor_sets:
        raise ValidationError("need at least one clip to build a design matrix")
    bits = tensor_sets[0].config.bits
    rows, targets = [], []
    for tensors, labeled in zip(tensor_sets, labeled_sets):
        if tensors.config.bits != bits:
            raise ValidationError("all clips must share one TBR bit depth")
        for entry in labeled:
            if not 0 <= entry.tbr_frame_index < len(tensors):
                raise ValidationError(
                    f"labeled row addresses frame {entry.tbr_frame_index} "
                    f"of a {len(tensors)}-frame clip"
                )
            frame = tensors.frames[entry.tbr_frame_index]
            if frame.t_start_us != entry.t_start_us:
                raise ValidationError(
                    f"labeled row for frame {entry.tbr_frame_index} expects start "
                    f"{entry.t_start_us}, tensor set has {frame.t_start_us}"
                )
            rows.append(pool_features(frame, grid))
            targets.append((entry.va.valence, entry.va.arousal))
    if not rows:
        raise ValidationError("no labeled frames to fit on")
    return np.asarray(rows), np.asarray(targets), bits


def write_model(model: RidgeModel) -> bytes:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(_MODEL_HEADER)
    writer.writerow([model.grid_h, model.grid_w, model.bits, repr(model.lam)])
    for row in model.weights:
        writer.writerow([repr(float(row[0])), repr(float(row[1]))])
    return out.getvalue().encode("utf-8")


def read_model(source) -> RidgeModel:
    if isinstance(source, (str, os.PathLike)):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = bytes(source).decode("utf-8")
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != _MODEL_HEADER:
        raise FormatError(
            f"model header must be {','.join(_MODEL_HEADER)}, got {header!r}"
        )
    meta = next(reader, None)
    if meta is None or len(meta) != 4:
        raise FormatError(f"model metadata row missing or malformed: {meta!r}")
    try:
        grid_h, grid_w, bits = int(meta[0]), int(meta[1]), int(meta[2])
        lam = float(meta[3])
    except ValueError:
        raise FormatError(f"bad model metadata {meta!r}") from None
    weights = []
    for i, row in enumerate(reader):
        if not row:
            continue
        if len(row) != 2:
            raise FormatError(f"weight row {i}: expected 2 fields, got {len(row)}")
        try:
            weights.append((float(row[0]), float(row[1])))
        except ValueError:
            raise FormatError(f"weight row {i}: bad numbers {row!r}") from None
    expected = grid_h * grid_w + 1
    if len(weights) != expected:
        raise FormatError(
            f"model declares grid {grid_h}x{grid_w} ({expected} weight rows) "
            f"but has {len(weights)}"
        )
    return RidgeModel(
        weights=np.asarray(weights), lam=lam, grid_h=grid_h, grid_w=grid_w, bits=bits
    )
