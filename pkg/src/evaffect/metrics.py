"""Evaluation metrics: RMSE, Pearson correlation, and sign agreement.

All three operate on equal-length scalar series in float64. PCC uses
population (divisor n) moments and refuses constant series rather than
returning NaN; SAGR uses the three-valued sign with sign(0) = 0, so a
series agrees with itself even where it is exactly zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .affect import VaSeries
from .errors import ConstantSeriesError, ValidationError


def _as_series(values, name: str) -> np.ndarray:
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be a 1-D series, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValidationError(f"{name} contains non-finite values")
    return arr


def _paired(truth, pred, min_len: int = 1):
    a = _as_series(truth, "truth")
    b = _as_series(pred, "pred")
    if a.size != b.size:
        raise ValidationError(f"length mismatch: truth has {a.size}, pred has {b.size}")
    if a.size < min_len:
        raise ValidationError(f"need at least {min_len} samples, got {a.size}")
    return a, b


def rmse(truth, pred) -> float:
    """Root mean squared difference."""
    a, b = _paired(truth, pred)
    return float(np.sqrt(np.mean((a - b) ** 2)))


def pcc(truth, pred) -> float:
    """Pearson correlation with population moments.

    Raises ConstantSeriesError when either series has zero variance.
    """
    a, b = _paired(truth, pred, min_len=2)
    # zero variance means all values equal; test that directly rather than
    # comparing a floating-point sigma against zero
    if np.ptp(a) == 0.0 or np.ptp(b) == 0.0:
        which = "truth" if np.ptp(a) == 0.0 else "pred"
        raise ConstantSeriesError(f"correlation undefined: {which} series is constant")
    da = a - a.mean()
    db = b - b.mean()
    sa = np.sqrt(np.mean(da * da))
    sb = np.sqrt(np.mean(db * db))
    return float(np.mean(da * db) / (sa * sb))


def sagr(truth, pred) -> float:
    """Fraction of positions where the three-valued signs agree exactly."""
    a, b = _paired(truth, pred)
    return float(np.mean(np.sign(a) == np.sign(b)))


@dataclass(frozen=True)
class DimensionMetrics:
    """The three metrics for one affect dimension; pcc None when undefined."""

    rmse: float
    pcc: float | None
    sagr: float


@dataclass(frozen=True)
class EvaluationReport:
    """Arousal-first metric report, matching the evaluation table layout."""

    arousal: DimensionMetrics
    valence: DimensionMetrics


def evaluate(truth: VaSeries, pred: VaSeries) -> EvaluationReport:
    """Apply rmse/pcc/sagr independently per dimension.

    A degenerate (constant) series makes that dimension's PCC undefined
    (reported as None) instead of aborting the whole report.
    """
    if len(truth) != len(pred):
        raise ValidationError(
            f"length mismatch: truth has {len(truth)}, pred has {len(pred)}"
        )
    dims = {}
    for name, t_vals, p_vals in (
        ("arousal", truth.arousal, pred.arousal),
        ("valence", truth.valence, pred.valence),
    ):
        try:
            correlation = pcc(t_vals, p_vals)
        except ConstantSeriesError:
            correlation = None
        dims[name] = DimensionMetrics(
            rmse=rmse(t_vals, p_vals), pcc=correlation, sagr=sagr(t_vals, p_vals)
        )
    return EvaluationReport(arousal=dims["arousal"], valence=dims["valence"])


def _fmt(value: float | None) -> str:
    return "undefined" if value is None else format(value, ".12g")


def report_csv(report: EvaluationReport) -> str:
    """The six numbers as a two-line CSV (header plus one row), arousal first."""
    header = (
        "arousal_rmse,arousal_pcc,arousal_sagr,valence_rmse,valence_pcc,valence_sagr"
    )
    row = ",".join(
        _fmt(v)
        for v in (
            report.arousal.rmse,
            report.arousal.pcc,
            report.arousal.sagr,
            report.valence.rmse,
            report.valence.pcc,
            report.valence.sagr,
        )
    )
    return f"{header}\n{row}\n"


def report_table(report: EvaluationReport, label: str = "model") -> str:
    """Aligned text table with an arousal block then a valence block."""
    columns = ["RMSE", "PCC", "SAGR"]
    values = [
        _fmt(report.arousal.rmse),
        _fmt(report.arousal.pcc),
        _fmt(report.arousal.sagr),
        _fmt(report.valence.rmse),
        _fmt(report.valence.pcc),
        _fmt(report.valence.sagr),
    ]
    width = max(len(v) for v in values + columns) + 2
    head1 = " " * len(label) + "  " + "Arousal".center(3 * width) + "Valence".center(3 * width)
    head2 = " " * len(label) + "  " + "".join(c.rjust(width) for c in columns * 2)
    row = label + "  " + "".join(v.rjust(width) for v in values)
    return "\n".join([head1.rstrip(), head2.rstrip(), row.rstrip()]) + "\n"
