import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evaffect.affect import VaSeries
from evaffect.errors import ConstantSeriesError, ValidationError
from evaffect.metrics import (
    evaluate,
    pcc,
    report_csv,
    report_table,
    rmse,
    sagr,
)


def oracle_rmse(truth, pred):
    return math.sqrt(math.fsum((a - b) ** 2 for a, b in zip(truth, pred)) / len(truth))


def oracle_pcc(truth, pred):
    n = len(truth)
    mu_t = math.fsum(truth) / n
    mu_p = math.fsum(pred) / n
    cov = math.fsum((a - mu_t) * (b - mu_p) for a, b in zip(truth, pred)) / n
    sd_t = math.sqrt(math.fsum((a - mu_t) ** 2 for a in truth) / n)
    sd_p = math.sqrt(math.fsum((b - mu_p) ** 2 for b in pred) / n)
    return cov / (sd_t * sd_p)


def sign(v):
    return 1 if v > 0 else (-1 if v < 0 else 0)


def oracle_sagr(truth, pred):
    return sum(sign(a) == sign(b) for a, b in zip(truth, pred)) / len(truth)


class TestRmse:
    def test_identity(self):
        assert rmse([0.3, -0.2], [0.3, -0.2]) == 0.0

    def test_worked_example(self):
        assert rmse([1.0, -1.0], [-1.0, 1.0]) == pytest.approx(2.0, abs=1e-15)

    def test_symmetry(self, rng):
        a = rng.uniform(-1, 1, size=50)
        b = rng.uniform(-1, 1, size=50)
        assert rmse(a, b) == rmse(b, a)

    def test_length_mismatch(self):
        with pytest.raises(ValidationError):
            rmse([1.0], [1.0, 2.0])

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            rmse([], [])

    def test_matches_oracle(self, rng):
        for _ in range(200):
            n = int(rng.integers(1, 100))
            a = rng.uniform(-1, 1, size=n)
            b = rng.uniform(-1, 1, size=n)
            assert rmse(a, b) == pytest.approx(oracle_rmse(a, b), abs=1e-12)


class TestPcc:
    def test_perfect_correlation(self, rng):
        x = rng.uniform(-1, 1, size=40)
        assert pcc(x, x) == pytest.approx(1.0, abs=1e-12)

    def test_anti_correlation(self, rng):
        x = rng.uniform(-1, 1, size=40)
        assert pcc(x, -x) == pytest.approx(-1.0, abs=1e-12)

    def test_affine_invariance(self, rng):
        x = rng.uniform(-1, 1, size=60)
        assert pcc(x, 0.4 * x + 0.2) == pytest.approx(1.0, abs=1e-12)
        assert pcc(x, -0.4 * x + 0.2) == pytest.approx(-1.0, abs=1e-12)

    def test_constant_series_raises(self):
        with pytest.raises(ConstantSeriesError):
            pcc([1.0, 1.0, 1.0], [0.1, 0.2, 0.3])
        with pytest.raises(ConstantSeriesError):
            pcc([0.1, 0.2, 0.3], [0.5, 0.5, 0.5])

    def test_needs_two_samples(self):
        with pytest.raises(ValidationError):
            pcc([1.0], [1.0])

    def test_within_unit_interval(self, rng):
        for _ in range(100):
            n = int(rng.integers(2, 50))
            a = rng.uniform(-1, 1, size=n)
            b = rng.uniform(-1, 1, size=n)
            if np.ptp(a) == 0 or np.ptp(b) == 0:
                continue
            r = pcc(a, b)
            assert -1.0 - 1e-12 <= r <= 1.0 + 1e-12

    def test_matches_oracle(self, rng):
        for _ in range(200):
            n = int(rng.integers(2, 100))
            a = rng.uniform(-1, 1, size=n)
            b = rng.uniform(-1, 1, size=n)
            if np.ptp(a) == 0 or np.ptp(b) == 0:
                continue
            assert pcc(a, b) == pytest.approx(oracle_pcc(list(a), list(b)), abs=1e-12)


class TestSagr:
    def test_all_match(self):
        assert sagr([0.5, -0.5], [0.1, -0.9]) == 1.0

    def test_worked_example(self):
        assert sagr([0.5, -0.5], [0.1, 0.1]) == 0.5

    def test_zero_sign_is_its_own_class(self):
        assert sagr([0.0], [0.3]) == 0.0
        assert sagr([0.0], [0.0]) == 1.0

    def test_self_agreement_with_zeros(self):
        x = [0.0, 0.5, -0.5, 0.0]
        assert sagr(x, x) == 1.0

    def test_matches_oracle(self, rng):
        for _ in range(200):
            n = int(rng.integers(1, 100))
            a = np.round(rng.uniform(-1, 1, size=n), 1)
            b = np.round(rng.uniform(-1, 1, size=n), 1)
            assert sagr(a, b) == pytest.approx(oracle_sagr(list(a), list(b)), abs=1e-12)


class TestEvaluate:
    def test_identity_report(self, rng):
        v = rng.uniform(-1, 1, size=30)
        a = rng.uniform(-1, 1, size=30)
        s = VaSeries(v, a)
        report = evaluate(s, s)
        for dim in (report.arousal, report.valence):
            assert dim.rmse == 0.0
            assert dim.pcc == pytest.approx(1.0, abs=1e-12)
            assert dim.sagr == 1.0

    def test_csv_row_is_arousal_first(self, rng):
        s = VaSeries(rng.uniform(-1, 1, 10), rng.uniform(-1, 1, 10))
        text = report_csv(evaluate(s, s))
        header = text.splitlines()[0]
        assert header.startswith("arousal_rmse,arousal_pcc,arousal_sagr,valence_")

    def test_degenerate_pcc_reported_undefined(self):
        truth = VaSeries([0.1, 0.2, 0.3], [0.5, 0.5, 0.5])
        pred = VaSeries([0.1, 0.2, 0.3], [0.2, 0.4, 0.6])
        report = evaluate(truth, pred)
        assert report.arousal.pcc is None
        assert report.valence.pcc == pytest.approx(1.0, abs=1e-12)
        assert "undefined" in report_csv(report)

    def test_length_mismatch(self):
        with pytest.raises(ValidationError):
            evaluate(VaSeries([0.1], [0.1]), VaSeries([0.1, 0.2], [0.1, 0.2]))

    def test_table_layout(self, rng):
        s = VaSeries(rng.uniform(-1, 1, 10), rng.uniform(-1, 1, 10))
        table = report_table(evaluate(s, s), label="ridge")
        lines = table.splitlines()
        assert "Arousal" in lines[0] and "Valence" in lines[0]
        assert lines[1].count("RMSE") == 2
        assert lines[2].startswith("ridge")

    def test_random_series_match_oracles(self, rng):
        for _ in range(50):
            n = int(rng.integers(2, 60))
            tv, ta = rng.uniform(-1, 1, size=(2, n))
            pv, pa = rng.uniform(-1, 1, size=(2, n))
            report = evaluate(VaSeries(tv, ta), VaSeries(pv, pa))
            assert report.arousal.rmse == pytest.approx(oracle_rmse(ta, pa), abs=1e-12)
            assert report.valence.rmse == pytest.approx(oracle_rmse(tv, pv), abs=1e-12)
            assert report.arousal.pcc == pytest.approx(oracle_pcc(list(ta), list(pa)), abs=1e-12)
            assert report.valence.sagr == pytest.approx(oracle_sagr(list(tv), list(pv)), abs=1e-12)


@settings(max_examples=80, deadline=None)
@given(
    st.lists(
        st.floats(min_value=-1.0, max_value=1.0, allow_nan=False), min_size=1, max_size=30
    )
)
def test_rmse_zero_iff_identical(values):
    arr = np.asarray(values)
    assert rmse(arr, arr) == 0.0
    shifted = np.clip(arr + 0.25, -1.0, 1.0)
    if not np.array_equal(arr, shifted):
        assert rmse(arr, shifted) > 0.0
