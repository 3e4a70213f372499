import subprocess
import sys
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from evaffect import affect, labeling, metrics, ridge, tbr
from evaffect.cli import main
from evaffect.events import read_events, write_events
from evaffect.frames import write_pgm

N_FRAMES = 17
PERIOD_US = 5000


@pytest.fixture
def frame_dir(tmp_path):
    """Blinking-block clip: an 8x8 block toggling between two intensities."""
    rng = np.random.default_rng(42)
    directory = tmp_path / "frames"
    directory.mkdir()
    base = rng.uniform(40, 200, size=(16, 16))
    for i in range(N_FRAMES):
        plane = base.copy()
        if i % 2:
            plane[4:12, 4:12] = 220.0
        else:
            plane[4:12, 4:12] = 40.0
        (directory / f"frame_{i:04d}.pgm").write_bytes(write_pgm(plane))
    return directory


@pytest.fixture
def pipeline_files(tmp_path, frame_dir):
    """Run simulate/encode/align once; return the produced paths."""
    evt = tmp_path / "clip.evt"
    assert main([
        "simulate", "--in", str(frame_dir), "--period-us", str(PERIOD_US),
        "--theta", "0.2", "--out", str(evt),
    ]) == 0
    tbr_path = tmp_path / "clip.tbr"
    assert main([
        "encode", "--in", str(evt), "--bits", "8", "--delta-t-us", "5000",
        "--out", str(tbr_path),
    ]) == 0
    ann = tmp_path / "annotations.csv"
    lines = ["frame_index,timestamp_us,valence,arousal"]
    for i in range(N_FRAMES):
        lines.append(f"{i},{i * PERIOD_US},{(i % 5) - 2},{2 - (i % 4)}")
    ann.write_text("\n".join(lines) + "\n")
    labeled = tmp_path / "labeled.csv"
    assert main([
        "align", "--tensors", str(tbr_path), "--events", str(evt),
        "--annotations", str(ann), "--out", str(labeled),
    ]) == 0
    return {"evt": evt, "tbr": tbr_path, "ann": ann, "labeled": labeled}


class TestSimulateEncode:
    def test_simulate_matches_library(self, tmp_path, frame_dir):
        from evaffect.frames import load_frame_dir
        from evaffect.simulate import SimulatorConfig, simulate

        out = tmp_path / "cli.evt"
        assert main([
            "simulate", "--in", str(frame_dir), "--period-us", str(PERIOD_US),
            "--theta", "0.2", "--out", str(out),
        ]) == 0
        frames = load_frame_dir(frame_dir, period_us=PERIOD_US)
        want = write_events(simulate(frames, SimulatorConfig(theta=0.2)))
        assert out.read_bytes() == want
        assert len(read_events(out.read_bytes())) > 0

    def test_encode_deterministic_and_matches_library(self, tmp_path, pipeline_files):
        first = pipeline_files["tbr"].read_bytes()
        again = tmp_path / "again.tbr"
        assert main([
            "encode", "--in", str(pipeline_files["evt"]), "--bits", "8",
            "--delta-t-us", "5000", "--out", str(again),
        ]) == 0
        assert again.read_bytes() == first
        stream = read_events(pipeline_files["evt"])
        want = tbr.write_tensors(tbr.encode(stream, tbr.TbrConfig(5000, 8)))
        assert first == want

    def test_encode_csv_input_needs_geometry(self, tmp_path, pipeline_files):
        csv_events = tmp_path / "clip.csv"
        stream = read_events(pipeline_files["evt"])
        csv_events.write_bytes(write_events(stream, "csv"))
        out = tmp_path / "from_csv.tbr"
        assert main([
            "encode", "--in", str(csv_events), "--format", "csv", "--out", str(out),
        ]) == 1
        assert main([
            "encode", "--in", str(csv_events), "--format", "csv",
            "--geometry", "16x16", "--out", str(out),
        ]) == 0
        assert out.read_bytes() == pipeline_files["tbr"].read_bytes()

    def test_padding_flagged_on_stderr(self, tmp_path, pipeline_files, capsys):
        # delta_t 6000 does not divide the ~80 ms clip: the tail is padded
        assert main([
            "encode", "--in", str(pipeline_files["evt"]), "--bits", "8",
            "--delta-t-us", "6000", "--out", str(tmp_path / "x.tbr"),
        ]) == 0
        err = capsys.readouterr().err
        assert "zero-padded" in err


class TestAlignFitPredictEval:
    def test_align_matches_library(self, pipeline_files):
        stream = read_events(pipeline_files["evt"])
        tensors = tbr.read_tensors(pipeline_files["tbr"])
        track = labeling.read_annotations(pipeline_files["ann"])
        want = labeling.write_labeled(labeling.align(track, tensors, stream))
        assert pipeline_files["labeled"].read_bytes() == want

    def test_fit_predict_eval_pipeline(self, tmp_path, pipeline_files, capsys):
        model_path = tmp_path / "model.csv"
        assert main([
            "fit", "--tensors", str(pipeline_files["tbr"]),
            "--labeled", str(pipeline_files["labeled"]),
            "--lambda", "0.5", "--grid", "4x4", "--out", str(model_path),
        ]) == 0
        tensors = tbr.read_tensors(pipeline_files["tbr"])
        labeled = labeling.read_labeled(pipeline_files["labeled"])
        x, y, bits = ridge.design_matrix([tensors], [labeled], (4, 4))
        want_model = ridge.write_model(ridge.fit(x, y, 0.5, (4, 4), bits))
        assert model_path.read_bytes() == want_model

        pred_path = tmp_path / "pred.csv"
        assert main([
            "predict", "--model", str(model_path), "--in", str(pipeline_files["tbr"]),
            "--out", str(pred_path),
        ]) == 0
        model = ridge.read_model(model_path)
        series = ridge.predict_series(model, tensors)
        stamps = [f.t_start_us for f in tensors.frames]
        want_pred = affect.write_predictions(list(range(len(tensors))), stamps, series)
        assert pred_path.read_bytes() == want_pred

        out_csv = tmp_path / "scores.csv"
        capsys.readouterr()
        assert main([
            "eval", "--truth", str(pred_path), "--pred", str(pred_path),
            "--out", str(out_csv), "--label", "ridge",
        ]) == 0
        err = capsys.readouterr().err
        assert "Arousal" in err and "Valence" in err and "ridge" in err
        _, _, s = affect.read_predictions(pred_path)
        assert out_csv.read_text() == metrics.report_csv(metrics.evaluate(s, s))

    def test_align_with_period_synthesized_timestamps(self, tmp_path, pipeline_files):
        ann = tmp_path / "short.csv"
        rows = ["frame_index,valence,arousal"]
        for i in range(N_FRAMES):
            rows.append(f"{i},{(i % 3) - 1},0.5")
        ann.write_text("\n".join(rows) + "\n")
        out = tmp_path / "lab2.csv"
        assert main([
            "align", "--tensors", str(pipeline_files["tbr"]),
            "--events", str(pipeline_files["evt"]), "--annotations", str(ann),
            "--period-us", str(PERIOD_US), "--out", str(out),
        ]) == 0
        assert len(labeling.read_labeled(out)) > 0


class TestTemplatesClassify:
    @pytest.fixture
    def template_csv(self, tmp_path):
        rows = ["emotion,valence,arousal"]
        pts = [(0.7, 0.0), (0.44, 0.55), (-0.16, 0.68), (-0.63, 0.3),
               (-0.63, -0.3), (-0.16, -0.68), (0.44, -0.55)]
        for label, (v, a) in zip(affect.EmotionLabel, pts):
            for _ in range(3):
                rows.append(f"{label.value},{v},{a}")
        path = tmp_path / "frames_by_emotion.csv"
        path.write_text("\n".join(rows) + "\n")
        return path

    def test_templates_matches_library(self, tmp_path, template_csv):
        out = tmp_path / "templates.csv"
        assert main(["templates", "--in", str(template_csv), "--out", str(out)]) == 0
        rows = affect.read_emotion_frames(template_csv)
        grouped = {}
        for label, pair in rows:
            grouped.setdefault(label, []).append(pair)
        want = affect.write_templates(
            affect.build_templates(
                [(lab, affect.VaSeries.from_pairs(p)) for lab, p in grouped.items()]
            )
        )
        assert out.read_bytes() == want

    def test_classify_prints_label(self, tmp_path, template_csv, capsys):
        templates_path = tmp_path / "templates.csv"
        assert main(["templates", "--in", str(template_csv), "--out", str(templates_path)]) == 0
        pred = tmp_path / "pred.csv"
        lines = ["frame_index,timestamp_us,valence,arousal"]
        for i in range(5):
            lines.append(f"{i},{i * 1000},0.01,0.0")
        lines.append("5,5000,0.68,0.05")  # excursion near the Disgust template
        pred.write_text("\n".join(lines) + "\n")
        out = tmp_path / "label.txt"
        assert main([
            "classify", "--pred", str(pred), "--templates", str(templates_path),
            "--out", str(out),
        ]) == 0
        assert out.read_text() == "Disgust\n"
        assert "representative frame 5" in capsys.readouterr().err


class TestPlot:
    @pytest.fixture
    def pred_csv(self, tmp_path):
        path = tmp_path / "pred.csv"
        lines = ["frame_index,timestamp_us,valence,arousal"]
        vals = [(1.0, 0.0), (0.5, -0.5), (-0.25, 0.75)]
        for i, (v, a) in enumerate(vals):
            lines.append(f"{i},{i * 1000},{v},{a}")
        path.write_text("\n".join(lines) + "\n")
        return path

    def test_timeline_is_valid_svg(self, tmp_path, pred_csv):
        out = tmp_path / "va.svg"
        assert main(["plot", "--pred", str(pred_csv), "--out", str(out)]) == 0
        root = ET.fromstring(out.read_text())
        assert root.tag.endswith("svg")
        polylines = [el for el in root.iter() if el.tag.endswith("polyline")]
        assert len(polylines) == 2  # valence + arousal

    def test_timeline_with_truth_overlays(self, tmp_path, pred_csv):
        out = tmp_path / "va.svg"
        assert main([
            "plot", "--pred", str(pred_csv), "--truth", str(pred_csv), "--out", str(out),
        ]) == 0
        root = ET.fromstring(out.read_text())
        polylines = [el for el in root.iter() if el.tag.endswith("polyline")]
        assert len(polylines) == 4

    def test_wheel_places_max_valence_rightmost(self, tmp_path, pred_csv):
        out = tmp_path / "wheel.svg"
        assert main([
            "plot", "--pred", str(pred_csv), "--style", "wheel", "--out", str(out),
        ]) == 0
        root = ET.fromstring(out.read_text())
        circles = [el for el in root.iter() if el.tag.endswith("circle")]
        # rim + 3 points; point (1, 0) sits at the circle's rightmost position
        rim = circles[0]
        cx, cy, r = (float(rim.get(k)) for k in ("cx", "cy", "r"))
        points = [(float(c.get("cx")), float(c.get("cy"))) for c in circles[1:]]
        assert (pytest.approx(cx + r), pytest.approx(cy)) in [
            (pytest.approx(px), pytest.approx(py)) for px, py in points
        ]

    def test_plot_rerun_identical(self, tmp_path, pred_csv):
        a, b = tmp_path / "a.svg", tmp_path / "b.svg"
        assert main(["plot", "--pred", str(pred_csv), "--out", str(a)]) == 0
        assert main(["plot", "--pred", str(pred_csv), "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_empty_prediction_rejected(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text("frame_index,timestamp_us,valence,arousal\n")
        assert main(["plot", "--pred", str(empty), "--out", str(tmp_path / "x.svg")]) == 1

    def test_out_of_range_rejected(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("frame_index,timestamp_us,valence,arousal\n0,0,1.5,0\n")
        assert main(["plot", "--pred", str(bad), "--out", str(tmp_path / "x.svg")]) == 1


class TestExitCodes:
    def test_unknown_subcommand(self, capsys):
        assert main(["frobnicate"]) == 1
        assert "usage" in capsys.readouterr().err

    def test_unknown_flag(self, capsys):
        assert main(["encode", "--wat"]) == 1

    def test_no_subcommand(self, capsys):
        assert main([]) == 1

    def test_missing_file_is_io_error(self, tmp_path):
        assert main(["encode", "--in", str(tmp_path / "nope.evt")]) == 2

    def test_malformed_file_is_format_error(self, tmp_path):
        bad = tmp_path / "bad.evt"
        bad.write_bytes(b"JUNKJUNKJUNKJUNKJUNK")
        assert main(["encode", "--in", str(bad)]) == 2

    def test_validation_error_is_exit_one(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("t_us,x,y,polarity\n5,99,0,1\n")
        assert main([
            "encode", "--in", str(bad), "--format", "csv", "--geometry", "4x4",
        ]) == 1


def test_stdout_output_via_subprocess(tmp_path, frame_dir):
    evt = tmp_path / "clip.evt"
    assert main([
        "simulate", "--in", str(frame_dir), "--period-us", str(PERIOD_US),
        "--out", str(evt),
    ]) == 0
    proc = subprocess.run(
        [sys.executable, "-m", "evaffect.cli", "encode", "--in", str(evt)],
        capture_output=True,
    )
    assert proc.returncode == 0
    want = tbr.write_tensors(tbr.encode(read_events(evt), tbr.TbrConfig()))
    assert proc.stdout == want
    assert b"encoded" in proc.stderr
