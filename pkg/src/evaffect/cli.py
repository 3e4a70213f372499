"""Command-line front end: one subcommand per pipeline stage.

Every subcommand is a thin shell over one library operation with file-based
interchange. Data goes to ``--out`` (or stdout), diagnostics go to stderr,
and exit codes are 0 (success), 1 (validation/usage error), 2 (I/O or file
format error). Outputs embed no timestamps, so re-running a command on
identical inputs produces identical bytes.
"""

from __future__ import annotations

import argparse
import sys
from collections import defaultdict
from pathlib import Path

from . import affect, labeling, metrics, plots, ridge, tbr
from .errors import FormatError, ValidationError
from .events import SensorGeometry, read_events, write_events
from .frames import load_frame_dir
from .simulate import DEFAULT_EPSILON, DEFAULT_THETA, SimulatorConfig, simulate


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


def _parse_grid(text: str) -> tuple[int, int]:
    parts = text.lower().split("x")
    try:
        gh, gw = int(parts[0]), int(parts[1])
    except (ValueError, IndexError):
        raise ValidationError(f"grid must look like GHxGW, got {text!r}") from None
    return gh, gw


def _emit(data: bytes, out: str | None):
    if out is not None:
        Path(out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)


def _load_events(path: str, format: str, geometry: str | None):
    geo = SensorGeometry.parse(geometry) if geometry else None
    return read_events(path, format=format, geometry=geo)


def _cmd_simulate(args) -> int:
    frames = load_frame_dir(
        args.input, period_us=args.period_us, fps=args.fps, manifest=args.manifest
    )
    config = SimulatorConfig(
        theta=args.theta, upsample_factor=args.upsample, epsilon=args.epsilon
    )
    stream = simulate(frames, config, workers=args.workers)
    print(
        f"simulated {len(stream)} events from {len(frames)} frames "
        f"({frames.geometry})",
        file=sys.stderr,
    )
    _emit(write_events(stream, format=args.format), args.out)
    return 0


def _cmd_encode(args) -> int:
    stream = _load_events(args.input, args.format, args.geometry)
    config = tbr.TbrConfig(
        delta_t_us=args.delta_t_us, bits=args.bits, origin_us=args.origin_us
    )
    tensors = tbr.encode(stream, config)
    pad = tbr.padded_slices(tensors, stream)
    note = f", final frame zero-padded by {pad} interval(s)" if pad else ""
    print(f"encoded {len(tensors)} TBR frame(s) at {args.bits} bits{note}", file=sys.stderr)
    _emit(tbr.write_tensors(tensors), args.out)
    return 0


def _cmd_align(args) -> int:
    tensors = tbr.read_tensors(args.tensors)
    stream = _load_events(args.events, args.format, args.geometry)
    track = labeling.read_annotations(args.annotations, frame_period_us=args.period_us)
    labeled = labeling.align(track, tensors, stream)
    _emit(labeling.write_labeled(labeled), args.out)
    return 0


def _cmd_fit(args) -> int:
    if len(args.tensors) != len(args.labeled):
        raise ValidationError(
            f"{len(args.tensors)} --tensors but {len(args.labeled)} --labeled"
        )
    tensor_sets = [tbr.read_tensors(p) for p in args.tensors]
    labeled_sets = [labeling.read_labeled(p) for p in args.labeled]
    grid = _parse_grid(args.grid)
    x, y, bits = ridge.design_matrix(tensor_sets, labeled_sets, grid)
    model = ridge.fit(x, y, args.lam, grid, bits)
    print(f"fitted ridge model on {x.shape[0]} frames, grid {args.grid}", file=sys.stderr)
    _emit(ridge.write_model(model), args.out)
    return 0


def _cmd_predict(args) -> int:
    model = ridge.read_model(args.model)
    tensors = tbr.read_tensors(args.input)
    series = ridge.predict_series(model, tensors)
    indices = list(range(len(tensors)))
    stamps = [frame.t_start_us for frame in tensors.frames]
    _emit(affect.write_predictions(indices, stamps, series), args.out)
    return 0


def _cmd_eval(args) -> int:
    _, _, truth = affect.read_predictions(args.truth)
    _, _, pred = affect.read_predictions(args.pred)
    report = metrics.evaluate(truth, pred)
    print(metrics.report_table(report, label=args.label), file=sys.stderr, end="")
    _emit(metrics.report_csv(report).encode("utf-8"), args.out)
    return 0


def _cmd_templates(args) -> int:
    rows = affect.read_emotion_frames(args.input)
    by_label = defaultdict(list)
    for label, pair in rows:
        by_label[label].append(pair)
    labeled = [
        (label, affect.VaSeries.from_pairs(pairs)) for label, pairs in by_label.items()
    ]
    templates = affect.build_templates(labeled)
    _emit(affect.write_templates(templates), args.out)
    return 0


def _cmd_classify(args) -> int:
    _, _, series = affect.read_predictions(args.pred)
    templates = affect.read_templates(args.templates)
    rep = affect.select_representative(series)
    label = affect.classify(series, templates)
    print(
        f"representative frame {rep.index} at VA "
        f"({rep.va.valence:.4f}, {rep.va.arousal:.4f})",
        file=sys.stderr,
    )
    _emit((label.value + "\n").encode("utf-8"), args.out)
    return 0


def _cmd_plot(args) -> int:
    _, _, pred = affect.read_predictions(args.pred)
    truth = None
    if args.truth is not None:
        _, _, truth = affect.read_predictions(args.truth)
    if args.style == "timeline":
        svg = plots.timeline_svg(pred, truth)
    else:
        svg = plots.wheel_svg(pred, truth)
    _emit(svg.encode("utf-8"), args.out)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(
        prog="evaffect",
        description=(
            "Event-stream simulation, temporal binary encoding, and "
            "valence-arousal estimation pipeline."
        ),
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
        return p

    p = add("simulate", _cmd_simulate, "convert a PGM frame directory into events")
    p.add_argument("--in", dest="input", required=True, metavar="DIR",
                   help="directory of P5 PGM frames in lexicographic order")
    p.add_argument("--period-us", type=int, help="frame period in microseconds")
    p.add_argument("--fps", type=float, help="frame rate (alternative to --period-us)")
    p.add_argument("--manifest", metavar="CSV", help="filename,timestamp_us manifest")
    p.add_argument("--theta", type=float, default=DEFAULT_THETA,
                   help="contrast threshold in log-intensity units")
    p.add_argument("--upsample", type=int, default=1,
                   help="temporal upsampling factor K")
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON,
                   help="log-intensity stabilizer")
    p.add_argument("--workers", type=int, default=1, help="row bands to process in parallel")
    p.add_argument("--format", choices=["binary", "csv"], default="binary",
                   help="output event format")

    p = add("encode", _cmd_encode, "encode an event stream into TBR tensors")
    p.add_argument("--in", dest="input", required=True, metavar="EVENTS")
    p.add_argument("--format", choices=["binary", "csv"], default="binary",
                   help="input event format")
    p.add_argument("--geometry", metavar="WxH", help="sensor geometry (csv input only)")
    p.add_argument("--bits", type=int, default=tbr.DEFAULT_BITS,
                   help="binary slices per frame, 1..16")
    p.add_argument("--delta-t-us", type=int, default=tbr.DEFAULT_DELTA_T_US,
                   help="accumulation interval in microseconds")
    p.add_argument("--origin-us", type=int, help="override the first interval start")

    p = add("align", _cmd_align, "label TBR frames from a per-frame annotation CSV")
    p.add_argument("--tensors", required=True, metavar="TBR")
    p.add_argument("--events", required=True, metavar="EVENTS")
    p.add_argument("--format", choices=["binary", "csv"], default="binary",
                   help="event file format")
    p.add_argument("--geometry", metavar="WxH", help="sensor geometry (csv events only)")
    p.add_argument("--annotations", required=True, metavar="CSV")
    p.add_argument("--period-us", type=int,
                   help="synthesize timestamps as frame_index * period")

    p = add("fit", _cmd_fit, "fit the ridge baseline on labeled TBR frames")
    p.add_argument("--tensors", action="append", required=True, metavar="TBR")
    p.add_argument("--labeled", action="append", required=True, metavar="CSV")
    p.add_argument("--lambda", dest="lam", type=float, default=ridge.DEFAULT_LAMBDA,
                   help="ridge regularization strength")
    p.add_argument("--grid", default="16x16", metavar="GHxGW",
                   help="feature pooling grid")

    p = add("predict", _cmd_predict, "predict valence/arousal for TBR frames")
    p.add_argument("--model", required=True, metavar="CSV")
    p.add_argument("--in", dest="input", required=True, metavar="TBR")

    p = add("eval", _cmd_eval, "score predictions against ground truth")
    p.add_argument("--truth", required=True, metavar="CSV")
    p.add_argument("--pred", required=True, metavar="CSV")
    p.add_argument("--label", default="model", help="row label for the text table")

    p = add("templates", _cmd_templates, "build emotion templates from labeled frames")
    p.add_argument("--in", dest="input", required=True, metavar="CSV",
                   help="emotion,valence,arousal rows, one per frame")

    p = add("classify", _cmd_classify, "zero-shot emotion label for a VA series")
    p.add_argument("--pred", required=True, metavar="CSV")
    p.add_argument("--templates", required=True, metavar="CSV")

    p = add("plot", _cmd_plot, "emit an SVG timeline or VA wheel")
    p.add_argument("--pred", required=True, metavar="CSV")
    p.add_argument("--truth", metavar="CSV")
    p.add_argument("--style", choices=["timeline", "wheel"], default="timeline")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "func", None) is None:
            parser.print_usage(sys.stderr)
            print("evaffect: error: a subcommand is required", file=sys.stderr)
            return 1
        return args.func(args)
    except _UsageError as exc:
        print(f"evaffect: error: {exc}", file=sys.stderr)
        return 1
    except ValidationError as exc:
        print(f"evaffect: validation error: {exc}", file=sys.stderr)
        return 1
    except FormatError as exc:
        print(f"evaffect: format error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"evaffect: i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
