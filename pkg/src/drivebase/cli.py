"""Command-line front end.

Usage:
    drivebase simulate --participants 16 --seed 1 --effect VS:-0.2,HR:+10 --out panel/
    drivebase align --baseline P1_DS4.csv --session P1_DS1.csv --channel VS --out path.csv
    drivebase distances --baseline P1_DS4.csv --session P1_DS1.csv --all --out dist.json
    drivebase analyze --panel panel/ --design distances --test wilcoxon --out report.json
    drivebase qq --panel panel/ --design means --segment before --channel VS --out qq.csv

Exit status is 0 on success, 1 for usage errors and 2 for invalid data.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from .analysis import (
    DEFAULT_BAND_S,
    SEGMENTS,
    default_align_config,
    distance_reports,
    means_pairs,
    segment_distances,
)
from .dtw import AlignConfig, StepPattern, align, warp_to_reference
from .io import DEFAULT_LIMITS, clean_session, load_limits, load_panel, load_session
from .metrics import DEFAULT_WINDOW
from .model import BASELINE, CHANNELS, DISTRACTIONS
from .report import analyze_panel, render_tables, version_stamp
from .simgen import DistractionEffect, SessionLayout, generate_panel, write_panel
from .stats import qq_points

log = logging.getLogger("drivebase")

SEGMENT_NAMES = {"before": "b", "during": "d", "after": "a"}
_EFFECT_KEYS = {
    "VS": "speed_shift",
    "HR": "hr_shift",
    "Steering": "steering_noise_multiplier",
    "ramp": "onset_ramp",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def parse_effect(text: str) -> DistractionEffect:
    """``VS:-0.2,HR:+10`` -> DistractionEffect(speed_shift=-0.2, hr_shift=10)."""
    kwargs = {}
    for item in filter(None, (p.strip() for p in text.split(","))):
        key, sep, value = item.partition(":")
        if not sep or key not in _EFFECT_KEYS:
            raise UsageError(f"bad effect term {item!r}; use KEY:VALUE with KEY in {sorted(_EFFECT_KEYS)}")
        try:
            kwargs[_EFFECT_KEYS[key]] = float(value)
        except ValueError:
            raise UsageError(f"bad effect value in {item!r}") from None
    return DistractionEffect(**kwargs)


def _band(text: str):
    if text in ("none", "off"):
        return None
    if text == "auto":
        return "auto"
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("band must be an integer radius in samples, 'auto' or 'none'")
    if value < 0:
        raise argparse.ArgumentTypeError("band must be non-negative")
    return value


def _align_config(args, query, reference) -> AlignConfig:
    if args.band == "auto":
        cfg = default_align_config(query, reference, DEFAULT_BAND_S)
        return AlignConfig(args.step, cfg.band_radius)
    return AlignConfig(args.step, args.band)


def _add_align_options(p):
    p.add_argument("--band", type=_band, default="auto",
                   help=f"Sakoe-Chiba radius in samples, 'none', or 'auto' ({DEFAULT_BAND_S:g} s; default)")
    p.add_argument("--step", choices=[s.value for s in StepPattern], default=StepPattern.SYMMETRIC_UNIFORM.value)


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _companion(out: Path, suffix: str) -> Path:
    return out.with_name(f"{out.stem}_{suffix}")


def _load_for_analysis(path, args):
    session = load_session(path)
    if not getattr(args, "no_clean", False):
        limits = load_limits(args.limits) if getattr(args, "limits", None) else DEFAULT_LIMITS
        session = clean_session(session, limits)
    return session


def _load_panel(args):
    if args.no_clean:
        return load_panel(args.panel)
    return load_panel(args.panel, load_limits(args.limits) if args.limits else DEFAULT_LIMITS)


def cmd_simulate(args) -> int:
    effect = parse_effect(args.effect) if args.effect else DistractionEffect()
    layout = SessionLayout(args.before, args.during, args.after, args.rate)
    synthetic = generate_panel(args.participants, {d: effect for d in DISTRACTIONS}, args.seed, layout)
    manifest = write_panel(synthetic, args.out)
    print(f"wrote {len(synthetic.panel)} sessions to {args.out} ({manifest.name})")
    return 0


def cmd_align(args) -> int:
    baseline = _load_for_analysis(args.baseline, args)
    session = _load_for_analysis(args.session, args)
    q, r = session[args.channel], baseline[args.channel]
    alignment = align(q, r, _align_config(args, q, r))
    warped = warp_to_reference(q, r, alignment)
    out = Path(args.out)
    _write_csv(out, ["query_index", "reference_index"], alignment.pairs())
    _write_csv(_companion(out, "warped.csv"), ["t", args.channel],
               zip(warped.times.tolist(), warped.values.tolist()))
    print(f"dtw distance {alignment.distance!r} over {len(alignment)} pairs")
    return 0


def cmd_distances(args) -> int:
    baseline = _load_for_analysis(args.baseline, args)
    session = _load_for_analysis(args.session, args)
    if baseline.session_type is not BASELINE:
        raise ValueError(f"{args.baseline}: baseline must be a DS4 session")
    if args.all:
        channels = [c for c in CHANNELS if c in session and c in baseline]
        channels += sorted(c for c in session.channels if c in baseline and c not in CHANNELS)
    else:
        channels = [args.channel]
    out = Path(args.out)
    reports = []
    for ch in channels:
        cfg = _align_config(args, session[ch], baseline[ch])
        rep = segment_distances(session, baseline, ch, args.window, cfg, include_features=args.features)
        reports.append(rep.to_dict())
        for code, name in zip(SEGMENTS, SEGMENT_NAMES):
            _write_csv(_companion(out, f"{ch}_{name}.csv"), ["i", "s_i"], rep.fine[code].to_rows())
    doc = {"version": version_stamp(), "reports": reports}
    out.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {len(reports)} segment distance reports to {out}")
    return 0


def cmd_analyze(args) -> int:
    panel = _load_panel(args)
    designs = ("means", "distances") if args.design == "both" else (args.design,)
    config = None if args.band == "auto" else AlignConfig(args.step, args.band)
    report = analyze_panel(panel, designs, args.test, args.window, config,
                           step_pattern=args.step, allow_partial=args.allow_partial)
    out = Path(args.out)
    out.write_text(report.to_json(), encoding="utf-8")
    for name, text in render_tables(report).items():
        _companion(out, f"{name}.csv").write_text(text, encoding="utf-8")
    print(f"wrote {out} and {len(render_tables(report))} tables")
    return 0


def cmd_qq(args) -> int:
    panel = _load_panel(args)
    code = SEGMENT_NAMES[args.segment]
    if args.design == "means":
        if code == "a":
            raise UsageError("the means design compares before/during only")
        _, before, during = means_pairs(panel, args.distraction, args.channel)
        sample = before if code == "b" else during
    else:
        reports = distance_reports(panel, args.distraction, args.channel, args.window)
        sample = [r.coarse[code] for r in reports]
    qq = qq_points(sample)
    _write_csv(Path(args.out), ["theoretical", "empirical"], qq.points())
    print(f"r = {qq.r!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="drivebase", description="Baseline-referenced driver distraction analysis.")
    parser.add_argument("--version", action="version", version=version_stamp())
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="write a synthetic panel")
    p.add_argument("--participants", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--effect", default="", help="e.g. VS:-0.2,HR:+10,Steering:1.5,ramp:2")
    p.add_argument("--before", type=float, default=SessionLayout.before_s)
    p.add_argument("--during", type=float, default=SessionLayout.during_s)
    p.add_argument("--after", type=float, default=SessionLayout.after_s)
    p.add_argument("--rate", type=float, default=SessionLayout.rate_hz)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    for name, func, helptext in (
        ("align", cmd_align, "align one channel of a session to its baseline"),
        ("distances", cmd_distances, "segment distances of a session from its baseline"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--baseline", required=True)
        p.add_argument("--session", required=True)
        if name == "align":
            p.add_argument("--channel", required=True)
        else:
            g = p.add_mutually_exclusive_group(required=True)
            g.add_argument("--channel")
            g.add_argument("--all", action="store_true")
            p.add_argument("--window", type=int, default=DEFAULT_WINDOW)
            p.add_argument("--features", action="store_true", help="also report route-feature distances")
        _add_align_options(p)
        p.add_argument("--limits")
        p.add_argument("--no-clean", action="store_true")
        p.add_argument("--out", required=True)
        p.set_defaults(func=func)

    p = sub.add_parser("analyze", help="paired designs over a whole panel")
    p.add_argument("--panel", required=True)
    p.add_argument("--design", choices=["means", "distances", "both"], default="both")
    p.add_argument("--test", choices=["ttest", "wilcoxon"],
                   help="default: ttest for means, wilcoxon for distances")
    p.add_argument("--window", type=int, default=DEFAULT_WINDOW)
    _add_align_options(p)
    p.add_argument("--allow-partial", action="store_true")
    p.add_argument("--limits")
    p.add_argument("--no-clean", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("qq", help="normal QQ points for a per-participant sample")
    p.add_argument("--panel", required=True)
    p.add_argument("--design", choices=["means", "distances"], default="means")
    p.add_argument("--segment", choices=list(SEGMENT_NAMES), default="before")
    p.add_argument("--channel", required=True)
    p.add_argument("--distraction", choices=[d.value for d in DISTRACTIONS], default="DS1")
    p.add_argument("--window", type=int, default=DEFAULT_WINDOW)
    p.add_argument("--limits")
    p.add_argument("--no-clean", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_qq)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"drivebase: error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"drivebase: {msg}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
