"""Command-line front end.

Every run writes into a fresh ``<out>/<command>-<n>`` directory (``n`` counts
up from 1) together with ``manifest.json``. Nothing time-dependent is written,
so two identical runs produce byte-identical files, and
``indoorprop replay <manifest>`` re-executes a run from its manifest.

Exit codes: 0 success, 1 failed verification, 2 bad input (missing or invalid
scene, malformed flags), 3 tracing failure (for example tx equals rx, a point
outside the scene, or no propagation path).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import re
import sys
from importlib import resources
from pathlib import Path

from . import __version__
from .channel import ChannelError, build_cir, build_pdp, build_tdl, verify_toa
from .coverage import DEFAULT_THRESHOLD_DB, CoverageError, GridSpec, detect_holes, optimize_tx, sweep
from .exports import candidates_csv, holes_csv, map_csv, paths_csv, pdp_csv, pgm_bytes, tdl_csv
from .scene import Point3
from .scene_format import SceneParseError, parse_scene
from .tracer import TraceConfig, TraceError, trace

BUNDLED_SCENE = "ece_floor.scn"
# Narrowband measurement bandwidth of the reference setup; recorded, not used.
BANDWIDTH_HZ = 10e3


class InputError(Exception):
    """Bad user input, reported with exit code 2."""


def bundled_scene_path() -> Path:
    return Path(str(resources.files("indoorprop") / "data" / BUNDLED_SCENE))


def _resolve_scene(arg):
    if arg is None:
        return bundled_scene_path()
    path = Path(arg)
    if not path.exists():
        fallback = Path(str(resources.files("indoorprop") / "data")) / path.name
        if path.parent == Path(".") and fallback.exists():
            return fallback
        raise InputError(f"scene file not found: {arg}")
    return path


def _load_scene(arg):
    path = _resolve_scene(arg)
    data = path.read_bytes()
    try:
        scene = parse_scene(data)
    except SceneParseError as e:
        raise InputError(f"{arg or path}: {e}") from None
    return scene, hashlib.sha256(data).hexdigest()


def _point(scene, text, kind):
    parts = text.split(",")
    if len(parts) == 3:
        try:
            return Point3(*(float(p) for p in parts))
        except ValueError:
            pass
    named = dict(scene.tx_points + scene.rx_points)
    if text in named:
        return named[text]
    raise InputError(f"--{kind}: expected x,y,z or a point name from the scene, got {text!r}")


def _region(text):
    try:
        x0, y0, x1, y1 = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x0,y0,x1,y1, got {text!r}") from None
    return ((x0, y0), (x1, y1))


def _config(args) -> TraceConfig:
    try:
        return TraceConfig(args.max_order, args.max_paths, args.freq, args.min_gain_db)
    except ValueError as e:
        raise InputError(str(e)) from None


def _next_run_dir(out: Path, command: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    pat = re.compile(rf"{re.escape(command)}-(\d+)\Z")
    used = [int(m.group(1)) for p in out.iterdir() if (m := pat.match(p.name))]
    run = out / f"{command}-{max(used, default=0) + 1}"
    run.mkdir()
    return run


class _Run:
    """Collects output files, then writes them and the manifest."""

    def __init__(self, args, argv, scene_hash):
        self.args = args
        self.argv = argv
        self.scene_hash = scene_hash
        self.files: dict[str, bytes] = {}

    def add(self, name, content):
        self.files[name] = content.encode("utf-8") if isinstance(content, str) else content

    def write(self) -> Path:
        run = _next_run_dir(Path(self.args.out), self.args.command)
        for name, data in self.files.items():
            (run / name).write_bytes(data)
        params = {k: v for k, v in sorted(vars(self.args).items()) if k not in ("out", "func", "loaded")}
        manifest = {
            "tool": "indoorprop",
            "version": __version__,
            "command": self.args.command,
            "scene": self.args.scene,
            "scene_sha256": self.scene_hash,
            "parameters": params,
            "bandwidth_hz": BANDWIDTH_HZ,
            "argv": self.argv,
            "outputs": [
                {"file": name, "sha256": hashlib.sha256(data).hexdigest()} for name, data in self.files.items()
            ],
        }
        (run / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return run


def cmd_trace(args, run):
    scene, _ = args.loaded
    paths = trace(scene, _point(scene, args.tx, "tx"), _point(scene, args.rx, "rx"), _config(args))
    run.add("paths.csv", paths_csv(paths))
    print(f"{len(paths)} paths")
    return 0


def cmd_pdp(args, run):
    scene, _ = args.loaded
    config = _config(args)
    paths = trace(scene, _point(scene, args.tx, "tx"), _point(scene, args.rx, "rx"), config)
    cir = build_cir(paths, config.frequency)
    pdp = build_pdp(cir)
    run.add("pdp.csv", pdp_csv(pdp))
    if args.tap_spacing is not None:
        try:
            run.add("tdl.csv", tdl_csv(build_tdl(cir, args.tap_spacing)))
        except ChannelError as e:
            raise InputError(str(e)) from None
    print(f"mean ToA {pdp.mean_toa * 1e9:.2f} ns, rms delay spread {pdp.rms_delay_spread * 1e9:.2f} ns")
    return 0


def short_exp(x: float) -> str:
    """One-decimal mantissa with a bare exponent: ``0.0e0``, ``3.2e-16``."""
    mant, _, exp = format(x, ".1e").partition("e")
    return f"{mant}e{int(exp)}"


def cmd_verify(args, run):
    scene, _ = args.loaded
    rep = verify_toa(scene, _point(scene, args.tx, "tx"), _point(scene, args.rx, "rx"), _config(args))
    line = (
        f"{rep.geometric_distance_m:.6f} m / {rep.first_arrival_ns:.2f} ns / "
        f"{rep.estimated_distance_m:.6f} m / {short_exp(rep.relative_error)}"
    )
    report = [line, f"los={'yes' if rep.los else 'no'}"]
    print(line)
    code = 0
    if not rep.los:
        msg = "warning: no line-of-sight path; first arrival is a reflected or transmitted path"
        report.append(msg)
        print(msg, file=sys.stderr)
    elif rep.relative_error > 1e-9:
        report.append("FAIL: relative error above 1e-9")
        code = 1
    run.add("verify.txt", "\n".join(report) + "\n")
    return code


def _grid(args):
    return GridSpec(args.grid, args.height, tuple(args.region) if args.region else None)


def cmd_coverage(args, run):
    scene, _ = args.loaded
    try:
        cmap = sweep(scene, _point(scene, args.tx, "tx"), GridSpec(args.grid, args.height), _config(args), args.threshold)
    except CoverageError as e:
        raise InputError(str(e)) from None
    holes = detect_holes(cmap)
    run.add("map.csv", map_csv(cmap))
    run.add("map.pgm", pgm_bytes(cmap))
    run.add("holes.csv", holes_csv(cmap, holes))
    print(f"covered fraction {cmap.covered_fraction:.4f}, {len(holes)} hole regions")
    return 0


def cmd_optimize(args, run):
    scene, _ = args.loaded
    try:
        result = optimize_tx(scene, _grid(args), GridSpec(args.grid, args.height), _config(args), args.threshold)
    except CoverageError as e:
        raise InputError(str(e)) from None
    run.add("candidates.csv", candidates_csv(result))
    x, y, z = result.best_tx
    best = f"{x:.6f},{y:.6f},{z:.6f} covered_fraction={result.covered_fraction:.6f}"
    run.add("best.txt", best + "\n")
    print(f"best tx {best}")
    return 0


def _common(p, need_tx=True, need_rx=True):
    p.add_argument("--scene", help=f"scene file (default: bundled {BUNDLED_SCENE})")
    if need_tx:
        p.add_argument("--tx", required=True, help="transmitter as x,y,z in meters or a named scene point")
    if need_rx:
        p.add_argument("--rx", required=True, help="receiver as x,y,z in meters or a named scene point")
    p.add_argument("--freq", type=float, default=1e9, help="carrier frequency in Hz (default 1e9)")
    p.add_argument("--max-order", type=int, default=3, help="maximum reflection order (default 3)")
    p.add_argument("--max-paths", type=int, default=25, help="paths kept per link (default 25)")
    p.add_argument("--min-gain-db", type=float, default=-250.0, help="drop weaker paths (default -250)")
    p.add_argument("--out", default="out", help="output root directory (default ./out)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="indoorprop", description="Indoor radio-propagation ray tracer.")
    parser.add_argument("--version", action="version", version=f"indoorprop {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("trace", help="path table for one link")
    _common(p)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("pdp", help="power delay profile (and optional tapped delay line)")
    _common(p)
    p.add_argument("--tap-spacing", type=float, default=None, help="TDL tap spacing in seconds")
    p.set_defaults(func=cmd_pdp)

    p = sub.add_parser("verify", help="time-of-arrival check against the straight-line distance")
    _common(p)
    p.set_defaults(func=cmd_verify)

    for name, func, helptext in (
        ("coverage", cmd_coverage, "power map and coverage holes for one transmitter"),
        ("optimize", cmd_optimize, "grid search for the best transmitter cell"),
    ):
        p = sub.add_parser(name, help=helptext)
        _common(p, need_tx=name == "coverage", need_rx=False)
        p.add_argument("--grid", type=float, default=1.0, help="cell size in meters (default 1)")
        p.add_argument("--height", type=float, default=2.0, help="receiver height in meters (default 2)")
        p.add_argument(
            "--threshold", type=float, default=DEFAULT_THRESHOLD_DB, help="hole threshold in dB re transmit power"
        )
        p.set_defaults(func=func)
    sub.choices["optimize"].add_argument(
        "--region", type=_region, action="append", help="limit candidates to x0,y0,x1,y1 (repeatable)"
    )

    p = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    p.add_argument("manifest")
    p.add_argument("--out", default=None, help="output root (default: the manifest's run root)")
    return parser


def _replay(args) -> int:
    try:
        manifest = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
        argv = list(manifest["argv"])
    except (OSError, ValueError, KeyError) as e:
        print(f"error: cannot read manifest: {e}", file=sys.stderr)
        return 2
    out = args.out if args.out is not None else str(Path(args.manifest).resolve().parent.parent)
    return main(argv + ["--out", out])


def _strip_out(argv):
    clean, skip = [], False
    for a in argv:
        if skip:
            skip = False
        elif a == "--out":
            skip = True
        elif not a.startswith("--out="):
            clean.append(a)
    return clean


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    if args.command == "replay":
        return _replay(args)
    try:
        args.loaded = _load_scene(args.scene)
        run = _Run(args, _strip_out(argv), args.loaded[1])
        code = args.func(args, run)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (TraceError, ChannelError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    run.write()
    return code


if __name__ == "__main__":
    sys.exit(main())
