"""Batch command line front end: synth, digitize, evaluate, grid.

Exit codes: 0 all samples ok, 1 some samples failed, 2 usage/config error.
Per-sample failures never abort a batch; they are recorded in the run
manifest with the stage that raised.  ECGD_THREADS caps the worker pool.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .calibrate import DigitalSignal
from .errors import DigitizeError, StageError
from .grid import GridGeometry, detect_lines, estimate_grid, isolate_grid_pixels
from .metrics import EvalReport, aggregate
from .pipeline import MODE_MASK, MODE_RAW, PipelineConfig, digitize, evaluate
from .raster import BinaryMask, RasterImage, read_image, write_png
from .synth import RenderSpec, SignalSpec, gen_signal, inject_overlap, rasterize, vary_signal

GROUP_CLEAN = "no-overlap"
GROUP_OVERLAP = "overlap"

AGGREGATE_COLUMNS = ("mse_mean", "mse_std", "mse_max", "rho_mean", "rho_min", "rho_std")


@dataclass
class SampleRecord:
    id: str
    status: str = "ok"
    group: str | None = None
    stage: str | None = None
    error: str | None = None
    timings_ms: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        return {
            "id": self.id,
            "status": self.status,
            "group": self.group,
            "stage": self.stage,
            "error": self.error,
            "timings_ms": self.timings_ms,
        }


@dataclass
class RunManifest:
    command: str
    config: dict
    samples: list[SampleRecord] = field(default_factory=list)

    def write(self, path: Path) -> None:
        payload = {
            "tool": "ecgd",
            "version": __version__,
            "command": self.command,
            "config": self.config,
            "samples": [s.to_json_dict() for s in sorted(self.samples, key=lambda s: s.id)],
        }
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")

    @property
    def n_failed(self) -> int:
        return sum(1 for s in self.samples if s.status != "ok")


def _worker_count() -> int:
    env = os.environ.get("ECGD_THREADS")
    if env:
        return max(1, int(env))
    return min(os.cpu_count() or 1, 8)


def _write_signal_json(path: Path, sig: DigitalSignal) -> None:
    path.write_text(json.dumps(sig.to_json_dict()) + "\n")


def _read_signal_json(path: Path) -> DigitalSignal:
    return DigitalSignal.from_json_dict(json.loads(path.read_text()))


# ---------------------------------------------------------------- synth


def _synthesize_sample(out: Path, sample_id: str, group: str, seed: int, args) -> dict:
    timings: dict[str, float] = {}
    started = time.perf_counter()
    spec = vary_signal(SignalSpec(duration_s=args.duration, noise_mv=args.noise), seed)
    signal = gen_signal(spec, rate=args.rate)
    render = RenderSpec()
    image, mask, _ = rasterize(signal, render)
    timings["render"] = (time.perf_counter() - started) * 1000.0

    started = time.perf_counter()
    write_png(out / f"{sample_id}.png", image)
    write_png(out / f"{sample_id}.mask.png", mask)
    _write_signal_json(out / f"{sample_id}.json", signal)
    if group == GROUP_OVERLAP:
        other = gen_signal(vary_signal(SignalSpec(duration_s=args.duration, noise_mv=args.noise), seed + 1), rate=args.rate)
        contaminated_img, contaminated_mask = inject_overlap(image, mask, other, render, seed=seed)
        write_png(out / f"{sample_id}.overlap.png", contaminated_img)
        write_png(out / f"{sample_id}.overlap.mask.png", contaminated_mask)
    timings["write"] = (time.perf_counter() - started) * 1000.0
    return timings


def cmd_synth(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(
        command="synth",
        config={
            "n_clean": args.n_clean,
            "n_overlap": args.n_overlap,
            "seed": args.seed,
            "rate": args.rate,
            "duration": args.duration,
            "noise": args.noise,
        },
    )
    plan = [(f"clean_{i:04d}", GROUP_CLEAN, args.seed + 2 * i) for i in range(args.n_clean)]
    plan += [
        (f"overlap_{i:04d}", GROUP_OVERLAP, args.seed + 2 * (args.n_clean + i))
        for i in range(args.n_overlap)
    ]

    def run_one(entry):
        sample_id, group, seed = entry
        record = SampleRecord(id=sample_id, group=group)
        try:
            record.timings_ms = _synthesize_sample(out, sample_id, group, seed, args)
        except OSError as exc:
            record.status, record.stage, record.error = "error", "write", str(exc)
        return record

    with ThreadPoolExecutor(max_workers=_worker_count()) as pool:
        manifest.samples = list(pool.map(run_one, plan))
    manifest.write(out / "manifest.json")
    return 1 if manifest.n_failed else 0


# ---------------------------------------------------------------- digitize


def _collect_inputs(paths: list[str], mode: str, use_overlap: bool) -> list[tuple[str, Path, Path | None]]:
    """(sample id, input path, companion image path or None) triples."""
    files: list[Path] = []
    for raw in paths:
        p = Path(raw)
        if p.is_dir():
            if mode == MODE_MASK:
                suffix = ".overlap.mask.png" if use_overlap else ".mask.png"
                found = sorted(f for f in p.glob(f"*{suffix}") if f.name.endswith(suffix))
                if not use_overlap:
                    found = [f for f in found if not f.name.endswith(".overlap.mask.png")]
            else:
                suffix = ".overlap.png" if use_overlap else ".png"
                found = sorted(
                    f
                    for f in p.glob(f"*{suffix}")
                    if ".mask." not in f.name and f.name.endswith(suffix)
                )
                if not use_overlap:
                    found = [f for f in found if not f.name.endswith(".overlap.png")]
            files += found
        else:
            files.append(p)
    triples = []
    for f in files:
        name = f.name
        for suffix in (".overlap.mask.png", ".overlap.png", ".mask.png", ".png"):
            if name.endswith(suffix):
                stem = name[: -len(suffix)]
                break
        else:
            stem = f.stem
        companion: Path | None = None
        if mode == MODE_MASK:
            cand = f.with_name(f"{stem}.overlap.png") if use_overlap else f.with_name(f"{stem}.png")
            if cand.exists():
                companion = cand
        triples.append((stem, f, companion))
    return triples


def _parse_grid(text: str | None) -> GridGeometry | None:
    if not text:
        return None
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise ValueError("grid must look like WIDTHxHEIGHT, e.g. 40x40")
    width, height = float(parts[0]), float(parts[1])
    return GridGeometry(width, height, square_assumed=width == height)


def _pipeline_config(args, mode: str) -> PipelineConfig:
    return PipelineConfig(
        mode=mode,
        sampling_rate_hz=args.rate,
        hedge_floor=args.hedge_floor,
        hedge_step=args.hedge_step,
        alpha=args.alpha,
        angle_scale=args.angle_scale,
        lag_window=args.lag_window,
        denoise=args.denoise,
        grid_fallback=args.grid_fallback,
        fallback_square_px=args.fallback_square_px,
        grid=_parse_grid(args.grid),
    )


def cmd_digitize(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        config = _pipeline_config(args, args.mode)
        inputs = _collect_inputs(args.inputs, args.mode, args.use_overlap)
    except (ValueError, DigitizeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if not inputs:
        print("error: no input samples found", file=sys.stderr)
        return 2
    manifest = RunManifest(command="digitize", config={**config.to_json_dict(), "use_overlap": args.use_overlap})

    def run_one(entry):
        sample_id, path, companion_path = entry
        record = SampleRecord(id=sample_id)
        stage = "decode"
        try:
            started = time.perf_counter()
            source = read_image(path)
            companion = None
            if isinstance(source, BinaryMask) and args.mode == MODE_RAW:
                raise DigitizeError(f"{path.name} decodes to a mask; use --mode mask")
            if isinstance(source, RasterImage) and args.mode == MODE_MASK:
                raise DigitizeError(f"{path.name} is not a pure black/white mask")
            if companion_path is not None:
                decoded = read_image(companion_path)
                if isinstance(decoded, RasterImage):
                    companion = decoded
            record.timings_ms["decode"] = (time.perf_counter() - started) * 1000.0
            stage = "pipeline"
            started = time.perf_counter()
            signal, diagnostics = digitize(source, config, companion=companion)
            record.timings_ms["pipeline"] = (time.perf_counter() - started) * 1000.0
            started = time.perf_counter()
            _write_signal_json(out / f"{sample_id}.pred.json", signal)
            if args.emit_diagnostics:
                (out / f"{sample_id}.diag.json").write_text(
                    json.dumps(diagnostics.to_json_dict(), sort_keys=True) + "\n"
                )
            record.timings_ms["write"] = (time.perf_counter() - started) * 1000.0
        except StageError as exc:
            record.status, record.stage, record.error = "error", exc.stage, str(exc)
        except (DigitizeError, OSError, ValueError) as exc:
            record.status, record.stage, record.error = "error", stage, str(exc)
        return record

    with ThreadPoolExecutor(max_workers=_worker_count()) as pool:
        manifest.samples = list(pool.map(run_one, inputs))
    manifest.write(out / "manifest.json")
    return 1 if manifest.n_failed else 0


# ---------------------------------------------------------------- evaluate


def _load_groups(ref_dir: Path, manifest_path: str | None) -> dict[str, str]:
    candidates = [Path(manifest_path)] if manifest_path else [ref_dir / "manifest.json"]
    for candidate in candidates:
        if candidate.exists():
            data = json.loads(candidate.read_text())
            return {s["id"]: s.get("group") or "all" for s in data.get("samples", [])}
    return {}


def cmd_evaluate(args) -> int:
    pred_dir, ref_dir = Path(args.pred), Path(args.ref)
    if not pred_dir.is_dir() or not ref_dir.is_dir():
        print("error: --pred and --ref must be directories", file=sys.stderr)
        return 2
    config = PipelineConfig(lag_window=args.lag_window)
    groups = _load_groups(ref_dir, args.manifest)

    pred_files = {p.name[: -len(".pred.json")]: p for p in sorted(pred_dir.glob("*.pred.json"))}
    ref_files = {
        p.name[: -len(".json")]: p
        for p in sorted(ref_dir.glob("*.json"))
        if not p.name.endswith(".pred.json") and p.name != "manifest.json"
    }
    unpaired = sorted(set(pred_files) ^ set(ref_files))
    for sample_id in unpaired:
        print(f"warning: unpaired sample {sample_id!r} excluded", file=sys.stderr)

    rows: list[tuple[str, str, EvalReport]] = []
    failures = 0
    for sample_id in sorted(set(pred_files) & set(ref_files)):
        group = groups.get(sample_id, "all")
        try:
            pred = _read_signal_json(pred_files[sample_id])
            ref = _read_signal_json(ref_files[sample_id])
            pred_mask_path = pred_dir / f"{sample_id}.mask.png"
            ref_mask_path = ref_dir / f"{sample_id}.mask.png"
            masks = {}
            if pred_mask_path.exists() and ref_mask_path.exists():
                pm, rm = read_image(pred_mask_path), read_image(ref_mask_path)
                if isinstance(pm, BinaryMask) and isinstance(rm, BinaryMask):
                    masks = {"pred_mask": pm, "ref_mask": rm}
            rows.append((sample_id, group, evaluate(pred, ref, config, **masks)))
        except (DigitizeError, ValueError, OSError, KeyError) as exc:
            failures += 1
            print(f"warning: sample {sample_id!r} failed: {exc}", file=sys.stderr)

    out_path = Path(args.out)
    with out_path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["id", "group", "mse", "pearson", "lag", "iou"])
        for sample_id, group, report in rows:
            writer.writerow(
                [
                    sample_id,
                    group,
                    repr(report.mse),
                    repr(report.pearson),
                    report.lag,
                    "" if report.iou is None else repr(report.iou),
                ]
            )
        writer.writerow(["group", "n", *AGGREGATE_COLUMNS])
        for group in sorted({group for _, group, _ in rows}):
            agg = aggregate([report for _, g, report in rows if g == group], group)
            writer.writerow(
                [
                    agg.group,
                    agg.n,
                    repr(agg.mse_mean),
                    repr(agg.mse_std),
                    repr(agg.mse_max),
                    repr(agg.rho_mean),
                    repr(agg.rho_min),
                    repr(agg.rho_std),
                ]
            )
    return 1 if (failures or unpaired) else 0


# ---------------------------------------------------------------- grid


def cmd_grid(args) -> int:
    try:
        image = read_image(args.image)
        if isinstance(image, BinaryMask):
            lines = detect_lines(image)
        else:
            lines = detect_lines(isolate_grid_pixels(image))
        geometry = estimate_grid(lines)
    except DigitizeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(geometry.to_json_dict(), sort_keys=True))
    return 0


# ---------------------------------------------------------------- parser


def _add_pipeline_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--rate", type=float, default=100.0, help="output sampling rate in Hz")
    parser.add_argument("--alpha", type=float, default=0.5, help="distance weight in the path cost")
    parser.add_argument("--angle-scale", type=float, default=1.0, help="scale on the angle-change term")
    parser.add_argument("--hedge-floor", type=float, default=0.6)
    parser.add_argument("--hedge-step", type=float, default=0.95)
    parser.add_argument("--lag-window", type=int, default=10)
    parser.add_argument("--denoise", action="store_true", help="drop signal components under 4 px")
    parser.add_argument("--emit-diagnostics", action="store_true")
    parser.add_argument(
        "--grid-fallback",
        choices=["error", "assume-square-default"],
        default="error",
        help="what to do when grid detection fails",
    )
    parser.add_argument("--fallback-square-px", type=float, default=20.0)
    parser.add_argument("--grid", default=None, help="explicit grid as WIDTHxHEIGHT pixels, e.g. 40x40")
    parser.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ecgd", description="ECG trace image digitization toolkit")
    parser.add_argument("--version", action="version", version=f"ecgd {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a synthetic corpus with ground truth")
    p_synth.add_argument("--out", required=True)
    p_synth.add_argument("--n-clean", type=int, default=185)
    p_synth.add_argument("--n-overlap", type=int, default=100)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--rate", type=float, default=100.0)
    p_synth.add_argument("--duration", type=float, default=9.59)
    p_synth.add_argument("--noise", type=float, default=0.01)
    p_synth.set_defaults(func=cmd_synth)

    p_dig = sub.add_parser("digitize", help="digitize images or masks into signal JSON files")
    p_dig.add_argument("inputs", nargs="+", help="image/mask files or a corpus directory")
    p_dig.add_argument("--out", required=True)
    p_dig.add_argument("--mode", choices=[MODE_RAW, MODE_MASK], default=MODE_RAW)
    p_dig.add_argument(
        "--use-overlap",
        action="store_true",
        help="pick the .overlap variants when reading a corpus directory",
    )
    _add_pipeline_flags(p_dig)
    p_dig.set_defaults(func=cmd_digitize)

    p_eval = sub.add_parser("evaluate", help="compare predictions against references, write CSV")
    p_eval.add_argument("--pred", required=True)
    p_eval.add_argument("--ref", required=True)
    p_eval.add_argument("--out", required=True)
    p_eval.add_argument("--manifest", default=None, help="manifest with per-sample groups")
    p_eval.add_argument("--lag-window", type=int, default=10)
    p_eval.set_defaults(func=cmd_evaluate)

    p_grid = sub.add_parser("grid", help="detect the grid of one image, print JSON")
    p_grid.add_argument("image")
    p_grid.set_defaults(func=cmd_grid)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, DigitizeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
