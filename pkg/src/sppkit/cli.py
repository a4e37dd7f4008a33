"""Command-line surface.

Subcommands: ``enhance`` (WAV in/out pipeline), ``make-dataset`` (synthetic
training pairs + manifest), ``eval`` (metrics as JSON records on stdout),
``model-info`` (bundle inspection), ``gen-golden`` (oracle-computed golden
vectors for the inference engine).

Exit codes: 0 success, 1 usage, 2 I/O, 3 format/model validation.  stdout
carries machine-readable output only; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import datagen, dumps, metrics, wavio
from .enhance import EnhanceConfig, enhance
from .errors import (DomainError, FormatError, InvalidConfigError,
                     ShapeMismatchError, SppKitError, UsageError, ValidationError)
from .frontend import NormStats, StftConfig
from .nn.bundle_io import load_model, save_model
from .nn.model import param_count, random_bundle
from .nn.oracle import naive_model_forward
from .spp import FixedPriorParams

GOLDEN_FRAMES = 8
GOLDEN_PER_VARIANT = 5


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; route through the usage taxonomy instead
    def error(self, message):
        raise UsageError(f"{message}\n{self.format_usage()}")


def _worker_count() -> int:
    raw = os.environ.get("SPP_ENHANCE_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"SPP_ENHANCE_THREADS must be an integer, got {raw!r}")


def _emit(record: dict) -> None:
    json.dump(record, sys.stdout)
    sys.stdout.write("\n")


# ---------------------------------------------------------------- enhance

def _cmd_enhance(args) -> int:
    if args.spp == "nn" and not args.model:
        raise UsageError("--spp nn requires --model")
    model = load_model(args.model) if args.spp == "nn" else None
    config = EnhanceConfig(
        alpha_snr=args.alpha_snr,
        xi_floor_db=args.xi_floor_db,
        gain_floor=args.gain_floor,
        spp_source="neural" if args.spp == "nn" else "statistical",
        tracker="suboptimal" if args.tracker == "subopt" else "optimal",
        dd_mode=args.dd_mode.replace("-", "_"),
        fixed_prior=FixedPriorParams(xi_h1_db=args.xi_fix_db, beta=args.beta,
                                     lambda_cap=args.lambda_cap),
    )
    audio = wavio.read_wav(args.input)
    enhanced, diag = enhance(audio, config, model)
    wavio.write_wav(args.output, enhanced)
    if args.dump_dir:
        dump_dir = Path(args.dump_dir)
        dump_dir.mkdir(parents=True, exist_ok=True)
        stem = Path(args.input).stem
        dumps.write_matrix_dump(dump_dir / f"{stem}.spp.sppp", diag.spp.data, dumps.MAGIC_SPP)
        dumps.write_matrix_dump(dump_dir / f"{stem}.noise.sppn", diag.noise_track, dumps.MAGIC_NOISE)
        dumps.write_matrix_dump(dump_dir / f"{stem}.gain.sppp", diag.gain_map, dumps.MAGIC_SPP)
    print(f"wrote {args.output}", file=sys.stderr)
    return 0


# ------------------------------------------------------------ make-dataset

def _build_utterance(base_seed: int, index: int, snr_lo: float, snr_hi: float,
                     duration: float, noise_kind: str):
    utt_seed = base_seed + index
    rng = np.random.default_rng((utt_seed, 2))
    snr_db = float(rng.uniform(snr_lo, snr_hi))
    kind = noise_kind
    if kind == "mixed":
        kind = datagen.NOISE_KINDS[index % len(datagen.NOISE_KINDS)]
    clean = datagen.synth_speechlike(duration, seed=(utt_seed, 0))
    noise = datagen.synth_noise(kind, duration, seed=(utt_seed, 1))
    return utt_seed, snr_db, kind, clean, noise


def _cmd_make_dataset(args) -> int:
    if args.snr_min > args.snr_max:
        raise UsageError("--snr-min must not exceed --snr-max")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stft_config = StftConfig()

    jobs = [
        _build_utterance(args.seed, i, args.snr_min, args.snr_max,
                         args.duration, args.noise_kind)
        for i in range(args.count)
    ]

    def first_pass(job):
        utt_seed, snr_db, kind, clean, noise = job
        record = datagen.make_training_pairs(clean, noise, snr_db, stft_config,
                                             norm_stats=NormStats(0.0, 1.0),
                                             seed=utt_seed)
        return record

    workers = _worker_count()
    if workers > 1 and jobs:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            raw_records = list(pool.map(first_pass, jobs))
    else:
        raw_records = [first_pass(job) for job in jobs]

    # global normalization statistics over the whole dataset's raw features
    if raw_records:
        stacked = np.concatenate([r.features.ravel() for r in raw_records]).astype(np.float64)
        stats = NormStats(float(stacked.mean()), float(stacked.std()) or 1.0)
    else:
        stats = NormStats(0.0, 1.0)

    entries = []
    for job, record in zip(jobs, raw_records):
        utt_seed, snr_db, kind, _, _ = job
        features = (record.features.astype(np.float64) - stats.mean) / stats.std
        final = dumps.PairRecord(features.astype(np.float32), record.target,
                                 utt_seed, snr_db, stats.mean, stats.std)
        name = f"pair_{utt_seed:08d}.sppd"
        dumps.write_pair_file(out_dir / name, final)
        entries.append({"file": name, "seed": utt_seed, "snr_db": snr_db,
                        "noise_kind": kind})

    manifest = {
        "version": dumps.FORMAT_VERSION,
        "count": args.count,
        "base_seed": args.seed,
        "snr_range_db": [args.snr_min, args.snr_max],
        "duration_s": args.duration,
        "norm_stats": {"mean": stats.mean, "std": stats.std},
        "utterances": entries,
    }
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {args.count} pair files to {out_dir}", file=sys.stderr)
    return 0


# ------------------------------------------------------------------- eval

def _cmd_eval(args) -> int:
    config: dict = {}
    if args.metric == "logerr":
        ref = dumps.read_matrix_dump(args.ref)
        est = dumps.read_matrix_dump(args.est)
        floor = 1e-12
        value = metrics.log_err(np.maximum(ref, floor), np.maximum(est, floor))
    elif args.metric in ("roc", "auc", "pd"):
        scores = dumps.read_matrix_dump(args.scores, dumps.MAGIC_SPP)
        truth = dumps.read_matrix_dump(args.truth, dumps.MAGIC_SPP)
        curve = metrics.roc(scores, truth, args.threshold)
        config["label_threshold"] = args.threshold
        if args.metric == "pd":
            config["pfa_target"] = args.pfa
            value = metrics.pd_at_pfa(curve, args.pfa)
        else:
            value = metrics.auc(curve)
            if args.metric == "roc":
                config["pd_at_pfa_0.05"] = metrics.pd_at_pfa(curve, 0.05)
                config["num_points"] = int(curve.pfa.size)
    elif args.metric == "kl":
        target = dumps.read_matrix_dump(args.target, dumps.MAGIC_SPP)
        estimate = dumps.read_matrix_dump(args.estimate, dumps.MAGIC_SPP)
        config["full_binary"] = bool(args.full_binary)
        value = metrics.kl_divergence(target, estimate, full_binary=args.full_binary)
    else:  # segsnr
        ref = wavio.read_wav(args.ref)
        est = wavio.read_wav(args.est)
        config["frame_len"] = args.frame_len
        value = metrics.segmental_snr(ref, est, frame_len=args.frame_len)
    _emit({"metric": args.metric, "value": value, "config": config, "seed": None})
    if args.csv:
        import csv as csv_mod
        path = Path(args.csv)
        fresh = not path.exists()
        with open(path, "a", newline="") as fh:
            writer = csv_mod.writer(fh)
            if fresh:
                writer.writerow(["metric", "value", "config"])
            writer.writerow([args.metric, value, json.dumps(config, sort_keys=True)])
    return 0


# ------------------------------------------------------------- model-info

def _cmd_model_info(args) -> int:
    bundle = load_model(args.model)
    _emit({
        "variant": bundle.descriptor.variant,
        "format_version": bundle.format_version,
        "param_count": param_count(bundle.descriptor),
        "norm_stats": {"mean": bundle.norm_stats.mean, "std": bundle.norm_stats.std},
        "tensors": {name: list(t.shape) for name, t in sorted(bundle.tensors.items())},
    })
    return 0


# ------------------------------------------------------------- gen-golden

def _cmd_gen_golden(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = []
    for variant in ("blstm", "attention"):
        for i in range(args.per_variant):
            fixture_seed = args.seed * 1000 + i + (0 if variant == "blstm" else 500)
            bundle = random_bundle(variant, seed=fixture_seed)
            rng = np.random.default_rng((fixture_seed, 7))
            feats = rng.standard_normal(
                (bundle.descriptor.num_bins, args.frames)).astype(np.float32)
            expected = naive_model_forward(bundle, feats.astype(np.float64))
            stem = f"golden_{variant}_{i:02d}"
            save_model(bundle, out_dir / f"{stem}.sppm")
            dumps.write_matrix_dump(out_dir / f"{stem}.in.sppf", feats, dumps.MAGIC_FEATURES)
            dumps.write_matrix_dump(out_dir / f"{stem}.out.sppp", expected, dumps.MAGIC_SPP)
            manifest.append({"stem": stem, "variant": variant, "seed": fixture_seed,
                             "frames": args.frames})
    with open(out_dir / "manifest.json", "w") as fh:
        json.dump({"fixtures": manifest, "tolerance": 1e-5}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {len(manifest)} golden fixtures to {out_dir}", file=sys.stderr)
    return 0


# ------------------------------------------------------------------ wiring

def build_parser() -> _Parser:
    parser = _Parser(prog="sppkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enhance", help="enhance a noisy WAV file")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--spp", choices=("stat", "nn"), default="stat")
    p.add_argument("--model", help="model bundle (required with --spp nn)")
    p.add_argument("--tracker", choices=("subopt", "opt"), default="subopt")
    p.add_argument("--alpha-snr", type=float, default=0.90)
    p.add_argument("--xi-floor-db", type=float, default=-25.0)
    p.add_argument("--xi-fix-db", type=float, default=15.0)
    p.add_argument("--beta", type=float, default=0.9)
    p.add_argument("--lambda-cap", type=float, default=0.99)
    p.add_argument("--gain-floor", type=float, default=0.0)
    p.add_argument("--dd-mode", choices=("classical", "as-observed"), default="classical")
    p.add_argument("--dump-dir")
    p.set_defaults(func=_cmd_enhance)

    p = sub.add_parser("make-dataset", help="generate synthetic training pairs")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--snr-min", type=float, default=-10.0)
    p.add_argument("--snr-max", type=float, default=10.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--duration", type=float, default=2.0)
    p.add_argument("--noise-kind", choices=datagen.NOISE_KINDS + ("mixed",),
                   default="mixed")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_make_dataset)

    p = sub.add_parser("eval", help="compute a metric, JSON record on stdout")
    p.add_argument("--metric", choices=("logerr", "roc", "auc", "pd", "segsnr", "kl"),
                   required=True)
    p.add_argument("--ref", help="reference dump/WAV (logerr, segsnr)")
    p.add_argument("--est", help="estimate dump/WAV (logerr, segsnr)")
    p.add_argument("--scores", help="score map (roc/auc/pd)")
    p.add_argument("--truth", help="truth map (roc/auc/pd)")
    p.add_argument("--target", help="target map (kl)")
    p.add_argument("--estimate", help="estimate map (kl)")
    p.add_argument("--threshold", type=float, default=metrics.DEFAULT_LABEL_THRESHOLD)
    p.add_argument("--pfa", type=float, default=0.05)
    p.add_argument("--full-binary", action="store_true")
    p.add_argument("--frame-len", type=int, default=256)
    p.add_argument("--csv", help="append the record to a CSV table as well")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("model-info", help="inspect a model bundle")
    p.add_argument("model")
    p.set_defaults(func=_cmd_model_info)

    p = sub.add_parser("gen-golden", help="emit oracle-computed golden vectors")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", required=True)
    p.add_argument("--frames", type=int, default=GOLDEN_FRAMES)
    p.add_argument("--per-variant", type=int, default=GOLDEN_PER_VARIANT)
    p.set_defaults(func=_cmd_gen_golden)
    return parser


_EVAL_REQUIRED = {
    "logerr": ("ref", "est"),
    "segsnr": ("ref", "est"),
    "roc": ("scores", "truth"),
    "auc": ("scores", "truth"),
    "pd": ("scores", "truth"),
    "kl": ("target", "estimate"),
}


def _validate_eval_args(args) -> None:
    if getattr(args, "func", None) is not _cmd_eval:
        return
    missing = [f"--{name}" for name in _EVAL_REQUIRED[args.metric]
               if getattr(args, name) is None]
    if missing:
        raise UsageError(f"--metric {args.metric} requires {', '.join(missing)}")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _validate_eval_args(args)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(parser.format_usage(), file=sys.stderr, end="")
        return 1
    except (FormatError, ValidationError, ShapeMismatchError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except InvalidConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SppKitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
