"""Command-line entry point: train / eval / viz-cycling / bench / gen.

Each run writes a manifest (resolved config, seed, artifact paths, version,
timestamps) into the output directory before training starts, so a run is
reproducible from the manifest alone. Heavy imports happen inside main() so
OKGAN_MAX_THREADS can cap BLAS threading before numpy loads.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
import time
from pathlib import Path


def _cap_threads():
    cap = os.environ.get("OKGAN_MAX_THREADS")
    if cap:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
            os.environ.setdefault(var, cap)


def _now():
    return time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime())


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _parse_set(pairs):
    out = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise SystemExit(f"--set expects KEY=VALUE, got {pair!r}")
        key, raw = pair.split("=", 1)
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


def _resolve_config(args):
    """Precedence: preset defaults < config file < explicit flags < --set."""
    from .gan import PRESET_GAMMA, PRESET_ROUNDS, TrainConfig

    from .errors import ConfigError

    file_dict = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            file_dict = json.load(fh)
    if getattr(args, "preset", None) and getattr(args, "data", None):
        raise ConfigError("dataset: pass either --preset or --data, not both")
    preset_name = getattr(args, "preset", None) or file_dict.get("dataset") \
        or "grid25"
    trainer = getattr(args, "trainer", None) or file_dict.get("trainer") \
        or "okgan"
    merged = {
        "dataset": preset_name,
        "trainer": trainer,
        "kernel": {"type": "gaussian",
                   "gamma": PRESET_GAMMA.get(preset_name, 0.2)},
        "rounds": PRESET_ROUNDS.get(preset_name, 4000),
    }
    merged.update(file_dict)
    merged["dataset"] = preset_name
    merged["trainer"] = trainer
    for flag, key in (("rounds", "rounds"), ("seed", "seed"),
                      ("data", "data_path"), ("eval_every", "eval_every"),
                      ("eval_samples", "eval_samples"),
                      ("record_every", "record_every")):
        value = getattr(args, flag, None)
        if value is not None:
            merged[key] = value
    if merged.get("data_path") and not getattr(args, "preset", None):
        merged["dataset"] = "file"
    merged.update(_parse_set(getattr(args, "set", None)))
    return TrainConfig.from_dict(merged).validate()


def _manifest_start(out_dir, command, config=None, extra=None):
    from . import __version__

    manifest = {
        "tool": "okgan",
        "version": __version__,
        "command": command,
        "status": "running",
        "started_at": _now(),
        "finished_at": None,
        "artifacts": {},
    }
    if config is not None:
        manifest["seed"] = config.seed
        manifest["config"] = config.to_dict()
        manifest["config_hash"] = config.config_hash()
    if extra:
        manifest.update(extra)
    _write_json(out_dir / "manifest.json", manifest)
    return manifest


def _manifest_finish(out_dir, manifest, status="complete", error=None):
    manifest["status"] = status
    manifest["finished_at"] = _now()
    if error is not None:
        manifest["error"] = error
    _write_json(out_dir / "manifest.json", manifest)


class _MetricsWriter:
    """Appends one row per evaluation to metrics.csv."""

    def __init__(self, path, spec):
        self.spec = spec
        self.fh = open(path, "w", newline="")
        self.writer = csv.writer(self.fh)
        self.writer.writerow(
            ["round", "modes", "hq_pct", "reverse_kl", "center_captured"])
        self.last_round = None

    def write(self, state):
        from .gan import generate
        from .metrics import evaluate

        if state.round_index == self.last_round:
            return
        samples = generate(state, state.config.eval_samples)
        report = evaluate(samples, self.spec, round_index=state.round_index)
        center = "" if report.center_captured is None else report.center_captured
        self.writer.writerow([
            report.round, report.modes_captured,
            repr(float(report.high_quality_pct)),
            repr(float(report.reverse_kl)), center,
        ])
        self.fh.flush()
        self.last_round = state.round_index

    def close(self):
        self.fh.close()


def cmd_train(args):
    from .gan import (TrainingHooks, build_state, generate, run_rounds,
                      save_checkpoint)
    from .synthdata import GaussianMixtureSpec, save_vectors

    config = _resolve_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "config.json", config.to_dict())
    manifest = _manifest_start(out, "train", config)

    state = build_state(config)
    mixture = isinstance(state.real_source, GaussianMixtureSpec)
    metrics_writer = _MetricsWriter(out / "metrics.csv", state.real_source) \
        if mixture else None
    hooks = TrainingHooks(
        on_eval=metrics_writer.write if metrics_writer else None)

    from .errors import TrainingDivergedError

    try:
        remaining = config.rounds
        while remaining > 0:
            chunk = remaining
            if args.checkpoint_every:
                chunk = min(chunk, args.checkpoint_every)
            run_rounds(state, chunk, hooks)
            remaining -= chunk
            if args.checkpoint_every and remaining > 0:
                save_checkpoint(state, out / f"round_{state.round_index}.ckpt")
    except TrainingDivergedError as exc:
        diag = out / "diagnostic.ckpt"
        save_checkpoint(exc.state, diag)
        manifest["artifacts"]["diagnostic_checkpoint"] = diag.name
        if metrics_writer:
            metrics_writer.close()
        _manifest_finish(out, manifest, status="failed", error=str(exc))
        print(f"training aborted: {exc}\ndiagnostic checkpoint: {diag}",
              file=sys.stderr)
        return 3
    except Exception as exc:
        if metrics_writer:
            metrics_writer.close()
        _manifest_finish(out, manifest, status="failed", error=str(exc))
        raise

    if metrics_writer:
        metrics_writer.write(state)  # final row even off-cadence
        metrics_writer.close()
        manifest["artifacts"]["metrics"] = "metrics.csv"
    samples = generate(state, config.eval_samples)
    save_vectors(out / "samples.csv", samples)
    save_checkpoint(state, out / "final.ckpt")
    manifest["artifacts"].update(
        {"samples": "samples.csv", "checkpoint": "final.ckpt",
         "config_echo": "config.json"})
    _manifest_finish(out, manifest)
    print(f"trained {state.round_index} rounds -> {out}")
    return 0


def cmd_eval(args):
    from .gan import generate, load_checkpoint
    from .metrics import evaluate
    from .synthdata import preset, save_vectors

    state = load_checkpoint(args.checkpoint)
    try:
        spec = preset(args.preset or state.config.dataset)
    except ValueError as exc:
        print(f"error: {exc} (pass --preset)", file=sys.stderr)
        return 2
    if state.generator.out_dim != spec.dim:
        print(f"checkpoint generates dimension {state.generator.out_dim}, "
              f"preset has dimension {spec.dim}", file=sys.stderr)
        return 2
    samples = generate(state, args.n)
    report = evaluate(samples, spec, round_index=state.round_index)
    print(report.to_json())
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_vectors(out / "samples.csv", samples)
    return 0


def cmd_gen(args):
    from .gan import generate, load_checkpoint
    from .synthdata import save_vectors

    state = load_checkpoint(args.checkpoint)
    samples = generate(state, args.n)
    save_vectors(args.out, samples)
    print(f"wrote {args.n} samples -> {args.out}")
    return 0


def cmd_viz_cycling(args):
    from .diagnostics import TrajectoryRecorder, turning_angle_fraction
    from .gan import (TrainingHooks, build_state, discriminator_score_fn,
                      run_rounds)
    from .numerics import named_streams
    from .synthdata import preset

    config = _resolve_config(args)
    if config.record_every < 1:
        config.record_every = 1
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "config.json", config.to_dict())

    try:
        spec = preset(config.dataset)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    probes_rng = named_streams(config.seed)["probes"]
    shared = TrajectoryRecorder.init_probes(spec, config.probe_count, probes_rng)
    manifest = _manifest_start(out, "viz-cycling", config,
                               extra={"probes_digest": shared.probes_digest()})

    summaries = {}
    for kind, fname in (("okgan", "trajectory_okgan.csv"),
                        ("vanilla", "trajectory_vgan.csv")):
        run_config = dataclasses.replace(config, trainer=kind)
        recorder = TrajectoryRecorder(shared.probes)
        state = build_state(run_config)
        hooks = TrainingHooks(on_record=lambda s, rec=recorder: rec.record(
            discriminator_score_fn(s), s.round_index))
        run_rounds(state, run_config.rounds, hooks)
        recorder.write_csv(out / fname)
        frac = turning_angle_fraction(recorder.project())
        summaries[kind] = frac
        manifest["artifacts"][f"trajectory_{kind}"] = fname

    manifest["turning_angle_fraction"] = summaries
    _manifest_finish(out, manifest)
    print("turning-angle fraction (artifact heuristic, not a published metric):")
    for kind, frac in summaries.items():
        print(f"  {kind}: {frac:.3f}")
    return 0


def cmd_bench(args):
    from .diagnostics import time_discriminator_update
    from .gan import default_config

    sizes = [int(s) for s in args.sizes.split(",")]
    config = default_config("grid25")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = _manifest_start(out, "bench",
                               extra={"sizes": sizes, "reps": args.reps})
    report = time_discriminator_update(config, sizes, reps=args.reps)
    report.write_csv(out / "timing.csv")
    slope, intercept, r2 = report.linear_fit()
    manifest["artifacts"]["timing"] = "timing.csv"
    manifest["linear_fit"] = {"slope": slope, "intercept": intercept, "r2": r2}
    _manifest_finish(out, manifest)
    print(f"linear fit: time = {slope:.3e} * S + {intercept:.3e}, R^2 = {r2:.4f}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="okgan",
        description="Train and evaluate a GAN whose discriminator is a "
                    "budgeted online kernel classifier.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_flags(p, with_trainer=True):
        p.add_argument("--preset", choices=("grid25", "grid49", "ring8", "circle"),
                       help="2D mixture preset")
        if with_trainer:
            p.add_argument("--trainer",
                           choices=("okgan", "okgan-encoder", "vanilla"))
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--rounds", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override any config field (JSON value)")

    p = sub.add_parser("train", help="run one training experiment")
    add_config_flags(p)
    p.add_argument("--data", help="CSV or binary vector dataset (encoder mode)")
    p.add_argument("--out", default="run", help="output directory")
    p.add_argument("--eval-every", dest="eval_every", type=int)
    p.add_argument("--eval-samples", dest="eval_samples", type=int)
    p.add_argument("--record-every", dest="record_every", type=int)
    p.add_argument("--checkpoint-every", dest="checkpoint_every", type=int,
                   default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint against a preset")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--preset", choices=("grid25", "grid49", "ring8", "circle"))
    p.add_argument("--n", type=int, default=2500)
    p.add_argument("--out", default="eval_out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("gen", help="generate samples from a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--n", type=int, default=2500)
    p.add_argument("--out", default="samples.csv")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("viz-cycling",
                       help="record discriminator trajectories for the kernel "
                            "and vanilla trainers with shared probes")
    add_config_flags(p, with_trainer=False)
    p.add_argument("--out", default="viz")
    p.add_argument("--record-every", dest="record_every", type=int)
    p.set_defaults(func=cmd_viz_cycling)

    p = sub.add_parser("bench", help="time discriminator updates vs batch size")
    p.add_argument("--sizes", default="128,256,512,1024")
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--out", default="bench")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None):
    _cap_threads()
    args = build_parser().parse_args(argv)
    from .errors import (CheckpointError, ConfigError, DatasetError,
                         TrainingDivergedError)

    try:
        return args.func(args)
    except (ConfigError, DatasetError, CheckpointError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TrainingDivergedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
