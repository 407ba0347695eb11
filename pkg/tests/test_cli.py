import csv
import json
import os
import subprocess
import sys

import numpy as np

SMALL = {
    "gen_hidden": [16, 16],
    "batch_size": 24,
    "clf_batch_size": 16,
    "budget": 128,
    "gen_steps": 2,
    "eval_samples": 60,
    "probe_count": 8,
}


def run_cli(*args, check=True):
    proc = subprocess.run([sys.executable, "-m", "okgan.cli", *args],
                          capture_output=True, text=True,
                          env={**os.environ, "OKGAN_MAX_THREADS": "2"})
    if check and proc.returncode != 0:
        raise AssertionError(
            f"cli failed ({proc.returncode}):\n{proc.stdout}\n{proc.stderr}")
    return proc


def write_config(tmp_path, **extra):
    cfg = dict(SMALL)
    cfg.update(extra)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


def read_csv(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_train_produces_artifacts(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "run"
    run_cli("train", "--preset", "ring8", "--config", str(cfg),
            "--rounds", "6", "--seed", "7", "--eval-every", "3",
            "--out", str(out))
    for name in ("manifest.json", "config.json", "metrics.csv",
                 "samples.csv", "final.ckpt"):
        assert (out / name).exists(), name
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "complete"
    assert manifest["seed"] == 7
    assert manifest["config"]["rounds"] == 6
    assert manifest["config_hash"]
    assert manifest["artifacts"]["samples"] == "samples.csv"
    rows = read_csv(out / "metrics.csv")
    assert rows[0] == ["round", "modes", "hq_pct", "reverse_kl",
                       "center_captured"]
    assert [r[0] for r in rows[1:]] == ["3", "6"]
    samples = read_csv(out / "samples.csv")
    assert len(samples) == 61  # header + eval_samples rows


def test_train_determinism_byte_identical(tmp_path):
    cfg = write_config(tmp_path)
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        run_cli("train", "--preset", "ring8", "--config", str(cfg),
                "--rounds", "4", "--seed", "11", "--eval-every", "2",
                "--out", str(out))
        outs.append(out)
    assert (outs[0] / "metrics.csv").read_bytes() == \
        (outs[1] / "metrics.csv").read_bytes()
    assert (outs[0] / "samples.csv").read_bytes() == \
        (outs[1] / "samples.csv").read_bytes()


def test_eval_command_json_and_overrides(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "run"
    run_cli("train", "--preset", "ring8", "--config", str(cfg),
            "--rounds", "3", "--seed", "0", "--out", str(out))
    eval_out = tmp_path / "eval"
    proc = run_cli("eval", "--checkpoint", str(out / "final.ckpt"),
                   "--preset", "ring8", "--n", "100", "--out", str(eval_out))
    report = json.loads(proc.stdout.strip().splitlines()[-1])
    for key in ("modes_captured", "high_quality_pct", "reverse_kl",
                "center_captured"):
        assert key in report
    assert report["n_samples"] == 100
    assert len(read_csv(eval_out / "samples.csv")) == 101


def test_eval_dimension_mismatch_exit_code(tmp_path):
    cfg = write_config(tmp_path, noise_dim=3, gen_hidden=[8],
                       encoder_dim=4)
    out = tmp_path / "run"
    run_cli("train", "--preset", "ring8", "--config", str(cfg),
            "--trainer", "okgan-encoder", "--set", "encoder_hidden=[8]",
            "--rounds", "2", "--out", str(out), "--data",
            str(_vector_file(tmp_path)))
    proc = run_cli("eval", "--checkpoint", str(out / "final.ckpt"),
                   "--preset", "ring8", check=False)
    assert proc.returncode == 2


def _vector_file(tmp_path):
    rng = np.random.default_rng(0)
    path = tmp_path / "data.csv"
    rows = ["x0,x1,x2,x3"]
    rows += [",".join(repr(float(v)) for v in row)
             for row in rng.normal(size=(64, 4))]
    path.write_text("\n".join(rows) + "\n")
    return path


def test_train_on_vector_data_with_encoder(tmp_path):
    data = _vector_file(tmp_path)
    out = tmp_path / "enc_run"
    run_cli("train", "--data", str(data), "--trainer", "okgan-encoder",
            "--config", str(write_config(tmp_path, encoder_dim=3,
                                         encoder_hidden=[8], noise_dim=2)),
            "--rounds", "3", "--out", str(out))
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "complete"
    assert not (out / "metrics.csv").exists()  # no mixture, no mode metrics
    samples = read_csv(out / "samples.csv")
    assert len(samples[0]) == 4  # data dimension


def test_gen_command(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "run"
    run_cli("train", "--preset", "ring8", "--config", str(cfg),
            "--rounds", "2", "--out", str(out))
    target = tmp_path / "gen_samples.csv"
    run_cli("gen", "--checkpoint", str(out / "final.ckpt"),
            "--n", "37", "--out", str(target))
    assert len(read_csv(target)) == 38


def test_viz_cycling_artifacts(tmp_path):
    cfg = write_config(tmp_path)
    out = tmp_path / "viz"
    run_cli("viz-cycling", "--preset", "ring8", "--config", str(cfg),
            "--rounds", "5", "--seed", "3", "--out", str(out))
    ok_rows = read_csv(out / "trajectory_okgan.csv")
    vg_rows = read_csv(out / "trajectory_vgan.csv")
    assert ok_rows[0] == ["round", "pc1", "pc2"]
    assert [r[0] for r in ok_rows] == [r[0] for r in vg_rows]
    assert len(ok_rows) == 6  # header + 5 recorded rounds
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["probes_digest"]
    assert set(manifest["turning_angle_fraction"]) == {"okgan", "vanilla"}


def test_bench_artifacts(tmp_path):
    # sizes must satisfy 2*S >= the clf minibatch size (64)
    out = tmp_path / "bench"
    run_cli("bench", "--sizes", "32,64", "--reps", "3", "--out", str(out))
    rows = read_csv(out / "timing.csv")
    assert rows[0] == ["batch_size", "mean_seconds", "std_seconds"]
    assert [r[0] for r in rows[1:]] == ["32", "64"]
    manifest = json.loads((out / "manifest.json").read_text())
    assert "r2" in manifest["linear_fit"]


def test_invalid_config_usage_error(tmp_path):
    proc = run_cli("train", "--preset", "ring8", "--set", "lr_decay=0",
                   "--out", str(tmp_path / "x"), check=False)
    assert proc.returncode == 2
    assert "lr_decay" in proc.stderr


def test_unknown_preset_rejected(tmp_path):
    proc = run_cli("train", "--preset", "spiral", check=False)
    assert proc.returncode == 2


def test_checkpoint_corruption_exit_code(tmp_path):
    bad = tmp_path / "bad.ckpt"
    bad.write_bytes(b"JUNKJUNKJUNK")
    proc = run_cli("eval", "--checkpoint", str(bad), "--preset", "ring8",
                   check=False)
    assert proc.returncode == 2


def test_divergence_exit_code_and_diagnostic_checkpoint(tmp_path):
    out = tmp_path / "diverged"
    proc = run_cli("train", "--preset", "ring8", "--rounds", "3",
                   "--config", str(write_config(tmp_path)),
                   "--set", "lr=1e300", "--out", str(out), check=False)
    assert proc.returncode == 3
    assert (out / "diagnostic.ckpt").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["status"] == "failed"
    assert "non-finite" in manifest["error"]
