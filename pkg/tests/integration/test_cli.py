"""
Command-line pipeline: phantom -> scan -> reconstruct -> dataset -> train -> fuse -> eval,
driven through main() with every artefact under tmp_path.
"""

import numpy as np
import pytest

from src.cli.main import main
from src.config import settings
from src.models.model_registry import REGISTRY_FILE, ModelRegistry
from src.models.neural.model_io import save_model
from src.models.neural.network import NeuralNet
from src.scanmodel.raster import read_image


def _metrics(output: str) -> dict:
    values = {}
    for line in output.splitlines():
        if line.startswith("#METRIC "):
            key, _, value = line[len("#METRIC "):].partition("=")
            values[key] = value
    return values


def run(capsys, *argv) -> tuple:
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, out


def test_noiseless_disk_reconstructs_cleanly(tmp_path, capsys):
    ref = tmp_path / "ref.tfr"
    counts = tmp_path / "counts.tfr"
    rec = tmp_path / "rec.tfr"

    code, out = run(capsys, "phantom", "--preset", "disk", "--size", 128, "-o", ref)
    assert code == 0
    assert _metrics(out)["max_hu"] == "1000"

    assert run(capsys, "scan", "-i", ref, "--views", 180, "--noiseless", "-o", counts)[0] == 0
    assert run(capsys, "fbp", "-i", counts, "--size", 128, "-o", rec)[0] == 0

    code, out = run(capsys, "eval", "--ref", ref, "--est", rec, "--ssim")
    assert code == 0
    metrics = _metrics(out)
    assert float(metrics["rec.snr_uniform"]) >= 15.0
    assert 0.0 < float(metrics["rec.ssim"]) <= 1.0
    assert read_image(rec).shape == (128, 128)


def _fusion_pipeline(tmp_path, capsys, threads: int) -> tuple:
    root = tmp_path / f"run{threads}"
    ref, counts = root / "ref.tfr", root / "counts.tfr"
    versions = root / "rec.tfr"
    low, sharp = root / "rec_fbp_c0.4_p3.tfr", root / "rec_fbp_cinf_p3.tfr"
    printed = []

    def step(*argv):
        code, out = run(capsys, "--threads", threads, *argv)
        assert code == 0, argv
        printed.append(out)

    step("phantom", "--preset", "random-tissue", "--seed", 4, "--size", 48, "-o", ref)
    step("scan", "-i", ref, "--views", 60, "--blank", 1e4, "--seed", 1, "-o", counts)
    step("fbp", "-i", counts, "--size", 48, "--cutoff", "0.4,inf", "-o", versions)
    step("make-dataset", "--pair", ref, low, sharp, "--radii", "1,1", "--output-radius", 0,
         "--stride", 2, "-o", root / "train.tfds")
    step("train", "-i", root / "train.tfds", "--hidden", 3, "--epochs", 5, "--kind", "fbp-boost",
         "--registry", root / "registry.json", "-o", root / "net.tfnn")
    step("fuse", "--model", root / "net.tfnn", "--stack", low, sharp, "--radii", "1,1",
         "--output-radius", 0, "-o", root / "fused.tfr")
    step("boost-fbp", "-i", counts, "--model", root / "net.tfnn", "--cutoffs", "0.4,inf", "--radii", "1,1",
         "--output-radius", 0, "--size", 48, "-o", root / "boost.tfr")
    step("eval", "--ref", ref, "--est", low, sharp, root / "fused.tfr")
    return root, "".join(printed)


def test_fusion_pipeline_is_deterministic(tmp_path, capsys):
    root_a, out_a = _fusion_pipeline(tmp_path, capsys, threads=1)
    root_b, out_b = _fusion_pipeline(tmp_path, capsys, threads=3)

    metrics = _metrics(out_a)
    assert int(metrics["examples"]) > 0
    assert metrics["inputs"] == "10"
    assert metrics["outputs"] == "1"
    assert "fused.snr_uniform" in metrics

    assert metrics == _metrics(out_b)
    fused = read_image(root_a / "fused.tfr").data
    np.testing.assert_array_equal(fused, read_image(root_b / "fused.tfr").data)
    # the end-to-end boost fuses the very same reconstructions
    np.testing.assert_array_equal(fused, read_image(root_a / "boost.tfr").data)

    registry = ModelRegistry(root_a / "registry.json")
    assert list(registry.list_models(kind="fbp-boost")) == ["net"]


def test_pwls_snapshots(tmp_path, capsys):
    ref, counts = tmp_path / "ref.tfr", tmp_path / "counts.tfr"
    assert run(capsys, "phantom", "--preset", "disk", "--size", 32, "-o", ref)[0] == 0
    assert run(capsys, "scan", "-i", ref, "--views", 40, "--blank", 1e4, "-o", counts)[0] == 0
    code, out = run(capsys, "pwls", "-i", counts, "--size", 32, "--iters", 4, "--snapshot-every", 2,
                    "-o", tmp_path / "pw.tfr")
    assert code == 0
    assert _metrics(out)["status"] in ("max_iters", "converged")
    assert (tmp_path / "pw_it2.tfr").exists()
    assert (tmp_path / "pw_it4.tfr").exists()


def test_pwc_demo_writes_signals(tmp_path, capsys):
    code, out = run(capsys, "pwc-demo", "--train-len", 600, "--test-len", 300, "--hidden", 3,
                    "--epochs", 3, "--out-dir", tmp_path)
    assert code == 0
    assert "fusion_gain" in _metrics(out)
    assert read_image(tmp_path / "pwc_fused.tfr").shape == (1, 300)


def test_network_config_mismatch_exits_with_input_error(tmp_path, capsys):
    ref = tmp_path / "ref.tfr"
    run(capsys, "phantom", "--preset", "disk", "--size", 16, "-o", ref)
    save_model(NeuralNet.initialize([5, 1], 0), tmp_path / "net.tfnn")
    code, _ = run(capsys, "fuse", "--model", tmp_path / "net.tfnn", "--stack", ref, ref, "--radii", "1,1",
                  "--output-radius", 0, "-o", tmp_path / "out.tfr")
    assert code == 2


def test_missing_input_exits_with_input_error(tmp_path, capsys):
    assert run(capsys, "fbp", "-i", tmp_path / "absent.tfr", "-o", tmp_path / "x.tfr")[0] == 2


def test_corrupt_input_exits_with_input_error(tmp_path, capsys):
    bad = tmp_path / "bad.tfr"
    bad.write_bytes(b"garbage")
    assert run(capsys, "eval", "--ref", bad, "--est", bad)[0] == 2


@pytest.mark.parametrize("argv", [
    ["fbp", "--bogus"],
    ["fbp", "-i", "x.tfr", "-o", "y.tfr", "--cutoff", "abc"],
    [],
    ["pwc-demo", "--noise", "-1"],
])
def test_usage_errors_exit_with_one(argv, capsys):
    assert main(argv) == 1


def test_train_registry_defaults_next_to_network(tmp_path, capsys, monkeypatch):
    monkeypatch.setattr(settings, "MODEL_REGISTRY_PATH", None)
    ref, counts, rec = tmp_path / "ref.tfr", tmp_path / "counts.tfr", tmp_path / "rec.tfr"
    run(capsys, "phantom", "--preset", "random-tissue", "--seed", 2, "--size", 32, "-o", ref)
    run(capsys, "scan", "-i", ref, "--views", 40, "--blank", 1e4, "-o", counts)
    run(capsys, "fbp", "-i", counts, "--size", 32, "--cutoff", "0.4,inf", "-o", rec)
    run(capsys, "make-dataset", "--pair", ref, tmp_path / "rec_fbp_c0.4_p3.tfr", tmp_path / "rec_fbp_cinf_p3.tfr",
        "--radii", "1,1", "--output-radius", 0, "--stride", 2, "-o", tmp_path / "train.tfds")
    out_dir = tmp_path / "models"
    code, _ = run(capsys, "train", "-i", tmp_path / "train.tfds", "--hidden", 2, "--epochs", 2,
                  "-o", out_dir / "net.tfnn")
    assert code == 0
    assert list(ModelRegistry(out_dir / REGISTRY_FILE).list_models()) == ["net"]


def test_sweep_bank_writes_eight_versions(tmp_path, capsys):
    ref, counts = tmp_path / "ref.tfr", tmp_path / "counts.tfr"
    run(capsys, "phantom", "--preset", "disk", "--size", 16, "-o", ref)
    run(capsys, "scan", "-i", ref, "--views", 20, "--noiseless", "-o", counts)
    code, out = run(capsys, "fbp", "-i", counts, "--size", 16, "--sweep", "-o", tmp_path / "rec.tfr")
    assert code == 0
    written = sorted(p.name for p in tmp_path.glob("rec_fbp_*.tfr"))
    assert len(written) == 8
    assert "rec_fbp_c120_p3.tfr" in written
    assert "rec_fbp_c0.8_p1.tfr" in written


def test_reruns_are_byte_identical(tmp_path, capsys):
    def pipeline(root):
        ref, counts = root / "ref.tfr", root / "counts.tfr"
        printed = []
        for argv in (["phantom", "--preset", "random-tissue", "--seed", 9, "--size", 32, "-o", ref],
                     ["scan", "-i", ref, "--views", 40, "--blank", 1e4, "--seed", 3, "-o", counts],
                     ["fbp", "-i", counts, "--size", 32, "--cutoff", "0.4,inf", "-o", root / "rec.tfr"],
                     ["eval", "--ref", ref, "--est", root / "rec_fbp_c0.4_p3.tfr", root / "rec_fbp_cinf_p3.tfr"]):
            code, out = run(capsys, *argv)
            assert code == 0, argv
            printed.extend(line for line in out.splitlines() if line.startswith("#METRIC "))
        return printed

    first, second = tmp_path / "a", tmp_path / "b"
    first.mkdir()
    second.mkdir()
    assert pipeline(first) == pipeline(second)
    for name in ("ref.tfr", "counts.tfr", "rec_fbp_c0.4_p3.tfr", "rec_fbp_cinf_p3.tfr"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_window_needs_two_bounds(tmp_path, capsys):
    ref = tmp_path / "ref.tfr"
    run(capsys, "phantom", "--preset", "disk", "--size", 16, "-o", ref)
    assert run(capsys, "eval", "--ref", ref, "--est", ref, "--window", "-100")[0] == 1
    assert run(capsys, "eval", "--ref", ref, "--est", ref, "--window", "-100,0,100")[0] == 1


def test_bad_grid_exits_with_input_error(tmp_path, capsys):
    description = tmp_path / "disk.phantom"
    assert run(capsys, "phantom", "--preset", "disk", "--size", 16, "--phantom-out", description,
               "-o", tmp_path / "ref.tfr")[0] == 0
    assert run(capsys, "phantom", "--from", description, "--size", 0, "-o", tmp_path / "bad.tfr")[0] == 2


def test_unavailable_snapshot_exits_with_input_error(tmp_path, capsys):
    ref, counts = tmp_path / "ref.tfr", tmp_path / "counts.tfr"
    run(capsys, "phantom", "--preset", "disk", "--size", 16, "-o", ref)
    run(capsys, "scan", "-i", ref, "--views", 20, "--blank", 1e4, "-o", counts)
    save_model(NeuralNet.initialize([10, 1], 0), tmp_path / "net.tfnn")
    code, _ = run(capsys, "boost-pwls", "-i", counts, "--model", tmp_path / "net.tfnn", "--snapshots", "2,9",
                  "--iters", 4, "--snapshot-every", 2, "--radii", "1,1", "--output-radius", 0, "--size", 16,
                  "-o", tmp_path / "out.tfr")
    assert code == 2
