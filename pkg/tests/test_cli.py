import subprocess
import sys

import numpy as np
import pytest

from featpost import read_features, read_labels, read_model
from featpost.cli import main

SYNTH = ["synth", "--n-per-class", "60", "--n-classes", "3", "--dim", "12",
         "--offset-norm", "4", "--spike-variances", "30,12", "--class-sep", "5",
         "--seed", "7"]


def _synth(tmp_path, extra=()):
    feat = tmp_path / "data.fpf"
    labels = tmp_path / "labels.txt"
    rc = main(SYNTH + ["--output", str(feat), "--labels", str(labels)] + list(extra))
    assert rc == 0
    return feat, labels


def test_synth_writes_expected_files(tmp_path):
    feat, labels = _synth(tmp_path)
    F = read_features(feat)
    y = read_labels(labels)
    assert F.shape == (180, 12)
    assert y.shape == (180,)
    assert set(y.tolist()) == {0, 1, 2}


def test_fit_transform_pipeline_improves_isotropy(tmp_path, capsys):
    feat, labels = _synth(tmp_path)
    model = tmp_path / "model.fpm"
    post = tmp_path / "post.fpf"
    assert main(["fit", "--input", str(feat), "--model", str(model), "--t", "2"]) == 0
    summary_out = capsys.readouterr().out
    assert "mean_norm = " in summary_out
    assert main(["transform", "--input", str(feat), "--model", str(model),
                 "--output", str(post)]) == 0

    assert main(["isotropy", "--input", str(feat)]) == 0
    before = _parse_value(capsys.readouterr().out, "m_empirical")
    assert main(["isotropy", "--input", str(post)]) == 0
    after = _parse_value(capsys.readouterr().out, "m_empirical")
    assert after > before


def test_transform_with_t0_model_is_demeaning(tmp_path):
    feat, labels = _synth(tmp_path)
    model = tmp_path / "m0.fpm"
    out = tmp_path / "out.fpf"
    assert main(["fit", "--input", str(feat), "--model", str(model), "--t", "0"]) == 0
    assert main(["transform", "--input", str(feat), "--model", str(model),
                 "--output", str(out)]) == 0
    F = read_features(feat)
    np.testing.assert_array_equal(read_features(out), F - F.mean(axis=0))


def test_model_file_reload_transform_identical(tmp_path):
    feat, _ = _synth(tmp_path)
    model_path = tmp_path / "m.fpm"
    a, b = tmp_path / "a.fpf", tmp_path / "b.fpf"
    assert main(["fit", "--input", str(feat), "--model", str(model_path),
                 "--t", "1"]) == 0
    assert main(["transform", "--input", str(feat), "--model", str(model_path),
                 "--output", str(a)]) == 0
    assert main(["transform", "--input", str(feat), "--model", str(model_path),
                 "--output", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    model = read_model(model_path)
    assert model.t_ == 1


def test_eval_and_verify_reports(tmp_path, capsys):
    feat, labels = _synth(tmp_path)
    assert main(["eval", "--input", str(feat), "--labels", str(labels),
                 "--t", "2", "--seed", "3"]) == 0
    out = capsys.readouterr().out
    assert "accuracy_before = " in out and "accuracy_after = " in out
    assert main(["verify", "--input", str(feat), "--labels", str(labels),
                 "--t", "2", "--pairs", "40", "--format", "machine"]) == 0
    out = capsys.readouterr().out
    assert '"evaluator": "pair_verify"' in out


def test_eval_knn_flags(tmp_path, capsys):
    feat, labels = _synth(tmp_path)
    assert main(["eval", "--input", str(feat), "--labels", str(labels),
                 "--evaluator", "knn", "--k", "3", "--metric", "cosine",
                 "--t", "1"]) == 0
    assert "evaluator = knn" in capsys.readouterr().out


def test_sweep_table_shape(tmp_path):
    feat, labels = _synth(tmp_path)
    table = tmp_path / "sweep.csv"
    # default --t-max is 10: header plus 11 data rows, monotone t column
    assert main(["sweep", "--input", str(feat), "--labels", str(labels),
                 "--output", str(table)]) == 0
    lines = table.read_text().strip().split("\n")
    assert lines[0] == "t,accuracy_before,accuracy_after,m_empirical"
    assert len(lines) == 12
    ts = [int(line.split(",")[0]) for line in lines[1:]]
    assert ts == list(range(11))


def test_cli_determinism_across_runs(tmp_path):
    (tmp_path / "one").mkdir()
    (tmp_path / "two").mkdir()
    feat1, labels1 = _synth(tmp_path / "one")
    feat2, labels2 = _synth(tmp_path / "two")
    assert feat1.read_bytes() == feat2.read_bytes()
    assert labels1.read_bytes() == labels2.read_bytes()


def test_missing_input_exit_code(tmp_path, capsys):
    rc = main(["fit", "--input", str(tmp_path / "absent.fpf"),
               "--model", str(tmp_path / "m.fpm")])
    assert rc == 3
    assert "file not found" in capsys.readouterr().err


def test_bad_format_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.fpf"
    bad.write_bytes(b"XXXXsomething")
    rc = main(["isotropy", "--input", str(bad)])
    assert rc == 4


def test_invalid_input_exit_code(tmp_path, capsys):
    feat, labels = _synth(tmp_path)
    rc = main(["fit", "--input", str(feat), "--model", str(tmp_path / "m.fpm"),
               "--t", "5", "--pca-dim", "2"])
    assert rc == 5


def test_help_exits_zero_for_every_subcommand():
    commands = ["synth", "fit", "transform", "spectrum", "isotropy",
                "eval", "verify", "sweep"]
    for cmd in commands:
        proc = subprocess.run([sys.executable, "-m", "featpost.cli", cmd, "--help"],
                              capture_output=True, text=True)
        assert proc.returncode == 0, cmd
        assert "--" in proc.stdout


def test_unknown_flag_exit_code():
    proc = subprocess.run([sys.executable, "-m", "featpost.cli", "fit",
                           "--bogus", "x"], capture_output=True, text=True)
    assert proc.returncode == 2


def test_no_subcommand_prints_help():
    proc = subprocess.run([sys.executable, "-m", "featpost.cli"],
                          capture_output=True, text=True)
    assert proc.returncode == 2


def test_spectrum_command(tmp_path, capsys):
    feat, _ = _synth(tmp_path)
    assert main(["spectrum", "--input", str(feat), "--k", "3"]) == 0
    out = capsys.readouterr().out
    assert "eigenvalues = " in out
    assert "norm_ratio = " in out


def _parse_value(text, key):
    for line in text.strip().split("\n"):
        if line.startswith(f"{key} = "):
            return float(line.split(" = ", 1)[1])
    raise AssertionError(f"{key} not found in {text!r}")
