"""Command-line interface: every subcommand end to end on tiny inputs."""

import os
import subprocess
import sys

import numpy as np
import pytest

from alignet.cli import main

FAST = [
    "--d-emb", "4", "--d-hidden", "4", "--heads", "1", "--epochs", "10",
    "--dropout", "0.0", "--lr", "0.02", "--seed", "3",
]
TINY_SRC = ["--synthetic", "--n1", "14", "--n2", "14", "--anchor-frac", "0.8",
            "--divergence", "0.2", "--out-degree", "3"]


def run_cli(args, capsys):
    rc = main(args)
    out, err = capsys.readouterr()
    return rc, out, err


class TestGenerate:
    def test_writes_three_tsv_files(self, tmp_path, capsys):
        out_dir = str(tmp_path / "pair")
        rc, _, err = run_cli(["generate", "--n1", "12", "--n2", "12", "--anchor-frac",
                              "0.5", "--seed", "1", "--out-dir", out_dir], capsys)
        assert rc == 0
        for name in ("g1.tsv", "g2.tsv", "anchors.tsv"):
            assert os.path.exists(os.path.join(out_dir, name))
        # generated files load back through the normal ingestion path
        import alignet as al
        pair = al.load_aligned_pair(os.path.join(out_dir, "g1.tsv"),
                                    os.path.join(out_dir, "g2.tsv"),
                                    os.path.join(out_dir, "anchors.tsv"))
        assert pair.anchor_count == 6


class TestEvaluateCommand:
    def test_csv_to_stdout_with_config_echo(self, capsys):
        rc, out, _ = run_cli(["evaluate", *FAST, *TINY_SRC, "--lambda", "0.6"], capsys)
        assert rc == 0
        lines = out.strip().split("\n")
        assert lines[0].startswith("# config: ")
        assert lines[1] == "lambda,seed,auc_soc1,auc_soc2,auc_anchor"
        fields = lines[2].split(",")
        assert float(fields[0]) == 0.6
        assert int(fields[1]) == 3
        for v in fields[2:]:
            assert 0.0 <= float(v) <= 1.0

    def test_byte_identical_reports(self, capsys):
        _, out1, _ = run_cli(["evaluate", *FAST, *TINY_SRC], capsys)
        _, out2, _ = run_cli(["evaluate", *FAST, *TINY_SRC], capsys)
        assert out1 == out2

    def test_out_file(self, tmp_path, capsys):
        out_path = str(tmp_path / "report.csv")
        rc, out, _ = run_cli(["evaluate", *FAST, *TINY_SRC, "--out", out_path], capsys)
        assert rc == 0
        assert out == ""
        assert open(out_path).read().startswith("# config: ")


class TestTrainCommand:
    def test_checkpoint_trace_and_resume(self, tmp_path, capsys):
        ck = str(tmp_path / "model.npz")
        trace = str(tmp_path / "trace.csv")
        split_out = str(tmp_path / "split.txt")
        rc, _, err = run_cli(["train", *FAST, *TINY_SRC, "--checkpoint", ck,
                              "--trace", trace, "--split-out", split_out], capsys)
        assert rc == 0
        assert os.path.exists(ck)
        lines = open(trace).read().strip().split("\n")
        assert lines[0] == "epoch,l_soc1,l_soc2,l_anchor,l_reg,total"
        assert len(lines) == 11
        assert os.path.exists(split_out)
        # resume for a few more epochs
        ck2 = str(tmp_path / "model2.npz")
        rc, _, err = run_cli(["train", *FAST, *TINY_SRC, "--epochs", "14",
                              "--checkpoint", ck2, "--resume", ck], capsys)
        assert rc == 0
        assert "resuming" in err
        from alignet.train import load_checkpoint
        _, _, epoch = load_checkpoint(ck2)
        assert epoch == 14


class TestExportEmbeddings:
    def test_tsv_output(self, tmp_path, capsys):
        out = str(tmp_path / "emb.tsv")
        rc, _, _ = run_cli(["export-embeddings", *FAST, *TINY_SRC, "--out", out], capsys)
        assert rc == 0
        rows = open(out).read().strip().split("\n")
        assert len(rows) == 14 * 2 * 2
        net, node, role, *vals = rows[0].split("\t")
        assert net == "1" and role in ("in", "re")
        assert len(vals) == 4


class TestGridCommands:
    def test_sweep_csv(self, capsys):
        rc, out, _ = run_cli(["sweep", *FAST, *TINY_SRC, "--axis", "alpha",
                              "--values", "0,1", "--repeats", "1"], capsys)
        assert rc == 0
        lines = out.strip().split("\n")
        assert lines[0].startswith("# sweep axis=alpha")
        assert lines[1].split(",")[0] == "alpha"
        assert len(lines) == 4

    def test_sweep_d_axis_casts_to_int(self, capsys):
        rc, out, _ = run_cli(["sweep", *FAST, *TINY_SRC, "--axis", "d",
                              "--values", "2,4", "--repeats", "1"], capsys)
        assert rc == 0
        assert out.splitlines()[2].startswith("2,")

    def test_hypothesis_grid(self, capsys):
        rc, out, _ = run_cli(["hypothesis-grid", *FAST, *TINY_SRC, "--epochs", "5",
                              "--repeats", "1"], capsys)
        assert rc == 0
        body = out.strip().split("\n")
        assert len(body) == 6  # comment, header, 4 modes
        assert body[2].startswith("sc+ac,")

    def test_ablation(self, capsys):
        rc, out, _ = run_cli(["ablation", *FAST, *TINY_SRC, "--epochs", "5",
                              "--repeats", "1"], capsys)
        assert rc == 0
        body = out.strip().split("\n")
        assert len(body) == 5  # comment, header, 3 arms
        assert body[2].startswith("initiator-only,")


class TestFileDataPath:
    def test_evaluate_from_generated_files(self, tmp_path, capsys):
        out_dir = str(tmp_path / "pair")
        run_cli(["generate", "--n1", "14", "--n2", "14", "--anchor-frac", "0.8",
                 "--divergence", "0.2", "--seed", "1", "--out-dir", out_dir], capsys)
        rc, out, _ = run_cli([
            "evaluate", *FAST,
            "--g1", os.path.join(out_dir, "g1.tsv"),
            "--g2", os.path.join(out_dir, "g2.tsv"),
            "--anchors", os.path.join(out_dir, "anchors.tsv"),
        ], capsys)
        assert rc == 0
        assert "auc_soc1" in out

    def test_missing_file_flags_rejected(self, capsys):
        with pytest.raises(SystemExit):
            main(["evaluate", "--g1", "only_one.tsv"])


class TestConsoleEntry:
    def test_module_invocation(self):
        proc = subprocess.run(
            [sys.executable, "-m", "alignet.cli", "evaluate", *FAST, *TINY_SRC],
            capture_output=True, text=True, timeout=300,
        )
        assert proc.returncode == 0
        assert "auc_soc1" in proc.stdout
