import csv
import json
import subprocess
import sys

import pytest

from trigdet.cli import main
from trigdet.synth import SynthConfig, synth_config_to_dict

# Tiny ensemble so CLI tests stay fast.
TINY = SynthConfig(n_steps=40, n_ranks=2, points_per_rank=128, t_ignite=20,
                   window_halfwidth=6, post_ignite_spread_rate=2.0, seed=99)


@pytest.fixture()
def tiny_config(tmp_path):
    path = tmp_path / "tiny.json"
    path.write_text(json.dumps(synth_config_to_dict(TINY)))
    return path


@pytest.fixture()
def tiny_manifest(tmp_path, tiny_config):
    out = tmp_path / "data"
    assert main(["synth", "--config", str(tiny_config), "--out", str(out), "--no-plot"]) == 0
    return out / "synth_manifest.json"


def run_ok(argv):
    assert main(argv) == 0


class TestSynth:
    def test_writes_manifest_ground_truth_sidecar_figure(self, tmp_path, tiny_config):
        out = tmp_path / "out"
        run_ok(["synth", "--config", str(tiny_config), "--out", str(out)])
        assert (out / "synth_manifest.json").exists()
        assert (out / "synth_groundtruth.json").exists()
        assert (out / "synth.config.json").exists()
        assert (out / "synth_percentiles.png").exists()
        truth = json.loads((out / "synth_groundtruth.json").read_text())
        assert (truth["t_lo"], truth["t_hi"]) == (14, 26)

    def test_default_config_without_file(self, tmp_path):
        out = tmp_path / "out"
        run_ok(["synth", "--out", str(out), "--n-steps", "30", "--n-ranks", "2",
                "--points-per-rank", "64", "--t-ignite", "15", "--window-halfwidth", "5",
                "--no-plot"])
        manifest = json.loads((out / "synth_manifest.json").read_text())
        assert manifest["n_steps"] == 30
        assert manifest["rank_lengths"] == [64, 64]

    def test_invalid_config_exits_2_naming_field(self, tmp_path, capsys):
        out = tmp_path / "out"
        code = main(["synth", "--out", str(out), "--t-ignite", "500"])
        assert code == 2
        assert "t_ignite" in capsys.readouterr().err

    def test_same_seed_identical_bytes(self, tmp_path, tiny_config):
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            run_ok(["synth", "--config", str(tiny_config), "--out", str(out)])
            outs.append(out)
        files_a = sorted(p.name for p in outs[0].iterdir())
        files_b = sorted(p.name for p in outs[1].iterdir())
        assert files_a == files_b
        for name in files_a:
            assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes(), name


class TestIndicator:
    def test_c_indicator_csv(self, tmp_path, tiny_manifest):
        out = tmp_path / "c.csv"
        run_ok(["indicator", "--manifest", str(tiny_manifest), "--out", str(out),
                "--kind", "C", "--alpha", "0.92", "--beta", "0.99", "--variant", "cov",
                "--no-plot"])
        with out.open() as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["timestep", "value", "defined"]
        assert len(rows) == 1 + TINY.n_steps
        assert out.with_name("c.config.json").exists()

    def test_p_indicator_values_in_unit_interval(self, tmp_path, tiny_manifest):
        out = tmp_path / "p.csv"
        run_ok(["indicator", "--manifest", str(tiny_manifest), "--out", str(out),
                "--kind", "P", "--alpha", "0.94", "--beta", "0.98", "--gamma", "0.01",
                "--no-plot"])
        with out.open() as fh:
            rows = list(csv.reader(fh))[1:]
        defined = [float(r[1]) for r in rows if r[2] == "1"]
        assert defined and all(0.0 <= v <= 1.0 for v in defined)

    def test_synth_config_source_renders_window(self, tmp_path, tiny_config):
        out = tmp_path / "c.csv"
        run_ok(["indicator", "--synth-config", str(tiny_config), "--out", str(out)])
        assert out.with_suffix(".png").exists()

    def test_missing_manifest_exits_1(self, tmp_path):
        code = main(["indicator", "--manifest", str(tmp_path / "nope.json"),
                     "--out", str(tmp_path / "x.csv"), "--no-plot"])
        assert code == 1

    def test_two_sources_rejected(self, tmp_path, tiny_config, tiny_manifest):
        code = main(["indicator", "--manifest", str(tiny_manifest),
                     "--synth-config", str(tiny_config),
                     "--out", str(tmp_path / "x.csv"), "--no-plot"])
        assert code == 2


class TestTrigger:
    def test_report_schema_and_classification(self, tmp_path, tiny_config):
        out = tmp_path / "report.json"
        run_ok(["trigger", "--synth-config", str(tiny_config), "--out", str(out),
                "--tau", "0.05"])
        doc = json.loads(out.read_text())
        assert set(doc) == {"fired", "fire_timestep", "tau", "direction",
                            "confirm_steps", "classification"}
        assert doc["fired"] is True
        assert doc["classification"] in ("in_window", "early")

    def test_from_csv_with_window(self, tmp_path):
        csv_path = tmp_path / "series.csv"
        rows = ["timestep,value,defined"] + [f"{t},{0.005 if t < 7 else 0.02},1" for t in range(12)]
        csv_path.write_text("\n".join(rows) + "\n")
        out = tmp_path / "report.json"
        run_ok(["trigger", "--from-csv", str(csv_path), "--out", str(out),
                "--tau", "0.01", "--window", "5", "9"])
        doc = json.loads(out.read_text())
        assert doc["fire_timestep"] == 7
        assert doc["classification"] == "in_window"

    def test_from_csv_conflicts_with_manifest(self, tmp_path, tiny_manifest):
        code = main(["trigger", "--from-csv", str(tmp_path / "s.csv"),
                     "--manifest", str(tiny_manifest),
                     "--out", str(tmp_path / "r.json"), "--tau", "0.01"])
        assert code == 2


class TestSweeps:
    def test_tau_grid_arithmetic(self, tmp_path, tiny_config):
        out = tmp_path / "sweep.csv"
        run_ok(["sweep-tau", "--synth-config", str(tiny_config), "--out", str(out),
                "--tau-min", "0.01", "--tau-max", "0.05", "--tau-step", "0.005",
                "--no-plot"])
        with out.open() as fh:
            rows = list(csv.reader(fh))
        assert len(rows) == 1 + 9
        summary = json.loads(out.with_suffix(".summary.json").read_text())
        assert len(summary["entries"]) == 9

    def test_tau_list(self, tmp_path, tiny_config):
        out = tmp_path / "sweep.csv"
        run_ok(["sweep-tau", "--synth-config", str(tiny_config), "--out", str(out),
                "--tau", "0.03,0.05", "--no-plot"])
        with out.open() as fh:
            assert len(list(csv.reader(fh))) == 3

    def test_sweep_samples_row_count(self, tmp_path, tiny_config):
        out = tmp_path / "ks.csv"
        run_ok(["sweep-samples", "--synth-config", str(tiny_config), "--out", str(out),
                "--k", "4,8", "--realizations", "3", "--tau", "0.05", "--no-plot"])
        with out.open() as fh:
            rows = list(csv.reader(fh))
        assert len(rows) == 1 + 2 * 3
        summary = json.loads(out.with_suffix(".summary.json").read_text())
        assert [e["k_per_rank"] for e in summary["entries"]] == [4, 8]
        assert [e["k_total"] for e in summary["entries"]] == [8, 16]

    def test_bad_k_rejected(self, tmp_path, tiny_config):
        code = main(["sweep-samples", "--synth-config", str(tiny_config),
                     "--out", str(tmp_path / "x.csv"), "--k", "4,banana",
                     "--tau", "0.05", "--no-plot"])
        assert code == 2


class TestAdaptive:
    def test_trace_with_one_switch(self, tmp_path, tiny_config):
        out = tmp_path / "trace.csv"
        run_ok(["adaptive", "--synth-config", str(tiny_config), "--out", str(out),
                "--tau", "0.05", "--coarse-every", "10", "--fine-every", "1",
                "--no-plot"])
        with out.open() as fh:
            rows = list(csv.reader(fh))[1:]
        states = [r[1] for r in rows]
        switches = sum(1 for a, b in zip(states, states[1:]) if a != b)
        assert switches == 1
        assert states[0] == "coarse" and states[-1] == "fine"


def test_module_entrypoint_runs():
    proc = subprocess.run([sys.executable, "-m", "trigdet", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    for sub in ("synth", "indicator", "trigger", "sweep-tau", "sweep-samples", "adaptive"):
        assert sub in proc.stdout


def test_subcommand_help_documents_defaults():
    proc = subprocess.run([sys.executable, "-m", "trigdet", "indicator", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "0.92" in proc.stdout and "0.99" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "trigdet", "sweep-tau", "--help"],
                          capture_output=True, text=True)
    assert "[0.01, 0.05]" in proc.stdout
