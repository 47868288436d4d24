"""Config validation and end-to-end CLI behaviour."""

import hashlib
import json
import os
import stat

import pytest
from click.testing import CliRunner

from rapidpoints.cli import main
from rapidpoints.config import ConfigError, ExperimentConfig, auto_beta_schedule


class TestAutoBetaSchedule:
    def test_canonical_values(self):
        sched = auto_beta_schedule(0.5, 3)
        assert sched == pytest.approx([0.225, 0.3375, 0.39375], abs=1e-12)

    def test_strictly_below_alpha(self):
        for alpha in (0.3, 0.5, 0.9):
            sched = auto_beta_schedule(alpha, 6)
            assert all(0 < b < alpha for b in sched)
            assert all(a < b for a, b in zip(sched, sched[1:]))


class TestExperimentConfig:
    def test_defaults_validate(self):
        cfg = ExperimentConfig()
        cfg.validate()
        assert cfg.u_max == 256.0**3
        assert cfg.gamma == pytest.approx(0.375)

    def test_field_errors_named(self):
        cfg = ExperimentConfig(alpha=1.5, N=1, stages=0, osc_depth=7)
        with pytest.raises(ConfigError) as exc:
            cfg.validate()
        fields = {f for f, _ in exc.value.errors}
        assert {"alpha", "N", "stages", "osc_depth"} <= fields

    def test_beta_at_least_alpha_rejected(self):
        cfg = ExperimentConfig(alpha=0.5, stages=2, beta_schedule=[0.4, 0.5])
        with pytest.raises(ConfigError) as exc:
            cfg.validate()
        assert any(f == "beta_schedule" for f, _ in exc.value.errors)

    def test_decreasing_betas_rejected(self):
        cfg = ExperimentConfig(alpha=0.9, stages=2, beta_schedule=[0.4, 0.3])
        with pytest.raises(ConfigError):
            cfg.validate()

    def test_schedule_length_checked(self):
        cfg = ExperimentConfig(stages=3, beta_schedule=[0.2])
        with pytest.raises(ConfigError):
            cfg.validate()

    def test_unknown_field_rejected(self):
        with pytest.raises(ConfigError) as exc:
            ExperimentConfig.from_dict({"alpha": 0.5, "betaa": [0.3]})
        assert exc.value.errors == [("betaa", "unknown field")]

    def test_materialized_resolves_schedule(self):
        d = ExperimentConfig(alpha=0.5, stages=2).materialized()
        assert d["beta_schedule_resolved"] == pytest.approx([0.225, 0.3375])
        assert d["beta_schedule"] == "auto"

    def test_error_payload_shape(self):
        try:
            ExperimentConfig(alpha=2.0).validate()
        except ConfigError as err:
            payload = err.to_json()
        assert payload["error"] == "invalid-config"
        assert payload["fields"][0]["field"] == "alpha"


def write_config(path, **overrides):
    base = {
        "N": 64,
        "stages": 1,
        "beta_schedule": [0.3],
        "alpha": 0.5,
        "ensemble": 5,
        "master_seed": 11,
        "probability_trials": 2000,
        "u_max": 64.0,
        "points_per_decade": 16,
        "write_run_files": True,
    }
    base.update(overrides)
    with open(path, "w") as fh:
        json.dump(base, fh)
    return path


def tree_digest(root):
    h = hashlib.sha256()
    for dirpath, dirnames, filenames in sorted(os.walk(root)):
        dirnames.sort()
        for name in sorted(filenames):
            p = os.path.join(dirpath, name)
            h.update(os.path.relpath(p, root).encode())
            with open(p, "rb") as fh:
                h.update(fh.read())
    return h.hexdigest()


class TestCli:
    def test_construct_minimal(self, tmp_path):
        cfg = write_config(tmp_path / "cfg.json")
        out = tmp_path / "out"
        result = CliRunner().invoke(main, ["construct", "--config", str(cfg), "--out", str(out)])
        assert result.exit_code == 0, result.output
        summary = json.loads((out / "summary.json").read_text())
        assert len(summary["runs"]) == 5
        assert len((out / "runs.jsonl").read_text().splitlines()) == 5

    def test_invalid_beta_exit_2(self, tmp_path):
        cfg = write_config(tmp_path / "cfg.json", beta_schedule=[0.6])
        result = CliRunner().invoke(main, ["construct", "--config", str(cfg), "--out", str(tmp_path / "o")])
        assert result.exit_code == 2
        payload = json.loads(result.output.strip().splitlines()[0])
        assert payload["error"] == "invalid-config"
        assert payload["fields"][0]["field"] == "beta_schedule"

    def test_byte_identical_reruns(self, tmp_path):
        import shutil

        cfg = write_config(tmp_path / "cfg.json")
        out = tmp_path / "out"
        digests = []
        for _ in range(2):
            result = CliRunner().invoke(main, ["spectrum", "--config", str(cfg), "--out", str(out)])
            assert result.exit_code == 0, result.output
            digests.append(tree_digest(out))
            shutil.rmtree(out)
        assert digests[0] == digests[1]

    def test_verify_exit_0(self, tmp_path):
        out = tmp_path / "verification.json"
        result = CliRunner().invoke(main, ["verify", "--out", str(out)])
        assert result.exit_code == 0, result.output
        doc = json.loads(out.read_text())
        assert doc["holds_all"] is True

    def test_simulate_writes_csvs(self, tmp_path):
        cfg = write_config(tmp_path / "cfg.json", ensemble=2)
        out = tmp_path / "paths"
        result = CliRunner().invoke(
            main, ["simulate", "--config", str(cfg), "--out", str(out), "--resolution", "64"]
        )
        assert result.exit_code == 0, result.output
        files = sorted(os.listdir(out))
        assert files == ["path_0000.csv", "path_0001.csv"]
        first = (out / files[0]).read_text().splitlines()
        assert first[0] == "t,x"
        assert first[1].startswith("0.0,0.0")
        assert len(first) == 66

    def test_report_renders_outputs(self, tmp_path):
        cfg = write_config(tmp_path / "cfg.json", ensemble=3)
        out = tmp_path / "out"
        assert CliRunner().invoke(main, ["spectrum", "--config", str(cfg), "--out", str(out)]).exit_code == 0
        result = CliRunner().invoke(main, ["report", "--out", str(out)])
        assert result.exit_code == 0, result.output
        names = os.listdir(out)
        assert any(n.endswith(".png") for n in names)
        assert any(n.endswith(".csv") for n in names)

    def test_unwritable_output_exit_3(self, tmp_path):
        cfg = write_config(tmp_path / "cfg.json")
        locked = tmp_path / "locked"
        locked.mkdir()
        locked.chmod(stat.S_IRUSR | stat.S_IXUSR)
        if os.access(locked, os.W_OK):
            pytest.skip("running as privileged user; cannot make directory unwritable")
        result = CliRunner().invoke(
            main, ["construct", "--config", str(cfg), "--out", str(locked / "sub")]
        )
        assert result.exit_code == 3
        assert json.loads(result.output.strip())["error"] == "unwritable-output"

    def test_seed_override(self, tmp_path):
        cfg = write_config(tmp_path / "cfg.json")
        out1, out2 = tmp_path / "s1", tmp_path / "s2"
        CliRunner().invoke(main, ["construct", "--config", str(cfg), "--out", str(out1), "--seed", "99"])
        CliRunner().invoke(main, ["construct", "--config", str(cfg), "--out", str(out2), "--seed", "99"])
        s1 = json.loads((out1 / "summary.json").read_text())
        s2 = json.loads((out2 / "summary.json").read_text())
        assert s1["config"]["master_seed"] == 99
        assert s1["runs"] == s2["runs"]
