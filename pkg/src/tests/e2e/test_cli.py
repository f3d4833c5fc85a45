import json

import pytest
from click.testing import CliRunner

from src.infrastructure.storage.run_store import read_jsonl
from src.interfaces.cli.commands import cli
from src.tests.conftest import small_config, write_config


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def config_file(tmp_path, monkeypatch):
    for name in ("IGFT_CHAT_ENDPOINT", "IGFT_EMBEDDING_ENDPOINT", "LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
    return str(write_config(tmp_path / "run.yaml", small_config(tmp_path)))


def run_dirs(tmp_path, kind):
    root = tmp_path / "runs"
    if not root.exists():
        return set()
    return {path for path in root.iterdir() if path.name.startswith(f"{kind}-")}


def invoke_new_run(runner, tmp_path, kind, args):
    before = run_dirs(tmp_path, kind)
    result = runner.invoke(cli, args)
    assert result.exit_code == 0, result.output
    (run_dir,) = run_dirs(tmp_path, kind) - before
    return result, run_dir


def final_params(run_dir):
    return json.loads((run_dir / "checkpoints" / "final.json").read_text(encoding="utf-8"))["params"]


class TestGen:
    def test_zero_cases(self, runner, config_file, tmp_path):
        out = tmp_path / "zero.jsonl"
        result = runner.invoke(cli, ["gen", "--config", config_file, "-n", "0", "--out", str(out)])
        assert result.exit_code == 0, result.output
        assert "Wrote 0 cases" in result.output
        assert out.read_text(encoding="utf-8") == ""

    def test_same_seed_same_file(self, runner, config_file, tmp_path):
        first, second = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        for out in (first, second):
            result = runner.invoke(cli, ["gen", "--config", config_file, "-n", "4", "--seed", "9", "--out", str(out)])
            assert result.exit_code == 0, result.output
        assert first.read_bytes() == second.read_bytes()
        assert len(first.read_text(encoding="utf-8").splitlines()) == 4

    def test_defaults_to_configured_case_file(self, runner, config_file, tmp_path):
        result = runner.invoke(cli, ["gen", "--config", config_file])
        assert result.exit_code == 0, result.output
        assert len(read_jsonl(str(tmp_path / "cases.jsonl"))) == 3


class TestTrain:
    def test_artifacts(self, runner, config_file, tmp_path):
        _, run_dir = invoke_new_run(runner, tmp_path, "train", ["train", "--config", config_file])
        assert len(read_jsonl(str(run_dir / "metrics.jsonl"))) == 4
        assert (run_dir / "config.yaml").exists()
        assert (run_dir / "checkpoints" / "final.json").exists()

    def test_metrics_are_byte_identical(self, runner, config_file, tmp_path):
        _, first = invoke_new_run(runner, tmp_path, "train", ["train", "--config", config_file])
        _, second = invoke_new_run(runner, tmp_path, "train", ["train", "--config", config_file])
        assert (first / "metrics.jsonl").read_bytes() == (second / "metrics.jsonl").read_bytes()
        assert final_params(first) == final_params(second)

    def test_resume(self, runner, config_file, tmp_path):
        _, full = invoke_new_run(runner, tmp_path, "train", ["train", "--config", config_file])
        midway = str(full / "checkpoints" / "epoch-0001.json")
        _, resumed = invoke_new_run(
            runner, tmp_path, "train", ["train", "--config", config_file, "--resume", midway]
        )
        assert read_jsonl(str(resumed / "metrics.jsonl")) == read_jsonl(str(full / "metrics.jsonl"))[2:]
        assert final_params(resumed) == final_params(full)

    def test_missing_resume_checkpoint(self, runner, config_file, tmp_path):
        result = runner.invoke(cli, ["train", "--config", config_file, "--resume", str(tmp_path / "absent.json")])
        assert result.exit_code == 4


class TestEval:
    def test_oracle(self, runner, config_file, tmp_path):
        result, run_dir = invoke_new_run(
            runner, tmp_path, "eval", ["eval", "--config", config_file, "--policy", "oracle"]
        )
        assert "mean ± std" in result.output
        records = read_jsonl(str(run_dir / "eval.jsonl"))
        assert len(records) == 6
        assert all(record["recall"] == 1.0 for record in records)

    def test_trained_checkpoint(self, runner, config_file, tmp_path):
        _, train_dir = invoke_new_run(runner, tmp_path, "train", ["train", "--config", config_file])
        checkpoint = str(train_dir / "checkpoints" / "final.json")
        _, run_dir = invoke_new_run(
            runner,
            tmp_path,
            "eval",
            ["eval", "--config", config_file, "--policy", "checkpoint", "--checkpoint", checkpoint],
        )
        assert len(read_jsonl(str(run_dir / "eval.jsonl"))) == 6

    def test_checkpoint_policy_needs_a_file(self, runner, config_file):
        result = runner.invoke(cli, ["eval", "--config", config_file, "--policy", "checkpoint"])
        assert result.exit_code == 3
        assert "Invalid configuration" in result.output


class TestSimulate:
    def test_transcript_replays(self, runner, config_file):
        args = ["simulate", "syn-0-0000", "--config", config_file, "--seed", "1"]
        first = runner.invoke(cli, args)
        second = runner.invoke(cli, args)
        assert first.exit_code == 0, first.output
        assert first.stdout == second.stdout
        assert "Turn 1" in first.stdout
        assert "Episode IG:" in first.stdout
        assert "F1" in first.stdout

    def test_unknown_case(self, runner, config_file):
        result = runner.invoke(cli, ["simulate", "no-such-case", "--config", config_file])
        assert result.exit_code == 4


class TestReport:
    def test_outputs(self, runner, config_file, tmp_path):
        _, run_dir = invoke_new_run(runner, tmp_path, "train", ["train", "--config", config_file])
        out_dir = tmp_path / "report"
        result = runner.invoke(cli, ["report", str(run_dir / "metrics.jsonl"), "--out-dir", str(out_dir)])
        assert result.exit_code == 0, result.output
        for name in ("reward_vs_epoch.png", "ig_vs_epoch.png", "summary.txt"):
            assert (out_dir / name).stat().st_size > 0
        assert "Training summary" in (out_dir / "summary.txt").read_text(encoding="utf-8")

    def test_default_output_is_a_new_directory(self, runner, config_file, tmp_path):
        _, run_dir = invoke_new_run(runner, tmp_path, "train", ["train", "--config", config_file])
        before = {path.name: path.read_bytes() for path in run_dir.iterdir() if path.is_file()}
        for _ in range(2):
            result = runner.invoke(cli, ["report", str(run_dir / "metrics.jsonl")])
            assert result.exit_code == 0, result.output
        reports = sorted(path for path in run_dir.iterdir() if path.name.startswith("report-"))
        assert len(reports) == 2
        assert all((report / "summary.txt").exists() for report in reports)
        after = {path.name: path.read_bytes() for path in run_dir.iterdir() if path.is_file()}
        assert after == before

    def test_refuses_to_replace_a_report(self, runner, config_file, tmp_path):
        _, run_dir = invoke_new_run(runner, tmp_path, "train", ["train", "--config", config_file])
        out_dir = tmp_path / "report"
        out_dir.mkdir()
        (out_dir / "summary.txt").write_text("keep me", encoding="utf-8")
        result = runner.invoke(cli, ["report", str(run_dir / "metrics.jsonl"), "--out-dir", str(out_dir)])
        assert result.exit_code == 4
        assert (out_dir / "summary.txt").read_text(encoding="utf-8") == "keep me"
        assert not (out_dir / "reward_vs_epoch.png").exists()

    def test_empty_metrics(self, runner, tmp_path):
        metrics = tmp_path / "metrics.jsonl"
        metrics.write_text("", encoding="utf-8")
        assert runner.invoke(cli, ["report", str(metrics)]).exit_code == 4

    def test_missing_metrics(self, runner, tmp_path):
        assert runner.invoke(cli, ["report", str(tmp_path / "absent.jsonl")]).exit_code == 4


class TestFailures:
    def test_invalid_config(self, runner, tmp_path):
        raw = small_config(tmp_path, grpo={"tau": 0.0})
        path = str(write_config(tmp_path / "bad.yaml", raw))
        result = runner.invoke(cli, ["train", "--config", path])
        assert result.exit_code == 3
        assert "Invalid configuration" in result.output
        assert "grpo.tau" in result.output

    def test_invalid_category_registry(self, runner, tmp_path):
        raw = small_config(tmp_path)
        raw["categories"] = [{"label": "symptom", "weight": 3.0}]
        path = str(write_config(tmp_path / "bad.yaml", raw))
        result = runner.invoke(cli, ["gen", "--config", path])
        assert result.exit_code == 3
        assert "categories" in result.output

    def test_missing_config_file(self, runner, tmp_path):
        result = runner.invoke(cli, ["gen", "--config", str(tmp_path / "absent.yaml")])
        assert result.exit_code == 3

    def test_remote_without_endpoint(self, runner, config_file):
        result = runner.invoke(cli, ["eval", "--config", config_file, "--policy", "oracle", "--remote", "assessor"])
        assert result.exit_code == 3
        assert "remote.chat_endpoint" in result.output

    def test_version(self, runner):
        result = runner.invoke(cli, ["--version"])
        assert result.exit_code == 0
        assert "1.0.0" in result.output
