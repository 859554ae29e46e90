"""
Command-line surface, driven through click's test runner
"""

import json

import pandas as pd
import pytest
from click.testing import CliRunner

from cli import cli
from models import PropertyResult
from services import verify_service
from services.verify_service import SuiteOutcome
from storage import read_encoded, read_graph, read_layers, read_mot_assignment, read_tokenization


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def invoke(runner, tmp_path):
    def _invoke(*args, out_dir=None):
        return runner.invoke(cli, ["--out-dir", str(out_dir or tmp_path), *args], obj={})
    return _invoke


class TestGenerate:
    def test_same_seed_same_bytes(self, invoke, tmp_path):
        first, second = tmp_path / "a", tmp_path / "b"
        for out in (first, second):
            result = invoke("--seed", "5", "generate", "--kind", "er", "--n", "12", "--p", "0.3", out_dir=out)
            assert result.exit_code == 0, result.output
        for name in ("graph.json", "labels.json"):
            assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_command_seed_overrides_global(self, invoke, tmp_path):
        invoke("--seed", "3", "generate", "--n", "9", out_dir=tmp_path / "global")
        invoke("generate", "--n", "9", "--seed", "3", out_dir=tmp_path / "local")
        assert (tmp_path / "global" / "graph.json").read_bytes() == (tmp_path / "local" / "graph.json").read_bytes()

    def test_split_cycles_label(self, invoke, tmp_path):
        result = invoke("generate", "--kind", "cycles", "--n", "8", "--split")
        assert result.exit_code == 0, result.output
        labels = json.loads((tmp_path / "labels.json").read_text())
        assert labels["connected"] is False
        assert labels["cycle_check"] is True

    def test_palette_attached(self, invoke, tmp_path):
        invoke("generate", "--kind", "grid", "--rows", "2", "--cols", "3", "--colors", "3")
        g = read_graph(tmp_path / "graph.json")
        assert g.colors is not None and all(0 <= c < 3 for c in g.colors)

    def test_unknown_generator_is_usage_error(self, invoke):
        assert invoke("generate", "--kind", "regulr").exit_code == 2

    def test_odd_regular_is_usage_error(self, invoke):
        assert invoke("generate", "--kind", "regular", "--n", "5", "--d", "3").exit_code == 2


class TestTokenize:
    def graph(self, invoke, *args):
        result = invoke("generate", *args)
        assert result.exit_code == 0, result.output

    def test_hac_dfs_on_k2(self, invoke, tmp_path):
        self.graph(invoke, "--kind", "path", "--n", "2")
        result = invoke("tokenize", "--graph", str(tmp_path / "graph.json"), "--method", "hac-dfs", "--pe")
        assert result.exit_code == 0, result.output
        tok = read_tokenization(tmp_path / "tokenization.json")
        assert [len(seq) for seq in tok.sequences] == [2, 2]
        assert (tmp_path / "hac_tree.json").exists()
        assert pd.read_csv(tmp_path / "pe.csv").shape == (4, 4)

    def test_khop_on_k3(self, invoke, tmp_path):
        self.graph(invoke, "--kind", "cycles", "--n", "3")
        invoke("tokenize", "--graph", str(tmp_path / "graph.json"), "--method", "khop", "--k", "2")
        tok = read_tokenization(tmp_path / "tokenization.json")
        assert [len(seq) for seq in tok.sequences] == [3, 3, 3]

    def test_mot_routes_by_weights(self, invoke, tmp_path):
        self.graph(invoke, "--kind", "path", "--n", "4", "--coordinates")
        weights = tmp_path / "router.json"
        weights.write_text(json.dumps({"weights": [[-1.0, 0.0, 1.0]]}))
        result = invoke("tokenize", "--graph", str(tmp_path / "graph.json"), "--method", "mot",
                        "--weights", str(weights))
        assert result.exit_code == 0, result.output
        assignment = read_mot_assignment(tmp_path / "mot.json")
        assert assignment.top2 == ((0, 1), (2, 1), (2, 1), (2, 1))

    def test_mot_writes_concatenated_encodings(self, invoke, tmp_path):
        self.graph(invoke, "--kind", "path", "--n", "4", "--coordinates")
        weights = tmp_path / "router.json"
        weights.write_text(json.dumps({"weights": [[-1.0, 0.0, 1.0]]}))
        result = invoke("tokenize", "--graph", str(tmp_path / "graph.json"), "--method", "mot",
                        "--weights", str(weights), "--d-local", "3")
        assert result.exit_code == 0, result.output
        [record] = read_encoded(tmp_path / "mot_encoded.bin")
        assert record.vectors.shape == (4, 6)
        assert record.provenance == read_graph(tmp_path / "graph.json").fingerprint()

    def test_mot_needs_weights(self, invoke, tmp_path):
        self.graph(invoke, "--kind", "path", "--n", "4")
        assert invoke("tokenize", "--graph", str(tmp_path / "graph.json"), "--method", "mot").exit_code == 2

    def test_unknown_method(self, invoke, tmp_path):
        self.graph(invoke, "--kind", "path", "--n", "4")
        result = invoke("tokenize", "--graph", str(tmp_path / "graph.json"), "--method", "hac-bsf")
        assert result.exit_code == 2

    def test_missing_graph_file(self, invoke, tmp_path):
        assert invoke("tokenize", "--graph", str(tmp_path / "absent.json")).exit_code == 2

    def test_encode_node_tokens(self, invoke, tmp_path):
        self.graph(invoke, "--kind", "grid", "--rows", "2", "--cols", "2")
        invoke("tokenize", "--graph", str(tmp_path / "graph.json"), "--method", "node")
        result = invoke("encode", "--graph", str(tmp_path / "graph.json"),
                        "--tokenization", str(tmp_path / "tokenization.json"), "--d-local", "5")
        assert result.exit_code == 0, result.output
        encoded = read_encoded(tmp_path / "encoded.bin")
        assert len(encoded) == 4
        assert all(seq.vectors.shape == (1, 5) for seq in encoded)


class TestRun:
    def test_metrics_csv(self, invoke, tmp_path):
        result = invoke("run", "--task", "color_counts", "--instances", "3", "--n", "8")
        assert result.exit_code == 0, result.output
        frame = pd.read_csv(tmp_path / "metrics.csv")
        assert "wall_time_s" not in frame.columns
        assert frame.loc[0, "exact_match_rate"] == 1.0

    def test_metrics_json_with_timing(self, invoke, tmp_path):
        result = invoke("--format", "json", "run", "--task", "connectivity", "--instances", "2", "--n", "8", "--timing")
        assert result.exit_code == 0, result.output
        [row] = json.loads((tmp_path / "metrics.json").read_text())
        assert row["method"] == "stream-hac-bfs"
        assert row["wall_time_s"] >= 0.0

    def test_connectivity_writes_stream_reports(self, invoke, tmp_path):
        result = invoke("run", "--task", "connectivity", "--instances", "3", "--n", "8")
        assert result.exit_code == 0, result.output
        reports = json.loads((tmp_path / "stream_reports.json").read_text())
        assert [r["instance"] for r in reports] == [0, 1, 2]
        assert set(reports[0]) == {"instance", "connected", "violations", "max_window", "peak_labels"}
        assert all(not r["violations"] for r in reports)

    def test_other_tasks_write_no_stream_reports(self, invoke, tmp_path):
        assert invoke("run", "--task", "color_counts", "--instances", "2", "--n", "6").exit_code == 0
        assert not (tmp_path / "stream_reports.json").exists()

    def test_config_file(self, invoke, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"seed": 4, "task": "motif", "pattern": "path3", "instances": 2,
                                    "generator_params": {"n": 7, "p": 0.3}}))
        assert invoke("run", "--config", str(path)).exit_code == 0
        assert pd.read_csv(tmp_path / "metrics.csv").loc[0, "task"] == "motif"

    def test_embedding_writes_vector_and_model(self, invoke, tmp_path):
        result = invoke("run", "--task", "embedding", "--n", "8", "--d-local", "4")
        assert result.exit_code == 0, result.output
        [vector] = read_encoded(tmp_path / "embedding.bin")
        assert vector.vectors.shape == (1, 4)
        assert len(read_layers(tmp_path / "model.bin")) == 3

    def test_unknown_task(self, invoke):
        assert invoke("run", "--task", "colour_counts").exit_code == 2


class TestVerify:
    def test_passing_suite(self, invoke, tmp_path, monkeypatch):
        monkeypatch.setattr(verify_service, "suite_size", lambda full_size: 2)
        result = invoke("verify", "--suite", "hac-mst")
        assert result.exit_code == 0, result.output
        report = pd.read_csv(tmp_path / "verify_report.csv")
        assert report["passed"].all()

    def test_failing_property_exits_one(self, invoke, tmp_path, monkeypatch):
        failing = PropertyResult(suite="hybrid", prop="p", passed=False, instances=1, counterexample="{}")
        monkeypatch.setitem(verify_service.SUITES, "hybrid", lambda seed: SuiteOutcome(results=[failing]))
        assert invoke("verify", "--suite", "hybrid").exit_code == 1
        assert (tmp_path / "verify_report.csv").exists()

    def test_frames_written(self, invoke, tmp_path):
        assert invoke("verify", "--suite", "sensitivity").exit_code == 0
        assert (tmp_path / "sensitivity_profile.csv").exists()

    def test_unknown_suite(self, invoke):
        assert invoke("verify", "--suite", "nope").exit_code == 2


class TestBench:
    def test_bench_table(self, invoke, tmp_path):
        result = invoke("bench", "--sizes", "8,12", "--repeats", "1")
        assert result.exit_code == 0, result.output
        frame = pd.read_csv(tmp_path / "bench.csv")
        assert list(frame.columns) == ["component", "n", "edges", "wall_time_s"]
        assert sorted(set(frame["n"])) == [8, 12]

    def test_bad_sizes(self, invoke):
        assert invoke("bench", "--sizes", "8,x").exit_code == 2
