"""
Property suites run at reduced sizes
"""

import pandas as pd
import pytest

from services import verify_service
from services.errors import ConfigError
from services.seq_models import SensitivityProfile
from services.verify_service import SUITES, PropertyCheck, depth_bound_spread, run_suites


@pytest.fixture
def small_suites(monkeypatch):
    monkeypatch.setattr(verify_service, "suite_size", lambda full_size: min(full_size, 3))
    monkeypatch.setattr(verify_service, "VERIFY_STREAM_EXHAUSTIVE_MAX_EDGES", 3)


class TestSuites:
    @pytest.mark.parametrize("name", [
        "graph-oracles",
        "tokenizers",
        "hac-depth",
        "hac-mst",
        "hac-pe",
        "color-count",
        "jacobians",
        "attention",
        "motif-counts",
        "stream-vs-unionfind",
        "hybrid",
    ])
    def test_suite_passes(self, small_suites, name):
        outcome = run_suites(name, seed=0)
        assert outcome.results
        assert all(r.suite == name for r in outcome.results)
        assert outcome.failed == 0, [r.counterexample for r in outcome.results if not r.passed]

    def test_sensitivity_emits_profile(self):
        outcome = run_suites("sensitivity", seed=0)
        assert outcome.failed == 0
        frame = outcome.frames["sensitivity_profile"]
        assert list(frame.columns) == ["n", "layers", "i", "norm", "surrogate", "ratio"]
        assert set(frame["layers"]) == {1, 2, 3}

    def test_depth_bound_fails_when_norms_outgrow_envelope(self, monkeypatch):
        def inflated_profile(stack, n):
            L = len(stack)
            frame = pd.DataFrame({"i": range(2, n), "norm": n ** 4 / 10.0 ** L, "surrogate": 1.0, "ratio": 1.0})
            return SensitivityProfile(n=n, layers=L, frame=frame, first_token_norm=0.0)

        monkeypatch.setattr(verify_service, "sensitivity_profile", inflated_profile)
        outcome = run_suites("sensitivity", seed=0)
        verdicts = {r.prop: r.passed for r in outcome.results}
        assert verdicts["decreases-with-depth"]
        assert verdicts["single-layer-ratio-band"]
        assert not verdicts["depth-bound-fitted-constant"]

    def test_locality_emits_trials(self, small_suites):
        outcome = run_suites("hac-locality", seed=0)
        frame = outcome.frames["locality_trials"]
        assert list(frame.columns) == ["trial", "n", "hac_bfs", "random"]
        assert len(frame) == 3

    def test_unknown_suite(self):
        with pytest.raises(ConfigError, match="hybrid"):
            run_suites("hybrd", seed=0)

    def test_registry_names(self):
        assert "all" not in SUITES
        assert len(SUITES) == 13


class TestPropertyCheck:
    def test_keeps_first_counterexample(self):
        check = PropertyCheck("s", "p")
        check.record(True)
        check.record(False, "first")
        check.record(False, lambda: "second")
        result = check.result()
        assert not result.passed
        assert result.instances == 3
        assert result.counterexample == "first"

    def test_lazy_counterexample_only_built_on_failure(self):
        built = []
        check = PropertyCheck("s", "p")
        check.record(True, lambda: built.append(1) or "x")
        assert not built
        assert check.result().passed


class TestDepthBoundSpread:
    def test_exact_envelope_has_no_spread(self):
        norms = {n: 3.0 / n ** 2 for n in (8, 16, 32)}
        assert depth_bound_spread(norms, 2) == pytest.approx(1.0)

    def test_spread_measured_against_shortest_length(self):
        # norm * n**1 doubles per doubling of n
        norms = {8: 1.0, 16: 1.0, 32: 1.0}
        assert depth_bound_spread(norms, 1) == pytest.approx(4.0)
        assert depth_bound_spread(norms, 3) == pytest.approx(64.0)

    def test_shrinking_norms_count_too(self):
        norms = {8: 1.0 / 8, 16: 1.0 / (16 * 50)}
        assert depth_bound_spread(norms, 1) == pytest.approx(50.0)
