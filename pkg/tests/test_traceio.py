"""Serialization round-trips and the atomic-write contract."""

import json
import os

import pytest

from bsmix.ddim_schedule import ScheduleConfig, build_schedule
from bsmix.metrics import aggregate
from bsmix.mixer import MixerConfig, Strategy, run_strategy
from bsmix.score_sim import SimEnvConfig, SimEnvironment
from bsmix.traceio import (
    SUMMARY_COLUMNS,
    atomic_write_text,
    summaries_to_csv,
    trace_csv_header,
    trace_from_dict,
    trace_to_csv,
    trace_to_dict,
    trace_to_json,
)


@pytest.fixture(scope="module")
def trace():
    env = SimEnvironment(SimEnvConfig((0.2, 0.3), noise_vol=0.03))
    cfg = MixerConfig(num_prompts=2, total_steps=5)
    schedule = build_schedule(ScheduleConfig(num_train_steps=1000, num_inference_steps=5))
    return run_strategy(env, Strategy("black_scholes"), cfg, schedule, seed=2)


class TestJson:
    def test_roundtrip_is_exact(self, trace):
        assert trace_from_dict(trace_to_dict(trace)) == trace
        assert trace_from_dict(json.loads(trace_to_json(trace))) == trace

    def test_json_shape(self, trace):
        payload = json.loads(trace_to_json(trace))
        assert payload["strategy"] == "black_scholes"
        assert payload["seed"] == 2
        assert len(payload["decisions"]) == 5
        first = payload["decisions"][0]
        assert set(first) == {
            "step", "raw_scores", "spot_prices", "sigma", "tte", "bs_scores", "chosen",
        }

    def test_ends_with_newline(self, trace):
        assert trace_to_json(trace).endswith("\n")

    def test_bad_payload_rejected(self, trace):
        payload = trace_to_dict(trace)
        del payload["decisions"]
        with pytest.raises((KeyError, ValueError, TypeError)):
            trace_from_dict(payload)


class TestCsv:
    def test_header_matches_width(self, trace):
        header = trace_csv_header(2)
        assert header.split(",") == [
            "step", "raw_0", "raw_1", "spot_0", "spot_1",
            "sigma", "tte", "bs_0", "bs_1", "chosen",
        ]

    def test_rows_roundtrip_floats(self, trace):
        lines = trace_to_csv(trace).strip().split("\n")
        assert lines[0] == trace_csv_header(2)
        assert len(lines) == 6
        row = lines[1].split(",")
        # repr-formatted floats parse back exactly
        assert float(row[1]) == trace.decisions[0].raw_scores[0]
        assert float(row[7]) == trace.decisions[0].bs_scores[0]
        assert int(row[-1]) == trace.decisions[0].chosen

    def test_summary_csv(self, trace):
        (summary,) = aggregate([trace])
        text = summaries_to_csv([summary])
        lines = text.strip().split("\n")
        assert lines[0].split(",")[: len(SUMMARY_COLUMNS)] == list(SUMMARY_COLUMNS)
        row = lines[1].split(",")
        assert row[0] == "black_scholes"
        assert int(row[1]) == 1
        assert float(row[2]) == summary.balance_mean


class TestAtomicWrite:
    def test_writes_and_replaces(self, tmp_path):
        target = tmp_path / "out.txt"
        atomic_write_text(target, "one\n")
        atomic_write_text(target, "two\n")
        assert target.read_text() == "two\n"
        # no stray temp files left behind
        assert os.listdir(tmp_path) == ["out.txt"]

    def test_failure_leaves_no_partial_file(self, tmp_path):
        target = tmp_path / "sub" / "out.txt"  # parent missing
        with pytest.raises(OSError):
            atomic_write_text(target, "data")
        assert not target.exists()
        assert os.listdir(tmp_path) == []
