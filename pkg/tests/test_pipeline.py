"""Pipeline orchestration: TOML parsing, configuration validation, per-stage
seeds, artifact layout, and stage-attributed failures."""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import replace
from datetime import datetime, timedelta, timezone
from pathlib import Path

import pytest

from cloudready.pipeline import (
    STAGES,
    PipelineConfig,
    PipelineConfigError,
    StageError,
    config_from_toml,
    run_pipeline,
    stage_seed,
)
from cloudready.sampling import SamplingConfig
from cloudready.scan import read_corpus, write_corpus

from conftest import make_meta


# ------------------------------------------------------------------ seeds


class TestStageSeed:
    def test_matches_hash_construction(self):
        digest = hashlib.sha256(b"42:cluster").digest()
        assert stage_seed(42, "cluster") == int.from_bytes(digest[:8], "big")

    def test_stages_get_distinct_seeds(self):
        seeds = {stage_seed(42, s) for s in ("cluster", "sample", "train")}
        assert len(seeds) == 3

    def test_master_seed_changes_every_stage(self):
        assert stage_seed(1, "sample") != stage_seed(2, "sample")

    def test_deterministic(self):
        assert stage_seed(7, "train") == stage_seed(7, "train")

    def test_fits_in_64_bits(self):
        assert 0 <= stage_seed(42, "sample") < 2**64


# ----------------------------------------------------------- config object


class TestPipelineConfig:
    def _valid(self, tmp_path, **overrides):
        corpus = tmp_path / "corpus.jsonl"
        corpus.touch()
        kwargs = dict(
            output_dir=tmp_path / "out",
            corpus_path=corpus,
            content_root=tmp_path,
        )
        kwargs.update(overrides)
        return PipelineConfig(**kwargs)

    def test_valid_defaults(self, tmp_path):
        config = self._valid(tmp_path)
        assert config.x_threshold == 0.01
        assert config.y_threshold == 0.5
        assert config.seed == 42
        assert config.now is None

    def test_requires_exactly_one_input_source(self, tmp_path):
        with pytest.raises(PipelineConfigError, match="exactly one of"):
            PipelineConfig(output_dir=tmp_path / "out")
        with pytest.raises(PipelineConfigError, match="exactly one of"):
            self._valid(tmp_path, volume_roots=(("vol01", tmp_path),))

    def test_corpus_needs_content_root(self, tmp_path):
        corpus = tmp_path / "corpus.jsonl"
        corpus.touch()
        with pytest.raises(PipelineConfigError, match="content_root is required"):
            PipelineConfig(output_dir=tmp_path / "out", corpus_path=corpus)

    @pytest.mark.parametrize(
        "overrides, message",
        [
            ({"label_mode": "fuzzy"}, "label_mode must be"),
            ({"label_threshold": 1.5}, r"label_threshold must be in \[0, 1\]"),
            ({"depth": 0}, "depth must be >= 1"),
            ({"min_token_count": 0}, "min_token_count must be >= 1"),
            ({"x_threshold": -0.1}, "x_threshold must be >= 0"),
            ({"y_threshold": -0.2}, r"y_threshold must be in \[0, 1\]"),
            ({"now": datetime(2025, 6, 1)}, "now must be timezone-aware"),
        ],
    )
    def test_rejects_invalid_values(self, tmp_path, overrides, message):
        with pytest.raises(PipelineConfigError, match=message):
            self._valid(tmp_path, **overrides)


# ------------------------------------------------------------ TOML parsing


def write_toml(path: Path, text: str) -> Path:
    path.write_text(text, encoding="utf-8")
    return path


class TestConfigFromToml:
    def test_minimal_config_resolves_against_toml_directory(self, small_gen, tmp_path):
        toml = write_toml(
            tmp_path / "run.toml",
            f"""
[input]
corpus = "{small_gen.corpus_path}"
content_root = "{small_gen.root / 'volumes'}"

[run]
output_dir = "out"
""",
        )
        config = config_from_toml(toml)
        assert config.corpus_path == small_gen.corpus_path
        assert config.content_root == small_gen.root / "volumes"
        # relative output_dir resolves next to the TOML file
        assert config.output_dir == tmp_path / "out"
        assert config.seed == 42 and config.now is None
        assert config.iops_path is None and config.volume_sizes_path is None

    def test_full_config_round_trip(self, small_gen, tmp_path):
        toml = write_toml(
            tmp_path / "run.toml",
            f"""
[input]
corpus = "{small_gen.corpus_path}"
content_root = "{small_gen.root / 'volumes'}"
iops = "{small_gen.iops_path}"
volume_sizes = "{small_gen.sizes_path}"

[labeling]
mode = "threshold"
threshold = 0.002

[features]
depth = 3
min_token_count = 2

[sampling]
initial_fraction = 0.05
max_fraction = 0.2
file_cluster_k = 4

[training]
family = "LogisticRegression"
C = 0.7
class_weight = "balanced"
folds = 3

[plan]
x_threshold = 0.02
y_threshold = 0.6

[run]
seed = 9
output_dir = "out"
now = "2025-07-01T00:00:00+00:00"
""",
        )
        config = config_from_toml(toml)
        assert config.label_mode == "threshold"
        assert config.label_threshold == 0.002
        assert config.depth == 3 and config.min_token_count == 2
        assert config.sampling.initial_fraction == 0.05
        assert config.sampling.max_fraction == 0.2
        assert config.sampling.file_cluster_k == 4
        assert config.training.family == "LogisticRegression"
        assert config.training.C == 0.7
        assert config.training.class_weight == "balanced"
        assert config.training.folds == 3
        assert config.x_threshold == 0.02 and config.y_threshold == 0.6
        assert config.seed == 9
        assert config.now == datetime(2025, 7, 1, tzinfo=timezone.utc)
        assert config.iops_path == small_gen.iops_path

    def test_naive_now_becomes_utc(self, small_gen, tmp_path):
        toml = write_toml(
            tmp_path / "run.toml",
            f"""
[input]
corpus = "{small_gen.corpus_path}"
content_root = "{small_gen.root / 'volumes'}"

[run]
output_dir = "out"
now = "2025-07-01T12:30:00"
""",
        )
        config = config_from_toml(toml)
        assert config.now == datetime(2025, 7, 1, 12, 30, tzinfo=timezone.utc)

    def test_volume_roots_sorted(self, small_gen, tmp_path):
        volumes = small_gen.root / "volumes"
        toml = write_toml(
            tmp_path / "run.toml",
            f"""
[input.volumes]
vol02 = "{volumes / 'vol02'}"
vol01 = "{volumes / 'vol01'}"

[run]
output_dir = "out"
""",
        )
        config = config_from_toml(toml)
        assert config.volume_roots == (
            ("vol01", volumes / "vol01"),
            ("vol02", volumes / "vol02"),
        )
        assert config.corpus_path is None

    @pytest.mark.parametrize(
        "text, message",
        [
            ("[mystery]\nx = 1\n[run]\noutput_dir='o'", r"unknown section \[mystery\]"),
            (
                "[sampling]\nbanana = 1\n[run]\noutput_dir='o'",
                r"unknown key\(s\) in \[sampling\]: banana",
            ),
            ("[input]\ncorpus = 'c'", r"\[run\] output_dir is required"),
            (
                "[input]\nvolumes = 3\n[run]\noutput_dir='o'",
                "volumes must be a non-empty table",
            ),
            (
                "[input.volumes]\n[run]\noutput_dir='o'",
                "volumes must be a non-empty table",
            ),
            (
                "[run]\noutput_dir='o'\nnow = 'yesterday-ish'",
                "now is not a valid timestamp",
            ),
            ("run = 5\n", r"\[run\] must be a table"),
            ("[run\noutput_dir = 'o'", "invalid TOML"),
        ],
    )
    def test_bad_configs_rejected(self, tmp_path, text, message):
        toml = write_toml(tmp_path / "bad.toml", text)
        with pytest.raises(PipelineConfigError, match=message):
            config_from_toml(toml)

    def test_missing_file_reports_cannot_read(self, tmp_path):
        with pytest.raises(PipelineConfigError, match="cannot read config"):
            config_from_toml(tmp_path / "absent.toml")

    def test_missing_corpus_fails_before_any_work(self, tmp_path):
        toml = write_toml(
            tmp_path / "run.toml",
            "[input]\ncorpus = 'gone.jsonl'\ncontent_root = '.'\n[run]\noutput_dir = 'out'\n",
        )
        with pytest.raises(PipelineConfigError, match="corpus does not exist"):
            config_from_toml(toml)
        assert not (tmp_path / "out").exists()

    def test_content_root_must_be_directory(self, small_gen, tmp_path):
        toml = write_toml(
            tmp_path / "run.toml",
            f"""
[input]
corpus = "{small_gen.corpus_path}"
content_root = "{small_gen.corpus_path}"

[run]
output_dir = "out"
""",
        )
        with pytest.raises(PipelineConfigError, match="content_root is not a directory"):
            config_from_toml(toml)

    def test_bad_training_family_wrapped(self, small_gen, tmp_path):
        toml = write_toml(
            tmp_path / "run.toml",
            f"""
[input]
corpus = "{small_gen.corpus_path}"
content_root = "{small_gen.root / 'volumes'}"

[training]
family = "DeepNet"

[run]
output_dir = "out"
""",
        )
        with pytest.raises(PipelineConfigError, match="family"):
            config_from_toml(toml)


# ------------------------------------------------------------- end to end


@pytest.fixture(scope="module")
def small_run(small_gen, tmp_path_factory):
    out = tmp_path_factory.mktemp("small-run")
    config = PipelineConfig(
        output_dir=out,
        corpus_path=small_gen.corpus_path,
        content_root=small_gen.root / "volumes",
        iops_path=small_gen.iops_path,
        volume_sizes_path=small_gen.sizes_path,
        sampling=SamplingConfig(accuracy_delta_threshold=0.0, max_fraction=0.2),
        seed=42,
    )
    return config, run_pipeline(config)


EXPECTED_PATH_KEYS = {
    "profiles_csv", "profiles_json", "rounds", "featurespec", "train_matrix",
    "train_labels", "model", "predictions", "volume_svg", "volume_csv",
    "user_svg", "user_csv", "scan_reduction", "summary", "timings",
}


class TestRunPipeline:
    def test_every_artifact_written(self, small_run):
        _, result = small_run
        assert set(result.paths) == EXPECTED_PATH_KEYS
        for key, path in result.paths.items():
            assert path.is_file(), f"{key} missing at {path}"
            assert path.stat().st_size > 0, f"{key} is empty"
            assert path.parent == result.output_dir

    def test_result_counts(self, small_gen, small_run):
        _, result = small_run
        assert result.n_files == small_gen.n_files
        assert result.n_volumes == 7
        assert 0 < result.n_training <= result.n_scanned <= result.n_files
        assert result.stop_reason in ("converged", "budget", "exhausted")
        assert sum(result.label_counts.values()) == result.n_files
        assert set(result.label_counts) <= {"Sensitive", "NonSensitive", "Unknown"}

    def test_recommendations_cover_volumes_in_order(self, small_run):
        _, result = small_run
        ids = [r.subject_id for r in result.recommendations]
        assert ids == sorted(ids)
        assert ids == [f"vol{i:02d}" for i in range(1, 8)]

    def test_predictions_schema(self, small_gen, small_run):
        _, result = small_run
        with open(result.paths["predictions"], newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["file_id", "label", "score", "source"]
        body = rows[1:]
        assert len(body) == result.n_files
        corpus_ids = [m.file_id() for m in read_corpus(small_gen.corpus_path)]
        assert [r[0] for r in body] == corpus_ids  # corpus order preserved
        n_scanned = 0
        for file_id, label, score, source in body:
            assert source in ("scanned", "predicted")
            if source == "scanned":
                n_scanned += 1
                assert score == ""
                assert label in ("Sensitive", "NonSensitive", "Unknown")
            else:
                float(score)  # parses
                assert label in ("Sensitive", "NonSensitive")
        assert n_scanned == result.n_scanned

    def test_summary_fields(self, small_run):
        config, result = small_run
        summary = json.loads(result.paths["summary"].read_text(encoding="utf-8"))
        assert summary["files"] == result.n_files
        assert summary["volumes"] == 7
        assert summary["scanned_files"] == result.n_scanned
        assert summary["training_files"] == result.n_training
        assert summary["stop_reason"] == result.stop_reason
        assert summary["rounds"] >= 1
        assert summary["label_counts"] == result.label_counts
        assert sum(summary["quadrants"].values()) == 7
        assert summary["x_threshold"] == config.x_threshold
        assert summary["y_threshold"] == config.y_threshold
        assert summary["seed"] == 42
        datetime.fromisoformat(summary["now"])  # parses back

    def test_default_now_is_newest_mtime_plus_one_day(self, small_gen, small_run):
        _, result = small_run
        summary = json.loads(result.paths["summary"].read_text(encoding="utf-8"))
        newest = max(m.last_modified for m in read_corpus(small_gen.corpus_path))
        assert datetime.fromisoformat(summary["now"]) == newest + timedelta(days=1)

    def test_timings_cover_every_stage(self, small_run):
        _, result = small_run
        timings = json.loads(result.paths["timings"].read_text(encoding="utf-8"))
        assert set(timings["stages"]) == set(STAGES)
        assert all(v >= 0.0 for v in timings["stages"].values())
        assert timings["total_files"] == result.n_files
        assert timings["scanned_files"] == result.n_scanned
        assert timings["sample_scan_seconds"] >= 0.0
        assert timings["remainder_predict_seconds"] >= 0.0
        expected_full = (
            timings["sample_scan_seconds"] * result.n_files / result.n_scanned
        )
        assert timings["estimated_full_scan_seconds"] == pytest.approx(expected_full)
        assert result.timings.keys() == timings["stages"].keys()

    def test_scan_reduction_report_shape(self, small_run):
        _, result = small_run
        report = json.loads(result.paths["scan_reduction"].read_text(encoding="utf-8"))
        assert "overall" in report
        overall = report["overall"]
        assert 0.0 <= overall["rescan_fraction"] <= 1.0
        assert overall["total"] == sum(
            v for k, v in result.label_counts.items() if k != "Unknown"
        )
        if "in_sample_estimate" in report:
            est = report["in_sample_estimate"]
            assert est["truth_sample_size"] > 0

    def test_rerun_is_byte_identical_on_deterministic_artifacts(
        self, small_run, tmp_path_factory
    ):
        config, result = small_run
        out2 = tmp_path_factory.mktemp("small-rerun")
        second = run_pipeline(replace(config, output_dir=out2))
        for key in sorted(EXPECTED_PATH_KEYS - {"timings"}):
            a = result.paths[key].read_bytes()
            b = second.paths[key].read_bytes()
            assert a == b, f"{key} differs between identical runs"

    def test_volume_roots_mode_scans_disk(self, small_gen, tmp_path):
        volumes = small_gen.root / "volumes"
        config = PipelineConfig(
            output_dir=tmp_path / "out",
            volume_roots=(
                ("vol01", volumes / "vol01"),
                ("vol02", volumes / "vol02"),
            ),
            # One full-budget round: tiny early rounds on a 110-file corpus
            # can repeat a degenerate accuracy and converge with a
            # single-class sample.
            sampling=SamplingConfig(
                initial_fraction=0.3, max_fraction=0.3, file_cluster_k=4
            ),
            seed=42,
        )
        result = run_pipeline(config)
        files = read_corpus(small_gen.corpus_path)
        expected = sum(1 for m in files if m.volume_id in ("vol01", "vol02"))
        assert result.n_files == expected
        assert result.n_volumes == 2
        assert {r.subject_id for r in result.recommendations} == {"vol01", "vol02"}


# ---------------------------------------------------------- stage failures


class TestStageErrors:
    def test_corrupt_corpus_fails_in_read(self, tmp_path):
        corpus = tmp_path / "corpus.jsonl"
        corpus.write_text("this is not json\n", encoding="utf-8")
        config = PipelineConfig(
            output_dir=tmp_path / "out", corpus_path=corpus, content_root=tmp_path
        )
        with pytest.raises(StageError, match="stage 'read' failed") as info:
            run_pipeline(config)
        assert info.value.stage == "read"

    def test_empty_corpus_fails_in_read(self, tmp_path):
        corpus = tmp_path / "corpus.jsonl"
        write_corpus([], corpus)
        config = PipelineConfig(
            output_dir=tmp_path / "out", corpus_path=corpus, content_root=tmp_path
        )
        with pytest.raises(StageError, match="corpus is empty") as info:
            run_pipeline(config)
        assert info.value.stage == "read"

    def test_unscannable_content_fails_in_sample(self, tmp_path):
        """Metadata without matching content files labels everything Unknown,
        which the sampler rejects — attributed to the sample stage, with the
        artifacts of completed stages left behind."""
        corpus = tmp_path / "corpus.jsonl"
        write_corpus([make_meta(file_name=f"f{i}.txt") for i in range(40)], corpus)
        empty_root = tmp_path / "no-content"
        empty_root.mkdir()
        out = tmp_path / "out"
        config = PipelineConfig(
            output_dir=out,
            corpus_path=corpus,
            content_root=empty_root,
            sampling=SamplingConfig(file_cluster_k=2),
        )
        with pytest.raises(StageError, match="stage 'sample' failed") as info:
            run_pipeline(config)
        assert info.value.stage == "sample"
        assert (out / "profiles.csv").is_file()  # earlier stage output survives
