"""End-to-end readiness assessment: scan, sample, train, predict, plan.

One TOML config drives the whole run. Every stage draws its seed from the
master seed through SHA-256, so stage randomness is independent yet the
entire run is reproducible: with a fixed config and corpus, every artifact
except timings.json is byte-identical across reruns.

Configuration errors raise PipelineConfigError before any work starts;
mid-run failures raise StageError naming the stage, and artifacts written
by completed stages are left in place for inspection.
"""

from __future__ import annotations

import csv
import hashlib
import json
import time
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Callable, Mapping, Sequence

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from .cluster import kmeans
from .dictionary import (
    LabelRule,
    SensitivityLabel,
    compile_dictionary,
    label_file,
    load_dictionary_config,
    scan_file,
)
from .features import FeatureSpec, encode_batch, fit_spec, write_labels, write_matrix_csv
from .hotness import aggregate_volume, write_profiles_csv, write_profiles_json
from .learn.model_io import save_model
from .learn.training import TrainConfig, predict, train
from .learn.validate import cross_validate
from .plan import (
    Recommendation,
    classify,
    emit_maps,
    scan_reduction_report,
    user_map,
    volume_scores,
)
from .sampling import SamplingConfig, progressive_sample
from .scan import FileMeta, load_iops, load_volume_sizes, read_corpus, scan_volume

__all__ = [
    "PipelineConfig",
    "PipelineConfigError",
    "PipelineResult",
    "StageError",
    "stage_seed",
    "config_from_toml",
    "run_pipeline",
]

STAGES = ("read", "profile", "cluster", "sample", "features", "train", "predict", "plan", "report")

_UNKNOWN = SensitivityLabel.UNKNOWN.value


class PipelineConfigError(ValueError):
    pass


class StageError(RuntimeError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"stage {stage!r} failed: {message}")
        self.stage = stage


def stage_seed(master_seed: int, stage: str) -> int:
    """Per-stage seed: first 8 bytes of SHA-256("<master>:<stage>")."""
    digest = hashlib.sha256(f"{master_seed}:{stage}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class PipelineConfig:
    """Everything one assessment run needs; see config_from_toml for TOML keys.

    Exactly one of ``corpus_path`` (pre-scanned metadata plus a
    ``content_root`` holding <volume_id>/... trees) or ``volume_roots``
    (live directories to scan, which then double as content roots) must be
    given. ``now`` anchors age percentages; when omitted it defaults to the
    newest last_modified in the corpus plus one day, which keeps reruns on
    a fixed corpus deterministic.
    """

    output_dir: Path
    corpus_path: Path | None = None
    volume_roots: tuple[tuple[str, Path], ...] = ()
    content_root: Path | None = None
    iops_path: Path | None = None
    volume_sizes_path: Path | None = None
    dictionary_path: Path | None = None
    label_mode: str = "any-match"
    label_threshold: float = 0.001
    depth: int = 2
    min_token_count: int = 1
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    training: TrainConfig = field(default_factory=TrainConfig)
    x_threshold: float = 0.01
    y_threshold: float = 0.5
    seed: int = 42
    now: datetime | None = None

    def __post_init__(self):
        if (self.corpus_path is None) == (not self.volume_roots):
            raise PipelineConfigError("exactly one of corpus_path or volume_roots is required")
        if self.corpus_path is not None and self.content_root is None:
            raise PipelineConfigError("content_root is required when reading a corpus file")
        if self.label_mode not in ("any-match", "threshold"):
            raise PipelineConfigError(f"label_mode must be any-match|threshold, got {self.label_mode!r}")
        if not 0.0 <= self.label_threshold <= 1.0:
            raise PipelineConfigError(f"label_threshold must be in [0, 1], got {self.label_threshold}")
        if self.depth < 1:
            raise PipelineConfigError(f"depth must be >= 1, got {self.depth}")
        if self.min_token_count < 1:
            raise PipelineConfigError(f"min_token_count must be >= 1, got {self.min_token_count}")
        if self.x_threshold < 0:
            raise PipelineConfigError(f"x_threshold must be >= 0, got {self.x_threshold}")
        if not 0.0 <= self.y_threshold <= 1.0:
            raise PipelineConfigError(f"y_threshold must be in [0, 1], got {self.y_threshold}")
        if self.now is not None and self.now.tzinfo is None:
            raise PipelineConfigError("now must be timezone-aware")


_TOML_SECTIONS = {
    "input": {"corpus", "volumes", "content_root", "iops", "volume_sizes"},
    "labeling": {"dictionary", "mode", "threshold"},
    "features": {"depth", "min_token_count"},
    "sampling": {
        "initial_fraction", "increment_fraction", "accuracy_delta_threshold",
        "max_fraction", "file_cluster_k", "cluster_vocab_cap", "eval_folds",
    },
    "training": {
        "family", "C", "class_weight", "nb_alpha", "n_trees", "max_depth",
        "bootstrap", "feature_subset", "svm_epochs", "lr_max_iter", "lr_gtol", "folds",
    },
    "plan": {"x_threshold", "y_threshold"},
    "run": {"seed", "output_dir", "now"},
}


def _check_keys(data: Mapping, path: str | Path) -> None:
    for section, table in data.items():
        if section not in _TOML_SECTIONS:
            raise PipelineConfigError(f"{path}: unknown section [{section}]")
        if not isinstance(table, dict):
            raise PipelineConfigError(f"{path}: [{section}] must be a table")
        unknown = set(table) - _TOML_SECTIONS[section]
        if unknown:
            raise PipelineConfigError(
                f"{path}: unknown key(s) in [{section}]: {', '.join(sorted(unknown))}"
            )


def config_from_toml(path: str | Path) -> PipelineConfig:
    """Parse a pipeline TOML file; relative paths resolve against it.

    Sections/keys: [input] corpus, volumes (table id->dir), content_root,
    iops, volume_sizes; [labeling] dictionary, mode, threshold; [features]
    depth, min_token_count; [sampling] and [training] mirror SamplingConfig
    and TrainConfig fields; [plan] x_threshold, y_threshold; [run] seed,
    output_dir, now (RFC 3339).
    """
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise PipelineConfigError(f"cannot read config: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise PipelineConfigError(f"{path}: invalid TOML: {exc}") from exc
    _check_keys(data, path)
    base = path.resolve().parent

    def resolve(p) -> Path:
        p = Path(str(p))
        return p if p.is_absolute() else base / p

    inp = data.get("input", {})
    labeling = data.get("labeling", {})
    feats = data.get("features", {})
    sampling_tbl = data.get("sampling", {})
    training_tbl = data.get("training", {})
    plan_tbl = data.get("plan", {})
    run_tbl = data.get("run", {})

    if "output_dir" not in run_tbl:
        raise PipelineConfigError(f"{path}: [run] output_dir is required")

    volume_roots = ()
    if "volumes" in inp:
        table = inp["volumes"]
        if not isinstance(table, dict) or not table:
            raise PipelineConfigError(f"{path}: [input] volumes must be a non-empty table")
        volume_roots = tuple(sorted((str(k), resolve(v)) for k, v in table.items()))

    now = None
    if "now" in run_tbl:
        try:
            now = datetime.fromisoformat(str(run_tbl["now"]))
        except ValueError as exc:
            raise PipelineConfigError(f"{path}: [run] now is not a valid timestamp") from exc
        if now.tzinfo is None:
            now = now.replace(tzinfo=timezone.utc)

    try:
        sampling = SamplingConfig(**dict(sampling_tbl))
        max_depth = training_tbl.get("max_depth")
        training = TrainConfig(
            family=str(training_tbl.get("family", "RandomForest")),
            C=float(training_tbl["C"]) if "C" in training_tbl else None,
            class_weight=str(training_tbl.get("class_weight", "none")),
            nb_alpha=float(training_tbl.get("nb_alpha", 1.0)),
            n_trees=int(training_tbl.get("n_trees", 10)),
            max_depth=int(max_depth) if max_depth is not None else None,
            bootstrap=bool(training_tbl.get("bootstrap", True)),
            feature_subset=training_tbl.get("feature_subset", "sqrt"),
            svm_epochs=int(training_tbl.get("svm_epochs", 30)),
            lr_max_iter=int(training_tbl.get("lr_max_iter", 1000)),
            lr_gtol=float(training_tbl.get("lr_gtol", 1e-9)),
            folds=int(training_tbl.get("folds", 10)),
        )
        config = PipelineConfig(
            output_dir=resolve(run_tbl["output_dir"]),
            corpus_path=resolve(inp["corpus"]) if "corpus" in inp else None,
            volume_roots=volume_roots,
            content_root=resolve(inp["content_root"]) if "content_root" in inp else None,
            iops_path=resolve(inp["iops"]) if "iops" in inp else None,
            volume_sizes_path=resolve(inp["volume_sizes"]) if "volume_sizes" in inp else None,
            dictionary_path=resolve(labeling["dictionary"]) if "dictionary" in labeling else None,
            label_mode=str(labeling.get("mode", "any-match")),
            label_threshold=float(labeling.get("threshold", 0.001)),
            depth=int(feats.get("depth", 2)),
            min_token_count=int(feats.get("min_token_count", 1)),
            sampling=sampling,
            training=training,
            x_threshold=float(plan_tbl.get("x_threshold", 0.01)),
            y_threshold=float(plan_tbl.get("y_threshold", 0.5)),
            seed=int(run_tbl.get("seed", 42)),
            now=now,
        )
        _check_config_paths(config, path)
        return config
    except PipelineConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise PipelineConfigError(f"{path}: {exc}") from exc


def _check_config_paths(config: PipelineConfig, source: Path) -> None:
    """Referenced inputs must exist before any stage runs."""
    checks: list[tuple[str, Path | None, bool]] = [
        ("corpus", config.corpus_path, False),
        ("content_root", config.content_root, True),
        ("iops", config.iops_path, False),
        ("volume_sizes", config.volume_sizes_path, False),
        ("dictionary", config.dictionary_path, False),
    ]
    checks.extend((f"volumes.{vid}", root, True) for vid, root in config.volume_roots)
    for key, p, want_dir in checks:
        if p is None:
            continue
        if want_dir and not Path(p).is_dir():
            raise PipelineConfigError(f"{source}: {key} is not a directory: {p}")
        if not want_dir and not Path(p).is_file():
            raise PipelineConfigError(f"{source}: {key} does not exist: {p}")


@dataclass
class PipelineResult:
    output_dir: Path
    paths: dict[str, Path]
    n_files: int
    n_volumes: int
    n_scanned: int
    n_training: int
    stop_reason: str
    label_counts: dict[str, int]
    recommendations: list[Recommendation]
    timings: dict[str, float]


def _guarded(stage: str, timings: dict[str, float], fn: Callable):
    start = time.perf_counter()
    try:
        out = fn()
    except StageError:
        raise
    except Exception as exc:
        raise StageError(stage, str(exc)) from exc
    timings[stage] = time.perf_counter() - start
    return out


def run_pipeline(config: PipelineConfig) -> PipelineResult:
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths: dict[str, Path] = {}
    timings: dict[str, float] = {}
    roots = dict(config.volume_roots)

    def content_path(meta: FileMeta) -> Path:
        base = roots[meta.volume_id] if roots else Path(config.content_root) / meta.volume_id
        if meta.path:
            return base / meta.path / meta.file_name
        return base / meta.file_name

    # -- read ------------------------------------------------------------
    def read_stage():
        if config.corpus_path is not None:
            files = read_corpus(config.corpus_path)
        else:
            files = []
            for volume_id, root in config.volume_roots:
                files.extend(scan_volume(root, volume_id).records)
        if not files:
            raise ValueError("corpus is empty")
        iops: dict[str, list] = {}
        if config.iops_path is not None:
            for s in load_iops(config.iops_path):
                iops.setdefault(s.volume_id, []).append(s)
        sizes = (
            load_volume_sizes(config.volume_sizes_path)
            if config.volume_sizes_path is not None
            else {}
        )
        return files, iops, sizes

    files, iops, sizes = _guarded("read", timings, read_stage)
    n = len(files)
    now = config.now or (max(f.last_modified for f in files) + timedelta(days=1))

    # -- profile ----------------------------------------------------------
    def profile_stage():
        by_volume: dict[str, list[FileMeta]] = {}
        for f in files:
            by_volume.setdefault(f.volume_id, []).append(f)
        profiles = [
            aggregate_volume(
                by_volume[v], now, samples=iops.get(v, ()), total_size=sizes.get(v)
            )
            for v in sorted(by_volume)
        ]
        paths["profiles_csv"] = out / "profiles.csv"
        paths["profiles_json"] = out / "profiles.json"
        write_profiles_csv(profiles, paths["profiles_csv"])
        write_profiles_json(profiles, paths["profiles_json"])
        return profiles

    profiles = _guarded("profile", timings, profile_stage)

    # -- cluster ----------------------------------------------------------
    def cluster_stage():
        k = min(config.sampling.file_cluster_k, n)
        cluster_spec = fit_spec(
            files, d=config.depth, max_vocabulary=config.sampling.cluster_vocab_cap
        )
        Xc = encode_batch(files, cluster_spec)
        if k < 2:
            return np.zeros(n, dtype=np.int64), Xc
        result = kmeans(Xc, k, seed=stage_seed(config.seed, "cluster"))
        return result.assignments, Xc

    assignments, X_cluster = _guarded("cluster", timings, cluster_stage)

    # -- sample -----------------------------------------------------------
    scan_seconds = 0.0
    train_cfg = replace(config.training, seed=stage_seed(config.seed, "train"))

    def sample_stage():
        nonlocal scan_seconds
        categories = (
            load_dictionary_config(config.dictionary_path)
            if config.dictionary_path is not None
            else None
        )
        dictionary = compile_dictionary(categories)
        rule = LabelRule(mode=config.label_mode, threshold=config.label_threshold)

        def label_fn(meta: FileMeta) -> SensitivityLabel:
            nonlocal scan_seconds
            start = time.perf_counter()
            result = scan_file(content_path(meta), meta.extension, dictionary, meta.file_id())
            label = label_file(result, rule)
            scan_seconds += time.perf_counter() - start
            return label

        def trainer_fn(ids: list[int], labels: list[str]) -> float:
            counts: dict[str, int] = {}
            for lab in labels:
                counts[lab] = counts.get(lab, 0) + 1
            smallest = min(counts.values())
            if len(counts) < 2 or smallest < 2:
                # Too skewed to cross-validate; report the majority share.
                return max(counts.values()) / len(labels)
            folds = min(config.sampling.eval_folds, smallest)
            cv_cfg = replace(train_cfg, folds=folds)
            return cross_validate(X_cluster[ids], labels, cv_cfg).mean_accuracy

        sampling_cfg = replace(config.sampling, seed=stage_seed(config.seed, "sample"))
        progressive = progressive_sample(files, sampling_cfg, label_fn, trainer_fn, assignments)

        paths["rounds"] = out / "rounds.csv"
        with open(paths["rounds"], "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["round", "cumulative_files", "sensitive", "non_sensitive", "unknown",
                 "accuracy", "stopped", "reason"]
            )
            for r in progressive.rounds:
                writer.writerow(
                    [r.index, len(r.cumulative_ids), r.sensitive, r.non_sensitive,
                     r.unknown, repr(r.accuracy), r.stopped, r.reason]
                )
        return progressive

    progressive = _guarded("sample", timings, sample_stage)

    # -- features ----------------------------------------------------------
    def features_stage():
        train_files = [files[i] for i in progressive.training_indices]
        spec = fit_spec(train_files, d=config.depth, min_token_count=config.min_token_count)
        paths["featurespec"] = out / "featurespec.json"
        spec.save(paths["featurespec"])
        Xtr = encode_batch(train_files, spec)
        paths["train_matrix"] = out / "train_matrix.csv"
        paths["train_labels"] = out / "train_labels.txt"
        write_matrix_csv(Xtr, paths["train_matrix"])
        write_labels(progressive.training_labels, paths["train_labels"])
        return spec, Xtr

    spec, X_train = _guarded("features", timings, features_stage)

    # -- train --------------------------------------------------------------
    def train_stage():
        model = train(
            X_train, progressive.training_labels, train_cfg,
            feature_spec_fingerprint=spec.fingerprint(),
        )
        paths["model"] = out / "model.json"
        save_model(model, paths["model"])
        return model

    model = _guarded("train", timings, train_stage)

    # -- predict -------------------------------------------------------------
    predict_seconds = 0.0

    def predict_stage():
        nonlocal predict_seconds
        scanned = progressive.scanned
        remaining = [i for i in range(n) if i not in scanned]
        start = time.perf_counter()
        if remaining:
            X_rest = encode_batch([files[i] for i in remaining], spec)
            rest_labels, rest_scores = predict(model, X_rest, spec.fingerprint())
        else:
            rest_labels, rest_scores = [], np.zeros(0)
        predict_seconds = time.perf_counter() - start

        final = [""] * n
        scores: list[float | None] = [None] * n
        for i, lab in scanned.items():
            final[i] = lab.value
        for j, i in enumerate(remaining):
            final[i] = rest_labels[j]
            scores[i] = float(rest_scores[j])

        paths["predictions"] = out / "predictions.csv"
        with open(paths["predictions"], "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["file_id", "label", "score", "source"])
            for i, meta in enumerate(files):
                source = "scanned" if i in scanned else "predicted"
                score_cell = "" if scores[i] is None else repr(scores[i])
                writer.writerow([meta.file_id(), final[i], score_cell, source])
        return final

    final_labels = _guarded("predict", timings, predict_stage)

    # -- plan ------------------------------------------------------------------
    def plan_stage():
        scores = volume_scores(files, final_labels)
        hot = {p.volume_id: p.io_density for p in profiles}
        recommendations = classify(scores, hot, config.x_threshold, config.y_threshold)
        points = user_map(files, final_labels, now)
        paths.update(emit_maps(recommendations, points, out, config.x_threshold, config.y_threshold))

        overall = scan_reduction_report([lab for lab in final_labels if lab != _UNKNOWN])
        report_obj = {"overall": json.loads(overall.to_json())}
        scanned_binary = sorted(
            i for i, lab in progressive.scanned.items() if lab is not SensitivityLabel.UNKNOWN
        )
        if scanned_binary:
            X_sc = encode_batch([files[i] for i in scanned_binary], spec)
            model_labels, _ = predict(model, X_sc)
            in_sample = scan_reduction_report(
                model_labels, truth=[progressive.scanned[i].value for i in scanned_binary]
            )
            # In-sample: the model trained on these files, so this estimate
            # of over-protection is optimistic.
            report_obj["in_sample_estimate"] = json.loads(in_sample.to_json())
        paths["scan_reduction"] = out / "scan_reduction.json"
        paths["scan_reduction"].write_text(
            json.dumps(report_obj, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )
        return recommendations

    recommendations = _guarded("plan", timings, plan_stage)

    # -- report ---------------------------------------------------------------
    def report_stage():
        scanned_count = len(progressive.scanned)
        label_counts: dict[str, int] = {}
        for lab in final_labels:
            label_counts[lab] = label_counts.get(lab, 0) + 1
        quadrants: dict[str, int] = {}
        for r in recommendations:
            quadrants[r.quadrant.value] = quadrants.get(r.quadrant.value, 0) + 1

        paths["summary"] = out / "summary.json"
        summary = {
            "files": n,
            "volumes": len(profiles),
            "scanned_files": scanned_count,
            "training_files": len(progressive.training_indices),
            "stop_reason": progressive.stop_reason,
            "rounds": len(progressive.rounds),
            "label_counts": label_counts,
            "quadrants": quadrants,
            "x_threshold": config.x_threshold,
            "y_threshold": config.y_threshold,
            "seed": config.seed,
            "now": now.isoformat(),
        }
        paths["summary"].write_text(
            json.dumps(summary, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )
        return label_counts

    label_counts = _guarded("report", timings, report_stage)

    # Written last, outside any stage, so it can include every stage's time.
    paths["timings"] = out / "timings.json"
    scanned_count = len(progressive.scanned)
    estimated_full = scan_seconds * n / scanned_count if scanned_count else 0.0
    timing_obj = {
        "stages": {k: timings[k] for k in sorted(timings)},
        "total_files": n,
        "scanned_files": scanned_count,
        "sample_scan_seconds": scan_seconds,
        "remainder_predict_seconds": predict_seconds,
        "estimated_full_scan_seconds": estimated_full,
    }
    paths["timings"].write_text(
        json.dumps(timing_obj, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )

    return PipelineResult(
        output_dir=out,
        paths=paths,
        n_files=n,
        n_volumes=len(profiles),
        n_scanned=len(progressive.scanned),
        n_training=len(progressive.training_indices),
        stop_reason=progressive.stop_reason,
        label_counts=label_counts,
        recommendations=recommendations,
        timings=timings,
    )
