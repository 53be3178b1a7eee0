"""Command-line interface.

Subcommands cover each pipeline stage standalone (scan, sample, train,
predict, hotness, plan, features rank, cluster-volumes), the full run
driven by one TOML config (run), and a synthetic-corpus generator
(gen-corpus). Exit codes: 0 success, 2 configuration or usage error,
3 stage failure.
"""

from __future__ import annotations

import csv
import json
import sys
from dataclasses import replace
from datetime import datetime, timedelta, timezone
from pathlib import Path

import click
import numpy as np

from . import __version__
from .cluster import elbow, kmeans, representative, volume_points
from .dictionary import (
    DictionaryError,
    LabelRule,
    SensitivityLabel,
    compile_dictionary,
    label_file,
    load_dictionary_config,
    scan_file,
)
from .features import FeatureSpec, encode_batch, fit_spec, read_labels, read_matrix_csv
from .feature_ranking import top_k
from .hotness import read_profiles_csv, write_profiles_csv, write_profiles_json, aggregate_volume
from .learn.model_io import load_model, save_model
from .learn.training import FAMILIES, TrainConfig, predict as model_predict, train as model_train
from .learn.validate import grid_search
from .pipeline import (
    PipelineConfigError,
    StageError,
    config_from_toml,
    run_pipeline,
    stage_seed,
)
from .plan import classify, emit_maps, scan_reduction_report, user_map, volume_scores
from .sampling import SamplingConfig, progressive_sample
from .scan import (
    CorpusFormatError,
    IopsFormatError,
    load_iops,
    load_volume_sizes,
    read_corpus,
    scan_volume,
    write_corpus,
)
from .synth import GenSpec, generate_corpus

_FAMILY_CHOICE = click.Choice(list(FAMILIES))


class StageFailure(click.ClickException):
    """Processing failed after configuration validated."""

    exit_code = 3


def _fail(exc: Exception) -> "StageFailure":
    return StageFailure(str(exc))


def _parse_now(value: str | None) -> datetime | None:
    if value is None:
        return None
    try:
        now = datetime.fromisoformat(value)
    except ValueError:
        raise click.UsageError(f"--now is not a valid timestamp: {value!r}")
    return now.replace(tzinfo=timezone.utc) if now.tzinfo is None else now


def _default_now(files) -> datetime:
    return max(f.last_modified for f in files) + timedelta(days=1)


def _read_corpus(path: Path):
    try:
        files = read_corpus(path)
    except (OSError, CorpusFormatError) as exc:
        raise _fail(exc)
    if not files:
        raise _fail(ValueError(f"corpus is empty: {path}"))
    return files


def _load_spec(path: Path) -> FeatureSpec:
    try:
        return FeatureSpec.load(path)
    except (OSError, ValueError) as exc:
        raise _fail(exc)


def _load_matrix_labels(matrix_path: Path, labels_path: Path, spec: FeatureSpec):
    try:
        labels = read_labels(labels_path)
        matrix = read_matrix_csv(matrix_path, (len(labels), spec.total_length))
    except (OSError, ValueError) as exc:
        raise _fail(exc)
    return matrix, labels


def _comma_floats(value: str, option: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in value.split(","))
    except ValueError:
        raise click.UsageError(f"{option} expects comma-separated numbers, got {value!r}")


def _comma_ints(value: str, option: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in value.split(","))
    except ValueError:
        raise click.UsageError(f"{option} expects comma-separated integers, got {value!r}")


def _cycle(values: tuple, n: int) -> tuple:
    return tuple(values[i % len(values)] for i in range(n))


@click.group()
@click.version_option(version=__version__, prog_name="cloudready")
def main():
    """Assess file-storage volumes for hybrid-cloud placement."""


# ----------------------------------------------------------------- scan


@main.command()
@click.option("--root", "roots", multiple=True, required=True, metavar="NAME=PATH",
              help="Volume to walk; repeatable.")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True,
              help="Corpus JSON-Lines destination.")
@click.option("--skipped", type=click.Path(dir_okay=False, path_type=Path),
              help="Optional CSV listing unreadable files.")
def scan(roots, out, skipped):
    """Walk volume roots into a metadata corpus."""
    parsed = []
    for spec in roots:
        name, sep, path = spec.partition("=")
        if not sep or not name or not path:
            raise click.UsageError(f"--root expects NAME=PATH, got {spec!r}")
        parsed.append((name, Path(path)))
    records = []
    skips = []
    for name, root in parsed:
        try:
            result = scan_volume(root, name)
        except (OSError, NotADirectoryError) as exc:
            raise _fail(exc)
        records.extend(result.records)
        skips.extend(result.skipped)
        click.echo(f"{name}: {len(result.records)} files ({len(result.skipped)} skipped)")
    out.parent.mkdir(parents=True, exist_ok=True)
    write_corpus(records, out)
    if skipped is not None:
        with open(skipped, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["path", "reason"])
            for s in skips:
                writer.writerow([s.path, s.reason])
    click.echo(f"wrote {len(records)} records to {out}")


# ------------------------------------------------------------ gen-corpus


@main.command("gen-corpus")
@click.argument("dest", type=click.Path(file_okay=False, path_type=Path))
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--volumes", type=int, default=7, show_default=True,
              help="Number of volumes (defaults cycle to fit).")
@click.option("--files-per-volume", metavar="N,N,...",
              help="Per-volume file counts; length must match --volumes.")
@click.option("--sensitive-fractions", metavar="F,F,...",
              help="Per-volume sensitive shares in [0,1].")
@click.option("--signal-strength", type=float, default=0.9, show_default=True,
              help="Probability that each metadata attribute reflects the true class.")
@click.option("--unknown-rate", type=float, default=0.02, show_default=True,
              help="Share of binary (uncrawlable) files.")
@click.option("--hours", type=int, default=24, show_default=True,
              help="Hours of IOPS history per volume.")
@click.option("--quick", is_flag=True, help="Small files for fast demo corpora.")
def gen_corpus(dest, seed, volumes, files_per_volume, sensitive_fractions,
               signal_strength, unknown_rate, hours, quick):
    """Generate a labeled synthetic corpus under DEST (must be empty)."""
    if volumes < 1:
        raise click.UsageError("--volumes must be >= 1")
    defaults = GenSpec()
    counts = _cycle(defaults.files_per_volume, volumes)
    if files_per_volume:
        counts = _comma_ints(files_per_volume, "--files-per-volume")
        if len(counts) != volumes:
            raise click.UsageError(
                f"--files-per-volume lists {len(counts)} values for --volumes={volumes}"
            )
    fractions = _cycle(defaults.sensitive_fractions, volumes)
    if sensitive_fractions:
        fractions = _comma_floats(sensitive_fractions, "--sensitive-fractions")
        if len(fractions) != volumes:
            raise click.UsageError(
                f"--sensitive-fractions lists {len(fractions)} values for --volumes={volumes}"
            )
    sizes = {
        "text_words": (40, 140) if quick else defaults.text_words,
        "binary_bytes": (512, 2048) if quick else defaults.binary_bytes,
    }
    try:
        spec = GenSpec(
            files_per_volume=counts,
            volume_size_gb=_cycle(defaults.volume_size_gb, volumes),
            io_density=_cycle(defaults.io_density, volumes),
            access_age_days=_cycle(defaults.access_age_days, volumes),
            sensitive_fractions=fractions,
            signal_strength=signal_strength,
            unknown_rate=unknown_rate,
            hours=hours,
            seed=seed,
            **sizes,
        )
    except ValueError as exc:
        raise click.UsageError(str(exc))
    try:
        result = generate_corpus(dest, spec)
    except (OSError, ValueError) as exc:
        raise _fail(exc)
    click.echo(
        f"generated {result.n_files} files across {len(result.volume_ids)} volumes "
        f"({result.n_sensitive} sensitive, {result.n_non_sensitive} non-sensitive, "
        f"{result.n_binary} binary) in {result.root}"
    )


# ---------------------------------------------------------------- sample


@main.command()
@click.option("--corpus", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--content-root", type=click.Path(exists=True, file_okay=False, path_type=Path),
              required=True, help="Directory holding <volume_id>/... file trees.")
@click.option("--dictionary", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Detector config (TOML/JSON); defaults to the built-ins.")
@click.option("--mode", type=click.Choice(["any-match", "threshold"]), default="any-match",
              show_default=True)
@click.option("--threshold", type=float, default=0.001, show_default=True,
              help="Match-per-token fraction for threshold mode.")
@click.option("--initial-fraction", type=float, default=0.01, show_default=True)
@click.option("--increment-fraction", type=float, default=0.01, show_default=True)
@click.option("--delta-threshold", type=float, default=0.005, show_default=True,
              help="Round-over-round accuracy change that counts as converged.")
@click.option("--max-fraction", type=float, default=0.10, show_default=True)
@click.option("--cluster-k", type=int, default=8, show_default=True)
@click.option("--vocab-cap", type=int, default=500, show_default=True)
@click.option("--eval-folds", type=int, default=5, show_default=True)
@click.option("--family", type=_FAMILY_CHOICE, default="RandomForest", show_default=True)
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--out-dir", type=click.Path(file_okay=False, path_type=Path), required=True)
def sample(corpus, content_root, dictionary, mode, threshold, initial_fraction,
           increment_fraction, delta_threshold, max_fraction, cluster_k, vocab_cap,
           eval_folds, family, seed, out_dir):
    """Progressively sample and content-scan a corpus.

    Writes rounds.csv (per-round sample sizes, label mix, accuracy) and
    scanned_labels.csv (file_id,label for every scanned file).
    """
    files = _read_corpus(corpus)
    try:
        sampling_cfg = SamplingConfig(
            initial_fraction=initial_fraction,
            increment_fraction=increment_fraction,
            accuracy_delta_threshold=delta_threshold,
            max_fraction=max_fraction,
            file_cluster_k=cluster_k,
            cluster_vocab_cap=vocab_cap,
            seed=stage_seed(seed, "sample"),
            eval_folds=eval_folds,
        )
        categories = load_dictionary_config(dictionary) if dictionary else None
        compiled = compile_dictionary(categories)
        rule = LabelRule(mode=mode, threshold=threshold)
    except (ValueError, DictionaryError) as exc:
        raise click.UsageError(str(exc))

    try:
        k = min(cluster_k, len(files))
        cluster_spec = fit_spec(files, max_vocabulary=vocab_cap)
        X = encode_batch(files, cluster_spec)
        if k >= 2:
            assignments = kmeans(X, k, seed=stage_seed(seed, "cluster")).assignments
        else:
            assignments = np.zeros(len(files), dtype=np.int64)

        def label_fn(meta):
            base = content_root / meta.volume_id
            fs_path = base / meta.path / meta.file_name if meta.path else base / meta.file_name
            return label_file(scan_file(fs_path, meta.extension, compiled, meta.file_id()), rule)

        train_cfg = TrainConfig(family=family, seed=stage_seed(seed, "train"))

        def trainer_fn(ids, labels):
            counts = {}
            for lab in labels:
                counts[lab] = counts.get(lab, 0) + 1
            smallest = min(counts.values())
            if len(counts) < 2 or smallest < 2:
                return max(counts.values()) / len(labels)
            from .learn.validate import cross_validate

            cfg = replace(train_cfg, folds=min(eval_folds, smallest))
            return cross_validate(X[ids], labels, cfg).mean_accuracy

        result = progressive_sample(files, sampling_cfg, label_fn, trainer_fn, assignments)
    except ValueError as exc:
        raise _fail(exc)

    out_dir.mkdir(parents=True, exist_ok=True)
    rounds_path = out_dir / "rounds.csv"
    with open(rounds_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["round", "cumulative_files", "sensitive", "non_sensitive",
                         "unknown", "accuracy", "stopped", "reason"])
        for r in result.rounds:
            writer.writerow([r.index, len(r.cumulative_ids), r.sensitive, r.non_sensitive,
                             r.unknown, repr(r.accuracy), r.stopped, r.reason])
    labels_path = out_dir / "scanned_labels.csv"
    with open(labels_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["file_id", "label"])
        for i in sorted(result.scanned):
            writer.writerow([files[i].file_id(), result.scanned[i].value])
    last = result.rounds[-1]
    click.echo(
        f"stopped after round {last.index} ({last.reason}): "
        f"{len(result.scanned)} files scanned, accuracy {last.accuracy:.4f}"
    )


# ----------------------------------------------------------------- train


@main.command()
@click.option("--matrix", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--labels", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--spec", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--family", type=_FAMILY_CHOICE, default="RandomForest", show_default=True)
@click.option("--c", "c_value", type=float, help="Regularization strength (family default if unset).")
@click.option("--class-weight", type=click.Choice(["none", "balanced"]), default="none",
              show_default=True)
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--folds", type=int, default=10, show_default=True)
@click.option("--grid", metavar="C,C,...",
              help="Grid-search these C values by cross-validated accuracy first.")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
def train(matrix, labels, spec, family, c_value, class_weight, seed, folds, grid, out):
    """Train a sensitivity model from a feature matrix and labels."""
    feature_spec = _load_spec(spec)
    X, labs = _load_matrix_labels(matrix, labels, feature_spec)
    train_seed = stage_seed(seed, "train")
    chosen_C = c_value
    if grid:
        grid_values = _comma_floats(grid, "--grid")
        try:
            result = grid_search(X, labs, family, grid_values, folds=folds, seed=train_seed,
                                 class_weight=class_weight)
        except ValueError as exc:
            raise _fail(exc)
        click.echo("C,mean_cv_accuracy")
        for c, acc in result.table:
            click.echo(f"{c!r},{acc!r}")
        chosen_C = result.best_C
        click.echo(f"best C: {chosen_C!r}")
    try:
        config = TrainConfig(family=family, C=chosen_C, class_weight=class_weight,
                             seed=train_seed, folds=folds)
        model = model_train(X, labs, config, feature_spec_fingerprint=feature_spec.fingerprint())
    except ValueError as exc:
        raise _fail(exc)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, out)
    click.echo(f"trained {family} on {X.shape[0]} rows -> {out}")


# --------------------------------------------------------------- predict


@main.command()
@click.option("--model", "model_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              required=True)
@click.option("--spec", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--corpus", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
def predict(model_path, spec, corpus, out):
    """Predict sensitivity for every corpus file from metadata alone."""
    feature_spec = _load_spec(spec)
    try:
        model = load_model(model_path)
    except (OSError, ValueError) as exc:
        raise _fail(exc)
    files = _read_corpus(corpus)
    try:
        X = encode_batch(files, feature_spec)
        labels, scores = model_predict(model, X, feature_spec.fingerprint())
    except ValueError as exc:
        raise _fail(exc)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["file_id", "label", "score", "source"])
        for meta, label, score in zip(files, labels, scores):
            writer.writerow([meta.file_id(), label, repr(float(score)), "predicted"])
    click.echo(f"predicted {len(files)} files -> {out}")


# --------------------------------------------------------------- hotness


@main.command()
@click.option("--corpus", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--iops", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Hourly IO counts (volume_id,hour_start,io_ops).")
@click.option("--volume-sizes", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="Provisioned capacity (volume_id,provisioned_bytes).")
@click.option("--now", help="Reference time (RFC 3339); default: newest mtime + 1 day.")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
@click.option("--json", "json_out", type=click.Path(dir_okay=False, path_type=Path),
              help="Also write profiles as JSON.")
def hotness(corpus, iops, volume_sizes, now, out, json_out):
    """Aggregate per-volume age/extension/IO-density profiles."""
    files = _read_corpus(corpus)
    reference = _parse_now(now) or _default_now(files)
    try:
        by_volume = {}
        for f in files:
            by_volume.setdefault(f.volume_id, []).append(f)
        samples = {}
        if iops:
            for s in load_iops(iops):
                samples.setdefault(s.volume_id, []).append(s)
        sizes = load_volume_sizes(volume_sizes) if volume_sizes else {}
        profiles = [
            aggregate_volume(by_volume[v], reference, samples=samples.get(v, ()),
                             total_size=sizes.get(v))
            for v in sorted(by_volume)
        ]
    except (IopsFormatError, ValueError, OSError) as exc:
        raise _fail(exc)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_profiles_csv(profiles, out)
    if json_out:
        write_profiles_json(profiles, json_out)
    click.echo(f"profiled {len(profiles)} volumes -> {out}")


# ------------------------------------------------------------------ plan


@main.command()
@click.option("--corpus", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--predictions", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              required=True, help="Per-file labels (file_id,label,score,source).")
@click.option("--profiles", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              required=True, help="Volume profiles CSV from the hotness stage.")
@click.option("--x-threshold", type=float, default=0.01, show_default=True,
              help="IO density below which a volume counts as cold.")
@click.option("--y-threshold", type=float, default=0.5, show_default=True,
              help="Sensitivity score below which a volume counts as shareable.")
@click.option("--now", help="Reference time (RFC 3339); default: newest mtime + 1 day.")
@click.option("--out-dir", type=click.Path(file_okay=False, path_type=Path), required=True)
def plan(corpus, predictions, profiles, x_threshold, y_threshold, now, out_dir):
    """Classify volumes into migration quadrants and draw the maps."""
    files = _read_corpus(corpus)
    reference = _parse_now(now) or _default_now(files)
    try:
        label_by_id = {}
        with open(predictions, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or header[:2] != ["file_id", "label"]:
                raise ValueError(f"bad predictions header in {predictions}")
            for row in reader:
                if row:
                    label_by_id[row[0]] = row[1]
        missing = [f.file_id() for f in files if f.file_id() not in label_by_id]
        if missing:
            raise ValueError(
                f"{len(missing)} corpus files missing from predictions "
                f"(first: {missing[0]})"
            )
        labels = [label_by_id[f.file_id()] for f in files]
        volume_profiles = read_profiles_csv(profiles)
    except (OSError, ValueError) as exc:
        raise _fail(exc)
    if x_threshold < 0 or not 0.0 <= y_threshold <= 1.0:
        raise click.UsageError("need x-threshold >= 0 and y-threshold in [0, 1]")
    try:
        scores = volume_scores(files, labels)
        hot = {p.volume_id: p.io_density for p in volume_profiles}
        recommendations = classify(scores, hot, x_threshold, y_threshold)
        points = user_map(files, labels, reference)
        out_dir.mkdir(parents=True, exist_ok=True)
        emit_maps(recommendations, points, out_dir, x_threshold, y_threshold)
        binary = [lab for lab in labels if lab != SensitivityLabel.UNKNOWN.value]
        if binary:
            report = scan_reduction_report(binary)
            (out_dir / "scan_reduction.json").write_text(
                report.to_json() + "\n", encoding="utf-8"
            )
    except ValueError as exc:
        raise _fail(exc)
    for r in recommendations:
        click.echo(
            f"{r.subject_id}: sensitivity={r.sensitivity:.4f} "
            f"io_density={r.hotness:.6g} -> {r.quadrant.value}"
        )
    click.echo(f"wrote maps to {out_dir}")


# ------------------------------------------------------------------- run


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              required=True, help="Pipeline TOML.")
@click.option("--seed", type=int, help="Override [run] seed.")
@click.option("--output-dir", type=click.Path(file_okay=False, path_type=Path),
              help="Override [run] output_dir.")
@click.option("--x-threshold", type=float, help="Override [plan] x_threshold.")
@click.option("--y-threshold", type=float, help="Override [plan] y_threshold.")
@click.option("--family", type=_FAMILY_CHOICE, help="Override [training] family.")
@click.option("--max-fraction", type=float, help="Override [sampling] max_fraction.")
def run(config_path, seed, output_dir, x_threshold, y_threshold, family, max_fraction):
    """Run the full pipeline from a TOML config."""
    try:
        config = config_from_toml(config_path)
        if seed is not None:
            config = replace(config, seed=seed)
        if output_dir is not None:
            config = replace(config, output_dir=output_dir)
        if x_threshold is not None:
            config = replace(config, x_threshold=x_threshold)
        if y_threshold is not None:
            config = replace(config, y_threshold=y_threshold)
        if family is not None:
            config = replace(config, training=replace(config.training, family=family))
        if max_fraction is not None:
            config = replace(
                config, sampling=replace(config.sampling, max_fraction=max_fraction)
            )
    except (PipelineConfigError, ValueError) as exc:
        raise click.UsageError(str(exc))
    try:
        result = run_pipeline(config)
    except StageError as exc:
        raise _fail(exc)
    click.echo(
        f"{result.n_files} files / {result.n_volumes} volumes; "
        f"scanned {result.n_scanned}, trained on {result.n_training} "
        f"(stop: {result.stop_reason})"
    )
    for r in result.recommendations:
        click.echo(
            f"{r.subject_id}: sensitivity={r.sensitivity:.4f} "
            f"io_density={r.hotness:.6g} -> {r.quadrant.value}"
        )
    click.echo(f"artifacts in {result.output_dir}")


# -------------------------------------------------------------- features


@main.group()
def features():
    """Feature diagnostics."""


@features.command("rank")
@click.option("--matrix", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--labels", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--spec", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--top", type=int, default=20, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path),
              help="Write CSV here instead of stdout.")
def features_rank(matrix, labels, spec, top, out):
    """Rank features by mutual information with the labels."""
    feature_spec = _load_spec(spec)
    X, labs = _load_matrix_labels(matrix, labels, feature_spec)
    try:
        scores = top_k(X, labs, min(top, feature_spec.total_length), spec=feature_spec)
    except ValueError as exc:
        raise _fail(exc)
    lines = ["rank,name,category,mi"]
    for rank, s in enumerate(scores, start=1):
        lines.append(f"{rank},{s.name},{s.category},{s.mi!r}")
    text = "\n".join(lines) + "\n"
    if out:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
        click.echo(f"wrote {len(scores)} rows to {out}")
    else:
        click.echo(text, nl=False)


# -------------------------------------------------------- cluster-volumes


@main.command("cluster-volumes")
@click.option("--profiles", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--k", type=int, default=3, show_default=True)
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--elbow", "show_elbow", is_flag=True,
              help="Print the variance-explained curve and suggested k.")
@click.option("--max-k", type=int, default=8, show_default=True,
              help="Largest k for --elbow.")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path),
              help="Write CSV here instead of stdout.")
def cluster_volumes(profiles, k, seed, show_elbow, max_k, out):
    """Group volumes by behavior profile; mark each group's representative."""
    try:
        volume_profiles = read_profiles_csv(profiles)
    except (OSError, ValueError) as exc:
        raise _fail(exc)
    if not volume_profiles:
        raise _fail(ValueError(f"no volume profiles in {profiles}"))
    ids, points = volume_points(volume_profiles)
    n = len(ids)
    if not 1 <= k <= n:
        raise click.UsageError(f"--k must be in [1, {n}] for {n} volumes")
    cluster_seed = stage_seed(seed, "cluster")
    if show_elbow:
        top = min(max_k, n)
        if top >= 3:
            curve = elbow(points, range(1, top + 1), seed=cluster_seed)
            click.echo("k,objective,explained")
            for kk, obj, expl in zip(curve.ks, curve.objectives, curve.explained):
                click.echo(f"{kk},{obj!r},{expl!r}")
            click.echo(f"suggested k: {curve.suggested_k}")
            if curve.violations:
                click.echo(f"non-monotone at k: {', '.join(map(str, curve.violations))}")
        else:
            click.echo(f"too few volumes ({n}) for an elbow curve")
    try:
        result = kmeans(points, k, seed=cluster_seed)
    except ValueError as exc:
        raise _fail(exc)
    reps = {
        representative(points, result.assignments, c)
        for c in range(k)
    }
    lines = ["volume_id,cluster,is_representative"]
    for i, vid in enumerate(ids):
        lines.append(f"{vid},{int(result.assignments[i])},{str(i in reps).lower()}")
    text = "\n".join(lines) + "\n"
    if out:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
        click.echo(f"wrote {n} rows to {out}")
    else:
        click.echo(text, nl=False)


if __name__ == "__main__":
    main()
