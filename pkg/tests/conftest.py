"""Shared fixtures: a FileMeta factory, a small generated corpus for module
tests, and session-scoped full pipeline runs shared by the end-to-end tests.

The full-scale fixtures are expensive (tens of seconds); they are built
lazily, so module-level test selections never pay for them.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, replace
from datetime import datetime, timedelta, timezone
from pathlib import Path

import pytest

from cloudready.pipeline import PipelineConfig, PipelineResult, run_pipeline
from cloudready.sampling import SamplingConfig
from cloudready.scan import FileMeta, extension_of
from cloudready.synth import GenResult, GenSpec, generate_corpus

UTC = timezone.utc

# Fixed anchor so every hand-built fixture is reproducible.
T0 = datetime(2025, 6, 1, tzinfo=UTC)


def make_meta(
    volume_id: str = "vol01",
    file_name: str = "report.txt",
    path: str = "eng/reports",
    *,
    extension: str | None = None,
    last_accessed: datetime | None = None,
    created: datetime | None = None,
    changed: datetime | None = None,
    last_modified: datetime | None = None,
    file_size: int = 1000,
    bytes_used: int | None = None,
    user_folder: str | None = None,
    created_substituted: bool = False,
) -> FileMeta:
    """A FileMeta with consistent defaults anchored at T0.

    Default timeline: created 30 days before T0, modified 5 days later,
    accessed 2 days after that. Any timestamp can be pinned explicitly.
    """
    created = created or T0 - timedelta(days=30)
    last_modified = last_modified or created + timedelta(days=5)
    changed = changed or last_modified
    last_accessed = last_accessed or last_modified + timedelta(days=2)
    if extension is None:
        extension = extension_of(file_name)
    if user_folder is None:
        user_folder = path.split("/", 1)[0] if path else ""
    if bytes_used is None:
        bytes_used = ((file_size + 511) // 512) * 512
    return FileMeta(
        volume_id=volume_id,
        file_name=file_name,
        extension=extension,
        path=path,
        last_accessed=last_accessed,
        created=created,
        changed=changed,
        last_modified=last_modified,
        file_size=file_size,
        bytes_used=bytes_used,
        user_folder=user_folder,
        created_substituted=created_substituted,
    )


# A deliberately small generator profile: same seven-volume shape as the
# default, but ~280 tiny files so module tests stay fast.
SMALL_SPEC = GenSpec(
    files_per_volume=(60, 50, 40, 35, 35, 30, 30),
    volume_size_gb=(50, 80, 60, 20, 66, 100, 10),
    text_words=(40, 140),
    binary_bytes=(512, 2048),
    hours=6,
    seed=7,
)


@pytest.fixture(scope="session")
def small_gen(tmp_path_factory) -> GenResult:
    dest = tmp_path_factory.mktemp("small-corpus") / "data"
    return generate_corpus(dest, SMALL_SPEC)


@dataclass
class FullRun:
    """One full-scale pipeline execution plus its measured wall time."""

    gen: GenResult
    config: PipelineConfig
    result: PipelineResult
    wall_seconds: float
    timings: dict


@pytest.fixture(scope="session")
def full_gen(tmp_path_factory) -> GenResult:
    dest = tmp_path_factory.mktemp("full-corpus") / "data"
    return generate_corpus(dest, GenSpec())


@pytest.fixture(scope="session")
def full_run(full_gen, tmp_path_factory) -> FullRun:
    out = tmp_path_factory.mktemp("full-run")
    # accuracy_delta_threshold=0 disables early convergence so the sample
    # grows to the full 10% budget, which is what the end-to-end checks
    # are specified against.
    config = PipelineConfig(
        output_dir=out,
        corpus_path=full_gen.corpus_path,
        content_root=full_gen.root / "volumes",
        iops_path=full_gen.iops_path,
        volume_sizes_path=full_gen.sizes_path,
        sampling=SamplingConfig(accuracy_delta_threshold=0.0),
        seed=42,
    )
    start = time.perf_counter()
    result = run_pipeline(config)
    wall = time.perf_counter() - start
    timings = json.loads((out / "timings.json").read_text(encoding="utf-8"))
    return FullRun(gen=full_gen, config=config, result=result, wall_seconds=wall, timings=timings)


@pytest.fixture(scope="session")
def full_rerun_dir(full_run, tmp_path_factory) -> Path:
    """Second pipeline run with identical config+seed into a fresh directory."""
    out = tmp_path_factory.mktemp("full-rerun")
    run_pipeline(replace(full_run.config, output_dir=out))
    return out


def exhaustive_best_objective(points, k: int) -> float:
    """Global k-means optimum by scoring every assignment of n points to k
    clusters through ``objective_of``. Exponential — keep n small (≤ 8)."""
    import itertools

    from cloudready.cluster import objective_of

    n = len(points)
    best = float("inf")
    for assignment in itertools.product(range(k), repeat=n):
        obj = objective_of(points, assignment, k)
        if obj < best:
            best = obj
    return best


def brute_force_nb_positive_posterior(X_train, y01, alpha, X_query):
    """Naive-Bayes positive-class posteriors by direct probability
    arithmetic (no logs, no vectorization) — an oracle for tiny inputs."""
    import numpy as np

    X_train = np.asarray(X_train, dtype=float)
    X_query = np.asarray(X_query, dtype=float)
    y01 = np.asarray(y01)
    n, d = X_train.shape
    total_w = float(n)
    out = []
    theta = {}
    prior = {}
    for c in (0, 1):
        rows = X_train[y01 == c]
        prior[c] = rows.shape[0] / total_w
        counts = rows.sum(axis=0)
        smoothed = [counts[j] + alpha for j in range(d)]
        s = sum(smoothed)
        theta[c] = [v / s for v in smoothed]
    for q in X_query:
        like = {}
        for c in (0, 1):
            p = prior[c]
            for j in range(d):
                p *= theta[c][j] ** q[j]
            like[c] = p
        out.append(like[1] / (like[0] + like[1]))
    return np.array(out)


def central_difference_gradient(f, theta, h=1e-6):
    """Numerical gradient of a scalar function by central differences."""
    import numpy as np

    theta = np.asarray(theta, dtype=float)
    grad = np.zeros_like(theta)
    for i in range(theta.size):
        up = theta.copy()
        dn = theta.copy()
        up[i] += h
        dn[i] -= h
        grad[i] = (f(up) - f(dn)) / (2.0 * h)
    return grad
