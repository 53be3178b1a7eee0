"""Property-based invariant suite.

Every test here is a module-level hypothesis property run at 1,000 examples.
They pin the behavioral contracts each module promises — monotonicity,
determinism, conservation, and algebraic identities — rather than specific
outputs. Test data stays tiny so the full suite finishes in seconds.
"""

from __future__ import annotations

import math
import tempfile
from collections import Counter
from datetime import timedelta
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st
from scipy import sparse

from cloudready.cluster import kmeans, representative
from cloudready.dictionary import (
    LabelRule,
    SensitivityLabel,
    compile_dictionary,
    extract_text,
    label_file,
    scan_content,
    uncrawled,
)
from cloudready.feature_ranking import feature_categories, mutual_information, top_k
from cloudready.features import encode, fit_spec
from cloudready.hotness import aggregate_volume, io_density
from cloudready.learn.metrics import evaluate
from cloudready.pipeline import stage_seed
from cloudready.plan import (
    Quadrant,
    SensitivityScore,
    classify,
    scan_reduction_report,
)
from cloudready.sampling import SamplingConfig, progressive_sample, proportional_sample
from cloudready.scan import IopsSample, read_corpus, scan_volume, write_corpus

from conftest import T0, exhaustive_best_objective, make_meta

CASES = 1000

# One settings profile for every property. deadline=None because individual
# examples that hit a cold numpy path can spike past hypothesis' default
# 200ms; the suite-level runtime is what matters.
PROPERTY = settings(
    max_examples=CASES,
    deadline=None,
    suppress_health_check=(
        HealthCheck.too_slow,
        HealthCheck.filter_too_much,
        HealthCheck.data_too_large,
    ),
)

# ---------------------------------------------------------------------------
# shared strategies
# ---------------------------------------------------------------------------

_STEMS = ["payroll", "readme", "audit", "notes", "design", "report"]
_PATHS = ["", "hr", "hr/reports", "eng", "eng/data/deep", "docs"]
_ALL_EXTS = [".txt", ".csv", ".md", ".bin", ".log", ""]


@st.composite
def metas(draw, volume_id: str | None = None, exts: tuple[str, ...] | None = None,
          min_size: int = 0):
    """One FileMeta with a valid created <= modified <= accessed timeline."""
    stem = draw(st.sampled_from(_STEMS))
    serial = draw(st.integers(0, 99999))
    ext = draw(st.sampled_from(list(exts) if exts else _ALL_EXTS))
    created_age = draw(st.integers(0, 2200))
    modified_age = draw(st.integers(0, created_age))
    accessed_age = draw(st.integers(0, modified_age))
    return make_meta(
        volume_id=volume_id or draw(st.sampled_from(["vol01", "vol02"])),
        file_name=f"{stem}_{serial}{ext}",
        path=draw(st.sampled_from(_PATHS)),
        file_size=draw(st.integers(min_size, 10**12)),
        created=T0 - timedelta(days=created_age),
        last_modified=T0 - timedelta(days=modified_age),
        last_accessed=T0 - timedelta(days=accessed_age),
    )


_DICT = compile_dictionary()
_ANY_MATCH = LabelRule()

_FILLER = st.sampled_from(
    "alpha beta gamma delta budget notes meeting draft roadmap metrics".split()
)
_PLANTED_HITS = st.sampled_from(
    [
        "123-45-6789",  # ssn-shaped
        "bob@example.com",  # email-shaped
        "(555) 867-5309",  # phone-shaped
        "confidential",  # keyword
        "password",  # keyword
    ]
)
_TEXTS = st.lists(
    st.one_of(_FILLER, _FILLER, _PLANTED_HITS), min_size=0, max_size=25
).map(" ".join)


# ---------------------------------------------------------------------------
# scan: serialization identity, rescan determinism, completeness
# ---------------------------------------------------------------------------


@PROPERTY
@given(records=st.lists(metas(), min_size=1, max_size=8))
def test_corpus_round_trip_identity(records):
    with tempfile.TemporaryDirectory() as tmp:
        dest = Path(tmp) / "corpus.jsonl"
        written = write_corpus(records, dest)
        assert written == len(records)
        assert read_corpus(dest) == records


@st.composite
def _tree_entries(draw):
    # Directory names carry digits and file names never do, so a file can
    # never collide with a directory another entry needs to create.
    return draw(
        st.lists(
            st.tuples(
                st.sampled_from(["", "d1", "d1/d2", "d3"]),
                st.text(alphabet="abcdefgh", min_size=1, max_size=8),
                st.sampled_from([".txt", ".bin", ""]),
                st.binary(min_size=0, max_size=64),
            ),
            min_size=1,
            max_size=6,
            unique_by=lambda e: (e[0], e[1], e[2]),
        )
    )


@PROPERTY
@given(entries=_tree_entries())
def test_rescan_of_unchanged_tree_is_identical(entries):
    with tempfile.TemporaryDirectory() as tmp:
        root = Path(tmp)
        for rel_dir, name, ext, payload in entries:
            d = root / rel_dir if rel_dir else root
            d.mkdir(parents=True, exist_ok=True)
            (d / f"{name}{ext}").write_bytes(payload)
        first = scan_volume(root, "vol01")
        second = scan_volume(root, "vol01")
        assert first.records == second.records
        assert first.skipped == second.skipped
        assert len(first.records) + len(first.skipped) == len(entries)


# ---------------------------------------------------------------------------
# dictionary: match-count monotonicity, label monotonicity, Unknown contract
# ---------------------------------------------------------------------------


@PROPERTY
@given(base=_TEXTS, extra=_TEXTS)
def test_match_counts_grow_with_appended_text(base, extra):
    # Appended on a fresh line so existing token/pattern boundaries survive.
    combined = base + "\n" + extra
    before = scan_content(base, _DICT)
    after = scan_content(combined, _DICT)
    for category, count in before.matches.items():
        assert after.matches[category] >= count
    assert after.total_tokens >= before.total_tokens
    assert after.match_total() >= before.match_total()


@PROPERTY
@given(base=_TEXTS, extra=_TEXTS)
def test_any_match_label_never_downgrades(base, extra):
    before = label_file(scan_content(base, _DICT), _ANY_MATCH)
    after = label_file(scan_content(base + "\n" + extra, _DICT), _ANY_MATCH)
    if before is SensitivityLabel.SENSITIVE:
        assert after is SensitivityLabel.SENSITIVE


@PROPERTY
@given(
    data=st.binary(max_size=120),
    ext=st.sampled_from([".txt", ".md", ".csv", ".bin", ".zip", ""]),
)
def test_unknown_exactly_when_uncrawlable(data, ext):
    text, crawled = extract_text(data, ext)
    result = scan_content(text, _DICT) if crawled else uncrawled(_DICT)
    assert result.crawled == crawled
    label = label_file(result, _ANY_MATCH)
    assert (label is SensitivityLabel.UNKNOWN) == (not crawled)


@PROPERTY
@given(text=_TEXTS)
def test_content_scan_is_deterministic(text):
    assert scan_content(text, _DICT) == scan_content(text, _DICT)


# ---------------------------------------------------------------------------
# features: unit-interval bounds, vector length, purity, path-block sparsity
# ---------------------------------------------------------------------------

_FEATURE_FILES = [
    make_meta(
        volume_id="vol01",
        file_name=f"{stem}_{i}{ext}",
        path=_PATHS[i % len(_PATHS)],
        file_size=[0, 10, 10_000, 5_000_000_000][i % 4],
    )
    for i, (stem, ext) in enumerate(
        (s, e) for s in ["payroll", "readme", "audit", "design"]
        for e in [".txt", ".csv", ".md", ""]
    )
]
_SPEC = fit_spec(_FEATURE_FILES)
_PATH_BLOCK = [
    i for i, cat in enumerate(feature_categories(_SPEC)) if cat == "Path"
]


@PROPERTY
@given(meta=metas())
def test_feature_vectors_stay_in_unit_interval(meta):
    row = encode(meta, _SPEC)
    assert row.shape == (_SPEC.total_length,)
    assert np.all(np.isfinite(row))
    assert np.all(row >= 0.0)
    assert np.all(row <= 1.0)


@PROPERTY
@given(meta=metas())
def test_encoding_is_pure(meta):
    assert np.array_equal(encode(meta, _SPEC), encode(meta, _SPEC))


@PROPERTY
@given(meta=metas())
def test_path_block_activation_bounded_by_depth(meta):
    row = encode(meta, _SPEC)
    assert np.count_nonzero(row[_PATH_BLOCK]) <= _SPEC.depth


# ---------------------------------------------------------------------------
# feature_ranking: MI nonnegativity, symmetry, independence, stable top-k
# ---------------------------------------------------------------------------


@st.composite
def _column_with_labels(draw):
    n = draw(st.integers(2, 40))
    column = draw(
        st.lists(
            st.sampled_from([0.0, 0.1, 0.25, 0.5, 0.75, 1.0]),
            min_size=n,
            max_size=n,
        )
    )
    labels = draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    return np.asarray(column), np.asarray(labels)


@PROPERTY
@given(case=_column_with_labels())
def test_mutual_information_nonnegative(case):
    column, labels = case
    assert mutual_information(column, labels) >= 0.0


@PROPERTY
@given(
    a=st.lists(st.integers(0, 1), min_size=2, max_size=50),
    data=st.data(),
)
def test_mutual_information_symmetric_for_binary_pairs(a, data):
    b = data.draw(st.lists(st.integers(0, 1), min_size=len(a), max_size=len(a)))
    forward = mutual_information(np.asarray(a, dtype=float), np.asarray(b))
    backward = mutual_information(np.asarray(b, dtype=float), np.asarray(a))
    assert forward == pytest.approx(backward, abs=1e-12)


@st.composite
def _independent_pair(draw):
    """Column/label sample whose joint counts factor exactly: count(a, b) =
    n_a * m_b, so the empirical distributions are independent by construction."""
    n_vals = draw(st.integers(1, 3))
    n_labs = draw(st.integers(1, 2))
    value_reps = [draw(st.integers(1, 4)) for _ in range(n_vals)]
    label_reps = [draw(st.integers(1, 4)) for _ in range(n_labs)]
    assume(sum(value_reps) * sum(label_reps) >= 2)
    values = [0.0, 0.45, 0.9]
    column: list[float] = []
    labels: list[int] = []
    for a in range(n_vals):
        for b in range(n_labs):
            reps = value_reps[a] * label_reps[b]
            column.extend([values[a]] * reps)
            labels.extend([b] * reps)
    return np.asarray(column), np.asarray(labels)


@PROPERTY
@given(case=_independent_pair())
def test_mutual_information_zero_for_independent_columns(case):
    column, labels = case
    assert mutual_information(column, labels) <= 1e-12


@st.composite
def _matrix_with_labels(draw):
    n = draw(st.integers(3, 12))
    f = draw(st.integers(2, 6))
    rows = [
        [draw(st.sampled_from([0.0, 0.3, 0.7, 1.0])) for _ in range(f)]
        for _ in range(n)
    ]
    for row in rows:
        row[1] = row[0]  # a duplicated column guarantees at least one MI tie
    labels = draw(st.lists(st.integers(0, 1), min_size=n, max_size=n))
    return sparse.csr_matrix(np.asarray(rows)), np.asarray(labels)


@PROPERTY
@given(case=_matrix_with_labels())
def test_top_k_ranking_deterministic_and_stably_ordered(case):
    matrix, labels = case
    k = matrix.shape[1]
    scores = top_k(matrix, labels, k)
    assert scores == top_k(matrix, labels, k)
    assert len(scores) == k
    for left, right in zip(scores, scores[1:]):
        assert left.mi > right.mi or (
            left.mi == right.mi and left.index < right.index
        )


# ---------------------------------------------------------------------------
# cluster: Lloyd monotonicity, tiny-input optimality, translation invariance
# ---------------------------------------------------------------------------


@st.composite
def _int_points(draw, max_n: int = 12, max_dim: int = 3):
    n = draw(st.integers(2, max_n))
    d = draw(st.integers(1, max_dim))
    rows = [
        [float(draw(st.integers(0, 5))) for _ in range(d)] for _ in range(n)
    ]
    return np.asarray(rows)


@PROPERTY
@given(
    points=_int_points(),
    k=st.integers(1, 4),
    iters=st.integers(1, 6),
    seed=st.integers(0, 2**32 - 1),
)
def test_lloyd_objective_monotone_in_iterations(points, k, iters, seed):
    assume(k <= len(points))
    shorter = kmeans(points, k, seed=seed, max_iter=iters, restarts=1)
    longer = kmeans(points, k, seed=seed, max_iter=iters + 1, restarts=1)
    # Same seed and restarts=1 replay the same trajectory, so one extra
    # Lloyd iteration can only hold or lower the objective.
    assert longer.objective <= shorter.objective + 1e-12
    assert shorter.objective >= 0.0


@PROPERTY
@given(points=_int_points(max_n=6, max_dim=2), seed=st.integers(0, 2**32 - 1))
def test_kmeans_matches_exhaustive_optimum_on_tiny_inputs(points, seed):
    result = kmeans(points, 2, seed=seed, restarts=20)
    best = exhaustive_best_objective(points, 2)
    assert result.objective == pytest.approx(best, abs=1e-9)


@PROPERTY
@given(
    points=_int_points(),
    shift=st.sampled_from([-4.0, -1.0, 0.5, 2.0, 16.0]),
    seed=st.integers(0, 2**32 - 1),
)
def test_representative_invariant_under_uniform_translation(points, shift, seed):
    k = min(2, len(points))
    result = kmeans(points, k, seed=seed, restarts=3)
    assignments = np.asarray(result.assignments)
    for cluster_id in range(k):
        if not np.any(assignments == cluster_id):
            continue
        original = representative(points, result.assignments, cluster_id)
        shifted = representative(points + shift, result.assignments, cluster_id)
        assert original == shifted


# ---------------------------------------------------------------------------
# sampling: proportional shares, prefix nesting, progressive bookkeeping
# ---------------------------------------------------------------------------

_FRACTION_GRID = [0.1, 0.15, 0.2, 0.25, 0.3, 0.4, 0.5, 0.6, 0.7]


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@PROPERTY
@given(
    sizes=st.lists(st.integers(10, 50), min_size=1, max_size=4),
    f_small=st.sampled_from(_FRACTION_GRID),
    f_large=st.sampled_from(_FRACTION_GRID),
    seed=st.integers(0, 2**31 - 1),
)
def test_proportional_shares_and_prefix_nesting(sizes, f_small, f_large, seed):
    if f_small > f_large:
        f_small, f_large = f_large, f_small
    total = sum(sizes)
    largest = max(range(len(sizes)), key=lambda c: (sizes[c], -c))

    for fraction in (f_small, f_large):
        counts, drawn = proportional_sample(sizes, total, fraction, seed)
        assert sum(counts) == _round_half_up(total * fraction)
        for c, (size, count) in enumerate(zip(sizes, counts)):
            assert 0 <= count <= size
            slack = 0.5 + (0.5 * len(sizes) if c == largest else 0.0)
            assert abs(count - size * fraction) <= slack + 1e-9
            indices = drawn[c]
            assert len(indices) == count
            assert len(set(indices.tolist())) == count
            if count:
                assert 0 <= indices.min() and indices.max() < size

    _, drawn_small = proportional_sample(sizes, total, f_small, seed)
    _, drawn_large = proportional_sample(sizes, total, f_large, seed)
    for small, large in zip(drawn_small, drawn_large):
        lo, hi = (small, large) if len(small) <= len(large) else (large, small)
        assert set(lo.tolist()) <= set(hi.tolist())


_LABEL_POOL = (
    SensitivityLabel.SENSITIVE,
    SensitivityLabel.SENSITIVE,
    SensitivityLabel.SENSITIVE,
    SensitivityLabel.NON_SENSITIVE,
    SensitivityLabel.NON_SENSITIVE,
    SensitivityLabel.NON_SENSITIVE,
    SensitivityLabel.UNKNOWN,
)


@st.composite
def _progressive_case(draw):
    n = draw(st.integers(10, 30))
    labels = draw(st.lists(st.sampled_from(_LABEL_POOL), min_size=n, max_size=n))
    # Dyadic fractions keep the round schedule arithmetic exact, so the
    # ceil-based round bound can be checked with rational arithmetic.
    initial = draw(st.sampled_from([0.125, 0.25]))
    increment = draw(st.sampled_from([0.0625, 0.125, 0.25, 0.5]))
    maximum = draw(
        st.sampled_from([v for v in (0.25, 0.5, 0.75, 1.0) if v >= initial])
    )
    threshold = draw(st.sampled_from([0.0, 0.05, 1.0]))
    k = draw(st.integers(1, 3))
    assignments = (
        [draw(st.integers(0, k - 1)) for _ in range(n)] if k > 1 else None
    )
    seed = draw(st.integers(0, 2**31 - 1))
    return n, labels, initial, increment, maximum, threshold, assignments, seed


@PROPERTY
@given(case=_progressive_case())
def test_progressive_rounds_bounded_nested_and_scan_once(case):
    n, labels, initial, increment, maximum, threshold, assignments, seed = case
    files = [
        make_meta(volume_id="vol01", file_name=f"file{i:04d}.txt", path="users")
        for i in range(n)
    ]
    index_of = {meta.file_id(): i for i, meta in enumerate(files)}
    scan_calls: Counter = Counter()

    def label_fn(meta):
        scan_calls[meta.file_id()] += 1
        return labels[index_of[meta.file_id()]]

    def trainer_fn(ids, labs):
        return ((len(ids) * 37) % 11) / 11.0

    config = SamplingConfig(
        initial_fraction=initial,
        increment_fraction=increment,
        accuracy_delta_threshold=threshold,
        max_fraction=maximum,
        seed=seed,
    )
    try:
        result = progressive_sample(files, config, label_fn, trainer_fn, assignments)
    except ValueError as exc:
        assume("no trainable labels" not in str(exc))
        raise

    # Each sampled file is content-scanned exactly once, ever.
    assert all(count == 1 for count in scan_calls.values())
    assert set(scan_calls) == {files[i].file_id() for i in result.scanned}

    # Round count respects the budget schedule bound.
    bound = (
        math.ceil((Fraction(maximum) - Fraction(initial)) / Fraction(increment)) + 1
    )
    assert 1 <= len(result.rounds) <= bound

    # Every round but the last is still running; the last names its reason.
    for r in result.rounds[:-1]:
        assert not r.stopped and r.reason == ""
    assert result.rounds[-1].stopped
    assert result.rounds[-1].reason in ("converged", "budget", "exhausted")

    # Rounds report the cumulative scanned set, so they are always nested.
    for prev, cur in zip(result.rounds, result.rounds[1:]):
        assert set(prev.cumulative_ids) <= set(cur.cumulative_ids)

    # Training rows are exactly the binary-labeled scans, in index order.
    expected_training = sorted(
        i for i, lab in result.scanned.items()
        if lab is not SensitivityLabel.UNKNOWN
    )
    assert result.training_indices == expected_training
    assert result.training_labels == [
        result.scanned[i].value for i in expected_training
    ]
    last = result.rounds[-1]
    assert last.sensitive + last.non_sensitive + last.unknown == len(result.scanned)


# ---------------------------------------------------------------------------
# learn.metrics: confusion identities, permutation invariance, F1 bounds
# ---------------------------------------------------------------------------

_METRIC_LABELS = st.sampled_from(["Sensitive", "NonSensitive", "Unknown"])


@st.composite
def _prediction_pairs(draw):
    n = draw(st.integers(1, 60))
    predicted = draw(st.lists(_METRIC_LABELS, min_size=n, max_size=n))
    truth = draw(st.lists(_METRIC_LABELS, min_size=n, max_size=n))
    return predicted, truth


@PROPERTY
@given(case=_prediction_pairs())
def test_metric_formula_identities(case):
    predicted, truth = case
    m = evaluate(predicted, truth)
    tp = sum(1 for p, t in zip(predicted, truth) if p == "Sensitive" and t == "Sensitive")
    fp = sum(1 for p, t in zip(predicted, truth) if p == "Sensitive" and t != "Sensitive")
    fn = sum(1 for p, t in zip(predicted, truth) if p != "Sensitive" and t == "Sensitive")
    assert (m.tp, m.fp, m.fn) == (tp, fp, fn)
    assert m.tp + m.fp + m.fn + m.tn == len(predicted)
    assert m.accuracy == (m.tp + m.tn) / len(predicted)
    assert m.precision == (m.tp / (m.tp + m.fp) if m.tp + m.fp else 0.0)
    assert m.recall == (m.tp / (m.tp + m.fn) if m.tp + m.fn else 0.0)
    p, r = m.precision, m.recall
    assert m.f1 == (2 * p * r / (p + r) if p + r > 0 else 0.0)


@PROPERTY
@given(case=_prediction_pairs(), seed=st.integers(0, 2**31 - 1))
def test_evaluate_invariant_under_joint_permutation(case, seed):
    predicted, truth = case
    order = np.random.default_rng(seed).permutation(len(predicted))
    shuffled_p = [predicted[i] for i in order]
    shuffled_t = [truth[i] for i in order]
    assert evaluate(shuffled_p, shuffled_t) == evaluate(predicted, truth)


@PROPERTY
@given(case=_prediction_pairs())
def test_f1_between_precision_and_recall(case):
    predicted, truth = case
    m = evaluate(predicted, truth)
    p, r = m.precision, m.recall
    if p + r > 0:
        assert min(p, r) - 1e-12 <= m.f1 <= max(p, r) + 1e-12


# ---------------------------------------------------------------------------
# hotness: age-percentage monotonicity, extension partition, density scaling
# ---------------------------------------------------------------------------


@PROPERTY
@given(
    files=st.lists(metas(volume_id="vol01"), min_size=1, max_size=20),
    now_days=st.integers(0, 200),
)
def test_age_percentages_monotone_and_bounded(files, now_days):
    profile = aggregate_volume(files, T0 + timedelta(days=now_days))
    assert profile.pct_not_modified_3y_count <= profile.pct_not_modified_1y_count
    assert profile.pct_not_modified_3y_size <= profile.pct_not_modified_1y_size
    assert profile.pct_not_accessed_3y_count <= profile.pct_not_accessed_1y_count
    assert profile.pct_not_accessed_3y_size <= profile.pct_not_accessed_1y_size
    for value in (
        profile.pct_not_modified_1y_count,
        profile.pct_not_modified_1y_size,
        profile.pct_not_modified_3y_count,
        profile.pct_not_modified_3y_size,
        profile.pct_not_accessed_1y_count,
        profile.pct_not_accessed_1y_size,
        profile.pct_not_accessed_3y_count,
        profile.pct_not_accessed_3y_size,
        profile.pct_not_accessed_after_2w_count,
        profile.pct_not_accessed_after_2w_size,
    ):
        assert 0.0 <= value <= 100.0
    assert profile.total_file_count == len(files)
    assert profile.total_file_size == sum(f.file_size for f in files)


@PROPERTY
@given(
    files=st.lists(
        metas(volume_id="vol01", exts=(".txt", ".md", ".csv"), min_size=1),
        min_size=1,
        max_size=20,
    ),
    now_days=st.integers(0, 60),
)
def test_extension_groups_partition_the_file_count(files, now_days):
    profile = aggregate_volume(files, T0 + timedelta(days=now_days))
    by_extension = Counter(meta.extension for meta in files)
    # At most three distinct extensions by construction, so the top-3 list
    # is the whole partition and its counts must cover every file.
    assert set(profile.top3_extensions_by_count) == set(by_extension)
    assert set(profile.top3_extensions_by_size) <= set(by_extension)
    assert sum(by_extension.values()) == profile.total_file_count


@PROPERTY
@given(
    ops=st.lists(st.integers(0, 10**7), min_size=1, max_size=24),
    size=st.integers(10**6, 10**13),
)
def test_density_halves_exactly_when_size_doubles(ops, size):
    samples = [
        IopsSample(volume_id="vol01", hour_start=T0 + timedelta(hours=i), io_ops=n)
        for i, n in enumerate(ops)
    ]
    single = io_density(samples, size)
    doubled = io_density(samples, 2 * size)
    assert doubled.mean == single.mean / 2
    assert doubled.low == single.low / 2
    assert doubled.high == single.high / 2


# ---------------------------------------------------------------------------
# plan: quadrant monotonicity, boundary exclusion, one quadrant per subject,
# rescan fraction identity
# ---------------------------------------------------------------------------


@st.composite
def _score_case(draw):
    total = draw(st.integers(1, 200))
    unknown = draw(st.integers(0, total))
    sensitive = draw(st.integers(0, total - unknown))
    return SensitivityScore(
        subject="volume",
        subject_id="vol01",
        sensitive_count=sensitive,
        total_count=total,
        unknown_count=unknown,
    )


_UNIT = st.floats(0.0, 1.0, allow_nan=False, allow_infinity=False)
_HOTNESS = st.floats(0.0, 0.2, allow_nan=False, allow_infinity=False)


@PROPERTY
@given(
    score=_score_case(),
    hot=_HOTNESS,
    x=_HOTNESS,
    y=_UNIT,
    sensitive_scale=_UNIT,
    hot_scale=_UNIT,
)
def test_quadrant_monotone_toward_candidate(score, hot, x, y, sensitive_scale, hot_scale):
    rec = classify({"vol01": score}, {"vol01": hot}, x, y)[0]
    if score.majority_unknown:
        assert rec.quadrant is Quadrant.NEEDS_DOMAIN_REVIEW
        return
    if rec.quadrant is not Quadrant.PUBLIC_CLOUD_CANDIDATE:
        return
    # Lowering sensitivity and hotness can never flip a candidate away.
    calmer = SensitivityScore(
        subject="volume",
        subject_id="vol01",
        sensitive_count=int(score.sensitive_count * sensitive_scale),
        total_count=score.total_count,
        unknown_count=score.unknown_count,
    )
    calmer_rec = classify({"vol01": calmer}, {"vol01": hot * hot_scale}, x, y)[0]
    assert calmer_rec.quadrant is Quadrant.PUBLIC_CLOUD_CANDIDATE


@PROPERTY
@given(
    score=_score_case(),
    x=st.floats(1e-6, 0.2, allow_nan=False, allow_infinity=False),
)
def test_threshold_boundaries_are_excluded(score, x):
    assume(not score.majority_unknown)
    # Sensitivity exactly at the y threshold: not a candidate.
    at_y = classify({"vol01": score}, {"vol01": 0.0}, x, score.score)[0]
    assert at_y.quadrant is Quadrant.PRIVATE_OR_ON_PREMISE
    # Hotness exactly at the x threshold: not a candidate.
    if score.sensitive_count < score.total_count:
        at_x = classify({"vol01": score}, {"vol01": x}, x, 1.0)[0]
        assert at_x.quadrant is Quadrant.PRIVATE_OR_ON_PREMISE


@st.composite
def _score_table(draw):
    ids = draw(
        st.lists(
            st.sampled_from([f"vol{i:02d}" for i in range(1, 10)]),
            min_size=1,
            max_size=6,
            unique=True,
        )
    )
    scores = {}
    hotness = {}
    for subject_id in ids:
        total = draw(st.integers(1, 50))
        unknown = draw(st.integers(0, total))
        sensitive = draw(st.integers(0, total - unknown))
        scores[subject_id] = SensitivityScore(
            subject="volume",
            subject_id=subject_id,
            sensitive_count=sensitive,
            total_count=total,
            unknown_count=unknown,
        )
        hotness[subject_id] = draw(_HOTNESS)
    return scores, hotness


@PROPERTY
@given(case=_score_table(), x=_HOTNESS, y=_UNIT)
def test_each_subject_lands_in_exactly_one_quadrant(case, x, y):
    scores, hotness = case
    recommendations = classify(scores, hotness, x, y)
    assert [r.subject_id for r in recommendations] == sorted(scores)
    for rec in recommendations:
        assert rec.quadrant in (
            Quadrant.PUBLIC_CLOUD_CANDIDATE,
            Quadrant.PRIVATE_OR_ON_PREMISE,
            Quadrant.NEEDS_DOMAIN_REVIEW,
        )


@PROPERTY
@given(
    labels=st.lists(
        st.sampled_from(["Sensitive", "NonSensitive"]), min_size=1, max_size=300
    )
)
def test_rescan_and_sensitive_fractions_sum_to_one(labels):
    report = scan_reduction_report(labels)
    assert report.total == len(labels)
    assert report.predicted_sensitive + report.predicted_non_sensitive == report.total
    assert (
        Fraction(report.predicted_non_sensitive, report.total)
        + Fraction(report.predicted_sensitive, report.total)
        == 1
    )
    assert report.rescan_fraction == report.predicted_non_sensitive / report.total


# ---------------------------------------------------------------------------
# pipeline: stage seed derivation
# ---------------------------------------------------------------------------

_STAGE_NAMES = st.text(alphabet="abcdefghij_", min_size=1, max_size=12)


@PROPERTY
@given(master=st.integers(-(2**31), 2**63), first=_STAGE_NAMES, second=_STAGE_NAMES)
def test_stage_seed_deterministic_distinct_and_in_range(master, first, second):
    seed = stage_seed(master, first)
    assert seed == stage_seed(master, first)
    assert 0 <= seed < 2**64
    if first != second:
        assert seed != stage_seed(master, second)
