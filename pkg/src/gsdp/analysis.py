"""Typicality rankings, organization maps, and clustering evaluation.

The two organization maps place every object in a 2-D space whose axes are
the semantic value and the prototypical distance. `map_rho` computes the
pair from raw features; `map_gamma` recovers it from signature halves. The
clustering helpers (k-means plus five external quality metrics) evaluate
how well signatures preserve category structure relative to raw features.

The metric implementations are native rather than delegated because the
exact variants are pinned contracts here: AMI uses the permutation-model
expected mutual information with max-entropy normalization, and k-means
uses greedy k-means++ seeding with one initialization per seed and
deterministic empty-cluster reseeding.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist
from scipy.special import gammaln

from .descriptor import (
    Signature,
    describe_object,
    plan_grid,
    recover_prototypical_distance,
    recover_semantic_value,
    signature_l1,
)
from .interchange import FeatureSet
from .prototype import (
    SemanticPrototype,
    object_distance,
    prototypical_distance,
    semantic_value,
)
from .validation import as_float_matrix, as_label_vector, check_count

SOURCE_FEATURES = "features"
SOURCE_SIGNATURE = "signature"

_BOUND_TOL = 1e-9


@dataclass(frozen=True)
class OrganizationPoint:
    """One object's position in the (semantic value, distance) plane."""

    object_id: str
    z: float
    delta: float
    source: str

    def __post_init__(self):
        if not (math.isfinite(self.z) and math.isfinite(self.delta)):
            raise ValueError(f"non-finite organization point for {self.object_id!r}")
        if self.delta < 0:
            raise ValueError(f"negative distance for {self.object_id!r}")
        if self.source not in (SOURCE_FEATURES, SOURCE_SIGNATURE):
            raise ValueError(f"unknown source {self.source!r}")


@dataclass(frozen=True)
class RankingEntry:
    object_id: str
    delta: float
    rank: int

    def __post_init__(self):
        if self.delta < 0 or not math.isfinite(self.delta):
            raise ValueError(f"bad distance for {self.object_id!r}")
        if self.rank < 1:
            raise ValueError("ranks are 1-based")


@dataclass(frozen=True)
class ClusterReport:
    k: int
    homogeneity: float
    completeness: float
    v_measure: float
    ari: float
    ami: float
    seed: int
    iterations: int


@dataclass(frozen=True)
class ContinuityReport:
    """Lower-bound violations are expected; the upper bound is asserted."""

    samples: int
    violations: int
    max_ratio: float


@dataclass
class KMeansResult:
    labels: np.ndarray
    centers: np.ndarray
    iterations: int
    inertia: float


def rank_members(fset: FeatureSet, proto: SemanticPrototype) -> list[RankingEntry]:
    """Rank members by distance to the prototype, closest first.

    Callers filter the set to the prototype's category beforehand. Ties
    break lexicographically on object id so rankings are reproducible.
    """
    deltas = [
        prototypical_distance(fset.features[i], proto)
        for i in range(fset.n_objects)
    ]
    order = sorted(range(fset.n_objects), key=lambda i: (deltas[i], fset.ids[i]))
    return [
        RankingEntry(object_id=fset.ids[i], delta=deltas[i], rank=position)
        for position, i in enumerate(order, start=1)
    ]


def rank_signatures(signatures) -> list[RankingEntry]:
    """Same ordering contract as rank_members, from recovered distances."""
    signatures = list(signatures)
    deltas = [recover_prototypical_distance(sig) for sig in signatures]
    ids = [sig.object_id or "" for sig in signatures]
    order = sorted(range(len(signatures)), key=lambda i: (deltas[i], ids[i]))
    return [
        RankingEntry(object_id=ids[i], delta=deltas[i], rank=position)
        for position, i in enumerate(order, start=1)
    ]


def map_rho(fset: FeatureSet, proto: SemanticPrototype) -> list[OrganizationPoint]:
    return [
        OrganizationPoint(
            object_id=fset.ids[i],
            z=semantic_value(fset.features[i], proto),
            delta=prototypical_distance(fset.features[i], proto),
            source=SOURCE_FEATURES,
        )
        for i in range(fset.n_objects)
    ]


def map_gamma(signatures) -> list[OrganizationPoint]:
    return [
        OrganizationPoint(
            object_id=sig.object_id or "",
            z=recover_semantic_value(sig),
            delta=recover_prototypical_distance(sig),
            source=SOURCE_SIGNATURE,
        )
        for sig in signatures
    ]


def verify_continuity_bound(fset: FeatureSet, proto: SemanticPrototype,
                            samples: int = 1000, seed: int = 0,
                            r: int = 16) -> ContinuityReport:
    """Check the signature-space continuity bound on random member pairs.

    The upper bound, l1 distance between two object signatures at most
    twice the object distance in feature space, follows from the triangle
    inequality and is asserted: any violation raises. The converse bound
    does not hold in general (two objects symmetric about the prototype
    collapse to the same signature), so violations of it are only counted.
    """
    check_count(samples, 1, "samples")
    if fset.n_objects < 2:
        raise ValueError("need at least 2 members to sample pairs")
    config = plan_grid(proto.m, r)
    rng = np.random.default_rng(seed)
    left = rng.integers(fset.n_objects, size=samples)
    right = rng.integers(fset.n_objects, size=samples)
    cache: dict[int, Signature] = {}

    def sig(i: int) -> Signature:
        if i not in cache:
            cache[i] = describe_object(fset.features[i], proto, config,
                                       object_id=fset.ids[i])
        return cache[i]

    violations = 0
    max_ratio = 0.0
    for i, j in zip(left, right):
        dist = object_distance(fset.features[int(i)], fset.features[int(j)], proto)
        l1 = signature_l1(sig(int(i)), sig(int(j)))
        if l1 > 2.0 * dist + _BOUND_TOL:
            raise AssertionError(
                f"continuity upper bound violated: l1={l1!r} > 2*{dist!r} "
                f"for pair ({fset.ids[int(i)]}, {fset.ids[int(j)]})"
            )
        if dist > 0:
            max_ratio = max(max_ratio, l1 / (2.0 * dist))
        if l1 < dist - _BOUND_TOL:
            violations += 1
    return ContinuityReport(samples=samples, violations=violations,
                            max_ratio=max_ratio)


def continuity_counterexample(r: int = 4) -> dict:
    """A pair violating the claimed lower bound between the two distances.

    Two objects symmetric about the prototype mean land in the same angular
    bin, so their signatures coincide (l1 = 0) while their feature-space
    distance is positive. Needs r >= 4 so both coordinates share a bin.
    """
    if r < 4:
        raise ValueError("counterexample construction needs r >= 4")
    proto = SemanticPrototype(
        category=0, mean=np.zeros(2), std=np.ones(2),
        weights=np.ones(2), bias=0.0, n_typical=1,
    )
    config = plan_grid(2, r)
    f1 = np.array([1.0, 0.0])
    f2 = np.array([0.0, 1.0])
    s1 = describe_object(f1, proto, config, object_id="a")
    s2 = describe_object(f2, proto, config, object_id="b")
    return {
        "l1": signature_l1(s1, s2),
        "delta": object_distance(f1, f2, proto),
        "features": (f1, f2),
    }


# ---------------------------------------------------------------------------
# clustering


def _plus_plus_centers(X: np.ndarray, k: int, rng) -> np.ndarray:
    """Greedy k-means++: several candidates per step, keep the best."""
    n = X.shape[0]
    n_candidates = 2 + int(np.log(k))
    centers = np.empty((k, X.shape[1]), dtype=np.float64)
    centers[0] = X[int(rng.integers(n))]
    closest = cdist(X, centers[:1], "sqeuclidean").ravel()
    potential = closest.sum()
    for c in range(1, k):
        draws = rng.random(n_candidates) * potential
        cumulative = np.cumsum(closest)
        candidates = np.searchsorted(cumulative, draws)
        candidates = np.minimum(candidates, n - 1)
        dist_to = cdist(X[candidates], X, "sqeuclidean")
        pots = np.minimum(closest[None, :], dist_to).sum(axis=1)
        best = int(np.argmin(pots))
        centers[c] = X[candidates[best]]
        closest = np.minimum(closest, dist_to[best])
        potential = pots[best]
    return centers


def kmeans(points, k: int, seed: int = 0, max_iter: int = 300) -> KMeansResult:
    """Lloyd iterations from a greedy k-means++ start, one init per seed.

    Deterministic for a fixed seed: assignment ties go to the lowest
    cluster index and empty clusters are re-seeded to the point currently
    farthest from its own centroid.
    """
    X = as_float_matrix(points, name="points")
    check_count(k, 1, "k")
    if k > X.shape[0]:
        raise ValueError(f"k={k} exceeds the {X.shape[0]} points")
    check_count(max_iter, 1, "max_iter")
    rng = np.random.default_rng(seed)
    centers = _plus_plus_centers(X, k, rng)
    distances = cdist(X, centers, "sqeuclidean")
    labels = distances.argmin(axis=1)
    iterations = 0
    for _ in range(max_iter):
        for cluster in range(k):
            members = labels == cluster
            if members.any():
                centers[cluster] = X[members].mean(axis=0)
            else:
                own = distances[np.arange(X.shape[0]), labels]
                farthest = int(own.argmax())
                centers[cluster] = X[farthest]
                distances[farthest, :] = 0.0
        iterations += 1
        distances = cdist(X, centers, "sqeuclidean")
        new_labels = distances.argmin(axis=1)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    inertia = float(distances[np.arange(X.shape[0]), labels].sum())
    return KMeansResult(labels=labels.astype(np.int64), centers=centers,
                        iterations=iterations, inertia=inertia)


def contingency_table(truth: np.ndarray, pred: np.ndarray) -> np.ndarray:
    truth = as_label_vector(truth, name="truth")
    pred = as_label_vector(pred, name="pred")
    if truth.shape[0] != pred.shape[0]:
        raise ValueError(
            f"{truth.shape[0]} truth labels vs {pred.shape[0]} assignments"
        )
    if truth.shape[0] == 0:
        raise ValueError("need at least one labelled point")
    _, ti = np.unique(truth, return_inverse=True)
    _, pi = np.unique(pred, return_inverse=True)
    table = np.zeros((ti.max() + 1, pi.max() + 1), dtype=np.int64)
    np.add.at(table, (ti, pi), 1)
    return table


def _entropy(counts: np.ndarray) -> float:
    total = counts.sum()
    nz = counts[counts > 0]
    return float(-np.sum((nz / total) * np.log(nz / total)))


def _mutual_information(table: np.ndarray) -> float:
    n = table.sum()
    rows = table.sum(axis=1, keepdims=True)
    cols = table.sum(axis=0, keepdims=True)
    nz = table > 0
    cells = table[nz] / n
    outer = (rows @ cols)[nz] / (n * n)
    return float(np.sum(cells * np.log(cells / outer)))


def _expected_mutual_information(table: np.ndarray) -> float:
    """Expected MI over random tables with these margins (permutation model)."""
    n = int(table.sum())
    a = table.sum(axis=1).astype(np.int64)
    b = table.sum(axis=0).astype(np.int64)
    log_fact_n = gammaln(n + 1)
    emi = 0.0
    for ai in a:
        for bj in b:
            lo = max(1, ai + bj - n)
            hi = min(ai, bj)
            if hi < lo:
                continue
            nij = np.arange(lo, hi + 1, dtype=np.int64)
            log_weight = (
                gammaln(ai + 1) + gammaln(bj + 1)
                + gammaln(n - ai + 1) + gammaln(n - bj + 1)
                - log_fact_n - gammaln(nij + 1)
                - gammaln(ai - nij + 1) - gammaln(bj - nij + 1)
                - gammaln(n - ai - bj + nij + 1)
            )
            terms = (nij / n) * (np.log(n * nij) - np.log(ai * bj))
            emi += float(np.sum(terms * np.exp(log_weight)))
    return emi


def adjusted_rand_index(truth, pred) -> float:
    table = contingency_table(truth, pred)
    n = int(table.sum())
    sum_cells = float((table * (table - 1) // 2).sum())
    sum_rows = float((table.sum(axis=1) * (table.sum(axis=1) - 1) // 2).sum())
    sum_cols = float((table.sum(axis=0) * (table.sum(axis=0) - 1) // 2).sum())
    total_pairs = n * (n - 1) / 2
    if total_pairs == 0:
        return 1.0
    expected = sum_rows * sum_cols / total_pairs
    max_index = (sum_rows + sum_cols) / 2
    if max_index == expected:
        return 1.0 if sum_cells == max_index else 0.0
    return (sum_cells - expected) / (max_index - expected)


def adjusted_mutual_info(truth, pred) -> float:
    table = contingency_table(truth, pred)
    h_true = _entropy(table.sum(axis=1))
    h_pred = _entropy(table.sum(axis=0))
    if h_true == 0.0 and h_pred == 0.0:
        return 1.0
    mi = _mutual_information(table)
    emi = _expected_mutual_information(table)
    denominator = max(h_true, h_pred) - emi
    if denominator == 0.0:
        return 0.0
    return (mi - emi) / denominator


def homogeneity_completeness_v(truth, pred) -> tuple[float, float, float]:
    table = contingency_table(truth, pred)
    h_true = _entropy(table.sum(axis=1))
    h_pred = _entropy(table.sum(axis=0))
    mi = _mutual_information(table)
    # H(C|K) = H(C) - I(C;K), likewise for H(K|C).
    homogeneity = 1.0 if h_true == 0.0 else mi / h_true
    completeness = 1.0 if h_pred == 0.0 else mi / h_pred
    if homogeneity + completeness == 0.0:
        v_measure = 0.0
    else:
        v_measure = (
            2.0 * homogeneity * completeness / (homogeneity + completeness)
        )

    def clip(x: float) -> float:
        return float(min(1.0, max(0.0, x)))

    return clip(homogeneity), clip(completeness), clip(v_measure)


def cluster_metrics(truth, pred, k: int | None = None, seed: int = 0,
                    iterations: int = 0) -> ClusterReport:
    """All five external metrics against ground-truth labels.

    `k`, `seed`, and `iterations` only annotate the report; they default
    sensibly when the caller evaluates a pre-existing assignment.
    """
    homogeneity, completeness, v_measure = homogeneity_completeness_v(truth, pred)
    if k is None:
        k = int(np.unique(np.asarray(pred)).size)
    return ClusterReport(
        k=k,
        homogeneity=homogeneity,
        completeness=completeness,
        v_measure=v_measure,
        ari=float(adjusted_rand_index(truth, pred)),
        ami=float(adjusted_mutual_info(truth, pred)),
        seed=seed,
        iterations=iterations,
    )


def cluster_eval_sweep(points, labels, k_range, seed: int = 0) -> list[ClusterReport]:
    """Cluster the first k categories into k groups, for each k in turn.

    Categories enter in ascending label order, so each step adds one
    category to the previous step's population.
    """
    X = as_float_matrix(points, name="points")
    y = as_label_vector(labels, name="labels")
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"{X.shape[0]} points vs {y.shape[0]} labels")
    categories = np.unique(y)
    reports = []
    for k in k_range:
        check_count(k, 1, "k")
        if k > categories.size:
            raise ValueError(
                f"k={k} exceeds the {categories.size} labelled categories"
            )
        mask = np.isin(y, categories[:k])
        result = kmeans(X[mask], k, seed=seed)
        reports.append(cluster_metrics(
            y[mask], result.labels, k=k, seed=seed, iterations=result.iterations,
        ))
    return reports


# ---------------------------------------------------------------------------
# CSV exports


def _fmt(value: float) -> str:
    return np.format_float_positional(np.float64(value), unique=True, trim="-")


def write_rankings_csv(entries, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "delta", "rank"])
        for entry in entries:
            writer.writerow([entry.object_id, _fmt(entry.delta), entry.rank])


def write_organization_csv(points, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "z", "delta", "source"])
        for point in points:
            writer.writerow([
                point.object_id, _fmt(point.z), _fmt(point.delta), point.source,
            ])


def write_cluster_reports_csv(reports, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "H", "C", "V", "ARI", "AMI", "seed"])
        for report in reports:
            writer.writerow([
                report.k, _fmt(report.homogeneity), _fmt(report.completeness),
                _fmt(report.v_measure), _fmt(report.ari), _fmt(report.ami),
                report.seed,
            ])
