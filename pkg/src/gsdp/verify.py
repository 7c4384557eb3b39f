"""Batch property checks wiring the public operations end to end.

Each suite exercises one guarantee the library makes: recovery of the
semantic value and prototypical distance from signature halves, the
pseudometric axioms of the object distance, the signature-space continuity
bound, cross-domain ranking consistency, and determinism. The report text
is a pure function of (input, r, seed), so repeated runs compare equal.
"""

from dataclasses import dataclass

import numpy as np

from .analysis import kmeans, rank_members, rank_signatures, verify_continuity_bound
from .descriptor import (
    describe_abstract_prototype,
    describe_object,
    plan_grid,
    recover_prototypical_distance,
    recover_semantic_value,
)
from .interchange import FeatureSet, HeadParams
from .prototype import (
    build_store,
    object_distance,
    prototypical_distance,
    semantic_value,
)

_REL_TOL = 1e-6


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.detail}"


def _close(recovered: float, direct: float) -> bool:
    return abs(recovered - direct) <= _REL_TOL * (1.0 + abs(direct))


def run_property_suites(fset: FeatureSet, head: HeadParams, r: int = 16,
                        seed: int = 0) -> list[SuiteResult]:
    if fset.m != head.m:
        raise ValueError(f"feature length {fset.m} vs head width {head.m}")
    results = []
    store, skipped = build_store(fset, head)
    config = plan_grid(fset.m, r)

    if len(store):
        results.append(SuiteResult(
            "prototype-construction", True,
            f"{len(store)} prototypes, {len(skipped)} categories skipped",
        ))
    else:
        results.append(SuiteResult(
            "prototype-construction", False,
            "no category kept any typical member",
        ))
        return results

    signatures = {}
    failures = 0
    checked = 0
    for index in range(fset.n_objects):
        category = int(fset.labels[index])
        if category not in store:
            continue
        proto = store.get(category)
        sig = describe_object(fset.features[index], proto, config,
                              object_id=fset.ids[index])
        signatures.setdefault(category, []).append((index, sig))
        checked += 1
        if not _close(recover_semantic_value(sig),
                      semantic_value(fset.features[index], proto)):
            failures += 1
        if not _close(recover_prototypical_distance(sig),
                      prototypical_distance(fset.features[index], proto)):
            failures += 1
    for proto in store:
        sig = describe_abstract_prototype(proto, config)
        if not _close(recover_semantic_value(sig),
                      semantic_value(proto.mean, proto)):
            failures += 1
        if not _close(recover_prototypical_distance(sig), 0.0):
            failures += 1
    results.append(SuiteResult(
        "signature-recovery", failures == 0,
        f"{checked} objects and {len(store)} prototypes, {failures} failures",
    ))

    rng = np.random.default_rng(seed)
    metric_failures = 0
    n_triples = min(200, fset.n_objects ** 2)
    for _ in range(n_triples):
        i, j, h = (int(v) for v in rng.integers(fset.n_objects, size=3))
        category = int(fset.labels[i])
        proto = store.get(category) if category in store else next(iter(store))
        f1, f2, f3 = fset.features[i], fset.features[j], fset.features[h]
        d12 = object_distance(f1, f2, proto)
        d21 = object_distance(f2, f1, proto)
        d13 = object_distance(f1, f3, proto)
        d32 = object_distance(f3, f2, proto)
        if d12 != d21 or d12 < 0 or object_distance(f1, f1, proto) != 0.0:
            metric_failures += 1
        if d12 > d13 + d32 + 1e-9 * (1.0 + d12):
            metric_failures += 1
    results.append(SuiteResult(
        "pseudometric-axioms", metric_failures == 0,
        f"{n_triples} sampled triples, {metric_failures} failures",
    ))

    try:
        report = verify_continuity_bound(fset, next(iter(store)),
                                         samples=500, seed=seed, r=r)
        results.append(SuiteResult(
            "continuity-upper-bound", True,
            f"{report.samples} pairs, max l1/(2*delta) = {report.max_ratio:.6f}, "
            f"lower-bound violations {report.violations} (expected, not asserted)",
        ))
    except AssertionError as exc:
        results.append(SuiteResult("continuity-upper-bound", False, str(exc)))

    mismatches = 0
    for category, members in sorted(signatures.items()):
        indices = [i for i, _ in members]
        subset = FeatureSet(
            ids=[fset.ids[i] for i in indices],
            labels=fset.labels[indices],
            features=fset.features[indices],
        )
        by_features = [e.object_id for e in rank_members(subset, store.get(category))]
        by_signature = [e.object_id for e in rank_signatures(s for _, s in members)]
        if by_features != by_signature:
            mismatches += 1
    results.append(SuiteResult(
        "ranking-consistency", mismatches == 0,
        f"{len(signatures)} categories, {mismatches} order mismatches",
    ))

    proto = next(iter(store))
    sig_a = describe_object(fset.features[0], proto, config)
    sig_b = describe_object(fset.features[0], proto, config)
    deterministic = bool(np.array_equal(sig_a.values, sig_b.values))
    if fset.n_objects >= 2:
        k = min(2, fset.n_objects)
        run_a = kmeans(fset.features, k, seed=seed)
        run_b = kmeans(fset.features, k, seed=seed)
        deterministic = deterministic and bool(
            np.array_equal(run_a.labels, run_b.labels)
        )
    results.append(SuiteResult(
        "determinism", deterministic,
        "repeated describe and clustering runs are identical",
    ))
    return results
