"""Command-line frontend.

Exit codes: 0 success, 1 validation or format error, 2 file-system error,
3 property-suite failure from `verify`. Every command is deterministic
given its flags; all randomness sits behind --seed. Each writing command
drops a `<stem>.manifest.json` (or `manifest.json` for synth) next to its
outputs, recording command, inputs, outputs, r, seed, and tool version by
basename so reruns with the same flags are byte-identical anywhere.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    cluster_eval_sweep,
    map_gamma,
    map_rho,
    rank_members,
    write_cluster_reports_csv,
    write_organization_csv,
    write_rankings_csv,
)
from .descriptor import (
    Taxonomy,
    describe_abstract_prototype,
    describe_category,
    describe_object,
    plan_grid,
)
from .interchange import (
    BINARY_FORMAT,
    CSV_FORMAT,
    FeatureSet,
    read_feature_set,
    read_head,
    read_prototypes,
    read_signatures,
    write_feature_set,
    write_head,
    write_prototypes,
    write_signatures,
)
from .prototype import build_store
from .synth import fit_linear_head, make_gaussian_features
from .verify import run_property_suites

_TAXONOMIES = {
    "object": Taxonomy.OBJECT,
    "abstract": Taxonomy.ABSTRACT_PROTOTYPE,
    "category": Taxonomy.CATEGORY,
}


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to the validation exit code."""

    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def _ensure_parent(path) -> Path:
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _write_manifest(path: Path, command: str, inputs, outputs,
                    r: int | None = None, seed: int | None = None,
                    extra: dict | None = None) -> None:
    payload = {
        "command": command,
        "inputs": sorted(Path(p).name for p in inputs),
        "outputs": sorted(Path(p).name for p in outputs),
        "version": __version__,
    }
    if r is not None:
        payload["r"] = r
    if seed is not None:
        payload["seed"] = seed
    payload.update(extra or {})
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _manifest_for(out_path: Path) -> Path:
    return out_path.with_name(out_path.stem + ".manifest.json")


def _file_ext(format: str) -> str:
    return ".csv" if format == CSV_FORMAT else ".bin"


def _cmd_synth(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    fset = make_gaussian_features(
        args.categories, args.per_category, args.m,
        separation=args.separation, seed=args.seed,
    )
    head = fit_linear_head(fset.features, fset.labels, args.categories)
    ext = _file_ext(args.format)
    features_path = out_dir / f"features{ext}"
    head_path = out_dir / f"head{ext}"
    write_feature_set(fset, features_path, format=args.format,
                      provenance="synthetic gaussian blobs")
    write_head(head, head_path, format=args.format)
    _write_manifest(
        out_dir / "manifest.json", "synth", [],
        [features_path, head_path], seed=args.seed,
        extra={
            "categories": args.categories,
            "per_category": args.per_category,
            "m": args.m,
            "separation": args.separation,
        },
    )
    print(f"wrote {features_path} and {head_path}")
    return 0


def _cmd_prototype(args) -> int:
    fset = read_feature_set(args.features, format=args.format)
    head = read_head(args.head, format=args.format)
    store, skipped = build_store(fset, head)
    out = _ensure_parent(args.out)
    write_prototypes(store, out)
    _write_manifest(
        _manifest_for(out), "prototype", [args.features, args.head], [out],
        extra={"skipped_categories": skipped, "warnings": len(skipped)},
    )
    print(f"wrote {len(store)} prototypes to {out}"
          + (f" ({len(skipped)} categories skipped)" if skipped else ""))
    return 0


def _cmd_describe(args) -> int:
    fset = read_feature_set(args.features, format=args.format)
    store = read_prototypes(args.prototypes)
    if fset.m != store.m:
        raise ValueError(f"features have m={fset.m}, prototypes m={store.m}")
    config = plan_grid(store.m, args.r)
    taxonomy = _TAXONOMIES[args.taxonomy]
    signatures = []
    skipped = 0
    if taxonomy is Taxonomy.OBJECT:
        for index in range(fset.n_objects):
            category = int(fset.labels[index])
            if category not in store:
                skipped += 1
                continue
            signatures.append(describe_object(
                fset.features[index], store.get(category), config,
                object_id=fset.ids[index],
            ))
    elif taxonomy is Taxonomy.ABSTRACT_PROTOTYPE:
        signatures = [describe_abstract_prototype(p, config) for p in store]
    else:
        signatures = [describe_category(p, config) for p in store]
    out = _ensure_parent(args.out)
    write_signatures(signatures, out, format=args.format)
    _write_manifest(
        _manifest_for(out), "describe", [args.features, args.prototypes],
        [out], r=args.r,
        extra={"taxonomy": args.taxonomy, "signatures": len(signatures),
               "warnings": skipped},
    )
    print(f"wrote {len(signatures)} signatures to {out}"
          + (f" ({skipped} objects without a prototype skipped)" if skipped else ""))
    return 0


def _cmd_rank(args) -> int:
    fset = read_feature_set(args.features, format=args.format)
    store = read_prototypes(args.prototypes)
    if args.category not in store:
        raise ValueError(f"no prototype for category {args.category}")
    mask = fset.labels == args.category
    members = FeatureSet(
        ids=[fset.ids[i] for i in np.flatnonzero(mask)],
        labels=fset.labels[mask],
        features=fset.features[mask],
    )
    entries = rank_members(members, store.get(args.category))
    if args.k is not None and 2 * args.k < len(entries):
        entries = entries[:args.k] + entries[-args.k:]
    out = _ensure_parent(args.out)
    write_rankings_csv(entries, out)
    _write_manifest(
        _manifest_for(out), "rank", [args.features, args.prototypes], [out],
        extra={"category": args.category,
               "k": args.k if args.k is not None else "all"},
    )
    print(f"wrote {len(entries)} ranking rows to {out}")
    return 0


def _cmd_organize(args) -> int:
    points = []
    if args.signatures:
        signatures = read_signatures(args.signatures, format=args.format)
        points = map_gamma(signatures)
        inputs = [args.signatures]
    else:
        if not args.prototypes:
            raise ValueError("--prototypes is required with --features")
        fset = read_feature_set(args.features, format=args.format)
        store = read_prototypes(args.prototypes)
        inputs = [args.features, args.prototypes]
        for category in store.categories():
            mask = fset.labels == category
            if not mask.any():
                continue
            subset = FeatureSet(
                ids=[fset.ids[i] for i in np.flatnonzero(mask)],
                labels=fset.labels[mask],
                features=fset.features[mask],
            )
            points.extend(map_rho(subset, store.get(category)))
    out = _ensure_parent(args.out)
    write_organization_csv(points, out)
    _write_manifest(_manifest_for(out), "organize", inputs, [out])
    print(f"wrote {len(points)} organization points to {out}")
    return 0


def _cmd_cluster_eval(args) -> int:
    if args.signatures:
        signatures = read_signatures(args.signatures, format=args.format)
        if not signatures:
            raise ValueError("signature file holds no signatures")
        points = np.vstack([sig.values for sig in signatures])
        labels = np.array([sig.category for sig in signatures], dtype=np.int64)
        inputs = [args.signatures]
    else:
        fset = read_feature_set(args.features, format=args.format)
        points = fset.features
        labels = fset.labels
        inputs = [args.features]
    if args.k_max < args.k_min:
        raise ValueError(f"k-max {args.k_max} below k-min {args.k_min}")
    reports = cluster_eval_sweep(points, labels,
                                 range(args.k_min, args.k_max + 1),
                                 seed=args.seed)
    out = _ensure_parent(args.out)
    write_cluster_reports_csv(reports, out)
    _write_manifest(
        _manifest_for(out), "cluster-eval", inputs, [out], seed=args.seed,
        extra={"k_min": args.k_min, "k_max": args.k_max},
    )
    print(f"wrote {len(reports)} cluster reports to {out}")
    return 0


def _cmd_verify(args) -> int:
    fset = read_feature_set(args.features, format=args.format)
    head = read_head(args.head, format=args.format)
    results = run_property_suites(fset, head, r=args.r, seed=args.seed)
    for result in results:
        print(result.line())
    failed = sum(1 for result in results if not result.passed)
    print(f"{len(results) - failed}/{len(results)} property suites passed")
    return 0 if failed == 0 else 3


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gsdp", description=__doc__.splitlines()[0]
                     if __doc__ else None)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, features=True, head=False, prototypes=False, r=False,
                   seed=False, out=True):
        if features:
            p.add_argument("--features", required=True,
                           help="feature-set file")
        if head:
            p.add_argument("--head", required=True,
                           help="linear-head parameter file")
        if prototypes:
            p.add_argument("--prototypes", required=True,
                           help="prototype store file")
        if r:
            p.add_argument("--r", type=int, default=16,
                           help="reduction block side (default 16)")
        if seed:
            p.add_argument("--seed", type=int, default=0,
                           help="random seed (default 0)")
        p.add_argument("--format", choices=[CSV_FORMAT, BINARY_FORMAT],
                       default=BINARY_FORMAT,
                       help="feature/head/signature file format")
        if out:
            p.add_argument("--out", required=True, help="output file")

    p = sub.add_parser("synth", help="generate a synthetic feature set and head")
    p.add_argument("--categories", type=int, required=True)
    p.add_argument("--per-category", type=int, required=True)
    p.add_argument("--m", type=int, required=True, help="feature length")
    p.add_argument("--separation", type=float, default=10.0,
                   help="expected distance between category means")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=[CSV_FORMAT, BINARY_FORMAT],
                   default=BINARY_FORMAT)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("prototype", help="build one prototype per category")
    add_common(p, head=True)
    p.set_defaults(func=_cmd_prototype)

    p = sub.add_parser("describe", help="compute semantic signatures")
    add_common(p, prototypes=True, r=True)
    p.add_argument("--taxonomy", choices=sorted(_TAXONOMIES), default="object")
    p.set_defaults(func=_cmd_describe)

    p = sub.add_parser("rank", help="rank category members by typicality")
    add_common(p, prototypes=True)
    p.add_argument("--category", type=int, required=True)
    p.add_argument("--k", type=int, default=None,
                   help="keep only the k closest and k farthest members")
    p.set_defaults(func=_cmd_rank)

    p = sub.add_parser("organize",
                       help="map objects to (semantic value, distance) points")
    p.add_argument("--features", help="feature-set file")
    p.add_argument("--signatures", help="signature file (alternative input)")
    p.add_argument("--prototypes", help="prototype store file")
    p.add_argument("--format", choices=[CSV_FORMAT, BINARY_FORMAT],
                   default=BINARY_FORMAT)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_organize)

    p = sub.add_parser("cluster-eval",
                       help="k-means sweep with external quality metrics")
    p.add_argument("--features", help="feature-set file")
    p.add_argument("--signatures", help="signature file (alternative input)")
    p.add_argument("--k-min", type=int, default=3)
    p.add_argument("--k-max", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=[CSV_FORMAT, BINARY_FORMAT],
                   default=BINARY_FORMAT)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_cluster_eval)

    p = sub.add_parser("verify", help="run the property suites end to end")
    add_common(p, head=True, r=True, seed=True, out=False)
    p.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command in ("organize", "cluster-eval"):
            if bool(args.features) == bool(args.signatures):
                parser.error(
                    "exactly one of --features or --signatures is required")
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        return args.func(args)
    except OSError as exc:
        print(f"gsdp: i/o error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"gsdp: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
