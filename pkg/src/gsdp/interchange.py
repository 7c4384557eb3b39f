"""File formats for feature sets, heads, prototypes, and signatures.

These formats are this project's own design (no upstream convention exists
for them): binary payloads are 32-bit little-endian reals behind a 4-byte
magic tag, a version byte, and explicit dimensions; CSV is header-first,
comma-separated, with a `.` decimal point regardless of locale. A
`<basename>.meta.json` sidecar may carry category names and provenance
strings next to a feature-set file; its absence is never an error.

Binary writes are byte-deterministic, so identical in-memory values always
produce identical files. All in-memory values are float64 images of the
32-bit interchange reals, which makes the binary round trip an identity.
"""

import csv
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .descriptor import ReductionConfig, Signature, Taxonomy, plan_grid
from .prototype import PrototypeStore, SemanticPrototype
from .validation import as_float_matrix, as_float_vector, as_label_vector

FEATURES_MAGIC = b"GSDF"
HEAD_MAGIC = b"GSDH"
PROTOTYPES_MAGIC = b"GSDP"
SIGNATURE_MAGIC = b"GSDS"
FORMAT_VERSION = 1

CSV_FORMAT = "csv"
BINARY_FORMAT = "binary"


class FormatError(ValueError):
    """A file does not parse under its declared format."""


@dataclass
class FeatureSet:
    """N objects with ids, integer category labels, and m-vector features."""

    ids: list[str]
    labels: np.ndarray
    features: np.ndarray
    category_names: list[str] | None = None

    def __post_init__(self):
        self.features = as_float_matrix(self.features, name="features")
        self.labels = as_label_vector(self.labels, name="labels")
        self.ids = [str(i) for i in self.ids]
        self.validate()

    @property
    def m(self) -> int:
        return self.features.shape[1]

    @property
    def n_objects(self) -> int:
        return self.features.shape[0]

    def validate(self) -> None:
        if not (len(self.ids) == self.labels.shape[0] == self.features.shape[0]):
            raise ValueError(
                f"inconsistent object counts: {len(self.ids)} ids, "
                f"{self.labels.shape[0]} labels, {self.features.shape[0]} rows"
            )
        seen = {}
        for index, object_id in enumerate(self.ids):
            if object_id in seen:
                raise ValueError(
                    f"duplicate id {object_id!r} (records {seen[object_id]} "
                    f"and {index})"
                )
            seen[object_id] = index
        if self.category_names is not None and self.labels.size:
            n = len(self.category_names)
            if int(self.labels.max()) >= n:
                raise ValueError(
                    f"label {int(self.labels.max())} outside the "
                    f"{n} named categories"
                )


@dataclass
class HeadParams:
    """Per-category linear-head weight rows and biases."""

    weights: np.ndarray
    biases: np.ndarray

    def __post_init__(self):
        self.weights = as_float_matrix(self.weights, name="weights")
        self.biases = as_float_vector(self.biases, name="biases")
        if self.biases.shape[0] != self.weights.shape[0]:
            raise ValueError(
                f"{self.weights.shape[0]} weight rows but "
                f"{self.biases.shape[0]} biases"
            )

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def m(self) -> int:
        return self.weights.shape[1]


def _f32(values, name: str) -> np.ndarray:
    """Cast to the 32-bit interchange precision, rejecting overflow."""
    with np.errstate(over="ignore"):
        out = np.asarray(values, dtype="<f4")
    if out.size and not np.isfinite(out).all():
        bad = int(np.flatnonzero(~np.isfinite(out).reshape(-1))[0])
        raise ValueError(
            f"{name} value at flat index {bad} is not representable as a "
            f"finite 32-bit real"
        )
    return out


def _format_value(value: float) -> str:
    # Shortest decimal that parses back to the same 32-bit real.
    return np.format_float_positional(np.float32(value), unique=True, trim="-")


def _read_exact(fh, size: int, what: str) -> bytes:
    data = fh.read(size)
    if len(data) != size:
        raise FormatError(f"truncated file while reading {what}")
    return data


def _check_magic(fh, magic: bytes, path) -> None:
    found = fh.read(len(magic))
    if found != magic:
        raise FormatError(f"{path}: bad magic {found!r}, expected {magic!r}")
    version = _read_exact(fh, 1, "version byte")[0]
    if version != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported format version {version}")


def _sidecar_path(path) -> Path:
    return Path(path).with_suffix(".meta.json")


def _read_sidecar(path) -> list[str] | None:
    sidecar = _sidecar_path(path)
    if not sidecar.exists():
        return None
    with open(sidecar, "r", encoding="utf-8") as fh:
        meta = json.load(fh)
    names = meta.get("category_names")
    return [str(n) for n in names] if names is not None else None


def _write_sidecar(path, category_names, provenance=None) -> None:
    meta: dict = {"category_names": list(category_names)}
    if provenance:
        meta["provenance"] = str(provenance)
    with open(_sidecar_path(path), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# feature sets


def write_feature_set(fset: FeatureSet, path, format: str = BINARY_FORMAT,
                      provenance: str | None = None) -> None:
    """Write a feature set; binary output is byte-deterministic."""
    fset.validate()
    if format == BINARY_FORMAT:
        _write_feature_set_binary(fset, path)
    elif format == CSV_FORMAT:
        _write_feature_set_csv(fset, path)
    else:
        raise ValueError(f"unknown format {format!r}")
    if fset.category_names is not None or provenance:
        _write_sidecar(path, fset.category_names or [], provenance)


def read_feature_set(path, format: str = BINARY_FORMAT) -> FeatureSet:
    if format == BINARY_FORMAT:
        fset = _read_feature_set_binary(path)
    elif format == CSV_FORMAT:
        fset = _read_feature_set_csv(path)
    else:
        raise ValueError(f"unknown format {format!r}")
    names = _read_sidecar(path)
    if names is not None:
        fset.category_names = names
        fset.validate()
    return fset


def _write_feature_set_binary(fset: FeatureSet, path) -> None:
    features = _f32(fset.features, "features")
    with open(path, "wb") as fh:
        fh.write(FEATURES_MAGIC)
        fh.write(struct.pack("<BII", FORMAT_VERSION, fset.n_objects, fset.m))
        for index in range(fset.n_objects):
            encoded = fset.ids[index].encode("utf-8")
            if len(encoded) > 0xFFFF:
                raise ValueError(f"id at record {index} exceeds 65535 bytes")
            fh.write(struct.pack("<H", len(encoded)))
            fh.write(encoded)
            fh.write(struct.pack("<i", int(fset.labels[index])))
            fh.write(features[index].tobytes())


def _read_feature_set_binary(path) -> FeatureSet:
    with open(path, "rb") as fh:
        _check_magic(fh, FEATURES_MAGIC, path)
        n, m = struct.unpack("<II", _read_exact(fh, 8, "dimensions"))
        ids = []
        labels = np.empty(n, dtype=np.int64)
        features = np.empty((n, m), dtype=np.float64)
        for index in range(n):
            (id_len,) = struct.unpack("<H", _read_exact(fh, 2, f"record {index}"))
            ids.append(_read_exact(fh, id_len, f"record {index} id").decode("utf-8"))
            (labels[index],) = struct.unpack(
                "<i", _read_exact(fh, 4, f"record {index} label")
            )
            row = np.frombuffer(
                _read_exact(fh, 4 * m, f"record {index} features"), dtype="<f4"
            )
            if not np.isfinite(row).all():
                raise FormatError(f"{path}: non-finite value in record {index}")
            features[index] = row
        if fh.read(1):
            raise FormatError(f"{path}: trailing bytes after {n} records")
    try:
        return FeatureSet(ids=ids, labels=labels, features=features)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def _write_feature_set_csv(fset: FeatureSet, path) -> None:
    features = _f32(fset.features, "features")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "label"] + [f"f{j}" for j in range(fset.m)])
        for index in range(fset.n_objects):
            writer.writerow(
                [fset.ids[index], int(fset.labels[index])]
                + [_format_value(v) for v in features[index]]
            )


def _read_feature_set_csv(path) -> FeatureSet:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty file, expected a header") from None
        if len(header) < 2 or header[0] != "id" or header[1] != "label":
            raise FormatError(
                f"{path}: malformed header {header!r}, expected id,label,f0,..."
            )
        m = len(header) - 2
        ids, labels, rows = [], [], []
        for row_number, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != m + 2:
                raise FormatError(
                    f"{path}: row {row_number} has {len(row) - 2} feature "
                    f"columns, expected {m}"
                )
            ids.append(row[0])
            try:
                labels.append(int(row[1]))
            except ValueError:
                raise FormatError(
                    f"{path}: row {row_number} has non-integer label {row[1]!r}"
                ) from None
            try:
                # parse at interchange precision so the shortest decimals
                # written by the formatter restore the exact values
                values = np.array(row[2:], dtype=np.float32).astype(np.float64)
            except ValueError:
                raise FormatError(
                    f"{path}: row {row_number} has a non-numeric feature value"
                ) from None
            if values.size and not np.isfinite(values).all():
                raise FormatError(
                    f"{path}: row {row_number} has a non-finite feature value"
                )
            rows.append(values)
        features = (
            np.vstack(rows) if rows else np.empty((0, m), dtype=np.float64)
        )
    try:
        return FeatureSet(ids=ids, labels=np.array(labels, dtype=np.int64),
                          features=features)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# head parameters


def write_head(head: HeadParams, path, format: str = BINARY_FORMAT) -> None:
    if format == BINARY_FORMAT:
        _write_head_binary(head, path)
    elif format == CSV_FORMAT:
        _write_head_csv(head, path)
    else:
        raise ValueError(f"unknown format {format!r}")


def read_head(path, format: str = BINARY_FORMAT) -> HeadParams:
    if format == BINARY_FORMAT:
        return _read_head_binary(path)
    if format == CSV_FORMAT:
        return _read_head_csv(path)
    raise ValueError(f"unknown format {format!r}")


def _write_head_binary(head: HeadParams, path) -> None:
    weights = _f32(head.weights, "weights")
    biases = _f32(head.biases, "biases")
    with open(path, "wb") as fh:
        fh.write(HEAD_MAGIC)
        fh.write(struct.pack("<BII", FORMAT_VERSION, head.n, head.m))
        fh.write(biases.tobytes())
        fh.write(weights.tobytes())


def _read_head_binary(path) -> HeadParams:
    with open(path, "rb") as fh:
        _check_magic(fh, HEAD_MAGIC, path)
        n, m = struct.unpack("<II", _read_exact(fh, 8, "dimensions"))
        biases = np.frombuffer(_read_exact(fh, 4 * n, "biases"), dtype="<f4")
        weights = np.frombuffer(
            _read_exact(fh, 4 * n * m, "weights"), dtype="<f4"
        ).reshape(n, m)
        if fh.read(1):
            raise FormatError(f"{path}: trailing bytes after weight rows")
    if not np.isfinite(biases).all() or not np.isfinite(weights).all():
        raise FormatError(f"{path}: non-finite head parameter")
    return HeadParams(weights=weights.astype(np.float64),
                      biases=biases.astype(np.float64))


def _write_head_csv(head: HeadParams, path) -> None:
    weights = _f32(head.weights, "weights")
    biases = _f32(head.biases, "biases")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["category", "bias"] + [f"w{j}" for j in range(head.m)])
        for index in range(head.n):
            writer.writerow(
                [index, _format_value(biases[index])]
                + [_format_value(v) for v in weights[index]]
            )


def _read_head_csv(path) -> HeadParams:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty file, expected a header") from None
        if len(header) < 2 or header[0] != "category" or header[1] != "bias":
            raise FormatError(
                f"{path}: malformed header {header!r}, expected category,bias,w0,..."
            )
        m = len(header) - 2
        biases, rows = [], []
        for row_number, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != m + 2:
                raise FormatError(
                    f"{path}: row {row_number} has {len(row) - 2} weight "
                    f"columns, expected {m}"
                )
            if int(row[0]) != row_number - 1:
                raise FormatError(
                    f"{path}: row {row_number} declares category {row[0]}, "
                    f"expected {row_number - 1}"
                )
            try:
                biases.append(float(np.float32(row[1])))
                rows.append(np.array(row[2:], dtype=np.float32).astype(np.float64))
            except ValueError:
                raise FormatError(
                    f"{path}: row {row_number} has a non-numeric value"
                ) from None
        weights = np.vstack(rows) if rows else np.empty((0, m), dtype=np.float64)
    try:
        return HeadParams(weights=weights, biases=np.array(biases))
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# prototype stores


def write_prototypes(store: PrototypeStore, path) -> None:
    """Binary-only persistence of a prototype store."""
    with open(path, "wb") as fh:
        fh.write(PROTOTYPES_MAGIC)
        fh.write(struct.pack("<BII", FORMAT_VERSION, len(store), store.m))
        for proto in store:
            fh.write(struct.pack("<iIf", proto.category, proto.n_typical,
                                 float(proto.bias)))
            fh.write(_f32(proto.mean, "mean").tobytes())
            fh.write(_f32(proto.std, "std").tobytes())
            fh.write(_f32(proto.weights, "weights").tobytes())


def read_prototypes(path) -> PrototypeStore:
    with open(path, "rb") as fh:
        _check_magic(fh, PROTOTYPES_MAGIC, path)
        count, m = struct.unpack("<II", _read_exact(fh, 8, "dimensions"))
        store = PrototypeStore(m=m)
        for index in range(count):
            category, n_typical, bias = struct.unpack(
                "<iIf", _read_exact(fh, 12, f"prototype {index} header")
            )
            vectors = []
            for part in ("mean", "std", "weights"):
                buf = _read_exact(fh, 4 * m, f"prototype {index} {part}")
                vectors.append(np.frombuffer(buf, dtype="<f4").astype(np.float64))
            try:
                store.add(SemanticPrototype(
                    category=category, mean=vectors[0], std=vectors[1],
                    weights=vectors[2], bias=float(bias), n_typical=n_typical,
                ))
            except ValueError as exc:
                raise FormatError(f"{path}: prototype {index}: {exc}") from exc
        if fh.read(1):
            raise FormatError(f"{path}: trailing bytes after {count} prototypes")
    return store


# ---------------------------------------------------------------------------
# signatures


def write_signatures(signatures, path, format: str = BINARY_FORMAT) -> None:
    if format == BINARY_FORMAT:
        _write_signatures_binary(signatures, path)
    elif format == CSV_FORMAT:
        _write_signatures_csv(signatures, path)
    else:
        raise ValueError(f"unknown format {format!r}")


def read_signatures(path, format: str = BINARY_FORMAT) -> list[Signature]:
    if format == BINARY_FORMAT:
        return _read_signatures_binary(path)
    if format == CSV_FORMAT:
        return _read_signatures_csv(path)
    raise ValueError(f"unknown format {format!r}")


def _write_signatures_binary(signatures, path) -> None:
    with open(path, "wb") as fh:
        for sig in signatures:
            config = sig.config
            fh.write(SIGNATURE_MAGIC)
            fh.write(struct.pack(
                "<BBiIIIII", FORMAT_VERSION, int(sig.taxonomy), sig.category,
                config.r, config.m, config.m_padded, config.p, config.q,
            ))
            encoded = (sig.object_id or "").encode("utf-8")
            if len(encoded) > 0xFFFF:
                raise ValueError("object id exceeds 65535 bytes")
            fh.write(struct.pack("<H", len(encoded)))
            fh.write(encoded)
            fh.write(_f32(sig.values, "signature values").tobytes())


def _read_signatures_binary(path) -> list[Signature]:
    signatures = []
    with open(path, "rb") as fh:
        while True:
            magic = fh.read(len(SIGNATURE_MAGIC))
            if not magic:
                break
            index = len(signatures)
            if magic != SIGNATURE_MAGIC:
                raise FormatError(
                    f"{path}: bad magic {magic!r} at signature {index}"
                )
            version, taxonomy, category, r, m, m_padded, p, q = struct.unpack(
                "<BBiIIIII", _read_exact(fh, 26, f"signature {index} header")
            )
            if version != FORMAT_VERSION:
                raise FormatError(f"{path}: unsupported format version {version}")
            (id_len,) = struct.unpack(
                "<H", _read_exact(fh, 2, f"signature {index} id length")
            )
            object_id = _read_exact(
                fh, id_len, f"signature {index} id"
            ).decode("utf-8") or None
            try:
                config = ReductionConfig(r=r, m=m, m_padded=m_padded, p=p, q=q)
                taxonomy = Taxonomy(taxonomy)
            except ValueError as exc:
                raise FormatError(f"{path}: signature {index}: {exc}") from exc
            buf = _read_exact(fh, 4 * config.signature_length,
                              f"signature {index} values")
            values = np.frombuffer(buf, dtype="<f4").astype(np.float64)
            signatures.append(Signature(
                values=values, taxonomy=taxonomy, category=category,
                config=config, object_id=object_id,
            ))
    return signatures


def _write_signatures_csv(signatures, path) -> None:
    signatures = list(signatures)
    configs = {sig.config for sig in signatures}
    if len(configs) > 1:
        raise ValueError("CSV signature files require a single shared config")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        if not signatures:
            writer.writerow(["id", "taxonomy", "category", "r", "m"])
            return
        config = signatures[0].config
        writer.writerow(
            ["id", "taxonomy", "category", "r", "m"]
            + [f"v{j}" for j in range(config.signature_length)]
        )
        for sig in signatures:
            values = _f32(sig.values, "signature values")
            writer.writerow(
                [sig.object_id or "", sig.taxonomy.name, sig.category,
                 config.r, config.m]
                + [_format_value(v) for v in values]
            )


def _read_signatures_csv(path) -> list[Signature]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty file, expected a header") from None
        if header[:5] != ["id", "taxonomy", "category", "r", "m"]:
            raise FormatError(f"{path}: malformed header {header!r}")
        signatures = []
        config = None
        for row_number, row in enumerate(reader, start=1):
            if not row:
                continue
            try:
                r, m = int(row[3]), int(row[4])
                if config is None or (config.r, config.m) != (r, m):
                    config = plan_grid(m, r)
                values = np.array(row[5:], dtype=np.float32).astype(np.float64)
                sig = Signature(
                    values=values, taxonomy=Taxonomy[row[1]],
                    category=int(row[2]), config=config,
                    object_id=row[0] or None,
                )
            except (KeyError, ValueError, IndexError) as exc:
                raise FormatError(f"{path}: row {row_number}: {exc}") from exc
            signatures.append(sig)
    return signatures
