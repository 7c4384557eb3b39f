"""Signature construction and recovery.

A feature vector is compressed by tiling it (zero-padded) into r-by-r blocks
and summing, per block, the weighted values that fall into each of 8 angular
bins around the block center. Running the reduction once on the raw features
and once on the absolute residual against the prototype mean gives the two
halves of a signature: the first half sums back to the semantic value, the
second to the prototypical distance.
"""

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .prototype import SemanticPrototype
from .validation import as_float_vector, check_count

MEANING = "meaning"
DIFFERENCE = "difference"
BINS_PER_BLOCK = 8


class Taxonomy(enum.IntEnum):
    """Which of the three signature kinds a signature represents."""

    OBJECT = 1
    ABSTRACT_PROTOTYPE = 2
    CATEGORY = 3


@dataclass(frozen=True)
class ReductionConfig:
    """Block-grid geometry for one (m, r) pair.

    m_padded is the smallest multiple of r*r at or above m; p and q are the
    matrix dimensions the padded vector is reshaped into, both divisible by r.
    """

    r: int
    m: int
    m_padded: int
    p: int
    q: int

    def __post_init__(self):
        if self.r < 2:
            raise ValueError(f"r must be >= 2, got {self.r}")
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if self.p * self.q != self.m_padded:
            raise ValueError("p * q must equal m_padded")
        if self.p % self.r or self.q % self.r:
            raise ValueError("r must divide both p and q")
        if not (0 <= self.m_padded - self.m < self.r * self.r):
            raise ValueError("m_padded must be the least r*r multiple >= m")

    @property
    def n_blocks(self) -> int:
        return self.m_padded // (self.r * self.r)

    @property
    def half_length(self) -> int:
        return self.n_blocks * BINS_PER_BLOCK

    @property
    def signature_length(self) -> int:
        return 2 * self.half_length


@dataclass(frozen=True)
class Signature:
    """Fixed-length descriptor: meaning half followed by difference half."""

    values: np.ndarray
    taxonomy: Taxonomy
    category: int
    config: ReductionConfig
    object_id: str | None = None

    def __post_init__(self):
        values = as_float_vector(self.values, name="values")
        if values.shape[0] != self.config.signature_length:
            raise ValueError(
                f"signature has {values.shape[0]} values, config demands "
                f"{self.config.signature_length}"
            )
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "taxonomy", Taxonomy(self.taxonomy))

    @property
    def meaning_half(self) -> np.ndarray:
        return self.values[: self.config.half_length]

    @property
    def difference_half(self) -> np.ndarray:
        return self.values[self.config.half_length :]


def plan_grid(m: int, r: int) -> ReductionConfig:
    """Choose the padded length and the p-by-q layout for an m-vector.

    m_padded = r^2 * ceil(m / r^2). Among all factorizations
    m_padded = p * q with r dividing both, picks the one minimizing |p - q|,
    tie-broken toward p <= q.
    """
    r = check_count(r, 2, "r")
    m = check_count(m, 1, "m")
    block = r * r
    m_padded = block * ((m + block - 1) // block)
    best = None
    for p in range(r, m_padded + 1, r):
        if m_padded % p:
            continue
        q = m_padded // p
        if q % r:
            continue
        key = (abs(p - q), p)
        if best is None or key < best[0]:
            best = (key, p, q)
    _, p, q = best  # padding to a multiple of r*r guarantees p = r works
    return ReductionConfig(r=r, m=m, m_padded=m_padded, p=p, q=q)


@lru_cache(maxsize=64)
def angle_grid(r: int) -> np.ndarray:
    """Angles (degrees) of each r-by-r cell around the block center.

    Cell (i, j) sits at dx = j - (r-1)/2, dy = (r-1)/2 - i (dy points up);
    its angle is atan2(dy, dx) normalized to (0, 360] with exact 0 mapped to
    360, and for odd r the center cell is assigned 360. Cells lying exactly
    on a 45-degree boundary get the exact boundary value so that bin
    membership never depends on rounding.
    """
    r = check_count(r, 2, "r")
    # Offsets in half-units keep boundary detection in exact integers.
    u = 2 * np.arange(r)[None, :] - (r - 1)  # 2*dx per column
    v = (r - 1) - 2 * np.arange(r)[:, None]  # 2*dy per row
    u, v = np.broadcast_arrays(u, v)
    theta = np.degrees(np.arctan2(v, u))
    theta = np.where(theta <= 0.0, theta + 360.0, theta)
    exact = [
        ((v == 0) & (u > 0), 360.0),
        ((u == v) & (u > 0), 45.0),
        ((u == 0) & (v > 0), 90.0),
        ((u == -v) & (v > 0), 135.0),
        ((v == 0) & (u < 0), 180.0),
        ((u == v) & (u < 0), 225.0),
        ((u == 0) & (v < 0), 270.0),
        ((u == -v) & (u > 0), 315.0),
        ((u == 0) & (v == 0), 360.0),
    ]
    for mask, value in exact:
        theta[mask] = value
    theta.setflags(write=False)
    return theta


@lru_cache(maxsize=64)
def _slot_map(config: ReductionConfig) -> np.ndarray:
    """Output slot (block * 8 + bin - 1) of every padded vector position.

    Positions follow the row-major reshape into p-by-q; blocks are numbered
    row-major as well (block row index outer, block column inner), matching
    the concatenation order of the per-block bin sums.
    """
    r, p, q = config.r, config.p, config.q
    # Bin l covers (45*(l-1), 45*l], so l = ceil(theta / 45).
    bins = np.ceil(angle_grid(r) / 45.0).astype(np.intp)
    rows = np.arange(p)[:, None]
    cols = np.arange(q)[None, :]
    block = (rows // r) * (q // r) + (cols // r)
    cell_bins = bins[rows % r, cols % r]
    slot = (block * BINS_PER_BLOCK + (cell_bins - 1)).reshape(-1)
    slot.setflags(write=False)
    return slot


def reduce_vector(alpha, proto: SemanticPrototype, kind: str,
                  config: ReductionConfig) -> np.ndarray:
    """One half-signature: per-block 8-bin sums of the weighted input.

    The input and the prototype weights are zero-padded to m_padded and the
    bias is spread uniformly over all padded positions, so the half's total
    is exactly the weighted sum it encodes. kind selects the branch:
    "meaning" uses w * alpha + bias/m_padded, "difference" uses |w| * alpha.
    Bins accumulate signed values in a fixed order, so identical inputs give
    bit-identical output.
    """
    if kind not in (MEANING, DIFFERENCE):
        raise ValueError(f"kind must be '{MEANING}' or '{DIFFERENCE}', got {kind!r}")
    if config.m != proto.m:
        raise ValueError(f"config has m={config.m}, prototype has m={proto.m}")
    alpha = as_float_vector(alpha, config.m, name="alpha")
    padded = np.zeros(config.m_padded)
    weights = np.zeros(config.m_padded)
    padded[: config.m] = alpha
    weights[: config.m] = proto.weights
    if kind == MEANING:
        z = weights * padded + proto.bias / config.m_padded
    else:
        z = np.abs(weights) * padded
    return np.bincount(_slot_map(config), weights=z,
                       minlength=config.half_length)


def describe_object(F, proto: SemanticPrototype, config: ReductionConfig,
                    object_id: str | None = None) -> Signature:
    """Object signature: meaning of the features, difference of |F - mean|."""
    F = as_float_vector(F, proto.m, name="F")
    meaning = reduce_vector(F, proto, MEANING, config)
    difference = reduce_vector(np.abs(F - proto.mean), proto, DIFFERENCE, config)
    return Signature(
        values=np.concatenate([meaning, difference]),
        taxonomy=Taxonomy.OBJECT,
        category=proto.category,
        config=config,
        object_id=object_id,
    )


def describe_abstract_prototype(proto: SemanticPrototype,
                                config: ReductionConfig) -> Signature:
    """Central-meaning signature: meaning of the mean, zero residual."""
    meaning = reduce_vector(proto.mean, proto, MEANING, config)
    difference = reduce_vector(np.zeros(proto.m), proto, DIFFERENCE, config)
    return Signature(
        values=np.concatenate([meaning, difference]),
        taxonomy=Taxonomy.ABSTRACT_PROTOTYPE,
        category=proto.category,
        config=config,
    )


def describe_category(proto: SemanticPrototype,
                      config: ReductionConfig) -> Signature:
    """Category signature: meaning of the mean, difference of the stds.

    The difference half sums to sum(|w| * std), a feature-spread summary,
    not a prototypical distance.
    """
    meaning = reduce_vector(proto.mean, proto, MEANING, config)
    difference = reduce_vector(proto.std, proto, DIFFERENCE, config)
    return Signature(
        values=np.concatenate([meaning, difference]),
        taxonomy=Taxonomy.CATEGORY,
        category=proto.category,
        config=config,
    )


def recover_semantic_value(sig: Signature) -> float:
    """Sum of the meaning half."""
    return float(np.sum(sig.meaning_half))


def recover_prototypical_distance(sig: Signature) -> float:
    """Sum of the difference half; for Object signatures this is the
    prototypical distance of the described features."""
    return float(np.sum(sig.difference_half))


def signature_l1(s1: Signature, s2: Signature) -> float:
    """Sum of absolute element differences between two signatures."""
    if s1.values.shape[0] != s2.values.shape[0]:
        raise ValueError(
            f"signature lengths differ: {s1.values.shape[0]} vs "
            f"{s2.values.shape[0]}"
        )
    return float(np.sum(np.abs(s1.values - s2.values)))
