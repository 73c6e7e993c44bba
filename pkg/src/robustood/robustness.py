"""Input-space partitions and the empirical robustness constant.

The partition follows the random-projection recipe: inputs are rescaled into
the unit cube using bounds frozen from a reference set, projected to a low
dimension by a nonnegative row-stochastic matrix, and binned on a regular
grid.  Cell-occupancy histograms give the partition total-variation distance
between two samples, and the per-cell loss spread gives a lower estimate of
the robustness constant.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .datasets import LabeledDataset
from .seeding import derive_rng

LossField = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Partition:
    """Frozen projection + grid covering defining K disjoint cells.

    ``proj_bounds`` delimits the covered region of the projected space: the
    grid spans it, so a covering built from data resolves the region the
    projected reference points actually occupy.  The default unit bounds bin
    ``u`` over [0, 1] directly.
    """

    proj: np.ndarray          # proj_dim x d, rows nonnegative, each summing to 1
    grid: int                 # cells per projected axis
    feature_bounds: np.ndarray  # d x 2 (min, max) used for rescaling
    seed: int
    proj_bounds: np.ndarray | None = None  # proj_dim x 2; None means unit bounds

    def __post_init__(self):
        proj = np.asarray(self.proj, dtype=np.float64)
        bounds = np.asarray(self.feature_bounds, dtype=np.float64)
        if proj.ndim != 2:
            raise ValueError("proj must be a matrix")
        if np.any(proj < 0) or np.max(np.abs(proj.sum(axis=1) - 1.0)) > 1e-12:
            raise ValueError("proj rows must be nonnegative and sum to 1")
        if self.grid < 1:
            raise ValueError("grid must be >= 1")
        if bounds.shape != (proj.shape[1], 2):
            raise ValueError("feature_bounds must be d x 2")
        if self.proj_bounds is None:
            pbounds = np.column_stack([np.zeros(proj.shape[0]), np.ones(proj.shape[0])])
        else:
            pbounds = np.asarray(self.proj_bounds, dtype=np.float64)
            if pbounds.shape != (proj.shape[0], 2):
                raise ValueError("proj_bounds must be proj_dim x 2")
        if np.any(pbounds[:, 1] <= pbounds[:, 0]):
            raise ValueError("proj_bounds must have positive width")
        proj.setflags(write=False)
        bounds.setflags(write=False)
        pbounds.setflags(write=False)
        object.__setattr__(self, "proj", proj)
        object.__setattr__(self, "feature_bounds", bounds)
        object.__setattr__(self, "proj_bounds", pbounds)

    @property
    def proj_dim(self) -> int:
        return self.proj.shape[0]

    @property
    def K(self) -> int:
        return self.grid**self.proj_dim

    def to_json(self) -> str:
        return json.dumps(
            {
                "proj": self.proj.tolist(),
                "grid": self.grid,
                "feature_bounds": self.feature_bounds.tolist(),
                "proj_bounds": self.proj_bounds.tolist(),
                "seed": self.seed,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "Partition":
        payload = json.loads(text)
        return cls(
            proj=np.asarray(payload["proj"], dtype=np.float64),
            grid=int(payload["grid"]),
            feature_bounds=np.asarray(payload["feature_bounds"], dtype=np.float64),
            seed=int(payload["seed"]),
            proj_bounds=np.asarray(payload["proj_bounds"], dtype=np.float64),
        )


@dataclass(frozen=True)
class CellCounts:
    counts: dict[int, int]
    total: int

    def __post_init__(self):
        if sum(self.counts.values()) != self.total:
            raise ValueError("cell counts must sum to the total")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["cell_id", "count"])
            for cell in sorted(self.counts):
                writer.writerow([cell, self.counts[cell]])


def build_partition(
    reference: LabeledDataset, K_target: int, seed: int, proj_dim: int = 3
) -> Partition:
    """Draw the projection and freeze rescaling bounds from a reference set.

    The grid resolution is ``round(K_target ** (1/proj_dim))`` clamped to at
    least 1, so ``K_target`` values like 1000 with the default 3-dim
    projection give exactly a 10x10x10 covering.  Constant feature dimensions
    get a unit-width bound.  The grid covers the span of the *projected*
    reference points (their per-axis min/max), so the cells resolve the
    region the data occupies rather than the whole unit cube.
    """
    if K_target < 1:
        raise ValueError("K_target must be >= 1")
    if proj_dim < 1:
        raise ValueError("proj_dim must be >= 1")
    d = reference.dim
    rng = derive_rng(seed, "partition")
    raw = rng.random((proj_dim, d))
    proj = raw / raw.sum(axis=1, keepdims=True)
    lo = reference.features.min(axis=0)
    hi = reference.features.max(axis=0)
    hi = np.where(hi - lo > 0.0, hi, lo + 1.0)  # unit width for constant dims
    g = max(1, round(K_target ** (1.0 / proj_dim)))
    bounds = np.column_stack([lo, hi])
    width = hi - lo
    u_ref = np.clip((reference.features - lo) / width, 0.0, 1.0) @ proj.T
    plo = u_ref.min(axis=0)
    phi = u_ref.max(axis=0)
    phi = np.where(phi - plo > 0.0, phi, plo + 1.0)
    return Partition(
        proj=proj,
        grid=g,
        feature_bounds=bounds,
        seed=seed,
        proj_bounds=np.column_stack([plo, phi]),
    )


def _rescale(p: Partition, X: np.ndarray) -> np.ndarray:
    lo = p.feature_bounds[:, 0]
    width = p.feature_bounds[:, 1] - lo
    return np.clip((X - lo) / width, 0.0, 1.0)


def assign_cells(p: Partition, X: np.ndarray) -> np.ndarray:
    """Vectorized cell ids for a batch of rows."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if not np.all(np.isfinite(X)):
        raise ValueError("inputs must be finite")
    u = _rescale(p, X) @ p.proj.T  # n x proj_dim, entries in [0, 1]
    plo = p.proj_bounds[:, 0]
    pwidth = p.proj_bounds[:, 1] - plo
    u = np.clip((u - plo) / pwidth, 0.0, 1.0)
    bins = np.minimum(np.floor(u * p.grid), p.grid - 1).astype(np.int64)
    bins = np.maximum(bins, 0)
    weights = p.grid ** np.arange(p.proj_dim, dtype=np.int64)
    return bins @ weights


def assign_cell(p: Partition, x: np.ndarray) -> int:
    """Cell id in ``[0, K)`` of a single point (out-of-range values clamp)."""
    return int(assign_cells(p, np.asarray(x, dtype=np.float64)[None, :])[0])


def cell_counts(p: Partition, data: LabeledDataset) -> CellCounts:
    """Histogram of cell assignments over a dataset's rows."""
    if data.n == 0:
        return CellCounts(counts={}, total=0)
    ids = assign_cells(p, data.features)
    uniq, cnt = np.unique(ids, return_counts=True)
    return CellCounts(counts={int(c): int(k) for c, k in zip(uniq, cnt)}, total=data.n)


def tv_distance(a: CellCounts, b: CellCounts) -> float:
    """L1 distance between the two normalized occupancy histograms, in [0, 2]."""
    if a.total <= 0 or b.total <= 0:
        raise ValueError("both count sets must be nonempty")
    cells = set(a.counts) | set(b.counts)
    return float(
        sum(
            abs(a.counts.get(c, 0) / a.total - b.counts.get(c, 0) / b.total)
            for c in sorted(cells)
        )
    )


def empirical_epsilon(
    p: Partition,
    loss_of: LossField,
    train: LabeledDataset,
    probe: LabeledDataset,
) -> float:
    """Largest within-cell loss gap between a training point and any point.

    For every cell holding at least one training point, the maximum of
    ``|loss(s) - loss(z)|`` over training points ``s`` and points ``z`` from
    train and probe in that cell; 0 when no cell is co-occupied.  This is a
    lower estimate of the true constant, which ranges over the whole sample
    space.
    """
    train_loss = np.asarray(loss_of(train.features, train.labels), dtype=np.float64)
    probe_loss = np.asarray(loss_of(probe.features, probe.labels), dtype=np.float64)
    train_cells = assign_cells(p, train.features) if train.n else np.empty(0, np.int64)
    probe_cells = assign_cells(p, probe.features) if probe.n else np.empty(0, np.int64)

    best = 0.0
    for cell in np.unique(train_cells):
        s_losses = train_loss[train_cells == cell]
        z_losses = np.concatenate([s_losses, probe_loss[probe_cells == cell]])
        # max |loss(s) - loss(z)| over the cell is attained at the extremes
        gap = max(s_losses.max() - z_losses.min(), z_losses.max() - s_losses.min())
        best = max(best, float(gap))
    return best


def cell_pair_counts(
    p: Partition, train: LabeledDataset, probe: LabeledDataset
) -> dict[int, int]:
    """Per-cell count of (train, train-or-probe) pairs backing the estimate.

    A diagnostic for how well the empirical constant covers each cell; cells
    without training points are omitted.
    """
    train_cells = assign_cells(p, train.features) if train.n else np.empty(0, np.int64)
    probe_cells = assign_cells(p, probe.features) if probe.n else np.empty(0, np.int64)
    out: dict[int, int] = {}
    for cell in np.unique(train_cells):
        n_s = int((train_cells == cell).sum())
        n_z = n_s + int((probe_cells == cell).sum())
        out[int(cell)] = n_s * n_z
    return out
