"""All-pairs overlap scoring, overlap histograms, and subspace statistics.

Scoring every ordered pair of an N-frame trajectory is O(N^2 * n_points), so
the pipeline runs two cheap rejects first (rotation gate, bounding-sphere
separation) and evaluates the full point-containment test only on survivors,
one vectorized anchor row at a time. Rows are independent, which makes the
output bit-identical for any thread count.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import dataset, geometry
from .dataset import PairRecord, PoseSet
from .frustum import OverlapConfig, camera_corners, camera_grid, camera_planes
from .geometry import Quaternion, RelativePose, Translation

DEFAULT_BIN_EDGES = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)


@dataclass(frozen=True)
class OverlapBinning:
    """Left-open, right-closed overlap bins; the first bin excludes exact 0."""

    edges: tuple = DEFAULT_BIN_EDGES

    def __post_init__(self):
        e = np.asarray(self.edges, dtype=float)
        if e.ndim != 1 or e.size < 2:
            raise ValueError("need at least two bin edges")
        if np.any(np.diff(e) <= 0):
            raise ValueError("bin edges must be strictly ascending")
        if e[0] < 0.0 or e[-1] > 1.0:
            raise ValueError("bin edges must lie within [0, 1]")

    @property
    def n_bins(self) -> int:
        return len(self.edges) - 1

    def indices(self, scores) -> np.ndarray:
        """Bin index per score; raises if any score falls outside (lo, hi]."""
        scores = np.asarray(scores, dtype=float)
        idx = np.searchsorted(self.edges, scores, side="left") - 1
        if scores.size and (
            np.any(scores <= self.edges[0]) or np.any(scores > self.edges[-1])
        ):
            bad = scores[(scores <= self.edges[0]) | (scores > self.edges[-1])]
            raise ValueError(f"overlap {bad[0]} outside binning range ({self.edges[0]}, {self.edges[-1]}]")
        return idx


@dataclass(frozen=True)
class SubspaceStats:
    """Spread of relative-translation norms above an overlap threshold.

    diameter = mean + 2 * population std of the norms; all three fields are
    None when no pair clears the threshold (the diameter is undefined, not 0).
    """

    threshold: float
    count: int
    mean_norm: float | None
    std_norm: float | None
    diameter: float | None

    @property
    def defined(self) -> bool:
        return self.count > 0


class _FrustumBatch:
    """Per-pose world-space frustum data stacked for row-at-a-time scoring."""

    def __init__(self, poses, cfg: OverlapConfig):
        spec = cfg.frustum
        self.n = len(poses)
        self.quats = geometry.quat_rows(p.rotation for p in poses)
        self.trans = geometry.translation_rows(p.translation for p in poses)
        rot = geometry.quats_to_matrices(self.quats)
        self.rot = rot
        rot_t = np.transpose(rot, (0, 2, 1))
        self.points = np.matmul(camera_grid(spec), rot_t) + self.trans[:, None, :]
        n_cam, d_cam = camera_planes(spec)
        self.normals = np.matmul(n_cam, rot_t)  # (N, 6, 3)
        self.offsets = d_cam[None, :] - np.einsum("nij,nj->ni", self.normals, self.trans)
        # containment as n.p >= threshold, one contiguous row per plane
        self.thresholds = -self.offsets - spec.boundary_epsilon
        corners = camera_corners(spec)
        c_cam = corners.mean(axis=0)
        self.sphere_radius = float(np.linalg.norm(corners - c_cam, axis=1).max())
        self.centers = self.trans + np.einsum("nij,j->ni", rot, c_cam)
        self.eps = spec.boundary_epsilon
        self.n_points = spec.n_points
        self.max_rot = cfg.max_relative_rotation_deg

    def score_row(self, i: int, early_reject: bool) -> np.ndarray:
        """Directional overlap of anchor i against every other pose."""
        ang = geometry.quat_angle_deg_rows(self.quats, self.quats[i])
        cand = ang <= self.max_rot
        cand[i] = False
        if early_reject:
            d2 = np.sum((self.centers - self.centers[i]) ** 2, axis=1)
            cand &= d2 <= (2.0 * self.sphere_radius + 1e-6) ** 2
        row = np.zeros(self.n)
        idx = np.nonzero(cand)[0]
        if idx.size:
            # one flat gemm in plane-major layout: each plane's distances land
            # in a contiguous row, so the six comparisons stream sequentially
            pts = self.points[idx].reshape(-1, 3)
            dist = self.normals[i] @ pts.T  # (6, M * n_points)
            thr = self.thresholds[i]
            inside = dist[0] >= thr[0]
            for k in range(1, 6):
                inside &= dist[k] >= thr[k]
            counts = inside.reshape(idx.size, -1).sum(axis=1)
            row[idx] = counts / self.n_points
        return row


def _score_rows(batch: _FrustumBatch, threads: int, early_reject: bool):
    """Directional score matrix, rows computed independently per anchor."""
    n = batch.n
    scores = np.zeros((n, n))
    if threads <= 1 or n < 4:
        for i in range(n):
            scores[i] = batch.score_row(i, early_reject)
        return scores

    def run_chunk(lo, hi):
        for i in range(lo, hi):
            scores[i] = batch.score_row(i, early_reject)

    step = max(1, -(-n // threads))
    bounds = [(lo, min(lo + step, n)) for lo in range(0, n, step)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        list(pool.map(lambda b: run_chunk(*b), bounds))
    return scores


def overlap_matrix(poses: PoseSet, cfg: OverlapConfig, *, threads: int = 1,
                   early_reject: bool = True) -> np.ndarray:
    """Dense (N, N) directional overlap scores; the diagonal is left at 0."""
    batch = _FrustumBatch(poses.poses, cfg)
    scores = _score_rows(batch, threads, early_reject)
    if cfg.symmetric:
        scores = np.minimum(scores, scores.T)
    return scores


def _relative_rows(batch: _FrustumBatch, i: int, js: np.ndarray):
    """Ground-truth relative poses of anchor i to each query in js."""
    qi = np.broadcast_to(batch.quats[i], (js.size, 4))
    q_rel = geometry.quat_mul_rows(geometry.quat_conj_rows(qi), batch.quats[js])
    q_rel = geometry.normalize_quat_rows(q_rel)
    t_rel = (batch.trans[js] - batch.trans[i]) @ batch.rot[i]
    return q_rel, t_rel


def generate_pairs(poses: PoseSet, cfg: OverlapConfig, min_overlap: float = 0.0,
                   max_overlap: float = 1.0, *, unordered: bool = False,
                   threads: int = 1, early_reject: bool = True) -> list[PairRecord]:
    """All frame pairs with min_overlap < score <= max_overlap.

    Ordered pairs (both directions, directional score) by default; `unordered`
    keeps only anchor_id < query_id using the symmetric score. Each record
    carries the ground-truth relative pose and the configuration digest.
    Output is sorted by (anchor_id, query_id) and independent of `threads`.
    """
    if not (0.0 <= min_overlap < max_overlap <= 1.0):
        raise ValueError("require 0 <= min_overlap < max_overlap <= 1")
    if unordered and not cfg.symmetric:
        raise ValueError("unordered pair generation uses the symmetric score; set cfg.symmetric=True")
    if len(poses) < 2:
        warnings.warn("fewer than 2 poses; no pairs can be generated", stacklevel=2)
        return []
    digest = dataset.config_digest(cfg)
    batch = _FrustumBatch(poses.poses, cfg)
    scores = _score_rows(batch, threads, early_reject)
    if cfg.symmetric:
        scores = np.minimum(scores, scores.T)
    ids = poses.ids()
    records = []
    for i in range(batch.n):
        row = scores[i]
        keep = (row > min_overlap) & (row <= max_overlap)
        if unordered:
            keep &= np.arange(batch.n) > i
        js = np.nonzero(keep)[0]
        if not js.size:
            continue
        q_rel, t_rel = _relative_rows(batch, i, js)
        for k, j in enumerate(js):
            records.append(
                PairRecord(
                    anchor_id=ids[i],
                    query_id=ids[j],
                    overlap=float(row[j]),
                    rel=RelativePose(
                        rotation=Quaternion(*q_rel[k]),
                        translation=Translation(*t_rel[k]),
                    ),
                    config_digest=digest,
                )
            )
    records.sort(key=lambda r: r.key)
    return records


def bin_histogram(pairs, binning: OverlapBinning = OverlapBinning()) -> np.ndarray:
    """Pair counts per overlap bin; the counts partition the pair list."""
    counts = np.zeros(binning.n_bins, dtype=int)
    if not pairs:
        return counts
    idx = binning.indices([p.overlap for p in pairs])
    np.add.at(counts, idx, 1)
    return counts


def subspace_stats(pairs, threshold: float) -> SubspaceStats:
    """Relative-translation norm statistics over pairs with overlap >= threshold."""
    norms = np.array(
        [
            np.linalg.norm(p.rel.translation.as_array())
            for p in pairs
            if p.overlap >= threshold
        ]
    )
    if norms.size == 0:
        return SubspaceStats(threshold=threshold, count=0, mean_norm=None, std_norm=None, diameter=None)
    mean = float(norms.mean())
    std = float(norms.std())  # population std: descriptive statistic of the full set
    return SubspaceStats(
        threshold=threshold,
        count=int(norms.size),
        mean_norm=mean,
        std_norm=std,
        diameter=mean + 2.0 * std,
    )
