"""Evaluation criteria for relative-pose predictions.

Besides the standard mean/median translation and rotation errors, this module
implements the volume-aware alternatives: percentage error (MAPE), error
scaled by a mean-returning naive baseline (MASE), their combination (MAPSE),
a rotation MAPE over Euler angles, per-overlap-bin error curves with an AUC
summary, and the weighted training-loss value as a diagnostic score.

The scaled metrics are dimensionless and invariant to rescaling the scene,
which is exactly what the raw mean/median errors are not: those scale
linearly with the spanned volume of the relative-pose targets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .dataset import PairRecord, Prediction
from .geometry import Quaternion, RelativePose, Translation
from .pairgen import OverlapBinning, SubspaceStats, subspace_stats

_METRIC_NAMES = ("mape", "mase", "mapse", "rmape")

_trapezoid = getattr(np, "trapezoid", None) or np.trapz


class EvaluationError(Exception):
    """Inputs cannot be evaluated: mismatched keys, digests, or empty sets."""


@dataclass(frozen=True)
class MetricConfig:
    """Knobs shared by an evaluation run; echoed into the report."""

    norm: str = "l1"
    statistics: tuple = ("mean", "median")
    euler_gimbal_policy: str = "exclude"  # or "error"
    naive_source: str = "eval_pairs"  # or "train_pairs"

    def __post_init__(self):
        if self.norm.lower() not in ("l1", "l2"):
            raise ValueError(f"unknown norm {self.norm!r}")
        if not self.statistics:
            raise ValueError("statistics must be non-empty")
        for s in self.statistics:
            if s not in ("mean", "median"):
                raise ValueError(f"unknown statistic {s!r}")
        if self.euler_gimbal_policy not in ("exclude", "error"):
            raise ValueError(f"unknown gimbal policy {self.euler_gimbal_policy!r}")
        if self.naive_source not in ("eval_pairs", "train_pairs"):
            raise ValueError(f"unknown naive source {self.naive_source!r}")


@dataclass(frozen=True)
class LossWeights:
    """Learned balance weights of the combined pose loss."""

    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and math.isfinite(self.beta)):
            raise ValueError("loss weights must be finite")


def _vector_norms(rows: np.ndarray, norm: str) -> np.ndarray:
    if norm.lower() == "l2":
        return np.linalg.norm(rows, axis=-1)
    if norm.lower() == "l1":
        return np.abs(rows).sum(axis=-1)
    raise ValueError(f"unknown norm {norm!r}")


def match_predictions(pairs, predictions):
    """Predictions aligned to the pair order; refuses on missing or duplicate keys.

    Extra predictions (covering pairs not under evaluation) are ignored.
    """
    by_key = {}
    duplicates = []
    for p in predictions:
        if p.key in by_key:
            duplicates.append(p.key)
        by_key[p.key] = p
    if duplicates:
        raise EvaluationError(f"duplicate prediction keys: {sorted(set(duplicates))[:10]}")
    missing = [p.key for p in pairs if p.key not in by_key]
    if missing:
        raise EvaluationError(f"predictions missing for pair keys: {missing[:10]}")
    return [by_key[p.key] for p in pairs]


def _paired_arrays(pairs, predictions):
    matched = match_predictions(pairs, predictions)
    t = geometry.translation_rows(p.rel.translation for p in pairs)
    t_hat = geometry.translation_rows(m.rel_hat.translation for m in matched)
    q = geometry.quat_rows(p.rel.rotation for p in pairs)
    q_hat = geometry.quat_rows(m.rel_hat.rotation for m in matched)
    return t, t_hat, q, q_hat


@dataclass(frozen=True)
class StandardErrors:
    t_mean: float | None
    t_median: float | None
    q_mean: float | None
    q_median: float | None


def standard_errors(pairs, predictions, cfg: MetricConfig = MetricConfig()) -> StandardErrors:
    """Mean/median of the per-pair translation and rotation errors."""
    if not pairs:
        raise EvaluationError("cannot evaluate an empty pair set")
    t, t_hat, q, q_hat = _paired_arrays(pairs, predictions)
    t_err = _vector_norms(t - t_hat, cfg.norm)
    q_err = geometry.quat_angle_deg_rows(q, q_hat)
    want_mean = "mean" in cfg.statistics
    want_median = "median" in cfg.statistics
    return StandardErrors(
        t_mean=float(t_err.mean()) if want_mean else None,
        t_median=float(np.median(t_err)) if want_median else None,
        q_mean=float(q_err.mean()) if want_mean else None,
        q_median=float(np.median(q_err)) if want_median else None,
    )


def mape_translation(pairs, predictions, norm: str = "l1") -> float | None:
    """Mean of ||t - t_hat|| / ||t||; pairs with exactly zero ||t|| are excluded.

    Returns None when every pair is excluded.
    """
    t, t_hat, _, _ = _paired_arrays(pairs, predictions)
    gt = _vector_norms(t, norm)
    keep = gt > 0.0
    if not np.any(keep):
        return None
    ratios = _vector_norms((t - t_hat)[keep], norm) / gt[keep]
    return float(ratios.mean())


def mape_zero_excluded(pairs, norm: str = "l1") -> int:
    """How many pairs a percentage metric drops for zero ground-truth norm."""
    t = geometry.translation_rows(p.rel.translation for p in pairs)
    return int(np.sum(_vector_norms(t, norm) == 0.0))


def naive_mean_translation(source_pairs, ) -> Translation:
    """Componentwise mean of the ground-truth relative translations."""
    if not source_pairs:
        raise EvaluationError("naive mean needs a non-empty source pair set")
    t = geometry.translation_rows(p.rel.translation for p in source_pairs)
    return Translation.from_array(t.mean(axis=0))


def mase_translation(pairs, predictions, naive_mean: Translation, norm: str = "l1") -> float | None:
    """Total model error over the total error of always predicting `naive_mean`.

    1.0 means no better than the naive baseline. None when the baseline error
    is zero (every ground truth equals the naive mean), which leaves the ratio
    undefined.
    """
    t, t_hat, _, _ = _paired_arrays(pairs, predictions)
    num = float(_vector_norms(t - t_hat, norm).sum())
    den = float(_vector_norms(t - naive_mean.as_array(), norm).sum())
    if den == 0.0:
        return None
    return num / den


def mapse_translation(pairs, predictions, naive_mean: Translation, norm: str = "l1") -> float | None:
    """Percentage error scaled by the naive baseline's relative error.

    MAPE of the model divided by the naive model's total deviation relative
    to the total ground-truth magnitude (sum ||t - naive|| / sum ||t||). Both
    factors are dimensionless, so the result is invariant to rescaling the
    scene, and every sum stays bounded even when many ground truths are tiny.
    On a single pair this reduces to ||t - t_hat|| / ||t - naive||. Zero-norm
    ground truths are dropped throughout, as in MAPE.
    """
    t, t_hat, _, _ = _paired_arrays(pairs, predictions)
    gt = _vector_norms(t, norm)
    keep = gt > 0.0
    if not np.any(keep):
        return None
    mape = float((_vector_norms((t - t_hat)[keep], norm) / gt[keep]).mean())
    naive_dev = float(_vector_norms(t[keep] - naive_mean.as_array(), norm).sum())
    if naive_dev == 0.0:
        return None
    naive_relative = naive_dev / float(gt[keep].sum())
    return mape / naive_relative


def mape_rotation(pairs, predictions, gimbal_policy: str = "exclude"):
    """Rotation MAPE over Euler triples: mean of |r - r_hat|_1 / |r|_1.

    Gimbal-locked pairs (ground truth or prediction) follow the policy:
    'exclude' drops and counts them, 'error' raises. Identity ground truths
    (|r|_1 == 0) are always dropped and counted. Returns (value, n_excluded);
    value is None when nothing remains.
    """
    _, _, q, q_hat = _paired_arrays(pairs, predictions)
    r, locked = geometry.euler_zyx_deg_rows(q)
    r_hat, locked_hat = geometry.euler_zyx_deg_rows(q_hat)
    bad = locked | locked_hat
    if gimbal_policy == "error":
        if np.any(bad):
            raise EvaluationError(f"{int(bad.sum())} pairs are gimbal-locked")
    elif gimbal_policy != "exclude":
        raise ValueError(f"unknown gimbal policy {gimbal_policy!r}")
    denom = np.abs(r).sum(axis=1)
    keep = ~bad & (denom > 0.0)
    n_excluded = int(np.sum(~keep))
    if not np.any(keep):
        return None, n_excluded
    ratios = np.abs(r - r_hat)[keep].sum(axis=1) / denom[keep]
    return float(ratios.mean()), n_excluded


@dataclass(frozen=True)
class NaivePredictor:
    """Baseline that answers every query with the source set's mean relative pose."""

    mean_rel: RelativePose

    def predict(self, pairs) -> list[Prediction]:
        return [
            Prediction(anchor_id=p.anchor_id, query_id=p.query_id, rel_hat=self.mean_rel)
            for p in pairs
        ]


def naive_predictor(source_pairs) -> NaivePredictor:
    """Fit the mean-returning baseline on a pair set.

    Translation is the componentwise mean; rotation is the normalized
    componentwise quaternion mean after aligning every sample to the first
    one's hemisphere.
    """
    if not source_pairs:
        raise EvaluationError("naive predictor needs a non-empty source pair set")
    q = geometry.quat_rows(p.rel.rotation for p in source_pairs)
    sign = np.where(q @ q[0] < 0.0, -1.0, 1.0)
    q_mean = (q * sign[:, None]).mean(axis=0)
    if np.linalg.norm(q_mean) < 1e-12:
        raise EvaluationError("rotation mean is degenerate (cancels to zero)")
    q_mean = geometry.normalize_quat_rows(q_mean[None, :])[0]
    return NaivePredictor(
        mean_rel=RelativePose(
            rotation=Quaternion(*q_mean),
            translation=naive_mean_translation(source_pairs),
        )
    )


# ---------------------------------------------------------------------------
# error-vs-overlap curves
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CurveBin:
    lo: float
    mid: float
    hi: float
    t_stat: float | None
    q_stat: float | None
    n: int


@dataclass(frozen=True)
class ErrorCurve:
    """Per-overlap-bin error statistic plus its area-under-curve summaries.

    auc_* is the trapezoidal integral over the non-empty bin midpoints divided
    by the midpoint span, so curves over different bin coverage stay
    comparable; lower is better. raw_area_* is the unnormalized integral.
    """

    bins: tuple
    stat: str
    norm: str
    auc_t: float | None
    auc_q: float | None
    raw_area_t: float | None
    raw_area_q: float | None


def _auc(mids, values):
    if len(mids) == 0:
        return None, None
    if len(mids) == 1:
        return float(values[0]), 0.0
    raw = float(_trapezoid(values, mids))
    return raw / float(mids[-1] - mids[0]), raw


def error_curve(pairs, predictions, binning: OverlapBinning = OverlapBinning(),
                *, stat: str = "median", norm: str = "l1") -> ErrorCurve:
    """Bin pairs by overlap and reduce the errors inside each bin.

    Every pair's overlap must fall inside the binning range. Empty bins are
    kept in the output with n=0 but excluded from the integration.
    """
    if stat not in ("mean", "median"):
        raise ValueError(f"unknown statistic {stat!r}")
    if not pairs:
        raise EvaluationError("cannot build an error curve from an empty pair set")
    t, t_hat, q, q_hat = _paired_arrays(pairs, predictions)
    t_err = _vector_norms(t - t_hat, norm)
    q_err = geometry.quat_angle_deg_rows(q, q_hat)
    idx = binning.indices([p.overlap for p in pairs])
    reduce = np.mean if stat == "mean" else np.median
    edges = binning.edges
    bins = []
    mids, tv, qv = [], [], []
    for b in range(binning.n_bins):
        lo, hi = edges[b], edges[b + 1]
        mid = 0.5 * (lo + hi)
        sel = idx == b
        n = int(sel.sum())
        if n == 0:
            bins.append(CurveBin(lo, mid, hi, None, None, 0))
            continue
        ts, qs = float(reduce(t_err[sel])), float(reduce(q_err[sel]))
        bins.append(CurveBin(lo, mid, hi, ts, qs, n))
        mids.append(mid)
        tv.append(ts)
        qv.append(qs)
    auc_t, raw_t = _auc(mids, tv)
    auc_q, raw_q = _auc(mids, qv)
    return ErrorCurve(
        bins=tuple(bins), stat=stat, norm=norm,
        auc_t=auc_t, auc_q=auc_q, raw_area_t=raw_t, raw_area_q=raw_q,
    )


def combined_loss(pair: PairRecord, prediction: Prediction,
                  weights: LossWeights = LossWeights()) -> float:
    """Balanced pose loss: a^2 + b^2 + e^(-a^2) * L_t + e^(-b^2) * L_q.

    L_t is the L2 translation distance; L_q the L2 distance between the
    ground-truth quaternion and the renormalized predicted quaternion.
    Diagnostic only; nothing in the toolkit trains on it.
    """
    t = pair.rel.translation.as_array()
    t_hat = prediction.rel_hat.translation.as_array()
    l_t = float(np.linalg.norm(t - t_hat))
    q_hat = prediction.rel_hat.rotation
    n = q_hat.norm()
    if n == 0.0:
        raise EvaluationError("predicted quaternion has zero norm and cannot be renormalized")
    l_q = float(np.linalg.norm(pair.rel.rotation.as_array() - q_hat.as_array() / n))
    a2 = weights.alpha ** 2
    b2 = weights.beta ** 2
    return a2 + b2 + math.exp(-a2) * l_t + math.exp(-b2) * l_q


# ---------------------------------------------------------------------------
# full report
# ---------------------------------------------------------------------------


@dataclass
class MetricReport:
    """All criteria of one evaluation run plus the subspace they were run on."""

    n_pairs: int
    norm: str
    statistics: tuple
    euler_gimbal_policy: str
    naive_source: str
    config_digest: str
    subspace: SubspaceStats
    t_mean: float | None = None
    t_median: float | None = None
    q_mean: float | None = None
    q_median: float | None = None
    t_mape: float | None = None
    t_mase: float | None = None
    t_mapse: float | None = None
    r_mape: float | None = None
    mape_excluded_zero_norm: int = 0
    rmape_excluded: int = 0

    def to_items(self) -> dict:
        s = self.subspace
        return {
            "norm": self.norm,
            "statistics": ",".join(self.statistics),
            "euler_gimbal_policy": self.euler_gimbal_policy,
            "naive_source": self.naive_source,
            "config_digest": self.config_digest,
            "n_pairs": self.n_pairs,
            "t_mean_m": self.t_mean,
            "t_median_m": self.t_median,
            "q_mean_deg": self.q_mean,
            "q_median_deg": self.q_median,
            "t_mape": self.t_mape,
            "t_mase": self.t_mase,
            "t_mapse": self.t_mapse,
            "r_mape": self.r_mape,
            "mape_excluded_zero_norm": self.mape_excluded_zero_norm,
            "rmape_excluded": self.rmape_excluded,
            "subspace_threshold": s.threshold,
            "subspace_count": s.count,
            "subspace_mean_norm_m": s.mean_norm,
            "subspace_std_norm_m": s.std_norm,
            "subspace_diameter_m": s.diameter,
        }

    @classmethod
    def from_items(cls, items: dict) -> "MetricReport":
        return cls(
            n_pairs=int(items["n_pairs"]),
            norm=str(items["norm"]),
            statistics=tuple(str(items["statistics"]).split(",")),
            euler_gimbal_policy=str(items["euler_gimbal_policy"]),
            naive_source=str(items["naive_source"]),
            config_digest=str(items["config_digest"]),
            subspace=SubspaceStats(
                threshold=float(items["subspace_threshold"]),
                count=int(items["subspace_count"]),
                mean_norm=items["subspace_mean_norm_m"],
                std_norm=items["subspace_std_norm_m"],
                diameter=items["subspace_diameter_m"],
            ),
            t_mean=items.get("t_mean_m"),
            t_median=items.get("t_median_m"),
            q_mean=items.get("q_mean_deg"),
            q_median=items.get("q_median_deg"),
            t_mape=items.get("t_mape"),
            t_mase=items.get("t_mase"),
            t_mapse=items.get("t_mapse"),
            r_mape=items.get("r_mape"),
            mape_excluded_zero_norm=int(items.get("mape_excluded_zero_norm", 0)),
            rmape_excluded=int(items.get("rmape_excluded", 0)),
        )


def evaluate(pairs, predictions, cfg: MetricConfig = MetricConfig(), *,
             naive_source_pairs=None, subspace_threshold: float | None = None,
             include=_METRIC_NAMES) -> MetricReport:
    """Run every configured criterion over one pair/prediction set.

    The naive baseline is fit on the evaluated pairs themselves or, with
    cfg.naive_source == 'train_pairs', on the separately supplied
    `naive_source_pairs`. The subspace statistics default to the evaluated
    set at its own minimum overlap.
    """
    if not pairs:
        raise EvaluationError("cannot evaluate an empty pair set")
    unknown = set(include) - set(_METRIC_NAMES)
    if unknown:
        raise ValueError(f"unknown metrics requested: {sorted(unknown)}")
    digests = {p.config_digest for p in pairs}
    if len(digests) > 1:
        raise EvaluationError(f"pairs mix {len(digests)} different config digests")
    std = standard_errors(pairs, predictions, cfg)
    if cfg.naive_source == "train_pairs":
        if naive_source_pairs is None:
            raise EvaluationError("naive_source='train_pairs' requires naive_source_pairs")
        source = naive_source_pairs
    else:
        source = pairs
    naive_mean = naive_mean_translation(source)
    threshold = subspace_threshold
    if threshold is None:
        threshold = min(p.overlap for p in pairs)
    report = MetricReport(
        n_pairs=len(pairs),
        norm=cfg.norm,
        statistics=tuple(cfg.statistics),
        euler_gimbal_policy=cfg.euler_gimbal_policy,
        naive_source=cfg.naive_source,
        config_digest=next(iter(digests)),
        subspace=subspace_stats(pairs, threshold),
        t_mean=std.t_mean,
        t_median=std.t_median,
        q_mean=std.q_mean,
        q_median=std.q_median,
    )
    if "mape" in include:
        report.t_mape = mape_translation(pairs, predictions, cfg.norm)
        report.mape_excluded_zero_norm = mape_zero_excluded(pairs, cfg.norm)
    if "mase" in include:
        report.t_mase = mase_translation(pairs, predictions, naive_mean, cfg.norm)
    if "mapse" in include:
        report.t_mapse = mapse_translation(pairs, predictions, naive_mean, cfg.norm)
    if "rmape" in include:
        report.r_mape, report.rmape_excluded = mape_rotation(
            pairs, predictions, cfg.euler_gimbal_policy
        )
    return report
