"""Pose-format parsers and the canonical on-disk formats for every artifact.

All toolkit files are line-oriented text: a `# frustoval-format v1` magic
line, a `# key=value` header block echoing the full configuration, then one
record per line. Floats are printed with 9 significant digits and records are
sorted by their ids, so identical logical content serializes byte-identically
and write -> read -> write is a fixed point.

Ingested poses (public datasets, synthetic trajectories) are rounded to the
same 9-significant-digit precision on construction, which makes
parse -> serialize -> parse an exact identity as well.
"""

from __future__ import annotations

import hashlib
import math
import os
import re
import tempfile
import warnings
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .frustum import FrustumSpec, OverlapConfig
from .geometry import Pose, Quaternion, RelativePose, Translation

FORMAT_LINE = "# frustoval-format v1"
POSE_CONVENTION = "camera-to-world"
QUATERNION_ORDER = "wxyz"
RELATIVE_CONVENTION = "inverse(anchor)*query"

# parsed quaternions are kept verbatim when this close to unit norm, so that
# canonical files survive read/write cycles byte-exactly
_PARSE_NORM_SLACK = 1e-8


class FormatError(Exception):
    """A toolkit file is malformed, truncated, or of an unsupported version."""


class ParseError(FormatError):
    """An external dataset file could not be ingested."""


class DigestMismatchError(FormatError):
    """Pair and prediction files were produced under different configurations."""


def fnum(x: float) -> str:
    """Canonical 9-significant-digit rendering of a finite float."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite number {x!r}")
    if x == 0.0:
        x = 0.0  # never emit -0
    return format(x, ".9g")


def round9(x: float) -> float:
    """Round to the canonical serialized precision."""
    return float(fnum(x))


# ---------------------------------------------------------------------------
# domain records
# ---------------------------------------------------------------------------


@dataclass
class PoseSet:
    """An ordered, uniquely-keyed collection of camera poses for one scene split."""

    scene_name: str
    split: str
    poses: list[Pose] = field(default_factory=list)
    source_format: str = "canonical"
    convention_note: str = ""

    def __post_init__(self):
        if self.split not in ("train", "test"):
            raise ValueError(f"split must be 'train' or 'test', got {self.split!r}")
        ids = [p.frame_id for p in self.poses]
        if len(set(ids)) != len(ids):
            raise ValueError("frame ids must be unique")

    def __len__(self):
        return len(self.poses)

    def ids(self) -> list[str]:
        return [p.frame_id for p in self.poses]


@dataclass(frozen=True)
class PairRecord:
    """One ordered frame pair: overlap score plus the ground-truth relative pose."""

    anchor_id: str
    query_id: str
    overlap: float
    rel: RelativePose
    config_digest: str

    def __post_init__(self):
        if self.anchor_id == self.query_id:
            raise ValueError(f"pair must join two distinct frames, got {self.anchor_id!r} twice")
        if not (0.0 <= self.overlap <= 1.0):
            raise ValueError(f"overlap {self.overlap} outside [0, 1]")

    @property
    def key(self):
        return (self.anchor_id, self.query_id)


@dataclass(frozen=True)
class Prediction:
    """A predictor's relative-pose estimate for one pair."""

    anchor_id: str
    query_id: str
    rel_hat: RelativePose

    @property
    def key(self):
        return (self.anchor_id, self.query_id)


# ---------------------------------------------------------------------------
# configuration digest
# ---------------------------------------------------------------------------


def convention_entries() -> dict:
    return {
        "pose_convention": POSE_CONVENTION,
        "quaternion_order": QUATERNION_ORDER,
        "relative_convention": RELATIVE_CONVENTION,
    }


def config_header_entries(cfg: OverlapConfig) -> dict:
    f = cfg.frustum
    return {
        "hfov_deg": fnum(f.hfov_deg),
        "vfov_deg": fnum(f.vfov_deg),
        "near_m": fnum(f.near),
        "far_m": fnum(f.far),
        "grid": f"{f.grid_nx}x{f.grid_ny}x{f.grid_nz}",
        "boundary_epsilon_m": fnum(f.boundary_epsilon),
        "max_relative_rotation_deg": fnum(cfg.max_relative_rotation_deg),
        "symmetric": "true" if cfg.symmetric else "false",
    }


def config_digest(cfg: OverlapConfig) -> str:
    """Hash of the overlap configuration and the pose conventions.

    Stored in pair files and copied into prediction files; evaluation refuses
    to mix files with different digests.
    """
    entries = {**convention_entries(), **config_header_entries(cfg)}
    blob = "|".join(f"{k}={v}" for k, v in sorted(entries.items()))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _parse_grid(text: str):
    m = re.fullmatch(r"(\d+)x(\d+)x(\d+)", text)
    if not m:
        raise FormatError(f"bad grid specification {text!r}, expected NXxNYxNZ")
    return tuple(int(g) for g in m.groups())


def config_from_header(header: dict) -> OverlapConfig:
    try:
        nx, ny, nz = _parse_grid(header["grid"])
        spec = FrustumSpec(
            hfov_deg=float(header["hfov_deg"]),
            vfov_deg=float(header["vfov_deg"]),
            near=float(header["near_m"]),
            far=float(header["far_m"]),
            grid_nx=nx,
            grid_ny=ny,
            grid_nz=nz,
            boundary_epsilon=float(header["boundary_epsilon_m"]),
        )
        return OverlapConfig(
            frustum=spec,
            max_relative_rotation_deg=float(header["max_relative_rotation_deg"]),
            symmetric=header["symmetric"] == "true",
        )
    except KeyError as e:
        raise FormatError(f"header is missing configuration key {e.args[0]!r}") from None


# ---------------------------------------------------------------------------
# header block + atomic writing
# ---------------------------------------------------------------------------


@contextmanager
def atomic_write(path):
    """Write via a temp file and rename, so interrupted runs leave no partial files."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _write_header(fh, kind: str, entries: dict):
    fh.write(FORMAT_LINE + "\n")
    fh.write(f"# kind={kind}\n")
    fh.write(f"# toolkit_version={__version__}\n")
    for k, v in entries.items():
        v = str(v)
        if "\n" in v:
            v = v.replace("\n", " ")
        fh.write(f"# {k}={v}\n")


def _read_lines(path):
    try:
        text = Path(path).read_text()
    except FileNotFoundError:
        raise FormatError(f"missing input file: {path}") from None
    return text.splitlines()


def read_header(path):
    """Return (kind, header dict, record lines) of a canonical file."""
    lines = _read_lines(path)
    if not lines or lines[0] != FORMAT_LINE:
        raise FormatError(
            f"{path}: not a frustoval v1 file (expected first line {FORMAT_LINE!r})"
        )
    header = {}
    body = []
    for ln in lines[1:]:
        if ln.startswith("# "):
            key, sep, value = ln[2:].partition("=")
            if not sep:
                raise FormatError(f"{path}: malformed header line {ln!r}")
            header[key] = value
        elif ln.strip():
            body.append(ln)
    kind = header.pop("kind", None)
    if kind is None:
        raise FormatError(f"{path}: header has no kind entry")
    return kind, header, body


def _expect_kind(path, kind, expected):
    if kind != expected:
        raise FormatError(f"{path}: expected a {expected} file, found kind={kind}")


def _expect_count(path, header, body):
    declared = int(header.get("count", len(body)))
    if declared != len(body):
        raise FormatError(f"{path}: header declares {declared} records, found {len(body)}")


def _float(tok, path, what):
    try:
        v = float(tok)
    except ValueError:
        raise FormatError(f"{path}: bad {what} value {tok!r}") from None
    if not math.isfinite(v):
        raise FormatError(f"{path}: non-finite {what} value {tok!r}")
    return v


def _quat_from_tokens(tokens, path):
    w, x, y, z = (_float(t, path, "quaternion") for t in tokens)
    nsq = w * w + x * x + y * y + z * z
    if abs(nsq - 1.0) <= _PARSE_NORM_SLACK and w >= 0.0:
        return Quaternion(w, x, y, z)
    return Quaternion(w, x, y, z).normalized()


def _check_frame_id(frame_id: str):
    if not frame_id or any(c.isspace() for c in frame_id):
        raise ValueError(f"frame id {frame_id!r} must be non-empty and whitespace-free")
    return frame_id


# ---------------------------------------------------------------------------
# pose sets
# ---------------------------------------------------------------------------

_POSE_COLUMNS = "frame_id qw qx qy qz tx ty tz"


def write_poses(path, ps: PoseSet, extra: dict | None = None):
    entries = {
        "scene": ps.scene_name,
        "split": ps.split,
        "source_format": ps.source_format,
        **convention_entries(),
        "convention_note": ps.convention_note,
        **(extra or {}),
        "count": len(ps.poses),
        "columns": _POSE_COLUMNS,
    }
    with atomic_write(path) as fh:
        _write_header(fh, "poses", entries)
        for p in sorted(ps.poses, key=lambda p: p.frame_id):
            _check_frame_id(p.frame_id)
            q, t = p.rotation, p.translation
            fh.write(
                f"{p.frame_id} {fnum(q.w)} {fnum(q.x)} {fnum(q.y)} {fnum(q.z)}"
                f" {fnum(t.x)} {fnum(t.y)} {fnum(t.z)}\n"
            )


def read_poses(path) -> PoseSet:
    kind, header, body = read_header(path)
    _expect_kind(path, kind, "poses")
    _expect_count(path, header, body)
    poses = []
    for ln in body:
        toks = ln.split()
        if len(toks) != 8:
            raise FormatError(f"{path}: pose record needs 8 fields, got {len(toks)}: {ln!r}")
        q = _quat_from_tokens(toks[1:5], path)
        t = Translation(*(_float(v, path, "translation") for v in toks[5:8]))
        poses.append(Pose(rotation=q, translation=t, frame_id=toks[0]))
    return PoseSet(
        scene_name=header.get("scene", ""),
        split=header.get("split", "train"),
        poses=poses,
        source_format=header.get("source_format", "canonical"),
        convention_note=header.get("convention_note", ""),
    )


# ---------------------------------------------------------------------------
# pair files
# ---------------------------------------------------------------------------

_PAIR_COLUMNS = "anchor_id query_id overlap qw qx qy qz tx ty tz"


@dataclass
class PairFileData:
    pairs: list[PairRecord]
    cfg: OverlapConfig
    digest: str
    min_overlap: float
    max_overlap: float
    ordered: bool
    header: dict


def write_pairs(path, pairs, cfg: OverlapConfig, *, min_overlap: float, max_overlap: float,
                ordered: bool = True, extra: dict | None = None):
    digest = config_digest(cfg)
    for p in pairs:
        if p.config_digest != digest:
            raise ValueError(
                f"pair {p.key} carries digest {p.config_digest}, file is being "
                f"written under {digest}"
            )
        if not (min_overlap < p.overlap <= max_overlap):
            raise ValueError(f"pair {p.key} overlap {p.overlap} outside ({min_overlap}, {max_overlap}]")
    entries = {
        "config_digest": digest,
        **config_header_entries(cfg),
        "ordered": "true" if ordered else "false",
        "min_overlap": fnum(min_overlap),
        "max_overlap": fnum(max_overlap),
        **convention_entries(),
        **(extra or {}),
        "count": len(pairs),
        "columns": _PAIR_COLUMNS,
    }
    with atomic_write(path) as fh:
        _write_header(fh, "pairs", entries)
        for p in sorted(pairs, key=lambda p: p.key):
            q, t = p.rel.rotation, p.rel.translation
            fh.write(
                f"{p.anchor_id} {p.query_id} {fnum(p.overlap)}"
                f" {fnum(q.w)} {fnum(q.x)} {fnum(q.y)} {fnum(q.z)}"
                f" {fnum(t.x)} {fnum(t.y)} {fnum(t.z)}\n"
            )


def read_pairs(path) -> PairFileData:
    kind, header, body = read_header(path)
    _expect_kind(path, kind, "pairs")
    _expect_count(path, header, body)
    cfg = config_from_header(header)
    digest = header.get("config_digest", "")
    if config_digest(cfg) != digest:
        raise FormatError(
            f"{path}: stored config_digest {digest} does not match the header configuration"
        )
    pairs = []
    for ln in body:
        toks = ln.split()
        if len(toks) != 10:
            raise FormatError(f"{path}: pair record needs 10 fields, got {len(toks)}: {ln!r}")
        rel = RelativePose(
            rotation=_quat_from_tokens(toks[3:7], path),
            translation=Translation(*(_float(v, path, "translation") for v in toks[7:10])),
        )
        pairs.append(
            PairRecord(
                anchor_id=toks[0],
                query_id=toks[1],
                overlap=_float(toks[2], path, "overlap"),
                rel=rel,
                config_digest=digest,
            )
        )
    return PairFileData(
        pairs=pairs,
        cfg=cfg,
        digest=digest,
        min_overlap=float(header.get("min_overlap", "0")),
        max_overlap=float(header.get("max_overlap", "1")),
        ordered=header.get("ordered", "true") == "true",
        header=header,
    )


# ---------------------------------------------------------------------------
# prediction files
# ---------------------------------------------------------------------------

_PRED_COLUMNS = "anchor_id query_id qw qx qy qz tx ty tz"


@dataclass
class PredictionFileData:
    predictions: list[Prediction]
    digest: str
    header: dict


def write_predictions(path, predictions, *, config_digest: str, predictor: str = "external",
                      extra: dict | None = None):
    keys = [p.key for p in predictions]
    if len(set(keys)) != len(keys):
        dupes = sorted({k for k in keys if keys.count(k) > 1})
        raise ValueError(f"duplicate prediction keys: {dupes[:5]}")
    entries = {
        "config_digest": config_digest,
        "predictor": predictor,
        **convention_entries(),
        **(extra or {}),
        "count": len(predictions),
        "columns": _PRED_COLUMNS,
    }
    with atomic_write(path) as fh:
        _write_header(fh, "predictions", entries)
        for p in sorted(predictions, key=lambda p: p.key):
            q, t = p.rel_hat.rotation, p.rel_hat.translation
            fh.write(
                f"{p.anchor_id} {p.query_id}"
                f" {fnum(q.w)} {fnum(q.x)} {fnum(q.y)} {fnum(q.z)}"
                f" {fnum(t.x)} {fnum(t.y)} {fnum(t.z)}\n"
            )


def read_predictions(path) -> PredictionFileData:
    kind, header, body = read_header(path)
    _expect_kind(path, kind, "predictions")
    _expect_count(path, header, body)
    preds = []
    for ln in body:
        toks = ln.split()
        if len(toks) != 9:
            raise FormatError(f"{path}: prediction record needs 9 fields, got {len(toks)}: {ln!r}")
        rel = RelativePose(
            rotation=_quat_from_tokens(toks[2:6], path),
            translation=Translation(*(_float(v, path, "translation") for v in toks[6:9])),
        )
        preds.append(Prediction(anchor_id=toks[0], query_id=toks[1], rel_hat=rel))
    return PredictionFileData(
        predictions=preds, digest=header.get("config_digest", ""), header=header
    )


def check_digest_match(pairs_digest: str, predictions_digest: str):
    if pairs_digest != predictions_digest:
        raise DigestMismatchError(
            "pair/prediction config digest mismatch: pairs were scored under "
            f"{pairs_digest or '<none>'} but predictions reference {predictions_digest or '<none>'}"
        )


# ---------------------------------------------------------------------------
# report and CSV-style artifacts
# ---------------------------------------------------------------------------


def write_report(path, items: dict, extra: dict | None = None):
    """Serialize a metric report; values are written as key=value header lines."""
    entries = dict(extra or {})
    for k, v in items.items():
        if v is None:
            entries[k] = "undefined"
        elif isinstance(v, bool):
            entries[k] = "true" if v else "false"
        elif isinstance(v, float):
            entries[k] = fnum(v)
        else:
            entries[k] = str(v)
    with atomic_write(path) as fh:
        _write_header(fh, "report", entries)


def read_report(path) -> dict:
    kind, header, body = read_header(path)
    _expect_kind(path, kind, "report")
    out = {}
    for k, v in header.items():
        if v == "undefined":
            out[k] = None
        elif v == "true":
            out[k] = True
        elif v == "false":
            out[k] = False
        else:
            try:
                out[k] = int(v)
            except ValueError:
                try:
                    out[k] = float(v)
                except ValueError:
                    out[k] = v
    return out


def write_histogram(path, edges, counts, extra: dict | None = None):
    edges = list(edges)
    counts = list(counts)
    entries = {
        **(extra or {}),
        "count": len(counts),
        "columns": "bin_lo,bin_hi,count",
    }
    with atomic_write(path) as fh:
        _write_header(fh, "histogram", entries)
        for lo, hi, c in zip(edges[:-1], edges[1:], counts):
            fh.write(f"{fnum(lo)},{fnum(hi)},{int(c)}\n")


def write_subspace_table(path, stats_rows, extra: dict | None = None):
    """One subspace-statistics row per threshold; undefined values print as nan."""
    entries = {
        **(extra or {}),
        "count": len(stats_rows),
        "columns": "threshold,count,mean_norm,std_norm,diameter",
    }

    def cell(v):
        return "nan" if v is None else fnum(v)

    with atomic_write(path) as fh:
        _write_header(fh, "subspace_stats", entries)
        for s in stats_rows:
            fh.write(
                f"{fnum(s.threshold)},{s.count},{cell(s.mean_norm)},{cell(s.std_norm)},{cell(s.diameter)}\n"
            )


def write_curve(path, curve, extra: dict | None = None):
    """Plot-ready CSV of an error curve plus its area summaries."""

    def cell(v):
        return "nan" if v is None else fnum(v)

    entries = {
        **(extra or {}),
        "stat": curve.stat,
        "norm": curve.norm,
        "auc_t": cell(curve.auc_t),
        "auc_q": cell(curve.auc_q),
        "raw_area_t": cell(curve.raw_area_t),
        "raw_area_q": cell(curve.raw_area_q),
        "empty_bins": sum(1 for b in curve.bins if b.n == 0),
        "count": len(curve.bins),
        "columns": "bin_lo,bin_mid,bin_hi,t_stat,q_stat,n",
    }
    with atomic_write(path) as fh:
        _write_header(fh, "error_curve", entries)
        for b in curve.bins:
            fh.write(
                f"{fnum(b.lo)},{fnum(b.mid)},{fnum(b.hi)},{cell(b.t_stat)},{cell(b.q_stat)},{b.n}\n"
            )


# ---------------------------------------------------------------------------
# public dataset ingest
# ---------------------------------------------------------------------------


def _rounded_pose(q: Quaternion, t, frame_id: str) -> Pose:
    # quantize to the serialized precision so parse -> write -> parse is exact
    return Pose(
        rotation=Quaternion(round9(q.w), round9(q.x), round9(q.y), round9(q.z)),
        translation=Translation(round9(t[0]), round9(t[1]), round9(t[2])),
        frame_id=frame_id,
    )


def _nearest_rotation(m3: np.ndarray):
    """Polar decomposition: the orthogonal factor closest in Frobenius norm."""
    u, _, vt = np.linalg.svd(m3)
    r = u @ vt
    if np.linalg.det(r) < 0:
        u = u.copy()
        u[:, -1] *= -1
        r = u @ vt
    return r


def _parse_pose_matrix(path: Path) -> Pose:
    try:
        values = [float(tok) for tok in path.read_text().split()]
    except ValueError as e:
        raise ParseError(f"{path}: non-numeric pose matrix entry ({e})") from None
    if len(values) != 16:
        raise ParseError(f"{path}: expected 16 matrix entries, found {len(values)}")
    m = np.array(values).reshape(4, 4)
    if not np.all(np.isfinite(m)):
        raise ParseError(f"{path}: pose matrix contains non-finite entries")
    if not np.allclose(m[3], [0.0, 0.0, 0.0, 1.0], atol=1e-6):
        raise ParseError(f"{path}: bottom row {m[3].tolist()} is not [0 0 0 1]")
    r = _nearest_rotation(m[:3, :3])
    deviation = float(np.linalg.norm(m[:3, :3] - r))
    if deviation > 1e-2:
        raise ParseError(
            f"{path}: rotation block deviates from orthogonal by {deviation:.3g} (Frobenius)"
        )
    return _rounded_pose(Quaternion.from_matrix(r), m[:3, 3], frame_id="")


_SEQ_LINE = re.compile(r"sequence\s*(\d+)", re.IGNORECASE)


def _sevenscenes_sequence_dirs(scene_dir: Path, split: str):
    split_file = scene_dir / ("TrainSplit.txt" if split == "train" else "TestSplit.txt")
    if not split_file.exists():
        return None
    dirs = []
    for ln in split_file.read_text().splitlines():
        ln = ln.strip()
        if not ln:
            continue
        m = _SEQ_LINE.fullmatch(ln)
        name = f"seq-{int(m.group(1)):02d}" if m else ln
        d = scene_dir / name
        if not d.is_dir():
            raise ParseError(f"{split_file}: split names {name!r} but {d} is not a directory")
        dirs.append(d)
    return dirs


def parse_sevenscenes(scene_dir, split: str = "train", scene_name: str | None = None,
                      collect_errors: list | None = None) -> PoseSet:
    """Ingest a 7-Scenes style scene directory.

    The directory may either hold `frame-NNNNNN.pose.txt` files directly, or
    contain sequence folders plus TrainSplit.txt / TestSplit.txt naming them.
    Each pose file is a whitespace-separated 4x4 camera-to-world matrix; the
    rotation block is snapped to the nearest rotation before conversion.

    Malformed files raise ParseError naming the file, or, when
    `collect_errors` is a list, are skipped with the message appended to it.
    """
    scene_dir = Path(scene_dir)
    if not scene_dir.is_dir():
        raise ParseError(f"{scene_dir}: not a directory")
    seq_dirs = _sevenscenes_sequence_dirs(scene_dir, split)
    roots = seq_dirs if seq_dirs is not None else [scene_dir]
    pose_files = []
    for root in roots:
        pose_files.extend(sorted(root.glob("frame-*.pose.txt")))
    poses = []
    for pf in pose_files:
        rel_id = pf.relative_to(scene_dir).as_posix()[: -len(".pose.txt")]
        try:
            pose = _parse_pose_matrix(pf)
        except ParseError as e:
            if collect_errors is None:
                raise
            collect_errors.append(str(e))
            continue
        poses.append(replace(pose, frame_id=rel_id))
    poses.sort(key=lambda p: p.frame_id)
    return PoseSet(
        scene_name=scene_name or scene_dir.name,
        split=split,
        poses=poses,
        source_format="sevenscenes",
        convention_note="4x4 camera-to-world matrices; rotation orthonormalized by polar decomposition",
    )


def parse_cambridge(dataset_file, scene_name: str | None = None, split: str | None = None,
                    collect_errors: list | None = None) -> PoseSet:
    """Ingest a Cambridge-Landmarks dataset_train.txt / dataset_test.txt file.

    Lines carry `image-path x y z w p q r` after three header lines, where the
    position is the camera center in world coordinates and the quaternion is
    the world-to-camera rotation. Both are converted to the toolkit's
    camera-to-world convention here, so no other layer needs to know the
    difference.
    """
    dataset_file = Path(dataset_file)
    if split is None:
        stem = dataset_file.name.lower()
        if "train" in stem:
            split = "train"
        elif "test" in stem:
            split = "test"
        else:
            raise ParseError(f"{dataset_file}: cannot infer split from filename; pass split=")
    try:
        lines = dataset_file.read_text().splitlines()
    except FileNotFoundError:
        raise ParseError(f"missing input file: {dataset_file}") from None
    poses = []
    bad_norms = 0
    for lineno, ln in enumerate(lines[3:], start=4):
        if not ln.strip():
            continue
        toks = ln.split()
        try:
            if len(toks) != 8:
                raise ParseError(
                    f"{dataset_file}:{lineno}: expected 'path x y z w p q r', got {len(toks)} fields"
                )
            try:
                x, y, z, qw, qx, qy, qz = (float(v) for v in toks[1:])
            except ValueError:
                raise ParseError(f"{dataset_file}:{lineno}: non-numeric pose entry") from None
            if not all(math.isfinite(v) for v in (x, y, z, qw, qx, qy, qz)):
                raise ParseError(f"{dataset_file}:{lineno}: non-finite pose entry")
        except ParseError as e:
            if collect_errors is None:
                raise
            collect_errors.append(str(e))
            continue
        norm = math.sqrt(qw * qw + qx * qx + qy * qy + qz * qz)
        if norm == 0.0:
            msg = f"{dataset_file}:{lineno}: zero quaternion"
            if collect_errors is None:
                raise ParseError(msg)
            collect_errors.append(msg)
            continue
        if abs(norm - 1.0) > 1e-3:
            bad_norms += 1
        # file stores world-to-camera rotation; camera-to-world is its conjugate
        q_c2w = Quaternion(qw, qx, qy, qz).normalized().conjugate().normalized()
        frame_id = toks[0].rsplit(".", 1)[0]
        poses.append(_rounded_pose(q_c2w, (x, y, z), frame_id))
    if bad_norms:
        warnings.warn(
            f"{dataset_file}: {bad_norms} quaternions deviated from unit norm by more "
            "than 1e-3 before normalization",
            stacklevel=2,
        )
    poses.sort(key=lambda p: p.frame_id)
    return PoseSet(
        scene_name=scene_name or dataset_file.parent.name,
        split=split,
        poses=poses,
        source_format="cambridge",
        convention_note="camera centers kept; world-to-camera rotations conjugated to camera-to-world",
    )
