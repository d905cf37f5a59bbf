"""Test-problem construction and LIBSVM text ingestion.

Two canonical desk-scale problems plus seeded random instances:
  - problem1: RBF kernel Hessian built from a LIBSVM feature file, a single
    all-ones constraint row and b = 1.  The kernel is exp(-||xi - xj|| / h^2)
    with the distance NOT squared (the squared variant is available as an
    option for comparison).
  - problem2: H = 0.05 * I3 with the fixed 3x3 full-rank constraint matrix,
    unit blocks.
Random right-hand sides are standard normal, drawn from a documented seed
(default 42).
"""

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import FeatureIndexError, ParseError
from .qp import BlockPartition, QpProblem
from .seeding import PROBLEM_STREAM, rng_for

PROBLEM2_H_SCALE = 0.05
PROBLEM2_A = np.array([[1.0, 1.0, 1.0], [1.0, 1.0, 2.0], [1.0, 2.0, 2.0]])
PROBLEM1_WIDTH = 13
HEART_SCALE_URL = "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/binary/heart_scale"


@dataclass(frozen=True)
class ProblemSource:
    """Where a QP comes from: a LIBSVM file, the fixed 3x3 instance, or a seed."""

    kind: str
    path: str = None
    rbf_h: float = 0.5
    dims: tuple = None
    seed: int = 42
    rbf_squared: bool = False

    def __post_init__(self):
        if self.kind not in ("problem1", "problem2", "random"):
            raise ValueError(f"unknown problem kind {self.kind!r}")
        if self.kind == "problem1" and not self.path:
            raise ValueError("problem1 needs a LIBSVM file path")
        if self.kind == "random":
            if not self.dims or len(self.dims) != 2:
                raise ValueError("random needs dims = (d, m)")
            d, m = self.dims
            if not (d >= m >= 1):
                raise ValueError(f"random needs d >= m >= 1, got {self.dims}")

    def build(self):
        if self.kind == "problem2":
            return build_problem2(self.seed)
        if self.kind == "random":
            return random_problem(self.dims[0], self.dims[1], self.seed)
        features, _ = parse_libsvm(self.path, width=PROBLEM1_WIDTH)
        return build_problem1(
            features, seed=self.seed, rbf_h=self.rbf_h, squared=self.rbf_squared
        )


def _parse_line(text, lineno, width):
    body = text.split("#", 1)[0].strip()
    if not body:
        return None
    tokens = body.split()
    label = np.nan
    start = 0
    if ":" not in tokens[0]:
        try:
            label = float(tokens[0])
        except ValueError as exc:
            raise ParseError(f"bad label token {tokens[0]!r}", lineno) from exc
        start = 1
    pairs = []
    for tok in tokens[start:]:
        if ":" not in tok:
            raise ParseError(f"expected index:value, got {tok!r}", lineno)
        idx_text, val_text = tok.split(":", 1)
        try:
            idx = int(idx_text)
            val = float(val_text)
        except ValueError as exc:
            raise ParseError(f"bad index:value token {tok!r}", lineno) from exc
        if idx < 1:
            raise FeatureIndexError(f"feature index {idx} is not positive", lineno)
        if width is not None and idx > width:
            raise FeatureIndexError(
                f"feature index {idx} exceeds width {width}", lineno
            )
        pairs.append((idx, val))
    return label, pairs


def parse_libsvm(path, width=None):
    """Read a LIBSVM text file into (features, labels) dense arrays.

    Each nonblank line is `label idx:val idx:val ...` with 1-based indices;
    the label is optional and reported as nan when absent; '#' starts a
    comment.  With `width` fixed, indices above it are errors; otherwise the
    width is the largest index seen.
    """
    rows = []
    labels = []
    max_idx = 0
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, text in enumerate(fh, start=1):
            parsed = _parse_line(text, lineno, width)
            if parsed is None:
                continue
            label, pairs = parsed
            labels.append(label)
            rows.append(pairs)
            for idx, _ in pairs:
                max_idx = max(max_idx, idx)
    if not rows:
        raise ParseError(f"no instances in {path}")
    ncols = width if width is not None else max(max_idx, 1)
    features = np.zeros((len(rows), ncols))
    for i, pairs in enumerate(rows):
        for idx, val in pairs:
            features[i, idx - 1] = val
    return features, np.array(labels)


def write_libsvm(path, features, labels):
    """Write (features, labels) in LIBSVM text form, omitting zero entries."""
    features = linalg.as_matrix(features, "features")
    labels = np.asarray(labels, dtype=float).reshape(-1)
    if labels.size != features.shape[0]:
        raise ParseError("labels length does not match feature rows")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for i in range(features.shape[0]):
            parts = [] if np.isnan(labels[i]) else [f"{labels[i]:.17g}"]
            for j in range(features.shape[1]):
                if features[i, j] != 0.0:
                    parts.append(f"{j + 1}:{features[i, j]:.17g}")
            fh.write(" ".join(parts) + "\n")


def rbf_kernel(features, h=0.5, squared=False):
    """Pairwise kernel exp(-dist / h^2); `squared=True` squares the distance."""
    X = linalg.as_matrix(features, "features")
    sq = np.sum(X * X, axis=1)
    dist2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * (X @ X.T), 0.0)
    expo = dist2 if squared else np.sqrt(dist2)
    H = np.exp(-expo / h ** 2)
    return 0.5 * (H + H.T)


def build_problem1(features, seed=42, rbf_h=0.5, squared=False):
    """Kernel-Hessian QP with the single all-ones constraint row and b = 1."""
    H = rbf_kernel(features, h=rbf_h, squared=squared)
    n = H.shape[0]
    rng = rng_for(seed, PROBLEM_STREAM)
    g = rng.standard_normal(n)
    A = np.ones((1, n))
    b = np.array([1.0])
    return QpProblem(H=H, g=g, A=A, b=b, blocks=BlockPartition.units(n))


def build_problem2(seed=42):
    """The fixed 3-variable instance: H = 0.05 I, the printed 3x3 constraint
    matrix (determinant -1, hence full rank), unit blocks, seeded g and b."""
    rng = rng_for(seed, PROBLEM_STREAM)
    g = rng.standard_normal(3)
    b = rng.standard_normal(3)
    return QpProblem(
        H=PROBLEM2_H_SCALE * np.eye(3),
        g=g,
        A=PROBLEM2_A.copy(),
        b=b,
        blocks=BlockPartition.units(3),
    )


def random_problem(d, m, seed=42):
    """Seeded SPD instance: H = R^T R + I (eigenvalues >= 1), dense normal A."""
    d, m = int(d), int(m)
    if not d >= m >= 1:
        raise ValueError(f"need d >= m >= 1, got d={d}, m={m}")
    rng = rng_for(seed, PROBLEM_STREAM)
    R = rng.standard_normal((d, d))
    H = R.T @ R + np.eye(d)
    A = rng.standard_normal((m, d))
    g = rng.standard_normal(d)
    b = rng.standard_normal(m)
    return QpProblem(
        H=0.5 * (H + H.T), g=g, A=A, b=b, blocks=BlockPartition.units(d)
    )
