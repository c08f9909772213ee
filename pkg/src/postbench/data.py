"""Ingestion and preparation of the Facebook post-metrics table.

The raw file is a semicolon-delimited CSV with 19 columns.  Seven columns
are known before a post is published and become the model inputs; the
comment, like and share counters are the three prediction targets.  This
module parses the file, integer-codes the post type, drops rows with
missing values, min-max scales inputs and targets to [0, 1] with
parameters fitted on training rows only, and produces seeded
train/test splits.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .rng import Rng

FEATURE_COLUMNS = (
    "Page total likes",
    "Type",
    "Category",
    "Post Month",
    "Post Weekday",
    "Post Hour",
    "Paid",
)
TARGET_COLUMNS = ("comment", "like", "share")
# public names used throughout reports and the CLI
TARGET_NAMES = ("comments", "likes", "shares")

# valid post types in the public 500-post dataset; codes follow the
# alphabetical order of the labels
TYPE_CATEGORIES = ("Link", "Photo", "Status", "Video")
TYPE_CODES = {label: float(i) for i, label in enumerate(TYPE_CATEGORIES)}


class DataFormatError(ValueError):
    pass


@dataclass(frozen=True)
class ColumnStats:
    mean: float
    median: float
    mode: float
    std_dev: float
    max: float
    min: float


# Published summary statistics of the three engagement counters in the
# 500-post Facebook-metrics benchmark dataset, after rounding to integer.
# `validate-data` recomputes them from the raw file and diffs.
EXPECTED_OUTPUT_STATS = {
    "comments": ColumnStats(mean=7, median=3, mode=0, std_dev=21, max=372, min=0),
    "likes": ColumnStats(mean=178, median=101, mode=98, std_dev=323, max=5172, min=0),
    "shares": ColumnStats(mean=27, median=19, mode=13, std_dev=43, max=790, min=0),
}


@dataclass(frozen=True)
class RawTable:
    """Parsed rows of the raw CSV, values kept as strings."""

    rows: list[dict[str, str]]
    columns: list[str]
    source_path: Path

    @property
    def n_rows(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class ScalerParams:
    """Per-column min/max of the matrix the scaler was fitted on."""

    col_min: np.ndarray
    col_max: np.ndarray

    @property
    def constant_mask(self) -> np.ndarray:
        return self.col_max == self.col_min

    @property
    def n_cols(self) -> int:
        return self.col_min.shape[0]


@dataclass(frozen=True)
class SplitSpec:
    n_train: int = 400
    seed: int = 1
    shuffle: bool = True


@dataclass(frozen=True)
class Dataset:
    """Scaled feature matrix plus the three scaled target columns.

    Immutable after construction; views produced by :meth:`take` share
    the scaler parameters, so train/test views stay consistent.
    """

    features: np.ndarray
    targets: np.ndarray
    feature_scaler: ScalerParams
    target_scaler: ScalerParams
    row_ids: np.ndarray

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def take(self, idx: np.ndarray) -> "Dataset":
        idx = np.asarray(idx, dtype=np.intp)
        return Dataset(
            features=self.features[idx],
            targets=self.targets[idx],
            feature_scaler=self.feature_scaler,
            target_scaler=self.target_scaler,
            row_ids=self.row_ids[idx],
        )

    def target_column(self, name: str) -> np.ndarray:
        return self.targets[:, TARGET_NAMES.index(name)]

    def to_csv(self, path) -> Path:
        """Canonical scaled dump (9 significant digits) for diffing."""
        path = Path(path)
        feat_names = ["page_total_likes", "type_code", "category", "post_month",
                      "post_weekday", "post_hour", "paid"]
        with open(path, "w", newline="\n") as fh:
            fh.write(",".join(["row_id"] + feat_names + list(TARGET_NAMES)) + "\n")
            for i in range(self.n_rows):
                cells = [str(int(self.row_ids[i]))]
                cells += [format(v, ".9g") for v in self.features[i]]
                cells += [format(v, ".9g") for v in self.targets[i]]
                fh.write(",".join(cells) + "\n")
        return path


def load_raw(path) -> RawTable:
    """Parse the semicolon-delimited CSV into string records.

    No type coercion happens here; empty strings are kept and mean
    "missing".  Rows whose field count differs from the header raise
    :class:`DataFormatError` naming the data-row number (1-based).
    """
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh, delimiter=";")
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: file is empty, expected a header row")
        rows = []
        for i, fields in enumerate(reader, start=1):
            if len(fields) != len(header):
                raise DataFormatError(
                    f"row {i}: expected {len(header)} columns, got {len(fields)}"
                )
            rows.append(dict(zip(header, fields)))
    return RawTable(rows=rows, columns=header, source_path=path)


def _parse_number(text: str, row: int, column: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise DataFormatError(
            f"row {row}, column '{column}': non-numeric value {text!r}"
        ) from None


def encode_features(raw: RawTable):
    """Build raw (unscaled) feature and target matrices.

    Returns ``(features, targets, dropped_rows)`` where features is
    T x 7 with the post type integer-coded, targets is T x 3, and
    dropped_rows lists the 0-based indices of rows discarded because a
    feature or target cell was empty.
    """
    missing = [c for c in FEATURE_COLUMNS + TARGET_COLUMNS if c not in raw.columns]
    if missing:
        raise DataFormatError(f"missing required columns: {missing}")
    feats, targs, kept, dropped = [], [], [], []
    for i, row in enumerate(raw.rows):
        cells = [row[c] for c in FEATURE_COLUMNS + TARGET_COLUMNS]
        if any(c == "" for c in cells):
            dropped.append(i)
            continue
        fvals = []
        for col in FEATURE_COLUMNS:
            text = row[col]
            if col == "Type":
                if text not in TYPE_CODES:
                    raise DataFormatError(
                        f"row {i + 1}: unknown post type {text!r} "
                        f"(expected one of {sorted(TYPE_CODES)})"
                    )
                fvals.append(TYPE_CODES[text])
            else:
                fvals.append(_parse_number(text, i + 1, col))
        tvals = [_parse_number(row[col], i + 1, col) for col in TARGET_COLUMNS]
        feats.append(fvals)
        targs.append(tvals)
        kept.append(i)
    features = np.asarray(feats, dtype=np.float64).reshape(len(kept), len(FEATURE_COLUMNS))
    targets = np.asarray(targs, dtype=np.float64).reshape(len(kept), len(TARGET_COLUMNS))
    return features, targets, dropped


def raw_target_columns(raw: RawTable) -> dict[str, np.ndarray]:
    """Non-missing raw values of the three output columns, per column."""
    out = {}
    for col, name in zip(TARGET_COLUMNS, TARGET_NAMES):
        if col not in raw.columns:
            raise DataFormatError(f"missing required column: {col!r}")
        vals = [
            _parse_number(row[col], i + 1, col)
            for i, row in enumerate(raw.rows)
            if row[col] != ""
        ]
        out[name] = np.asarray(vals, dtype=np.float64)
    return out


def fit_scaler(matrix: np.ndarray) -> ScalerParams:
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] == 0:
        raise ValueError("scaler must be fitted on a nonempty 2-D matrix")
    return ScalerParams(col_min=matrix.min(axis=0), col_max=matrix.max(axis=0))


def apply_scaler(matrix: np.ndarray, params: ScalerParams) -> np.ndarray:
    """Map each column onto [0, 1]; out-of-range values are clipped.

    Columns that were constant when fitted map to 0.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[1] != params.n_cols:
        raise ValueError(
            f"matrix has {matrix.shape[1] if matrix.ndim == 2 else '?'} columns, "
            f"scaler was fitted on {params.n_cols}"
        )
    span = params.col_max - params.col_min
    safe = np.where(params.constant_mask, 1.0, span)
    scaled = (matrix - params.col_min) / safe
    scaled[:, params.constant_mask] = 0.0
    return np.clip(scaled, 0.0, 1.0)


def inverse_scaler(matrix: np.ndarray, params: ScalerParams) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[1] != params.n_cols:
        raise ValueError("column count does not match scaler")
    return matrix * (params.col_max - params.col_min) + params.col_min


def split_indices(n_rows: int, spec: SplitSpec):
    """Train/test index arrays: a seeded permutation, first n_train rows train."""
    if not 0 < spec.n_train < n_rows:
        raise ValueError(
            f"n_train must be in (0, {n_rows}), got {spec.n_train}"
        )
    if spec.shuffle:
        perm = Rng(spec.seed).permutation(n_rows)
    else:
        perm = np.arange(n_rows)
    return perm[: spec.n_train].copy(), perm[spec.n_train:].copy()


def split(dataset: Dataset, spec: SplitSpec):
    """Split a dataset into train and test views. Deterministic per seed."""
    train_idx, test_idx = split_indices(dataset.n_rows, spec)
    return dataset.take(train_idx), dataset.take(test_idx)


def build_dataset(path, spec: SplitSpec):
    """Canonical pipeline: load, encode, split, scale with train-fitted params.

    Scaler parameters come from the training rows only; the test rows are
    clipped into [0, 1] where they fall outside the fitted range.
    Returns ``(full, train, test)`` Dataset views in split order.
    """
    raw = load_raw(path)
    features, targets, dropped = encode_features(raw)
    train_idx, test_idx = split_indices(features.shape[0], spec)
    feature_scaler = fit_scaler(features[train_idx])
    target_scaler = fit_scaler(targets[train_idx])
    full = Dataset(
        features=apply_scaler(features, feature_scaler),
        targets=apply_scaler(targets, target_scaler),
        feature_scaler=feature_scaler,
        target_scaler=target_scaler,
        # original data-row indices, so dumps stay diffable across tools
        row_ids=np.setdiff1d(np.arange(raw.n_rows), np.asarray(dropped, dtype=int)),
    )
    return full, full.take(train_idx), full.take(test_idx)


def round_half_up(x: float) -> int:
    """Round to nearest integer with .5 going away from zero."""
    if x >= 0:
        return int(np.floor(x + 0.5))
    return int(np.ceil(x - 0.5))


def summary_stats(column) -> ColumnStats:
    """Mean, median, mode, sample std, max and min of a raw column.

    For even counts the median is the lower of the two middle values;
    mode ties resolve to the smallest value, so the result is
    deterministic.
    """
    col = np.asarray(column, dtype=np.float64).ravel()
    if col.size == 0:
        raise ValueError("column must be nonempty")
    s = np.sort(col)
    values, counts = np.unique(s, return_counts=True)
    mode = values[int(np.argmax(counts))]  # unique() sorts, so ties pick smallest
    std = float(np.std(col, ddof=1)) if col.size > 1 else 0.0
    return ColumnStats(
        mean=float(np.mean(col)),
        median=float(s[(col.size - 1) // 2]),
        mode=float(mode),
        std_dev=std,
        max=float(s[-1]),
        min=float(s[0]),
    )


def compare_reference_stats(raw: RawTable):
    """Diff recomputed output-column statistics against the expected table.

    Returns a list of (column, statistic, computed, expected, match)
    tuples with the computed value rounded to integer.
    """
    columns = raw_target_columns(raw)
    results = []
    for name in TARGET_NAMES:
        stats = summary_stats(columns[name])
        expected = EXPECTED_OUTPUT_STATS[name]
        for field in ("mean", "median", "mode", "std_dev", "max", "min"):
            got = round_half_up(getattr(stats, field))
            want = int(getattr(expected, field))
            results.append((name, field, got, want, got == want))
    return results
