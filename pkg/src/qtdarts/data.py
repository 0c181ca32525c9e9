"""Datasets: IDX image files, synthetic series, windows, CSV ingestion.

Nothing here touches the network; image sets load from user-supplied IDX
files and every synthetic generator is deterministic under its seed.
"""

import csv
from dataclasses import dataclass

import numpy as np
from scipy.special import jn

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801


class DataError(ValueError):
    """Malformed dataset input (bad magic, truncation, count mismatch, parse)."""


@dataclass
class LabeledImageSet:
    images: np.ndarray  # (N, 784) floats in [0, 1]
    labels: np.ndarray  # (N,) ints


@dataclass
class SeriesWindowSet:
    inputs: np.ndarray  # (M, window)
    targets: np.ndarray  # (M,)


def _read_be32(buf, off, path):
    if off + 4 > len(buf):
        raise DataError(f"{path}: truncated header")
    return int.from_bytes(buf[off : off + 4], "big"), off + 4


def load_idx(image_path, label_path):
    """Parse an IDX image/label file pair into a normalized image set."""
    with open(image_path, "rb") as f:
        raw = f.read()
    magic, off = _read_be32(raw, 0, image_path)
    if magic != IDX_IMAGE_MAGIC:
        raise DataError(f"{image_path}: bad image magic 0x{magic:08x}")
    count, off = _read_be32(raw, off, image_path)
    rows, off = _read_be32(raw, off, image_path)
    cols, off = _read_be32(raw, off, image_path)
    need = count * rows * cols
    if len(raw) - off < need:
        raise DataError(f"{image_path}: truncated pixel data ({len(raw) - off} of {need} bytes)")
    pixels = np.frombuffer(raw, dtype=np.uint8, count=need, offset=off)
    images = pixels.reshape(count, rows * cols).astype(np.float64) / 255.0

    with open(label_path, "rb") as f:
        raw = f.read()
    magic, off = _read_be32(raw, 0, label_path)
    if magic != IDX_LABEL_MAGIC:
        raise DataError(f"{label_path}: bad label magic 0x{magic:08x}")
    n_labels, off = _read_be32(raw, off, label_path)
    if len(raw) - off < n_labels:
        raise DataError(f"{label_path}: truncated label data")
    labels = np.frombuffer(raw, dtype=np.uint8, count=n_labels, offset=off).astype(np.int64)
    if n_labels != count:
        raise DataError(f"image/label count mismatch: {count} images vs {n_labels} labels")
    return LabeledImageSet(images=images, labels=labels)


def filter_binary(dataset, class_a, class_b):
    """Keep only two classes, remapped a -> 0 and b -> 1, order preserved."""
    if class_a == class_b:
        raise ValueError("binary filter needs two distinct classes")
    mask_a = dataset.labels == class_a
    mask_b = dataset.labels == class_b
    keep = mask_a | mask_b
    labels = np.where(mask_a[keep], 0, 1).astype(np.int64)
    return LabeledImageSet(images=dataset.images[keep], labels=labels)


def gen_bessel_j2(t_start=0.0, t_end=20.0, num_points=200):
    """Bessel J2 sampled on a uniform grid."""
    if num_points < 5:
        raise ValueError(f"need at least 5 points, got {num_points}")
    t = np.linspace(t_start, t_end, num_points)
    return jn(2, t)


def gen_damped_shm(gamma=0.1, omega=1.0, t=None):
    """Damped oscillation exp(-gamma t) cos(omega t) on a sorted grid."""
    if t is None:
        t = np.linspace(0.0, 20.0, 200)
    t = np.asarray(t, dtype=np.float64)
    if t.ndim != 1 or not np.all(np.isfinite(t)) or np.any(np.diff(t) < 0):
        raise ValueError("time grid must be a finite ascending 1-D array")
    if not np.isfinite(gamma) or gamma < 0:
        raise ValueError(f"damping must be finite and >= 0, got {gamma}")
    if not np.isfinite(omega) or omega <= 0:
        raise ValueError(f"frequency must be finite and positive, got {omega}")
    return np.exp(-gamma * t) * np.cos(omega * t)


def gen_narma(order, length, seed):
    """NARMA benchmark sequence; returns (inputs u, outputs y).

    u_t is uniform on [0, 0.5]; y follows the standard recurrence
    y[t+1] = 0.3 y[t] + 0.05 y[t] sum(y[t-order+1..t]) + 1.5 u[t-order+1] u[t] + 0.1
    with zero initial history (negative indices read as 0).
    """
    if order not in (5, 10):
        raise ValueError(f"order must be 5 or 10, got {order}")
    if length <= order:
        raise ValueError(f"length must exceed the order, got {length} <= {order}")
    rng = np.random.default_rng(seed)
    u = rng.uniform(0.0, 0.5, length)
    y = np.zeros(length)
    for t in range(length - 1):
        history = y[max(0, t - order + 1) : t + 1].sum()
        u_old = u[t - order + 1] if t - order + 1 >= 0 else 0.0
        y[t + 1] = 0.3 * y[t] + 0.05 * y[t] * history + 1.5 * u_old * u[t] + 0.1
        if abs(y[t + 1]) > 10.0:
            raise FloatingPointError(
                f"NARMA-{order} diverged at step {t + 1} (|y| > 10); rerun with a different seed"
            )
    return u, y


def sliding_window(series, window=4):
    """Windows of consecutive values paired with the value that follows."""
    series = np.asarray(series, dtype=np.float64)
    if series.ndim != 1:
        raise ValueError("series must be 1-D")
    if window < 1:
        raise ValueError("window must be >= 1")
    m = len(series) - window
    if m <= 0:
        return SeriesWindowSet(inputs=np.zeros((0, window)), targets=np.zeros(0))
    inputs = np.lib.stride_tricks.sliding_window_view(series, window)[:m].copy()
    targets = series[window:].copy()
    return SeriesWindowSet(inputs=inputs, targets=targets)


def load_csv_series(path):
    """One numeric value per row; a single non-numeric header row is skipped."""
    values = []
    with open(path, newline="") as f:
        for row_num, row in enumerate(csv.reader(f), start=1):
            if not row or not row[0].strip():
                continue
            try:
                values.append(float(row[0]))
            except ValueError:
                if row_num == 1:
                    continue  # header
                raise DataError(f"{path}: non-numeric value {row[0]!r} on row {row_num}") from None
    if not values:
        raise DataError(f"{path}: no numeric rows")
    return np.asarray(values)
