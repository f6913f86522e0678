"""Plain-CSV interchange for samples, transforms, and run manifests.

All numeric output uses 17 significant digits so write-then-read round-trips
IEEE doubles exactly.  Loading files carry a ``lambda_<r>_<j>`` header laid
out column-major by factor (all variables of factor 1, then factor 2, ...),
1-based in both indices; one row per retained draw.
"""

import csv
import hashlib
import json
import time
from pathlib import Path

import numpy as np

from .core import LoadingsSample

FMT = "%.17g"


def _fmt(x):
    return FMT % float(x)


def _header(p, q):
    return [f"lambda_{r}_{j}" for j in range(1, q + 1) for r in range(1, p + 1)]


def write_sample(path, draws):
    """Write a T x p x q loading array (or single matrix) as a SampleFile."""
    draws = np.asarray(draws, dtype=float)
    if draws.ndim == 2:
        draws = draws[None]
    T, p, q = draws.shape
    flat = draws.transpose(0, 2, 1).reshape(T, p * q)  # column-major by factor
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(_header(p, q)) + "\n")
        for row in flat:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_sample(path):
    """Read a SampleFile back into a T x p x q array (validates the header)."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise ValueError(f"{path}: empty sample file")
        rows = [[float(v) for v in row] for row in reader if row]
    p, q = _shape_from_header(header, path)
    if not rows:
        raise ValueError(f"{path}: no draw rows")
    flat = np.asarray(rows, dtype=float)
    if flat.shape[1] != p * q:
        raise ValueError(f"{path}: row width {flat.shape[1]} != p*q = {p * q}")
    return flat.reshape(-1, q, p).transpose(0, 2, 1)


def _shape_from_header(header, path):
    names = [h.strip() for h in header]
    p = q = 0
    for name in names:
        parts = name.split("_")
        if len(parts) != 3 or parts[0] != "lambda":
            raise ValueError(f"{path}: unexpected column {name!r}")
        r, j = int(parts[1]), int(parts[2])
        p = max(p, r)
        q = max(q, j)
    if names != _header(p, q):
        raise ValueError(f"{path}: header is not column-major lambda_<r>_<j>")
    return p, q


def write_matrix_csv(path, M, prefix):
    """Generic n x k matrix with header ``<prefix>_1..<prefix>_k``."""
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M[:, None] if prefix != "sigma2" else M[None, :]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(f"{prefix}_{j}" for j in range(1, M.shape[1] + 1)) + "\n")
        for row in M:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_matrix_csv(path):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        next(reader, None)
        return np.asarray(
            [[float(v) for v in row] for row in reader if row], dtype=float
        )


def write_transforms(path, transforms):
    """Per-draw transforms: 1-based draw index, signs, 1-based sources, rotation."""
    q = transforms[0].sp.q
    cols = (
        ["draw"]
        + [f"s_{j}" for j in range(1, q + 1)]
        + [f"nu_{j}" for j in range(1, q + 1)]
        + [f"r_{i}_{j}" for i in range(1, q + 1) for j in range(1, q + 1)]
    )
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(cols) + "\n")
        for t, tr in enumerate(transforms):
            row = [str(t + 1)]
            row += [str(int(v)) for v in tr.sp.s]
            row += [str(int(v) + 1) for v in tr.sp.nu]
            row += [_fmt(v) for v in np.asarray(tr.rotation).ravel()]
            fh.write(",".join(row) + "\n")


def write_rotations(path, rotations):
    """Rotation-only transform table (used by the Procrustes pipeline)."""
    q = np.asarray(rotations[0]).shape[0]
    cols = ["draw"] + [f"r_{i}_{j}" for i in range(1, q + 1) for j in range(1, q + 1)]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(cols) + "\n")
        for t, R in enumerate(rotations):
            row = [str(t + 1)] + [_fmt(v) for v in np.asarray(R).ravel()]
            fh.write(",".join(row) + "\n")


def write_trace(path, trace):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("iter,objective\n")
        for i, v in enumerate(trace):
            fh.write(f"{i},{_fmt(v)}\n")


def file_digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(path, command, config, inputs, extra=None, started=None):
    """JSON run manifest: command, full config, input digests, results metadata.

    ``wall_time_s`` varies between reruns by nature; byte-level comparisons
    of manifests should drop it (every other field is seed-determined).
    """
    doc = {
        "command": command,
        "config": config,
        "inputs": {str(k): file_digest(v) for k, v in (inputs or {}).items()},
    }
    if extra:
        doc.update(extra)
    if started is not None:
        doc["wall_time_s"] = round(time.perf_counter() - started, 3)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_sample_with_companions(sample_path, sigma2_path=None, factors_glob=None):
    """Assemble a LoadingsSample from a SampleFile plus optional companions."""
    draws = read_sample(sample_path)
    variances = None
    factors = None
    if sigma2_path and Path(sigma2_path).exists():
        variances = read_matrix_csv(sigma2_path)
    if factors_glob:
        paths = sorted(
            Path(factors_glob).parent.glob(Path(factors_glob).name),
            key=lambda s: int("".join(ch for ch in s.stem if ch.isdigit()) or 0),
        )
        if paths:
            factors = np.stack([read_matrix_csv(fp) for fp in paths])
    return LoadingsSample(draws, factors=factors, variances=variances)
