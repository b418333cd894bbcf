"""Domain types and file I/O shared by the solver, the benchmark and the CLI."""

from __future__ import annotations

import csv
import io
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.io

UNIT_TOL = 1e-12
ORTHO_TOL = 1e-10
RANK_TOL = 1e-14

OBSERVED_FORMATS = ("matrix-market-coordinate", "csv-triplets")
DENSE_FORMATS = ("dense-csv", "matrix-market-array")


class InputError(ValueError):
    """Raised for any malformed observation input."""


class ParseError(InputError):
    pass


class DuplicateEntryError(InputError):
    pass


class IndexRangeError(InputError):
    pass


class ObservedMatrix:
    """Observed entries of an ``m x n`` matrix, stored column-major.

    Entries are kept as coordinate triplets sorted by ``(col, row)`` so each
    column's observations occupy the contiguous slice
    ``col_ptr[j]:col_ptr[j + 1]``. Instances are immutable: the underlying
    arrays are flagged read-only and may be shared between workers.

    Parameters
    ----------
    m, n : int
        Matrix dimensions, both positive.
    rows, cols : array_like of int
        0-based coordinates of the observed entries.
    values : array_like of float
        Observed values.
    """

    __slots__ = ("m", "n", "rows", "cols", "values", "col_ptr", "norm_sq")

    def __init__(self, m, n, rows, cols, values):
        m, n = int(m), int(n)
        if m < 1 or n < 1:
            raise InputError(f"dimensions must be positive, got {m}x{n}")
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        values = np.asarray(values, dtype=np.float64).ravel()
        if not (rows.size == cols.size == values.size):
            raise InputError("rows, cols and values must have equal length")
        if rows.size:
            bad = (rows < 0) | (rows >= m) | (cols < 0) | (cols >= n)
            if bad.any():
                k = int(np.flatnonzero(bad)[0])
                raise IndexRangeError(
                    f"entry ({rows[k]}, {cols[k]}) outside a {m}x{n} matrix")
            if not np.isfinite(values).all():
                raise InputError("observed values must be finite")

        order = np.lexsort((rows, cols))
        rows, cols, values = rows[order], cols[order], values[order]
        if rows.size > 1:
            dup = (rows[1:] == rows[:-1]) & (cols[1:] == cols[:-1])
            if dup.any():
                k = int(np.flatnonzero(dup)[0])
                raise DuplicateEntryError(
                    f"entry ({rows[k]}, {cols[k]}) observed more than once")

        col_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(cols, minlength=n), out=col_ptr[1:])
        for arr in (rows, cols, values, col_ptr):
            arr.setflags(write=False)

        for name, val in (("m", m), ("n", n), ("rows", rows), ("cols", cols),
                          ("values", values), ("col_ptr", col_ptr),
                          ("norm_sq", float(values @ values))):
            object.__setattr__(self, name, val)

    def __setattr__(self, name, value):
        raise AttributeError("ObservedMatrix is immutable")

    @classmethod
    def from_dense(cls, full, mask):
        """Project a dense matrix onto the boolean ``mask``."""
        full = np.asarray(full, dtype=np.float64)
        rows, cols = np.nonzero(np.asarray(mask, dtype=bool))
        return cls(full.shape[0], full.shape[1], rows, cols, full[rows, cols])

    @property
    def nnz(self):
        return int(self.values.size)

    @property
    def shape(self):
        return (self.m, self.n)

    def column(self, j):
        """Return ``(rows, values)`` of the entries observed in column ``j``."""
        if not 0 <= j < self.n:
            raise IndexError(f"column {j} out of range for n={self.n}")
        sl = slice(self.col_ptr[j], self.col_ptr[j + 1])
        return self.rows[sl], self.values[sl]

    def column_norm_sq(self):
        return np.bincount(self.cols, weights=self.values**2, minlength=self.n)

    def to_dense(self, fill=0.0):
        out = np.full((self.m, self.n), fill, dtype=np.float64)
        out[self.rows, self.cols] = self.values
        return out

    def mask(self):
        out = np.zeros((self.m, self.n), dtype=bool)
        out[self.rows, self.cols] = True
        return out

    def scaled(self, c):
        return ObservedMatrix(self.m, self.n, self.rows, self.cols, c * self.values)

    def __repr__(self):
        return f"ObservedMatrix(m={self.m}, n={self.n}, nnz={self.nnz})"


def as_unit_vector(v, normalize=False):
    """Validate ``v`` as a point on the unit sphere and return it as a float array.

    With ``normalize=True`` any nonzero finite vector is accepted and scaled.
    """
    v = np.array(v, dtype=np.float64).ravel()
    norm = np.linalg.norm(v)
    if not np.isfinite(norm) or v.size == 0:
        raise ValueError("unit vector must be a nonempty finite vector")
    if normalize:
        if norm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return v / norm
    if abs(norm - 1.0) > UNIT_TOL:
        raise ValueError(f"vector has norm {norm!r}, expected 1")
    return v


@dataclass(frozen=True)
class GeodesicRay:
    """Great circle ``u cos t + h sin t`` through ``base`` with unit tangent ``direction``."""

    base: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        u = as_unit_vector(self.base)
        h = as_unit_vector(self.direction)
        if u.size != h.size:
            raise ValueError("base and direction must have the same length")
        if abs(u @ h) > ORTHO_TOL:
            raise ValueError(f"direction not orthogonal to base (<u,h>={u @ h:.3e})")
        object.__setattr__(self, "base", u)
        object.__setattr__(self, "direction", h)


@dataclass(frozen=True)
class AtomicProfile:
    """Coefficients of one column's misfit along a geodesic.

    Along ``u(t) = u cos t + h sin t`` the misfit of column ``j`` is::

        f_j(t) = x_norm_sq - (a cos t + b sin t)**2 / (p cos^2 t + 2 q cos t sin t + r sin^2 t)
    """

    column: int
    a: float
    b: float
    p: float
    q: float
    r: float
    x_norm_sq: float
    degenerate: bool

    def value(self, t):
        c, s = np.cos(t), np.sin(t)
        num = (self.a * c + self.b * s) ** 2
        den = self.p * c * c + 2.0 * self.q * c * s + self.r * s * s
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(den > 0.0, num / np.where(den > 0.0, den, 1.0), 0.0)
        out = np.clip(self.x_norm_sq - ratio, 0.0, self.x_norm_sq)
        return float(out) if np.ndim(out) == 0 else out


def is_degenerate(p, q, r):
    """Rank test for the restricted pair ``[u_j, h_j]`` from its Gram entries."""
    pr = p * r
    return pr - q * q <= RANK_TOL * np.maximum(pr, 1.0)


@dataclass
class SolverConfig:
    rank: int = 1
    eps_e: float = 1e-6
    max_outer_iters: int = 2000
    eps_step: float = 1e-9
    itN: int = 10
    transfer_enabled: bool = True
    rng_seed: int = 0
    # explicit starting point; overrides the seeded random draw
    init_u: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.rank != 1:
            raise ValueError("only rank-1 completion is supported")
        if not self.eps_e > 0:
            raise ValueError("eps_e must be positive")
        if self.max_outer_iters < 1:
            raise ValueError("max_outer_iters must be at least 1")
        if self.itN < 1:
            raise ValueError("itN must be at least 1")
        if not 0 < self.eps_step < 1:
            raise ValueError("eps_step must lie in (0, 1)")


@dataclass
class SolveReport:
    success: bool
    final_objective: float
    relative_residual: float
    outer_iterations: int
    transfers_performed: int
    u: np.ndarray
    w: np.ndarray
    stationary: bool = False
    history: list = field(default_factory=list, repr=False)

    def completed(self):
        """Dense rank-1 completion ``u w^T``."""
        return np.outer(self.u, self.w)


# -- file I/O ---------------------------------------------------------------


def load_observed(path, format="matrix-market-coordinate", shape=None):
    """Read observed entries from ``path``.

    MatrixMarket coordinate files are 1-based and declare their own size.
    CSV triplet files carry a ``i,j,value`` header with 0-based indices; their
    size is taken from ``shape`` or inferred from the largest indices.
    """
    path = Path(path)
    if format == "matrix-market-coordinate":
        return _load_mm_coordinate(path)
    if format == "csv-triplets":
        return _load_csv_triplets(path, shape)
    raise ValueError(f"unknown observed format {format!r}")


def _load_mm_coordinate(path):
    if not path.is_file():
        raise FileNotFoundError(f"{path}: no such file")
    try:
        info = scipy.io.mminfo(str(path))
    except Exception as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if info[3] != "coordinate":
        raise ParseError(f"{path}: expected coordinate format, found {info[3]}")
    if info[4] == "complex":
        raise ParseError(f"{path}: complex matrices are not supported")
    try:
        coo = scipy.io.mmread(str(path))
    except ValueError as exc:
        if "out of bounds" in str(exc):
            raise IndexRangeError(f"{path}: {exc}") from exc
        raise ParseError(f"{path}: {exc}") from exc
    m, n = coo.shape
    data = coo.data if info[4] != "pattern" else np.ones_like(coo.data, dtype=float)
    return ObservedMatrix(m, n, coo.row, coo.col, data)


def _load_csv_triplets(path, shape):
    rows, cols, vals = [], [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["i", "j", "value"]:
            raise ParseError(f"{path}: expected header 'i,j,value'")
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not s.strip() for s in rec):
                continue
            if len(rec) != 3:
                raise ParseError(f"{path}:{lineno}: expected 3 fields, got {len(rec)}")
            try:
                rows.append(int(rec[0]))
                cols.append(int(rec[1]))
                vals.append(float(rec[2]))
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
    if shape is None:
        if not rows:
            raise ParseError(f"{path}: no entries and no shape given")
        shape = (max(rows) + 1, max(cols) + 1)
    return ObservedMatrix(shape[0], shape[1], rows, cols, vals)


def atomic_write(path, write):
    """Call ``write(fh)`` on a temporary text file, then move it over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            write(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_completed(u, w, path, format="dense-csv"):
    """Write the dense matrix ``u w^T``."""
    u = np.asarray(u, dtype=np.float64).ravel()
    w = np.asarray(w, dtype=np.float64).ravel()
    full = np.outer(u, w)
    if format == "dense-csv":
        atomic_write(path, lambda fh: np.savetxt(fh, full, delimiter=",", fmt="%.17g"))
    elif format == "matrix-market-array":
        def _mm(fh):
            buf = io.BytesIO()
            scipy.io.mmwrite(buf, full, field="real", precision=17)
            fh.write(buf.getvalue().decode("ascii"))
        atomic_write(path, _mm)
    else:
        raise ValueError(f"unknown dense format {format!r}")


def load_dense(path, format="dense-csv"):
    if format == "dense-csv":
        return np.loadtxt(path, delimiter=",", ndmin=2)
    if format == "matrix-market-array":
        return np.asarray(scipy.io.mmread(str(path)), dtype=np.float64)
    raise ValueError(f"unknown dense format {format!r}")
