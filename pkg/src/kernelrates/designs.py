"""Fixed designs on the unit cube and their space-filling diagnostics."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist

__all__ = [
    "Design",
    "DesignDiagnostics",
    "grid_design",
    "halton_points",
    "radical_inverse",
    "fill_distance",
    "separation_radius",
    "diagnostics",
    "perturb_with_near_duplicate",
]

_PRIMES = (2, 3, 5, 7, 11, 13)


@dataclass(frozen=True, eq=False)
class Design:
    """An ordered set of ``n`` distinct points in ``[0, 1]^d``.

    ``points`` is stored as a read-only ``(n, d)`` float array.
    """

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError(f"design needs shape (n, d) with n, d >= 1, got {pts.shape}")
        if np.any(~np.isfinite(pts)) or pts.min() < 0.0 or pts.max() > 1.0:
            raise ValueError("design points must lie in [0, 1]^d")
        if np.unique(pts, axis=0).shape[0] < pts.shape[0]:
            raise ValueError("design points must be pairwise distinct")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, Design):
            return NotImplemented
        return self.points.shape == other.points.shape and np.array_equal(
            self.points, other.points
        )

    def __hash__(self):
        return hash((self.points.shape, self.points.tobytes()))

    def to_csv(self, path=None) -> str:
        """Write one point per row with header ``x1,...,xd``; return the text."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([f"x{j + 1}" for j in range(self.d)])
        for row in self.points:
            writer.writerow([repr(float(v)) for v in row])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, source) -> "Design":
        """Read a design written by :meth:`to_csv` (path or CSV text)."""
        if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source):
            source = Path(source).read_text()
        rows = list(csv.reader(io.StringIO(source)))
        header, body = rows[0], [r for r in rows[1:] if r]
        if header != [f"x{j + 1}" for j in range(len(header))]:
            raise ValueError(f"unexpected design header {header}")
        return cls(np.array([[float(v) for v in r] for r in body]))


@dataclass(frozen=True)
class DesignDiagnostics:
    fill: float
    separation: float

    @property
    def ratio(self) -> float:
        """Mesh ratio ``fill / separation``; bounded for quasi-uniform schemes."""
        return self.fill / self.separation


def grid_design(n: int, d: int = 1) -> Design:
    """Closed equispaced lattice with ``n`` points in total.

    In one dimension the points are ``i/(n-1)``; a single point sits at 0.5.
    For ``d > 1``, `n` must be a perfect ``d``-th power.
    """
    if n < 1 or d < 1:
        raise ValueError("grid_design needs n >= 1 and d >= 1")
    per_axis = round(n ** (1.0 / d))
    if per_axis**d != n:
        raise ValueError(f"n={n} is not a perfect {d}-th power")
    axis = np.array([0.5]) if per_axis == 1 else np.linspace(0.0, 1.0, per_axis)
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    return Design(np.column_stack([g.ravel() for g in mesh]))


def radical_inverse(index: int, base: int) -> float:
    """Van der Corput radical inverse of a non-negative integer."""
    inv = 0.0
    f = 1.0 / base
    while index > 0:
        index, digit = divmod(index, base)
        inv += digit * f
        f /= base
    return inv


def halton_points(n: int, d: int = 1) -> Design:
    """First `n` points of the unscrambled Halton sequence, starting at index 1.

    Bases are the first `d` primes (``d <= 6``).
    """
    if not 1 <= d <= len(_PRIMES):
        raise ValueError(f"halton_points supports 1 <= d <= {len(_PRIMES)}")
    if n < 1:
        raise ValueError("n must be positive")
    pts = [[radical_inverse(i, _PRIMES[j]) for j in range(d)] for i in range(1, n + 1)]
    return Design(np.array(pts))


def fill_distance(X: Design, resolution: int | None = None) -> float:
    """Fill distance of `X` in ``[0, 1]^d``, maximised over a candidate lattice.

    The lattice has ``resolution + 1`` points per axis, endpoints included.
    The result is a lower bound on the true supremum, short by at most
    ``sqrt(d) / resolution``.  `resolution` must be at least
    ``10 * n^(1/d)``; the default is 10_000 in one dimension and 200 otherwise
    (raised to the minimum when needed).
    """
    if X.n < 1:
        raise ValueError("empty design")
    min_res = 10 * math.ceil(X.n ** (1.0 / X.d) - 1e-9)
    if resolution is None:
        resolution = max(min_res, 10_000 if X.d == 1 else 200)
    if resolution < min_res:
        raise ValueError(
            f"resolution {resolution} too coarse for n={X.n}, d={X.d}; need >= {min_res}"
        )
    axis = np.linspace(0.0, 1.0, resolution + 1)
    tree = cKDTree(X.points)
    if X.d == 1:
        dist, _ = tree.query(axis[:, None])
        return float(dist.max())
    # stream over the first axis to bound memory
    rest = np.meshgrid(*([axis] * (X.d - 1)), indexing="ij")
    rest = np.column_stack([g.ravel() for g in rest])
    best = 0.0
    for a in axis:
        cand = np.column_stack([np.full(len(rest), a), rest])
        dist, _ = tree.query(cand)
        best = max(best, float(dist.max()))
    return best


def separation_radius(X: Design) -> float:
    """Half the smallest pairwise Euclidean distance (needs ``n >= 2``)."""
    if X.n < 2:
        raise ValueError("separation radius needs at least two points")
    return float(pdist(X.points).min()) / 2.0


def diagnostics(X: Design, resolution: int | None = None) -> DesignDiagnostics:
    return DesignDiagnostics(fill_distance(X, resolution), separation_radius(X))


def perturb_with_near_duplicate(X: Design, eps: float) -> Design:
    """Append a point at distance `eps` from the first design point.

    The shift is along the first coordinate axis, in whichever direction
    (+, then -) keeps the point inside the cube; later axes are tried if
    needed.  The result still has bounded fill distance but its separation
    radius is at most ``eps / 2``, so the mesh ratio can be made arbitrarily
    large.
    """
    if not eps > 0:
        raise ValueError("eps must be positive")
    if X.n >= 2 and eps >= separation_radius(X):
        raise ValueError("eps must be smaller than the current separation radius")
    x1 = X.points[0]
    for axis in range(X.d):
        for sign in (1.0, -1.0):
            cand = x1.copy()
            cand[axis] += sign * eps
            if 0.0 <= cand[axis] <= 1.0:
                return Design(np.vstack([X.points, cand]))
    raise ValueError(f"eps={eps} leaves the unit cube along every axis")
