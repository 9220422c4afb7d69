"""Stabilization graphs: real spectra on an eta grid and their avoided crossings."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import csv
import logging

import numpy as np

from .eig import eig_symmetric, eigvalsh
from .errors import (EmptyWindow, OverlappingCrossings, SchemaError,
                     SignTrackingFailure)
from .model1d import build_real_hamiltonian

logger = logging.getLogger(__name__)

ETA_RANGE = (-1.75, 2.0)
MIN_WINDOW_POINTS = 5


@dataclass
class StabilizationGraph:
    """Ascending real spectra ``energies[k]`` at each ``etas[k]``."""

    etas: np.ndarray
    energies: np.ndarray
    potential: object = None
    basis: object = None
    vectors: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.etas = np.asarray(self.etas, dtype=float)
        self.energies = np.atleast_2d(np.asarray(self.energies, dtype=float))
        if len(self.etas) == 0:
            self.energies = self.energies.reshape(0, self.energies.shape[-1] if self.energies.size else 0)
            return
        if self.energies.shape[0] != len(self.etas):
            raise ValueError("one energy row per eta expected")
        if np.any(np.diff(self.etas) <= 0):
            raise ValueError("eta grid must be strictly increasing")
        if np.any(np.diff(self.energies, axis=1) < 0):
            raise ValueError("energy rows must be ascending")

    @property
    def n_states(self):
        return self.energies.shape[1]

    def __len__(self):
        return len(self.etas)

    def curve(self, i):
        return self.energies[:, i]

    def merged(self, other):
        """Union of two graphs of the same system; `other` wins on duplicate etas."""
        etas = np.concatenate([self.etas, other.etas])
        energies = np.concatenate([self.energies, other.energies])
        vecs = None
        if self.vectors is not None and other.vectors is not None:
            vecs = np.concatenate([self.vectors, other.vectors])
        # keep the last occurrence of each eta
        rev_etas, rev_idx = np.unique(etas[::-1], return_index=True)
        idx = len(etas) - 1 - rev_idx
        return StabilizationGraph(rev_etas, energies[idx], self.potential, self.basis,
                                  None if vecs is None else vecs[idx])

    def to_csv(self, path):
        """Write ``eta,E1,E2,...`` with 17 significant digits."""
        with open(path, "w", newline="") as fh:
            fh.write(",".join(["eta"] + [f"E{i + 1}" for i in range(self.n_states)]) + "\n")
            for eta, row in zip(self.etas, self.energies):
                fh.write(",".join("%.17g" % v for v in (eta, *row)) + "\n")

    @classmethod
    def from_csv(cls, path, potential=None, basis=None):
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if not rows:
            raise SchemaError("empty file", line=1)
        header = rows[0]
        expected = ["eta"] + [f"E{i + 1}" for i in range(len(header) - 1)]
        if header != expected:
            raise SchemaError("header must read eta,E1,E2,...", line=1)
        etas, energies = [], []
        for lineno, row in enumerate(rows[1:], start=2):
            if len(row) != len(header):
                raise SchemaError(f"expected {len(header)} fields, got {len(row)}", line=lineno)
            try:
                vals = [float(v) for v in row]
            except ValueError as exc:
                raise SchemaError(str(exc), line=lineno) from None
            if etas and vals[0] <= etas[-1]:
                raise SchemaError("eta column must be strictly increasing", line=lineno)
            if any(b < a for a, b in zip(vals[1:-1], vals[2:])):
                raise SchemaError("energies must be ascending within a row", line=lineno)
            etas.append(vals[0])
            energies.append(vals[1:])
        energies = np.array(energies, dtype=float).reshape(len(etas), len(header) - 1)
        return cls(np.array(etas), energies, potential, basis)


@dataclass
class CrossingWindow:
    """Two adjacent adiabatic curves around one gap minimum."""

    lower: int
    etas: np.ndarray
    eps_minus: np.ndarray
    eps_plus: np.ndarray
    eta_min: float
    gap_min: float
    min_points: int = MIN_WINDOW_POINTS

    @property
    def upper(self):
        return self.lower + 1

    @property
    def gap(self):
        return self.eps_plus - self.eps_minus

    @property
    def interval(self):
        return float(self.etas[0]), float(self.etas[-1])

    @property
    def needs_refinement(self):
        return len(self.etas) < self.min_points or self.core_points < 3

    @property
    def core_points(self):
        """Points where the gap is within 3x its minimum."""
        return int(np.sum(self.gap <= 3 * self.gap_min))


def _diagonalize(eta, p, b, keep_vectors):
    h = build_real_hamiltonian(eta, p, b).matrix
    if keep_vectors:
        es = eig_symmetric(h)
        return es.values, es.vectors
    return eigvalsh(h), None


def sweep(eta_grid, p, b, threads=1, keep_vectors=False):
    """Real spectrum at every eta of `eta_grid`.

    Work is spread over `threads` workers (LAPACK releases the GIL); the
    result does not depend on the thread count.
    """
    etas = np.asarray(eta_grid, dtype=float)
    if len(etas) and (etas.min() < ETA_RANGE[0] - 1e-12 or etas.max() > ETA_RANGE[1] + 1e-12):
        raise ValueError(f"eta grid must lie within {ETA_RANGE}")
    if np.any(np.diff(etas) <= 0):
        raise ValueError("eta grid must be strictly increasing")
    work = lambda eta: _diagonalize(eta, p, b, keep_vectors)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(work, etas))
    else:
        results = [work(eta) for eta in etas]
    energies = np.array([r[0] for r in results]).reshape(len(etas), b.size)
    vectors = np.array([r[1] for r in results]) if keep_vectors else None
    return StabilizationGraph(etas, energies, p, b, vectors)


def uniform_grid(start, stop, step):
    n = int(round((stop - start) / step))
    return np.round(start + step * np.arange(n + 1), 12)


def window(graph, center, half_width, strict=True):
    """Indices of the eigenvalues inside ``[center - half_width, center + half_width]``.

    Returns one index array per eta.  With `strict`, an eta with no state in
    the window raises EmptyWindow (the center is probably wrong).
    """
    if half_width < 0:
        raise ValueError("half_width must be non-negative")
    inside = np.abs(graph.energies - center) <= half_width
    if half_width > 0 and strict and len(graph) and not inside.any(axis=1).all():
        bad = graph.etas[~inside.any(axis=1)]
        raise EmptyWindow(f"no state within {half_width} of {center} at eta={bad[0]:.6g}"
                          f" ({len(bad)} grid points)")
    return [np.flatnonzero(row) for row in inside]


def _runs(mask):
    """(start, stop) pairs of the True runs of a boolean array."""
    padded = np.concatenate([[False], mask, [False]])
    d = np.diff(padded.astype(int))
    return list(zip(np.flatnonzero(d == 1), np.flatnonzero(d == -1)))


def detect_crossings(graph, win, min_points=MIN_WINDOW_POINTS):
    """One CrossingWindow per interior minimum of an adjacent-curve gap.

    `win` is the output of :func:`window`.  A pair of curves qualifies at
    the etas where both lie inside the window.  Windows are cut at the
    midpoints between neighbouring minima so they never overlap in eta.
    """
    n_eta = len(graph)
    if n_eta < 3 or graph.n_states < 2:
        return []
    member = np.zeros(graph.energies.shape, dtype=bool)
    for k, idx in enumerate(win):
        member[k, idx] = True
    found = []
    for i in range(graph.n_states - 1):
        both = member[:, i] & member[:, i + 1]
        if not both.any():
            continue
        gap = graph.energies[:, i + 1] - graph.energies[:, i]
        for start, stop in _runs(both):
            minima = [j for j in range(start + 1, stop - 1)
                      if gap[j] < gap[j - 1] and gap[j] <= gap[j + 1]]
            if len(minima) > 1:
                raise OverlappingCrossings(
                    f"curves {i},{i + 1} show {len(minima)} gap minima in one window near "
                    f"eta={graph.etas[minima[0]]:.4f}; refine the grid or shrink the window")
            for j in minima:
                found.append((graph.etas[j], i, start, stop, j))
    found.sort()
    centers = [f[0] for f in found]
    out = []
    for k, (eta_j, i, start, stop, j) in enumerate(found):
        lo = (centers[k - 1] + eta_j) / 2 if k > 0 else -np.inf
        hi = (centers[k + 1] + eta_j) / 2 if k + 1 < len(found) else np.inf
        sel = np.arange(start, stop)
        sel = sel[(graph.etas[sel] > lo) & (graph.etas[sel] < hi)]
        gap = graph.energies[sel, i + 1] - graph.energies[sel, i]
        out.append(CrossingWindow(
            lower=i, etas=graph.etas[sel].copy(),
            eps_minus=graph.energies[sel, i].copy(), eps_plus=graph.energies[sel, i + 1].copy(),
            eta_min=float(eta_j), gap_min=float(gap.min()), min_points=min_points))
    return out


def refine(graph, intervals, p, b, spacing=1e-3, threads=1):
    """Add grid points with `spacing` across each ``(eta_lo, eta_hi)`` interval."""
    new = []
    for lo, hi in intervals:
        n = max(2, int(np.ceil((hi - lo) / spacing)) + 1)
        new.append(np.linspace(lo, hi, n))
    if not new:
        return graph
    pts = np.unique(np.round(np.concatenate(new), 12))
    pts = pts[(pts >= ETA_RANGE[0]) & (pts <= ETA_RANGE[1])]
    pts = np.setdiff1d(pts, graph.etas)
    if len(pts) == 0:
        return graph
    extra = sweep(pts, p, b, threads=threads, keep_vectors=graph.vectors is not None)
    return graph.merged(extra)


def track_signs(vectors, min_overlap=0.5):
    """Flip successive vectors so consecutive overlaps are positive."""
    vectors = np.array(vectors, dtype=float)
    for k in range(1, len(vectors)):
        s = vectors[k] @ vectors[k - 1]
        if abs(s) < min_overlap:
            raise SignTrackingFailure(f"overlap {s:.3f} between grid points {k - 1} and {k}")
        if s < 0:
            vectors[k] = -vectors[k]
    return vectors


def nac_from_vectors(etas, lower, upper):
    """<psi_lower | d/d eta | psi_upper> by central differences.

    `lower` and `upper` are (n_eta, dim) arrays of eigenvectors of the
    Hamiltonian family expressed in a fixed basis.
    """
    lower = track_signs(lower)
    upper = track_signs(upper)
    d_upper = np.gradient(upper, np.asarray(etas, dtype=float), axis=0, edge_order=2)
    return np.einsum("ij,ij->i", lower, d_upper)


def nonadiabatic_coupling(graph, crossing):
    """Coupling between the two curves of `crossing` on the graph's own grid.

    The graph must have been swept with ``keep_vectors=True`` and should be
    fine enough across the crossing for the vectors to rotate smoothly.
    """
    if graph.vectors is None:
        raise ValueError("graph carries no eigenvectors; sweep with keep_vectors=True")
    lo, hi = crossing.interval
    sel = (graph.etas >= lo) & (graph.etas <= hi)
    vecs = graph.vectors[sel]
    return graph.etas[sel], nac_from_vectors(graph.etas[sel], vecs[:, :, crossing.lower],
                                             vecs[:, :, crossing.upper])
