"""From a stabilization graph to crossing records and a diabatic model."""

from dataclasses import dataclass, field
import logging

import numpy as np

from . import contfit
from .diabatize import corrector, predictor
from .errors import StabcsError
from .expost_cs import DiabaticModel
from .stabgraph import detect_crossings, refine, window

logger = logging.getLogger(__name__)

# Half-width, in units of delta/a_c, of the eta span resolved around each crossing.
REFINE_HALF_WIDTH = 3.0
MIN_REFINE_POINTS = 15


@dataclass
class CrossingRecord:
    lower: int
    eta_c: float
    E_r: float
    delta: float
    a_c: float
    sigma: float
    alpha_c: float
    beta_c: float
    E0: float
    eta_lo: float
    eta_hi: float
    fit_residual: float
    eta_c_corrector: float
    n_window: int
    n_channel: int

    def as_dict(self):
        return dict(self.__dict__)

    def channel(self):
        return contfit.ContinuumChannel(self.eta_c, self.alpha_c, self.beta_c, self.E0, self.E_r,
                                        (self.eta_lo, self.eta_hi), self.fit_residual)


@dataclass
class DiabatizationResult:
    graph: object
    crossings: list
    records: list
    refinement_requests: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    def model(self, E_r=None):
        if not self.records:
            raise StabcsError("no crossing could be diabatized")
        return DiabaticModel.from_records([r.as_dict() for r in self.records], E_r)


def _refine_interval(crossing, spacing):
    """eta span around a crossing that resolves its gap minimum."""
    est_delta = crossing.gap_min
    mean = (crossing.eps_plus + crossing.eps_minus) / 2
    a = 2 * abs(np.polyfit(crossing.etas, mean, 1)[0]) if len(crossing.etas) > 1 else 0.0
    span = REFINE_HALF_WIDTH * est_delta / a if a > 0 else 0.0
    span = max(span, (MIN_REFINE_POINTS // 2) * spacing)
    step = min(spacing, 2 * span / (MIN_REFINE_POINTS - 1))
    return (crossing.eta_min - span, crossing.eta_min + span), step


def resolve_crossings(graph, center, half_width, p=None, b=None, spacing=1e-3, rounds=3,
                      threads=1, min_points=5):
    """Detect crossings and, given a Hamiltonian, sample each one finely.

    Without `p` and `b` the graph is used as is and under-resolved crossings
    are reported as refinement requests ``(eta_lo, eta_hi, step)``.
    """
    requests = []
    for _ in range(rounds + 1):
        crossings = detect_crossings(graph, window(graph, center, half_width), min_points)
        requests = []
        for c in crossings:
            (lo, hi), step = _refine_interval(c, spacing)
            inside = graph.etas[(graph.etas >= lo) & (graph.etas <= hi)]
            if len(inside) < MIN_REFINE_POINTS or c.needs_refinement:
                requests.append((lo, hi, step))
        if not requests or p is None:
            break
        for lo, hi, step in requests:
            graph = refine(graph, [(lo, hi)], p, b, spacing=step, threads=threads)
    return graph, crossings, requests


def fit_crossing(graph, crossing, E0=0.0, max_gap_ratio=3.0, exclude_gaps=2.0):
    """Corrector diabat and fitted continuum channel for one crossing."""
    d = corrector(crossing, predictor(crossing), max_gap_ratio=max_gap_ratio)
    etas, E, emb = contfit.channel_data(graph, crossing, d.E_r, E0=E0)
    eta_c = contfit.fit_eta_c(etas[emb], E[emb], d.E_r, d.eta_c) if emb.sum() >= 3 else d.eta_c
    ch = contfit.fit_channel(etas, E, eta_c, d.E_r, E0, exclude_gap=exclude_gaps * d.delta)
    return CrossingRecord(
        lower=int(crossing.lower), eta_c=float(eta_c), E_r=d.E_r, delta=d.delta, a_c=d.a_c,
        sigma=d.sigma, alpha_c=ch.alpha_c, beta_c=ch.beta_c, E0=float(E0),
        eta_lo=ch.eta_range[0], eta_hi=ch.eta_range[1], fit_residual=ch.residual,
        eta_c_corrector=d.eta_c, n_window=len(crossing.etas), n_channel=int(len(etas)))


def diabatize_graph(graph, center, half_width, p=None, b=None, E0=0.0, spacing=1e-3,
                    rounds=3, threads=1, max_gap_ratio=3.0, eta_span=None):
    """Crossing records for every avoided crossing of the resonance in `graph`.

    `eta_span` keeps only crossings whose gap minimum lies inside it.
    Crossings whose fits fail are logged and listed in ``failures``.
    """
    if len(graph) < 3:
        return DiabatizationResult(graph, [], [])
    graph, crossings, requests = resolve_crossings(graph, center, half_width, p, b, spacing,
                                                   rounds, threads)
    if eta_span is not None:
        crossings = [c for c in crossings if eta_span[0] <= c.eta_min <= eta_span[1]]
    records, failures = [], []
    for c in crossings:
        try:
            records.append(fit_crossing(graph, c, E0, max_gap_ratio))
        except (StabcsError, ValueError) as exc:
            logger.warning("crossing of curves %d/%d near eta=%.4f skipped: %s",
                           c.lower, c.upper, c.eta_min, exc)
            failures.append({"lower": int(c.lower), "eta_min": c.eta_min, "error": str(exc)})
    return DiabatizationResult(graph, crossings, records, requests, failures)
