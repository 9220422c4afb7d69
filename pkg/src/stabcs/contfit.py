"""Analytic eta-dependence of the quasi-continuum channels.

A channel that crosses the resonance at ``eta_c`` is represented by

    E(eta) = (E_anchor - E0) * exp(-alpha*(eta - eta_c) - beta*(eta - eta_c)**2) + E0

which reduces to the free-particle law ``exp(-2*eta)`` for alpha = 2,
beta = 0, E0 = 0.  The form is analytic, so the same parameters give the
channel at complex eta.
"""

from dataclasses import dataclass
import logging

import numpy as np

from .errors import IllConditioned, NoRealRoot, ThresholdViolation

logger = logging.getLogger(__name__)

# Local exponent -dlnE/deta may deviate this much from 2 before a tracked
# segment is considered to have left its channel.
EXPONENT_TOLERANCE = 0.75


@dataclass
class ContinuumChannel:
    eta_c: float
    alpha_c: float
    beta_c: float = 0.0
    E0: float = 0.0
    E_anchor: float = 1.0
    eta_range: tuple = (-np.inf, np.inf)
    residual: float = 0.0

    def energy(self, eta):
        return channel_energy(self, eta)

    def derivative(self, eta):
        x = np.asarray(eta) - self.eta_c
        return (self.E_anchor - self.E0) * (-self.alpha_c - 2 * self.beta_c * x) * np.exp(
            -self.alpha_c * x - self.beta_c * x**2)

    def covers(self, eta, margin=0.0):
        """Whether real `eta` lies inside the span of the fitted data."""
        return self.eta_range[0] - margin <= eta <= self.eta_range[1] + margin

    def as_dict(self):
        return {"eta_c": self.eta_c, "alpha_c": self.alpha_c, "beta_c": self.beta_c,
                "E0": self.E0, "E_anchor": self.E_anchor,
                "eta_lo": self.eta_range[0], "eta_hi": self.eta_range[1],
                "fit_residual": self.residual}


def channel_energy(ch, eta):
    x = np.asarray(eta) - ch.eta_c
    return (ch.E_anchor - ch.E0) * np.exp(-ch.alpha_c * x - ch.beta_c * x**2) + ch.E0


def fit_eta_c(etas, E_eta, E_r, eta_guess=None):
    """Crossing point from a least-squares parabola through the embedded segment.

    Returns the root of ``parabola(eta) = E_r`` nearest `eta_guess`
    (default: the middle of the data).
    """
    etas = np.asarray(etas, dtype=float)
    E_eta = np.asarray(E_eta, dtype=float)
    if len(etas) < 3:
        raise ValueError("at least three points are needed for a parabola")
    if eta_guess is None:
        eta_guess = float(np.mean(etas))
    x0 = float(np.mean(etas))
    poly = np.polynomial.Polynomial.fit(etas - x0, E_eta - E_r, 2)
    roots = poly.roots()
    real = roots[np.abs(roots.imag) <= 1e-12 * max(1.0, np.max(np.abs(roots)))].real + x0
    if len(real) == 0:
        raise NoRealRoot(f"parabola never reaches E_r={E_r}")
    return float(real[np.argmin(np.abs(real - eta_guess))])


def fit_exponent(etas, E_eta, eta_c, E_r, E0=0.0):
    """Weighted least squares for (alpha, beta).

    Fits ``f_i = log((E_i - E0)/(E_r - E0))`` to
    ``-alpha*(eta_i - eta_c) - beta*(eta_i - eta_c)**2`` with weights
    ``w_i = (E_r - E0)/(E_i - E0)``.  Returns ``(alpha, beta, residual)``,
    the residual being the weighted RMS misfit of f.
    """
    etas = np.asarray(etas, dtype=float)
    E_eta = np.asarray(E_eta, dtype=float)
    if np.any(E_eta <= E0) or E_r <= E0:
        raise ThresholdViolation(f"all energies must lie above the threshold E0={E0}")
    x = etas - eta_c
    f = np.log((E_eta - E0) / (E_r - E0))
    w = (E_r - E0) / (E_eta - E0)
    A = np.column_stack([-x, -x**2])
    sw = np.sqrt(w)
    Aw = A * sw[:, None]
    if len(etas) < 2 or np.linalg.matrix_rank(Aw) < 2:
        raise IllConditioned("need at least two distinct eta != eta_c for alpha and beta")
    cond = np.linalg.cond(Aw)
    if cond > 1e12:
        raise IllConditioned(f"normal equations ill-conditioned (cond={cond:.2e})")
    (alpha, beta), *_ = np.linalg.lstsq(Aw, f * sw, rcond=None)
    residual = float(np.sqrt(np.sum(w * (A @ [alpha, beta] - f) ** 2) / np.sum(w)))
    return float(alpha), float(beta), residual


def local_exponent(etas, energies, E0=0.0):
    """-d log(E - E0)/d eta between successive points."""
    return -np.diff(np.log(np.asarray(energies) - E0)) / np.diff(etas)


def _scaled_gaps(energies, c, E0):
    """Gaps of curve `c` to its neighbours divided by ``E_c - E0``.

    For free box states these ratios do not depend on eta, so a local
    minimum marks an avoided crossing with some other state.
    """
    out = []
    scale = np.abs(energies[:, c] - E0)
    for nb in (c - 1, c + 1):
        if 0 <= nb < energies.shape[1]:
            out.append(np.abs(energies[:, nb] - energies[:, c]) / scale)
    return out


def _walk(etas, energies, c, start, step, E0, tol, eta_stop):
    """Follow curve `c` from index `start` while it behaves as a box state.

    The walk stops where the local exponent leaves ``2 +/- tol`` or where
    the scaled gap to a neighbouring curve passes a local minimum.
    """
    curve = energies[:, c]
    gaps = _scaled_gaps(energies, c, E0)
    out = []
    j = start
    while 0 <= j + step < len(etas):
        nxt = j + step
        if curve[nxt] <= E0 or curve[j] <= E0:
            break
        if (step < 0 and etas[nxt] < eta_stop) or (step > 0 and etas[nxt] > eta_stop):
            break
        s = -(np.log(curve[nxt] - E0) - np.log(curve[j] - E0)) / (etas[nxt] - etas[j])
        if abs(s - 2.0) > tol:
            break
        if out and any(g[j] < g[j - step] and g[j] <= g[nxt] for g in gaps):
            break
        out.append(nxt)
        j = nxt
    return out


def channel_data(graph, crossing, E_r, embedded=(None, None), E0=0.0,
                 tol=EXPONENT_TOLERANCE, eta_limits=(-np.inf, np.inf)):
    """Points of the box-state channel that takes part in `crossing`.

    Inside ``embedded = (eta_lo, eta_hi)`` (default: the crossing window)
    the channel is ``eps_plus + eps_minus - E_r``.  Outside it the channel
    is the upper curve before the crossing and the lower one after it,
    followed for as long as ``exp(2*eta)*(E - E0)`` stays nearly constant,
    i.e. the local exponent stays within `tol` of 2, and up to the first
    avoided crossing with another state.

    Returns ``(etas, energies, is_embedded)`` sorted by eta.
    """
    i = crossing.lower
    lo = crossing.etas[0] if embedded[0] is None else embedded[0]
    hi = crossing.etas[-1] if embedded[1] is None else embedded[1]
    etas = graph.etas
    emb = np.flatnonzero((etas >= lo) & (etas <= hi))
    if len(emb) == 0:
        raise ValueError("embedded interval holds no grid points")
    e_emb = graph.energies[emb, i] + graph.energies[emb, i + 1] - E_r
    left = _walk(etas, graph.energies, i + 1, emb[0], -1, E0, tol, eta_limits[0])
    right = _walk(etas, graph.energies, i, emb[-1], +1, E0, tol, eta_limits[1])
    idx = np.concatenate([emb, left, right]).astype(int)
    E = np.concatenate([e_emb, graph.energies[left, i + 1], graph.energies[right, i]])
    flag = np.concatenate([np.ones(len(emb), bool), np.zeros(len(left) + len(right), bool)])
    order = np.argsort(etas[idx])
    return etas[idx][order], E[order], flag[order]


def fit_channel(etas, energies, eta_c, E_r, E0=0.0, exclude_gap=None):
    """ContinuumChannel anchored at ``(eta_c, E_r)`` fitted to channel points.

    `exclude_gap` drops points with ``|E - E_r| < exclude_gap``; right at the
    crossing the embedded estimate carries no information about the slope
    and its log is most sensitive to noise.
    """
    etas = np.asarray(etas, dtype=float)
    energies = np.asarray(energies, dtype=float)
    keep = energies > E0
    if exclude_gap:
        keep &= np.abs(energies - E_r) >= exclude_gap
    alpha, beta, res = fit_exponent(etas[keep], energies[keep], eta_c, E_r, E0)
    return ContinuumChannel(eta_c=float(eta_c), alpha_c=alpha, beta_c=beta, E0=E0,
                            E_anchor=float(E_r),
                            eta_range=(float(etas[keep].min()), float(etas[keep].max())),
                            residual=res)
