"""Two-state diabatization of single avoided crossings.

Each crossing is modelled by

    H = [[E_r,      delta/2],
         [delta/2,  E_eta  ]]

with a constant resonance energy ``E_r``, a constant coupling and a box-state
energy ``E_eta`` that falls through ``E_r`` at ``eta_c``.  The predictor
reads ``delta`` and ``E_r`` off a spline of the adiabatic curves; the
corrector then asks for the pair that makes the per-point estimates of both
constants as constant as possible over the whole window.
"""

from dataclasses import dataclass
import logging

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize

from .errors import MinimumAtBoundary, NoConvergence, NoRoot

logger = logging.getLogger(__name__)


@dataclass
class Estimate:
    E_r: float
    delta: float
    eta_c: float


@dataclass
class TwoLevelDiabat:
    E_r: float
    delta: float
    eta_c: float
    a_c: float
    sigma: float = 0.0

    def channel_energy(self, eta):
        """Locally linear box-state energy ``E_r - a_c*(eta - eta_c)``."""
        return self.E_r - self.a_c * (np.asarray(eta) - self.eta_c)

    def adiabatic(self, eta):
        return two_level_energies(self.E_r, self.channel_energy(eta), self.delta)

    @property
    def alpha(self):
        """Exponent of the matching exponential channel, a_c / E_r."""
        return self.a_c / self.E_r


def two_level_energies(E_r, E_eta, delta):
    """Eigenvalues (eps_minus, eps_plus) of the 2x2 diabatic Hamiltonian.

    Written as ``mean -/+ sqrt(diff**2 + delta**2)/2``, which is the same
    pair as the ``1 +/- sqrt(1 + (delta/diff)**2)`` form but stays finite
    at the crossing.  Complex `E_eta` is allowed (principal branch).
    """
    E_eta = np.asarray(E_eta)
    mean = (E_r + E_eta) / 2
    root = np.sqrt((E_eta - E_r) ** 2 + delta**2 + 0j) / 2
    if not np.iscomplexobj(E_eta) and np.isrealobj(delta):
        root = root.real
        mean = np.real(mean)
    return mean - root, mean + root


def synthetic_crossing(etas, E_r, delta, E_eta, min_points=5):
    """CrossingWindow built from exact two-level curves (test generator)."""
    from .stabgraph import CrossingWindow

    etas = np.asarray(etas, dtype=float)
    lo, hi = two_level_energies(E_r, np.asarray(E_eta, dtype=float), delta)
    gap = hi - lo
    j = int(np.argmin(gap))
    return CrossingWindow(lower=0, etas=etas, eps_minus=lo, eps_plus=hi,
                          eta_min=float(etas[j]), gap_min=float(gap[j]), min_points=min_points)


def predictor(crossing):
    """First guess of (E_r, delta, eta_c) from cubic splines.

    eta_c is the minimum of the splined gap, delta the gap there, and E_r
    the splined mean adiabatic energy at eta_c.
    """
    etas = crossing.etas
    if len(etas) < 5:
        raise MinimumAtBoundary(f"window has {len(etas)} points; need at least 5")
    gap = CubicSpline(etas, crossing.gap)
    mean = CubicSpline(etas, (crossing.eps_plus + crossing.eps_minus) / 2)
    cand = gap.derivative().roots(extrapolate=False)
    cand = cand[(cand > etas[0]) & (cand < etas[-1])]
    if len(cand) == 0:
        raise MinimumAtBoundary("splined gap has no interior stationary point")
    eta_c = float(cand[np.argmin(gap(cand))])
    g = float(gap(eta_c))
    if g >= min(crossing.gap[0], crossing.gap[-1]):
        raise MinimumAtBoundary("splined gap minimum lies at the window edge")
    return Estimate(float(mean(eta_c)), g, eta_c)


def _slope_sign(etas, mean_eps):
    # sign of a_c, i.e. of -dE_eta/deta = -2 d(mean)/deta
    slope = np.polyfit(etas, mean_eps, 1)[0]
    return -1.0 if slope > 0 else 1.0


def _per_point(E_r, delta, mean, split, branch):
    """Per-point delta(eta_k), E_r(eta_k) and their negative discriminants."""
    d1 = split**2 - 4 * (mean - E_r) ** 2
    d2 = split**2 - delta**2
    delta_k = np.sqrt(np.clip(d1, 0, None))
    E_r_k = branch * np.sqrt(np.clip(d2, 0, None)) / 2 + mean
    return delta_k, E_r_k, d1, d2


def corrector_sigma(E_r, delta, etas, eps_minus, eps_plus, eta_c, a_sign=1.0):
    """Spread of the per-point estimates of E_r and delta.

    ``sigma = sqrt(sigma_1**2 + sigma_2**2)`` with sigma_1 (sigma_2) the
    population standard deviation of E_r(eta_k) (delta(eta_k)).  Points with
    a negative discriminant are left out of the deviations and contribute a
    penalty ``sqrt(mean(|d|))`` instead, which keeps the objective continuous.
    """
    mean = (eps_plus + eps_minus) / 2
    split = eps_plus - eps_minus
    branch = -np.sign((eta_c - etas) * a_sign)
    delta_k, E_r_k, d1, d2 = _per_point(E_r, delta, mean, split, branch)
    ok1, ok2 = d1 >= 0, d2 >= 0
    s2 = np.var(delta_k[ok1]) if ok1.sum() > 1 else 0.0
    s1 = np.var(E_r_k[ok2]) if ok2.sum() > 1 else 0.0
    neg = np.concatenate([d1[~ok1], d2[~ok2]])
    penalty = np.sqrt(np.sum(-neg) / len(etas)) if len(neg) else 0.0
    return float(np.sqrt(s1 + s2 + penalty**2))


def corrector(crossing, estimate, max_gap_ratio=None, tol=1e-12, maxiter=20000):
    """Refine (E_r, delta) by minimizing the corrector spread.

    Minimization is Nelder-Mead in coordinates scaled by the predictor's
    delta.  ``a_c`` and ``eta_c`` then come from a quadratic fit of
    ``E_eta = eps_plus + eps_minus - E_r``: ``eta_c`` where it equals
    ``E_r`` and ``a_c = -dE_eta/deta`` there.  `max_gap_ratio` drops points
    whose gap exceeds that multiple of the minimum gap.
    """
    etas = crossing.etas
    lo, hi = crossing.eps_minus, crossing.eps_plus
    if max_gap_ratio is not None:
        keep = crossing.gap <= max_gap_ratio * crossing.gap_min
        etas, lo, hi = etas[keep], lo[keep], hi[keep]
    if len(etas) < 3:
        raise NoConvergence(f"only {len(etas)} points available to the corrector")
    a_sign = _slope_sign(etas, (lo + hi) / 2)
    scale = estimate.delta if estimate.delta > 0 else max(np.min(hi - lo), 1e-12)

    def unpack(z):
        return estimate.E_r + z[0] * scale, estimate.delta + z[1] * scale

    def objective(z):
        E_r, delta = unpack(z)
        return corrector_sigma(E_r, delta, etas, lo, hi, estimate.eta_c, a_sign) / scale

    sigma0 = objective(np.zeros(2))
    best = None
    z = np.zeros(2)
    simplex_size = 0.1
    # restarts shrink the simplex; Nelder-Mead stalls on the cone-shaped minimum otherwise
    for _ in range(8):
        simplex = np.array([z, z + [simplex_size, 0], z + [0, simplex_size]])
        res = minimize(objective, z, method="Nelder-Mead",
                       options={"initial_simplex": simplex, "xatol": 1e-14,
                                "fatol": tol / scale * 1e-2, "maxiter": maxiter,
                                "maxfev": maxiter})
        if best is not None and res.fun >= best.fun * (1 - 1e-6):
            best = res if res.fun < best.fun else best
            break
        best = res
        z = res.x
        simplex_size = max(simplex_size * 0.01, 1e-9)
    if not np.isfinite(best.fun):
        raise NoConvergence("corrector objective is not finite")
    if best.fun > sigma0:
        best.x, best.fun = np.zeros(2), sigma0
    E_r, delta = unpack(best.x)
    eta_c, a_c = _diabatic_crossing(etas, lo + hi - E_r, E_r, estimate.eta_c)
    return TwoLevelDiabat(float(E_r), float(abs(delta)), eta_c, a_c, float(best.fun * scale))


def _diabatic_crossing(etas, E_eta, E_r, eta_guess):
    deg = 2 if len(etas) >= 4 else 1
    x0 = float(np.mean(etas))
    poly = np.polynomial.Polynomial.fit(etas - x0, E_eta - E_r, deg)
    roots = poly.roots()
    roots = roots[np.abs(roots.imag) < 1e-12].real + x0
    if len(roots) == 0:
        return float(eta_guess), float(-poly.deriv()(eta_guess - x0))
    eta_c = float(roots[np.argmin(np.abs(roots - eta_guess))])
    return eta_c, float(-poly.deriv()(eta_c - x0))


def diabatize(crossing, max_gap_ratio=None):
    """Predictor followed by corrector."""
    return corrector(crossing, predictor(crossing), max_gap_ratio=max_gap_ratio)


def ep_location(d, channel=None, radius=1.0, tol=1e-14, maxiter=100):
    """Complex eta where the channel energy reaches ``E_r - i*delta``.

    There the two diabatic levels coalesce at ``E_r - i*delta/2``.
    `channel` needs ``energy(eta)`` and ``derivative(eta)`` methods
    accepting complex eta; without one the linear channel of `d` is used.
    Newton iteration starts from the linear-channel root
    ``eta_c + i*delta/a_c``.  Returns ``(eta_ep, energy_ep)``.
    """
    target = d.E_r - 1j * d.delta
    if channel is None:
        f = lambda eta: d.E_r - d.a_c * (eta - d.eta_c)
        df = lambda eta: -d.a_c
    else:
        f, df = channel.energy, channel.derivative
    eta = d.eta_c + 1j * d.delta / d.a_c
    for _ in range(maxiter):
        step = (f(eta) - target) / df(eta)
        eta = eta - step
        if abs(eta - d.eta_c) > radius or not np.isfinite(eta):
            raise NoRoot(f"Newton left the trust region |eta - eta_c| < {radius}")
        if abs(step) < tol * max(1.0, abs(eta)):
            return complex(eta), complex(d.E_r - 0.5j * d.delta)
    raise NoRoot("Newton iteration did not converge")
