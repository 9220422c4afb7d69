"""Complex scaling applied to a fitted diabatic model of the stabilization graph.

The model couples one resonance of fixed energy to N quasi-continuum channels:

    H(eta) = [[E_r,        delta_1/2,   ...,  delta_N/2 ],
              [delta_1/2,  E_1(eta),    0,    0         ],
              [...,        0,           ...,  0         ],
              [delta_N/2,  0,           0,    E_N(eta)  ]]

Evaluating the channels at ``eta = delta_eta + 1j*theta`` gives a complex
symmetric matrix whose spectrum holds the resonance and a rotated piece of
the discretized continuum.
"""

from dataclasses import dataclass, field
import csv
import json

import numpy as np

from .contfit import ContinuumChannel
from .eig import eig_complex
from .errors import TrackingLost, UnstableWindow

JUMP_FACTOR = 10.0
INSTABILITY_FACTOR = 10.0


@dataclass
class DiabaticModel:
    E_r: float
    channels: list
    deltas: np.ndarray

    def __post_init__(self):
        self.deltas = np.asarray(self.deltas, dtype=float)
        if len(self.channels) != len(self.deltas):
            raise ValueError("one coupling per channel expected")
        if len(self.channels) < 1:
            raise ValueError("at least one channel is required")

    @property
    def size(self):
        return len(self.channels) + 1

    def channel_energies(self, eta):
        return np.array([ch.energy(eta) for ch in self.channels])

    def subset(self, idx):
        idx = list(idx)
        return DiabaticModel(self.E_r, [self.channels[k] for k in idx], self.deltas[idx])

    def sorted_by_crossing(self):
        return self.subset(np.argsort([ch.eta_c for ch in self.channels]))

    @classmethod
    def from_records(cls, records, E_r=None):
        """Model from crossing records as written by the pipeline (JSON)."""
        channels, deltas = [], []
        for r in records:
            channels.append(ContinuumChannel(
                eta_c=r["eta_c"], alpha_c=r["alpha_c"], beta_c=r.get("beta_c", 0.0),
                E0=r.get("E0", 0.0), E_anchor=r["E_r"],
                eta_range=(r.get("eta_lo", -np.inf), r.get("eta_hi", np.inf)),
                residual=r.get("fit_residual", 0.0)))
            deltas.append(r["delta"])
        if E_r is None:
            E_r = float(np.mean([r["E_r"] for r in records]))
        return cls(E_r, channels, np.array(deltas))


def assemble(model, eta):
    """Arrowhead matrix H(eta); the resonance entry depends on Re(eta) only,
    and here is a constant."""
    n = model.size
    h = np.zeros((n, n), dtype=complex)
    h[0, 0] = model.E_r
    h[np.arange(1, n), np.arange(1, n)] = model.channel_energies(eta)
    h[0, 1:] = h[1:, 0] = model.deltas / 2
    return h


@dataclass
class ExpostSpectrum:
    eta: complex
    values: np.ndarray
    vectors: np.ndarray
    resonance: int
    # index into model.channels of each eigenvector's largest channel weight
    dominant_channel: np.ndarray

    @property
    def resonance_energy(self):
        return complex(self.values[self.resonance])

    @property
    def resonance_weights(self):
        return np.abs(self.vectors[0, :] ** 2)

    def continuum(self):
        keep = np.arange(len(self.values)) != self.resonance
        return self.values[keep], self.dominant_channel[keep]


def spectrum(model, eta):
    """Diagonalize H(eta) and single out the resonance.

    The resonance is the eigenvector with the largest squared first
    (resonance) component, not the eigenvalue closest to E_r.
    """
    es = eig_complex(assemble(model, eta))
    weights = np.abs(es.vectors[0, :] ** 2)
    res = int(np.argmax(weights))
    dom = np.argmax(np.abs(es.vectors[1:, :] ** 2), axis=0)
    return ExpostSpectrum(complex(eta), es.values, es.vectors, res, dom)


def retained_continuum(model, spec, margin=0.0):
    """Continuum eigenvalues whose dominant channel was fitted around Re(eta).

    Channels are trusted where their fit data cover the evaluation point;
    elsewhere the channel form is an extrapolation.
    """
    vals, dom = spec.continuum()
    ok = np.array([model.channels[c].covers(np.real(spec.eta), margin) for c in dom], bool)
    return vals[ok]


@dataclass
class ResonanceTrajectory:
    thetas: np.ndarray
    energies: np.ndarray
    weights: np.ndarray
    delta_eta: float = 0.0
    extrapolated: complex = None
    window: tuple = None
    reselected: list = field(default_factory=list)

    @property
    def widths(self):
        return -2 * self.energies.imag

    def derivative(self):
        return np.gradient(self.energies, self.thetas)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["theta", "ReE", "ImE", "weight"])
            for t, e, wt in zip(self.thetas, self.energies, self.weights):
                w.writerow(["%.17g" % t, "%.17g" % e.real, "%.17g" % e.imag, "%.17g" % wt])


def _track(values_list, weights_list, picks, factor=JUMP_FACTOR):
    """Continuity pass over per-theta picks; re-select by extrapolation on jumps."""
    energies = [values_list[0][picks[0]]]
    weights = [weights_list[0][picks[0]]]
    reselected = []
    for k in range(1, len(values_list)):
        vals = values_list[k]
        e = vals[picks[k]]
        if k >= 2:
            prev, prev2 = energies[-1], energies[-2]
            secant = max(abs(prev - prev2), 1e-9 * max(1.0, abs(prev)))
            if abs(e - prev) > factor * secant:
                guess = 2 * prev - prev2
                j = int(np.argmin(np.abs(vals - guess)))
                if abs(vals[j] - guess) > factor * secant:
                    raise TrackingLost(f"no eigenvalue continues the trajectory at step {k}")
                if j != picks[k]:
                    reselected.append(k)
                e = vals[j]
                weights.append(weights_list[k][j])
                energies.append(e)
                continue
        energies.append(e)
        weights.append(weights_list[k][picks[k]])
    return np.array(energies), np.array(weights), reselected


def theta_sweep(model, thetas, delta_eta=0.0, check_continuity=True):
    """Resonance eigenvalue of H(delta_eta + 1j*theta) along `thetas`."""
    thetas = np.asarray(thetas, dtype=float)
    if np.any(thetas <= 0) or np.any(thetas >= np.pi / 4):
        raise ValueError("theta grid must lie in (0, pi/4)")
    if np.any(np.diff(thetas) <= 0):
        raise ValueError("theta grid must be increasing")
    specs = [spectrum(model, delta_eta + 1j * t) for t in thetas]
    vals = [s.values for s in specs]
    wts = [s.resonance_weights for s in specs]
    picks = [s.resonance for s in specs]
    if check_continuity and len(thetas) > 2:
        energies, weights, resel = _track(vals, wts, picks)
    else:
        energies = np.array([v[p] for v, p in zip(vals, picks)])
        weights = np.array([w[p] for w, p in zip(wts, picks)])
        resel = []
    return ResonanceTrajectory(thetas, energies, weights, float(delta_eta), reselected=resel)


def stable_window(traj, factor=INSTABILITY_FACTOR):
    """Longest run of thetas where |dE/dtheta| stays below `factor` times
    its median over that same run.

    This is the diagnostic :func:`extrapolate` applies, so the window it
    returns is always accepted there.  Ties go to the run at larger theta.
    """
    slope = np.abs(traj.derivative())
    n = len(slope)
    best = None
    for lo in range(n):
        for hi in range(n, lo + 2, -1):
            if best is not None and hi - lo < best[1] - best[0]:
                break
            seg = slope[lo:hi]
            if seg.max() <= factor * np.median(seg):
                if best is None or hi - lo >= best[1] - best[0]:
                    best = (lo, hi)
                break
    if best is None:
        raise UnstableWindow("no stable stretch of the trajectory")
    return float(traj.thetas[best[0]]), float(traj.thetas[best[1] - 1])


def extrapolate(traj, window=None, degree=2, factor=INSTABILITY_FACTOR):
    """Value at theta = 0 of low-order polynomial fits over a stable window.

    Re E and Im E are fitted separately by least squares.  Without a
    `window` one is chosen by :func:`stable_window`.  The trajectory object
    is updated with the window and the result.
    """
    if not 1 <= degree <= 3:
        raise ValueError("degree must be 1, 2 or 3")
    if window is None:
        window = stable_window(traj, factor)
    lo, hi = window
    sel = (traj.thetas >= lo - 1e-15) & (traj.thetas <= hi + 1e-15)
    if sel.sum() < degree + 1:
        raise UnstableWindow(f"window {window} holds {sel.sum()} points; need {degree + 1}")
    slope = np.abs(traj.derivative()[sel])
    if np.any(slope > factor * np.median(slope)):
        raise UnstableWindow(f"|dE/dtheta| varies more than {factor}x inside {window}")
    t, e = traj.thetas[sel], traj.energies[sel]
    re = np.polynomial.Polynomial.fit(t, e.real, degree)(0.0)
    im = np.polynomial.Polynomial.fit(t, e.imag, degree)(0.0)
    traj.window = (float(lo), float(hi))
    traj.extrapolated = complex(re, im)
    return traj.extrapolated


def channel_convergence(model, eta):
    """Resonance energy as channels are added in order of eta_c.

    Returns ``(eta_cs, energies)``; ``energies[k]`` uses the first k+1
    channels.
    """
    m = model.sorted_by_crossing()
    energies = np.array([spectrum(m.subset(range(k + 1)), eta).resonance_energy
                         for k in range(len(m.channels))])
    return np.array([ch.eta_c for ch in m.channels]), energies


def summary(trajectories, benchmark=None):
    """JSON-ready summary of extrapolated energies per delta_eta."""
    out = {"results": []}
    for tr in trajectories:
        e = tr.extrapolated
        item = {"delta_eta": tr.delta_eta,
                "window": list(tr.window) if tr.window else None,
                "ReE": None if e is None else e.real,
                "ImE": None if e is None else e.imag,
                "width": None if e is None else -2 * e.imag}
        if benchmark is not None and e is not None:
            item["diff_ReE"] = e.real - benchmark.real
            item["diff_ImE"] = e.imag - benchmark.imag
            item["abs_diff"] = abs(e - benchmark)
        out["results"].append(item)
    if benchmark is not None:
        out["benchmark"] = {"ReE": benchmark.real, "ImE": benchmark.imag,
                            "width": -2 * benchmark.imag}
    return out


def write_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
