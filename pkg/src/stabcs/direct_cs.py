"""Benchmark: complex scaling applied directly to the model Hamiltonian."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .eig import eigvals_complex
from .errors import NoStationaryPoint, TrackingLost
from .model1d import build_complex_hamiltonian, isolated_eigenvalues

JUMP_FACTOR = 10.0


@dataclass
class ThetaTrajectory:
    thetas: np.ndarray
    spectra: list
    tracked: np.ndarray
    stationary_theta: float = None
    stationary_energy: complex = None

    def to_csv(self, path):
        with open(path, "w") as fh:
            fh.write("theta,ReE,ImE,weight\n")
            for t, e in zip(self.thetas, self.tracked):
                # direct diagonalization carries no diabatic weight
                fh.write("%.17g,%.17g,%.17g,nan\n" % (t, e.real, e.imag))


def complex_spectra(p, b, thetas, delta_eta=0.0, threads=1):
    work = lambda t: eigvals_complex(build_complex_hamiltonian(t, delta_eta, p, b).matrix)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(work, thetas))
    return [work(t) for t in thetas]


def _follow(thetas, spectra, start, e0):
    """Track the eigenvalue starting at `e0` from index `start` onwards.

    A step more than JUMP_FACTOR times longer than the previous one (and
    above round-off) means the nearest-neighbour match hopped to another
    eigenvalue.
    """
    path = [e0]
    for k in range(start + 1, len(thetas)):
        guess = path[-1] if len(path) < 2 else 2 * path[-1] - path[-2]
        vals = spectra[k]
        j = int(np.argmin(np.abs(vals - guess)))
        path.append(vals[j])
    path = np.array(path)
    steps = np.abs(np.diff(path))
    floor = 1e-8 * max(1.0, abs(e0))
    for k in range(1, len(steps)):
        if steps[k] > JUMP_FACTOR * max(steps[k - 1], floor):
            raise TrackingLost(f"tracked eigenvalue jumps at theta={thetas[start + k + 1]:.4g}")
    return path


def _stationary(thetas, path):
    """theta minimizing |dE/dtheta|, refined by a parabola through three points."""
    if len(path) < 3:
        raise NoStationaryPoint("trajectory too short")
    mid = (thetas[1:] + thetas[:-1]) / 2
    speed = np.abs(np.diff(path)) / np.diff(thetas)
    j = int(np.argmin(speed))
    t_star = mid[j]
    if 0 < j < len(speed) - 1:
        x, y = mid[j - 1:j + 2], speed[j - 1:j + 2]
        c = np.polyfit(x, y, 2)
        if c[0] > 0:
            t_star = float(np.clip(-c[1] / (2 * c[0]), x[0], x[-1]))
    # quadratic interpolation of E through the three nearest grid points
    k = int(np.clip(np.searchsorted(thetas, t_star), 1, len(thetas) - 2))
    x = thetas[k - 1:k + 2]
    re = np.polyval(np.polyfit(x, path[k - 1:k + 2].real, 2), t_star)
    im = np.polyval(np.polyfit(x, path[k - 1:k + 2].imag, 2), t_star)
    return float(t_star), complex(re, im), float(speed[j])


def theta_trajectory(p, b, thetas, guess=None, delta_eta=0.0, energy_range=(0.0, np.inf),
                     threads=1, spectra=None):
    """Spectra along `thetas` and the tracked resonance with its stationary point.

    Candidates are eigenvalues well above the rotated continuum.  With
    `guess` the candidate nearest to it is tracked; otherwise every
    candidate is tracked and the one with the smallest |dE/dtheta| wins.
    """
    thetas = np.asarray(thetas, dtype=float)
    if spectra is None:
        spectra = complex_spectra(p, b, thetas, delta_eta, threads)
    start = None
    for k, (t, vals) in enumerate(zip(thetas, spectra)):
        if t > 0 and len(isolated_eigenvalues(vals, t, energy_range)):
            start = k
            break
    if start is None or len(thetas) - start < 3:
        raise NoStationaryPoint("no eigenvalue separates from the rotated continuum")
    cands = isolated_eigenvalues(spectra[start], thetas[start], energy_range)
    if guess is not None:
        cands = cands[[int(np.argmin(np.abs(cands - guess)))]]
    best = None
    for e0 in cands:
        try:
            path = _follow(thetas, spectra, start, e0)
        except TrackingLost:
            if guess is not None:
                raise
            continue
        t_star, e_star, speed = _stationary(thetas[start:], path)
        if best is None or speed < best[3]:
            best = (path, t_star, e_star, speed)
    if best is None:
        raise NoStationaryPoint("no candidate could be tracked")
    path, t_star, e_star, _ = best
    tracked = np.full(len(thetas), complex(np.nan, np.nan))
    tracked[start:] = path
    return ThetaTrajectory(thetas, spectra, tracked, t_star, e_star)


def benchmark_resonance(p, b, thetas, guess=None, **kwargs):
    """Complex resonance energy at the stationary point of its theta-trajectory."""
    return theta_trajectory(p, b, thetas, guess=guess, **kwargs).stationary_energy
