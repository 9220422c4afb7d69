import numpy as np
import pytest

from stabcs.errors import EmptyWindow, OverlappingCrossings, SchemaError, SignTrackingFailure
from stabcs.model1d import BasisSpec, PotentialParams
from stabcs.stabgraph import (StabilizationGraph, detect_crossings, nac_from_vectors,
                              nonadiabatic_coupling, refine, sweep, track_signs, uniform_grid,
                              window)


def two_level_graph(etas, E_r=1.5, delta=0.01, a=0.2, eta_c=0.5, background=(0.5, 3.0)):
    """Graph of a 2x2 crossing plus two flat spectator levels."""
    e_eta = E_r - a * (etas - eta_c)
    mean, root = (E_r + e_eta) / 2, np.sqrt((e_eta - E_r) ** 2 + delta**2) / 2
    rows = np.column_stack([np.full_like(etas, background[0]), mean - root, mean + root,
                            np.full_like(etas, background[1])])
    return StabilizationGraph(etas, rows)


def test_free_sweep_scaling_law():
    b = BasisSpec(L0=20.0, N=30)
    g = sweep(uniform_grid(-1.0, 1.0, 0.25), PotentialParams.free(), b)
    ratio = g.energies * np.exp(2 * g.etas)[:, None]
    assert np.max(np.abs(ratio / ratio[0] - 1)) < 1e-10
    assert detect_crossings(g, window(g, 0.2, 0.1, strict=False)) == []


def test_sweep_is_thread_independent(system_params):
    b = BasisSpec(L0=30.0, N=60)
    grid = uniform_grid(-0.5, 0.5, 0.1)
    g1 = sweep(grid, system_params, b, threads=1)
    g4 = sweep(grid, system_params, b, threads=4)
    assert np.array_equal(g1.energies, g4.energies)


def test_sweep_range_checked(system_params):
    with pytest.raises(ValueError):
        sweep([-2.0, 0.0], system_params, BasisSpec(N=10))
    with pytest.raises(ValueError):
        sweep([0.1, 0.0], system_params, BasisSpec(N=10))


def test_csv_round_trip(tmp_path):
    g = two_level_graph(np.linspace(0, 1, 11))
    path = tmp_path / "g.csv"
    g.to_csv(path)
    h = StabilizationGraph.from_csv(path)
    assert np.array_equal(g.etas, h.etas) and np.array_equal(g.energies, h.energies)
    assert path.read_text().splitlines()[0] == "eta,E1,E2,E3,E4"


@pytest.mark.parametrize("body,line", [
    ("eta,E1\n0,1\n0.1,x\n", 3),
    ("eta,E1,E2\n0,1,2\n0.1,2\n", 3),
    ("eta,E1\n0.2,1\n0.1,1\n", 3),
    ("eta,E1,E2\n0,2,1\n", 2),
    ("t,E1\n0,1\n", 1),
])
def test_csv_schema_errors_carry_line(tmp_path, body, line):
    path = tmp_path / "bad.csv"
    path.write_text(body)
    with pytest.raises(SchemaError) as info:
        StabilizationGraph.from_csv(path)
    assert info.value.line == line
    assert str(info.value).startswith(f"line {line}:")


def test_window_properties():
    g = two_level_graph(np.linspace(0, 1, 21))
    assert all(len(ix) == 0 for ix in window(g, 1.5, 0.0))
    small, large = window(g, 1.5, 0.05), window(g, 1.5, 0.3)
    assert all(set(s) <= set(l) for s, l in zip(small, large))
    with pytest.raises(EmptyWindow):
        window(g, 10.0, 0.1)
    with pytest.raises(ValueError):
        window(g, 1.5, -1)


def test_detects_single_crossing():
    g = two_level_graph(np.linspace(0, 1, 101))
    (c,) = detect_crossings(g, window(g, 1.5, 0.05))
    assert c.lower == 1 and c.upper == 2
    assert c.eta_min == pytest.approx(0.5)
    assert c.gap_min == pytest.approx(0.01, abs=1e-12)
    assert not c.needs_refinement


def test_under_resolved_window_is_flagged():
    g = two_level_graph(np.linspace(0, 1, 101), delta=1e-4)
    (c,) = detect_crossings(g, window(g, 1.5, 0.01))
    assert c.needs_refinement


def test_overlapping_minima_raise():
    etas = np.linspace(0, 1, 201)
    gap = 0.05 + 0.02 * np.cos(4 * np.pi * etas) ** 2
    g = StabilizationGraph(etas, np.column_stack([1.5 - gap / 2, 1.5 + gap / 2]))
    with pytest.raises(OverlappingCrossings):
        detect_crossings(g, window(g, 1.5, 0.2))


def test_refine_merges_points(system_params):
    b = BasisSpec(L0=30.0, N=40)
    g = sweep(uniform_grid(0.0, 0.2, 0.1), system_params, b)
    r = refine(g, [(0.05, 0.15)], system_params, b, spacing=0.025)
    assert len(r) == 7
    assert np.all(np.diff(r.etas) > 0)
    assert refine(r, [], system_params, b) is r


def test_nac_decoupled_is_zero():
    etas = np.linspace(0, 1, 21)
    lower = np.tile([1.0, 0.0, 0.0], (21, 1))
    upper = np.tile([0.0, 1.0, 0.0], (21, 1))
    assert np.allclose(nac_from_vectors(etas, lower, upper), 0)


def test_nac_two_level_lorentzian():
    E_r, delta, a, eta_c = 1.5, 0.01, 0.2, 0.5
    etas = np.linspace(eta_c - 1.0, eta_c + 1.0, 4001)
    lower, upper = [], []
    for eta in etas:
        h = np.array([[E_r, delta / 2], [delta / 2, E_r - a * (eta - eta_c)]])
        w, v = np.linalg.eigh(h)
        lower.append(v[:, 0])
        upper.append(v[:, 1])
    tau = nac_from_vectors(etas, np.array(lower), np.array(upper))
    tau *= np.sign(tau[len(tau) // 2])
    x = a * (etas - eta_c) / delta
    lorentz = (a / (2 * delta)) / (1 + x**2)
    assert np.max(np.abs(tau - lorentz)) < 1e-3 * lorentz.max()
    # the grid spans +-20 half-widths; the full-line area is pi/2
    area = np.sum((tau[1:] + tau[:-1]) / 2 * np.diff(etas))
    assert area == pytest.approx(np.arctan(a * 1.0 / delta), rel=1e-5)
    tails = np.pi / 2 - np.arctan(a * 1.0 / delta)
    assert area + tails == pytest.approx(np.pi / 2, rel=1e-5)


def test_sign_tracking_failure():
    with pytest.raises(SignTrackingFailure):
        track_signs(np.array([[1.0, 0.0], [0.0, 1.0]]))


def test_nac_system_crossing_peak(system_params, even_basis, system_diabatization):
    rec = system_diabatization.records[0]
    c = [c for c in system_diabatization.crossings if c.lower == rec.lower][0]
    half = 6 * rec.delta / rec.a_c
    etas = np.linspace(rec.eta_c_corrector - half, rec.eta_c_corrector + half, 61)
    g = sweep(etas, system_params, even_basis, keep_vectors=True, threads=4)
    from stabcs.stabgraph import CrossingWindow
    cw = CrossingWindow(c.lower, g.etas, g.energies[:, c.lower], g.energies[:, c.upper],
                        rec.eta_c, rec.delta)
    e, tau = nonadiabatic_coupling(g, cw)
    assert np.max(np.abs(tau)) == pytest.approx(rec.a_c / (2 * rec.delta), rel=0.05)


def test_system_window_matches_direct_count(system_graph):
    counts = np.array([len(ix) for ix in window(system_graph, 1.5388, 0.05)])
    direct = [sum(1 for e in row if 1.5388 - 0.05 <= e <= 1.5388 + 0.05)
              for row in system_graph.energies.tolist()]
    assert counts.tolist() == direct
    # the plateau state is always present; small boxes hold at most one more
    assert counts.min() >= 1
    assert counts[system_graph.etas < 0].max() <= 2


def test_system_crossings_quasi_uniform(system_diabatization):
    etas = np.array([c.eta_min for c in system_diabatization.crossings])
    spacing = np.diff(etas)
    assert np.all(spacing > 0)
    # spacing shrinks smoothly with the box; neighbouring spacings differ by < 50%
    assert np.max(np.abs(spacing[1:] / spacing[:-1] - 1)) < 0.5


def test_refinement_leaves_curves_unchanged(system_params, even_basis, system_graph):
    # an independent sweep at midpoints agrees with cubic interpolation of
    # the 2x finer graph to 1e-6 wherever curves are smooth (away from gaps)
    from scipy.interpolate import CubicSpline
    fine = sweep(uniform_grid(0.2, 0.4, 0.005), system_params, even_basis, threads=4)
    mids = uniform_grid(0.2025, 0.3925, 0.005)[:-1] + 0.0
    mids = mids[(mids > 0.21) & (mids < 0.39)]
    check = sweep(mids, system_params, even_basis, threads=4)
    for n in (0, 1, 2):
        s = CubicSpline(fine.etas, fine.energies[:, n])
        assert np.max(np.abs(s(check.etas) - check.energies[:, n])) < 1e-6


@pytest.mark.slow
def test_crossing_count_matches_dense_rescan(system_params, even_basis, system_diabatization):
    # brute force: gap minima between the resonance-bearing pair on a 5x denser grid
    dense = sweep(uniform_grid(-1.0, 1.0, 0.002), system_params, even_basis, threads=4)
    n = 0
    for i in range(dense.n_states - 1):
        gap = dense.energies[:, i + 1] - dense.energies[:, i]
        mean = (dense.energies[:, i + 1] + dense.energies[:, i]) / 2
        j = np.flatnonzero((gap[1:-1] < gap[:-2]) & (gap[1:-1] <= gap[2:])) + 1
        n += np.sum(np.abs(mean[j] - 1.5388) < 0.01)
    assert n == len(system_diabatization.crossings)
