import math

import numpy as np
import pytest

from anisotest.geometry import PointPattern, Window, rotate_points
from anisotest.processes import Poisson, rng_from_seed, sim_lgcp, sim_poisson
from anisotest.replication import (
    Geometric,
    ImprovementOnly,
    SRConfig,
    TilingConfig,
    _curve_deviation,
    parametric_replicate,
    reconstruction_target,
    sr_total_deviation,
    stochastic_reconstruction,
    tile_replicate,
    tile_source_candidates,
    tile_target_centres,
)
from anisotest.study import study_lgcp
from anisotest.testing import rng_for

CENTRED = Window.square(1.0)
SMALL = Window.square(0.5)


def test_tile_centres_and_candidates():
    targets = tile_target_centres(CENTRED, 2)
    assert sorted(map(tuple, targets)) == [
        (-0.25, -0.25),
        (-0.25, 0.25),
        (0.25, -0.25),
        (0.25, 0.25),
    ]
    cand = tile_source_candidates(CENTRED, 2)
    bound = 0.5 - math.sqrt(2.0) / 4.0
    assert np.abs(cand).max() == pytest.approx(bound, abs=1e-7)
    assert bound == pytest.approx(0.1464466, abs=1e-7)


def test_tile_replicate_errors():
    pat = sim_poisson(100.0, CENTRED, rng_from_seed(0))
    with pytest.raises(ValueError):
        tile_replicate(pat, TilingConfig(1), rng_from_seed(1))
    rect = Window(0, 2, 0, 1)
    pat2 = PointPattern([(0.5, 0.5), (1.5, 0.5)], rect)
    with pytest.raises(ValueError):
        tile_replicate(pat2, TilingConfig(2), rng_from_seed(1))
    with pytest.raises(ValueError):
        TilingConfig(0)


def test_tile_replicate_empty_pattern():
    pat = PointPattern(np.empty((0, 2)), CENTRED)
    rep = tile_replicate(pat, TilingConfig(2), rng_from_seed(2))
    assert rep.n == 0


def test_tile_replicate_determinism_and_window():
    pat = sim_poisson(300.0, CENTRED, rng_from_seed(3))
    a = tile_replicate(pat, TilingConfig(3), rng_from_seed(4))
    b = tile_replicate(pat, TilingConfig(3), rng_from_seed(4))
    assert np.array_equal(a.points, b.points)
    assert a.window.contains(a.points).all()


def test_tile_replicate_single_point_counts():
    pat = PointPattern([(0.0, 0.0)], CENTRED)
    half = 0.25
    for s in range(30):
        rep, draws = tile_replicate(pat, TilingConfig(2), rng_from_seed(s), return_draws=True)
        assert 0 <= rep.n <= 4
        targets = tile_target_centres(CENTRED, 2)
        for p in rep.points:
            # the point must sit inside the tile square it was placed in
            local = np.abs(p - targets)
            assert (local.max(axis=1) <= half + 1e-12).any()


def test_tile_replicate_identity_mode():
    pat = sim_poisson(200.0, CENTRED, rng_from_seed(5))
    targets = tile_target_centres(CENTRED, 3)
    rep = tile_replicate(pat, TilingConfig(3), rng_from_seed(6), rotate=False, sources=targets)
    got = rep.points[np.lexsort((rep.points[:, 1], rep.points[:, 0]))]
    want = pat.points[np.lexsort((pat.points[:, 1], pat.points[:, 0]))]
    assert np.array_equal(got, want)


def test_tile_replicate_reproducible_from_draws():
    pat = sim_poisson(250.0, CENTRED, rng_from_seed(7))
    k = 3
    rep, draws = tile_replicate(pat, TilingConfig(k), rng_from_seed(8), return_draws=True)
    side = CENTRED.side
    rho = math.sqrt(2.0) * side / (2 * k)
    half = side / (2 * k)
    targets = tile_target_centres(CENTRED, k)
    pieces = []
    for (t_a, theta), t_b in zip(draws, targets):
        local = pat.points - t_a
        local = local[np.hypot(local[:, 0], local[:, 1]) <= rho]
        local = rotate_points(local, theta)
        keep = (np.abs(local[:, 0]) <= half) & (np.abs(local[:, 1]) <= half)
        pieces.append(local[keep] + t_b)
    want = np.unique(np.concatenate(pieces), axis=0)
    assert np.array_equal(rep.points, want)


def test_sr_config_validation():
    with pytest.raises(ValueError):
        SRConfig(iters=0)
    with pytest.raises(ValueError):
        SRConfig(iters=10, match_count=False, match_contact=False)
    with pytest.raises(ValueError):
        Geometric(t_start=1.0, t_end=2.0)


def test_sr_deviation_zero_for_observed():
    pat = sim_poisson(150.0, SMALL, rng_from_seed(9))
    cfg = SRConfig(iters=10, probe_count=1024)
    target = reconstruction_target(pat, cfg)
    assert sr_total_deviation(pat, target) == 0.0


def test_sr_deviation_count_term():
    pat = sim_poisson(150.0, SMALL, rng_from_seed(10))
    cfg = SRConfig(iters=10, match_contact=False)
    target = reconstruction_target(pat, cfg)
    smaller = PointPattern(pat.points[:-2], SMALL)
    assert sr_total_deviation(smaller, target) == 4.0


def test_sr_curve_quadrature_constant_case():
    r_j = 0.37
    nodes = np.linspace(0.0, r_j, 50)
    c = 0.3
    a = np.linspace(0.1, 0.9, 50)
    assert _curve_deviation(nodes[1:], a[1:], (a + c)[1:]) != c**2 * r_j  # uses 0-prefix
    got = float(np.trapezoid((np.full(50, c)) ** 2, nodes))
    assert got == pytest.approx(c**2 * r_j, abs=1e-6)


def test_sr_improvement_only_trace_monotone():
    pat = sim_lgcp(study_lgcp(), SMALL, rng_from_seed(11))
    cfg = SRConfig(iters=800, probe_count=1024, schedule=ImprovementOnly())
    rep, dev, acc = stochastic_reconstruction(
        pat, cfg, rng_for(12), return_trace=True
    )
    assert rep.n == pat.n
    assert np.all(np.diff(dev) <= 0)
    assert rep.window.contains(rep.points).all()


def test_sr_identity_initial_state_is_stable():
    pat = sim_poisson(120.0, SMALL, rng_from_seed(13))
    cfg = SRConfig(iters=400, probe_count=1024, schedule=ImprovementOnly())
    rep, dev, acc = stochastic_reconstruction(
        pat, cfg, rng_for(14), initial=pat, return_trace=True
    )
    assert np.array_equal(rep.points, pat.points)
    assert np.all(dev == 0.0)
    assert not acc.any()


def test_sr_determinism():
    pat = sim_lgcp(study_lgcp(), SMALL, rng_from_seed(15))
    cfg = SRConfig(iters=300, probe_count=1024)
    a = stochastic_reconstruction(pat, cfg, rng_for(16))
    b = stochastic_reconstruction(pat, cfg, rng_for(16))
    assert np.array_equal(a.points, b.points)


def test_sr_convergence_desk_scale():
    ok = 0
    for s in range(10):
        pat = sim_lgcp(study_lgcp(), SMALL, rng_from_seed(600 + s))
        cfg = SRConfig(iters=5000, probe_count=1024, schedule=ImprovementOnly())
        target = reconstruction_target(pat, cfg)
        rep, dev, acc = stochastic_reconstruction(
            pat, cfg, rng_for(601 + s), target=target, return_trace=True
        )
        if dev[-1] <= 0.05 * dev[0]:
            ok += 1
    assert ok >= 9


def test_sr_trace_csv(tmp_path):
    pat = sim_poisson(80.0, SMALL, rng_from_seed(17))
    cfg = SRConfig(iters=50, probe_count=1024)
    path = tmp_path / "trace.csv"
    stochastic_reconstruction(pat, cfg, rng_for(18), trace_path=str(path))
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "iteration,deviation,accepted"
    assert len(lines) == 51


def test_parametric_replicate():
    rng = rng_from_seed(19)
    rep = parametric_replicate(Poisson(120.0), SMALL, rng)
    assert rep.window is SMALL
    from anisotest.processes import with_anisotropy

    with pytest.raises(ValueError, match="isotropic"):
        parametric_replicate(with_anisotropy(study_lgcp(), 0.6, 0.5), SMALL, rng)
    a = parametric_replicate(Poisson(120.0), SMALL, rng_from_seed(20))
    b = parametric_replicate(Poisson(120.0), SMALL, rng_from_seed(20))
    assert np.array_equal(a.points, b.points)
