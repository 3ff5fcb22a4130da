import json

import numpy as np
import pytest

from anisotest.geometry import PointPattern, Window
from anisotest.processes import Poisson, rng_from_seed, sim_poisson
from anisotest.replication import ParametricMC, TilingConfig
from anisotest.testing import (
    DssGloc,
    DssKcyl,
    DssTheta,
    compute_functional,
    derive_seed,
    functional_range,
    mc_p_value,
    run_isotropy_test,
    run_isotropy_tests,
    stat_ms,
    stat_ms_std,
)
from anisotest.summaries import RangeGrid

CENTRED = Window.square(1.0)
SMALL = Window.square(0.5)


def test_functional_range_zero_when_angles_equal():
    pat = sim_poisson(200.0, CENTRED, rng_from_seed(0))
    dss = DssKcyl(alpha1=0.3, alpha2=0.3)
    v = compute_functional(pat, dss)
    assert np.all(v == 0.0)
    assert v.size == 36


def test_functional_range_axis_swap_symmetry():
    rng = rng_from_seed(1)
    base = CENTRED.sample_uniform(40, rng)
    sym = np.vstack([base, base[:, ::-1]])  # closed under swapping x and y
    pat = PointPattern(sym, CENTRED)
    # coordinate swap maps the angle-0 cylinder onto the angle-pi/2 one
    v = functional_range(pat, DssKcyl(alpha1=0.0, alpha2=np.pi / 2))
    assert np.abs(v).max() < 1e-12


def test_functional_range_two_point_value():
    pat = PointPattern([(0.0, 0.0), (0.1, 0.0)], CENTRED)
    v = functional_range(
        pat, DssKcyl(zeta=0.15, alpha1=0.0, alpha2=np.pi / 2), grid=RangeGrid(0.1, 2)
    )
    assert v[-1] == pytest.approx(5.0 / 9.0, abs=1e-12)


def test_functional_direction_single_point():
    pat = PointPattern([(0.2, 0.3)], CENTRED)
    v = compute_functional(pat, DssTheta())
    assert v.size == 36
    assert np.allclose(v, 1.0, atol=1e-12)


def test_functional_direction_near_flat_for_poisson():
    cvs = []
    for s in range(200):
        pat = sim_poisson(400.0, CENTRED, rng_from_seed(100 + s))
        v = compute_functional(pat, DssTheta())
        cvs.append(v.std() / v.mean())
    assert np.mean(cvs) < 0.5


def test_stat_ms_values():
    reps = np.array([[1.0, 1.0], [-1.0, -1.0]])
    t0, trep, diag = stat_ms(np.array([1.0, 2.0]), reps)
    assert t0 == pytest.approx(5.0)
    assert np.allclose(diag["m_hat"], [0.0, 0.0])
    t0_eq, _, _ = stat_ms(diag["m_hat"], reps)
    assert t0_eq == 0.0


def test_stat_ms_replicate_permutation():
    rng = np.random.default_rng(2)
    reps = rng.normal(size=(20, 5))
    v0 = rng.normal(size=5)
    t0a, trepa, _ = stat_ms(v0, reps)
    perm = rng.permutation(20)
    t0b, trepb, _ = stat_ms(v0, reps[perm])
    assert t0a == pytest.approx(t0b, rel=1e-12)
    assert sorted(trepa) == pytest.approx(sorted(trepb), rel=1e-12)


def test_stat_ms_std_values():
    reps = np.array([[-1.0, -2.0], [0.0, 0.0], [1.0, 2.0]])
    t0, trep, diag = stat_ms_std(np.array([1.0, 2.0]), reps)
    assert np.allclose(diag["var_hat"], [1.0, 4.0])
    assert t0 == pytest.approx(2.0)


def test_stat_ms_std_drops_constant_coordinates():
    reps = np.array([[1.0, -1.0], [1.0, 0.0], [1.0, 1.0]])
    v0 = np.array([5.0, 0.5])
    t0, trep, diag = stat_ms_std(v0, reps)
    assert list(diag["dropped"]) == [0]
    assert t0 == pytest.approx(0.25 / 1.0)
    with pytest.raises(RuntimeError, match="degenerate"):
        stat_ms_std(v0, np.ones((3, 2)))


def test_stat_ms_std_scale_invariance():
    rng = np.random.default_rng(3)
    reps = rng.normal(size=(30, 6))
    v0 = rng.normal(size=6)
    t0a, trepa, _ = stat_ms_std(v0, reps)
    c = 37.5
    t0b, trepb, _ = stat_ms_std(c * v0, c * reps)
    assert t0a == pytest.approx(t0b, rel=1e-9)
    assert np.allclose(trepa, trepb, rtol=1e-9)


def test_mc_p_value_lattice():
    # observed strictly above all 19 replicates
    assert mc_p_value(100.0, np.arange(19, dtype=float)) == pytest.approx(1.0 / 20.0)
    assert mc_p_value(5.0, np.full(7, 5.0)) == 1.0
    trep = np.concatenate([np.full(4, 9.0), np.zeros(95)])
    p = mc_p_value(8.0, trep)
    assert p == pytest.approx(0.05)
    assert p <= 0.05  # rejection boundary is inclusive
    with pytest.raises(ValueError):
        mc_p_value(1.0, np.empty(0))


def test_mc_p_value_orientation_switch():
    trep = np.array([1.0, 2.0, 3.0])
    assert mc_p_value(2.5, trep) == pytest.approx(2.0 / 4.0)
    assert mc_p_value(2.5, trep, orientation="as-printed") == pytest.approx(3.0 / 4.0)


def test_derive_seed_contracts():
    rng = np.random.default_rng(4)
    masters = rng.integers(0, 2**63, size=10_000)
    for s in masters[:5]:
        assert derive_seed(int(s), 1, 2, 3) == derive_seed(int(s), 1, 2, 3)
    a = np.array([derive_seed(int(s), 0, 0, 0) for s in masters])
    b = np.array([derive_seed(int(s), 0, 0, 1) for s in masters])
    assert (a != b).all()
    assert (a != masters).all()
    with pytest.raises(ValueError):
        derive_seed(1, -1, 0, 0)


def test_run_isotropy_test_end_to_end_and_determinism():
    pat = sim_poisson(150.0, SMALL, rng_from_seed(5))
    repl = TilingConfig(3)
    kwargs = dict(alpha_level=0.05, seed=42)
    r1 = run_isotropy_test(pat, DssGloc(), "ms", repl, 19, **kwargs)
    r2 = run_isotropy_test(pat, DssGloc(), "ms", repl, 19, **kwargs)
    assert r1.t0 == r2.t0
    assert np.array_equal(r1.t_rep, r2.t_rep)
    assert np.array_equal(r1.m_hat, r2.m_hat)
    assert r1.p_value == r2.p_value
    assert r1.reject == (r1.p_value <= 0.05)
    assert r1.p_value in [c / 20.0 for c in range(1, 21)]


def test_run_isotropy_test_angle_swap_invariance():
    pat = sim_poisson(150.0, SMALL, rng_from_seed(6))
    repl = ParametricMC(Poisson(150.0))
    a = run_isotropy_test(pat, DssKcyl(alpha1=0.2, alpha2=1.3), "ms-range-std", repl, 29, seed=7)
    b = run_isotropy_test(pat, DssKcyl(alpha1=1.3, alpha2=0.2), "ms-range-std", repl, 29, seed=7)
    assert a.t0 == pytest.approx(b.t0, rel=1e-9)
    assert np.allclose(a.t_rep, b.t_rep, rtol=1e-9)
    assert a.p_value == b.p_value


def test_run_isotropy_tests_shared_replicates():
    pat = sim_poisson(150.0, SMALL, rng_from_seed(8))
    repl = TilingConfig(3)
    both = run_isotropy_tests(
        pat, [(DssGloc(), "ms"), (DssKcyl(), "ms-range-std")], repl, 19, seed=9
    )
    single = run_isotropy_test(pat, DssGloc(), "ms", repl, 19, seed=9)
    assert both[0].t0 == single.t0
    assert np.array_equal(both[0].t_rep, single.t_rep)
    assert both[1].statistic == "ms-range-std"


def test_run_isotropy_test_guards():
    pat = sim_poisson(150.0, SMALL, rng_from_seed(10))
    with pytest.raises(ValueError):
        run_isotropy_test(pat, DssGloc(), "ms", TilingConfig(3), 0)
    with pytest.raises(ValueError):
        run_isotropy_test(pat, DssGloc(), "nope", TilingConfig(3), 19)
    from anisotest.processes import with_anisotropy
    from anisotest.study import study_lgcp

    with pytest.raises(RuntimeError, match="replicate 0"):
        run_isotropy_test(
            pat, DssGloc(), "ms", ParametricMC(with_anisotropy(study_lgcp(), 0.6, 0.0)), 5
        )


def test_test_result_json_fields():
    pat = sim_poisson(150.0, SMALL, rng_from_seed(11))
    res = run_isotropy_test(pat, DssKcyl(), "ms", TilingConfig(3), 19, seed=3)
    doc = json.loads(res.to_json())
    for key in (
        "dss",
        "statistic",
        "replication",
        "n_replicates",
        "T0",
        "p_value",
        "reject",
        "alpha_level",
        "dropped_coordinates",
        "seed",
    ):
        assert key in doc
    assert doc["dss"] == "kcyl"
    assert doc["replication"] == "tiling"
    assert doc["n_replicates"] == 19
    assert doc["seed"] == 3


def test_loo_recentering_runs():
    rng = np.random.default_rng(12)
    reps = rng.normal(size=(25, 4))
    v0 = rng.normal(size=4)
    t0p, trp, _ = stat_ms(v0, reps, recentering="loo")
    t0s, trs, _ = stat_ms_std(v0, reps, recentering="loo")
    assert np.isfinite(trp).all() and np.isfinite(trs).all()
    # observed statistic is unchanged by the replicate recentering switch
    assert t0p == stat_ms(v0, reps)[0]
    assert t0s == stat_ms_std(v0, reps)[0]


def test_large_coordinate_workflow():
    # the 100 x 100 survey-style settings: oriented clusters, ranges to a
    # quarter window side on a dense grid, contrasting north-south vs
    # east-west cylinders
    from anisotest.processes import PLCP, sim_plcp

    win = Window(0.0, 100.0, 0.0, 100.0)
    spec = PLCP(
        line_intensity=0.16,
        points_per_length=0.25,
        sigma_perp=1.0,
        a=0.5,
        theta=np.pi / 2,
    )
    pat = sim_plcp(spec, win, rng_from_seed(31))
    assert pat.n > 100
    dss = DssKcyl(zeta=0.15, alpha1=np.pi / 2, alpha2=0.0, r_max=25.0, kappa=100)
    res = run_isotropy_test(pat, dss, "ms-range-std", TilingConfig(5), 99, seed=32)
    assert res.p_value <= 0.05 and res.reject

    iso = sim_plcp(
        PLCP(line_intensity=0.16, points_per_length=0.25, sigma_perp=1.0, a=1.0),
        win,
        rng_from_seed(33),
    )
    res_iso = run_isotropy_test(iso, dss, "ms-range-std", TilingConfig(5), 99, seed=34)
    assert res_iso.p_value > 0.05
