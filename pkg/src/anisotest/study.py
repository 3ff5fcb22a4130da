"""Simulation-study engine: scenario grids, per-pattern test units,
rejection-rate aggregation, and the paper-scale/desk-scale presets.
"""

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Union

import numpy as np

from .estimation import fit_lgcp, fit_strauss, fit_thomas
from .geometry import Window
from .processes import (
    GibbsLJ,
    LGCP,
    PLCP,
    Poisson,
    Strauss,
    Thomas,
    model_label,
    simulate,
    with_anisotropy,
)
from .replication import ParametricMC, SRConfig, TilingConfig
from .testing import (
    DssGloc,
    DssKcyl,
    DssTheta,
    derive_seed,
    rng_for,
    run_isotropy_test,
)

__all__ = [
    "McOracle",
    "McFitted",
    "McMisspecified",
    "TilingChoice",
    "SRChoice",
    "StudyConfig",
    "Scenario",
    "ScenarioResult",
    "scenario_grid",
    "run_study",
    "results_to_rows",
    "summarize_details",
    "desk_preset",
    "paper_preset",
    "study_lgcp",
    "study_gibbs",
    "study_plcp",
    "resolve_threads",
]

THREADS_ENV = "ANISOTEST_THREADS"
_SMALL_WINDOW_SIDE = 0.75  # boundary between the study's two window regimes


def study_lgcp(theta=np.pi / 6):
    """Clustered LGCP template: 400 points per unit area on average."""
    return LGCP(mu=math.log(400.0) - 1.5, sigma2=3.0, scale=0.02, a=1.0, theta=theta)


def study_gibbs(theta=np.pi / 6):
    """Lennard-Jones Gibbs template with the study's interaction settings."""
    return GibbsLJ(
        chem=-math.log(0.5), rho=10.0, sigma=0.02, eps=np.pi / 4, a=1.0, theta=theta
    )


def study_plcp(theta=np.pi / 6):
    """Line cluster template: 16 lines per unit offset, 25 points per unit
    length, 0.015 perpendicular scatter."""
    return PLCP(
        line_intensity=16.0,
        points_per_length=25.0,
        sigma_perp=0.015,
        a=1.0,
        theta=theta,
    )


@dataclass(frozen=True)
class McOracle:
    """Parametric MC from the known generating model at a = 1."""


@dataclass(frozen=True)
class McFitted:
    """Parametric MC from the correct family with estimated parameters.

    The line cluster process keeps its known parameters (labelled
    plcp-oracle-params); the Gibbs pairing is excluded from the grid.
    """


@dataclass(frozen=True)
class McMisspecified:
    """Parametric MC from a plausible but wrong family.

    LGCP and PLCP patterns get a Thomas fit, Gibbs patterns a Strauss
    fit.
    """


@dataclass(frozen=True)
class TilingChoice:
    k: int


@dataclass(frozen=True)
class SRChoice:
    iters: Optional[int] = None  # None: 5000 on the smaller window, 20000 on the larger
    probe_count: int = 4096
    contact_kappa: int = 64


ReplicationChoice = Union[McOracle, McFitted, McMisspecified, TilingChoice, SRChoice]

_DSS_NAMES = ("gloc", "kcyl", "theta")
_STAT_NAMES = ("ms", "ms-range-std", "ms-dir-std")


@dataclass(frozen=True)
class StudyConfig:
    """Full description of a simulation study.

    The scenario grid is the cross product of models, anisotropy levels,
    windows, DSS names, statistic kinds, and replication choices, minus
    the Gibbs x correct-model parametric pairing.
    """

    models: tuple
    a_levels: tuple = (0.4, 0.6, 0.8, 1.0)
    theta: float = np.pi / 6
    windows: tuple = (Window.square(0.5), Window.square(1.0))
    n_patterns: int = 1000
    dss_list: tuple = ("gloc", "kcyl", "theta")
    stat_kinds: tuple = ("ms", "ms-range-std", "ms-dir-std")
    replications: tuple = field(default_factory=lambda: (McOracle(),))
    n_replicates: int = 1000
    sr_replicates: int = 99
    alpha_level: float = 0.05
    master_seed: int = 0
    threads: int = 1
    gibbs_iters: int = 50_000
    pvalue_orientation: str = "standard"
    recentering: str = "plugin"

    def __post_init__(self):
        if self.n_patterns < 1:
            raise ValueError("n_patterns must be at least 1")
        if not all(0 < a <= 1 for a in self.a_levels):
            raise ValueError("anisotropy levels must lie in (0, 1]")
        for name in self.dss_list:
            if name not in _DSS_NAMES:
                raise ValueError(f"unknown DSS {name!r}")
        for name in self.stat_kinds:
            if name not in _STAT_NAMES:
                raise ValueError(f"unknown statistic {name!r}")
        for repl in self.replications:
            if isinstance(repl, McMisspecified) and not all(
                isinstance(m, (LGCP, GibbsLJ, PLCP)) for m in self.models
            ):
                raise ValueError(
                    "misspecified parametric MC is only defined for lgcp, gibbs-lj, and plcp models"
                )


@dataclass(frozen=True)
class Scenario:
    sid: int
    model: object
    a: float
    window: Window
    dss: str
    stat: str
    replication: ReplicationChoice
    included: bool


def scenario_grid(cfg):
    """Enumerate the full scenario grid with stable scenario ids."""
    out = []
    sid = 0
    for model in cfg.models:
        for a in cfg.a_levels:
            for win in cfg.windows:
                for dss in cfg.dss_list:
                    for stat in cfg.stat_kinds:
                        for repl in cfg.replications:
                            included = not (
                                isinstance(model, GibbsLJ) and isinstance(repl, McFitted)
                            )
                            out.append(Scenario(sid, model, a, win, dss, stat, repl, included))
                            sid += 1
    return out


def _dss_choice(name, theta):
    if name == "gloc":
        return DssGloc(alpha1=theta, alpha2=theta + np.pi / 2)
    if name == "kcyl":
        return DssKcyl(alpha1=theta, alpha2=theta + np.pi / 2)
    if name == "theta":
        return DssTheta()
    raise ValueError(f"unknown DSS {name!r}")


def _sr_iters(choice, window):
    if choice.iters is not None:
        return choice.iters
    return 5000 if min(window.l1, window.l2) <= _SMALL_WINDOW_SIDE else 20_000


def _resolve_replication(choice, template, pattern, window, cfg):
    """Turn a study-level replication choice into a concrete config and
    its output label, fitting the null model where required."""
    if isinstance(choice, McOracle):
        return ParametricMC(template, cfg.gibbs_iters), "mc-oracle", None
    if isinstance(choice, McFitted):
        if isinstance(template, LGCP):
            model = fit_lgcp(pattern).model
        elif isinstance(template, PLCP):
            return ParametricMC(template, cfg.gibbs_iters), "plcp-oracle-params", None
        elif isinstance(template, Thomas):
            model = fit_thomas(pattern).model
        elif isinstance(template, Strauss):
            model = fit_strauss(pattern).model
        elif isinstance(template, Poisson):
            model = Poisson(pattern.intensity)
        else:
            raise ValueError(f"no correct-model fit for {model_label(template)}")
        return ParametricMC(model, cfg.gibbs_iters), "mc-fitted", None
    if isinstance(choice, McMisspecified):
        if isinstance(template, (LGCP, PLCP)):
            model = fit_thomas(pattern).model
        elif isinstance(template, GibbsLJ):
            model = fit_strauss(pattern).model
        else:
            raise ValueError(f"no misspecification mapping for {model_label(template)}")
        return ParametricMC(model, cfg.gibbs_iters), "mc-misspec", None
    if isinstance(choice, TilingChoice):
        return TilingConfig(choice.k), "tiling", choice.k**2
    if isinstance(choice, SRChoice):
        sr = SRConfig(
            iters=_sr_iters(choice, window),
            probe_count=choice.probe_count,
            contact_kappa=choice.contact_kappa,
        )
        return sr, "sr", None
    raise TypeError(f"unknown replication choice {type(choice).__name__}")


def _n_replicates(choice, cfg):
    return cfg.sr_replicates if isinstance(choice, SRChoice) else cfg.n_replicates


def run_unit(cfg, scenarios, sid, pattern_idx):
    """Simulate one pattern and run its configured test.

    Returns a result dict; failures are captured, never raised.
    """
    scen = scenarios[sid]
    base = {"sid": sid, "pattern_idx": pattern_idx}
    try:
        model = with_anisotropy(scen.model, scen.a, cfg.theta)
        rng = rng_for(cfg.master_seed, sid, pattern_idx, 0)
        pattern = simulate(model, scen.window, rng, iters=cfg.gibbs_iters)
        repl, label, n_tiles = _resolve_replication(
            scen.replication, scen.model, pattern, scen.window, cfg
        )
        test_seed = derive_seed(cfg.master_seed, sid, pattern_idx, 1)
        result = run_isotropy_test(
            pattern,
            _dss_choice(scen.dss, cfg.theta),
            scen.stat,
            repl,
            _n_replicates(scen.replication, cfg),
            alpha_level=cfg.alpha_level,
            seed=test_seed,
            orientation=cfg.pvalue_orientation,
            recentering=cfg.recentering,
        )
    except Exception as e:  # noqa: BLE001 - unit failures are data, not crashes
        return {**base, "ok": False, "error": f"{type(e).__name__}: {e}"}
    return {
        **base,
        "ok": True,
        "label": label,
        "n_tiles": n_tiles,
        "p_value": result.p_value,
        "reject": bool(result.reject),
        "detail": result.to_json_dict(),
    }


@lru_cache(maxsize=4)
def _grid_cached(cfg):
    return scenario_grid(cfg)


def _run_unit_star(args):
    cfg, sid, pidx = args
    return run_unit(cfg, _grid_cached(cfg), sid, pidx)


@dataclass(frozen=True)
class ScenarioResult:
    sid: int
    model: str
    a: float
    window_side: float
    dss: str
    stat: str
    replication: str
    n_tiles: Optional[int]
    n_patterns: int
    n_failures: int
    rejection_rate: float
    mean_p: float
    size_exceedance: Optional[float]


def run_study(cfg, details_dir=None):
    """Run every scenario of the study and aggregate rejection rates.

    Deterministic for a given master seed regardless of thread count:
    unit seeds derive from (scenario, pattern) indices and aggregation
    follows a fixed ordering.  With `details_dir`, each successful test
    writes its JSON document there.
    """
    scenarios = scenario_grid(cfg)
    units = [
        (scen.sid, pidx)
        for scen in scenarios
        if scen.included
        for pidx in range(cfg.n_patterns)
    ]
    if cfg.threads > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            raw = list(
                pool.map(
                    _run_unit_star,
                    [(cfg, sid, pidx) for sid, pidx in units],
                    chunksize=max(1, len(units) // (8 * cfg.threads)),
                )
            )
    else:
        raw = [run_unit(cfg, scenarios, sid, pidx) for sid, pidx in units]
    raw.sort(key=lambda r: (r["sid"], r["pattern_idx"]))

    if details_dir is not None:
        os.makedirs(details_dir, exist_ok=True)

    by_sid = {}
    for rec in raw:
        by_sid.setdefault(rec["sid"], []).append(rec)

    results = []
    for scen in scenarios:
        if not scen.included:
            continue
        recs = by_sid.get(scen.sid, [])
        ok = [r for r in recs if r["ok"]]
        n_fail = len(recs) - len(ok)
        rejects = sum(r["reject"] for r in ok)
        rate = rejects / len(ok) if ok else float("nan")
        label = ok[0]["label"] if ok else _static_label(scen)
        n_tiles = ok[0]["n_tiles"] if ok else (
            scen.replication.k**2 if isinstance(scen.replication, TilingChoice) else None
        )
        mean_p = float(np.mean([r["p_value"] for r in ok])) if ok else float("nan")
        exceedance = max(0.0, rate - cfg.alpha_level) if scen.a == 1.0 and ok else None
        results.append(
            ScenarioResult(
                sid=scen.sid,
                model=model_label(scen.model),
                a=scen.a,
                window_side=min(scen.window.l1, scen.window.l2),
                dss=scen.dss,
                stat=scen.stat,
                replication=label,
                n_tiles=n_tiles,
                n_patterns=len(ok),
                n_failures=n_fail,
                rejection_rate=rate,
                mean_p=mean_p,
                size_exceedance=exceedance,
            )
        )
        if details_dir is not None:
            for r in ok:
                doc = dict(r["detail"])
                doc.update(
                    {
                        "scenario_id": scen.sid,
                        "model": model_label(scen.model),
                        "a": scen.a,
                        "window_side": min(scen.window.l1, scen.window.l2),
                        "pattern_idx": r["pattern_idx"],
                    }
                )
                name = f"test_{scen.sid:05d}_{r['pattern_idx']:05d}.json"
                with open(os.path.join(details_dir, name), "w") as fh:
                    json.dump(doc, fh)
                    fh.write("\n")
    return results


def _static_label(scen):
    choice = scen.replication
    if isinstance(choice, McOracle):
        return "mc-oracle"
    if isinstance(choice, McFitted):
        return "plcp-oracle-params" if isinstance(scen.model, PLCP) else "mc-fitted"
    if isinstance(choice, McMisspecified):
        return "mc-misspec"
    if isinstance(choice, TilingChoice):
        return "tiling"
    return "sr"


def results_to_rows(results):
    """Scenario results as dict rows matching the output CSV header."""
    return [
        {
            "scenario_id": r.sid,
            "model": r.model,
            "a": r.a,
            "window_side": r.window_side,
            "dss": r.dss,
            "statistic": r.stat,
            "replication": r.replication,
            "n_tiles": r.n_tiles,
            "n_patterns": r.n_patterns,
            "n_failures": r.n_failures,
            "rejection_rate": r.rejection_rate,
            "size_exceedance": r.size_exceedance,
        }
        for r in results
    ]


def summarize_details(paths, alpha_level=0.05):
    """Aggregate per-test detail JSON documents into rate rows.

    Documents are grouped by the scenario key fields each detail file
    carries.
    """
    groups = {}
    for path in paths:
        with open(path) as fh:
            doc = json.load(fh)
        key = (
            doc.get("scenario_id", 0),
            doc.get("model", ""),
            doc.get("a", float("nan")),
            doc.get("window_side", float("nan")),
            doc["dss"],
            doc["statistic"],
            doc["replication"],
        )
        groups.setdefault(key, []).append(doc)
    rows = []
    for key in sorted(groups, key=lambda k: (k[0], k[4], k[5], k[6])):
        docs = groups[key]
        sid, model, a, side, dss, stat, repl = key
        rate = sum(d["reject"] for d in docs) / len(docs)
        rows.append(
            {
                "scenario_id": sid,
                "model": model,
                "a": a,
                "window_side": side,
                "dss": dss,
                "statistic": stat,
                "replication": repl,
                "n_tiles": None,
                "n_patterns": len(docs),
                "n_failures": 0,
                "rejection_rate": rate,
                "size_exceedance": max(0.0, rate - alpha_level) if a == 1.0 else None,
            }
        )
    return rows


def resolve_threads(requested=None):
    """Thread count from the CLI flag, the environment, or 1."""
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return 1


def desk_preset(master_seed=0, threads=1):
    """Small, fast study: clustered LGCP, tiling, small window."""
    return StudyConfig(
        models=(study_lgcp(),),
        a_levels=(1.0, 0.4),
        windows=(Window.square(0.5),),
        n_patterns=200,
        dss_list=("gloc",),
        stat_kinds=("ms",),
        replications=(TilingChoice(3),),
        n_replicates=199,
        master_seed=master_seed,
        threads=threads,
    )


def paper_preset(master_seed=0, threads=1):
    """The full study grid at publication scale."""
    return StudyConfig(
        models=(study_lgcp(), study_gibbs(), study_plcp()),
        a_levels=(0.4, 0.6, 0.8, 1.0),
        windows=(Window.square(0.5), Window.square(1.0)),
        n_patterns=1000,
        dss_list=("gloc", "kcyl", "theta"),
        stat_kinds=("ms", "ms-range-std", "ms-dir-std"),
        replications=(
            McOracle(),
            McFitted(),
            McMisspecified(),
            TilingChoice(2),
            TilingChoice(3),
            TilingChoice(4),
            TilingChoice(5),
            TilingChoice(6),
            TilingChoice(8),
            SRChoice(),
        ),
        n_replicates=1000,
        sr_replicates=99,
        master_seed=master_seed,
        threads=threads,
    )
