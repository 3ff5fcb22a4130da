"""Isotropy test construction: discretised functionals, deviation
statistics, Monte Carlo p-values, and the end-to-end test runner.
"""

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .replication import make_replicator, replication_label
from .summaries import (
    AngleGrid,
    FrequencyGrid,
    RangeGrid,
    cylindrical_k,
    direction_spectrum,
    directional_g,
)

__all__ = [
    "DEFAULT_THETA",
    "DssGloc",
    "DssKcyl",
    "DssTheta",
    "dss_label",
    "compute_functional",
    "functional_range",
    "functional_direction",
    "stat_ms",
    "stat_ms_std",
    "STAT_KINDS",
    "mc_p_value",
    "TestResult",
    "run_isotropy_test",
    "run_isotropy_tests",
    "derive_seed",
    "rng_for",
]

DEFAULT_THETA = np.pi / 6
_VAR_FLOOR = 1e-12

# Study defaults: half-angle pi/8, aspect 0.15, 36 grid nodes, 7.5 degree
# spectral bandwidth, frequency indices up to 15, tested angles at the
# preferred direction and its orthogonal.


@dataclass(frozen=True)
class DssGloc:
    """Directional nearest-neighbour distribution contrasted at two angles."""

    eps: float = np.pi / 8
    alpha1: float = DEFAULT_THETA
    alpha2: float = DEFAULT_THETA + np.pi / 2
    r_max: Optional[float] = None
    kappa: int = 36


@dataclass(frozen=True)
class DssKcyl:
    """Cylindrical K-function contrasted at two angles."""

    zeta: float = 0.15
    alpha1: float = DEFAULT_THETA
    alpha2: float = DEFAULT_THETA + np.pi / 2
    r_max: Optional[float] = None
    kappa: int = 36


@dataclass(frozen=True)
class DssTheta:
    """Direction spectrum evaluated on an angle grid."""

    h: float = math.radians(7.5)
    p_max: int = 15
    kappa: int = 36


DssChoice = Union[DssGloc, DssKcyl, DssTheta]


def dss_label(dss):
    return {DssGloc: "gloc", DssKcyl: "kcyl", DssTheta: "theta"}[type(dss)]


def _range_grid(dss, pat):
    r_max = dss.r_max if dss.r_max is not None else min(pat.window.l1, pat.window.l2) / 4.0
    return RangeGrid(r_max, dss.kappa)


def functional_range(pat, dss, alpha1=None, alpha2=None, grid=None):
    """Discretised difference of a range-indexed statistic at two angles."""
    a1 = dss.alpha1 if alpha1 is None else alpha1
    a2 = dss.alpha2 if alpha2 is None else alpha2
    grid = grid if grid is not None else _range_grid(dss, pat)
    if isinstance(dss, DssGloc):
        s1 = directional_g(pat, a1, dss.eps, grid).values
        s2 = directional_g(pat, a2, dss.eps, grid).values
    elif isinstance(dss, DssKcyl):
        s1 = cylindrical_k(pat, a1, dss.zeta, grid).values
        s2 = cylindrical_k(pat, a2, dss.zeta, grid).values
    else:
        raise TypeError("functional_range needs a range-indexed DSS choice")
    return s1 - s2


def functional_direction(pat, dss):
    """Discretised direction spectrum on the angle grid."""
    fg = FrequencyGrid(dss.p_max)
    ag = AngleGrid(dss.kappa)
    return direction_spectrum(pat, fg, dss.h, ag).values


def compute_functional(pat, dss):
    """Functional vector of the pattern under the given DSS choice."""
    if isinstance(dss, DssTheta):
        return functional_direction(pat, dss)
    return functional_range(pat, dss)


def stat_ms(v0, reps, recentering="plugin"):
    """Mean squared deviation statistic about the replicate mean.

    Returns (T0, per-replicate statistics, diagnostics).  With plug-in
    recentering the mean of all replicates centres everything; with
    leave-one-out each replicate is centred on the mean of the others.
    """
    reps = np.asarray(reps, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    if reps.ndim != 2 or reps.shape[1] != v0.size:
        raise ValueError("replicate vectors must match the observed vector length")
    n = reps.shape[0]
    if n < 2:
        raise ValueError("need at least 2 replicates")
    m_hat = reps.mean(axis=0)
    t0 = float(((v0 - m_hat) ** 2).sum())
    if recentering == "plugin":
        trep = ((reps - m_hat) ** 2).sum(axis=1)
    elif recentering == "loo":
        loo_mean = (reps.sum(axis=0) - reps) / (n - 1)
        trep = ((reps - loo_mean) ** 2).sum(axis=1)
    else:
        raise ValueError("recentering must be 'plugin' or 'loo'")
    diag = {"m_hat": m_hat, "var_hat": None, "dropped": np.empty(0, dtype=int)}
    return t0, trep, diag


def stat_ms_std(v0, reps, recentering="plugin"):
    """Variance-standardised mean squared deviation statistic.

    Coordinates whose replicate sample variance falls below 1e-12 are
    dropped from every quadratic form and reported in the diagnostics.
    """
    reps = np.asarray(reps, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    if reps.ndim != 2 or reps.shape[1] != v0.size:
        raise ValueError("replicate vectors must match the observed vector length")
    n = reps.shape[0]
    if n < 3:
        raise ValueError("need at least 3 replicates")
    m_hat = reps.mean(axis=0)
    var_hat = reps.var(axis=0, ddof=1)
    keep = var_hat >= _VAR_FLOOR
    if not keep.any():
        raise RuntimeError("degenerate replicate ensemble: all coordinate variances vanish")
    dropped = np.flatnonzero(~keep)
    t0 = float(((v0 - m_hat)[keep] ** 2 / var_hat[keep]).sum())
    if recentering == "plugin":
        trep = ((reps - m_hat)[:, keep] ** 2 / var_hat[keep]).sum(axis=1)
    elif recentering == "loo":
        total = reps.sum(axis=0)
        sq_total = (reps**2).sum(axis=0)
        loo_mean = (total - reps) / (n - 1)
        # unbiased variance of the other n-1 replicates
        loo_var = (sq_total - reps**2 - (n - 1) * loo_mean**2) / (n - 2)
        loo_var = np.maximum(loo_var, _VAR_FLOOR)
        trep = ((reps - loo_mean)[:, keep] ** 2 / loo_var[:, keep]).sum(axis=1)
    else:
        raise ValueError("recentering must be 'plugin' or 'loo'")
    diag = {"m_hat": m_hat, "var_hat": var_hat, "dropped": dropped}
    return t0, trep, diag


STAT_KINDS = {
    "ms": stat_ms,
    "ms-range-std": stat_ms_std,
    "ms-dir-std": stat_ms_std,
}


def mc_p_value(t0, trep, orientation="standard"):
    """Monte Carlo p-value on the lattice {c / (1 + N)}.

    The standard orientation counts replicates at least as extreme as the
    observed statistic (larger means more extreme; ties count).  The
    as-printed orientation counts replicates the observed value reaches
    or exceeds instead.
    """
    trep = np.asarray(trep, dtype=float)
    n = trep.size
    if n < 1:
        raise ValueError("need at least one replicate")
    if orientation == "standard":
        c = int(np.count_nonzero(trep >= t0))
    elif orientation == "as-printed":
        c = int(np.count_nonzero(t0 >= trep))
    else:
        raise ValueError("orientation must be 'standard' or 'as-printed'")
    return (1 + c) / (1 + n)


# ---------------------------------------------------------------------------
# Seed derivation (frozen; results must be reproducible across versions)
# ---------------------------------------------------------------------------

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(z):
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_seed(master_seed, scenario_id, pattern_idx, replicate_idx):
    """Collision-resistant 64-bit seed for one work unit.

    Chains a splitmix-style avalanche over the three indices; the mixing
    is bijective per stage, so unequal indices at the same position can
    never collide.
    """
    for w in (scenario_id, pattern_idx, replicate_idx):
        if w < 0:
            raise ValueError("indices must be non-negative")
    s = _mix64(master_seed & _MASK)
    for w in (scenario_id, pattern_idx, replicate_idx):
        s = _mix64((s + _GOLDEN + w) & _MASK)
    return s


def rng_for(master_seed, scenario_id=0, pattern_idx=0, replicate_idx=0):
    """Generator on the derived stream for a work unit."""
    return np.random.Generator(
        np.random.PCG64(derive_seed(master_seed, scenario_id, pattern_idx, replicate_idx))
    )


# ---------------------------------------------------------------------------
# Test runner
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TestResult:
    t0: float
    t_rep: np.ndarray
    p_value: float
    reject: bool
    alpha_level: float
    m_hat: np.ndarray
    var_hat: Optional[np.ndarray]
    dropped: np.ndarray
    dss: str
    statistic: str
    replication: str
    n_replicates: int
    seed: int
    extra: dict = field(default_factory=dict, compare=False)

    def to_json_dict(self):
        doc = {
            "dss": self.dss,
            "statistic": self.statistic,
            "replication": self.replication,
            "n_replicates": self.n_replicates,
            "T0": self.t0,
            "p_value": self.p_value,
            "reject": bool(self.reject),
            "alpha_level": self.alpha_level,
            "dropped_coordinates": [int(i) for i in self.dropped],
            "seed": int(self.seed),
        }
        doc.update(self.extra)
        return doc

    def to_json(self, **kwargs):
        return json.dumps(self.to_json_dict(), **kwargs)


def run_isotropy_tests(
    pat,
    specs,
    repl,
    n_replicates,
    alpha_level=0.05,
    seed=0,
    orientation="standard",
    recentering="plugin",
):
    """Run isotropy tests for several (DSS, statistic) pairs that share
    one set of replicate patterns.

    Replicate i is generated on the derived stream (seed, 0, 0, i); any
    failure (generation or estimation) aborts with the replicate index in
    the error.  Returns one TestResult per spec pair.
    """
    if n_replicates < 1:
        raise ValueError("need at least one replicate")
    if not 0 < alpha_level < 1:
        raise ValueError("alpha_level must lie in (0, 1)")
    if not specs:
        raise ValueError("no test specs given")
    v0 = [compute_functional(pat, dss) for dss, _ in specs]
    replicator = make_replicator(repl, pat)
    vals = [np.empty((n_replicates, v.size)) for v in v0]
    for i in range(n_replicates):
        rng = rng_for(seed, 0, 0, i)
        try:
            rep_pat = replicator(rng)
        except Exception as e:  # noqa: BLE001 - annotate the failing replicate
            raise RuntimeError(f"replicate {i} generation failed: {e}") from e
        for s, (dss, _) in enumerate(specs):
            try:
                vals[s][i] = compute_functional(rep_pat, dss)
            except Exception as e:  # noqa: BLE001
                raise RuntimeError(f"estimator failed on replicate {i}: {e}") from e
    results = []
    for s, (dss, stat_kind) in enumerate(specs):
        if stat_kind not in STAT_KINDS:
            raise ValueError(f"unknown statistic kind {stat_kind!r}")
        t0, trep, diag = STAT_KINDS[stat_kind](v0[s], vals[s], recentering=recentering)
        p = mc_p_value(t0, trep, orientation=orientation)
        results.append(
            TestResult(
                t0=t0,
                t_rep=trep,
                p_value=p,
                reject=p <= alpha_level,
                alpha_level=alpha_level,
                m_hat=diag["m_hat"],
                var_hat=diag["var_hat"],
                dropped=diag["dropped"],
                dss=dss_label(dss),
                statistic=stat_kind,
                replication=replication_label(repl),
                n_replicates=n_replicates,
                seed=seed,
            )
        )
    return results


def run_isotropy_test(
    pat,
    dss,
    stat_kind,
    repl,
    n_replicates,
    alpha_level=0.05,
    seed=0,
    orientation="standard",
    recentering="plugin",
):
    """Full isotropy test: functional, replicates, statistic, p-value.

    Deterministic given (pattern, configuration, seed).
    """
    return run_isotropy_tests(
        pat,
        [(dss, stat_kind)],
        repl,
        n_replicates,
        alpha_level=alpha_level,
        seed=seed,
        orientation=orientation,
        recentering=recentering,
    )[0]
