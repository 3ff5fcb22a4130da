"""Isotropy-preserving replication of an observed point pattern.

Three routes: tiling (block resampling with random tile rotation),
stochastic reconstruction (annealed point moves matching non-directional
summaries), and parametric Monte Carlo simulation from an isotropic null
model.
"""

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .geometry import PointPattern, rotate_points
from .processes import DEFAULT_CHAIN_ITERS, is_isotropic, model_label, simulate
from .summaries import RangeGrid

__all__ = [
    "TilingConfig",
    "ImprovementOnly",
    "Geometric",
    "SRConfig",
    "ParametricMC",
    "ReplicationConfig",
    "tile_target_centres",
    "tile_source_candidates",
    "tile_replicate",
    "ReconstructionTarget",
    "reconstruction_target",
    "sr_total_deviation",
    "stochastic_reconstruction",
    "parametric_replicate",
    "make_replicator",
    "replication_label",
]


@dataclass(frozen=True)
class TilingConfig:
    """Tiling with k x k tiles."""

    k: int

    def __post_init__(self):
        if int(self.k) < 1:
            raise ValueError("k must be at least 1")
        object.__setattr__(self, "k", int(self.k))

    @property
    def n_tiles(self):
        return self.k**2


@dataclass(frozen=True)
class ImprovementOnly:
    """Accept a move only when it strictly reduces the deviation."""


@dataclass(frozen=True)
class Geometric:
    """Low-temperature schedule interpolating geometrically from t_start
    to t_end; None defaults scale with the initial deviation."""

    t_start: Optional[float] = None
    t_end: Optional[float] = None

    def __post_init__(self):
        if self.t_start is not None and self.t_end is not None:
            if not self.t_start >= self.t_end > 0:
                raise ValueError("need t_start >= t_end > 0")


@dataclass(frozen=True)
class SRConfig:
    """Stochastic reconstruction settings.

    Matches the point count and/or the spherical contact distribution of
    the observed pattern; the contact curve is estimated on `probe_count`
    regular probes over a range grid truncated where the observed curve
    first reaches 1.
    """

    iters: int
    match_count: bool = True
    match_contact: bool = True
    schedule: Union[ImprovementOnly, Geometric] = field(default_factory=Geometric)
    contact_kappa: int = 64
    contact_r_max: Optional[float] = None
    probe_count: int = 4096
    refresh_every: int = 500

    def __post_init__(self):
        if int(self.iters) < 1:
            raise ValueError("iters must be at least 1")
        if not (self.match_count or self.match_contact):
            raise ValueError("at least one summary must be matched")
        object.__setattr__(self, "iters", int(self.iters))


@dataclass(frozen=True)
class ParametricMC:
    """Replication by simulation from an isotropic null model."""

    model: object
    chain_iters: int = DEFAULT_CHAIN_ITERS


ReplicationConfig = Union[TilingConfig, SRConfig, ParametricMC]


def replication_label(repl):
    if isinstance(repl, TilingConfig):
        return "tiling"
    if isinstance(repl, SRConfig):
        return "sr"
    if isinstance(repl, ParametricMC):
        return f"mc-{model_label(repl.model)}"
    raise TypeError(f"unknown replication config {type(repl).__name__}")


# ---------------------------------------------------------------------------
# Tiling
# ---------------------------------------------------------------------------


def _square_side(win):
    side = win.side  # raises for non-square windows
    return side


def tile_target_centres(win, k):
    """Centres of the k x k non-overlapping square subregions of the window."""
    side = _square_side(win)
    xs = win.xmin + (np.arange(k) + 0.5) * side / k
    ys = win.ymin + (np.arange(k) + 0.5) * side / k
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    return np.column_stack([gx.ravel(), gy.ravel()])


def tile_source_candidates(win, k):
    """Candidate source centres: a k x k grid such that the sampling disc
    of radius sqrt(2) * side / (2k) never leaves the window."""
    side = _square_side(win)
    if k < 2:
        raise ValueError("tiling needs k >= 2 so source discs fit inside the window")
    rho = math.sqrt(2.0) * side / (2.0 * k)
    xs = np.linspace(win.xmin + rho, win.xmax - rho, k)
    ys = np.linspace(win.ymin + rho, win.ymax - rho, k)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    return np.column_stack([gx.ravel(), gy.ravel()])


def tile_replicate(pat, cfg, rng, rotate=True, sources=None, return_draws=False):
    """Assemble a pattern replicate from randomly sampled, rotated tiles.

    For each of the k^2 target subregions a source centre is drawn
    uniformly (with replacement) from the candidate grid, the points
    within the sampling disc are re-centred, rotated by a uniform angle,
    truncated to the tile square, and placed at the target centre.

    `rotate=False` and an explicit `sources` array exist for debugging;
    with sources equal to the target centres and rotation off, the
    replicate reproduces the original pattern.
    """
    win = pat.window
    side = _square_side(win)
    k = cfg.k
    targets = tile_target_centres(win, k)
    if sources is None:
        candidates = tile_source_candidates(win, k)
    else:
        sources = np.asarray(sources, dtype=float)
        if sources.shape != (k**2, 2):
            raise ValueError("sources must have shape (k^2, 2)")
    rho = math.sqrt(2.0) * side / (2.0 * k)
    half = side / (2.0 * k)
    pts = pat.points
    pieces = []
    draws = []
    for j in range(k**2):
        if sources is None:
            t_a = candidates[int(rng.integers(candidates.shape[0]))]
        else:
            t_a = sources[j]
        theta = float(rng.uniform(0.0, 2.0 * np.pi)) if rotate else 0.0
        draws.append((t_a.copy(), theta))
        if pts.shape[0]:
            local = pts - t_a
            grabbed = local[np.hypot(local[:, 0], local[:, 1]) <= rho]
            if rotate and grabbed.shape[0]:
                grabbed = rotate_points(grabbed, theta)
            if grabbed.shape[0]:
                keep = (np.abs(grabbed[:, 0]) <= half) & (np.abs(grabbed[:, 1]) <= half)
                grabbed = grabbed[keep]
            if grabbed.shape[0]:
                pieces.append(grabbed + targets[j])
    if pieces:
        xy = np.unique(np.concatenate(pieces), axis=0)
    else:
        xy = np.empty((0, 2))
    rep = PointPattern(xy, win)
    return (rep, draws) if return_draws else rep


# ---------------------------------------------------------------------------
# Stochastic reconstruction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReconstructionTarget:
    """Precomputed summaries of the observed pattern for reconstruction."""

    n: int
    match_count: bool
    match_contact: bool
    nodes: np.ndarray  # contact grid, excluding 0
    observed: np.ndarray  # observed contact values on nodes
    probes: np.ndarray
    margin: np.ndarray
    denominators: np.ndarray
    last_node: np.ndarray  # per probe, last node index still inside erosion


def _contact_grid(pat, cfg):
    r_max = cfg.contact_r_max
    if r_max is None:
        r_max = min(pat.window.l1, pat.window.l2) / 2.0
    return RangeGrid(r_max, cfg.contact_kappa)


def _probe_distances(probes, points, chunk=1024):
    """Exact nearest-point distance and index for each probe.

    Shared by the target build and the reconstruction chain so both see
    bit-identical values.
    """
    n_probes = probes.shape[0]
    dist = np.empty(n_probes)
    idx = np.empty(n_probes, dtype=np.int64)
    for i0 in range(0, n_probes, chunk):
        block = probes[i0 : i0 + chunk]
        dd = np.hypot(
            block[:, None, 0] - points[None, :, 0], block[:, None, 1] - points[None, :, 1]
        )
        idx[i0 : i0 + block.shape[0]] = dd.argmin(axis=1)
        dist[i0 : i0 + block.shape[0]] = dd[np.arange(block.shape[0]), idx[i0 : i0 + block.shape[0]]]
    return dist, idx


def reconstruction_target(pat, cfg):
    """Build the shared target summaries once per observed pattern.

    The contact grid drops ranges where no probe survives erosion and is
    truncated where the observed curve first reaches 1, which is where
    the deviation integral stops.
    """
    if pat.n < 1:
        raise ValueError("observed pattern must contain at least one point")
    win = pat.window
    m = int(round(math.sqrt(cfg.probe_count)))
    gxs = win.xmin + (np.arange(m) + 0.5) * win.l1 / m
    gys = win.ymin + (np.arange(m) + 0.5) * win.l2 / m
    gx, gy = np.meshgrid(gxs, gys, indexing="ij")
    probes = np.column_stack([gx.ravel(), gy.ravel()])
    margin = win.boundary_margin(probes)
    if cfg.match_contact:
        nodes = _contact_grid(pat, cfg).nodes
        den = np.array([np.count_nonzero(margin >= r) for r in nodes])
        nodes = nodes[den > 0]
        den = den[den > 0]
        last = np.searchsorted(nodes, margin, side="right") - 1
        dist, _ = _probe_distances(probes, pat.points)
        entry = np.searchsorted(nodes, dist, side="left")
        valid = entry <= last
        start = np.bincount(entry[valid], minlength=nodes.size)[: nodes.size]
        end = np.bincount(last[valid], minlength=nodes.size)[: nodes.size]
        num = np.cumsum(start) - np.concatenate([[0], np.cumsum(end)[:-1]])
        observed = np.maximum.accumulate(num / den)
        hit = np.flatnonzero(observed >= 1.0)
        if hit.size:
            stop = hit[0] + 1
            nodes, observed, den = nodes[:stop], observed[:stop], den[:stop]
            last = np.searchsorted(nodes, margin, side="right") - 1
    else:
        nodes = np.empty(0)
        observed = np.empty(0)
        den = np.empty(0, dtype=int)
        last = np.full(probes.shape[0], -1)
    return ReconstructionTarget(
        pat.n, cfg.match_count, cfg.match_contact, nodes, observed, probes, margin, den, last
    )


def _contact_curve_from_counts(num, target):
    return np.maximum.accumulate(num / target.denominators)


def _counts_from_entry(entry_idx, target):
    k = target.nodes.size
    valid = entry_idx <= target.last_node
    start = np.bincount(entry_idx[valid], minlength=k)[:k]
    end = np.bincount(target.last_node[valid], minlength=k)[:k]
    return np.cumsum(start) - np.concatenate([[0], np.cumsum(end)[:-1]])


def _curve_deviation(nodes, a, b):
    """Trapezoid integral of the squared curve difference from 0 to the
    last node; both curves are 0 at range 0."""
    diff2 = (a - b) ** 2
    full_nodes = np.concatenate([[0.0], nodes])
    full_diff = np.concatenate([[0.0], diff2])
    return float(np.trapezoid(full_diff, full_nodes))


def _deviation_from_curve(curve, n_candidate, target):
    dev = 0.0
    if target.match_count:
        dev += float(target.n - n_candidate) ** 2
    if target.match_contact and target.nodes.size:
        dev += _curve_deviation(target.nodes, target.observed, curve)
    return dev


def sr_total_deviation(candidate, target):
    """Total deviation between a candidate pattern and the target summaries."""
    if target.match_contact and target.nodes.size:
        if candidate.n:
            dist, _ = _probe_distances(target.probes, candidate.points)
        else:
            dist = np.full(target.probes.shape[0], np.inf)
        entry = np.searchsorted(target.nodes, dist, side="left")
        curve = _contact_curve_from_counts(_counts_from_entry(entry, target), target)
    else:
        curve = np.empty(0)
    return _deviation_from_curve(curve, candidate.n, target)


def _temperatures(schedule, iters, e0):
    if isinstance(schedule, ImprovementOnly):
        return None
    t1 = schedule.t_start if schedule.t_start is not None else 1e-2 * e0
    tm = schedule.t_end if schedule.t_end is not None else 1e-6 * e0
    if t1 <= 0 or tm <= 0:
        return np.zeros(iters)
    if iters == 1:
        return np.array([t1])
    return t1 * (tm / t1) ** (np.arange(iters) / (iters - 1))


def stochastic_reconstruction(
    pat,
    cfg,
    rng,
    target=None,
    initial=None,
    return_trace=False,
    trace_path=None,
):
    """Reconstruct an isotropic replicate of the observed pattern.

    Starts from a uniform binomial pattern with the observed point count
    (so the count term stays zero) and runs `cfg.iters` single-point move
    proposals, accepting per the configured schedule; ties never accept.
    Probe-to-pattern distances are updated incrementally and refreshed
    every `cfg.refresh_every` iterations.

    Returns the final pattern, optionally with the per-iteration
    (deviation, accepted) trace; `trace_path` writes the trace as CSV.
    """
    if pat.n < 1:
        raise ValueError("observed pattern must contain at least one point")
    if target is None:
        target = reconstruction_target(pat, cfg)
    win = pat.window
    nu = target.n
    z = win.sample_uniform(nu, rng) if initial is None else np.array(initial.points, dtype=float)
    if z.shape[0] != nu:
        raise ValueError("initial state must have the observed point count")

    track_contact = target.match_contact and target.nodes.size > 0
    if track_contact:
        dist, idx = _probe_distances(target.probes, z)
        entry = np.searchsorted(target.nodes, dist, side="left")
        curve = _contact_curve_from_counts(_counts_from_entry(entry, target), target)
    else:
        dist = idx = None
        curve = np.empty(0)
    deviation = _deviation_from_curve(curve, nu, target)
    e0 = deviation
    temps = _temperatures(cfg.schedule, cfg.iters, e0)

    trace_dev = np.empty(cfg.iters)
    trace_acc = np.zeros(cfg.iters, dtype=bool)

    for m in range(cfg.iters):
        k = int(rng.integers(nu))
        u = win.sample_uniform(1, rng)[0]
        if track_contact:
            dist_u = np.hypot(target.probes[:, 0] - u[0], target.probes[:, 1] - u[1])
            owned = idx == k
            d_cand = np.where(dist_u < dist, dist_u, dist)
            idx_cand = np.where(dist_u < dist, k, idx)
            if owned.any():
                sub = target.probes[owned]
                dd = np.hypot(
                    sub[:, None, 0] - z[None, :, 0], sub[:, None, 1] - z[None, :, 1]
                )
                dd[:, k] = np.inf
                near = dd.argmin(axis=1)
                best = dd[np.arange(sub.shape[0]), near]
                du = dist_u[owned]
                take_u = du < best
                d_cand[owned] = np.where(take_u, du, best)
                idx_cand[owned] = np.where(take_u, k, near)
            entry_cand = np.searchsorted(target.nodes, d_cand, side="left")
            curve_cand = _contact_curve_from_counts(
                _counts_from_entry(entry_cand, target), target
            )
        else:
            d_cand = idx_cand = None
            curve_cand = curve
        dev_cand = _deviation_from_curve(curve_cand, nu, target)
        de = dev_cand - deviation
        if de < 0:
            accept = True
        elif de == 0 or temps is None:
            accept = False
        else:
            t = temps[m]
            accept = t > 0 and rng.random() < math.exp(-de / t)
        if accept:
            z[k] = u
            deviation = dev_cand
            if track_contact:
                dist, idx, curve = d_cand, idx_cand, curve_cand
            trace_acc[m] = True
        trace_dev[m] = deviation
        if track_contact and cfg.refresh_every and (m + 1) % cfg.refresh_every == 0:
            dist, idx = _probe_distances(target.probes, z)
            entry = np.searchsorted(target.nodes, dist, side="left")
            curve = _contact_curve_from_counts(_counts_from_entry(entry, target), target)
            deviation = _deviation_from_curve(curve, nu, target)

    result = PointPattern(z, win)
    if trace_path is not None:
        with open(trace_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "deviation", "accepted"])
            for m in range(cfg.iters):
                writer.writerow([m + 1, repr(trace_dev[m]), int(trace_acc[m])])
    if return_trace:
        return result, trace_dev, trace_acc
    return result


# ---------------------------------------------------------------------------
# Parametric Monte Carlo
# ---------------------------------------------------------------------------


def parametric_replicate(model, win, rng, chain_iters=DEFAULT_CHAIN_ITERS):
    """Simulate one replicate from an isotropic null model."""
    if not is_isotropic(model):
        raise ValueError("null model must be isotropic (a = 1)")
    return simulate(model, win, rng, iters=chain_iters)


def make_replicator(repl, pat):
    """Bind a replication config to an observed pattern.

    Returns a function rng -> PointPattern; stochastic reconstruction
    precomputes the target summaries once and shares them read-only.
    """
    if isinstance(repl, TilingConfig):
        return lambda rng: tile_replicate(pat, repl, rng)
    if isinstance(repl, SRConfig):
        target = reconstruction_target(pat, repl)
        return lambda rng: stochastic_reconstruction(pat, repl, rng, target=target)
    if isinstance(repl, ParametricMC):
        return lambda rng: parametric_replicate(
            repl.model, pat.window, rng, chain_iters=repl.chain_iters
        )
    raise TypeError(f"unknown replication config {type(repl).__name__}")
