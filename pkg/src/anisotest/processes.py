"""Point-process simulators: Poisson, log-Gaussian Cox, Gibbs with an
anisotropic Lennard-Jones pair potential, Poisson line cluster, Thomas,
and Strauss.

Anisotropy in the LGCP, Gibbs, and line-cluster models is controlled by a
single parameter a in (0, 1] and a preferred angle theta; a = 1 always
recovers an isotropic law.  Every simulator is deterministic given its
numpy Generator.
"""

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Union

import numpy as np

from .geometry import PointPattern, Window, rotation_matrix

__all__ = [
    "Poisson",
    "LGCP",
    "GibbsLJ",
    "PLCP",
    "Thomas",
    "Strauss",
    "ModelSpec",
    "rng_from_seed",
    "is_isotropic",
    "with_anisotropy",
    "model_label",
    "sim_poisson",
    "sample_von_mises",
    "gaussian_field",
    "sim_lgcp",
    "lj_pair_potential",
    "lj_sigmas",
    "pattern_energy",
    "sim_gibbs_lj",
    "plcp_concentration",
    "sim_plcp",
    "sim_thomas",
    "sim_strauss",
    "simulate",
]

DEFAULT_CHAIN_ITERS = 50_000
_GIBBS_INIT_INTENSITY = 400.0
_HARD_WALL_FRACTION = 0.1


@dataclass(frozen=True)
class Poisson:
    intensity: float

    def __post_init__(self):
        if self.intensity < 0:
            raise ValueError("intensity must be non-negative")


@dataclass(frozen=True)
class LGCP:
    """Log-Gaussian Cox process with exponential covariance.

    The driving field has mean `mu`, variance `sigma2`, and scale `scale`;
    geometric anisotropy rotates by `theta` and stretch-compresses by
    diag(1/a, a).
    """

    mu: float
    sigma2: float
    scale: float
    a: float = 1.0
    theta: float = 0.0

    def __post_init__(self):
        if self.sigma2 < 0:
            raise ValueError("sigma2 must be non-negative")
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if not 0 < self.a <= 1:
            raise ValueError("a must lie in (0, 1]")


@dataclass(frozen=True)
class GibbsLJ:
    """Gibbs process with a cone-dependent Lennard-Jones pair potential."""

    chem: float
    rho: float
    sigma: float
    eps: float = np.pi / 4
    a: float = 1.0
    theta: float = 0.0

    def __post_init__(self):
        if self.rho < 0:
            raise ValueError("rho must be non-negative")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if not 0 < self.a <= 1:
            raise ValueError("a must lie in (0, 1]")


@dataclass(frozen=True)
class PLCP:
    """Poisson line cluster process with von Mises line directions."""

    line_intensity: float
    points_per_length: float
    sigma_perp: float
    a: float = 1.0
    theta: float = 0.0

    def __post_init__(self):
        if self.line_intensity < 0 or self.points_per_length < 0:
            raise ValueError("intensities must be non-negative")
        if self.sigma_perp < 0:
            raise ValueError("sigma_perp must be non-negative")
        if not 0 < self.a <= 1:
            raise ValueError("a must lie in (0, 1]")


@dataclass(frozen=True)
class Thomas:
    parent_intensity: float
    mean_offspring: float
    sigma: float

    def __post_init__(self):
        if self.parent_intensity < 0 or self.mean_offspring < 0:
            raise ValueError("parent_intensity and mean_offspring must be non-negative")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")


@dataclass(frozen=True)
class Strauss:
    beta: float
    gamma: float
    interaction_range: float

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if not 0 <= self.gamma <= 1:
            raise ValueError("gamma must lie in [0, 1]")
        if self.interaction_range <= 0:
            raise ValueError("interaction_range must be positive")


ModelSpec = Union[Poisson, LGCP, GibbsLJ, PLCP, Thomas, Strauss]

_LABELS = {
    Poisson: "poisson",
    LGCP: "lgcp",
    GibbsLJ: "gibbs-lj",
    PLCP: "plcp",
    Thomas: "thomas",
    Strauss: "strauss",
}


def model_label(spec):
    return _LABELS[type(spec)]


def is_isotropic(spec):
    """Whether the model's law is rotation invariant."""
    return getattr(spec, "a", 1.0) == 1.0


def with_anisotropy(spec, a, theta):
    """Copy of the spec at anisotropy a and preferred angle theta.

    Models without an anisotropy mechanism only accept a = 1.
    """
    if hasattr(spec, "a"):
        return replace(spec, a=a, theta=theta)
    if a != 1.0:
        raise ValueError(f"{model_label(spec)} model has no anisotropy parameter")
    return spec


def rng_from_seed(seed):
    """Deterministic generator from a 64-bit seed."""
    return np.random.Generator(np.random.PCG64(int(seed)))


def sim_poisson(intensity, win, rng):
    """Homogeneous Poisson pattern on the window."""
    if intensity < 0:
        raise ValueError("intensity must be non-negative")
    n = rng.poisson(intensity * win.area)
    return PointPattern(win.sample_uniform(n, rng), win)


def sample_von_mises(mu, kappa, rng, size=None):
    """Draw von Mises angles in [0, 2 pi); kappa = 0 is uniform."""
    if kappa < 0:
        raise ValueError("kappa must be non-negative")
    return np.mod(rng.vonmises(mu, kappa, size=size), 2.0 * np.pi)


# ---------------------------------------------------------------------------
# Gaussian random field and the log-Gaussian Cox process
# ---------------------------------------------------------------------------


@lru_cache(maxsize=8)
def _embedding_eigs(m1, m2, dx, dy, sigma2, scale, pad):
    """Eigenvalues of the periodic embedding of the exponential covariance.

    Returns None when the embedding at this padding is not non-negative
    definite (beyond a small clipped tolerance).
    """
    big1, big2 = pad * m1, pad * m2
    i = np.minimum(np.arange(big1), big1 - np.arange(big1)) * dx
    j = np.minimum(np.arange(big2), big2 - np.arange(big2)) * dy
    dist = np.hypot(i[:, None], j[None, :])
    cov = sigma2 * np.exp(-dist / scale)
    eigs = np.fft.fft2(cov).real
    tol = 1e-8 * max(eigs.max(), 1e-300)
    if eigs.min() < -tol:
        return None
    return np.maximum(eigs, 0.0)


def gaussian_field(m1, m2, dx, dy, sigma2, scale, rng):
    """Stationary zero-mean Gaussian field with covariance sigma2 *
    exp(-d / scale) on an m1 x m2 grid with spacings (dx, dy).

    Uses circulant embedding; pads further when the embedded covariance is
    not non-negative definite, then falls back to a dense factorisation
    for small grids.
    """
    if sigma2 == 0.0:
        return np.zeros((m1, m2))
    for pad in (2, 4, 8):
        eigs = _embedding_eigs(m1, m2, float(dx), float(dy), float(sigma2), float(scale), pad)
        if eigs is not None:
            big1, big2 = pad * m1, pad * m2
            noise = rng.normal(size=(big1, big2)) + 1j * rng.normal(size=(big1, big2))
            spec = np.fft.fft2(noise) * np.sqrt(eigs)
            return np.fft.ifft2(spec).real[:m1, :m2]
    if m1 * m2 <= 4096:
        xs = np.arange(m1) * dx
        ys = np.arange(m2) * dy
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        pts = np.column_stack([gx.ravel(), gy.ravel()])
        d = np.hypot(pts[:, None, 0] - pts[None, :, 0], pts[:, None, 1] - pts[None, :, 1])
        cov = sigma2 * np.exp(-d / scale) + 1e-10 * np.eye(pts.shape[0])
        chol = np.linalg.cholesky(cov)
        return (chol @ rng.normal(size=pts.shape[0])).reshape(m1, m2)
    raise RuntimeError(
        f"covariance embedding failed for grid {m1}x{m2}, spacing ({dx:.3g}, {dy:.3g}), "
        f"scale {scale:.3g}: negative eigenvalues persist at padding 8"
    )


def _anisotropy_transform(a, theta):
    return rotation_matrix(theta) @ np.diag([1.0 / a, a])


def sim_lgcp(spec, win, rng):
    """Simulate the log-Gaussian Cox process on the window.

    The isotropic process is generated on the bounding box of the window's
    pre-image under the rotation/stretch map, points are mapped forward,
    and the result is clipped to the window.
    """
    transform = _anisotropy_transform(spec.a, spec.theta)
    if spec.a == 1.0:
        base = win
    else:
        corners = np.array(
            [
                [win.xmin, win.ymin],
                [win.xmin, win.ymax],
                [win.xmax, win.ymin],
                [win.xmax, win.ymax],
            ]
        )
        pre = corners @ np.linalg.inv(transform).T
        base = Window(pre[:, 0].min(), pre[:, 0].max(), pre[:, 1].min(), pre[:, 1].max())
    res_x = min(spec.scale / 2.0, base.l1 / 256.0)
    res_y = min(spec.scale / 2.0, base.l2 / 256.0)
    m1 = int(np.ceil(base.l1 / res_x))
    m2 = int(np.ceil(base.l2 / res_y))
    dx, dy = base.l1 / m1, base.l2 / m2
    field = spec.mu + gaussian_field(m1, m2, dx, dy, spec.sigma2, spec.scale, rng)
    counts = rng.poisson(np.exp(field) * dx * dy)
    total = int(counts.sum())
    if total == 0:
        return PointPattern(np.empty((0, 2)), win)
    ci, cj = np.nonzero(counts)
    reps = counts[ci, cj]
    cell_i = np.repeat(ci, reps)
    cell_j = np.repeat(cj, reps)
    u = rng.random((total, 2))
    pts = np.column_stack(
        [base.xmin + (cell_i + u[:, 0]) * dx, base.ymin + (cell_j + u[:, 1]) * dy]
    )
    if spec.a != 1.0:
        pts = pts @ transform.T
    pts = pts[win.contains(pts)]
    return PointPattern(pts, win)


# ---------------------------------------------------------------------------
# Gibbs processes via a birth-death-move Metropolis-Hastings chain
# ---------------------------------------------------------------------------


def lj_sigmas(spec):
    """In-cone and out-of-cone Lennard-Jones ranges (sigma1, sigma2)."""
    return (
        spec.sigma * math.sqrt(2.0 - spec.a ** (1.0 / 3.0)),
        spec.sigma * spec.a ** (1.0 / 6.0),
    )


def _lj_energy(dx, dy, spec, sigma1, sigma2):
    dist = np.hypot(dx, dy)
    if np.any(dist == 0.0):
        raise ValueError("pair potential undefined at zero separation")
    ang = np.mod(np.arctan2(dy, dx), np.pi)
    d = np.abs(np.mod(ang - spec.theta, np.pi))
    in_cone = np.minimum(d, np.pi - d) <= spec.eps
    sig = np.where(in_cone, sigma1, sigma2)
    phi = np.empty_like(dist)
    wall = dist < _HARD_WALL_FRACTION * sig
    q6 = (sig[~wall] / dist[~wall]) ** 6
    phi[~wall] = 4.0 * spec.rho * (q6 * q6 - q6)
    phi[wall] = np.inf
    return phi


def lj_pair_potential(delta, spec):
    """Anisotropic Lennard-Jones pair potential of difference vector(s).

    Separations below a tenth of the active range are treated as infinite
    energy, which only sharpens the repulsive wall.
    """
    sigma1, sigma2 = lj_sigmas(spec)
    d = np.atleast_2d(np.asarray(delta, dtype=float))
    phi = _lj_energy(d[:, 0], d[:, 1], spec, sigma1, sigma2)
    return phi if np.asarray(delta).ndim > 1 else float(phi[0])


def pattern_energy(points, pair_energy, chem):
    """Total energy: chemical term per point plus all pair interactions."""
    pts = np.asarray(points, dtype=float)
    n = pts.shape[0]
    total = n * chem
    for i in range(1, n):
        total += pair_energy(pts[i, 0] - pts[:i, 0], pts[i, 1] - pts[:i, 1]).sum()
    return total


_INIT_ENERGY_CUTOFF = 1e3


def _thin_extreme_pairs(pts, pair_energy):
    """Drop points until no pair energy exceeds the cutoff.

    The chain could never accept such pairs (acceptance ~ exp(-1000)),
    and removing them up front keeps every accepted-state energy moderate
    so incremental bookkeeping stays accurate.
    """
    pts = list(pts)
    while len(pts) > 1:
        arr = np.asarray(pts)
        bad = None
        for i in range(1, len(pts)):
            e = pair_energy(arr[i, 0] - arr[:i, 0], arr[i, 1] - arr[:i, 1])
            if (e > _INIT_ENERGY_CUTOFF).any():
                bad = i
                break
        if bad is None:
            break
        pts.pop(bad)
    return np.asarray(pts) if pts else np.empty((0, 2))


def _mh_accept(rng, de, log_factor=0.0):
    # accept with probability min(1, exp(-de + log_factor)), overflow safe
    if de == np.inf:
        return False
    s = -de + log_factor
    if s >= 0.0:
        return True
    return rng.random() < math.exp(s)


def _bdm_chain(win, iters, rng, pair_energy, chem, init, return_trace):
    """Birth-death-move chain for a density proportional to exp(-energy).

    Proposal kinds are equiprobable; births propose a uniform location,
    deaths a uniform point, moves redraw one point uniformly on the
    window.  Energy is tracked through local increments.
    """
    if iters < 1:
        raise ValueError("iters must be at least 1")
    pts = _thin_extreme_pairs(init, pair_energy)
    n = pts.shape[0]
    cap = max(4 * n + 16, 64)
    state = np.empty((cap, 2))
    state[:n] = pts
    energy = pattern_energy(state[:n], pair_energy, chem)
    log_area = math.log(win.area)
    trace = np.empty(iters) if return_trace else None

    for m in range(iters):
        kind = rng.integers(3)
        if kind == 0:  # birth
            u = win.sample_uniform(1, rng)[0]
            de = chem + (
                pair_energy(u[0] - state[:n, 0], u[1] - state[:n, 1]).sum() if n else 0.0
            )
            if _mh_accept(rng, de, log_area - math.log(n + 1)):
                if n == cap:
                    cap *= 2
                    grown = np.empty((cap, 2))
                    grown[:n] = state[:n]
                    state = grown
                state[n] = u
                n += 1
                energy += de
        elif kind == 1:  # death
            if n == 0:
                if return_trace:
                    trace[m] = energy
                continue
            k = int(rng.integers(n))
            others = np.concatenate([state[:k], state[k + 1 : n]])
            de = -chem - (
                pair_energy(state[k, 0] - others[:, 0], state[k, 1] - others[:, 1]).sum()
                if n > 1
                else 0.0
            )
            if _mh_accept(rng, de, math.log(n) - log_area):
                state[k] = state[n - 1]
                n -= 1
                energy += de
        else:  # move
            if n == 0:
                if return_trace:
                    trace[m] = energy
                continue
            k = int(rng.integers(n))
            u = win.sample_uniform(1, rng)[0]
            others = np.concatenate([state[:k], state[k + 1 : n]])
            if n > 1:
                old = pair_energy(
                    state[k, 0] - others[:, 0], state[k, 1] - others[:, 1]
                ).sum()
                new = pair_energy(u[0] - others[:, 0], u[1] - others[:, 1]).sum()
                de = new - old
            else:
                de = 0.0
            if _mh_accept(rng, de):
                state[k] = u
                energy += de
        if return_trace:
            trace[m] = energy

    pat = PointPattern(state[:n].copy(), win)
    return (pat, trace) if return_trace else pat


def sim_gibbs_lj(spec, win, iters, rng, return_trace=False):
    """Approximate draw from the anisotropic Lennard-Jones Gibbs process."""
    sigma1, sigma2 = lj_sigmas(spec)

    def pair(dx, dy):
        return _lj_energy(dx, dy, spec, sigma1, sigma2)

    init = win.sample_uniform(rng.poisson(_GIBBS_INIT_INTENSITY * win.area), rng)
    return _bdm_chain(win, iters, rng, pair, spec.chem, init, return_trace)


def sim_strauss(spec, win, iters, rng, return_trace=False):
    """Approximate Strauss draw via the same birth-death-move chain.

    The density beta^n gamma^{s(x)} maps onto chemical energy -log beta
    and pair energy -log gamma inside the interaction range (infinite for
    gamma = 0, a hard core).
    """
    log_gamma = -math.inf if spec.gamma == 0.0 else math.log(spec.gamma)
    rd = spec.interaction_range

    def pair(dx, dy):
        close = np.hypot(dx, dy) <= rd
        return np.where(close, -log_gamma, 0.0)

    init = win.sample_uniform(rng.poisson(spec.beta * win.area), rng)
    return _bdm_chain(win, iters, rng, pair, -math.log(spec.beta), init, return_trace)


# ---------------------------------------------------------------------------
# Cluster processes
# ---------------------------------------------------------------------------


def plcp_concentration(a):
    """Von Mises concentration 5 * (1 - exp(1 - 1/a)) of line directions."""
    if not 0 < a <= 1:
        raise ValueError("a must lie in (0, 1]")
    return 5.0 * (1.0 - math.exp(1.0 - 1.0 / a))


def sim_plcp(spec, win, rng, return_lines=False):
    """Simulate the Poisson line cluster process.

    Latent lines hit a disc containing the window; points are laid along
    each line by a one-dimensional Poisson process (extended past the
    chord so edge clusters are not starved) and displaced perpendicularly
    by a centred Gaussian.

    With `return_lines`, also returns the latent (direction, offset)
    pairs and each retained point's line index.
    """
    centre = win.centre
    radius = win.circumradius + 4.0 * spec.sigma_perp
    n_lines = rng.poisson(2.0 * radius * spec.line_intensity)
    kappa = plcp_concentration(spec.a)
    pts = []
    owners = []
    lines = []
    for j in range(n_lines):
        phi = float(sample_von_mises(spec.theta, kappa, rng))
        offset = rng.uniform(-radius, radius)
        lines.append((phi, offset))
        u = np.array([math.cos(phi), math.sin(phi)])
        nvec = np.array([-u[1], u[0]])
        half_chord = math.sqrt(max(radius**2 - offset**2, 0.0))
        span = half_chord + 4.0 * spec.sigma_perp
        count = rng.poisson(spec.points_per_length * 2.0 * span)
        if count == 0:
            continue
        t = rng.uniform(-span, span, size=count)
        perp = rng.normal(0.0, spec.sigma_perp, size=count)
        base = centre + offset * nvec
        pts.append(base + t[:, None] * u + perp[:, None] * nvec)
        owners.append(np.full(count, j))
    if pts:
        xy = np.concatenate(pts)
        line_idx = np.concatenate(owners)
        keep = win.contains(xy)
        xy = xy[keep]
        line_idx = line_idx[keep]
    else:
        xy = np.empty((0, 2))
        line_idx = np.empty(0, dtype=int)
    pat = PointPattern(xy, win)
    return (pat, lines, line_idx) if return_lines else pat


def sim_thomas(spec, win, rng):
    """Simulate a Thomas cluster process restricted to the window.

    Parents live on the window dilated by four offspring standard
    deviations so boundary clusters contribute.
    """
    r = 4.0 * spec.sigma
    parent_win = Window(win.xmin - r, win.xmax + r, win.ymin - r, win.ymax + r)
    n_parents = rng.poisson(spec.parent_intensity * parent_win.area)
    parents = parent_win.sample_uniform(n_parents, rng)
    counts = rng.poisson(spec.mean_offspring, size=n_parents)
    total = int(counts.sum())
    if total == 0:
        return PointPattern(np.empty((0, 2)), win)
    centres = np.repeat(parents, counts, axis=0)
    xy = centres + rng.normal(0.0, spec.sigma, size=(total, 2))
    xy = xy[win.contains(xy)]
    return PointPattern(xy, win)


def simulate(spec, win, rng, iters=DEFAULT_CHAIN_ITERS):
    """Simulate any model spec on the window."""
    if isinstance(spec, Poisson):
        return sim_poisson(spec.intensity, win, rng)
    if isinstance(spec, LGCP):
        return sim_lgcp(spec, win, rng)
    if isinstance(spec, GibbsLJ):
        return sim_gibbs_lj(spec, win, iters=iters, rng=rng)
    if isinstance(spec, PLCP):
        return sim_plcp(spec, win, rng)
    if isinstance(spec, Thomas):
        return sim_thomas(spec, win, rng)
    if isinstance(spec, Strauss):
        return sim_strauss(spec, win, iters=iters, rng=rng)
    raise TypeError(f"unknown model spec {type(spec).__name__}")
