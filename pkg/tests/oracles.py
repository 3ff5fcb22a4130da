"""Naive reference implementations of the estimators.

Direct plain-Python transcriptions of each defining sum, kept independent
of the library's vectorised code paths; used for brute-force equivalence
checks on small patterns.
"""

import cmath
import math


def wrapped_dist_mod_pi(a, b):
    d = (a - b) % math.pi
    return min(d, math.pi - d)


def in_cone(dx, dy, alpha, eps):
    ang = math.atan2(dy, dx) % math.pi
    return wrapped_dist_mod_pi(ang, alpha) <= eps


def cone_max_abs_cos(alpha, eps):
    lo, hi = alpha - eps, alpha + eps
    if math.floor(hi / math.pi) >= math.ceil(lo / math.pi):
        return 1.0
    return max(abs(math.cos(lo)), abs(math.cos(hi)))


def cone_max_abs_sin(alpha, eps):
    lo, hi = alpha - eps - math.pi / 2, alpha + eps - math.pi / 2
    if math.floor(hi / math.pi) >= math.ceil(lo / math.pi):
        return 1.0
    return max(abs(math.sin(alpha - eps)), abs(math.sin(alpha + eps)))


def naive_cone_nearest(pts, i, alpha, eps):
    best = math.inf
    xi, yi = pts[i]
    for j, (xj, yj) in enumerate(pts):
        if j == i:
            continue
        dx, dy = xj - xi, yj - yi
        if in_cone(dx, dy, alpha, eps):
            best = min(best, math.hypot(dx, dy))
    return best


def naive_directional_g(pts, win, alpha, eps, ranges):
    """Hanisch-type ratio estimator, transcribed term by term."""
    xmin, xmax, ymin, ymax = win
    l1, l2 = xmax - xmin, ymax - ymin
    cx = cone_max_abs_cos(alpha, eps)
    cy = cone_max_abs_sin(alpha, eps)
    n = len(pts)
    weights = []
    dists = []
    for i in range(n):
        d = naive_cone_nearest(pts, i, alpha, eps)
        dists.append(d)
        if not math.isfinite(d):
            weights.append(0.0)
            continue
        ex, ey = d * cx, d * cy
        area = max(l1 - 2 * ex, 0.0) * max(l2 - 2 * ey, 0.0)
        x, y = pts[i]
        inside = (
            area > 0
            and xmin + ex <= x <= xmax - ex
            and ymin + ey <= y <= ymax - ey
        )
        weights.append(1.0 / area if inside else 0.0)
    total = sum(weights)
    if total == 0.0:
        raise RuntimeError("no usable points")
    return [
        sum(w for w, d in zip(weights, dists) if d < r) / total for r in ranges
    ]


def naive_cylindrical_k(pts, win, alpha, zeta, ranges):
    xmin, xmax, ymin, ymax = win
    l1, l2 = xmax - xmin, ymax - ymin
    area = l1 * l2
    n = len(pts)
    u = (math.cos(alpha), math.sin(alpha))
    out = []
    for r in ranges:
        total = 0.0
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                dx = pts[i][0] - pts[j][0]
                dy = pts[i][1] - pts[j][1]
                t = dx * u[0] + dy * u[1]
                s = -dx * u[1] + dy * u[0]
                if abs(t) <= r and abs(s) <= zeta * r:
                    overlap = max(l1 - abs(dx), 0.0) * max(l2 - abs(dy), 0.0)
                    total += 1.0 / overlap
        out.append(area**2 / n**2 * total)
    return out


def naive_ripley_k(pts, win, ranges):
    xmin, xmax, ymin, ymax = win
    l1, l2 = xmax - xmin, ymax - ymin
    area = l1 * l2
    n = len(pts)
    out = []
    for r in ranges:
        total = 0.0
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                dx = pts[i][0] - pts[j][0]
                dy = pts[i][1] - pts[j][1]
                if math.hypot(dx, dy) <= r:
                    overlap = max(l1 - abs(dx), 0.0) * max(l2 - abs(dy), 0.0)
                    total += 1.0 / overlap
        out.append(area**2 / n**2 * total)
    return out


def naive_dft(pts, win, omega):
    xmin, xmax, ymin, ymax = win
    area = (xmax - xmin) * (ymax - ymin)
    return sum(
        cmath.exp(-1j * (omega[0] * x + omega[1] * y)) for x, y in pts
    ) / math.sqrt(area)


def frequency_indices(p_max):
    return [
        (p1, p2)
        for p1 in range(-p_max, p_max + 1)
        for p2 in range(-p_max, p_max + 1)
        if (p1, p2) != (0, 0)
    ]


def naive_periodogram(pts, win, p_max):
    xmin, xmax, ymin, ymax = win
    l1, l2 = xmax - xmin, ymax - ymin
    out = {}
    for p1, p2 in frequency_indices(p_max):
        omega = (2 * math.pi * p1 / l1, 2 * math.pi * p2 / l2)
        d = naive_dft(pts, win, omega)
        out[(p1, p2)] = (d * d.conjugate()).real
    return out


def naive_direction_spectrum(pts, win, p_max, h, angles):
    per = naive_periodogram(pts, win, p_max)
    out = []
    for a in angles:
        acc = []
        for (p1, p2), val in per.items():
            ang = math.atan2(p2, p1) % math.pi
            if wrapped_dist_mod_pi(ang, a) < h:
                acc.append(val)
        if not acc:
            raise RuntimeError("bandwidth too small")
        out.append(sum(acc) / len(acc))
    return out


def naive_pair_correlation(pts, win, ranges, bandwidth):
    xmin, xmax, ymin, ymax = win
    l1, l2 = xmax - xmin, ymax - ymin
    area = l1 * l2
    n = len(pts)
    out = []
    for r in ranges:
        total = 0.0
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                dx = pts[i][0] - pts[j][0]
                dy = pts[i][1] - pts[j][1]
                dist = math.hypot(dx, dy)
                t = (r - dist) / bandwidth
                if abs(t) <= 1.0:
                    kern = 0.75 * (1.0 - t * t) / bandwidth
                    overlap = max(l1 - abs(dx), 0.0) * max(l2 - abs(dy), 0.0)
                    total += kern / (2 * math.pi * dist * overlap)
        out.append(area**2 / n**2 * total)
    return out


def naive_spherical_contact(pts, win, ranges, m):
    """Reduced-sample probe estimator with the final monotone pass."""
    xmin, xmax, ymin, ymax = win
    l1, l2 = xmax - xmin, ymax - ymin
    probes = [
        (xmin + (i + 0.5) * l1 / m, ymin + (j + 0.5) * l2 / m)
        for i in range(m)
        for j in range(m)
    ]
    values = []
    for r in ranges:
        num = 0
        den = 0
        for px, py in probes:
            margin = min(px - xmin, xmax - px, py - ymin, ymax - py)
            if margin < r:
                continue
            den += 1
            dist = min(math.hypot(px - x, py - y) for x, y in pts)
            if dist <= r:
                num += 1
        if den == 0:
            break
        values.append(num / den)
    running = []
    best = -math.inf
    for v in values:
        best = max(best, v)
        running.append(best)
    return running
