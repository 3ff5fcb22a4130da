"""Directional summary statistics on isotropic and anisotropic patterns.

Compares the directional nearest-neighbour distribution, the cylindrical
K-function, and the direction spectrum along versus across the preferred
direction.
"""

import numpy as np

from anisotest import (
    AngleGrid,
    FrequencyGrid,
    RangeGrid,
    Window,
    cylindrical_k,
    direction_spectrum,
    directional_g,
    rng_from_seed,
    sim_lgcp,
    with_anisotropy,
)
from anisotest.study import study_lgcp

window = Window.square(1.0)
theta = np.pi / 6
grid = RangeGrid(r_max=0.25, kappa=36)

for a in (1.0, 0.6, 0.4):
    pat = sim_lgcp(with_anisotropy(study_lgcp(), a, theta), window, rng_from_seed(7))
    g_par = directional_g(pat, theta, np.pi / 8, grid)
    g_perp = directional_g(pat, theta + np.pi / 2, np.pi / 8, grid)
    k_par = cylindrical_k(pat, theta, 0.15, grid)
    k_perp = cylindrical_k(pat, theta + np.pi / 2, 0.15, grid)
    spec = direction_spectrum(pat, FrequencyGrid(15), np.radians(7.5), AngleGrid(36))
    i_theta = np.argmin(np.abs(spec.nodes - theta))
    i_perp = np.argmin(np.abs(spec.nodes - (theta + np.pi / 2)))
    print(f"\na = {a} ({pat.n} points)")
    print(f"  G along/across at r=0.1 : {g_par.values[13]:.3f} / {g_perp.values[13]:.3f}")
    print(f"  K along/across at r=0.25: {k_par.values[-1]:.4f} / {k_perp.values[-1]:.4f}")
    print(
        "  spectrum at theta / theta+pi/2: "
        f"{spec.values[i_theta]:.0f} / {spec.values[i_perp]:.0f}"
    )

print(
    "\nStretching along theta pushes G and K up in that direction on average"
    "\n(single realisations stay noisy), while the direction spectrum works in"
    "\nfrequency space and so loads the orthogonal angle instead. At a = 1 the"
    "\ntwo columns agree up to noise."
)
