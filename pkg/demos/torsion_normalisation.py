"""How the absolute scale of the Kodaira Laplacian is pinned down.

Three observations, all of which must agree:

1. the short-time heat trace t Tr exp(-t box) tends to 1/2pi;
2. zeta'(0) from a Mellin split of the heat trace matches the closed forms
   (Hurwitz zeta on the sphere, the Kronecker limit formula on the torus);
3. a magnetic lattice Laplacian with p flux quanta has p-fold degenerate
   levels spaced by 2 pi p, the spacing assumed for L^p.
"""

import math

from zwverify.geometry import SurfaceScenario
from zwverify.torsion import (
    flat_torus_model,
    heat_area_constant,
    landau_lattice_levels,
    sphere_model,
    torsion_trivial_E,
)


def main():
    for label, model in (("sphere", sphere_model()), ("torus", flat_torus_model(0.3 + 1.2j))):
        vals = [heat_area_constant(model, t) for t in (1e-2, 1e-3, 1e-4)]
        print(f"{label:6s} t Tr e^(-t box): " + "  ".join(f"{v:.6f}" for v in vals) + f"  -> 1/2pi = {1 / (2 * math.pi):.6f}")

    for s in (SurfaceScenario(0), SurfaceScenario(1, 1j), SurfaceScenario(1, 0.3 + 1.2j)):
        tv = torsion_trivial_E(s)
        print(f"{tv.surface:6s} tau={tv.tau}: torsion routes {tv.routes}")

    for p in (2, 3):
        lv, _ = landau_lattice_levels(p, n_grid=30, n_levels=2)
        print(f"p={p}: lattice levels / (2 pi p) = {[round(float(x) / (2 * math.pi * p), 4) for x in lv]}")


if __name__ == "__main__":
    main()
