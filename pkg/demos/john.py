"""John ellipsoids and the sandwich E ⊂ L ⊂ sqrt(n) E."""

import numpy as np

from slicekit import LpBall, random_hpolytope, sandwich
from slicekit.john import inscribed_ellipsoid
from slicekit.sphere import sphere_grid

poly = random_hpolytope(3, seed=2)
e, info = inscribed_ellipsoid(poly)
print("solver", info["method"], "iterations", info["iterations"])
print("semi-axes", np.round(1 / np.sqrt(np.linalg.eigvalsh(e.matrix)), 5))

for body in (poly, LpBall(3, 1.5)):
    cert = sandwich(body, sphere_grid(3, 32))
    print(body.tag, cert.diagnostic(), f"ratios [{cert.min_ratio:.4f}, {cert.max_ratio:.4f}]")
