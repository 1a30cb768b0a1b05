"""The spherical Radon transform and its self-duality."""

import numpy as np

from slicekit.radon import constant, coordinate_square, radon_transform, selfdual_sides, trig_polynomial
from slicekit.scalars import sphere_area
from slicekit.sphere import sphere_grid

n = 4
xis = np.eye(n)
print("R1 =", radon_transform(constant(n), xis, level=16), "area", sphere_area(n - 1))
print("R(theta_1^2) =", radon_transform(coordinate_square(n, 0), xis, level=16))

f, g = trig_polynomial(n, seed=1), trig_polynomial(n, seed=2)
lhs, rhs = selfdual_sides(f, g, sphere_grid(n, 32), level=32)
print(f"int Rf g = {lhs:.12f}\nint f Rg = {rhs:.12f}")
