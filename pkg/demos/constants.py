"""The dimension constants: c_n, ball volumes and sphere areas in log space."""

import math

from slicekit.scalars import dimension_constants, slicing_constant

for n in (2, 3, 5, 10, 100, 10**4):
    d = dimension_constants(n)
    print(f"n={n:>6}  c_n={d.slicing_const:.12f}  ln|B_n|={d.ln_ball_vol:.6f}")

# c_n decreases towards e^{-1/2}
print("limit e^{-1/2} =", math.exp(-0.5), " c_1e6 =", slicing_constant(10**6))
