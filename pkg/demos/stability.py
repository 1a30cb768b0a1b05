"""Stability: a density that exceeds 1 by epsilon on sections pays for itself."""

from slicekit import LpBall, unit_ib_source, verify_stability
from slicekit.measures import density_from_spec

rep = verify_stability(unit_ib_source(3), density_from_spec("1.1"))
print(f"ball, f = 1.1: epsilon = {rep.epsilon:.10f}  slack = {rep.slack:.10f}")

rep = verify_stability(LpBall(3, 4.0), density_from_spec("1+0.2*bump(2)"))
for name, value in rep.slacks.items():
    print(f"{name:>12}: {value:.6g}")
