"""The slicing inequalities on a few bodies, with the full pipeline report."""

import json

from slicekit import Ball, Cube, Gaussian, LpBall, Uniform, intersection_body_of, verify_eq2, verify_eq3, verify_thm1

print("ball volume form, ratio", verify_eq2(Ball(3)).ratio)
print("IB(l_4) volume form, ratio", verify_eq2(intersection_body_of(LpBall(3, 4.0))).ratio)
print("ball with gaussian, ratio", verify_eq3(Ball(3), Gaussian()).ratio)

rep = verify_thm1(Cube(3), Uniform())
print("cube sqrt(n) estimate, ratio", rep.ratio)
keys = ("middleBound", "lhsBelowMiddle", "middleBelowRhs", "compositeResidual")
print(json.dumps({k: rep.details[k] for k in keys}, indent=2))
