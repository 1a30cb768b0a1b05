"""Hyperplane sections of a cube and their maximum over directions."""

import math

import numpy as np

from slicekit import BodyMeasure, Cube, Gaussian, Uniform, max_section, section_volume

cube = Cube(3, 0.5)
for xi in ([1, 0, 0], [1, 1, 0], [1, 1, 1]):
    print(xi, section_volume(cube, np.array(xi, float) / np.linalg.norm(xi), level=64))

# the diagonal-in-a-face section sqrt(2) is the largest one for the unit cube;
# section polygons have kinks, so a fine section grid pays off
best = max_section(BodyMeasure(cube, Uniform()), level=256)
print("max section", best.value, "expected", math.sqrt(2), "at", np.round(best.direction, 4))

# a Gaussian weight damps the far corners but the face diagonal still wins
best = max_section(BodyMeasure(cube, Gaussian()), level=256)
print("max gaussian section", best.value, "at", np.round(best.direction, 4))
