"""
The amoeba and coamoeba of a line
=================================

The line V = {1 + x + y = 0} is the smallest example: its conj-degree is 1
and its conj'-degree is 2, so a generic amoeba fiber has two points and a
generic coamoeba fiber has one.  Its amoeba has area pi^2/2, half of the
multiplicity volume pi^2.
"""

import math
from pathlib import Path

import numpy as np

from halfamoeba import (
    alpha_beta,
    amoeba_fiber,
    amoeba_volume_box,
    coamoeba_fiber,
    make_system,
    multivol_coamoeba,
    render_raster,
)

line = make_system(["1 + x + y"])
print("degrees:", alpha_beta(line).to_json())

# Above the origin of the amoeba sit the two cube roots of unity pairs.
rep = amoeba_fiber(line, [0.0, 0.0])
for s in rep.solutions:
    print("  z =", np.round(s.point.to_complex(), 6), "sign", s.sign)
print("count", rep.count, "signed count", rep.signed_count)

# A coamoeba fiber: 1 + e^{i pi/4} t1 + e^{3i pi/4} t2 = 0 with t real.
rep = coamoeba_fiber(line, [math.pi / 4, 3 * math.pi / 4])
print("coamoeba fiber count", rep.count, "at log-moduli", rep.solutions[0].point.q)

# Volumes: the coamoeba side is exact up to sampling, the amoeba is truncated to a box.
mvb = multivol_coamoeba(line, samples=5000, seed=1)
print(f"MultiVol(B_pi) = {mvb.value:.4f}  (pi^2 = {math.pi**2:.4f})")
vola = amoeba_volume_box(line, [(-10, 10), (-10, 10)], grid=300, seed=1)
print(f"Vol(A) = {vola.value:.4f} +- {vola.std_error:.4f}  (pi^2/2 = {math.pi**2 / 2:.4f})")

# A picture of the three tentacles.
img = render_raster(line, "amoeba", ((-4, 4), (-4, 4)), (160, 160))
out = Path(__file__).with_name("line_amoeba.pgm")
out.write_text(img.to_pgm())
print("wrote", out, "with", sum(v > 0 for v in img.values), "amoeba pixels")
