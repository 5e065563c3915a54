"""
A plane in the four-dimensional torus
=====================================

Two generic linear equations in four variables cut out a complex surface
with conj-degree 1 and conj'-degree 6.  Every generic linear space is
multiHarnack, so the coamoeba volume is exactly pi^4, while the amoeba
volume lies between pi^4 (2!)^2/(4!)^2 and pi^4/2.  Fibers are found by
multistart Newton here, which can miss points but never invents them.
"""

import math
from pathlib import Path

import numpy as np

from halfamoeba import (
    alpha_beta,
    amoeba_fiber,
    coamoeba_fiber,
    load_system,
    multivol_coamoeba,
    amoeba_volume_box,
)

pair = load_system(Path(__file__).with_name("linear_pair.sys"))
print("degrees:", alpha_beta(pair).to_json())

rng = np.random.default_rng(0)
p = rng.uniform(0, math.pi, size=4)
rep = coamoeba_fiber(pair, p)
print("coamoeba fiber count", rep.count)

# an amoeba query above a point of V has a nonempty fiber
z = rep.solutions[0].point
rep = amoeba_fiber(pair, z.q)
print("amoeba fiber count", rep.count, "signs", [s.sign for s in rep.solutions])

mvb = multivol_coamoeba(pair, samples=200, seed=0)
print(f"MultiVol(B_pi) = {mvb.value:.2f}  (pi^4 = {math.pi**4:.2f})")
vola = amoeba_volume_box(pair, [(-8, 8)] * 4, samples=40000, seed=0)
print(f"Vol(A in [-8,8]^4) = {vola.value:.1f} +- {vola.std_error:.1f}"
      f"  (bracket {math.pi**4 * 4 / 576:.3f} .. {math.pi**4 / 2:.2f})")
