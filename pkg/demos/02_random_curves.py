"""
Random plane curves
===================

For a curve of degree d with generic coefficients the conj-degree is d^2
and the conj'-degree 2 d^2.  Coamoeba fibers have the parity of d^2, amoeba
fibers are even with zero signed count, and the multiplicity volume of the
coamoeba stays below pi^2 d^2.  Whether it reaches that bound is the
multiHarnack question, which random curves typically fail.
"""

import math

import numpy as np

from halfamoeba import LaurentPolynomial, PolySystem, alpha_beta, multiharnack_check
from halfamoeba.measure import fiber_survey


def random_curve(d, seed):
    rng = np.random.default_rng(seed)
    exps = [(i, j) for i in range(d + 1) for j in range(d + 1) if i + j <= d]
    coeffs = rng.normal(size=len(exps)) + 1j * rng.normal(size=len(exps))
    return PolySystem((LaurentPolynomial(2, tuple(zip(exps, coeffs))),), ("x", "y"))


for d in (1, 2, 3):
    curve = random_curve(d, seed=d)
    deg = alpha_beta(curve)
    co = fiber_survey(curve, "coamoeba", 200, seed=0)
    am = fiber_survey(curve, "amoeba", 200, seed=0, box=[(-1.5, 1.5)] * 2)
    print(f"degree {d}: alpha={deg.alpha} beta={deg.beta}")
    print("  coamoeba counts", np.bincount(co.counts).tolist())
    print("  amoeba counts  ", np.bincount(am.counts).tolist(),
          "signed counts all zero:", bool(np.all(am.signed_counts == 0)))
    rep = multiharnack_check(curve, samples=2000, seed=0)
    print(f"  MultiVol(B_pi) = {rep.estimate.value:.2f} of pi^2 alpha = {rep.target:.2f};"
          f" multiHarnack: {rep.is_multiharnack}")
