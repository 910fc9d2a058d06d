"""Residue calculus with truncated Laurent series ("jets").

Every exact formula in this package is a contour integral; this demo shows
the two evaluation engines on simple integrands: jet-based residue
extraction (exact through the truncation order) and spectrally accurate
trapezoid quadrature on circles, each serving as the other's check.
"""

import math

import numpy as np

from hsep.numerics import (
    CircleContour,
    Jet,
    circle_quadrature,
    residue_at,
    validate_nested_contours,
)

# A jet is a truncated expansion about a point.  Build z as a variable about
# 0.5 and evaluate a composite function on it; division by the vanishing
# factor (z - 0.5) simply shifts the window into Laurent territory.
z = Jet.variable(0.5, 8)
f = (z * 2.0).exp() / (z - 0.5)
print("f = e^{2z}/(z - 1/2) about 1/2:")
print("  valuation:", f.val, " residue coefficient:", f.coeff(-1))
print("  expected residue e^{2*0.5} =", math.e)

# residue_at automates this: supply the integrand and a pole-order bound.
res = residue_at(lambda w: (w * 2.0).exp() / (w - 0.5), 0.5, 1)
print("residue_at agrees:", abs(res - math.e))

# The same number from quadrature on a circle around the pole.
val, nodes = circle_quadrature(
    lambda w: np.exp(2.0 * w) / (w - 0.5), CircleContour(0.5, 0.25, 8)
)
print(f"quadrature on |w-1/2|=1/4 with {nodes} nodes:", abs(val - math.e))

# Poisson probabilities are residues of e^{t(w-1)} / w^{x+1} at the origin:
t, x = 1.3, 4
res = residue_at(lambda w: ((w - 1.0) * t).exp() / w ** (x + 1), 0.0, x + 1)
print(
    "Poisson mass P(X=4), residue vs closed form:",
    abs(res - math.exp(-t) * t**x / math.factorial(x)),
)

# Quadrature handles essential singularities, where finite-order residue
# calculus does not apply: the constant Laurent coefficient of e^{w/(1-w)}.
val, nodes = circle_quadrature(
    lambda w: np.exp(w / (1.0 - w)) / w, CircleContour(0.0, 0.5, 16)
)
print(f"essential singularity, c_0 of e^(w/(1-w)) = {val.real:.12f} (exact 1)")

# The finite-q transition probability integrates over nested circles around
# w = 1.  The validator checks every constraint of the nesting definition.
family = validate_nested_contours(q=0.3, alpha=0.6, radii=(0.05, 0.08, 0.128))
print("validated nested family, radii:", family.radii)
try:
    validate_nested_contours(q=0.3, alpha=0.6, radii=(0.05, 0.08, 3.0))
except Exception as exc:
    print("an invalid family is rejected with named constraints:")
    print("  ", str(exc).splitlines()[0][:72])
