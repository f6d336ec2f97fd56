# Reference model and its characteristic roots
#
# The running example everywhere in this package: Erlang-7 arrivals with
# rate 3 - 2 sin 2 pi t, Erlang-4 service with rate 5 + 4 sin 2 pi t.  This
# script builds the model, checks stability, and solves the characteristic
# equation whose outside roots drive every series computation.

import numpy as np

from ekemq import (
    ModelSpec,
    RateFunction,
    build_root_set,
    characteristic_roots,
    ergodic_margin,
    root_modulus_bracket,
)

spec = ModelSpec(
    7, 4,
    RateFunction(3.0, sin=((1, -2.0),)),
    RateFunction(5.0, sin=((1, 4.0),)),
)

print("stage counts:        k = %d arrival, m = %d service" % (spec.k, spec.m))
print("mean rates:          arrival %.1f, service %.1f"
      % (spec.arrival_mean, spec.service_mean))
print("ergodic margin:      %.1f  (must be negative)" % ergodic_margin(
    spec.k, spec.m, spec.arrival_mean, spec.service_mean))
print("offered load:        %.4f" % (
    (spec.arrival_mean / spec.k) / (spec.service_mean / spec.m)))
for t in (0.0, 0.25, 0.5, 0.75):
    print("rates at t = %.2f:    arrival %.2f, service %.2f"
          % (t, spec.arrival.value(t), spec.service.value(t)))

# Root counts per frequency.  The characteristic polynomial always splits
# into k roots inside the closed unit disk and m outside, whatever the
# frequency; the n = 0 inside group contains the unit root y = 1.

print()
for n in (0, 1, 5, 20):
    inside, outside = characteristic_roots(spec, n)
    print("n = %3d: %d inside, %d outside" % (n, len(inside), len(outside)))
inside0, _ = characteristic_roots(spec, 0)
print("distance of the n = 0 unit root from 1: %.2e"
      % min(abs(y - 1.0) for y in inside0))

# The outside roots over a frequency window, with their residuals.

rs = build_root_set(spec, 10)
print("\nroot set order 10: %d outside roots" % len(rs))
print("worst polynomial residual: %.2e" % max(r.poly_residual for r in rs.roots))
print("worst exponential residual: %.2e" % max(r.exp_residual for r in rs.roots))

print("\noutside roots at n = 0 and n = 3:")
print("   n branch        re(y)        im(y)       |y|")
for n in (0, 3):
    for r in rs.by_n(n):
        print("%4d %6d %12.6f %12.6f %9.5f"
              % (r.n, r.branch, r.y.real, r.y.imag, abs(r.y)))

# An a-priori bracket pins |y|**m for each frequency without solving
# anything; useful as a seed and as a sanity check.

print("\nbracket on |y|**m per frequency (holds from |n| = 3 on):")
for n in (3, 5, 10):
    lo, hi = root_modulus_bracket(spec, n)
    vals = [abs(r.y) ** spec.m for r in rs.by_n(n)]
    print("n = %3d: bracket [%8.4f, %8.4f], measured %s"
          % (n, lo, hi, ", ".join("%8.4f" % v for v in vals)))
