# A-priori error control for the truncated series
#
# Three layers: a bracket that pins each root's modulus, a window constant
# dominating each coefficient, and a closed-form tail bound for everything a
# truncation discards.  The bound needs level >= 3 and enough frequencies to
# clear the bracket's half-width; where it applies it should dominate the
# measured truncation error with room to spare.

import numpy as np

from ekemq import (
    ModelSpec,
    RateFunction,
    SeriesEvaluator,
    build_root_set,
    empirical_decay,
    extract_boundary,
    integrate_periodic,
    tail_constant,
    truncation_error_bound,
)

spec = ModelSpec(
    7, 4,
    RateFunction(3.0, sin=((1, -2.0),)),
    RateFunction(5.0, sin=((1, 4.0),)),
)

dist = integrate_periodic(spec, level_cap=50, grid_size=512, tol=1e-10)
boundary = extract_boundary(dist)

# Window constants: applicable only once the frequency clears the mean
# rates (here from |n| = 2), then decaying like 1/n.

print("window constants C_n at t = 0:")
for n in (0, 1, 2, 5, 10, 40):
    try:
        print("n = %3d: %.5f" % (n, tail_constant(spec, 0.0, n)))
    except ValueError as exc:
        print("n = %3d: not applicable (%s)" % (n, exc))

# Tail budgets against measured truncation error.  The measured column uses
# a q = 40 reference series; the bound column is computed with no reference
# at all.

ts = np.arange(16) / 16.0
ref = SeriesEvaluator(build_root_set(spec, 40), boundary)
print("\nlevel  order      bound     measured")
for j in (3, 4, 5):
    ref_vals = ref.level_matrix(j, ts).real
    for q in (3, 5, 10):
        ev = SeriesEvaluator(build_root_set(spec, q), boundary)
        measured = np.abs(ev.level_matrix(j, ts).real - ref_vals).max()
        worst = max(truncation_error_bound(spec, t, j, q).bound for t in ts)
        print("%5d %6d   %.3e   %.3e" % (j, q, worst, measured))

budget = truncation_error_bound(spec, 0.0, 2, 10)
print("\nlevel 2 budget: applicable = %s (%s)"
      % (budget.applicable, budget.reason))

# Measured coefficient sizes by frequency: the a-priori picture says they
# decay like C_n once |n| is past the rate harmonics, and they do.

table = dict(empirical_decay(spec, build_root_set(spec, 40), boundary, 0.25))
print("\nmax |coefficient| by frequency at t = 0.25:")
for n in (0, 1, 2, 5, 10, 20, 30, 40):
    print("n = %3d: %.3e" % (n, table[n]))
