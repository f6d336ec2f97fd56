# Waiting-time and sojourn-time distributions of a virtual customer
#
# A customer arriving at clock time u waits for a number of service-stage
# completions decided by the state it finds.  Conditionally on the state the
# wait is a Poisson tail in closed form; unconditionally the level series
# telescopes, so the waiting-time CDF costs one coefficient sweep whatever
# the horizon.  The oracle route conditions on the truncated ODE law
# instead, sharing no code with the series.

import numpy as np

from ekemq import (
    ModelSpec,
    RateFunction,
    build_root_set,
    conditional_wait_cdf,
    extract_boundary,
    integrate_periodic,
    oracle_wait_cdf,
    wait_cdf,
)

spec = ModelSpec(
    7, 4,
    RateFunction(3.0, sin=((1, -2.0),)),
    RateFunction(5.0, sin=((1, 4.0),)),
)

dist = integrate_periodic(spec, level_cap=50, grid_size=512, tol=1e-10)
boundary = extract_boundary(dist)
horizons = np.linspace(0.0, 3.0, 61)

# Conditional building block: find the system at level 2 with a fresh
# service and the wait is an 8-stage Erlang clock run at the periodic rate.

cond = conditional_wait_cdf(spec, 2, 0, 0.2, np.array([0.5, 1.0, 2.0]))
print("wait CDF given level 2, fresh service, arrival at u = 0.2:")
print("  t = 0.5: %.5f   t = 1.0: %.5f   t = 2.0: %.5f" % tuple(cond))

# Unconditional CDFs at two arrival epochs.  u = 0.2 sits near the arrival
# peak (long queues), u = 0.7 near the service peak.

for u in (0.2, 0.7):
    reference = oracle_wait_cdf(spec, dist, u, horizons)
    print("\narrival epoch u = %.1f" % u)
    print("  atom at zero wait (empty system): %.5f" % reference.values[0])
    print("  order, sup difference to the oracle:")
    for q in (0, 2, 10):
        series = wait_cdf(spec, build_root_set(spec, q), boundary, u,
                          horizons)
        err = np.abs(series.values - reference.values).max()
        print("    q = %2d: %.3e" % (q, err))

# Queue wait against full sojourn at u = 0.2: the sojourn adds the
# customer's own four service stages, so its CDF starts at zero and trails
# the queue-wait curve everywhere.

queue = oracle_wait_cdf(spec, dist, 0.2, horizons)
sojourn = oracle_wait_cdf(spec, dist, 0.2, horizons, kind="sojourn")
print("\n   t    queue wait   sojourn")
for i in range(0, 61, 10):
    print("%5.2f   %9.5f  %9.5f"
          % (horizons[i], queue.values[i], sojourn.values[i]))
