"""Early exercise against a collapsing underlying.

At zero rate an American claim on a true martingale is never worth more than
the European one. Here the underlying drifts nowhere yet loses mass, so the
right to stop early is worth real money: the linear payoff is exercised
immediately and the premium equals the martingale defect. Capping the
volatility or forcing exercise at a level ladder recovers the value from
below.
"""

import numpy as np

from bubblepde import (
    Call,
    Grid1D,
    Identity,
    MarketSpec,
    PiecewiseLinear,
    Power,
    Put,
    capped_vol_american,
    solve_american,
    solve_minimal,
    stopped_american,
)

bubble = MarketSpec(vol=Power(sigma=1.0, p=2.0), rate=0.0, horizon=1.0)
grid = Grid1D(x_max=64.0, nx=300, nt=150, stretching="sinh", sinh_intensity=2.0)

american = solve_american(bubble, Identity(), grid)
european, _ = solve_minimal(bubble, Identity())
print("linear payoff at x = 1, t = 0:")
print(f"  American {american.value_at(1.0, 0):.6f}   "
      f"European {european.value_at(1.0, 0):.6f}   "
      f"premium {american.value_at(1.0, 0) - european.value_at(1.0, 0):.6f}")
print(f"  exercise everywhere: {bool(american.exercise.all())}")

print("\ncapped-volatility ladder for the call (rises with the cap):")
full_call = solve_american(bubble, Call(strike=1.0), grid)
for cap in (5.0, 10.0, 20.0):
    surf = capped_vol_american(bubble, Call(strike=1.0), cap, 0.1, grid)
    print(f"  cap {cap:>4}: U(1, 0) = {surf.value_at(1.0, 0):.6f}   "
          f"(free problem {full_call.value_at(1.0, 0):.6f})")

print("\nstop-at-level ladder for the put:")
put_grid = Grid1D(x_max=32.0, nx=300, nt=150)
full = solve_american(bubble, Put(strike=1.0), put_grid)
for level in (5.0, 10.0, 20.0):
    surf = stopped_american(bubble, Put(strike=1.0), level, put_grid)
    print(f"  level {level:>4}: {surf.value_at(1.0, 0):.6f}   "
          f"(free problem {full.value_at(1.0, 0):.6f})")

# concave payoff with a positive rate: waiting only pays interest on nothing
ramp = PiecewiseLinear(knots=((0.0, 0.0), (1.0, 1.0)), terminal_slope=0.0)
market = MarketSpec(vol=Power(sigma=1.0, p=2.0), rate=0.05, horizon=1.0)
surf = solve_american(market, ramp, Grid1D(x_max=8.0, nx=200, nt=100))
dev = float(np.max(np.abs(surf.values - np.minimum(surf.nodes, 1.0)[:, None])))
print(f"\nconcave ramp, r = 5%: max |U - g| = {dev:.1e}, "
      f"exercised everywhere: {bool(surf.exercise.all())}")
