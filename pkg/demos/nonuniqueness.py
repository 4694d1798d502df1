"""A nonzero solution of the pricing equation with identically zero data.

Under alpha = sigma x^2 the terminal-value problem does not pin down the
solution by itself: there is a smooth family that vanishes at t = T and at
x = 0 yet is strictly positive before expiry. Uniqueness only returns inside
the strictly sublinear growth class, which is why the far-boundary policy of
the solver is a modelling decision, not a numerical detail.
"""

import numpy as np

from bubblepde import (
    Grid1D,
    Identity,
    MarketSpec,
    Power,
    SolveConfig,
    nonuniqueness_family,
    pde_residual,
    solve_capped,
    solve_minimal,
)

market = MarketSpec(vol=Power(sigma=1.0, p=2.0), rate=0.0, horizon=1.0)

v = nonuniqueness_family(1.0, 1.0, 1.0, Grid1D(x_max=20.0, nx=201, nt=101))
print("competing solution with zero terminal and zero boundary data:")
print(f"  v(1, 0)           = {v.value_at(1.0, 0):.7f}")
print(f"  max |v(., T)|     = {np.max(np.abs(v.values[:, -1])):.1e}")
print(f"  max |v(0, .)|     = {np.max(np.abs(v.values[0, :])):.1e}")

coarse = nonuniqueness_family(1.0, 1.0, 1.0, Grid1D(x_max=20.0, nx=101, nt=51))
rc = pde_residual(coarse, market.vol).sup_norm
rf = pde_residual(v, market.vol).sup_norm
print(f"  residual sup norm {rc:.3e} -> {rf:.3e} under 2x refinement "
      f"(factor {rc / rf:.2f})")

# same payoff, same grid, two boundary policies, two different limits
grid = Grid1D(x_max=64.0, nx=800, nt=400, stretching="sinh", sinh_intensity=2.0)
pinned = solve_capped(market, Identity(), 128.0, grid,
                      SolveConfig(far_boundary="dirichlet-capped-payoff"))
minimal, _ = solve_minimal(market, Identity())

print("\nlinear payoff, value at (1, 0):")
print(f"  far boundary pinned to the payoff : {pinned.value_at(1.0, 0):.6f}  (-> v = x)")
print(f"  zero-slope far boundary           : {minimal.value_at(1.0, 0):.6f}  (minimal solution)")
print(f"  split                             : "
      f"{pinned.value_at(1.0, 0) - minimal.value_at(1.0, 0):.6f}")
