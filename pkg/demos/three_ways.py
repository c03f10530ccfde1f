"""One finite-time probability computed three independent ways.

Ring of 8 sites, 4 particles, step initial condition; event
{x_2(0.8) < 0 and x_3(1.6) >= 1}.
"""
from ptasep import (FiniteQuery, InitialCondition, RingGeometry, SimConfig, exact_cdf_small,
                    mc_joint_cdf, mixed_event_prob_finite)

g = RingGeometry(8, 4)
q = FiniteQuery((2, 3), (0, 1), (0.8, 1.6))
signs = "+-"

formula = mixed_event_prob_finite(g, q, signs).value
exact = exact_cdf_small(g, InitialCondition.step(4), q, signs)
mc = mc_joint_cdf(SimConfig(g, InitialCondition.step(4), 1.6, seed=1, samples=200_000), q, signs)

print(f"contour formula  {formula:.12f}")
print(f"uniformization   {exact:.12f}   diff {abs(formula - exact):.1e}")
print(f"Monte Carlo      {mc.estimate:.6f} +- {mc.stderr:.6f}   "
      f"z = {(mc.estimate - formula) / mc.stderr:+.2f}")
