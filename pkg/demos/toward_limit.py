"""Scaled finite-ring CDFs approaching the limit as the ring grows (density 1/2)."""
from ptasep import (FiniteQuery, RingGeometry, ScaledQuery, eval_F, joint_cdf_step, power_radii,
                    scale_parameters)

tau, gamma = 1.0, 0.0
for x in (-1.0, 0.0, 1.0):
    lim = eval_F(ScaledQuery.single(gamma, tau, x)).value
    row = [f"x={x:+.0f}  limit {lim:.6f}"]
    for L in (20, 50, 100):
        g = RingGeometry(L, L // 2)
        k, a, t = scale_parameters(g, gamma, tau, x)
        val = joint_cdf_step(g, FiniteQuery.single(k, a, t), radii=power_radii(g, [0.8])).value
        row.append(f"L={L}: {val:.6f} ({val - lim:+.1e})")
    print("  ".join(row))
