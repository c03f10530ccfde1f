"""One-point limit distribution F(x) at gamma=0, tau=1, printed as a table.

Also shows the approximate mean and spread of the height fluctuation from
finite differences of the CDF.
"""
import numpy as np

from ptasep import ScaledQuery, eval_F

xs = np.linspace(-5, 3, 17)
q = ScaledQuery.single(0.0, 1.0, 0.0)
F = np.array([eval_F(q, x=[x]).value for x in xs])
for x, f in zip(xs, F):
    print(f"x={x:+.1f}  F={f:.8f}  " + "#" * int(round(50 * f)))

dens = np.diff(F)
mid = (xs[1:] + xs[:-1]) / 2
mean = np.sum(mid * dens) / np.sum(dens)
sd = np.sqrt(np.sum((mid - mean) ** 2 * dens) / np.sum(dens))
print(f"mass on grid {F[-1] - F[0]:.4f}, mean ~ {mean:.3f}, sd ~ {sd:.3f}")
