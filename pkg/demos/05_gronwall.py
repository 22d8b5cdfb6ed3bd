"""Comparison ODEs: x_i' = c_i x_{i+1}^{p_i} / t^{alpha_i} around a cycle.

If every alpha_i <= 1 and the product of the powers exceeds one, the
solution leaves every bound in finite time.
"""
import math

from wavecrit.gronwall import GronwallSystem, check_hypotheses, integrate, strauss_glassey_comparison

res = integrate(GronwallSystem((1.0,), (1.0,), (2.0,), (1.0,)))
print(f"x' = x^2/t blows up at {res.blowup_time:.8f}, e = {math.e:.8f}")

for p in (3.0, 2.0, 1.5, 1.1):
    sys = GronwallSystem((1.0,), (1.0,), (p,), (1.0,))
    T = integrate(sys, t_max=1e30).blowup_time
    print(f"p={p}: T = {T:.4g}, closed form {math.exp(1 / (p - 1)):.4g}")

# the product of powers is what matters: 2 * 1 > 1 still blows up
pair = GronwallSystem((1.0, 1.0), (1.0, 0.5), (2.0, 1.0), (1.0, 1.0))
print("pair:", check_hypotheses(pair), integrate(pair).verdict)

so = strauss_glassey_comparison(1.5, 2.5)
res = integrate(so.first_order())
print(f"strauss-glassey comparison: {res.verdict} at {res.blowup_time:.4g}, "
      f"direct second-order solve {so.solve_direct():.4g}")

linear = integrate(GronwallSystem((1.0, 1.0), (1.0, 1.0), (1.0, 1.0), (1.0, 1.0)))
print("linear cycle:", linear.verdict, "up to t =", f"{linear.trajectory.t[-1]:.1e}")
