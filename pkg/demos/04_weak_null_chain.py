"""A cascade of quadratic equations where each step feeds the next.

phi_4 should grow like t^3 log t once rescaled by r, and its outgoing
derivative like t^2, so a cubic coupling back into phi_1 can't stay small.
"""
from wavecrit.simulator import weak_null_chain

for amp in (1e-2, 1e-1, 1.0):
    rep = weak_null_chain(amp)
    g, dg = rep.growth_psi4, rep.growth_dv_psi4
    where = "never" if rep.obstruction is None else f"t ~ {rep.obstruction[2]:.2e}"
    print(f"a={amp:<5g} r*phi4 ~ t^{-g.exponent:.3f} log^{g.log_power}   "
          f"d_v(r*phi4) ~ t^{-dg.exponent:.3f}   |d_v(r*phi4)| >= 1 at {where}")
