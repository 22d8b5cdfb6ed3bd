"""Where does each model problem switch from decay to blow-up?

Sweeps the power q in steps of 1/100 through the exact classifier and
compares the flip with the closed-form critical exponents.
"""
from fractions import Fraction as F

from wavecrit import catalog, classify
from wavecrit import decay

STEP = F(1, 100)


def sweep(make, lo, hi, n=3):
    q, rows = F(lo), []
    while q <= F(hi):
        rows.append((q, classify(make(q, n)).verdict))
        q += STEP
    return rows


def show_flip(name, rows, exact):
    prev = None
    print(f"{name}: closed form {exact} ~ {float(exact):.6f}")
    for q, v in rows:
        if v != prev:
            print(f"    q = {float(q):.2f}  ->  {v}")
            prev = v


show_flip("strauss n=3", sweep(decay.strauss, "2.3", "2.5"), catalog.strauss_exponent(3))
show_flip("glassey n=3", sweep(decay.glassey, "1.9", "2.1"), catalog.glassey_exponent(3))
show_flip("d_v problem n=3", sweep(decay.dv_problem, "1.3", "1.45"), catalog.dv_exponent(3))
show_flip("d_v problem n=2", sweep(decay.dv_problem, "1.4", "1.6", n=2), catalog.dv_exponent(2))

# higher dimensions: the Strauss exponent falls towards 1
for n in range(2, 8):
    p = catalog.strauss_exponent(n)
    print(f"n={n}  p_S = {p}  ({float(p):.5f})")

# a coupled system: the exact sigma and s come straight out of the fixed point
pred = classify(decay.strauss_glassey_system(F(9, 5), 3))
print(pred.verdict, "sigma =", pred.sigma, "s =", pred.s, "edges:", pred.graph)
