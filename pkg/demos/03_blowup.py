"""Large data on the unstable side: the lattice run breaks down in finite time.

The certificate repeats the run at three resolutions and asks the
blow-up times to agree; it is numerical evidence, not a proof.
"""
import numpy as np

from wavecrit import decay
from wavecrit.decay import DataSpec, WaveSystem
from wavecrit.simulator import Grid, detect_blowup

grid = Grid(h=2.0 ** -5, u_max=2.0 ** 12, v_max=2.0 ** 13, stretch=2.0 ** -5)

for amp in (0.5, 1.0, 2.0):
    sys = decay.strauss(2)
    sys = WaveSystem(sys.n, sys.fields, sys.terms, {"phi": DataSpec(amplitude=amp)})
    cert = detect_blowup(sys, grid)
    if cert is None:
        print(f"amplitude {amp}: no blow-up before t = {grid.v_max:g}")
    else:
        print(f"amplitude {amp}: times {np.round(cert.times, 1).tolist()}  label={cert.label}")
