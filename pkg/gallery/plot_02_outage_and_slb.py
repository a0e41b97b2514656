"""
Outage limit and sphere lower bound
===================================

Benchmarks for a length-100 lattice over two and three fading blocks. The
Poltyrev outage probability falls with slope about n in log-log scale, and
the sphere lower bound sits below every achievable frame error rate.
"""
import math

import numpy as np

from divlat import build_cubic_example, build_quadratic, build_spec, gen_regular
from divlat.analysis import db_to_linear, poltyrev_outage, slb, slope_between
from divlat.channel import make_rng
from divlat.latcore import log_det_scaled

H = gen_regular(100, 3, 6, seed=1)
specs = {2: build_spec(build_quadratic(10), None, H), 3: build_spec(build_cubic_example(), None, H)}
grid_db = np.arange(0.0, 45.0, 2.5)
rho = db_to_linear(grid_db)

##############################################################################
# One set of fading draws is reused for every SNR, so each curve is monotone.

for n, spec in specs.items():
    out = poltyrev_outage(spec, rho, 200_000, 1.0, make_rng(n))
    detM = math.exp(log_det_scaled(spec) / spec.N)
    lb = slb(n, spec.N, detM, rho, 50_000, 1.0, make_rng(10 + n))
    print(f"\nn = {n}")
    print(" rho_dB    P_out      P_SLB")
    for r, p, q in zip(grid_db, out.p, lb.p):
        print(f"{r:6.1f}  {p:9.3e}  {q:9.3e}")

##############################################################################
# Slopes between the points closest to 1e-2 and 1e-4 on a fine grid.

fine = db_to_linear(np.arange(0.0, 70.0, 0.1))
for n, spec in specs.items():
    p = poltyrev_outage(spec, fine, 1_000_000, 1.0, make_rng(20 + n)).p
    s, r1, r2 = slope_between(fine, p)
    print(f"n = {n}: outage slope {s:.2f} between {10 * math.log10(r1):.1f} and {10 * math.log10(r2):.1f} dB")
