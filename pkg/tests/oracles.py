"""Independent reference values for the Rayleigh outage tests."""
import math

import numpy as np
from scipy import integrate, optimize, special


def rayleigh_prod_cdf(t, n):
    """Pr(prod of n iid Exp(1) < t), by the Bessel closed form for n = 2 and quadrature above."""
    if n == 1:
        return -math.expm1(-t)
    if n == 2:
        s = 2 * math.sqrt(t)
        return 1 - s * special.k1(s)
    f = lambda x: rayleigh_prod_cdf(t / x, n - 1) * math.exp(-x)
    head, _ = integrate.quad(f, 0, 1.0, limit=200, points=[min(t, 0.5)])
    tail, _ = integrate.quad(f, 1.0, np.inf, limit=200)
    return head + tail


def oracle_outage_slope(n, lo=1e-2, hi=1e-4):
    """Exact log-log slope of Rayleigh outage between P = lo and P = hi.

    The outage event is prod h^2 < c / rho^n, so the slope in rho is -n times
    the slope of the product CDF in t.
    """
    logt = lambda p: optimize.brentq(lambda u: math.log(rayleigh_prod_cdf(math.exp(u), n)) - math.log(p), -60, 5)
    t1, t2 = logt(lo), logt(hi)
    return -n * (math.log(hi) - math.log(lo)) / (t2 - t1)
