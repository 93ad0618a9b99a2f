#!/usr/bin/env python3
"""Select and pin the reference configuration REF1.

Scan Nicholson birth f(u, v) = p v exp(-a v) - d u with Gaussian dispersal (sigma = 1) over
(D, p, gamma1, gamma2, tau). Time and density are scaled so that d = a = 1. A candidate is kept when

  * K = ln p <= 1, so d2 f >= 0 on [0, K];
  * gamma2 - gamma1 >= 0.05;
  * quiescence gap margin D/2 + gamma1 - d1f(K,K) - d2f(K,K) - 3 gamma2 - D/2 >= 0.05;
  * gamma2 - d2f(K,K) >= 0.05, so the far-field node xi0 exists with room to spare.

Survivors are ranked by c*T (domain length times horizon of the stability run) with
c = 1.05 * threshold at beta = beta_sup / 2 and T = ln 10 / min(mu1, mu2). The first one is REF1.
The closed forms for the pinned set are then printed with mpmath (untruncated kernel).
"""
import itertools
import math

import mpmath as mp
from scipy.optimize import brentq
from scipy.special import ndtr

MARGIN = 0.05
FRACTION = 1.05


def half_moment(b):
    # int_{-inf}^0 J(y) e^{-b y} dy for the unit Gaussian
    return math.exp(b * b / 2) * ndtr(b)


def moment(b):
    return math.exp(b * b / 2)


def candidate(D, p, g1, g2, tau):
    K = math.log(p)
    if K > 1:
        return None
    f1K, f2K = -1.0, 1 - K          # d1 f, d2 f at (K, K)
    f20 = p                          # d2 f at (0, 0)
    if g2 - g1 < MARGIN or g2 - f2K < MARGIN:
        return None
    rhs = D / 2 + g1 - f1K - f2K - 3 * g2
    gap = rhs - D / 2
    if gap < MARGIN:
        return None
    g = lambda b: D * half_moment(b) - rhs
    beta_sup = brentq(g, 0, 30)
    b = beta_sup / 2
    term3 = (2 * (f20 - 1) + g2 - g1 - D / 2 + D * moment(b)) / b
    c = FRACTION * max(term3, (g1 - g2) / b)
    C11 = c * b + D / 2 + g1 - 2 * (f20 - 1) - g2 - D * moment(b)
    C12 = D / 2 + g1 - f1K - f2K - 3 * g2 - D * half_moment(b)
    C1 = min(C11, C12)
    mu1 = brentq(lambda u: C1 - 2 * u - math.expm1(2 * u * tau) * f20, 0, C1 / 2)
    mu2 = (g2 - g1) / 2
    T = math.log(10) / min(mu1, mu2)
    return dict(D=D, p=p, g1=g1, g2=g2, tau=tau, c=c, T=T, cost=c * T, mu1=mu1, mu2=mu2, gap=gap)


def scan():
    grid = itertools.product([0.1, 0.2, 0.3, 0.5, 1.0], [2.0, 2.3, 2.5, 2.7],
                             [0.02, 0.05, 0.1, 0.2, 0.3], [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8], [0.5, 1.0])
    out = [x for x in (candidate(*a) for a in grid) if x]
    out.sort(key=lambda x: x["cost"])
    return out


def pinned(x, digits=18):
    mp.mp.dps = 40
    D, p, g1, g2, tau = (mp.mpf(str(x[k])) for k in ("D", "p", "g1", "g2", "tau"))
    K = mp.log(p)
    H = lambda b: mp.exp(b * b / 2) * mp.ncdf(b)
    M = lambda b: mp.exp(b * b / 2)
    rhs = D / 2 + g1 + 1 - (1 - K) - 3 * g2
    beta_sup = mp.findroot(lambda b: D * H(b) - rhs, 2)
    b = beta_sup / 2
    term3 = (2 * (p - 1) + g2 - g1 - D / 2 + D * M(b)) / b
    c = FRACTION * term3
    C11 = c * b + D / 2 + g1 - 2 * (p - 1) - g2 - D * M(b)
    C12 = rhs - D * H(b)
    C1 = min(C11, C12)
    mu1 = mp.findroot(lambda u: C1 - 2 * u - mp.expm1(2 * u * tau) * p, C1 / 4)
    mu2 = (g2 - g1) / 2
    rows = [("K", K), ("K2", g1 * K / g2), ("beta_sup", beta_sup), ("beta", b), ("term3", term3), ("c", c),
            ("C11", C11), ("C12", C12), ("mu1", mu1), ("mu2", mu2), ("mu", mp.mpf("0.9") * min(mu1, mu2))]
    for k, v in rows:
        print(f"  {k:9s} {mp.nstr(v, digits)}")


def main():
    ranked = scan()
    print(f"{len(ranked)} candidates pass the margins; best by c*T:")
    print("      c*T        c        T      mu1      mu2      gap    D    p   g1   g2  tau")
    for x in ranked[:10]:
        print(f"  {x['cost']:7.2f} {x['c']:8.4f} {x['T']:8.3f} {x['mu1']:8.5f} {x['mu2']:8.5f} {x['gap']:8.4f}"
              f" {x['D']:4g} {x['p']:4g} {x['g1']:4g} {x['g2']:4g} {x['tau']:4g}")
    ref = ranked[0]
    print(f"\nREF1: D={ref['D']} p={ref['p']} d=1 a=1 mu0=0 gamma1={ref['g1']} gamma2={ref['g2']} tau={ref['tau']}"
          " gaussian sigma=1")
    pinned(ref)


if __name__ == "__main__":
    main()
