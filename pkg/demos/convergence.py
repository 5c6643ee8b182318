"""Windowed means of N_alpha(d) / d**(beta-1) approaching beta alpha**-beta zeta(beta).

Pointwise counts fluctuate, so each row averages a window of 500
consecutive d.  The k=3 column should settle near half the k=2 one.

    python3 demos/convergence.py [alpha]
"""
import sys

import numpy as np

from pslab import AlphaContext, asymptotic_constant, sweep


def main(alpha="1.5"):
    ctx = AlphaContext.from_value(alpha)
    c2 = asymptotic_constant(ctx, 2)
    print(f"alpha={alpha} beta={ctx.beta:.6g} limit constant k=2: {c2:.7f}, k=3: {c2 / 2:.7f}")
    print(f"{'d window':>18} {'mean k=2':>10} {'gap':>9} {'mean k=3':>10} {'gap':>9}")
    scale = ctx.beta - 1
    for lo in (10**3, 10**4, 10**5):
        rep = sweep(ctx, 3, lo, lo + 499)
        m2 = float(np.mean([r.pair_count / r.d ** scale for r in rep.records]))
        m3 = rep.window_mean_ratio
        print(f"{lo:>8}..{lo + 499:<8} {m2:10.6f} {abs(m2 / c2 - 1):9.2e} "
              f"{m3:10.6f} {abs(m3 / (c2 / 2) - 1):9.2e}")


if __name__ == "__main__":
    main(*sys.argv[1:])
