"""Pairs of fractional parts ({n**alpha}, {r alpha n**(alpha-1)}) on short windows.

For growing d the Weyl sums over the window [M(d), N(d)) shrink, the 1-D
projections have small discrepancy, and the count in a box tracks
beta (c2 - c1) mu / (r alpha)**beta.

    python3 demos/equidistribution.py
"""
from pslab import AlphaContext, WindowSpec, discrepancy_report, short_interval_count, weyl_sum
from pslab.equidist import predicted_density, unit_box, window_fractions


def main():
    ctx = AlphaContext.from_value("1.5")
    box = unit_box(0.0, 0.5, 0.0, 0.5)
    print(f"{'d':>8} {'len':>8} {'|S(1,0)|':>10} {'|S(0,1)|':>10} {'|S(1,1)|':>10} "
          f"{'D_x':>9} {'D_y':>9} {'density':>9} {'predicted':>9}")
    for d in (10**3, 10**4, 10**5, 10**6):
        w = WindowSpec.build(ctx, 1, d, 0, 1)
        sums = [weyl_sum(ctx, w, *h) for h in ((1, 0), (0, 1), (1, 1))]
        fx, fy, _ = window_fractions(ctx, w)
        dx = discrepancy_report(fx, 20).exact_discrepancy
        dy = discrepancy_report(fy, 20).exact_discrepancy
        dens = short_interval_count(ctx, w, box).density
        print(f"{d:>8} {w.length:>8} " + " ".join(f"{s:10.3g}" for s in sums)
              + f" {dx:9.3g} {dy:9.3g} {dens:9.5f} {predicted_density(ctx, w, 0.25):9.5f}")


if __name__ == "__main__":
    main()
