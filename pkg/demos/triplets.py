"""Triplets l < x with floor(l**a) + floor(m**a) = floor(n**a).

T(x) = sum_{l<x} N_alpha(floor(l**alpha)), so T(x) / x**(alpha(beta-1)+1)
tends to the k=2 constant divided by the exponent.

    python3 demos/triplets.py [alpha]
"""
import sys

from pslab import AlphaContext, asymptotic_constant, triplet_count


def main(alpha="1.5"):
    ctx = AlphaContext.from_value(alpha)
    expo = ctx.alpha * (ctx.beta - 1) + 1
    target = asymptotic_constant(ctx, 2) / expo
    print(f"alpha={alpha} exponent={expo:.6g} target={target:.6f}")
    for x in (25, 50, 100, 200, 400):
        t = triplet_count(ctx, x)
        ratio = t / x ** expo
        print(f"x={x:>4} T={t:>9} ratio={ratio:.6f} gap={abs(ratio / target - 1):.2e}")


if __name__ == "__main__":
    main(*sys.argv[1:])
