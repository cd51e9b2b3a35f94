#!/usr/bin/env python3
"""Derive the frozen Gevrey-2 constants of the bump activation.

Computes sup |phi^(n)| for n <= 8 with mpmath (60 digits) on a grid, prints
the smallest feasible R for the bound sup |phi^(n)| <= C R^n (n!)^2 with
C = sup |phi| = 1/e, and the margins at the frozen catalog value R = 3.1.
Rerun after touching the bump definition; the catalog constants in
polybarrier/activations.py must keep every margin below 1.
"""

import mpmath as mp

mp.mp.dps = 60

FROZEN_R = 3.1


def bump(t):
    if abs(t) >= 1:
        return mp.mpf(0)
    return mp.e ** (-1 / (1 - t * t))


def sup_deriv(n, pts=801, edge=mp.mpf("0.02")):
    best = mp.mpf(0)
    for i in range(pts):
        t = -1 + mp.mpf(2) * i / (pts - 1)
        if 1 - abs(t) < edge:
            continue
        v = abs(mp.diff(bump, t, n))
        if v > best:
            best = v
    return best


def main():
    sups = [sup_deriv(n) for n in range(9)]
    C = sups[0]
    print(f"C = sup|phi| = {mp.nstr(C, 15)} (1/e = {mp.nstr(mp.e ** -1, 15)})")
    required = [
        float((sups[n] / (C * mp.factorial(n) ** 2)) ** (mp.mpf(1) / n))
        for n in range(1, 9)
    ]
    print("required R per order:", [round(r, 4) for r in required])
    print(f"min feasible R: {max(required):.4f}; frozen R = {FROZEN_R}")
    for n in range(9):
        bound = C * mp.mpf(FROZEN_R) ** n * mp.factorial(n) ** 2
        print(
            f"  n={n}: sup={mp.nstr(sups[n], 6):>12}  bound={mp.nstr(bound, 6):>12}"
            f"  sup/bound={mp.nstr(sups[n] / bound, 4)}"
        )


if __name__ == "__main__":
    main()
