#!/usr/bin/env python3
"""Generate the Taylor tables for the Riemann-Siegel correction terms C0..C4.

The corrections are expressed through
    Psi(p) = cos(2 pi (p^2 - p - 1/16)) / cos(2 pi p)
and its derivatives. With z = 2p - 1 this becomes
    Psi = -cos(pi z^2 / 2 - 5 pi / 8) / cos(pi z),
an entire function, so every C_k is a power series in z that converges on
|z| <= 1. Coefficients are computed with 120-digit arithmetic and printed as
Rust constants (ascending powers of z, zeros included).

Usage: python3 tools/rs_coefficients.py > crates/core/src/zeta/rs_tables.rs
"""

from mpmath import mp, mpf, cos, sin, pi, factorial, nstr

mp.dps = 120
DEG = 140
CUTOFF = mpf("1e-22")


def series_div(num, den):
    out = [mpf(0)] * len(num)
    for k in range(len(num)):
        acc = num[k]
        for j in range(1, k + 1):
            acc -= den[j] * out[k - j]
        out[k] = acc / den[0]
    return out


def deriv_p(series, order):
    # d/dp = 2 d/dz
    s = list(series)
    for _ in range(order):
        s = [2 * (k + 1) * s[k + 1] for k in range(len(s) - 1)] + [mpf(0)]
    return s


def main():
    num = [mpf(0)] * (DEG + 1)
    c58, s58 = cos(5 * pi / 8), sin(5 * pi / 8)
    half_pi = pi / 2
    k = 0
    while 4 * k <= DEG:
        num[4 * k] += c58 * (-1) ** k * half_pi ** (2 * k) / factorial(2 * k)
        if 4 * k + 2 <= DEG:
            num[4 * k + 2] += s58 * (-1) ** k * half_pi ** (2 * k + 1) / factorial(2 * k + 1)
        k += 1
    den = [mpf(0)] * (DEG + 1)
    for k in range(0, DEG // 2 + 1):
        den[2 * k] = -((-1) ** k) * pi ** (2 * k) / factorial(2 * k)
    psi = series_div(num, den)

    d = lambda n: deriv_p(psi, n)
    p2, p4, p6, p8 = pi**2, pi**4, pi**6, pi**8

    def comb(terms):
        out = [mpf(0)] * (DEG + 1)
        for coef, s in terms:
            for i in range(DEG + 1):
                out[i] += coef * s[i]
        return out

    tables = {
        "C0": psi,
        "C1": comb([(-1 / (96 * p2), d(3))]),
        "C2": comb([(1 / (64 * p2), d(2)), (1 / (18432 * p4), d(6))]),
        "C3": comb([
            (-1 / (64 * p2), d(1)),
            (-1 / (3840 * p4), d(5)),
            (-1 / (5308416 * p6), d(9)),
        ]),
        "C4": comb([
            (1 / (128 * p2), psi),
            (mpf(19) / (24576 * p4), d(4)),
            (mpf(11) / (5898240 * p6), d(8)),
            (1 / (2038431744 * p8), d(12)),
        ]),
    }

    print("// Generated by tools/rs_coefficients.py. Do not edit by hand.")
    print("//")
    print("// Taylor coefficients in z = 2p - 1 (ascending powers) of the")
    print("// Riemann-Siegel correction terms C0..C4.")
    print()
    for name, s in tables.items():
        last = max(i for i, c in enumerate(s) if abs(c) > CUTOFF)
        # headroom against truncation: the tail must stay below CUTOFF
        assert last < DEG - 12, (name, last)
        print("#[rustfmt::skip]")
        print(f"pub(super) const {name}: [f64; {last + 1}] = [")
        for c in s[: last + 1]:
            print(f"    {nstr(c, 20, min_fixed=0, max_fixed=0)},")
        print("];")
        print()


if __name__ == "__main__":
    main()
