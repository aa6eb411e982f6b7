#!/usr/bin/env python3
"""High-precision reference values used by the test suites.

Everything here is computed with mpmath at 40 significant digits and is
independent of the Rust evaluation path. Output goes to
crates/core/tests/data/.

Usage: python3 tools/oracle_values.py
"""

import os
import random

from mpmath import mp, mpf, siegelz, siegeltheta, zeta, findroot, pi, loggamma, im, log, exp

mp.dps = 40
HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "..", "crates", "core", "tests", "data")


def theta_lg(t):
    t = mpf(t)
    return -t / 2 * log(pi) + im(loggamma(mpf(1) / 4 + 1j * t / 2))


def main():
    os.makedirs(OUT, exist_ok=True)

    rng = random.Random(20240611)
    ts = sorted(rng.uniform(10.0, 1.0e5) for _ in range(100))
    with open(os.path.join(OUT, "z_random.csv"), "w") as f:
        f.write("t,z\n")
        for t in ts:
            f.write(f"{t!r},{mp.nstr(siegelz(mpf(t)), 25)}\n")

    spot = [0.0, 1.0, 5.0, 10.0, 14.134725, 20.0, 29.999, 30.0, 30.001, 35.0,
            50.0, 100.0, 150.0, 210.0, 500.0, 1000.0, 5000.0, 12345.678, 99999.0]
    with open(os.path.join(OUT, "z_spot.csv"), "w") as f:
        f.write("t,z,theta\n")
        for t in spot:
            z = siegelz(mpf(t))
            if t < 1000:
                # cross-check with an Euler-Maclaurin zeta
                s = mpf("0.5") + 1j * mpf(t)
                alt = (exp(1j * theta_lg(t)) * zeta(s, method="euler-maclaurin")).real
                assert abs(alt - z) < mpf("1e-25"), (t, alt, z)
            th = siegeltheta(mpf(t))
            assert abs(th - theta_lg(t)) < mpf("1e-30")
            f.write(f"{t!r},{mp.nstr(z, 25)},{mp.nstr(th, 25)}\n")

    # Gram points via root-finding on the log-gamma form of theta.
    with open(os.path.join(OUT, "gram.csv"), "w") as f:
        f.write("n,g\n")
        for n in [-1, 0, 1, 10, 100, 1000, 10000]:
            guess = 2 * pi * exp(1 + mp.lambertw((8 * n + 1) / (8 * exp(1))))
            g = findroot(lambda t: theta_lg(t) - n * pi, guess.real)
            f.write(f"{n},{mp.nstr(g, 25)}\n")

    # First critical zero.
    z1 = findroot(siegelz, mpf("14.13"))
    print("first zero", mp.nstr(z1, 25))
    print("zeta(1/2)", mp.nstr(zeta(mpf("0.5")), 25))


if __name__ == "__main__":
    main()
