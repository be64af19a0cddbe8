"""Regenerate nastar_envelope.csv.

Solves n_A g(x/n_A) = n_B g((N - x)/n_B) for the photon split x at 50 digits
and records the relative error of the two closed-form approximations of the
split. The Rust test accepts errors up to these values (plus slack), so a
regression in either approximation or in the solver shows up as a failure.

    python3 gen_nastar_envelope.py > nastar_envelope.csv
"""

import sys

import mpmath as mp

mp.mp.dps = 50

SPLITS = [(1, 4), (1, 3), (1, 2), (2, 5)]
POINTS = 50
NU_MIN, NU_MAX = 10, 1000


def g(x):
    if x == 0:
        return mp.mpf(0)
    return (x + 1) * mp.log(x + 1) - x * mp.log(x)


def split(total, na, nb):
    h = lambda x: na * g(x / na) - nb * g((total - x) / nb)
    return mp.findroot(h, (mp.mpf(0), total), solver="anderson")


def delta_leading(mu, nu):
    t = (mp.e * nu) ** (mu - 1)
    return t / (mu * (1 + t))


def delta_refined(mu, nu):
    corr = 1 - mp.exp(1 - mu) / (2 * nu**mu)
    return corr / (mu * ((mp.e * nu) ** (1 - mu) + 1))


def main(out):
    out.write("n_a,n_b,nu,rel_err_asymptotic,rel_err_asymptotic_refined\n")
    for na, nb in SPLITS:
        mu = mp.mpf(na) / nb
        for k in range(POINTS):
            # Rounded to f64 first; the Rust side reads nu back from the file.
            nu = mp.mpf(float(10 ** (1 + 2 * k / (POINTS - 1))))
            total = nu * na
            exact = split(total, na, nb)
            errs = [abs((1 - d(mu, nu)) * total - exact) / exact for d in (delta_leading, delta_refined)]
            out.write(f"{na},{nb},{mp.nstr(nu, 17)},{mp.nstr(errs[0], 17)},{mp.nstr(errs[1], 17)}\n")


if __name__ == "__main__":
    main(sys.stdout)
