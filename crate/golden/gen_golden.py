"""Reference values for the test suites, computed independently of the Rust
implementation with mpmath (arbitrary precision, tanh-sinh quadrature).

Run: python3 golden/gen_golden.py   (writes the CSV files next to this script)
"""
import csv
import os
from mpmath import mp, mpf, mpc, quad, sinh, sin, cos, exp, pi, sqrt, inf, workdps

mp.dps = 30
HERE = os.path.dirname(os.path.abspath(__file__))


def log_s2_strip(x, w1, w2):
    a = w1 + w2 - 2 * x
    # small-t limit; the direct formula cancels catastrophically near 0
    c0 = a * (a * a - w1 * w1 - w2 * w2) / (12 * w1 * w2)

    def f(t):
        if abs(t) < mpf("1e-12"):
            return c0
        with workdps(2 * mp.dps):
            return (sinh(a * t) / (2 * sinh(w1 * t) * sinh(w2 * t)) - a / (2 * w1 * w2 * t)) / t

    return -quad(f, [0, mpf(1) / 4, 1, 4, 16, inf])


def s2(x, w1, w2):
    x = mpc(x)
    w1, w2 = mpf(w1), mpf(w2)
    fac = mpc(1)
    # keep Re x in [ (w1+w2)/4, 3(w1+w2)/4 ] using steps of w1
    lo, hi = (w1 + w2) / 4, 3 * (w1 + w2) / 4
    while x.real > hi:
        fac /= 2 * sin(pi * (x - w1) / w2)
        x -= w1
    while x.real < lo:
        fac *= 2 * sin(pi * x / w2)
        x += w1
    return fac * exp(log_s2_strip(x, w1, w2))


def write(name, header, rows):
    with open(os.path.join(HERE, name), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([mp.nstr(v, 20) for v in r])


def s2_table():
    pts = [
        (1.0, 0.0, 2.0, 3.0),
        (0.7, 0.0, 2.0, 3.0),
        (-0.7, 0.0, 2.0, 3.0),
        (2.5, 0.5, 2.0, 3.0),
        (1.3, -0.8, 2.0, 3.0),
        (6.2, 1.1, 2.0, 3.0),
        (-3.4, 0.3, 2.0, 3.0),
        (0.5, 5.0, 2.0, 3.0),
        (1.0, 0.0, 1.0, 4.0),
        (2.0, 0.0, 6.283185307179586, 6.283185307179586),
        (3.141592653589793, 0.0, 6.283185307179586, 6.283185307179586),
        (0.9424777960769379, 2.0, 6.283185307179586, 6.283185307179586),
    ]
    rows = []
    for xr, xi, w1, w2 in pts:
        v = s2(mpc(xr, xi), w1, w2)
        rows.append((xr, xi, w1, w2, v.real, v.imag))
    write("s2.csv", ["x_re", "x_im", "omega1", "omega2", "s2_re", "s2_im"], rows)


def phi(x, lam_site, rho, lam):
    return 1 / (s2(1j * x - lam_site * pi, rho, lam) * s2(-1j * x - lam_site * pi, rho, lam))


def kernel_values():
    rho = lam = 2 * pi
    psi0 = phi(mpf(0), mpf(-1), rho, lam)
    # n = 2, l = 1, L = (1,0): g = exp(-pi/rho (a - b1 + L1 pi i)) * sh(pi/rho (a - b2 - L2 pi i))
    a, b1, b2, L1, L2 = mpf("0.3"), mpf(0), mpf("0.4"), mpf("-0.3"), mpf("-0.3")
    g10 = exp(-pi / rho * (a - b1 + L1 * pi * 1j)) * sinh(pi / rho * (a - b2 - L2 * pi * 1j))
    g01 = exp(-pi / rho * (a - b2 + L2 * pi * 1j)) * sinh(pi / rho * (a - b1 + L1 * pi * 1j))
    rows = [
        ("psi0", psi0.real, psi0.imag),
        ("g_rho_10", g10.real, g10.imag),
        ("g_rho_01", g01.real, g01.imag),
    ]
    return rows


def integrals():
    rho = lam = 2 * pi
    mu, L, beta = mpf("0.5"), mpf("-0.3"), mpf(0)
    mp.dps = 18

    def i11(a):
        return (exp(mu * a) * phi(a - beta, L, rho, lam)
                * exp(-pi / rho * (a - beta + L * pi * 1j)) * exp(-pi / lam * (a - beta + L * pi * 1j)))

    pts = [-160, -80, -40, -20, -8, -3, 0, 3, 8, 20, 40]
    d11 = quad(i11, pts)
    x = mpf("0.2")
    f1 = quad(lambda a: exp(x * a) * phi(a, L, rho, lam), [-70, -40, -20, -8, -3, 0, 3, 8, 20, 40, 70])
    mp.dps = 30
    return [("pairing_n1_l1", d11.real, d11.imag), ("f1_x0.2", f1.real, f1.imag)]


def closed_forms():
    rho = lam = 2 * pi
    mu = mpf("0.5")
    Ls = [mpf("-0.3"), mpf("-0.3")]
    be = [mpf(0), mpf("0.4")]
    S = lambda z: s2(z, rho, lam)
    # E_1 for n = 2: exp(mu (b1+b2))^{C(2,2)} * (S(i b12 + (L1+L2) pi)/S(i b12 - (L1+L2) pi))^{C(1,1)}
    A = (Ls[0] + Ls[1]) * pi
    b12 = be[0] - be[1]
    e1 = exp(mu * (be[0] + be[1])) * S(1j * b12 + A) / S(1j * b12 - A)
    # c_1 for n = 2 from the per-multi-index product with F = ctilde * G
    th = -pi ** 2 / rho - pi ** 2 / lam
    # exponents at n = 2, l = 1: q-power sum(Lambda), 4-power 2, factorials trivial
    pref = exp(1j * th * (Ls[0] + Ls[1])) / 4 ** 2
    def ctilde1(Lm):
        return sqrt(rho * lam) / S(-2 * Lm * pi)
    def G1(Lm, x):
        c = (rho + lam) / 2 + pi * Lm
        y = rho * lam * x / (2 * pi)
        return 1 / (S(c - y) * S(c + y))
    k = 2 * pi ** 2 / (rho * lam)
    base = mu - (rho + lam) * pi / (rho * lam)
    prod = mpc(1)
    # L = (0,1): site 2 carries l=1, x = base + k*((0 - L1))
    prod *= ctilde1(Ls[1]) * G1(Ls[1], base + k * (0 - Ls[0]))
    # L = (1,0): site 1 carries l=1, x = base - k*((0 - L2))
    prod *= ctilde1(Ls[0]) * G1(Ls[0], base - k * (0 - Ls[1]))
    c1 = pref * prod
    return [("E1_n2", e1.real, e1.imag), ("c1_n2", c1.real, c1.imag)]


if __name__ == "__main__":
    s2_table()
    rows = kernel_values() + closed_forms() + integrals()
    write("values.csv", ["name", "re", "im"], [(0, r[1], r[2]) for r in rows])
    # keep names in the first column
    with open(os.path.join(HERE, "values.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["name", "re", "im"])
        for name, re, im in rows:
            w.writerow([name, mp.nstr(re, 20), mp.nstr(im, 20)])
