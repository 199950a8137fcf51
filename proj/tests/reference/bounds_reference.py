"""Regenerates the high-precision reference values used by test_bounds and the
acceptance binary. Independent of the C++ code: every term is re-derived with
mpmath at 50 significant digits.

    python3 tests/reference/bounds_reference.py
"""
from mpmath import mp, mpf, sqrt, log, pi, e, gamma

mp.dps = 50


def stat_kmeans(n, k, delta):
    n, k, delta = mpf(n), mpf(k), mpf(delta)
    return k * sqrt(18 * pi / n) + sqrt(8 * log(1 / delta) / n)


def stat_kflats(n, k, d, delta):
    n, k, d, delta = mpf(n), mpf(k), mpf(d), mpf(delta)
    return k * sqrt(2 * pi * d / n) + sqrt(log(1 / delta) / (2 * n))


def quantization(d, order):
    return (mpf(d) / (2 * pi * e)) ** (mpf(order) / 2)


def ball(d):
    return pi ** (mpf(d) / 2) / gamma(mpf(d) / 2 + 1)


def sphere(d):
    return 2 * pi ** ((mpf(d) + 1) / 2) / gamma((mpf(d) + 1) / 2)


def kn_kmeans(n, d, dens, c):
    n, d, dens, c = mpf(n), mpf(d), mpf(dens), mpf(c)
    return n ** (d / (2 * (d + 2))) * (c / (24 * sqrt(pi))) ** (d / (d + 2)) * dens


def kn_kflats(n, d, kappa, c):
    n, d, kappa, c = mpf(n), mpf(d), mpf(kappa), mpf(c)
    return n ** (d / (2 * (d + 4))) * (c / (2 * sqrt(2 * pi * d))) ** (d / (d + 4)) * kappa ** (4 / (d + 4))


rows = [
    ("stat_kmeans(1e4, 10, 0.05)", stat_kmeans(10**4, 10, mpf("0.05"))),
    ("stat_kmeans(1, 1, e^-1)", stat_kmeans(1, 1, 1 / e)),
    ("stat_kmeans(2000, 8, 0.05)", stat_kmeans(2000, 8, mpf("0.05"))),
    ("stat_kflats(1e4, 10, 2, 0.05)", stat_kflats(10**4, 10, 2, mpf("0.05"))),
    ("stat_kflats(1e6, 1, 1, 0.5)", stat_kflats(10**6, 1, 1, mpf("0.5"))),
    ("quantization(2, 2)", quantization(2, 2)),
    ("quantization(2, 4)", quantization(2, 4)),
    ("quantization(19, 2)", quantization(19, 2)),
    ("sphere(1)", sphere(1)),
    ("sphere(2)", sphere(2)),
    ("sphere(3)", sphere(3)),
    ("ball(2)^(1/2)", ball(2) ** (mpf(2) / 4)),
    ("ball(1)^(2/3)", ball(1) ** (mpf(2) / 3)),
    ("kn_kmeans(1e4, 2, sqrt(4pi), q(2,2))", kn_kmeans(10**4, 2, sqrt(4 * pi), quantization(2, 2))),
    ("kn_kflats(1e4, 2, 4pi, q(2,4))", kn_kflats(10**4, 2, 4 * pi, quantization(2, 4))),
    ("kn_kmeans(1e5, 1, 2pi^(2/3), q(1,2))", kn_kmeans(10**5, 1, (2 * pi) ** (mpf(2) / 3), quantization(1, 2))),
]

for name, value in rows:
    print(f"{name:40s} {mp.nstr(value, 25)}")
