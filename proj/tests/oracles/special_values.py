"""Closed-form and high-precision values used by the eigen and verify tests."""
import itertools
from fractions import Fraction

import mpmath as mp

mp.mp.dps = 30


def psi(x):
    s = mp.sqrt(2 * mp.pi)
    return 2 * mp.e ** (x * x / 2) * x + s * mp.erfi(x / mp.sqrt(2)) - s * x * x * mp.erfi(x / mp.sqrt(2))


def min_times_up():
    # first forward sign s1 and backward run signs; P(increment after S^T > 0)
    # T = 1 on s1 > 0, else -N with N the length of the backward run of ups
    p = Fraction(0)
    for s1 in (1, -1):
        if s1 > 0:
            p += Fraction(1, 2)
        else:
            # N >= 1 with prob 1/2 -> increment positive; N = 0 -> increment is s1 < 0
            p += Fraction(1, 2) * Fraction(1, 2)
    return p


def example_27_corr():
    # pieces end with two equal increments: x = V_{T-1}, y = -V_T with V_T = V_{T-1}
    xs, ys = [], []
    for v in (1, -1):
        xs.append(v)
        ys.append(-v)
    n = len(xs)
    num = n * sum(a * b for a, b in zip(xs, ys)) - sum(xs) * sum(ys)
    den = n * sum(a * a for a in xs) - sum(xs) ** 2
    return Fraction(num, den)


if __name__ == "__main__":
    print("erfi(1) =", mp.nstr(mp.erfi(1), 17))
    print("erfi(0.5) =", mp.nstr(mp.erfi(0.5), 17))
    print("erfi(2.5) =", mp.nstr(mp.erfi(2.5), 17))
    print("cprime2 =", mp.nstr(mp.findroot(psi, 2.1), 17))
    print("psi(1) =", mp.nstr(psi(1), 17))
    print("P(min-time increment > 0) =", min_times_up())
    print("corr(Z_T-Z_{T-1}, Z_T-Z_{T+1}) =", example_27_corr())
    print("Bessel-3 E tau_1 = 1/3; E sigma_B = E tau_B - 1/3 =", Fraction(2, 3))
