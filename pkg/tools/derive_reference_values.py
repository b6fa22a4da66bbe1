"""Independent high-precision reference values for the regression tests.

Uses mpmath only (no package code): closed-form weighting derivatives by
automatic differentiation, adaptive tanh-sinh quadrature and secant roots at
40 digits. Run with ``python tools/derive_reference_values.py``.
"""

import mpmath as mp

mp.mp.dps = 40


def T(x, th):
    return x ** th / (x ** th + (1 - x) ** th) ** (1 / th)


def dT(x, th):
    return mp.diff(lambda t: T(t, th), x)


def f(x, th):
    return (1 - T(x, th)) / (1 - x)


def landmarks(th):
    b = mp.findroot(lambda x: mp.diff(lambda t: T(t, th), x, 2), (mp.mpf("0.01"), mp.mpf("0.99")),
                    solver="illinois")
    a = mp.findroot(lambda x: (1 - T(x, th)) - dT(x, th) * (1 - x), (mp.mpf("1e-4"), b * 0.9),
                    solver="illinois")
    c = mp.findroot(lambda x: T(x, th) - x, (a * 1.5, mp.mpf("0.99")), solver="illinois")
    return a, b, c, f(a, th)


m, M = mp.mpf("0.1"), mp.mpf(10)
C = 1 - mp.e ** (-m * M)


def Q(z):
    return -mp.log(1 - C * z) / m


def K(t):
    return mp.quad(Q, [0, t]) + Q(t) * (1 - t)


EX = mp.quad(Q, [0, 1])
W0, rho, th = mp.mpf(15), mp.mpf("0.2"), mp.mpf("0.5")


def budget(z2, z1):
    return mp.quad(lambda t: Q(t) - Q(z2), [z2, z1]) + (Q(z1) - Q(z2)) * (1 - z1)


if __name__ == "__main__":
    for t in ("0.3", "0.5", "0.8"):
        a, b, c, lam = landmarks(mp.mpf(t))
        print(f"theta={t}: a={mp.nstr(a, 17)} b={mp.nstr(b, 17)} c={mp.nstr(c, 17)} "
              f"lambda_hat={mp.nstr(lam, 17)}")
    a, b, c, lam_hat = landmarks(th)
    print("E[X] =", mp.nstr(EX, 17))
    print("K(c) =", mp.nstr(K(c), 17), " pi_c =", mp.nstr((1 + rho) * (EX - K(c)), 17))

    # linear utility, premium 4: f(d) = f(e) = lambda, budget binds
    delta = EX - 4 / (1 + rho)
    def pair(lam):
        d = mp.findroot(lambda z: f(z, th) - lam, (mp.mpf("1e-6"), a), solver="illinois")
        e = mp.findroot(lambda z: f(z, th) - lam, (a, c), solver="illinois")
        return d, e
    lam = mp.findroot(lambda L: budget(*pair(L)) - delta, (lam_hat + mp.mpf("1e-6"), mp.mpf("0.999")),
                      solver="illinois")
    d, e = pair(lam)
    print("yaari pi=4: d =", mp.nstr(d, 17), " e =", mp.nstr(e, 17), " lambda =", mp.nstr(lam, 17))

    # CARA alpha=0.02
    alpha = mp.mpf("0.02")
    du = lambda x: alpha * mp.e ** (-alpha * x)
    def h(z, wd):
        return du(wd - Q(z)) * f(z, th) * z - mp.quad(lambda t: du(wd - Q(t)) * dT(t, th), [0, z])
    for pi in (3, 4):
        pi = mp.mpf(pi)
        wd = W0 - pi
        delta = EX - pi / (1 + rho)
        l = mp.findroot(lambda z: h(z, wd), (a * 1.01, c * 0.999), solver="illinois")
        print(f"cara pi={pi}: l = {mp.nstr(l, 17)} K(l) = {mp.nstr(K(l), 17)} "
              f"pi_hat = {mp.nstr((1 + rho) * (EX - K(l)), 17)}")
        if delta >= K(l):
            q = mp.findroot(lambda z: K(z) - delta, (l, mp.mpf("0.99")), solver="illinois")
            print(f"  deductible level {mp.nstr(q, 17)} loss {mp.nstr(Q(q), 17)}")
        else:
            def inner(z2, z1):
                k = Q(z1) - Q(z2)
                rhs = mp.quad(lambda t: du(wd - Q(t) + Q(z2)) * dT(t, th), [z2, z1])
                return du(wd - k) * f(z1, th) * (z1 - z2) - rhs
            def z1_of(z2):
                return mp.findroot(lambda z1: inner(z2, z1), (a * 1.0001, c), solver="illinois")
            z2 = mp.findroot(lambda z2: budget(z2, z1_of(z2)) - delta, (mp.mpf("1e-5"), a * 0.999),
                             solver="illinois")
            print(f"  threefold z2 = {mp.nstr(z2, 17)} z1 = {mp.nstr(z1_of(z2), 17)}")
