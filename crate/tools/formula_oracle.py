"""Regenerate crates/core/tests/data/formulas.txt with 50-digit mpmath arithmetic.

Each line is `name arg1 arg2 ... expected`; integer-valued formulas are
resampled when the pre-ceiling value lies within 1e-9 of an integer so the
frozen answer is not sensitive to the last bit of the double computation.
"""

import random
from pathlib import Path

from mpmath import mp, mpf, sqrt, log, ceil, floor

mp.dps = 50
rng = random.Random(20240917)
PER_FORMULA = 20


def logu(lo, hi):
    return float(mpf(lo) * (mpf(hi) / lo) ** mpf(rng.random()))


def unif(lo, hi):
    return lo + (hi - lo) * rng.random()


def gamma_nu(eps, nu, h):
    eps, nu, h = mpf(eps), mpf(nu), mpf(h)
    return 4 * h ** (2 / (1 + nu)) * eps ** (-(1 - nu) / (1 + nu))


def c_sol(eta, theta, zeta):
    eta, theta, zeta = map(mpf, (eta, theta, zeta))
    a = 2 / (4 + zeta + sqrt((4 + zeta) ** 2 + 1))
    return eta * min(a**2, (2 * (1 - eta) * theta / 3) ** 2 / 6)


def c_nc(eta, theta):
    return mpf(eta) * mpf(theta) ** 2 / 4


def c_meo(eta, theta, nu, h):
    eta, theta, nu, h = map(mpf, (eta, theta, nu, h))
    m = min(mpf(1), theta * ((1 - eta) / h) ** (1 / nu))
    return (eta / 2) * m**2 * mpf("0.5") ** ((2 + nu) / nu)


def c_sol_hat(eta, theta):
    eta, theta = mpf(eta), mpf(theta)
    return eta / 6 * min(mpf(1) / 6, (2 * (1 - eta) * theta / 3) ** 2)


def sigma_bar(g0, r, eps, nu, h):
    return max(mpf(g0), mpf(r) * gamma_nu(eps, nu, h))


def l_delta(delta, nu, h):
    delta, nu, h = map(mpf, (delta, nu, h))
    e = (1 - nu) / (1 + nu)
    lead = mpf(1) if e == 0 else ((1 - nu) / (2 * delta * (1 + nu))) ** e
    return lead * h ** (2 / (1 + nu))


def psi(t, zeta):
    s = mpf(t) + 2
    return log(144 * (sqrt(s) + 1) ** 2 * s**6 / mpf(zeta) ** 2)


def near_int(x):
    return abs(x - floor(x + mpf("0.5"))) < mpf("1e-9")


def k1_raw(gap, eps, eta, theta, zeta, nu, h):
    c = min(c_sol(eta, theta, zeta), c_nc(eta, theta))
    return mpf(gap) / c * sqrt(gamma_nu(eps, nu, h)) * mpf(eps) ** mpf(-1.5)


def k2_raw(gap, eps_h, eta, theta, nu, h):
    return mpf(gap) / c_meo(eta, theta, nu, h) * mpf(eps_h) ** (-(2 + mpf(nu)) / mpf(nu))


def t_raw(g0, r, eps, nu, h):
    return log(sigma_bar(g0, r, eps, nu, h) / mpf(g0)) / log(mpf(r))


def n_raw(n, eps, delta, norm_h):
    return log(mpf("2.75") * n / mpf(delta) ** 2) / 2 * sqrt(mpf(norm_h) / mpf(eps))


def nu_sample(i):
    return [0.0, 1.0][i] if i < 2 else unif(0.0, 1.0)


def rows():
    out = []
    emit = lambda name, args, val: out.append((name, args, val))
    for i in range(PER_FORMULA):
        a = (logu(1e-8, 0.9), nu_sample(i), logu(1e-3, 1e3))
        emit("gamma_nu", a, gamma_nu(*a))
    for i in range(PER_FORMULA):
        a = (unif(0.01, 0.99), unif(0.01, 0.99), unif(0.01, 0.99))
        emit("c_sol", a, c_sol(*a))
    for i in range(PER_FORMULA):
        a = (unif(0.01, 0.99), unif(0.01, 0.99))
        emit("c_nc", a, c_nc(*a))
    for i in range(PER_FORMULA):
        a = (unif(0.01, 0.99), unif(0.01, 0.99), 1.0 if i == 0 else unif(0.1, 1.0), logu(1e-2, 1e2))
        emit("c_meo", a, c_meo(*a))
    for i in range(PER_FORMULA):
        a = (unif(0.01, 0.99), unif(0.01, 0.99))
        emit("c_sol_hat", a, c_sol_hat(*a))
    for i in range(PER_FORMULA):
        a = (logu(1e-2, 1e3), unif(1.1, 10.0), logu(1e-8, 0.9), nu_sample(i), logu(1e-3, 1e3))
        emit("sigma_bar", a, sigma_bar(*a))
    for i in range(PER_FORMULA):
        a = (logu(1e-8, 1.0), nu_sample(i), logu(1e-3, 1e3))
        emit("l_delta", a, l_delta(*a))
    for i in range(PER_FORMULA):
        a = (0.0 if i == 0 else logu(1e-6, 1e12), unif(0.01, 0.99))
        emit("psi", a, psi(*a))
    while sum(1 for r in out if r[0] == "k1") < PER_FORMULA:
        i = sum(1 for r in out if r[0] == "k1")
        a = (logu(1e-2, 1e2), logu(1e-4, 0.5), unif(0.01, 0.99), unif(0.05, 0.99), unif(0.05, 0.99), nu_sample(i), logu(1e-2, 1e2))
        raw = k1_raw(*a)
        if raw < 2**50 and not near_int(raw):
            emit("k1", a, ceil(raw) + 1)
    while sum(1 for r in out if r[0] == "k2") < PER_FORMULA:
        a = (logu(1e-2, 1e2), logu(1e-2, 0.5), unif(0.01, 0.99), unif(0.05, 0.99), unif(0.3, 1.0), logu(1e-1, 1e1))
        raw = k2_raw(*a)
        if raw < 2**50 and not near_int(raw):
            emit("k2", a, ceil(raw) + 1)
    while sum(1 for r in out if r[0] == "inner_trial_bound") < PER_FORMULA:
        i = sum(1 for r in out if r[0] == "inner_trial_bound")
        a = (logu(1e-2, 1e3), unif(1.1, 10.0), logu(1e-8, 0.9), nu_sample(i), logu(1e-3, 1e3))
        raw = t_raw(*a)
        if not near_int(raw):
            emit("inner_trial_bound", a, max(ceil(raw), 0) + 2)
    while sum(1 for r in out if r[0] == "meo_budget") < PER_FORMULA:
        a = (float(rng.randint(1, 10**6)), logu(1e-8, 1.0), logu(1e-6, 0.5), logu(1e-2, 1e4))
        raw = n_raw(*a)
        if not near_int(raw):
            emit("meo_budget", a, min(mpf(a[0]), 1 + ceil(raw)))
    return out


def main():
    lines = [f"{name} " + " ".join(repr(x) for x in args) + " " + mp.nstr(val, 20, strip_zeros=False) for name, args, val in rows()]
    path = Path(__file__).resolve().parent.parent / "crates/core/tests/data/formulas.txt"
    path.write_text("\n".join(lines) + "\n")
    print(f"wrote {len(lines)} rows to {path}")


if __name__ == "__main__":
    main()
