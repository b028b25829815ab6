"""High-precision reference values frozen into the C++ unit tests.

Run with `python3 tests/oracles/mp_oracles.py`; every number printed here is
pasted verbatim into tests/unit/frozen_values.hpp.  Uses mpmath at 50 digits,
independent of the C++ implementation.
"""
import mpmath as mp

mp.mp.dps = 50


def bessel_tail(d, m, r):
    nu = mp.mpf(d + 1) / 2
    p = mp.mpf(d - 3) / 2
    return mp.quad(lambda u: u**p * mp.besselk(nu, m * u), [r, r + 1, r + 10, mp.inf])


def radial_l(d, m, r):
    nu = mp.mpf(d + 1) / 2
    return 2 ** (mp.mpf(d - 1) / 2) * mp.gamma(nu) / (m**nu * bessel_tail(d, m, r))


def levy_density(d, m, y):
    nu = mp.mpf(d + 1) / 2
    if m == 0:
        return mp.gamma(nu) * mp.pi ** (-nu) / y ** (d + 1)
    return 2 * (m / (2 * mp.pi)) ** nu * mp.besselk(nu, m * y) / y**nu


def kernel(d, m, y, t):
    nu = mp.mpf(d + 1) / 2
    rho = mp.sqrt(y * y + t * t)
    if m == 0:
        return mp.gamma(nu) * mp.pi ** (-nu) * t / rho ** (d + 1)
    return 2 * (m / (2 * mp.pi)) ** nu * t * mp.exp(m * t) * mp.besselk(nu, m * rho) / rho**nu


def sphere(d):
    return 2 * mp.pi ** (mp.mpf(d) / 2) / mp.gamma(mp.mpf(d) / 2)


def show(name, v):
    print(f"{name} = {mp.nstr(v, 20)}")


show("K1(1)", mp.besselk(1, 1))
show("K0(1)", mp.besselk(0, 1))
show("K_0.3(0.7)", mp.besselk(mp.mpf("0.3"), mp.mpf("0.7")))
show("K_2.5(1e-6)", mp.besselk(mp.mpf("2.5"), mp.mpf("1e-6")))
show("K_2(400)", mp.besselk(2, 400))
show("K_1(1e-6)", mp.besselk(1, mp.mpf("1e-6")))
show("K_0.1(1e-4)", mp.besselk(mp.mpf("0.1"), mp.mpf("1e-4")))
show("bessel_tail(1,1,1)", bessel_tail(1, 1, 1))
show("bessel_tail(3,0.5,2)", bessel_tail(3, mp.mpf("0.5"), 2))
show("bessel_tail(1,1,30)", bessel_tail(1, 1, 30))
show("levy_density(1,1,1)", levy_density(1, 1, 1))
show("kernel(1,1,0,1)", kernel(1, 1, 0, 1))
show("kernel(3,0.5,1.5,0.7)", kernel(3, mp.mpf("0.5"), mp.mpf("1.5"), mp.mpf("0.7")))
show("tail_mass(1,1,1)", 2 * mp.quad(lambda u: levy_density(1, 1, u), [1, 10, mp.inf]))
show("tail_mass(3,0.5,0.8)", sphere(3) * mp.quad(lambda u: levy_density(3, mp.mpf("0.5"), u) * u**2, [mp.mpf("0.8"), 10, mp.inf]))
show("l_1(1) d=1", radial_l(1, 1, 1))
show("l_0.5(2) d=3", radial_l(3, mp.mpf("0.5"), 2))
show("M2(d=1,m=1,eps=0.1)", 2 * mp.quad(lambda u: u**2 * levy_density(1, 1, u), [0, mp.mpf("0.1")]))
show("trunc_resid(d=1,m=0,xi=1,eps=0.1)", 2 * mp.quad(lambda u: (1 - mp.cos(u)) * levy_density(1, 0, u), [0, mp.mpf("0.1")]))
for m in ["0.1", "1"]:
    mm = mp.mpf(m)
    show(f"abs_moment(beta=0.75,d=1,m={m},t=0.5)",
         2 * mp.quad(lambda y: y ** mp.mpf("0.75") * kernel(1, mm, y, mp.mpf("0.5")), [0, 1, 10, 100, mp.inf]))
