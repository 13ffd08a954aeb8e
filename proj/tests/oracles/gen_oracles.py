"""Independent high-precision oracle for values frozen into the C++ tests.

Uses mpmath at 40 digits and evaluates every formula directly from its
definition (complex powers, Gamma function), without the recurrence or
factorization tricks used by the library. Run:  python3 gen_oracles.py
"""
import mpmath as mp

mp.mp.dps = 40

HARTREE_EV = mp.mpf("27.211386245988")
C_AU = mp.mpf("137.035999084")
BOHR_M = mp.mpf("5.29177210903e-11")


def photon_energy(nm):
    return 2 * mp.pi * C_AU / (mp.mpf(nm) * mp.mpf("1e-9") / BOHR_M)


def cc_direct(k, kap, Z=1):
    """arg of the bracket, evaluated literally with principal complex powers."""
    k, kap = mp.mpf(k), mp.mpf(kap)
    nu = Z * (1 / kap - 1 / k)
    gam = 1j * Z * (kap - k) / 2 * (1 / kap**2 + 1 / k**2) * mp.gamma(1 + 1j * nu)
    val = (mp.mpc(2 * kap) ** (1j * Z / kap) / mp.mpc(2 * k) ** (1j * Z / k)
           * (mp.gamma(2 + 1j * nu) + gam) / mp.mpc(kap - k) ** (1j * nu))
    return mp.arg(val)


def eta(lam, kap, Z=1):
    return mp.arg(mp.gamma(lam + 1 - 1j * Z / kap))


def wrap(x):
    x = mp.fmod(x + mp.pi, 2 * mp.pi)
    if x <= 0:
        x += 2 * mp.pi
    return x - mp.pi


w = photon_energy(800)
print("photon_energy(800nm) =", mp.nstr(w, 17))
print("photon_energy(400nm) =", mp.nstr(photon_energy(400), 17))
print("k(10 eV) =", mp.nstr(mp.sqrt(2 * 10 / HARTREE_EV), 17))
ip = mp.mpf("0.5")
h9 = 9 * 2 * w - ip
print("ladder q=10: H9 eV =", mp.nstr(h9 * HARTREE_EV, 17), " S_c eV =",
      mp.nstr((h9 + 2 * w) * HARTREE_EV, 17))
print("loggamma(0.5) =", mp.nstr(mp.loggamma(0.5), 20))
print("arg Gamma(1+i) =", mp.nstr(mp.arg(mp.gamma(1 + 1j)), 20))
print("arg Gamma(2-i) =", mp.nstr(mp.arg(mp.gamma(2 - 1j)), 20))
print("loggamma(3+4i) =", mp.nstr(mp.loggamma(3 + 4j), 20))
print("loggamma(-2.5+0.5i) =", mp.nstr(mp.loggamma(-2.5 + 0.5j), 20))
print("loggamma(-40.3+7i) =", mp.nstr(mp.loggamma(-40.3 + 7j), 20))
print("loggamma(0.2-60i) =", mp.nstr(mp.loggamma(0.2 - 60j), 20))

e10 = 10 / HARTREE_EV
k1, k2 = mp.sqrt(2 * e10), mp.sqrt(2 * (e10 + w))
print("cc(k(10eV+w), k(10eV)) =", mp.nstr(cc_direct(k2, k1), 20))
print("cc(k(10eV), k(10eV+w)) =", mp.nstr(cc_direct(k1, k2), 20))

# Center-band atomic phase of the q=10 group of hydrogen (lambda=1, Z=1),
# composed literally from the band equations.
def ks(n):
    return mp.sqrt(2 * (h9 + n * w))

kq1, kl, kc, kh, kq2 = ks(0), ks(1), ks(2), ks(3), ks(4)
deta = eta(1, kq2) - eta(1, kq1)
center = deta + cc_direct(kh, kq2) + cc_direct(kc, kh) - cc_direct(kc, kl) - cc_direct(kl, kq1)
lower = deta + cc_direct(kh, kq2) + cc_direct(kc, kh) + cc_direct(kl, kc) - cc_direct(kl, kq1) + mp.pi
higher = deta + cc_direct(kh, kq2) - cc_direct(kh, kc) - cc_direct(kc, kl) - cc_direct(kl, kq1) - mp.pi
print("q=10 center =", mp.nstr(wrap(center), 20))
print("q=10 lower  =", mp.nstr(wrap(lower), 20))
print("q=10 higher =", mp.nstr(wrap(higher), 20))
print("q=10 d_eta =", mp.nstr(deta, 20))
print("q=10 1SB (probe 2w) =", mp.nstr(wrap(deta + cc_direct(kc, kq2) - cc_direct(kc, kq1)), 20))
print("I_au W/cm2 =", mp.nstr(mp.mpf("0.5") * 299792458 * mp.mpf("8.8541878128e-12")
                              * mp.mpf("5.14220674763e11") ** 2 * mp.mpf("1e-4"), 17))
