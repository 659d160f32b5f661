"""High-precision scalar re-evaluations used to freeze expected values in the C++ unit tests.

Run with `python3 tests/oracles/scalar_oracles.py`; the printed values are pasted into
tests/unit/test_gas_physics.cpp and tests/unit/test_pipe_model.cpp.
"""
from mpmath import mp, mpf, exp, log10, pi

mp.dps = 40


def papay(p, T, pc, Tc):
    pr = p / pc
    Tr = T / Tc
    return 1 - mpf("3.52") * pr * exp(mpf("-2.26") * Tr) + mpf("0.274") * pr**2 * exp(mpf("-1.878") * Tr)


def nikuradse(D, k):
    return (2 * log10(D / k) + mpf("1.138")) ** -2


def area(D):
    return D**2 * pi / 4


def main():
    z = papay(mpf("56e5"), mpf("283.15"), mpf("45.9e5"), mpf("191.5"))
    print("papay(56 bar, 283.15 K; 45.9 bar, 191.5 K) =", mp.nstr(z, 20))

    lam = nikuradse(mpf(1), mpf("1e-4"))
    print("nikuradse(D=1, k=1e-4) =", mp.nstr(lam, 20))

    Rs, T, zf, D, p, q = mpf(500), mpf("283.15"), mpf("0.9"), mpf(1), mpf("56e5"), mpf("144.98")
    v = Rs * T * zf / area(D) * q / p
    print("velocity(z=0.9) =", mp.nstr(v, 20))

    pin, pout = mpf("60e5"), mpf("50e5")
    pm = mpf(2) / 3 * (pin + pout - pin * pout / (pin + pout))
    print("mean pressure(60, 50 bar) [Pa] =", mp.nstr(pm, 20))

    f = lam * Rs * T * zf / (2 * D * area(D) ** 2) * abs(q) * q / p
    print("friction gradient(z=0.9) [Pa/m] =", mp.nstr(f, 20))

    # Pipe A-like state with Papay z at the stationary mean pressure.
    L, k = mpf(16000), mpf("2e-5")
    lamA = nikuradse(D, k)
    pin, pout = mpf("56.3e5"), mpf("55.7e5")
    pm = mpf(2) / 3 * (pin + pout - pin * pout / (pin + pout))
    zA = papay(pm, T, mpf("45.9e5"), mpf("191.5"))
    fL = lamA * Rs * T * zA / (2 * D * area(D) ** 2) * abs(q) * q / pm * L
    print("pipe A-like fL [Pa] =", mp.nstr(fL, 20), " |v| =", mp.nstr(Rs * T * zA / area(D) * q / pm, 20))


if __name__ == "__main__":
    main()
