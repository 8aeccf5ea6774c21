"""High-precision reference values for the fracops tests (mpmath, 50 digits)."""
from mpmath import mp, gamma, mpf, exp, erfc, nsum, inf, loggamma, sqrt, pi

mp.dps = 50

print("gamma")
for z in ["0.5", "1", "5", "0.1", "1.5", "2.5", "3.7", "10.3", "33.3", "100.5", "170.5", "-0.5", "-1.5", "-2.3", "1e-5", "0.999"]:
    print(f"  ({z}, {mp.nstr(gamma(mpf(z)), 17)}),")

print("ln_gamma")
for z in ["0.5", "3.7", "100.5", "250.25", "1000"]:
    print(f"  ({z}, {mp.nstr(loggamma(mpf(z)), 17)}),")

print("mittag_leffler partial sums")
def ml(a, z, n):
    a, z = mpf(a), mpf(z)
    return sum(z**k / gamma(1 + k * a) for k in range(n))
print("  E_0.5(-1) closed form", mp.nstr(exp(1) * erfc(1), 17))
print("  E_0.5(-1) 60 terms", mp.nstr(ml("0.5", -1, 60), 17))
print("  E_0.7(-2) 80 terms", mp.nstr(ml("0.7", -2, 80), 17))
for a in ["0.3", "0.7", "1"]:
    z = -pi**2 * mpf("0.2")**mpf(a)
    print(f"  5-term partial sum E_{a}(-pi^2 0.2^{a})", mp.nstr(ml(a, z, 5), 17))
print("  E_1(-1) 30 terms", mp.nstr(ml(1, -1, 30), 17), mp.nstr(exp(-1), 17))

print("rl coefficient 1/Gamma(1.5)", mp.nstr(1 / gamma(mpf("1.5")), 17))
print("Gamma(1.6)", mp.nstr(gamma(mpf("1.6")), 17))
print("-2/sqrt(pi)", mp.nstr(-2 / sqrt(pi), 17))
