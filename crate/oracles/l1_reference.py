"""Reference values for the L1 finite-difference oracle (mpmath, 40 digits).

The explicit L1 scheme damps the sawtooth mode only while
4 r <= 2 * sum_k (-1)^k b_k, with r = Gamma(2-a) dt^a / dx^2 and
b_k = (k+1)^(1-a) - k^(1-a); the alternating sum equals 2*eta(a-1).
"""
from mpmath import mp, mpf, altzeta, nsum, inf, gamma, sqrt, pi, erfc, exp

mp.dps = 40

for a in ["0.2", "0.5", "0.8", "1"]:
    a = mpf(a)
    closed = 2 * altzeta(a - 1)
    direct = nsum(lambda k: (-1) ** int(k) * ((k + 1) ** (1 - a) - k ** (1 - a)), [0, inf])
    print(f"alternating weight sum alpha={a}: {mp.nstr(closed, 17)} (direct {mp.nstr(direct, 17)})")

print("weights alpha=0.5 n=3:", [mp.nstr((k + 1) ** mpf("0.5") - k ** mpf("0.5"), 17) for k in range(3)])
print("Gamma(1.6):", mp.nstr(gamma(mpf("1.6")), 17))
