"""Independent high-precision reference values for the unit tests.

Run with: python3 tools/oracle/oracle_values.py
Every value printed here is frozen verbatim into tests/*.cpp.
"""
from itertools import product

import mpmath as mp

mp.mp.dps = 50


def cbgep_from_tbep(p_tb, m):
    return 1 - (1 - mp.mpf(p_tb)) ** (mp.mpf(1) / m)


def binom_pmf(m, n, p):
    return mp.binomial(m, n) * p**n * (1 - p) ** (m - n)


def enumerate_exact(probs, n):
    total = mp.mpf(0)
    for outcome in product([0, 1], repeat=len(probs)):
        if sum(outcome) != n:
            continue
        term = mp.mpf(1)
        for fail, p in zip(outcome, probs):
            term *= p if fail else 1 - p
        total += term
    return total


def trunc_normal_mean(mu, sigma, a, b):
    alpha = (mp.mpf(a) - mu) / sigma
    beta = (mp.mpf(b) - mu) / sigma
    phi = lambda x: mp.npdf(x)
    Phi = lambda x: mp.ncdf(x)
    return mu + sigma * (phi(alpha) - phi(beta)) / (Phi(beta) - Phi(alpha))


def show(name, value):
    print(f"{name} = {mp.nstr(value, 20)}")


p8 = cbgep_from_tbep(mp.mpf("0.1"), 8)
show("cbg_error_prob_iid(0.01, 4)", 1 - (1 - mp.mpf("0.01")) ** 4)
show("cbgep_from_tbep(0.1, 8)", p8)
show("at_most_2_of_8(p8)", sum(binom_pmf(8, n, p8) for n in range(3)))
show("enumerated at_most_2_of_8(p8)", sum(enumerate_exact([p8] * 8, n) for n in range(3)))
show("binomial_1_of_8(p8)", binom_pmf(8, 1, p8))
show("exact([.1,.2,.3], 0)", enumerate_exact([mp.mpf("0.1"), mp.mpf("0.2"), mp.mpf("0.3")], 0))
show("exact([.1,.2,.3], 2)", enumerate_exact([mp.mpf("0.1"), mp.mpf("0.2"), mp.mpf("0.3")], 2))
show("exact([.1,.2], 1)", enumerate_exact([mp.mpf("0.1"), mp.mpf("0.2")], 1))
show("correlated(p=.2, rho=.7, M=4, N=0)", mp.mpf("0.3") * mp.mpf("0.8") ** 4 + mp.mpf("0.7") * mp.mpf("0.8"))
show("eesm([1, 10], beta=1)", -mp.log((mp.e**-1 + mp.e**-10) / 2))
show("logistic at midpoint + ln(9)/2, slope 2", 1 / (1 + mp.e ** (2 * mp.log(9) / 2)))
show("logistic at midpoint + 2/2*ln(9), slope 2", 1 / (1 + mp.e ** (2 * mp.log(9))))
show("trunc mean TN(93, 10, 46, 140)", trunc_normal_mean(93, 10, 46, 140))
show("trunc mean TN(1, 2, -4, 4)", trunc_normal_mean(1, 2, -4, 4))
fd = (mp.mpf(3) / mp.mpf("3.6")) * mp.mpf(4e9) / mp.mpf(299792458)
show("ar coefficient 3 km/h 4 GHz 0.5 ms", mp.besselj(0, 2 * mp.pi * fd * mp.mpf("0.0005")))
show("pathloss(10 m, 4 GHz, n=3)", 32.4 + 30 * mp.log10(10) + 20 * mp.log10(4))
show("prb noise dBm (30 kHz, NF 9)", -174 + 10 * mp.log10(12 * 30e3) + 9)
