#!/usr/bin/env python3
# Copyright 2026 The hsep Authors
# SPDX-License-Identifier: Apache-2.0
"""Independent high-precision oracles for the golden files.

Run from this directory: python3 generate.py
"""
import mpmath as mp

mp.mp.dps = 40


def constants(q, nu, alpha, rho, J):
    q, nu, alpha, rho = map(mp.mpf, (q, nu, alpha, rho))
    g = (1 - rho) / (1 - nu * rho)
    al = [alpha * q**j for j in range(J + 1)]
    a = [x * g / (1 + x * g) for x in al]
    b = g / (1 - g)
    bp = nu * g / (1 - nu * g)
    rs = 1 / (b - bp)
    mu = [(a[j] - a[j + 1]) * rs for j in range(J)]
    lam = [(1 + al[j] * g) / (1 + q * al[j] * g) for j in range(J)]
    sig = [a[j] ** 2 - a[j + 1] ** 2 + (a[j] - a[j + 1]) * (b + bp) for j in range(J)]
    eps = -mp.log(q)
    tau = eps / (a[0] ** 2 - a[J] ** 2 + (a[0] - a[J]) * (b + bp))
    return dict(gamma=g, a=a, b=b, b_prime=bp, r_star=rs, mu=mu, lam=lam, sigma=sig, tau_star=tau)


def tilted(q, nu, alpha, rho, J, s, nmax):
    c = constants(q, nu, alpha, rho, J)
    q, nu, alpha, rho = map(mp.mpf, (q, nu, alpha, rho))
    j = s % J
    a = alpha * q**j
    jump = a * (1 - q) / (1 + a)
    ratio = (nu + a) / (1 + a)
    out = [c["lam"][j] * (1 - jump)]
    for n in range(1, nmax + 1):
        out.append(c["lam"][j] * rho**n * jump * ratio ** (n - 1) * (1 - nu) / (1 + a))
    return -c["mu"][j], out


def convolve(x, y):
    out = [mp.mpf(0)] * (len(x) + len(y) - 1)
    for i, u in enumerate(x):
        for k, v in enumerate(y):
            out[i + k] += u * v
    return out


def philox(ctr, key):
    m0, m1 = 0xD2511F53, 0xCD9E8D57
    w0, w1 = 0x9E3779B9, 0xBB67AE85
    c = list(ctr)
    k = list(key)
    for _ in range(10):
        p0 = m0 * c[0]
        p1 = m1 * c[2]
        c = [((p1 >> 32) ^ c[1] ^ k[0]) & 0xFFFFFFFF, p1 & 0xFFFFFFFF,
             ((p0 >> 32) ^ c[3] ^ k[1]) & 0xFFFFFFFF, p0 & 0xFFFFFFFF]
        k = [(k[0] + w0) & 0xFFFFFFFF, (k[1] + w1) & 0xFFFFFFFF]
    return c


def main():
    with open("constants.txt", "w") as f:
        f.write("# q nu alpha rho J | gamma b b_prime r_star tau_star | per phase: mu lambda sigma\n")
        for args in [(0.5, 0.25, 1.0, 0.5, 1), (0.5, 0.25, 1.0, 0.5, 2), (0.9, 0.5, 2.0, 0.3, 3)]:
            c = constants(*args)
            row = list(args) + [c["gamma"], c["b"], c["b_prime"], c["r_star"], c["tau_star"]]
            for j in range(args[4]):
                row += [c["mu"][j], c["lam"][j], c["sigma"][j]]
            f.write(" ".join(mp.nstr(mp.mpf(v), 25) if not isinstance(v, int) else str(v) for v in row) + "\n")

    # Tilted kernel and the 5-step heat kernel for (q, nu, alpha, rho, J) = (0.9, 0.5, 2, 0.3, 2).
    q, nu, alpha, rho, J = 0.9, 0.5, 2.0, 0.3, 2
    off, w = tilted(q, nu, alpha, rho, J, 1, 60)
    with open("tilted_q0.9_nu0.5_a2_rho0.3_J2_s1.txt", "w") as f:
        f.write(mp.nstr(off, 25) + "\n")
        f.writelines(mp.nstr(x, 25) + "\n" for x in w)
    acc = [mp.mpf(1)]
    offset = mp.mpf(0)
    for s in range(5):
        o, k = tilted(q, nu, alpha, rho, J, s, 60)
        acc = convolve(acc, k)
        offset += o
    with open("heat_q0.9_nu0.5_a2_rho0.3_J2_t5.txt", "w") as f:
        f.write(mp.nstr(offset, 25) + "\n")
        f.writelines(mp.nstr(x, 25) + "\n" for x in acc[:120])

    with open("philox.txt", "w") as f:
        f.write("# key0 key1 ctr0 ctr1 ctr2 ctr3 -> out0 out1 out2 out3 (hex)\n")
        cases = [((0, 0), (0, 0, 0, 0)),
                 ((0xFFFFFFFF, 0xFFFFFFFF), (0xFFFFFFFF,) * 4),
                 ((0xA4093822, 0x299F31D0), (0x243F6A88, 0x85A308D3, 0x13198A2E, 0x03707344))]
        for key, ctr in cases:
            out = philox(ctr, key)
            f.write(" ".join("%08x" % v for v in list(key) + list(ctr) + out) + "\n")


if __name__ == "__main__":
    main()
