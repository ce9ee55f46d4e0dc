#!/usr/bin/env python3
"""Regenerates tests/fixtures/newform_5.4.a.a.json.

The space of weight-4 cusp forms on Gamma_0(5) is one-dimensional, so its
unique normalised newform equals the eta product eta(z)^4 eta(5z)^4.  We
expand that product with exact integer arithmetic, sanity-check the Hecke
relations (multiplicativity and a_{p^2} = a_p^2 - p^3), and read off the
Fricke eigenvalue from a_5 = -eps * 5.
"""

import json
import sys
from pathlib import Path

M = 320  # number of coefficients to emit


def eta_quotient_power4(shift, terms):
    """Coefficients of prod_{n>=1} (1 - q^{shift*n})^4, up to q^terms."""
    # Euler: prod (1 - x^n) = sum_k (-1)^k x^{k(3k-1)/2} over all integers k.
    euler = [0] * (terms + 1)
    euler[0] = 1
    k = 1
    while True:
        done = True
        sign = 1 if k % 2 == 0 else -1
        for kk in (k, -k):
            e = kk * (3 * kk - 1) // 2 * shift
            if e <= terms:
                euler[e] += sign
                done = False
        if done:
            break
        k += 1
    out = [0] * (terms + 1)
    out[0] = 1
    for _ in range(4):
        nxt = [0] * (terms + 1)
        for i, a in enumerate(out):
            if a == 0:
                continue
            for j, b in enumerate(euler):
                if i + j > terms:
                    break
                if b:
                    nxt[i + j] += a * b
        out = nxt
    return out


def direct_product_power4(shift, terms):
    """Same series by brute-force polynomial multiplication (crosscheck)."""
    out = [0] * (terms + 1)
    out[0] = 1
    for n in range(1, terms + 1):
        for _ in range(4):
            nxt = list(out)
            for i in range(terms + 1 - shift * n):
                if out[i]:
                    nxt[i + shift * n] -= out[i]
            out = nxt
    return out


def main():
    terms = M + 1
    e1 = eta_quotient_power4(1, terms)
    e5 = eta_quotient_power4(5, terms)
    assert e1 == direct_product_power4(1, terms)
    assert e5 == direct_product_power4(5, terms)
    prod = [0] * (terms + 1)
    for i, a in enumerate(e1):
        if a == 0:
            continue
        for j, b in enumerate(e5):
            if i + j > terms:
                break
            if b:
                prod[i + j] += a * b
    # q * prod gives the cusp form; a_n = prod[n-1].
    a = [0] + [prod[n - 1] for n in range(1, M + 1)]

    assert a[1] == 1, "not normalised"
    w = 4

    def is_prime(n):
        if n < 2:
            return False
        d = 2
        while d * d <= n:
            if n % d == 0:
                return False
            d += 1
        return True

    primes = [p for p in range(2, M + 1) if is_prime(p)]
    # Hecke multiplicativity a_{mn} = a_m a_n for coprime m, n.
    for m in range(2, M + 1):
        for n in range(2, M // m + 1):
            if m * n <= M and gcd(m, n) == 1:
                assert a[m * n] == a[m] * a[n], (m, n)
    # a_{p^2} = a_p^2 - p^{w-1} for p not dividing the level.
    for p in primes:
        if p != 5 and p * p <= M:
            assert a[p * p] == a[p] ** 2 - p ** (w - 1), p
    # a_{5^j} = a_5^j (U_5 eigenvalue at the level prime).
    assert a[25] == a[5] ** 2
    # Deligne bound |a_n| <= d0(n) n^{(w-1)/2}.
    for n in range(1, M + 1):
        d0 = sum(1 for d in range(1, n + 1) if n % d == 0)
        assert a[n] ** 2 <= d0 ** 2 * n ** (w - 1), n

    eps = -a[5] // 5 ** ((w - 2) // 2)
    assert eps in (1, -1)
    assert all(isinstance(x, int) for x in a)

    doc = {
        "level": 5,
        "weight": w,
        "label": "5.4.a.a",
        "fricke": eps,
        "coefficients": a[1:],
    }
    out = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "newform_5.4.a.a.json"
    text = json.dumps(doc, indent=1)
    out.write_text(text + "\n")
    print(f"wrote {out} ({M} coefficients, a_2={a[2]}, a_3={a[3]}, a_5={a[5]}, fricke={eps})")


def gcd(x, y):
    while y:
        x, y = y, x % y
    return x


if __name__ == "__main__":
    sys.exit(main())
