"""Brute-force and closed-form references that do not go through the product formula."""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import product

from regcomp.arith import harmonic, rising
from regcomp.combinat import Composition, Partition, enumerate_compositions, multinomial_count


def ewens_cpf(theta, c):
    """theta^k n! / (theta)_n * prod 1/Lambda_j, tail sums."""
    c = Composition(c)
    out = Fraction(theta) ** c.k * math.factorial(c.n) / rising(Fraction(theta), c.n)
    for tail in c.tail_sums():
        out /= tail
    return out


def alpha_alpha_cpf(alpha, c):
    """f(c) alpha^k / (alpha)_n * prod (1-alpha)_{lambda_j - 1}."""
    c = Composition(c)
    a = Fraction(alpha)
    out = multinomial_count(c) * a ** c.k / rising(a, c.n)
    for part in c:
        out *= rising(1 - a, part - 1)
    return out


def alpha_zero_cpf(alpha, c):
    """lambda_k alpha^(k-1) prod (1-alpha)_{lambda_j-1} / lambda_j!."""
    c = Composition(c)
    a = Fraction(alpha)
    out = c[-1] * a ** (c.k - 1)
    for part in c:
        out *= rising(1 - a, part - 1) / math.factorial(part)
    return out


def gamma_harmonic_cpf(theta, c):
    """n!/(theta)_n * prod 1/(lambda_j h_theta(Lambda_j))."""
    c = Composition(c)
    t = Fraction(theta)
    out = math.factorial(c.n) / rising(t, c.n)
    for part, tail in zip(c, c.tail_sums()):
        out /= part * harmonic(t, tail)
    return out


def crp_ppf_table(alpha, theta, n):
    """Exact law of the restaurant after n customers, by forward recursion over seatings."""
    a, t = Fraction(alpha), Fraction(theta)
    law = {(1,): Fraction(1)}
    for j in range(1, n):
        nxt = {}
        for tables, p in law.items():
            k = len(tables)
            new = tuple(sorted(tables + (1,), reverse=True))
            nxt[new] = nxt.get(new, 0) + p * (t + k * a) / (j + t)
            for i in range(k):
                grown = list(tables)
                grown[i] += 1
                key = tuple(sorted(grown, reverse=True))
                nxt[key] = nxt.get(key, 0) + p * (tables[i] - a) / (j + t)
        law = nxt
    return {Partition(k): v for k, v in law.items()}


def point_stick_cpf(x: float, n: int, gaps: int = 400):
    """Balls fall in gap g with probability x(1-x)^(g-1); read occupied gaps left to right.

    For each composition, sums over increasing gap sequences g_1 < ... < g_k among
    the first ``gaps`` gaps with a running DP over gaps.
    """
    probs = [x * (1 - x) ** g for g in range(gaps)]
    out = {}
    for c in enumerate_compositions(n):
        # ways[i]: weight of placing the first i parts in the gaps seen so far
        ways = [1.0] + [0.0] * c.k
        for p in probs:
            for i in range(c.k, 0, -1):
                ways[i] += ways[i - 1] * p ** c[i - 1]
        out[c] = multinomial_count(c) * ways[c.k]
    return out


def green_from_table(table, n):
    """g(n, j) = P(the binary code has a 1 at position j)."""
    out = [Fraction(0)] * n
    for c, p in table.entries.items():
        for head in (0,) + c.head_sums()[:-1]:
            out[head] += p
    return out


def mean_blocks_from_table(table):
    return sum((p * len(c) for c, p in table.entries.items()), Fraction(0))


def ranks_law(eta, k):
    """Exact law of the arrangement from initial ranks with denominators eta + j - 1."""
    eta = Fraction(eta)
    law = {}
    for ranks in product(*(range(1, j + 1) for j in range(1, k + 1))):
        p = Fraction(1)
        for j, r in enumerate(ranks, start=1):
            if j == 1:
                continue
            p *= (eta if r == j else 1) / (eta + j - 1)
        row = []
        for j, r in enumerate(ranks, start=1):
            row.insert(r - 1, j)
        law[tuple(row)] = law.get(tuple(row), 0) + p
    return law
