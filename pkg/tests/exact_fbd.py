"""Exact rational FBD-alpha on the full lattice, written from the definition.

Shares no code with the package: states are ``{site: Fraction}`` over all
of Z and every quantity is computed by direct summation.
"""
from fractions import Fraction


def boundary(mu, alpha):
    a2 = alpha / 2
    return max(x for x in mu if sum(m for y, m in mu.items() if y >= x) >= a2)


def split(mu, alpha):
    a2 = alpha / 2
    beta = boundary(mu, alpha)
    frozen = {}
    beyond = sum(m for y, m in mu.items() if y > beta)
    for y, m in mu.items():
        if abs(y) > beta:
            frozen[y] = m
    if beta > 0:
        frozen[beta] = a2 - beyond
        frozen[-beta] = a2 - beyond
    else:
        frozen[0] = 2 * (a2 - beyond)
    free = {y: mu[y] - frozen.get(y, 0) for y in mu}
    return free, frozen, beta


def step(mu, alpha):
    free, frozen, _ = split(mu, alpha)
    out = {}
    for y, m in frozen.items():
        out[y] = out.get(y, 0) + m
    for y, m in free.items():
        if m:
            out[y - 1] = out.get(y - 1, 0) + m / 2
            out[y + 1] = out.get(y + 1, 0) + m / 2
    return {y: m for y, m in out.items() if m}


def trajectory(alpha, steps):
    alpha = Fraction(alpha)
    mu = {0: Fraction(1)}
    out = [mu]
    for _ in range(steps):
        mu = step(mu, alpha)
        out.append(mu)
    return out
