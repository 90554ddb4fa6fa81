"""High-precision reference values computed independently with mpmath."""

import itertools

import mpmath as mp

mp.mp.dps = 50


def coherent_c_sq(mu):
    mu = mp.mpf(mu)
    h = mu / 2
    d = mp.exp(-h) / 2
    return [
        d * (mp.cosh(h) + mp.cos(h)),
        d * (mp.sinh(h) + mp.sin(h)),
        d * (mp.cosh(h) - mp.cos(h)),
        d * (mp.sinh(h) - mp.sin(h)),
    ]


def pd_fock_closed(mu):
    mu = mp.mpf(mu)
    r = mp.sqrt(2)
    return 1 - mp.exp(-mu) * (r * mp.sinh(mu / r) + 2 * mp.cosh(mu / r) - 1)


def pd_coherent(mu):
    return 4 * min(coherent_c_sq(mu))


def f_value(mu, eta_l, eta_b):
    mu, eta_l, eta_b = mp.mpf(mu), mp.mpf(eta_l), mp.mpf(eta_b)
    t = eta_l * eta_b * mu
    x = 1 - mp.exp(-t)
    y = (1 - mp.exp(-t / 2)) ** 2
    return x * eta_b - 2 * y * (1 - eta_b) - pd_fock_closed(mu) * eta_b**2


def joint_click_bruteforce(n, eta_b, p_d):
    """Enumerate routing and detection of every photon individually."""
    table = [[0.0] * (n + 1) for _ in range(n + 1)]
    for route in itertools.product((0, 1), repeat=n):
        for detected in itertools.product((0, 1), repeat=n):
            p = 0.5**n
            k = l = 0
            for r, d in zip(route, detected):
                p *= eta_b if d else 1 - eta_b
                if d and r == 0:
                    k += 1
                elif d:
                    l += 1
            table[k][l] += p
    return [[p_d * v for v in row] for row in table]
