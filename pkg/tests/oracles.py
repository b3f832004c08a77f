"""Reference implementations that share no code with ``edge_mi``.

Everything here is plain Python (or mpmath) over explicit cell tuples, so a
bug in the vectorized hashing, factorization or weight solver cannot cancel
against the same bug in the oracle.
"""
import math
from collections import Counter

import mpmath


def floor_cells(rows, epsilon, b=0.0):
    """Quantizer cells ``floor((x + b) / eps)`` of each row, as tuples."""
    return [tuple(math.floor((v + b) / epsilon) for v in row) for row in rows]


def plugin_divergence(x_keys, y_keys, g=lambda w: w * math.log(w)):
    """``sum_ij p_i q_j g(p_ij / (p_i q_j))`` over the observed cell pairs."""
    n = len(x_keys)
    cx, cy, cxy = Counter(x_keys), Counter(y_keys), Counter(zip(x_keys, y_keys))
    total = 0.0
    for (i, j), nij in cxy.items():
        pi, qj = cx[i] / n, cy[j] / n
        total += pi * qj * g(nij / n / (pi * qj))
    return total


def plugin_mi(x_keys, y_keys):
    """Shannon plug-in MI in the classic ``sum p log(p / (p p))`` form."""
    n = len(x_keys)
    cx, cy, cxy = Counter(x_keys), Counter(y_keys), Counter(zip(x_keys, y_keys))
    return math.fsum(
        (nij / n) * math.log(nij * n / (cx[i] * cy[j])) for (i, j), nij in cxy.items()
    )


def min_norm_weights(t_values, d, digits=50):
    """Minimum-norm ``w`` with ``sum w t**0 = 1`` and ``sum w t**i = 0`` (i = 1..d).

    Solves the KKT system ``[[I, A^T], [A, 0]] [w; lam] = [0; e1]`` in
    ``digits`` decimal digits.
    """
    with mpmath.workdps(digits):
        t = [mpmath.mpf(v) for v in t_values]
        T, m = len(t), d + 1
        kkt = mpmath.zeros(T + m, T + m)
        for k in range(T):
            kkt[k, k] = 1
            for i in range(m):
                kkt[k, T + i] = t[k] ** i
                kkt[T + i, k] = t[k] ** i
        rhs = mpmath.zeros(T + m, 1)
        rhs[T] = 1
        sol = mpmath.lu_solve(kkt, rhs)
        return [float(sol[k]) for k in range(T)]


def birthday_expected_collisions(n, f):
    """Expected number of colliding pairs among ``n`` uniform draws on ``f`` values."""
    return n * (n - 1) / 2.0 / f
