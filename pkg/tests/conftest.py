import itertools

import numpy as np
import pytest


def truncated_autocov(a, eps_var, maxlag):
    """gamma(k) = Var(eps) * sum_j a_j a_{j+k} for the truncated linear process, by direct sums."""
    a = np.asarray(a, dtype=float)
    return np.array([eps_var * float(np.dot(a[: a.size - k], a[k:])) if k < a.size else 0.0
                     for k in range(maxlag + 1)])


def partial_sum_variance(a, eps_var, l):
    """Var(Y_1 + ... + Y_l) = sum_{|k|<l} (l - |k|) gamma(k)."""
    g = truncated_autocov(a, eps_var, l - 1)
    k = np.arange(1, l)
    return l * g[0] + 2.0 * float(np.dot(l - k, g[1:]))


def brute_volterra(r, a, eps, n):
    """T_{n,r} by explicit enumeration; eps[t + M - 1] holds eps_t for t = 1-M..n."""
    a = np.asarray(a, dtype=float)
    m = a.size - 1
    total = 0.0
    for i in range(1, n + 1):
        if r == 1:
            total += sum(a[j] * eps[i - j + m - 1] for j in range(m + 1))
        else:
            for j1, j2 in itertools.combinations(range(m + 1), 2):
                total += a[j1] * a[j2] * eps[i - j1 + m - 1] * eps[i - j2 + m - 1]
    return total


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
