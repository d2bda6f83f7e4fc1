"""Reference laws for normalized partial sums.

Hermite-process marginals are approximated by partial sums of the discrete
Volterra forms

    U_{i,1} = sum_j a_j eps_{i-j}
    U_{i,2} = sum_{0 <= j1 < j2} a_{j1} a_{j2} eps_{i-j1} eps_{i-j2}

normalized by their exact standard deviation.  The squared norm of the
limit, zeta(r, beta), is computed by quadrature over the simplex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy import fft as sfft
from scipy import integrate, special

from .blocks import EmpiricalDist
from .errors import ConfigError, QuadratureError
from .process import CoefficientSeq, InnovationSpec, draw_innovations


@dataclass(frozen=True)
class HermiteSpec:
    r: int
    beta: float
    n: int = 2000
    truncation: int = 10_000

    def __post_init__(self):
        if self.r not in (1, 2):
            raise ConfigError(f"Volterra order r={self.r} is not supported (only 1 and 2)")
        upper = 0.5 + 1.0 / (2 * self.r)
        if not 0.5 < self.beta < upper:
            raise ConfigError(
                f"beta={self.beta} is outside the Hermite window (1/2, {upper:g}) for r={self.r}"
            )
        if self.n < 1:
            raise ConfigError("grid length n must be positive")

    @property
    def H(self) -> float:
        return 1.0 - self.r * (self.beta - 0.5)

    def coeffs(self) -> CoefficientSeq:
        return CoefficientSeq(self.beta, 1.0, self.truncation, tail_tol=None)


@dataclass(frozen=True)
class ZetaConstant:
    r: int
    beta: float
    value: float
    error: float


def _check_order(r):
    if r not in (1, 2):
        raise ConfigError(f"Volterra order r={r} is not supported (only 1 and 2)")


def _causal_filter(eps: np.ndarray, a: np.ndarray) -> np.ndarray:
    if len(a) <= 64 or len(eps) <= 64:
        return np.convolve(eps, a, mode="valid")
    from scipy.signal import fftconvolve

    return fftconvolve(eps, a, mode="valid")


def volterra_sum(r: int, coeffs: CoefficientSeq, eps, n: int) -> float:
    """T_{n,r} = sum_{i=1}^n U_{i,r}.

    ``eps`` holds eps_{1-M}, ..., eps_n (length n + M).  The order-2 form
    uses sum_{j1<j2} x_j1 x_j2 = (X^2 - sum_j x_j^2) / 2 with both terms
    obtained by causal filtering.
    """
    _check_order(r)
    if n < 1:
        raise ValueError("n must be positive")
    a = coeffs.array()
    eps = np.asarray(eps, dtype=float)
    if eps.size != n + coeffs.truncation:
        raise ValueError(f"expected {n + coeffs.truncation} innovations, got {eps.size}")
    x = _causal_filter(eps, a)
    if r == 1:
        return float(np.sum(x))
    q = _causal_filter(eps * eps, a * a)
    return float(np.sum(x * x - q) / 2.0)


def _autocov(a: np.ndarray, maxlag: int) -> np.ndarray:
    """g(k) = sum_m a_m a_{m+k} for k = 0..maxlag."""
    size = sfft.next_fast_len(2 * len(a), real=True)
    f = sfft.rfft(a, size)
    g = sfft.irfft(f * np.conj(f), size)[: maxlag + 1]
    out = np.zeros(maxlag + 1)
    out[: min(maxlag + 1, len(a))] = g[: min(maxlag + 1, len(a))]
    return out


def exact_norm_sq(r: int, coeffs: CoefficientSeq, n: int, eps_var: float = 1.0) -> float:
    """E T_{n,r}^2 for iid innovations with variance ``eps_var``.

    r = 1: eps_var * sum_{|k|<n} (n-|k|) g(k)
    r = 2: eps_var^2 / 2 * sum_{|k|<n} (n-|k|) (g(k)^2 - g2(k))
    with g the autocovariance of a and g2 that of a^2.
    """
    _check_order(r)
    a = coeffs.array()
    maxlag = n - 1
    w = (n - np.arange(maxlag + 1)).astype(float)
    w[1:] *= 2.0
    g = _autocov(a, maxlag)
    if r == 1:
        return eps_var * float(np.dot(w, g))
    g2 = _autocov(a * a, maxlag)
    return eps_var**2 * 0.5 * float(np.dot(w, g * g - g2))


def linear_sum_variance(
    beta: float, n: int, truncation: int = 2_000_000, untruncated: bool = True
) -> float:
    """||T_{n,1}||^2 for a_k = (1+k)^-beta and unit-variance innovations.

    Summed over innovation indices: sum_s b_s^2 with b_s = sum_{i=1}^n a_{i-s}.
    With ``untruncated`` the contribution of coefficients beyond
    ``truncation`` is added through the midpoint-rule expansion of
    sum_m (1+m)^-beta, so the result approximates the infinite sequence.
    """
    m = truncation
    k = np.arange(m + 1, dtype=float)
    c = np.concatenate([[0.0], np.cumsum((1.0 + k) ** (-beta))])
    s = np.arange(1 - m, n + 1)
    lo = np.maximum(1, s) - s
    hi = np.minimum(n - s, m)
    b = c[hi + 1] - c[lo]
    total = float(np.dot(b, b))
    if not untruncated:
        return total
    e = 1.0 - beta

    def mid(lo_m, hi_m):
        # sum_{m=lo_m}^{hi_m} (1+m)^-beta, lo_m large
        return ((hi_m + 1.5) ** e - (lo_m + 0.5) ** e) / e

    # windows with s >= 1-m that reach past the truncation point
    over = (n - s) > m
    extra = np.where(over, mid(np.maximum(m + 1, lo), n - s), 0.0)
    total += float(np.dot(2.0 * b + extra, extra))
    # windows starting before 1-m lie entirely beyond it
    # x = x0 / u maps [x0, inf) onto (0, 1]; the integrand then behaves like u^(2 beta - 2)
    x0 = m + 0.5

    def g(u):
        if u <= 0.0:
            return n * n * x0 ** (1.0 - 2.0 * beta)
        x = x0 / u
        return mid(x, x + n - 1) ** 2 * x0 * u ** (-2.0 * beta)

    tail, _ = integrate.quad(g, 0.0, 1.0, weight="alg", wvar=(2.0 * beta - 2.0, 0.0), limit=200)
    return total + tail


def _sample_weights(a: np.ndarray, n: int) -> np.ndarray:
    """b_s = sum_{i=1}^n a_{i-s} for innovation positions s = 1-M..n."""
    m = len(a) - 1
    c = np.concatenate([[0.0], np.cumsum(a)])
    s = np.arange(1 - m, n + 1)
    lo = np.maximum(1, s) - s
    hi = np.minimum(n - s, m)
    return c[hi + 1] - c[lo]


def sample_volterra(
    spec: HermiteSpec,
    reps: int,
    seed: int,
    innovations: InnovationSpec = InnovationSpec("gaussian"),
    chunk: int = 256,
) -> np.ndarray:
    """``reps`` draws of T_{n,r}, one innovation substream per draw batch."""
    coeffs = spec.coeffs()
    a = coeffs.array()
    n, m = spec.n, spec.truncation
    length = n + m
    out = np.empty(reps)
    if spec.r == 1:
        b = _sample_weights(a, n)
    else:
        b2 = _sample_weights(a * a, n)
        size = sfft.next_fast_len(length, real=True)
        fa = sfft.rfft(a, size)
    for k, start in enumerate(range(0, reps, chunk)):
        cnt = min(chunk, reps - start)
        eps = draw_innovations(innovations, cnt * length, seed, (k,)).reshape(cnt, length)
        if spec.r == 1:
            out[start : start + cnt] = eps @ b
        else:
            # circular convolution of length >= n + M leaves positions M..M+n-1 exact
            x = sfft.irfft(sfft.rfft(eps, size, axis=1) * fa, size, axis=1)[:, m : m + n]
            out[start : start + cnt] = 0.5 * (np.einsum("ij,ij->i", x, x) - (eps * eps) @ b2)
    return out


def sample_limit(
    spec: HermiteSpec,
    reps: int,
    seed: int,
    innovations: InnovationSpec = InnovationSpec("gaussian"),
) -> EmpiricalDist:
    """Draws of T_{n,r} / ||T_{n,r}|| with the norm computed exactly."""
    if reps < 1:
        raise ValueError("reps must be positive")
    draws = sample_volterra(spec, reps, seed, innovations)
    norm = math.sqrt(exact_norm_sq(spec.r, spec.coeffs(), spec.n, innovations.variance))
    return EmpiricalDist(draws / norm)


# ---------------------------------------------------------------------------
# zeta(r, beta) = int_{u_1<...<u_r<1} [int_0^1 prod_k g(v - u_k) dv]^2 du


def _kernel_1(u: float, beta: float) -> float:
    """int_0^1 (v-u)_+^-beta dv."""
    e = 1.0 - beta
    if u >= 0.0:
        return (1.0 - u) ** e / e
    x = -u
    # (1+x)^e - x^e without cancellation for large x
    return x**e * math.expm1(e * math.log1p(1.0 / x)) / e


def _partial_2_scaled(x: float, d: float, beta: float) -> float:
    """d^beta * int_0^x w^-beta (w+d)^-beta dw."""
    if x <= 0.0:
        return 0.0
    e = 1.0 - beta
    return x**e / e * special.hyp2f1(beta, e, 1.0 + e, -x / d)


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(40)
_GL_V = 0.5 * (_GL_NODES + 1.0)
_GL_W = 0.5 * _GL_WEIGHTS


def _kernel_2_scaled(u2: float, d: float, beta: float) -> float:
    """d^beta * int_{max(0,u2)}^1 (v-u1)^-beta (v-u2)^-beta dv, u1 = u2 - d, for u2 >= -1."""
    return _partial_2_scaled(1.0 - u2, d, beta) - _partial_2_scaled(max(0.0, -u2), d, beta)


def _kernel_2(u2: float, d: float, beta: float) -> float:
    """int_{max(0,u2)}^1 (v-u1)^-beta (v-u2)^-beta dv with u1 = u2 - d."""
    if u2 < -1.0:
        # singularities sit at distance > 1 from [0, 1]: Gauss-Legendre is exact to rounding
        return float(np.dot(_GL_W, (_GL_V - u2 + d) ** (-beta) * (_GL_V - u2) ** (-beta)))
    return d ** (-beta) * _kernel_2_scaled(u2, d, beta)


def _far_kernel(big_u: float, t: float, beta: float, scaled: bool) -> float:
    """U^(2 beta) * kernel at u2 = -U, d = U t; times t^beta when ``scaled``."""
    z = _GL_V / big_u + 1.0
    if scaled:
        return float(np.dot(_GL_W, (z / t + 1.0) ** (-beta) * z ** (-beta)))
    return float(np.dot(_GL_W, (z + t) ** (-beta) * z ** (-beta)))


def hermite_norm_sq(r: int, beta: float) -> float:
    """Closed form of zeta(r, beta): B(1-beta, 2beta-1)^r / r! * 2 / ((1-D)(2-D)), D = r(2beta-1)."""
    _check_order(r)
    dd = r * (2 * beta - 1)
    return special.beta(1 - beta, 2 * beta - 1) ** r / math.factorial(r) * 2 / ((1 - dd) * (2 - dd))


def zeta(r: int, beta: float, tol: float = 1e-6) -> ZetaConstant:
    """Squared norm of the order-``r`` Hermite marginal at t = 1, by adaptive quadrature.

    Raises :class:`QuadratureError` carrying the best estimate when the
    reported error exceeds ``tol``.
    """
    _check_order(r)
    upper = 0.5 + 1.0 / (2 * r)
    if not 0.5 < beta < upper:
        raise ConfigError(f"beta={beta} is outside (1/2, {upper:g}) for r={r}")
    if not tol > 0:
        raise ValueError("tol must be positive")
    if r == 1:
        pieces = [
            integrate.quad(lambda u: _kernel_1(u, beta) ** 2, 0.0, 1.0, epsabs=tol / 10, limit=200),
            integrate.quad(lambda x: _kernel_1(-x, beta) ** 2, 0.0, np.inf, epsabs=tol / 10, limit=200),
        ]
    else:
        # tails: f^2 ~ d^(-2 beta) as d -> inf and the inner integral ~ |u2|^(1 - 4 beta);
        # the substitutions d = x^-p and u2 = -y^-q turn both into bounded integrands
        p = 1.0 / (2 * beta - 1)
        q = 1.0 / (4 * beta - 2)

        opts = dict(epsabs=tol / 1000, epsrel=1e-12, limit=400)

        def inner(u2):
            # d in (0, 1] directly (algebraic singularity at d -> 0 when u2 >= 0), d = x^-p beyond
            near = lambda d: _kernel_2(u2, d, beta) ** 2
            tail = lambda x: p * _kernel_2_scaled(u2, x ** (-p), beta) ** 2 if x > 0 else 0.0
            return integrate.quad(near, 0.0, 1.0, **opts)[0] + integrate.quad(tail, 0.0, 1.0, **opts)[0]

        def far(y):
            # u2 = -U with U = y^-q and d = U t; all powers of U cancel against the Jacobian
            if y <= 0:
                return 0.0
            big_u = y ** (-q)
            near = lambda t: _far_kernel(big_u, t, beta, False) ** 2
            tail = lambda x: p * _far_kernel(big_u, x ** (-p), beta, True) ** 2 if x > 0 else 0.0
            val = integrate.quad(near, 0.0, 1.0, **opts)[0] + integrate.quad(tail, 0.0, 1.0, **opts)[0]
            return q * val

        pieces = [
            integrate.quad(inner, 0.0, 1.0, epsabs=tol / 10, limit=200),
            integrate.quad(inner, -1.0, 0.0, epsabs=tol / 10, limit=200),
            integrate.quad(far, 0.0, 1.0, epsabs=tol / 10, limit=200),
        ]
    value = sum(p[0] for p in pieces)
    err = sum(p[1] for p in pieces)
    if not err <= tol:
        raise QuadratureError(
            f"zeta({r}, {beta}) error estimate {err:.3g} exceeds tol {tol:g}", value, err
        )
    return ZetaConstant(r, beta, value, err)


def normal_cdf(x):
    """Standard normal CDF."""
    out = special.ndtr(x)
    return float(out) if np.ndim(out) == 0 else out


CDF = Callable[[np.ndarray], np.ndarray]


def ks_distance(d: EmpiricalDist, reference: Union[CDF, EmpiricalDist]) -> float:
    """sup_x |F_d(x) - F_ref(x)|.

    Against a continuous CDF the sup is taken over both one-sided limits at
    each atom of ``d``; against another empirical distribution the two step
    functions are compared at every atom of either.
    """
    if isinstance(reference, EmpiricalDist):
        pts = np.union1d(d.values, reference.values)
        return float(np.max(np.abs(d.cdf(pts) - reference.cdf(pts))))
    x = d.values
    ref = np.asarray(reference(x), dtype=float)
    right = np.abs(d.cdf(x) - ref)
    left = np.abs(d.cdf_left(x) - ref)
    return float(max(right.max(), left.max()))
