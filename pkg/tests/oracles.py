"""Independent reference computations shared by the tests."""
import mpmath
import numpy as np

mpmath.mp.dps = 40


def fornberg_weights(z, x, m):
    """Finite-difference weights at ``z`` for derivatives ``0..m`` on nodes ``x``."""
    n = len(x)
    c = np.zeros((n, m + 1))
    c1, c4 = 1.0, x[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2, c5, c4 = 1.0, c4, x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c


def taylor_Q(rho, eps, alpha, n):
    """Degree-n Taylor polynomial of rho^alpha/(alpha+1) about eps^2 via binomial coefficients."""
    rho, eps, alpha = mpmath.mpf(rho), mpmath.mpf(eps), mpmath.mpf(alpha)
    e2 = eps**2
    return sum(mpmath.binomial(alpha, k) * e2 ** (alpha - k) * (rho - e2) ** k
               for k in range(n + 1)) / (alpha + 1)


def taylor_q(rho, eps, alpha, n):
    """d/drho [rho * taylor_Q], differentiated symbolically term by term."""
    rho, eps, alpha = mpmath.mpf(rho), mpmath.mpf(eps), mpmath.mpf(alpha)
    e2 = eps**2
    total = 0
    for k in range(n + 1):
        b = mpmath.binomial(alpha, k) * e2 ** (alpha - k)
        total += b * ((rho - e2) ** k + (k * rho * (rho - e2) ** (k - 1) if k else 0))
    return total / (alpha + 1)


def rational_F_mp(rho, eps, alpha):
    return mpmath.quad(lambda s: 1 / (s ** (-mpmath.mpf(alpha)) + eps), [0, rho])


def rational_F_midpoint(rho, eps, alpha, panels=10_000_000, chunk=1_000_000):
    """Midpoint sum of int_0^{rho^-alpha} p u^(p-1)/(u+eps) du, p = -1/alpha (s = u^p)."""
    p = -1.0 / alpha
    U = rho ** (-alpha)
    h = U / panels
    total = 0.0
    for start in range(0, panels, chunk):
        u = (np.arange(start, min(start + chunk, panels)) + 0.5) * h
        total += np.sum(p * u ** (p - 1) / (u + eps))
    return total * h


def shift_F_mp(rho, eps, alpha):
    rho, eps, alpha = mpmath.mpf(rho), mpmath.mpf(eps), mpmath.mpf(alpha)
    return ((rho + eps**2) ** (alpha + 1) - eps ** (2 * (alpha + 1))) / (alpha + 1)


def dft_oracle(values, a, b):
    """Direct O(N^2) sum: c_l = (1/N) sum_j psi_j exp(-i mu_l (x_j - a))."""
    N = len(values)
    x = a + np.arange(N) * (b - a) / N
    out = {}
    for l in range(-N // 2, N // 2):
        mu = 2 * np.pi * l / (b - a)
        out[l] = sum(values[j] * np.exp(-1j * mu * (x[j] - a)) for j in range(N)) / N
    return out


def free_gaussian(x, t):
    # i psi_t = -psi_xx with psi(0) = pi^(-1/4) exp(-x^2/2)
    s = 1 + 2j * t
    return np.pi**-0.25 * s**-0.5 * np.exp(-x**2 / (2 * s))
