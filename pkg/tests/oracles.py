"""Independent closed-form oracles for the unit disk, written without the package."""
import math


def omega(n, s):
    return (n / (1 - s ** (2 * n)) - (n + 1) / 2) / (math.pi * s * s)


def r_of_s(n, s):
    return s * s * (1 - s ** (2 * n)) / (n - 1 + (n + 1) * s ** (2 * n))


def s_of_r(n, r, lo=None):
    """Bisection on the branch of r(s) that tends to s = 1."""
    if lo is None:
        grid = [i / 2000 for i in range(1, 2000)]
        lo = max(grid, key=lambda s: r_of_s(n, s))
    hi = 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if r_of_s(n, mid) > r:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def green(x, y):
    # image formula: -(1/2pi)(log|x-y| - log|x-R(y)| - log|y|), R(y) = y/|y|^2
    if y == 0:
        return -math.log(abs(x)) / (2 * math.pi)
    ry = y / abs(y) ** 2
    return -(math.log(abs(x - y)) - math.log(abs(x - ry)) - math.log(abs(y))) / (2 * math.pi)


def robin(z):
    return -math.log(1 - abs(z) ** 2) / (2 * math.pi)
