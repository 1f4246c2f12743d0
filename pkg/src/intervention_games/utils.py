import math
import itertools

from typing import Callable, Tuple, Union

import numpy as np

INV_PHI = (math.sqrt(5) - 1) / 2
INV_PHI_SQ = (3 - math.sqrt(5)) / 2

def simplex_grid(dim : int, step : float) -> np.ndarray:
    """All probability vectors of length `dim` whose entries are multiples of
    `step`, in lexicographic order. Returns an array of shape (K, dim).
    """

    assert dim >= 1, "Simplex dimension must be at least 1"
    assert 0 < step <= 1, "Grid step must be in (0, 1], got %s" % step

    n = max(1, int(round(1 / step)))

    if dim == 1:
        return np.ones((1, 1))

    points = []
    for head in itertools.product(range(n + 1), repeat=dim - 1):
        total = sum(head)
        if total <= n:
            points.append(head + (n - total,))

    return np.array(points, dtype=float) / n

def uniform_grid(lower : float, upper : float, points : int) -> np.ndarray:
    """`points` equally spaced values from `lower` to `upper` inclusive.

    Computed as integer multiples of the spacing so that grid points which
    are exactly representable (e.g. 4.0 on [0, 12] with 61 points) come
    out exact.
    """

    assert points >= 1, "A grid needs at least one point"

    if points == 1:
        return np.array([float(lower)])

    return lower + (upper - lower) * np.arange(points) / (points - 1)

def open_interval_samples(lower : float, upper : float, points : int) -> np.ndarray:
    """`points` equally spaced values strictly inside (lower, upper). Empty
    when lower >= upper.
    """

    if lower >= upper:
        return np.empty(0)

    return uniform_grid(lower, upper, points + 2)[1:-1]

def golden_section_min(
    func : Callable[[np.ndarray], np.ndarray],
    lower : Union[float, np.ndarray],
    upper : Union[float, np.ndarray],
    tolerance : float = 1e-8,
) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorised golden-section minimisation of `func` over the brackets
    [lower, upper], one bracket per element.

    `func` maps an array of abscissae to an array of values of the same
    shape. Both endpoints are always evaluated and win ties against the
    interior estimate, the upper endpoint first.
    """

    lower, upper = np.broadcast_arrays(np.asarray(lower, dtype=float), np.asarray(upper, dtype=float))
    lower = lower.copy()
    upper = upper.copy()

    f_lower = func(lower)
    f_upper = func(upper)

    width = float(np.max(upper - lower)) if lower.size > 0 else 0.0
    iterations = int(math.ceil(math.log(tolerance / width) / math.log(INV_PHI))) if width > tolerance else 0

    a = lower.copy()
    b = upper.copy()
    c = a + INV_PHI_SQ * (b - a)
    d = a + INV_PHI * (b - a)
    f_c = func(c)
    f_d = func(d)

    for _ in range(iterations):
        left = f_c < f_d

        b = np.where(left, d, b)
        a = np.where(left, a, c)

        new_c = a + INV_PHI_SQ * (b - a)
        new_d = a + INV_PHI * (b - a)

        # only one of the two interior points needs a fresh evaluation per
        # element, but the vectorised form evaluates both
        c, d = np.where(left, new_c, d), np.where(left, c, new_d)
        f_c, f_d = np.where(left, func(c), f_d), np.where(left, f_c, func(d))

    x_mid = np.where(f_c < f_d, c, d)
    f_mid = np.minimum(f_c, f_d)

    best_x = upper.copy()
    best_f = f_upper.copy()

    use_lower = f_lower < best_f
    best_x = np.where(use_lower, lower, best_x)
    best_f = np.where(use_lower, f_lower, best_f)

    use_mid = f_mid < best_f
    best_x = np.where(use_mid, x_mid, best_x)
    best_f = np.where(use_mid, f_mid, best_f)

    return best_x, best_f

def golden_section_max(
    func : Callable[[np.ndarray], np.ndarray],
    lower : Union[float, np.ndarray],
    upper : Union[float, np.ndarray],
    tolerance : float = 1e-8,
) -> Tuple[np.ndarray, np.ndarray]:
    x, f = golden_section_min(lambda x: -func(x), lower, upper, tolerance)
    return x, -f

def central_difference(func : Callable[[float], float], x : float, h : float) -> float:
    return (func(x + h) - func(x - h)) / (2 * h)

def right_difference(func : Callable[[float], float], x : float, h : float) -> float:
    return (func(x + h) - func(x)) / h

def second_difference(func : Callable[[float], float], x : float, h : float) -> float:
    return (func(x + h) - 2 * func(x) + func(x - h)) / (h * h)

def mixed_second_difference(func : Callable[[float, float], float], x : float, y : float, hx : float, hy : float) -> float:
    return (
        func(x + hx, y + hy) - func(x + hx, y - hy) - func(x - hx, y + hy) + func(x - hx, y - hy)
    ) / (4 * hx * hy)

def lexicographic_key(values) -> Tuple[float, ...]:
    """Flatten a (possibly nested) sequence of numbers into a tuple for
    deterministic ordering.
    """

    return tuple(float(v) for v in np.ravel(np.asarray(values, dtype=float)))
