"""Independent brute-force oracles shared by the unit and acceptance tests.

Each oracle recomputes a quantity by enumeration or explicit summation,
never through the code path it is checking.
"""

from fractions import Fraction

import numpy as np


def dense_vertex_oracle(i_minus, i_zero, i_plus):
    """Vertex row offset by zooming argmax over exact parabola evaluations.

    Evaluates the Lagrange parabola through (-1, i_minus), (0, i_zero),
    (+1, i_plus) in exact rational arithmetic on grids refined to 1e-9,
    entirely independent of the closed-form vertex formula.
    """
    ym, y0, yp = (Fraction(v) for v in (i_minus, i_zero, i_plus))

    def p(x: Fraction) -> Fraction:
        return (
            ym * (x * (x - 1)) / 2
            - y0 * (x + 1) * (x - 1)
            + yp * ((x + 1) * x) / 2
        )

    center = Fraction(0)
    for step in (Fraction(1, 10**3), Fraction(1, 10**6), Fraction(1, 10**9)):
        span = step * 2000
        lo = center - span / 2
        best_x, best_v = None, None
        for k in range(2001):
            x = lo + k * step
            v = p(x)
            if best_v is None or v > best_v:
                best_x, best_v = x, v
        center = best_x
    return float(center)


def median_oracle(values):
    """Sort-and-pick median; even counts average the two middle entries."""
    s = sorted(values)
    n = len(s)
    if n % 2:
        return s[n // 2]
    return (s[n // 2 - 1] + s[n // 2]) / 2.0


def edge_scan_oracle(qualifies, run_length):
    """All-columns brute-force scan for the first/last full qualifying run."""
    n = len(qualifies)
    left = None
    for i in range(n - run_length + 1):
        if all(qualifies[i : i + run_length]):
            left = i
            break
    right = None
    for i in range(n - run_length, -1, -1):
        if all(qualifies[i : i + run_length]):
            right = i + run_length - 1
            break
    return left, right


def anova_oracle(values):
    """Plain-loop two-way crossed ANOVA with the same clamping rules."""
    p, o, r = values.shape
    grand = sum(values[i, j, k] for i in range(p) for j in range(o) for k in range(r)) / (
        p * o * r
    )
    part_mean = [values[i].sum() / (o * r) for i in range(p)]
    op_mean = [values[:, j].sum() / (p * r) for j in range(o)]
    cell_mean = [[values[i, j].sum() / r for j in range(o)] for i in range(p)]

    ss_part = o * r * sum((m - grand) ** 2 for m in part_mean)
    ss_op = p * r * sum((m - grand) ** 2 for m in op_mean)
    ss_cells = r * sum(
        (cell_mean[i][j] - grand) ** 2 for i in range(p) for j in range(o)
    )
    ss_total = sum(
        (values[i, j, k] - grand) ** 2
        for i in range(p)
        for j in range(o)
        for k in range(r)
    )
    ss_inter = ss_cells - ss_part - ss_op
    ss_err = ss_total - ss_cells

    ms_err = ss_err / (p * o * (r - 1))
    if p > 1 and o > 1:
        ms_inter = ss_inter / ((p - 1) * (o - 1))
        var_inter = max(0.0, (ms_inter - ms_err) / r)
        denom = ms_inter
    else:
        var_inter = 0.0
        denom = ms_err
    var_op = max(0.0, (ss_op / (o - 1) - denom) / (p * r)) if o > 1 else 0.0
    var_part = max(0.0, (ss_part / (p - 1) - denom) / (o * r)) if p > 1 else 0.0

    ev = 6.0 * ms_err**0.5
    av = 6.0 * (var_op + var_inter) ** 0.5
    pv = 6.0 * var_part**0.5
    rr = (ev**2 + av**2) ** 0.5
    tv = (rr**2 + pv**2) ** 0.5
    return ev, av, pv, rr, tv


def dense_distance_oracle(cx, cz, a, b, rot, point, step=1e-4):
    """Unsigned point-to-ellipse distance by dense parameter sweep."""
    t = np.arange(0.0, 2 * np.pi, step)
    x = cx + a * np.cos(t) * np.cos(rot) - b * np.sin(t) * np.sin(rot)
    z = cz + a * np.cos(t) * np.sin(rot) + b * np.sin(t) * np.cos(rot)
    d2 = (x - point[0]) ** 2 + (z - point[1]) ** 2
    return float(np.sqrt(d2.min()))


def proportional_recurrence_oracle(kp, bias, n):
    """Closed-form z-error sequence for gain 1, constant bias, zero noise."""
    return [bias * (1 - (1 - kp) ** k) / kp for k in range(1, n + 1)]
