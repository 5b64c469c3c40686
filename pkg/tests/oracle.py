"""Slow reference computations written without the package's array machinery.

Probabilities live in dictionaries keyed by letter tuples and every
information quantity is summed term by term with ``math.log2``.
"""

import math
from collections import defaultdict
from itertools import product

NAMES = ("X", "Y1", "Y2", "E", "U1", "U2", "V1", "V2")


def eight_variable_law(px, py1, py2, pe, pu1, pu2, pv1, pv2):
    law = {}
    for x, y1, y2, e in product(range(len(px)), range(len(py1[0])), range(len(py2[0])), range(len(pe[0]))):
        base = px[x] * py1[x][y1] * py2[x][y2] * pe[x][e]
        if base == 0:
            continue
        for u1, u2 in product(range(len(pu1[0])), range(len(pu2[0]))):
            pu = base * pu1[y1][u1] * pu2[y2][u2]
            if pu == 0:
                continue
            for v1, v2 in product(range(len(pv1[0])), range(len(pv2[0]))):
                p = pu * pv1[u1][v1] * pv2[u2][v2]
                if p > 0:
                    law[(x, y1, y2, e, u1, u2, v1, v2)] = p
    return law


def H(law, names, order=NAMES):
    idx = [order.index(n) for n in names]
    marg = defaultdict(float)
    for k, p in law.items():
        marg[tuple(k[i] for i in idx)] += p
    return -sum(p * math.log2(p) for p in marg.values() if p > 0)


def Hc(law, a, g=(), order=NAMES):
    return H(law, tuple(a) + tuple(g), order) - H(law, tuple(g), order)


def I(law, a, b, g=(), order=NAMES):
    a, b, g = tuple(a), tuple(b), tuple(g)
    return H(law, a + g, order) + H(law, b + g, order) - H(law, a + b + g, order) - H(law, g, order)


def inner_bounds(law):
    """Right-hand sides of the inner bound, straight from the definitions."""
    pos = lambda v: max(0.0, v)
    h1, h2 = Hc(law, ["X"], ["V1", "E"]), Hc(law, ["X"], ["V2", "E"])
    l1, l2 = I(law, ["U1"], ["Y1"], ["V1", "X"]), I(law, ["U2"], ["Y2"], ["V2", "X"])
    r1, r2 = I(law, ["U1"], ["Y1"], ["U2"]), I(law, ["U2"], ["Y2"], ["U1"])
    return {
        "r1_lb": r1,
        "r2_lb": r2,
        "sum_lb": I(law, ["U1", "U2"], ["Y1", "Y2"]),
        "d1_ub": pos(h1 - I(law, ["U1"], ["Y1"], ["V1", "U2"]) + l1),
        "d2_ub": pos(h2 - I(law, ["U2"], ["Y2"], ["V2", "U1"]) + l2),
        "dsum_ub": pos(h1 + h2 - I(law, ["U1", "U2"], ["Y1", "Y2"], ["V1", "V2"]) + l1 + l2),
        "d1_minus_r2_ub": pos(h1 - r2 - I(law, ["U1"], ["Y1"], ["V1"]) + l1),
        "d2_minus_r1_ub": pos(h2 - r1 - I(law, ["U2"], ["Y2"], ["V2"]) + l2),
    }


def expected_distortion(law, xhat, dist):
    return sum(p * dist[k[0]][xhat[k[4]][k[5]]] for k, p in law.items())
