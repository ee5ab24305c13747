"""Independent reference implementations used to check the library.

These are deliberately written from the definitions (exhaustive scans,
exact arithmetic) rather than sharing any shortcut with the code under
test.
"""

import itertools
import math


def brute_force_otsu(hist) -> int:
    """Exhaustively minimize the weighted intra-class variance, exactly.

    For class j with pixel count n_j, level sum s_j and squared-level sum
    ss_j, the class variance is ss_j/n_j - (s_j/n_j)^2 and its weight is
    n_j/N.  Clearing denominators, comparing thresholds t reduces to
    comparing the integer pair
        num(t) = (n0*ss0 - s0^2)*n1 + (n1*ss1 - s1^2)*n0
        den(t) = N * n0 * n1
    (single-class cases drop the empty term).  Ties keep the smallest t.
    """
    total_n = sum(hist)
    total_s = sum(i * c for i, c in enumerate(hist))
    total_ss = sum(i * i * c for i, c in enumerate(hist))
    best_t = 0
    best_num, best_den = None, None
    n0 = s0 = ss0 = 0
    for t in range(256):
        c = hist[t]
        n0 += c
        s0 += t * c
        ss0 += t * t * c
        n1 = total_n - n0
        s1 = total_s - s0
        ss1 = total_ss - ss0
        if n0 == 0:
            num, den = n1 * ss1 - s1 * s1, total_n * n1
        elif n1 == 0:
            num, den = n0 * ss0 - s0 * s0, total_n * n0
        else:
            num = (n0 * ss0 - s0 * s0) * n1 + (n1 * ss1 - s1 * s1) * n0
            den = total_n * n0 * n1
        if best_num is None or num * best_den < best_num * den:
            best_t, best_num, best_den = t, num, den
    return best_t


def brute_force_viterbi(columns, alpha=0.5, angle_scale=1.0):
    """Enumerate every path through the node columns; return (cost, path).

    Costs accumulate left to right with the same expression the library
    documents, so an exact float comparison against the DP is meaningful.
    Enumeration in lexicographic node order with strict improvement keeps
    the lexicographically smallest row sequence among cost ties.
    """
    best_cost = None
    best_path = None
    for indices in itertools.product(*[range(len(col)) for col in columns]):
        cost = 0.0
        prev_theta = None
        for j in range(1, len(columns)):
            dy = columns[j][indices[j]] - columns[j - 1][indices[j - 1]]
            theta = math.atan2(dy, 1.0)
            if prev_theta is None:
                step = alpha * math.sqrt(1.0 + dy * dy)
            else:
                step = alpha * math.sqrt(1.0 + dy * dy) + (1.0 - alpha) * angle_scale * abs(theta - prev_theta)
            cost = cost + step
            prev_theta = theta
        if best_cost is None or cost < best_cost:
            best_cost = cost
            best_path = [columns[j][i] for j, i in enumerate(indices)]
    return best_cost, best_path


def best_lag_by_scan(pred, ref, max_lag):
    """Independent lag search: Pearson correlation of every overlap window.

    Ties prefer smaller |lag|, then the negative lag.
    """
    candidates = []
    for lag in range(-max_lag, max_lag + 1):
        ref_lo, ref_hi = max(0, lag), min(len(pred) + lag, len(ref))
        a = pred[ref_lo - lag : ref_hi - lag]
        b = ref[ref_lo:ref_hi]
        if len(a) < 2:
            continue
        ma = sum(a) / len(a)
        mb = sum(b) / len(b)
        va = sum((x - ma) ** 2 for x in a)
        vb = sum((x - mb) ** 2 for x in b)
        if va == 0 or vb == 0:
            continue
        corr = sum((x - ma) * (y - mb) for x, y in zip(a, b)) / math.sqrt(va * vb)
        candidates.append((corr, abs(lag), 0 if lag < 0 else 1, lag))
    if not candidates:
        return None
    candidates.sort(key=lambda item: (-item[0], item[1], item[2]))
    return candidates[0][3]
