"""Least-cost path extraction: one y coordinate per mask column.

Each column's candidate nodes are the centers of its vertical signal runs.
The path through them minimizes a weighted sum of Euclidean step length and
turning angle, solved exactly by dynamic programming over edge states so the
angle term between consecutive segments is honored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyTraceError
from .raster import BinaryMask

ALPHA = 0.5
ANGLE_SCALE = 1.0


@dataclass(frozen=True)
class ColumnNodes:
    """Per-column run centers (fractional rows, strictly increasing)."""

    centers: tuple[tuple[float, ...], ...]
    height: int

    def __post_init__(self):
        for column in self.centers:
            if any(b <= a for a, b in zip(column, column[1:])):
                raise ValueError("run centers must be strictly increasing within a column")
            if column and (column[0] < 0 or column[-1] > self.height - 1):
                raise ValueError("run centers must lie within the image")

    @property
    def n_columns(self) -> int:
        return len(self.centers)


@dataclass(frozen=True, eq=False)
class PixelTrace:
    """One fractional row per column; NaN marks columns not yet filled."""

    y: np.ndarray
    gaps_filled: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        arr = np.ascontiguousarray(self.y, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("trace needs a non-empty 1-D y array")
        arr.setflags(write=False)
        object.__setattr__(self, "y", arr)
        spans = sorted(self.gaps_filled)
        if any(end < start for start, end in spans):
            raise ValueError("gap intervals must satisfy start <= end")
        if any(b[0] <= a[1] for a, b in zip(spans, spans[1:])):
            raise ValueError("gap intervals must be disjoint")

    @property
    def n_columns(self) -> int:
        return int(self.y.size)

    def to_json_dict(self) -> dict:
        return {
            "columns": [0, self.n_columns - 1],
            "y": [None if math.isnan(v) else v for v in self.y.tolist()],
            "gaps_filled": [list(span) for span in self.gaps_filled],
        }


def column_nodes(mask: BinaryMask) -> ColumnNodes:
    """Centers of the maximal vertical signal runs of every column."""
    px = mask.pixels
    h, w = px.shape
    padded = np.zeros((h + 2, w), dtype=np.int8)
    padded[1:-1] = px
    delta = np.diff(padded, axis=0)
    start_y, start_x = np.nonzero(delta == 1)
    end_y, end_x = np.nonzero(delta == -1)
    # nonzero is row-major; reorder by (column, row) to pair starts with ends
    start_order = np.lexsort((start_y, start_x))
    end_order = np.lexsort((end_y, end_x))
    start_y, start_x = start_y[start_order], start_x[start_order]
    end_y = end_y[end_order] - 1  # inclusive last row of each run
    centers_by_column: list[list[float]] = [[] for _ in range(w)]
    for x, top, bottom in zip(start_x, start_y, end_y):
        centers_by_column[x].append((float(top) + float(bottom)) / 2.0)
    return ColumnNodes(tuple(tuple(col) for col in centers_by_column), h)


def _nonempty_blocks(centers) -> list[tuple[int, int]]:
    blocks = []
    start = None
    for i, column in enumerate(centers):
        if column and start is None:
            start = i
        elif not column and start is not None:
            blocks.append((start, i))
            start = None
    if start is not None:
        blocks.append((start, len(centers)))
    return blocks


def _reconstruct(back: dict, last_col: int, u: int, v: int) -> tuple[int, ...]:
    """Node indices of the path whose final edge state is (u @ last_col-1, v @ last_col)."""
    path = [v, u]
    col = last_col
    while col >= 2:
        u_prev = back[(col, path[-1], path[-2])]
        path.append(u_prev)
        col -= 1
    return tuple(reversed(path))


def _least_cost_path(block: list[tuple[float, ...]], alpha: float, angle_scale: float) -> list[float]:
    """Exact minimum of sum(alpha*step_length + (1-alpha)*angle_change*scale).

    Edge-state DP: a state is the pair of node choices in two consecutive
    columns, which pins down the incoming segment angle.  Exact cost ties are
    broken toward the lexicographically smallest row sequence.
    """
    n = len(block)
    if n == 1:
        return [block[0][0]]
    beta = (1.0 - alpha) * angle_scale

    cost: dict[tuple[int, int], float] = {}
    back: dict[tuple[int, int, int], int | None] = {}
    for u, yu in enumerate(block[0]):
        for v, yv in enumerate(block[1]):
            dy = yv - yu
            cost[(u, v)] = alpha * math.sqrt(1.0 + dy * dy)

    for col in range(2, n):
        prev_cost = cost
        cost = {}
        prev_nodes = block[col - 1]
        for v, yv in enumerate(prev_nodes):
            thetas_in = [math.atan2(yv - yu, 1.0) for yu in block[col - 2]]
            for w, yw in enumerate(block[col]):
                dy = yw - yv
                theta_out = math.atan2(dy, 1.0)
                seg = alpha * math.sqrt(1.0 + dy * dy)
                best_cost = math.inf
                best_u = -1
                for u in range(len(block[col - 2])):
                    cand = prev_cost[(u, v)] + (seg + beta * abs(theta_out - thetas_in[u]))
                    if cand < best_cost:
                        best_cost, best_u = cand, u
                    elif cand == best_cost and best_u >= 0:
                        # exact tie: keep the lexicographically smaller prefix
                        a = _reconstruct(back, col - 1, u, v) if col > 2 else (u, v)
                        b = _reconstruct(back, col - 1, best_u, v) if col > 2 else (best_u, v)
                        if a < b:
                            best_u = u
                cost[(v, w)] = best_cost
                back[(col, v, w)] = best_u

    best_state = None
    best_cost = math.inf
    best_path: tuple[int, ...] | None = None
    for (u, v), c in cost.items():
        if c < best_cost:
            best_cost, best_state = c, (u, v)
            best_path = None
        elif c == best_cost:
            if best_path is None:
                best_path = _reconstruct(back, n - 1, best_state[0], best_state[1]) if n > 2 else best_state
            candidate = _reconstruct(back, n - 1, u, v) if n > 2 else (u, v)
            if candidate < best_path:
                best_state, best_path = (u, v), candidate
    if best_path is None:
        best_path = _reconstruct(back, n - 1, best_state[0], best_state[1]) if n > 2 else best_state
    return [block[i][idx] for i, idx in enumerate(best_path)]


def viterbi_trace(nodes: ColumnNodes, *, alpha: float = ALPHA, angle_scale: float = ANGLE_SCALE) -> PixelTrace:
    """Least-cost path through the run centers, one block of contiguous
    non-empty columns at a time.  Empty columns stay NaN for fill_gaps."""
    if not 0 <= alpha <= 1:
        raise ValueError("alpha must be in [0, 1]")
    blocks = _nonempty_blocks(nodes.centers)
    if not blocks:
        raise EmptyTraceError("no signal pixels in any column")
    y = np.full(nodes.n_columns, np.nan)
    for start, stop in blocks:
        y[start:stop] = _least_cost_path(list(nodes.centers[start:stop]), alpha, angle_scale)
    return PixelTrace(y=y)


def _nan_spans(missing: np.ndarray) -> list[tuple[int, int]]:
    spans = []
    start = None
    for i, gap in enumerate(missing):
        if gap and start is None:
            start = i
        elif not gap and start is not None:
            spans.append((start, i - 1))
            start = None
    if start is not None:
        spans.append((start, len(missing) - 1))
    return spans


def fill_gaps(trace: PixelTrace, n_columns: int) -> PixelTrace:
    """One value for every column of [0, n_columns): interior gaps are
    linearly interpolated, leading/trailing gaps extend the nearest value."""
    if n_columns < 1:
        raise ValueError("n_columns must be >= 1")
    y = np.full(n_columns, np.nan)
    count = min(trace.n_columns, n_columns)
    y[:count] = trace.y[:count]
    known = np.isfinite(y)
    if not known.any():
        raise EmptyTraceError("trace has no defined columns")
    spans = _nan_spans(~known)
    filled = np.interp(np.arange(n_columns), np.flatnonzero(known), y[known])
    return PixelTrace(y=filled, gaps_filled=tuple(sorted(set(trace.gaps_filled) | set(spans))))
