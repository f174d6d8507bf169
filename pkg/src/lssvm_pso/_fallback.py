"""Pure numpy implementations of the hot loops.

Mirrors the compiled ``_core`` extension function for function. Used when the
extension is not built, or when ``LSSVM_PSO_BACKEND=python`` is set.

Kernel codes: 0 linear, 1 polynomial (p1=degree, p2=offset), 2 rbf (p1=sigma),
3 mlp (p1=scale, p2=bias).
"""
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.spatial.distance import cdist, pdist, squareform

LINEAR, POLYNOMIAL, RBF, MLP = 0, 1, 2, 3


def _apply(kind, dots_or_sq, p1, p2):
    if kind == LINEAR:
        return dots_or_sq
    if kind == POLYNOMIAL:
        return (1.0 + dots_or_sq / p2) ** p1
    if kind == RBF:
        return np.exp(-dots_or_sq / (p1 * p1))
    if kind == MLP:
        return np.tanh(p1 * dots_or_sq + p2)
    raise ValueError(f"unknown kernel code {kind}")


def gram_sym(X, kind, p1=0.0, p2=0.0):
    X = np.ascontiguousarray(X, dtype=np.float64)
    n = X.shape[0]
    if kind == RBF:
        sq = squareform(pdist(X, "sqeuclidean"))
        return _apply(kind, sq, p1, p2)
    G = X @ X.T
    # BLAS blocking can break bitwise symmetry; mirror the upper triangle
    iu = np.triu_indices(n, 1)
    G[(iu[1], iu[0])] = G[iu]
    return _apply(kind, G, p1, p2)


def gram_cross(Q, X, kind, p1=0.0, p2=0.0):
    Q = np.ascontiguousarray(Q, dtype=np.float64)
    X = np.ascontiguousarray(X, dtype=np.float64)
    if Q.shape[0] == 0 or X.shape[0] == 0:
        return np.zeros((Q.shape[0], X.shape[0]))
    if kind == RBF:
        return _apply(kind, cdist(Q, X, "sqeuclidean"), p1, p2)
    return _apply(kind, Q @ X.T, p1, p2)


def ema(values, alpha):
    values = np.asarray(values, dtype=np.float64)
    if alpha == 1.0:
        return values.copy()
    out = np.empty_like(values)
    acc = values[0]
    out[0] = acc
    # incremental form: a constant input stays exactly constant
    for t in range(1, len(values)):
        acc += alpha * (values[t] - acc)
        out[t] = acc
    return out


def _ratio_index(up, down):
    """100 - 100/(1 + up/down) with the 100 / 50 conventions for zero denominators."""
    out = np.full(up.shape, 50.0)
    pos = down > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        out[pos] = 100.0 - 100.0 / (1.0 + up[pos] / down[pos])
    out[(down == 0) & (up > 0)] = 100.0
    return out


def rsi(closes, period):
    closes = np.asarray(closes, dtype=np.float64)
    n = len(closes)
    out = np.full(n, np.nan)
    deltas = np.diff(closes)
    gains = sliding_window_view(np.where(deltas > 0, deltas, 0.0), period)
    losses = sliding_window_view(np.where(deltas < 0, -deltas, 0.0), period)
    out[period:] = _ratio_index(gains.sum(axis=1) / period, losses.sum(axis=1) / period)
    return out


def mfi(typical, volume, period):
    """Returns (values, degenerate_index); degenerate_index is -1 when all windows have volume."""
    typical = np.asarray(typical, dtype=np.float64)
    volume = np.asarray(volume, dtype=np.float64)
    n = len(typical)
    out = np.full(n, np.nan)
    flow = typical * volume
    diff = np.diff(typical)
    pos = np.where(diff > 0, flow[1:], 0.0)
    neg = np.where(diff < 0, flow[1:], 0.0)
    vol_sum = sliding_window_view(volume[1:], period).sum(axis=1)
    dead = np.flatnonzero(vol_sum == 0)
    if dead.size:
        return out, int(dead[0]) + period
    pos_sum = sliding_window_view(pos, period).sum(axis=1)
    neg_sum = sliding_window_view(neg, period).sum(axis=1)
    out[period:] = _ratio_index(pos_sum, neg_sum)
    return out, -1


def stoch_k(high, low, close, period):
    high = np.asarray(high, dtype=np.float64)
    low = np.asarray(low, dtype=np.float64)
    close = np.asarray(close, dtype=np.float64)
    n = len(close)
    out = np.full(n, np.nan)
    hh = sliding_window_view(high, period).max(axis=1)
    ll = sliding_window_view(low, period).min(axis=1)
    c = close[period - 1:]
    span = hh - ll
    vals = np.full(span.shape, 50.0)
    live = span > 0
    vals[live] = 100.0 * (c[live] - ll[live]) / span[live]
    out[period - 1:] = vals
    return out
