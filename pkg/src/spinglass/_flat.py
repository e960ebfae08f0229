"""Exact inner solver for the bounded-Lipschitz linear program.

For a fixed budget split (sup bound M, Lipschitz bound L), the LP

    maximize  sum_i f_i d_i
    s.t.      |f_i| <= M,   |f_{i+1} - f_i| <= L (x_{i+1} - x_i)

has the dual (teleport mass at cost M per unit, move it at cost L per unit
distance):

    minimize over w_1..w_{m-1}:
        M * (|w_1| + sum |w_{i+1} - w_i| + |w_{m-1}|)
        + sum_i L (x_{i+1} - x_i) |w_i - D_i|,

where D_i is the cumulative sum of d.  This is a total-variation / L1
problem on the flow variables, solved exactly by message passing with
convex piecewise-linear value functions.  Each message update is

    A_i = clip_{+-M}(A_{i-1}) + L delta_i |w - D_i|,

where the clip is the Moreau step min_u [A(u) + M |w - u|], i.e. clipping
the derivative to [-M, M].  Knot increments are absorbed from the two ends
of the derivative profile, tracked with two lazily-deleted binary heaps, so
the whole pass is O(m log m).  The final answer is the clipped message
evaluated at w = 0, tracked incrementally through the sweep.
"""

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


@njit(cache=True, nogil=True)
def _heap_push(keys, ids, size, key, ident):
    i = size
    keys[i] = key
    ids[i] = ident
    while i > 0:
        parent = (i - 1) // 2
        if keys[parent] <= keys[i]:
            break
        keys[parent], keys[i] = keys[i], keys[parent]
        ids[parent], ids[i] = ids[i], ids[parent]
        i = parent
    return size + 1


@njit(cache=True, nogil=True)
def _heap_pop(keys, ids, size):
    size -= 1
    keys[0] = keys[size]
    ids[0] = ids[size]
    i = 0
    while True:
        l = 2 * i + 1
        r = l + 1
        small = i
        if l < size and keys[l] < keys[small]:
            small = l
        if r < size and keys[r] < keys[small]:
            small = r
        if small == i:
            break
        keys[small], keys[i] = keys[i], keys[small]
        ids[small], ids[i] = ids[i], ids[small]
        i = small
    return size


@njit(cache=True, nogil=True)
def flat_value(ds, deltas, big_m, lip):
    """Optimal value of the bounded-Lipschitz LP for one (M, L) split.

    ds: signed masses mu_i - nu_i on the merged sorted support (length m)
    deltas: gaps between consecutive support points (length m-1)
    """
    m = ds.shape[0]
    if m <= 1 or big_m <= 0.0:
        return 0.0
    cap = m + 1
    inc = np.zeros(cap)
    posL = np.empty(cap)
    idsL = np.empty(cap, dtype=np.int64)
    posR = np.empty(cap)
    idsR = np.empty(cap, dtype=np.int64)
    sizeL = 0
    sizeR = 0

    # root knot: the M|w| boundary link contributes increment 2M at w = 0
    inc[m] = 2.0 * big_m
    sizeL = _heap_push(posL, idsL, sizeL, 0.0, m)
    sizeR = _heap_push(posR, idsR, sizeR, -0.0, m)

    val0 = 0.0
    pending = 0.0
    cum = 0.0
    for i in range(m - 1):
        cum += ds[i]
        u = lip * deltas[i]
        if pending > 0.0:
            # left clip: absorb `pending` from smallest positions
            sizeL, val0 = _clip_left(posL, idsL, sizeL, inc, pending, big_m, val0)
            sizeR, val0 = _clip_right(posR, idsR, sizeR, inc, pending, big_m, val0)
        if u > 0.0:
            inc[i] = 2.0 * u
            sizeL = _heap_push(posL, idsL, sizeL, cum, i)
            sizeR = _heap_push(posR, idsR, sizeR, -cum, i)
            val0 += u * abs(cum)
            pending = u
        else:
            pending = 0.0
    if pending > 0.0:
        sizeL, val0 = _clip_left(posL, idsL, sizeL, inc, pending, big_m, val0)
        sizeR, val0 = _clip_right(posR, idsR, sizeR, inc, pending, big_m, val0)
    return val0


@njit(cache=True, nogil=True)
def _clip_left(keys, ids, size, inc, amount, big_m, val0):
    need = amount
    slope = -big_m - amount  # pre-clip slope left of everything
    rel = 0.0
    frontier = 0.0
    crossed = False
    p_prev = 0.0
    have_prev = False
    while need > 1e-18 and size > 0:
        ident = ids[0]
        if inc[ident] <= 0.0:
            size = _heap_pop(keys, ids, size)
            continue
        p = keys[0]
        if p > 0.0:
            left = p_prev if (have_prev and p_prev > 0.0) else 0.0
            rel += slope * (p - left)
            crossed = True
        take = inc[ident] if inc[ident] < need else need
        inc[ident] -= take
        need -= take
        slope += take
        if inc[ident] <= 0.0:
            size = _heap_pop(keys, ids, size)
        p_prev = p
        have_prev = True
        frontier = p
    if crossed and frontier > 0.0:
        # clipped region extends past 0: A_new(0) = A_old(frontier) + M*frontier
        val0 = val0 + rel + big_m * frontier
    return size, val0


@njit(cache=True, nogil=True)
def _clip_right(keys, ids, size, inc, amount, big_m, val0):
    need = amount
    slope = big_m + amount  # pre-clip slope right of everything
    rel = 0.0
    frontier = 0.0
    crossed = False
    p_prev = 0.0
    have_prev = False
    while need > 1e-18 and size > 0:
        ident = ids[0]
        if inc[ident] <= 0.0:
            size = _heap_pop(keys, ids, size)
            continue
        p = -keys[0]
        if p < 0.0:
            right = p_prev if (have_prev and p_prev < 0.0) else 0.0
            rel += slope * (right - p)  # integral of A' over [p, right]
            crossed = True
        take = inc[ident] if inc[ident] < need else need
        inc[ident] -= take
        need -= take
        slope -= take
        if inc[ident] <= 0.0:
            size = _heap_pop(keys, ids, size)
        p_prev = p
        have_prev = True
        frontier = p
    if crossed and frontier < 0.0:
        # A_new(0) = A_old(frontier) + M*|frontier|; rel = A_old(0)-A_old(frontier)
        val0 = val0 - rel + big_m * (-frontier)
    return size, val0
