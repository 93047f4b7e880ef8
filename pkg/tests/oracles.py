"""Independent reference implementations used by the tests."""

import itertools

import numpy as np


def exhaustive_two_means(points):
    """Optimal 2-partition by inertia over every split; returns sorted centroids."""
    pts = np.asarray(points, dtype=np.float64)
    n = len(pts)
    best = None
    for r in range(1, n):
        for group in itertools.combinations(range(1, n), r):
            sel = np.zeros(n, bool)
            sel[list(group)] = True
            a, b = pts[sel], pts[~sel]
            inertia = ((a - a.mean(0)) ** 2).sum() + ((b - b.mean(0)) ** 2).sum()
            if best is None or inertia < best[0]:
                best = (inertia, a.mean(0), b.mean(0))
    return best


def brute_force_nms(boxes, iou_fn, thresh):
    """Quadratic greedy suppression straight from the definition."""
    order = sorted(range(len(boxes)), key=lambda i: (-boxes[i].score, -boxes[i].area, i))
    suppressed = [False] * len(boxes)
    kept = []
    for pos, i in enumerate(order):
        if suppressed[i]:
            continue
        kept.append(i)
        for j in order[pos + 1:]:
            if not suppressed[j] and iou_fn(boxes[i], boxes[j]) > thresh:
                suppressed[j] = True
    return kept


def dense_poisson(div, boundary):
    """Direct sparse solve of the 5-point Laplace system with Dirichlet data.

    ``div`` is the interior right-hand side, ``boundary`` the full grid whose
    outer ring supplies the fixed values.
    """
    import scipy.sparse as sp
    import scipy.sparse.linalg as spla

    h, w = div.shape
    idx = np.arange(h * w).reshape(h, w)
    rows, cols, vals = [], [], []
    rhs = np.asarray(div, dtype=np.float64).copy()
    for y in range(h):
        for x in range(w):
            k = idx[y, x]
            rows.append(k); cols.append(k); vals.append(-4.0)
            for dy, dx in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                yy, xx = y + dy, x + dx
                if 0 <= yy < h and 0 <= xx < w:
                    rows.append(k); cols.append(idx[yy, xx]); vals.append(1.0)
                else:
                    rhs[y, x] -= boundary[yy + 1, xx + 1]
    A = sp.csr_matrix((vals, (rows, cols)), shape=(h * w, h * w))
    return spla.spsolve(A, rhs.ravel()).reshape(h, w)
