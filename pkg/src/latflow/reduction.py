"""Exact integer matrix utilities and LLL reduction with tracked transforms.

All unimodular bookkeeping is done in Python ints (no overflow); floating
point is used only for the real basis vectors and Gram-Schmidt decisions,
which affect reduction quality but never which lattice is represented.
"""

import math

import numpy as np


def int_identity(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def int_matmul(a, b):
    n, m, p = len(a), len(b), len(b[0])
    return [[sum(a[i][k] * b[k][j] for k in range(m)) for j in range(p)] for i in range(n)]


def int_matvec(a, v):
    return [sum(a[i][k] * v[k] for k in range(len(v))) for i in range(len(a))]


def int_det(m):
    """Exact determinant by fraction-free (Bareiss) elimination."""
    n = len(m)
    a = [row[:] for row in m]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def is_unimodular(m):
    return abs(int_det(m)) == 1


def smith_left_transform(mat):
    """Diagonalize an integer matrix by unimodular row/column operations.

    Returns (U, diag) where U is a d x d unimodular integer matrix such that
    mat = U @ D @ V for some unimodular V and D diagonal with `diag` its
    nonzero entries (no divisibility normalization).  Consequence used here:
    the first len(diag) columns of U are a basis of the *saturation* of the
    column span of `mat`, i.e. of Z^d intersected with its rational span.
    """
    a = [row[:] for row in mat]
    d = len(a)
    m = len(a[0]) if d else 0
    u = int_identity(d)

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        for r in range(d):
            u[r][i], u[r][j] = u[r][j], u[r][i]

    def addmul_row(i, j, q):
        # a[i] -= q * a[j]; mirrored on U as col_j += q * col_i
        for c in range(m):
            a[i][c] -= q * a[j][c]
        for r in range(d):
            u[r][j] += q * u[r][i]

    def negate_row(i):
        for c in range(m):
            a[i][c] = -a[i][c]
        for r in range(d):
            u[r][i] = -u[r][i]

    def swap_cols(i, j):
        for r in range(d):
            a[r][i], a[r][j] = a[r][j], a[r][i]

    def addmul_col(i, j, q):
        for r in range(d):
            a[r][i] -= q * a[r][j]

    diag = []
    t = 0
    while t < min(d, m):
        # locate smallest nonzero pivot in the trailing submatrix
        piv = None
        for i in range(t, d):
            for j in range(t, m):
                if a[i][j] != 0 and (piv is None or abs(a[i][j]) < abs(a[piv[0]][piv[1]])):
                    piv = (i, j)
        if piv is None:
            break
        if piv[0] != t:
            swap_rows(t, piv[0])
        if piv[1] != t:
            swap_cols(t, piv[1])
        while True:
            dirty = False
            for i in range(t + 1, d):
                if a[i][t] != 0:
                    q = a[i][t] // a[t][t]
                    addmul_row(i, t, q)
                    if a[i][t] != 0:
                        swap_rows(i, t)
                    dirty = True
            for j in range(t + 1, m):
                if a[t][j] != 0:
                    q = a[t][j] // a[t][t]
                    addmul_col(j, t, q)
                    if a[t][j] != 0:
                        swap_cols(j, t)
                    dirty = True
            if not dirty:
                break
        if a[t][t] < 0:
            negate_row(t)
        diag.append(a[t][t])
        t += 1
    return u, diag


def saturation_completion(coeff_cols):
    """Unimodular matrix whose first r columns generate the saturation of the
    integer span of the given coefficient vectors (each a list of ints)."""
    d = len(coeff_cols[0])
    mat = [[coeff_cols[j][i] for j in range(len(coeff_cols))] for i in range(d)]
    u, diag = smith_left_transform(mat)
    if len(diag) != len(coeff_cols):
        raise ValueError("coefficient vectors are linearly dependent")
    return u


class IntEchelon:
    """Incremental exact rank tracking over the integers.

    add(row) reduces the row against the stored fraction-free echelon and
    returns True (storing it) when the row is independent of what came
    before, False when it is an exact rational combination.
    """

    def __init__(self, width):
        self.width = width
        self.rows = []  # (pivot column, row) with row[pivot] != 0

    @property
    def rank(self):
        return len(self.rows)

    def add(self, row):
        r = [int(x) for x in row]
        for piv, stored in self.rows:
            if r[piv] != 0:
                p, q = stored[piv], r[piv]
                r = [p * a - q * b for a, b in zip(r, stored)]
        if all(x == 0 for x in r):
            return False
        g = 0
        for x in r:
            g = math.gcd(g, abs(x))
        if g > 1:
            r = [x // g for x in r]
        piv = next(i for i, x in enumerate(r) if x != 0)
        self.rows.append((piv, r))
        return True


def _gram_schmidt(b):
    d, n = b.shape
    bstar = np.zeros_like(b)
    mu = np.zeros((n, n))
    for i in range(n):
        v = b[:, i].copy()
        for j in range(i):
            mu[i, j] = (b[:, i] @ bstar[:, j]) / (bstar[:, j] @ bstar[:, j])
            v -= mu[i, j] * bstar[:, j]
        bstar[:, i] = v
    return bstar, mu


def lll_reduce(cols, delta=0.99):
    """LLL-reduce the columns of a real matrix (full column rank, n <= d).

    Returns (reduced, transform) with transform a unimodular integer matrix
    (nested Python ints) and reduced = cols @ transform recomputed in one
    exact-coefficient product, so the column lattice is preserved exactly.
    """
    b = np.array(cols, dtype=float)
    d, n = b.shape
    t = int_identity(n)

    def addmul(k, j, q):
        b[:, k] -= q * b[:, j]
        for r in range(n):
            t[r][k] -= q * t[r][j]

    def swap(k, j):
        b[:, [k, j]] = b[:, [j, k]]
        for r in range(n):
            t[r][k], t[r][j] = t[r][j], t[r][k]

    k = 1
    while k < n:
        bstar, mu = _gram_schmidt(b)
        for j in range(k - 1, -1, -1):
            q = round(mu[k, j])
            if q != 0:
                addmul(k, j, q)
                mu[k, :j + 1] -= q * mu[j, :j + 1]
                mu[k, j] -= q
        nk = bstar[:, k] @ bstar[:, k]
        nk1 = bstar[:, k - 1] @ bstar[:, k - 1]
        if nk >= (delta - mu[k, k - 1] ** 2) * nk1:
            k += 1
        else:
            swap(k, k - 1)
            k = max(k - 1, 1)

    tf = np.array([[float(t[i][j]) for j in range(n)] for i in range(n)])
    if np.max(np.abs(tf)) >= 2.0 ** 53:
        raise OverflowError("LLL transform entries exceed exact float range")
    reduced = np.asarray(cols, dtype=float) @ tf
    return reduced, t
