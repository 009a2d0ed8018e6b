"""Pure-Python permanent kernels, used when the compiled extension is absent.

``glynn`` and ``ryser`` replicate the compiled kernels' arithmetic order
exactly (same Gray-code traversal, same ascending products and running
sums), so both backends return bit-identical values. ``naive`` sums over
explicit permutations in chunks; it is the independent testing oracle and
is not order-matched to the compiled recursion.
"""

from __future__ import annotations

import itertools

import numpy as np

_PERM_CHUNK = 65536


def _rows(a: np.ndarray) -> list[list[complex]]:
    return [[complex(x) for x in row] for row in a]


def glynn(a: np.ndarray) -> complex:
    n = a.shape[0]
    if n < 1:
        raise ValueError("empty matrix")
    if n > 62:
        raise ValueError("matrix dimension above exact-kernel limit (62)")
    m = _rows(a)

    v = [0j] * n
    for j in range(n):
        s = m[0][j]
        for i in range(1, n):
            s = s + m[i][j]
        v[j] = s

    p = v[0]
    for j in range(1, n):
        p = p * v[j]
    total = p

    d = [1.0] * n
    sgn = 1
    for k in range(1, 1 << (n - 1)):
        b = (k & -k).bit_length() - 1
        r = b + 1
        d[r] = -d[r]
        coef = 2.0 * d[r]
        row = m[r]
        for j in range(n):
            v[j] = v[j] + coef * row[j]
        sgn = -sgn
        p = v[0]
        for j in range(1, n):
            p = p * v[j]
        total = total + p if sgn > 0 else total - p

    return total / float(2 ** (n - 1))


def ryser(a: np.ndarray) -> complex:
    n = a.shape[0]
    if n < 1:
        raise ValueError("empty matrix")
    if n > 62:
        raise ValueError("matrix dimension above exact-kernel limit (62)")
    m = _rows(a)

    v = [0j] * n
    mem = [False] * n
    total = 0j
    sgn = 1
    for k in range(1, 1 << n):
        b = (k & -k).bit_length() - 1
        if mem[b]:
            mem[b] = False
            for i in range(n):
                v[i] = v[i] - m[i][b]
        else:
            mem[b] = True
            for i in range(n):
                v[i] = v[i] + m[i][b]
        sgn = -sgn
        p = v[0]
        for i in range(1, n):
            p = p * v[i]
        total = total + p if sgn > 0 else total - p

    return -total if n % 2 else total


def naive(a: np.ndarray) -> complex:
    n = a.shape[0]
    if n < 1:
        raise ValueError("empty matrix")
    arr = np.asarray(a, dtype=np.complex128)
    rows = np.arange(n)
    total = 0j
    chunk: list[tuple[int, ...]] = []
    for perm in itertools.permutations(range(n)):
        chunk.append(perm)
        if len(chunk) == _PERM_CHUNK:
            cols = np.asarray(chunk)
            total += complex(arr[rows[None, :], cols].prod(axis=1).sum())
            chunk.clear()
    if chunk:
        cols = np.asarray(chunk)
        total += complex(arr[rows[None, :], cols].prod(axis=1).sum())
    return total
