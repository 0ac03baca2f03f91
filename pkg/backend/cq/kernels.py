"""
Скомпилированные ядра k-means (numba).

Hartigan-Wong: стадии оптимального переноса (optimal transfer) и
быстрого переноса (quick transfer). Индексы точек и кластеров с нуля,
счётчики шагов (live, ncp, istep) с единицы, как в исходной схеме
алгоритма; сравнения шагов с индексом точки идут через i + 1.
"""

import numpy as np
from numba import njit

BIG = 1.0e30

# Коды завершения hartigan_wong
CONVERGED = 0
EMPTY_CLUSTER = 1
ITERATION_CAP = 2

# Предел шагов quick transfer в единицах M
QTRAN_STEP_FACTOR = 50


@njit(cache=True, nogil=True)
def squared_distance(a, i, c, l):
    total = 0.0
    for j in range(a.shape[1]):
        diff = a[i, j] - c[l, j]
        total += diff * diff
    return total


@njit(cache=True, nogil=True)
def nearest_two(a, c, ic1, ic2):
    """Ближайший и второй ближайший центр; при равенстве побеждает меньший индекс."""
    m = a.shape[0]
    k = c.shape[0]
    for i in range(m):
        best = -1
        second = -1
        best_d = np.inf
        second_d = np.inf
        for l in range(k):
            dist = squared_distance(a, i, c, l)
            if dist < best_d:
                second = best
                second_d = best_d
                best = l
                best_d = dist
            elif dist < second_d:
                second = l
                second_d = dist
        ic1[i] = best
        ic2[i] = second


@njit(cache=True, nogil=True)
def assign_nearest(a, c):
    m = a.shape[0]
    labels = np.empty(m, dtype=np.int64)
    for i in range(m):
        best = 0
        best_d = squared_distance(a, i, c, 0)
        for l in range(1, c.shape[0]):
            dist = squared_distance(a, i, c, l)
            if dist < best_d:
                best = l
                best_d = dist
        labels[i] = best
    return labels


@njit(cache=True, nogil=True)
def cluster_means(a, labels, k):
    """Средние по меткам и размеры кластеров."""
    n = a.shape[1]
    sums = np.zeros((k, n))
    counts = np.zeros(k, dtype=np.int64)
    for i in range(a.shape[0]):
        l = labels[i]
        counts[l] += 1
        for j in range(n):
            sums[l, j] += a[i, j]
    for l in range(k):
        if counts[l] > 0:
            for j in range(n):
                sums[l, j] /= counts[l]
    return sums, counts


@njit(cache=True, nogil=True)
def labelled_wcss(a, c, labels):
    total = 0.0
    for i in range(a.shape[0]):
        total += squared_distance(a, i, c, labels[i])
    return total


@njit(cache=True, nogil=True)
def _fresh_wcss(a, labels, k):
    means, _ = cluster_means(a, labels, k)
    return labelled_wcss(a, means, labels)


@njit(cache=True, nogil=True)
def _move_point(a, i, c, l1, l2, nc, an1, an2, ic1, ic2):
    al1 = float(nc[l1])
    alw = al1 - 1.0
    al2 = float(nc[l2])
    alt = al2 + 1.0
    for j in range(a.shape[1]):
        c[l1, j] = (c[l1, j] * al1 - a[i, j]) / alw
        c[l2, j] = (c[l2, j] * al2 + a[i, j]) / alt
    nc[l1] -= 1
    nc[l2] += 1
    an2[l1] = alw / al1
    an1[l1] = BIG
    if alw > 1.0:
        an1[l1] = alw / (alw - 1.0)
    an1[l2] = alt / al2
    an2[l2] = alt / (alt + 1.0)
    ic1[i] = l2
    ic2[i] = l1


@njit(cache=True, nogil=True)
def optimal_transfer(a, c, ic1, ic2, nc, an1, an2, ncp, d, itran, live, indx):
    """Один проход optimal transfer. Возвращает обновлённый indx."""
    m = a.shape[0]
    k = c.shape[0]

    for l in range(k):
        if itran[l] == 1:
            live[l] = m + 1

    for i in range(m):
        step = i + 1
        indx += 1
        l1 = ic1[i]

        if nc[l1] != 1:
            if ncp[l1] != 0:
                d[i] = squared_distance(a, i, c, l1) * an1[l1]

            l2 = ic2[i]
            ll = l2
            r2 = squared_distance(a, i, c, l2) * an2[l2]
            for l in range(k):
                if (step >= live[l1] and step >= live[l]) or l == l1 or l == ll:
                    continue
                rr = r2 / an2[l]
                dc = 0.0
                skip = False
                for j in range(a.shape[1]):
                    dd = a[i, j] - c[l, j]
                    dc += dd * dd
                    if dc >= rr:
                        skip = True
                        break
                if skip:
                    continue
                r2 = dc * an2[l]
                l2 = l

            if r2 >= d[i]:
                ic2[i] = l2
            else:
                indx = 0
                live[l1] = m + step
                live[l2] = m + step
                ncp[l1] = step
                ncp[l2] = step
                _move_point(a, i, c, l1, l2, nc, an1, an2, ic1, ic2)

        if indx == m:
            return indx

    for l in range(k):
        itran[l] = 0
        live[l] -= m
    return indx


@njit(cache=True, nogil=True)
def quick_transfer(a, c, ic1, ic2, nc, an1, an2, ncp, d, itran, indx):
    """Quick transfer до M шагов подряд без переноса. Возвращает indx."""
    m = a.shape[0]
    icoun = 0
    istep = 0
    max_steps = QTRAN_STEP_FACTOR * m

    while istep < max_steps:
        for i in range(m):
            icoun += 1
            istep += 1
            l1 = ic1[i]
            l2 = ic2[i]

            if nc[l1] != 1:
                if istep <= ncp[l1]:
                    d[i] = squared_distance(a, i, c, l1) * an1[l1]

                if not (istep >= ncp[l1] and istep >= ncp[l2]):
                    r2 = d[i] / an2[l2]
                    dd = 0.0
                    moved = True
                    for j in range(a.shape[1]):
                        de = a[i, j] - c[l2, j]
                        dd += de * de
                        if dd >= r2:
                            moved = False
                            break
                    if moved:
                        icoun = 0
                        indx = 0
                        itran[l1] = 1
                        itran[l2] = 1
                        ncp[l1] = istep + m
                        ncp[l2] = istep + m
                        _move_point(a, i, c, l1, l2, nc, an1, an2, ic1, ic2)

            if icoun == m:
                return indx
    return indx


@njit(cache=True, nogil=True)
def hartigan_wong(a, c0, max_iter):
    """
    Hartigan-Wong от начальных центров c0 (k >= 2).

    Returns:
        centers, labels, counts, wcss, iterations, status, history, history_len
        history - WCSS после каждой стадии (по свежим средним).
    """
    m = a.shape[0]
    k = c0.shape[0]
    c = c0.copy()

    ic1 = np.empty(m, dtype=np.int64)
    ic2 = np.empty(m, dtype=np.int64)
    nearest_two(a, c, ic1, ic2)

    c, nc = cluster_means(a, ic1, k)
    an1 = np.empty(k)
    an2 = np.empty(k)
    itran = np.ones(k, dtype=np.int64)
    ncp = np.full(k, -1, dtype=np.int64)
    live = np.zeros(k, dtype=np.int64)
    d = np.zeros(m)

    history = np.empty(2 * max_iter + 1)
    history[0] = labelled_wcss(a, c, ic1)
    history_len = 1

    for l in range(k):
        if nc[l] == 0:
            return c, ic1, nc, history[0], 0, EMPTY_CLUSTER, history, history_len
        an2[l] = nc[l] / (nc[l] + 1.0)
        an1[l] = BIG
        if nc[l] > 1:
            an1[l] = nc[l] / (nc[l] - 1.0)

    status = ITERATION_CAP
    iterations = 0
    indx = 0
    for it in range(max_iter):
        iterations = it + 1
        indx = optimal_transfer(a, c, ic1, ic2, nc, an1, an2, ncp, d, itran, live, indx)
        history[history_len] = _fresh_wcss(a, ic1, k)
        history_len += 1
        if indx == m:
            status = CONVERGED
            break

        indx = quick_transfer(a, c, ic1, ic2, nc, an1, an2, ncp, d, itran, indx)
        history[history_len] = _fresh_wcss(a, ic1, k)
        history_len += 1

        for l in range(k):
            ncp[l] = 0

    centers, counts = cluster_means(a, ic1, k)
    wcss = labelled_wcss(a, centers, ic1)
    return centers, ic1, counts, wcss, iterations, status, history, history_len
