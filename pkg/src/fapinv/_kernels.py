"""Jitted inner loop of the sparse approximate solve.

This is the construction-time hot path: for a build on an n x n matrix the
projection step below runs O(n * steps) times, so it is written as a single
numba kernel over the raw CSC arrays. Semantics mirror the public
select_indices / project_update operations exactly (greedy largest-|r|
selection with first-occurrence tie break, support re-selection free of
budget, tiny Cholesky solve, column SAXPY updates in ascending index order).
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def solve_kernel(colptr, rowind, values, diag, b, k, m, threshold, lfil,
                 max_steps, stall_ratio, floor):
    r = b.copy()
    xacc = np.zeros(k)
    insup = np.zeros(k, dtype=np.bool_)
    nsup = 0
    steps = 0
    stop = threshold if threshold > floor else floor

    # the residual stays supported on the union of touched column patterns,
    # so scans run over an active list instead of all k entries
    active = np.empty(k, dtype=np.int64)
    in_active = np.zeros(k, dtype=np.bool_)
    nact = 0
    for i in range(k):
        if b[i] != 0.0:
            active[nact] = i
            in_active[i] = True
            nact += 1

    chosen = np.empty(m, dtype=np.int64)
    S = np.empty((m, m))
    L = np.empty((m, m))
    y = np.empty(m)

    while steps < max_steps:
        rnorm2 = 0.0
        for t in range(nact):
            ri = r[active[t]]
            rnorm2 += ri * ri
        if rnorm2 <= stop * stop:
            break

        # greedy selection: support indices are always eligible, new indices
        # are limited by the remaining fill budget; ties go to the smaller
        # index (scan order is ascending and keeps the first maximum)
        budget = lfil - nsup
        nsel = 0
        nnew = 0
        for _ in range(m):
            best = -1
            bestval = 0.0
            for t in range(nact):
                i = active[t]
                a = abs(r[i])
                if a == 0.0 or a < bestval or (a == bestval and best >= 0 and i > best):
                    continue
                if not insup[i] and nnew >= budget:
                    continue
                taken = False
                for u in range(nsel):
                    if chosen[u] == i:
                        taken = True
                        break
                if taken:
                    continue
                best = i
                bestval = a
            if best < 0:
                break
            chosen[nsel] = best
            nsel += 1
            if not insup[best]:
                nnew += 1
        if nsel == 0:
            break
        # ascending order (nsel is tiny)
        for a in range(1, nsel):
            v = chosen[a]
            p = a - 1
            while p >= 0 and chosen[p] > v:
                chosen[p + 1] = chosen[p]
                p -= 1
            chosen[p + 1] = v

        if nsup >= lfil:
            mass2 = 0.0
            for t in range(nsel):
                mass2 += r[chosen[t]] * r[chosen[t]]
            if mass2 <= (stall_ratio * stall_ratio) * rnorm2:
                break

        # gather the principal submatrix
        for q in range(nsel):
            jq = chosen[q]
            lo = colptr[jq]
            hi = colptr[jq + 1]
            for p in range(nsel):
                ip = chosen[p]
                if ip == jq:
                    S[p, q] = diag[jq]
                    continue
                val = 0.0
                a = lo
                c = hi
                while a < c:
                    mid = (a + c) // 2
                    if rowind[mid] < ip:
                        a = mid + 1
                    else:
                        c = mid
                if a < hi and rowind[a] == ip:
                    val = values[a]
                S[p, q] = val

        # Cholesky of S (breakdown cannot happen for a principal submatrix
        # of an SPD matrix; signal it to the wrapper via steps = -1)
        ok = True
        for j in range(nsel):
            piv = S[j, j]
            for t in range(j):
                piv -= L[j, t] * L[j, t]
            if piv <= 0.0:
                ok = False
                break
            L[j, j] = np.sqrt(piv)
            for i2 in range(j + 1, nsel):
                s = S[i2, j]
                for t in range(j):
                    s -= L[i2, t] * L[j, t]
                L[i2, j] = s / L[j, j]
        if not ok:
            return xacc, r, -1
        for j in range(nsel):
            s = r[chosen[j]]
            for t in range(j):
                s -= L[j, t] * y[t]
            y[j] = s / L[j, j]
        for j in range(nsel - 1, -1, -1):
            s = y[j]
            for t in range(j + 1, nsel):
                s -= L[t, j] * y[t]
            y[j] = s / L[j, j]

        # scatter into x and do the sparse column SAXPYs on the residual
        for t in range(nsel):
            j = chosen[t]
            was = xacc[j] != 0.0
            xacc[j] += y[t]
            now = xacc[j] != 0.0
            if now and not was:
                insup[j] = True
                nsup += 1
            elif was and not now:
                insup[j] = False
                nsup -= 1
            yj = y[t]
            for p in range(colptr[j], colptr[j + 1]):
                i = rowind[p]
                if i >= k:
                    break
                r[i] -= yj * values[p]
                if not in_active[i]:
                    active[nact] = i
                    in_active[i] = True
                    nact += 1
        steps += 1

    return xacc, r, steps
