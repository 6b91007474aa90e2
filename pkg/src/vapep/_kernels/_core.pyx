# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled search kernels.

Statement-for-statement mirror of the pure-Python twin in _ref.py: same
enumeration order, same pruning, same tie handling, so both backends return
bit-identical results.  Keep the two files in sync.
"""

from libc.stdlib cimport free, malloc

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil

NAME = "cython"

INF = 1 << 62

cdef long long C_INF = <long long> 1 << 62


cdef long long* _as_i64(object seq, Py_ssize_t length) except NULL:
    cdef long long* out = <long long*> malloc(sizeof(long long) * (length if length > 0 else 1))
    if out == NULL:
        raise MemoryError()
    cdef Py_ssize_t i
    try:
        for i in range(length):
            out[i] = seq[i]
    except BaseException:
        free(out)
        raise
    return out


def profile_search(k, ell, subs, minw, kinds, tvals, pkinds, pslopes, ptables,
                   clsA, clsB, sufun, evaluate, first_count=-1):
    """Compiled twin of _ref.profile_search; see that docstring."""
    cdef Py_ssize_t M = len(subs)
    cdef Py_ssize_t C = len(kinds)
    cdef int k_c = k
    cdef long long ell_c = ell
    cdef int first_c = first_count
    cdef unsigned long long full = (<unsigned long long> 1 << k_c) - 1

    cdef long long* subs_c = NULL
    cdef long long* minw_c = NULL
    cdef long long* kinds_c = NULL
    cdef long long* tvals_c = NULL
    cdef long long* pkinds_c = NULL
    cdef long long* pslopes_c = NULL
    cdef long long* sufun_c = NULL
    cdef long long* tflat = NULL
    cdef long long* toff = NULL
    cdef long long* tlen = NULL
    cdef long long* aflat = NULL
    cdef long long* aoff = NULL
    cdef long long* alen = NULL
    cdef long long* bflat = NULL
    cdef long long* boff = NULL
    cdef long long* blen = NULL
    cdef long long* cntA = NULL
    cdef long long* cntB = NULL
    cdef long long* val = NULL
    cdef long long* budb = NULL
    cdef unsigned long long* covb = NULL
    cdef long long* olbb = NULL

    cdef Py_ssize_t i, j2, pos, total
    cdef long long emitted = 0
    cdef long long m_assigned = 0
    cdef object inc = INF
    cdef long long inc_c = C_INF
    cdef Py_ssize_t j = 0
    cdef bint down = True
    cdef long long b, cw, z, a, bb, lo, c, hi, tl
    cdef unsigned long long cov
    cdef int kd
    cdef list pairs
    cdef object r

    try:
        subs_c = _as_i64(subs, M)
        minw_c = _as_i64(minw, M)
        kinds_c = _as_i64(kinds, C)
        tvals_c = _as_i64(tvals, C)
        pkinds_c = _as_i64(pkinds, C)
        pslopes_c = _as_i64(pslopes, C)
        sufun_c = _as_i64(sufun, len(sufun))

        toff = <long long*> malloc(sizeof(long long) * (C if C > 0 else 1))
        tlen = <long long*> malloc(sizeof(long long) * (C if C > 0 else 1))
        if toff == NULL or tlen == NULL:
            raise MemoryError()
        total = 0
        for i in range(C):
            toff[i] = total
            tlen[i] = len(ptables[i])
            total += tlen[i]
        tflat = <long long*> malloc(sizeof(long long) * (total if total > 0 else 1))
        if tflat == NULL:
            raise MemoryError()
        pos = 0
        for i in range(C):
            for j2 in range(tlen[i]):
                tflat[pos] = ptables[i][j2]
                pos += 1

        aoff = <long long*> malloc(sizeof(long long) * (M if M > 0 else 1))
        alen = <long long*> malloc(sizeof(long long) * (M if M > 0 else 1))
        boff = <long long*> malloc(sizeof(long long) * (M if M > 0 else 1))
        blen = <long long*> malloc(sizeof(long long) * (M if M > 0 else 1))
        if aoff == NULL or alen == NULL or boff == NULL or blen == NULL:
            raise MemoryError()
        total = 0
        for i in range(M):
            aoff[i] = total
            alen[i] = len(clsA[i])
            total += alen[i]
        aflat = <long long*> malloc(sizeof(long long) * (total if total > 0 else 1))
        if aflat == NULL:
            raise MemoryError()
        pos = 0
        for i in range(M):
            for j2 in range(alen[i]):
                aflat[pos] = clsA[i][j2]
                pos += 1
        total = 0
        for i in range(M):
            boff[i] = total
            blen[i] = len(clsB[i])
            total += blen[i]
        bflat = <long long*> malloc(sizeof(long long) * (total if total > 0 else 1))
        if bflat == NULL:
            raise MemoryError()
        pos = 0
        for i in range(M):
            for j2 in range(blen[i]):
                bflat[pos] = clsB[i][j2]
                pos += 1

        cntA = <long long*> malloc(sizeof(long long) * (C if C > 0 else 1))
        cntB = <long long*> malloc(sizeof(long long) * (C if C > 0 else 1))
        if cntA == NULL or cntB == NULL:
            raise MemoryError()
        for i in range(C):
            cntA[i] = 0
            cntB[i] = 0
        val = <long long*> malloc(sizeof(long long) * (M + 1))
        budb = <long long*> malloc(sizeof(long long) * (M + 2))
        covb = <unsigned long long*> malloc(sizeof(unsigned long long) * (M + 2))
        olbb = <long long*> malloc(sizeof(long long) * (M + 2))
        if val == NULL or budb == NULL or covb == NULL or olbb == NULL:
            raise MemoryError()
        for i in range(M + 1):
            val[i] = 0
        for i in range(M + 2):
            budb[i] = 0
            covb[i] = 0
            olbb[i] = 0
        budb[0] = ell_c

        # logic below mirrors _ref.profile_search
        while True:
            if down:
                b = budb[j]
                if b == 0 or j == M:
                    cov = covb[j]
                    if cov == full:
                        emitted += 1
                        cw = 0
                        for i in range(C):
                            kd = <int> kinds_c[i]
                            if kd == 0:  # shared users
                                z = cntA[i]
                            elif kd == 1:  # larger one-sided difference
                                a = cntA[i]
                                bb = cntB[i]
                                z = a if a >= bb else bb
                            elif kd == 2:  # equal assignments
                                if cntA[i] == 0 and cntB[i] == 0:
                                    cw += tvals_c[i]
                                continue
                            elif kd == 3:  # disjoint assignments
                                if cntA[i] == 0:
                                    cw += tvals_c[i]
                                continue
                            elif kd == 4:  # cardinality above t
                                z = cntA[i] - tvals_c[i]
                            elif kd == 5:  # cardinality below t
                                z = tvals_c[i] - cntA[i]
                            else:  # assigned-user count
                                z = m_assigned
                                if pkinds_c[i] == 2:
                                    cw += z * z
                                    continue
                            if z > 0:
                                if pkinds_c[i] == 1:
                                    tl = tlen[i]
                                    if z <= tl:
                                        cw += tflat[toff[i] + z - 1]
                                    else:
                                        cw += tflat[toff[i] + tl - 1] + pslopes_c[i] * (z - tl)
                                else:
                                    cw += pslopes_c[i] * z
                        if cw + olbb[j] < inc_c:
                            pairs = []
                            for j2 in range(j):
                                if val[j2]:
                                    pairs.append((j2, val[j2]))
                            r = evaluate(pairs, cw)
                            if r < inc:
                                inc = r
                                inc_c = r if r < C_INF else C_INF
                    down = False
                    j -= 1
                    continue
                cov = covb[j]
                if full & ~(cov | <unsigned long long> sufun_c[j]):
                    down = False
                    j -= 1
                    continue
                lo = first_c if (j == 0 and first_c >= 0) else 0
                if lo > b:
                    down = False
                    j -= 1
                    continue
                val[j] = lo
                if lo:
                    for i in range(alen[j]):
                        cntA[aflat[aoff[j] + i]] += lo
                    for i in range(blen[j]):
                        cntB[bflat[boff[j] + i]] += lo
                    m_assigned += lo
                    covb[j + 1] = cov | <unsigned long long> subs_c[j]
                else:
                    covb[j + 1] = cov
                budb[j + 1] = b - lo
                olbb[j + 1] = olbb[j] + lo * minw_c[j]
                j += 1
                continue
            # backtracking
            if j < 0:
                break
            c = val[j]
            if c:
                for i in range(alen[j]):
                    cntA[aflat[aoff[j] + i]] -= c
                for i in range(blen[j]):
                    cntB[bflat[boff[j] + i]] -= c
                m_assigned -= c
            hi = -1 if (j == 0 and first_c >= 0) else budb[j]
            if c >= hi:
                val[j] = 0
                j -= 1
                continue
            c += 1
            val[j] = c
            for i in range(alen[j]):
                cntA[aflat[aoff[j] + i]] += c
            for i in range(blen[j]):
                cntB[bflat[boff[j] + i]] += c
            m_assigned += c
            budb[j + 1] = budb[j] - c
            covb[j + 1] = covb[j] | <unsigned long long> subs_c[j]
            olbb[j + 1] = olbb[j] + c * minw_c[j]
            j += 1
            down = True
        return emitted, inc
    finally:
        free(subs_c); free(minw_c); free(kinds_c); free(tvals_c)
        free(pkinds_c); free(pslopes_c); free(sufun_c)
        free(tflat); free(toff); free(tlen)
        free(aflat); free(aoff); free(alen)
        free(bflat); free(boff); free(blen)
        free(cntA); free(cntB)
        free(val); free(budb); free(covb); free(olbb)


def brute_search(n, k, subs_all, otab, kinds, rA, rB, tvals, pkinds, pslopes,
                 ptables):
    """Compiled twin of _ref.brute_search; see that docstring."""
    cdef Py_ssize_t S = len(subs_all)
    cdef Py_ssize_t C = len(kinds)
    cdef int n_c = n
    cdef int k_c = k

    cdef long long* subs_c = NULL
    cdef long long* kinds_c = NULL
    cdef long long* rA_c = NULL
    cdef long long* rB_c = NULL
    cdef long long* tvals_c = NULL
    cdef long long* pkinds_c = NULL
    cdef long long* pslopes_c = NULL
    cdef long long* tflat = NULL
    cdef long long* toff = NULL
    cdef long long* tlen = NULL
    cdef long long* otab_c = NULL
    cdef unsigned long long* rmask = NULL
    cdef long long* val = NULL
    cdef long long* omb = NULL

    cdef Py_ssize_t i, j2, pos, total
    cdef long long inc = C_INF
    cdef object best = None
    cdef long long leaves = 0
    cdef Py_ssize_t j = 0
    cdef bint down = True
    cdef long long s, b, cw, z, z1, z2, total_w, tl
    cdef unsigned long long ubit, m, am, bm, allm
    cdef int r, kd
    cdef bint complete

    try:
        subs_c = _as_i64(subs_all, S)
        kinds_c = _as_i64(kinds, C)
        rA_c = _as_i64(rA, C)
        rB_c = _as_i64(rB, C)
        tvals_c = _as_i64(tvals, C)
        pkinds_c = _as_i64(pkinds, C)
        pslopes_c = _as_i64(pslopes, C)

        toff = <long long*> malloc(sizeof(long long) * (C if C > 0 else 1))
        tlen = <long long*> malloc(sizeof(long long) * (C if C > 0 else 1))
        if toff == NULL or tlen == NULL:
            raise MemoryError()
        total = 0
        for i in range(C):
            toff[i] = total
            tlen[i] = len(ptables[i])
            total += tlen[i]
        tflat = <long long*> malloc(sizeof(long long) * (total if total > 0 else 1))
        if tflat == NULL:
            raise MemoryError()
        pos = 0
        for i in range(C):
            for j2 in range(tlen[i]):
                tflat[pos] = ptables[i][j2]
                pos += 1

        otab_c = <long long*> malloc(sizeof(long long) * (n_c * S if n_c * S > 0 else 1))
        if otab_c == NULL:
            raise MemoryError()
        for i in range(n_c):
            row = otab[i]
            for j2 in range(S):
                otab_c[i * S + j2] = row[j2]

        rmask = <unsigned long long*> malloc(sizeof(unsigned long long) * (k_c if k_c > 0 else 1))
        if rmask == NULL:
            raise MemoryError()
        for i in range(k_c):
            rmask[i] = 0
        val = <long long*> malloc(sizeof(long long) * (n_c + 1))
        omb = <long long*> malloc(sizeof(long long) * (n_c + 2))
        if val == NULL or omb == NULL:
            raise MemoryError()
        for i in range(n_c + 1):
            val[i] = 0
        for i in range(n_c + 2):
            omb[i] = 0

        while True:
            if down:
                if j == n_c:
                    leaves += 1
                    complete = True
                    for r in range(k_c):
                        if rmask[r] == 0:
                            complete = False
                            break
                    if complete:
                        cw = 0
                        for i in range(C):
                            kd = <int> kinds_c[i]
                            if kd == 0:
                                z = __builtin_popcountll(rmask[rA_c[i]] & rmask[rB_c[i]])
                            elif kd == 1:
                                am = rmask[rA_c[i]]
                                bm = rmask[rB_c[i]]
                                z1 = __builtin_popcountll(am & ~bm)
                                z2 = __builtin_popcountll(bm & ~am)
                                z = z1 if z1 >= z2 else z2
                            elif kd == 2:
                                if rmask[rA_c[i]] == rmask[rB_c[i]]:
                                    cw += tvals_c[i]
                                continue
                            elif kd == 3:
                                if not (rmask[rA_c[i]] & rmask[rB_c[i]]):
                                    cw += tvals_c[i]
                                continue
                            elif kd == 4:
                                z = __builtin_popcountll(rmask[rA_c[i]]) - tvals_c[i]
                            elif kd == 5:
                                z = tvals_c[i] - __builtin_popcountll(rmask[rA_c[i]])
                            else:
                                allm = 0
                                for r in range(k_c):
                                    allm |= rmask[r]
                                z = __builtin_popcountll(allm)
                                if pkinds_c[i] == 2:
                                    cw += z * z
                                    continue
                            if z > 0:
                                if pkinds_c[i] == 1:
                                    tl = tlen[i]
                                    if z <= tl:
                                        cw += tflat[toff[i] + z - 1]
                                    else:
                                        cw += tflat[toff[i] + tl - 1] + pslopes_c[i] * (z - tl)
                                else:
                                    cw += pslopes_c[i] * z
                        total_w = omb[n_c] + cw
                        if total_w < inc:
                            inc = total_w
                            best = [val[i] for i in range(n_c)]
                    down = False
                    j -= 1
                    continue
                if omb[j] >= inc:
                    down = False
                    j -= 1
                    continue
                val[j] = 0  # empty set first; costs nothing
                omb[j + 1] = omb[j]
                j += 1
                continue
            if j < 0:
                break
            s = val[j]
            ubit = <unsigned long long> 1 << j
            m = <unsigned long long> subs_c[s]
            while m:
                r = __builtin_popcountll((m & (~m + 1)) - 1)
                rmask[r] &= ~ubit
                m &= m - 1
            s += 1
            b = omb[j]
            while s < S and b + otab_c[j * S + s] >= inc:
                s += 1
            if s >= S:
                val[j] = 0
                j -= 1
                continue
            val[j] = s
            m = <unsigned long long> subs_c[s]
            while m:
                r = __builtin_popcountll((m & (~m + 1)) - 1)
                rmask[r] |= ubit
                m &= m - 1
            omb[j + 1] = b + otab_c[j * S + s]
            j += 1
            down = True
        if inc >= C_INF:
            return INF, best, leaves
        return inc, best, leaves
    finally:
        free(subs_c); free(kinds_c); free(rA_c); free(rB_c)
        free(tvals_c); free(pkinds_c); free(pslopes_c)
        free(tflat); free(toff); free(tlen)
        free(otab_c); free(rmask); free(val); free(omb)
