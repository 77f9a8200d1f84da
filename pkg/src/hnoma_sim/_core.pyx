# cython: language_level=3
"""Compiled hot kernels: batched MPA, SC-list decoding, genie-aided SC.

Mirrors ``_pycore`` operation for operation; see that module for the layout
conventions. The polar kernels keep only tree levels >= 1 per path; level 0
is read straight from the channel LLRs.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log1p, fabs, fmin, copysign, tanh, atanh
from libc.string cimport memcpy

cnp.import_array()

cdef double FLOOR = 1e-300
cdef double BOXPLUS_SWITCH = 15.0


cdef inline double _f_minsum(double a, double b) noexcept nogil:
    # sign(a) sign(b) min(|a|, |b|); a zero magnitude makes the sign irrelevant
    return copysign(1.0, a) * copysign(1.0, b) * fmin(fabs(a), fabs(b))


cdef inline double _f_exact(double a, double b) noexcept nogil:
    # tanh form is cancellation free; it saturates once both magnitudes are large
    cdef double fa = fabs(a), fb = fabs(b)
    cdef double s = copysign(1.0, a) * copysign(1.0, b)
    if fmin(fa, fb) < BOXPLUS_SWITCH:
        return s * 2.0 * atanh(tanh(0.5 * fa) * tanh(0.5 * fb))
    return s * ((fmin(fa, fb) + log1p(exp(-(fa + fb)))) - log1p(exp(-fabs(fa - fb))))


cdef inline void _floor_normalise(double* x, int M) noexcept nogil:
    cdef int s
    cdef double tot = 0.0
    for s in range(M):
        if x[s] < FLOOR:
            x[s] = FLOOR
        tot += x[s]
    for s in range(M):
        x[s] /= tot


cdef inline void _resource_update3(const double* phi, const double* nu, double* mu, int M) noexcept nogil:
    cdef int s0, s1, s2, c = 0
    cdef double a0, a1, a2, p, p01, acc0
    cdef const double* nu0 = nu
    cdef const double* nu1 = nu + M
    cdef const double* nu2 = nu + 2 * M
    cdef double* m0 = mu
    cdef double* m1 = mu + M
    cdef double* m2 = mu + 2 * M
    for s0 in range(3 * M):
        mu[s0] = 0.0
    for s0 in range(M):
        a0 = nu0[s0]
        acc0 = 0.0
        for s1 in range(M):
            a1 = nu1[s1]
            for s2 in range(M):
                p = phi[c]
                a2 = nu2[s2]
                acc0 += p * a1 * a2
                m1[s1] += p * a0 * a2
                m2[s2] += p * a0 * a1
                c += 1
        m0[s0] = acc0


cdef inline void _resource_update4(const double* phi, const double* nu, double* mu, int M) noexcept nogil:
    cdef int s0, s1, s2, s3, c = 0
    cdef double a0, a1, a2, a3, p, acc0
    cdef const double* nu0 = nu
    cdef const double* nu1 = nu + M
    cdef const double* nu2 = nu + 2 * M
    cdef const double* nu3 = nu + 3 * M
    cdef double* m1 = mu + M
    cdef double* m2 = mu + 2 * M
    cdef double* m3 = mu + 3 * M
    for s0 in range(4 * M):
        mu[s0] = 0.0
    for s0 in range(M):
        a0 = nu0[s0]
        acc0 = 0.0
        for s1 in range(M):
            a1 = nu1[s1]
            for s2 in range(M):
                a2 = nu2[s2]
                for s3 in range(M):
                    p = phi[c]
                    a3 = nu3[s3]
                    acc0 += p * a1 * a2 * a3
                    m1[s1] += p * a0 * a2 * a3
                    m2[s2] += p * a0 * a1 * a3
                    m3[s3] += p * a0 * a1 * a2
                    c += 1
        mu[s0] = acc0


cdef inline void _resource_update(const double* phi, const double* nu, double* mu,
                                  const int* digits, double* wk, int M, int d_f, int C) noexcept nogil:
    cdef int c, k, k2
    cdef double w
    cdef const int* dg
    if d_f == 3:
        _resource_update3(phi, nu, mu, M)
        return
    if d_f == 4:
        _resource_update4(phi, nu, mu, M)
        return
    for c in range(d_f * M):
        mu[c] = 0.0
    for c in range(C):
        dg = digits + c * d_f
        for k in range(d_f):
            wk[k] = nu[k * M + dg[k]]
        for k in range(d_f):
            w = phi[c]
            for k2 in range(d_f):
                if k2 != k:
                    w = w * wk[k2]
            mu[k * M + dg[k]] += w


def mpa_batch(const double complex[:, ::1] y,
              const double complex[:, ::1] gains,
              const double[:, ::1] noise_var,
              const double complex[:, :, ::1] codewords,
              const int[:, ::1] resource_users,
              const int[:, ::1] user_resources,
              const int[:, ::1] user_slots,
              int iterations):
    cdef Py_ssize_t B = y.shape[0]
    cdef int Z = y.shape[1]
    cdef int J = codewords.shape[0]
    cdef int M = codewords.shape[1]
    cdef int d_f = resource_users.shape[1]
    cdef int d_v = user_resources.shape[1]
    cdef int C = M ** d_f

    digits_np = np.ascontiguousarray(
        (np.arange(C)[:, None] // M ** np.arange(d_f - 1, -1, -1)) % M, dtype=np.int32)
    cdef int[:, ::1] digits_mv = digits_np
    cdef const int* digits = &digits_mv[0, 0]
    post_np = np.empty((B, J, M), dtype=np.float64)
    cdef double[:, :, ::1] post = post_np
    cdef double[::1] phi_mv = np.empty(Z * C)
    cdef double[::1] dist_mv = np.empty(C)
    cdef double[::1] cre_mv = np.empty(d_f * M)
    cdef double[::1] cim_mv = np.empty(d_f * M)
    cdef double[::1] mu_mv = np.empty(Z * d_f * M)
    cdef double[::1] nu_mv = np.empty(Z * d_f * M)
    cdef double[::1] w_mv = np.empty(d_f)
    cdef double* phi = &phi_mv[0]
    cdef double* dist = &dist_mv[0]
    cdef double* cre = &cre_mv[0]
    cdef double* cim = &cim_mv[0]
    cdef double* mu = &mu_mv[0]
    cdef double* nu = &nu_mv[0]
    cdef double* wk = &w_mv[0]
    # edge index of (user j, its d-th resource) into the (Z, d_f) message arrays
    edge_np = np.ascontiguousarray(
        np.asarray(user_resources) * d_f + np.asarray(user_slots), dtype=np.int32)
    cdef int[:, ::1] edge = edge_np

    cdef Py_ssize_t b
    cdef int z, k, k2, c, s, j, d, d2, it, u
    cdef double gr, gi, xr, xi, tr, ti, yr, yi, dr, di, dmin, w, nvz
    cdef double* phiz
    cdef double* row
    cdef double* nuz
    cdef double* muz
    cdef const int* dg

    with nogil:
        for b in range(B):
            for z in range(Z):
                for k in range(d_f):
                    u = resource_users[z, k]
                    gr = gains[b, u].real
                    gi = gains[b, u].imag
                    for s in range(M):
                        xr = codewords[u, s, z].real
                        xi = codewords[u, s, z].imag
                        cre[k * M + s] = gr * xr - gi * xi
                        cim[k * M + s] = gr * xi + gi * xr
                yr = y[b, z].real
                yi = y[b, z].imag
                dmin = 1e308
                for c in range(C):
                    dg = digits + c * d_f
                    tr = 0.0
                    ti = 0.0
                    for k in range(d_f):
                        tr = tr + cre[k * M + dg[k]]
                        ti = ti + cim[k * M + dg[k]]
                    dr = yr - tr
                    di = yi - ti
                    dist[c] = dr * dr + di * di
                    if dist[c] < dmin:
                        dmin = dist[c]
                nvz = noise_var[b, z]
                phiz = phi + z * C
                for c in range(C):
                    phiz[c] = exp(-(dist[c] - dmin) / nvz)

            for c in range(Z * d_f * M):
                nu[c] = 1.0 / M

            for it in range(iterations):
                for z in range(Z):
                    phiz = phi + z * C
                    nuz = nu + z * d_f * M
                    muz = mu + z * d_f * M
                    _resource_update(phiz, nuz, muz, digits, wk, M, d_f, C)
                    for k in range(d_f):
                        _floor_normalise(muz + k * M, M)
                for j in range(J):
                    for d in range(d_v):
                        row = nu + edge[j, d] * M
                        for s in range(M):
                            w = 1.0
                            for d2 in range(d_v):
                                if d2 != d:
                                    w = w * mu[edge[j, d2] * M + s]
                            row[s] = w
                        _floor_normalise(row, M)

            for j in range(J):
                for s in range(M):
                    w = 1.0
                    for d in range(d_v):
                        w = w * mu[edge[j, d] * M + s]
                    post[b, j, s] = w
                _floor_normalise(&post[b, j, 0], M)
    return post_np


cdef inline int _start_depth(int i, int m) noexcept nogil:
    cdef int x, nbits = 0
    if i == 0:
        return 0
    x = i ^ (i - 1)
    while x:
        nbits += 1
        x >>= 1
    return m - nbits


cdef void _descend_path(const double* chan, double* alpha, const unsigned char* beta_left,
                        int i, int m, int n, bint exact) noexcept nogil:
    # alpha/beta_left hold levels >= 1: level d lives at 2n - 2(n>>d) - n
    cdef int start = _start_depth(i, m)
    cdef int d, t, N, h
    cdef const double* parent
    cdef double* child
    cdef const unsigned char* bl
    for d in range(start, m):
        N = n >> d
        h = N >> 1
        if d == 0:
            parent = chan
        else:
            parent = alpha + (n - 2 * N)
        child = alpha + (n - N)
        if (i >> (m - 1 - d)) & 1:
            bl = beta_left + (n - N)
            for t in range(h):
                child[t] = parent[h + t] + (1.0 - 2.0 * bl[t]) * parent[t]
        elif exact:
            for t in range(h):
                child[t] = _f_exact(parent[t], parent[h + t])
        else:
            for t in range(h):
                child[t] = _f_minsum(parent[t], parent[h + t])


cdef void _ascend_path(unsigned char* beta_left, unsigned char* scratch, unsigned char bit,
                       int i, int m, int n) noexcept nogil:
    # scratch uses the same (level >= 0) offsets as _pycore: level d at 2n - 2(n>>d)
    cdef int d, t, N, o, po
    scratch[2 * n - 2] = bit
    for d in range(m, 0, -1):
        N = n >> d
        o = 2 * n - 2 * N
        if not ((i >> (m - d)) & 1):
            memcpy(beta_left + (o - n), scratch + o, N)
            return
        po = 2 * n - 4 * N
        for t in range(N):
            scratch[po + t] = beta_left[o - n + t] ^ scratch[o + t]
            scratch[po + N + t] = scratch[o + t]


def scl_batch(const double[:, ::1] llrs, const unsigned char[::1] info_mask, int list_size):
    cdef Py_ssize_t B = llrs.shape[0]
    cdef int n = llrs.shape[1]
    cdef int m = 0
    while (1 << m) < n:
        m += 1
    cdef int L = list_size

    out_u_np = np.zeros((B, L, n), dtype=np.uint8)
    out_pm_np = np.full((B, L), np.inf)
    out_np_np = np.zeros(B, dtype=np.int64)
    cdef unsigned char[:, :, ::1] out_u = out_u_np
    cdef double[:, ::1] out_pm = out_pm_np
    cdef long long[::1] out_np = out_np_np

    cdef int tree = n - 1 if n > 1 else 1
    cdef double[:, ::1] alpha = np.zeros((L, tree))
    cdef unsigned char[:, ::1] beta_left = np.zeros((L, tree), dtype=np.uint8)
    cdef unsigned char[:, ::1] uhat = np.zeros((L, n), dtype=np.uint8)
    cdef unsigned char[::1] scratch = np.zeros(2 * n, dtype=np.uint8)
    cdef double[::1] metric = np.zeros(L)
    cdef double[::1] lam = np.zeros(L)
    cdef int[::1] order = np.zeros(L, dtype=np.int32)       # logical -> slot
    cdef int[::1] new_order = np.zeros(L, dtype=np.int32)
    cdef double[::1] cand_pm = np.zeros(2 * L)
    cdef int[::1] cand_parent = np.zeros(2 * L, dtype=np.int32)
    cdef int[::1] cand_bit = np.zeros(2 * L, dtype=np.int32)
    cdef int[::1] cand_idx = np.zeros(2 * L, dtype=np.int32)
    cdef int[::1] claimed = np.zeros(L, dtype=np.int32)
    cdef int[::1] survivors = np.zeros(L, dtype=np.int32)
    cdef int[::1] free_slots = np.zeros(L, dtype=np.int32)
    cdef double[::1] new_metric = np.zeros(L)

    cdef Py_ssize_t b
    cdef int i, l, P, nc, keep, a, c, t, slot, parent_slot, nfree, tmp
    cdef double x, pm

    with nogil:
        for b in range(B):
            for l in range(L):
                order[l] = l
            P = 1
            metric[0] = 0.0
            for i in range(n):
                for l in range(P):
                    slot = order[l]
                    if n > 1:
                        _descend_path(&llrs[b, 0], &alpha[slot, 0], &beta_left[slot, 0], i, m, n, False)
                        lam[l] = alpha[slot, n - 2]
                    else:
                        lam[l] = llrs[b, 0]
                if not info_mask[i]:
                    for l in range(P):
                        slot = order[l]
                        uhat[slot, i] = 0
                        if lam[l] < 0:
                            metric[slot] += -lam[l]
                else:
                    nc = 0
                    for l in range(P):
                        slot = order[l]
                        x = lam[l]
                        cand_pm[nc] = metric[slot] + (-x if x < 0 else 0.0)
                        cand_parent[nc] = l
                        cand_bit[nc] = 0
                        nc += 1
                        cand_pm[nc] = metric[slot] + (x if x >= 0 else 0.0)
                        cand_parent[nc] = l
                        cand_bit[nc] = 1
                        nc += 1
                    # stable insertion sort of candidate indices by metric
                    for c in range(nc):
                        cand_idx[c] = c
                    for c in range(1, nc):
                        tmp = cand_idx[c]
                        a = c - 1
                        while a >= 0 and cand_pm[cand_idx[a]] > cand_pm[tmp]:
                            cand_idx[a + 1] = cand_idx[a]
                            a -= 1
                        cand_idx[a + 1] = tmp
                    keep = nc if nc < L else L

                    for l in range(P):
                        survivors[l] = 0
                        claimed[l] = 0
                    for c in range(keep):
                        survivors[cand_parent[cand_idx[c]]] += 1
                    nfree = 0
                    for l in range(P):
                        if survivors[l] == 0:
                            free_slots[nfree] = order[l]
                            nfree += 1
                    for l in range(P, L):
                        free_slots[nfree] = order[l]
                        nfree += 1
                    for c in range(keep):
                        a = cand_parent[cand_idx[c]]
                        parent_slot = order[a]
                        if not claimed[a]:
                            claimed[a] = 1
                            slot = parent_slot
                        else:
                            nfree -= 1
                            slot = free_slots[nfree]
                            memcpy(&alpha[slot, 0], &alpha[parent_slot, 0], tree * sizeof(double))
                            memcpy(&beta_left[slot, 0], &beta_left[parent_slot, 0], tree)
                            memcpy(&uhat[slot, 0], &uhat[parent_slot, 0], n)
                        new_order[c] = slot
                        new_metric[c] = cand_pm[cand_idx[c]]
                    for c in range(keep):
                        order[c] = new_order[c]
                        metric[new_order[c]] = new_metric[c]
                        uhat[new_order[c], i] = <unsigned char>cand_bit[cand_idx[c]]
                    for c in range(keep, L):
                        nfree -= 1
                        order[c] = free_slots[nfree]
                    P = keep
                for l in range(P):
                    slot = order[l]
                    if n > 1:
                        _ascend_path(&beta_left[slot, 0], &scratch[0], uhat[slot, i], i, m, n)
            out_np[b] = P
            for l in range(P):
                slot = order[l]
                out_pm[b, l] = metric[slot]
                for t in range(n):
                    out_u[b, l, t] = uhat[slot, t]
    return out_u_np, out_pm_np, out_np_np


cdef void _genie_visit(const double* a, int N, int offset, double* buf, long long* errors) noexcept nogil:
    # depth first; children live in buf[0:h], deeper levels use buf[h:]
    cdef int h, t
    if N == 1:
        if a[0] < 0:
            errors[offset] += 1
        return
    h = N >> 1
    for t in range(h):
        buf[t] = _f_exact(a[t], a[t + h])
    _genie_visit(buf, h, offset, buf + h, errors)
    for t in range(h):
        buf[t] = a[t + h] + a[t]  # genie: partial sums are zero
    _genie_visit(buf, h, offset + h, buf + h, errors)


def genie_sc_errors(const double[:, ::1] llrs):
    cdef Py_ssize_t Q = llrs.shape[0]
    cdef int n = llrs.shape[1]
    errors_np = np.zeros(n, dtype=np.int64)
    cdef long long[::1] errors = errors_np
    cdef double[::1] buf = np.zeros(n)
    cdef Py_ssize_t q
    with nogil:
        for q in range(Q):
            _genie_visit(&llrs[q, 0], n, 0, &buf[0], &errors[0])
    return errors_np
