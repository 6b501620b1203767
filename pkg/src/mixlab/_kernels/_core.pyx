# cython: language_level=3
"""Compiled spin-chain kernels.

Line-for-line translation of ``_ref.py`` with C types. The float arithmetic
(order of operations, libm exp) matches the reference exactly, so both
backends produce bit-identical trajectories from identical draw arrays.
Any change here must be mirrored in ``_ref.py``.
"""

from libc.math cimport exp

cimport numpy as cnp

ctypedef cnp.int8_t spin_t
ctypedef cnp.int64_t idx_t


cdef inline double _heat_bath_p(double m) noexcept nogil:
    cdef double e
    if m >= 0.0:
        return 1.0 / (1.0 + exp(-2.0 * m))
    e = exp(2.0 * m)
    return e / (1.0 + e)


def run_glauber(spin_t[:] spins, const idx_t[:] indptr, const idx_t[:] indices,
                const double[:] weights, const double[:] field, const spin_t[:] fmask,
                const idx_t[:] sites, const double[:] uniforms, idx_t[:] sums_out,
                bint record):
    cdef Py_ssize_t T = sites.shape[0]
    cdef Py_ssize_t t, k
    cdef idx_t v
    cdef long long total = 0
    cdef double m
    cdef spin_t new
    for v in range(spins.shape[0]):
        if fmask[v]:
            total += spins[v]
    for t in range(T):
        v = sites[t]
        m = field[v]
        for k in range(indptr[v], indptr[v + 1]):
            m += weights[k] * (<double> spins[indices[k]])
        new = 1 if uniforms[t] < _heat_bath_p(m) else -1
        if fmask[v]:
            total += new - spins[v]
        spins[v] = new
        if record:
            sums_out[t] = total
    return total


def run_glauber_coupled(spin_t[:] hi, spin_t[:] lo, const idx_t[:] indptr,
                        const idx_t[:] indices, const double[:] weights, const double[:] field,
                        const spin_t[:] fmask, const idx_t[:] sites, const double[:] uniforms,
                        idx_t[:] dist_out, idx_t[:] sums_hi, idx_t[:] sums_lo,
                        bint record):
    cdef Py_ssize_t T = sites.shape[0]
    cdef Py_ssize_t n = hi.shape[0]
    cdef Py_ssize_t t, k
    cdef idx_t v
    cdef long long dist = 0, tot_hi = 0, tot_lo = 0, violations = 0
    cdef double m, u
    cdef spin_t new_hi, new_lo
    for v in range(n):
        if fmask[v]:
            tot_hi += hi[v]
            tot_lo += lo[v]
        if hi[v] != lo[v]:
            dist += 1
    for t in range(T):
        v = sites[t]
        u = uniforms[t]
        m = field[v]
        for k in range(indptr[v], indptr[v + 1]):
            m += weights[k] * (<double> hi[indices[k]])
        new_hi = 1 if u < _heat_bath_p(m) else -1
        m = field[v]
        for k in range(indptr[v], indptr[v + 1]):
            m += weights[k] * (<double> lo[indices[k]])
        new_lo = 1 if u < _heat_bath_p(m) else -1
        if new_hi < new_lo:
            violations += 1
        if hi[v] != lo[v]:
            dist -= 1
        if new_hi != new_lo:
            dist += 1
        if fmask[v]:
            tot_hi += new_hi - hi[v]
            tot_lo += new_lo - lo[v]
        hi[v] = new_hi
        lo[v] = new_lo
        if record:
            dist_out[t] = dist
            sums_hi[t] = tot_hi
            sums_lo[t] = tot_lo
    return dist, violations


cdef double _tracked_plus_probability(idx_t j, const spin_t[:] z, int B,
                                      const double[:, :] fields, const idx_t[:] ia_ptr,
                                      const idx_t[:] ia_a, const idx_t[:] ia_b,
                                      const double[:] ia_w, const idx_t[:] cr_ptr,
                                      const idx_t[:] cr_a, const idx_t[:] cr_g,
                                      const double[:] cr_w, double[:] scratch):
    cdef Py_ssize_t nconf = 1 << B
    cdef Py_ssize_t c, a
    cdef idx_t k
    cdef double e, sa, sb, emax, total, plus, w
    emax = -1e308
    for c in range(nconf):
        e = 0.0
        for k in range(ia_ptr[j], ia_ptr[j + 1]):
            sa = 1.0 if (c >> ia_a[k]) & 1 else -1.0
            sb = 1.0 if (c >> ia_b[k]) & 1 else -1.0
            e += ia_w[k] * sa * sb
        for k in range(cr_ptr[j], cr_ptr[j + 1]):
            sa = 1.0 if (c >> cr_a[k]) & 1 else -1.0
            e += cr_w[k] * sa * (<double> z[cr_g[k]])
        for a in range(B):
            sa = 1.0 if (c >> a) & 1 else -1.0
            e += fields[j, a] * sa
        scratch[c] = e
        if e > emax:
            emax = e
    total = 0.0
    plus = 0.0
    for c in range(nconf):
        w = exp(scratch[c] - emax)
        total += w
        if c & 1:
            plus += w
    return plus / total


def run_block_marginal(spin_t[:] z, int B, const double[:, :] fields,
                       const idx_t[:] ia_ptr, const idx_t[:] ia_a, const idx_t[:] ia_b,
                       const double[:] ia_w, const idx_t[:] cr_ptr, const idx_t[:] cr_a,
                       const idx_t[:] cr_g, const double[:] cr_w, const idx_t[:] sites,
                       const double[:] uniforms, double[:] scratch,
                       idx_t[:] sums_out, bint record):
    cdef Py_ssize_t T = sites.shape[0]
    cdef Py_ssize_t t
    cdef idx_t j
    cdef long long total = 0
    cdef double q
    cdef spin_t new
    for j in range(z.shape[0]):
        total += z[j]
    for t in range(T):
        j = sites[t]
        q = _tracked_plus_probability(j, z, B, fields, ia_ptr, ia_a, ia_b,
                                      ia_w, cr_ptr, cr_a, cr_g, cr_w, scratch)
        new = 1 if uniforms[t] < q else -1
        total += new - z[j]
        z[j] = new
        if record:
            sums_out[t] = total
    return total


def run_block_marginal_coupled(spin_t[:] z_hi, spin_t[:] z_lo, int B,
                               const double[:, :] fields, const idx_t[:] ia_ptr,
                               const idx_t[:] ia_a, const idx_t[:] ia_b, const double[:] ia_w,
                               const idx_t[:] cr_ptr, const idx_t[:] cr_a, const idx_t[:] cr_g,
                               const double[:] cr_w, const idx_t[:] sites,
                               const double[:] uniforms, double[:] scratch,
                               idx_t[:] dist_out, idx_t[:] sums_hi,
                               idx_t[:] sums_lo, bint record):
    cdef Py_ssize_t T = sites.shape[0]
    cdef Py_ssize_t kk
    cdef Py_ssize_t t
    cdef idx_t j
    cdef long long dist = 0, tot_hi = 0, tot_lo = 0, violations = 0
    cdef double q_hi, q_lo, u
    cdef spin_t new_hi, new_lo
    for kk in range(z_hi.shape[0]):
        tot_hi += z_hi[kk]
        tot_lo += z_lo[kk]
        if z_hi[kk] != z_lo[kk]:
            dist += 1
    for t in range(T):
        j = sites[t]
        u = uniforms[t]
        q_hi = _tracked_plus_probability(j, z_hi, B, fields, ia_ptr, ia_a,
                                         ia_b, ia_w, cr_ptr, cr_a, cr_g,
                                         cr_w, scratch)
        q_lo = _tracked_plus_probability(j, z_lo, B, fields, ia_ptr, ia_a,
                                         ia_b, ia_w, cr_ptr, cr_a, cr_g,
                                         cr_w, scratch)
        new_hi = 1 if u < q_hi else -1
        new_lo = 1 if u < q_lo else -1
        if new_hi < new_lo:
            violations += 1
        if z_hi[j] != z_lo[j]:
            dist -= 1
        if new_hi != new_lo:
            dist += 1
        tot_hi += new_hi - z_hi[j]
        tot_lo += new_lo - z_lo[j]
        z_hi[j] = new_hi
        z_lo[j] = new_lo
        if record:
            dist_out[t] = dist
            sums_hi[t] = tot_hi
            sums_lo[t] = tot_lo
    return dist, violations


def run_block_full(spin_t[:] spins, int B, const double[:, :] fields,
                   const idx_t[:] ia_ptr, const idx_t[:] ia_a, const idx_t[:] ia_b,
                   const double[:] ia_w, const idx_t[:] cr_ptr, const idx_t[:] cr_a,
                   const idx_t[:] cr_g, const double[:] cr_w, const idx_t[:, :] members,
                   const spin_t[:] fmask, const idx_t[:] sites, const double[:] uniforms,
                   double[:] scratch, idx_t[:] sums_out, bint record):
    cdef Py_ssize_t T = sites.shape[0]
    cdef Py_ssize_t nconf = 1 << B
    cdef Py_ssize_t t, c, a, pick
    cdef idx_t j, v, k
    cdef long long total = 0
    cdef double e, sa, sb, emax, tot_w, w, target, acc
    cdef spin_t new
    for v in range(spins.shape[0]):
        if fmask[v]:
            total += spins[v]
    for t in range(T):
        j = sites[t]
        emax = -1e308
        for c in range(nconf):
            e = 0.0
            for k in range(ia_ptr[j], ia_ptr[j + 1]):
                sa = 1.0 if (c >> ia_a[k]) & 1 else -1.0
                sb = 1.0 if (c >> ia_b[k]) & 1 else -1.0
                e += ia_w[k] * sa * sb
            for k in range(cr_ptr[j], cr_ptr[j + 1]):
                sa = 1.0 if (c >> cr_a[k]) & 1 else -1.0
                e += cr_w[k] * sa * (<double> spins[cr_g[k]])
            for a in range(B):
                sa = 1.0 if (c >> a) & 1 else -1.0
                e += fields[j, a] * sa
            scratch[c] = e
            if e > emax:
                emax = e
        tot_w = 0.0
        for c in range(nconf):
            w = exp(scratch[c] - emax)
            scratch[c] = w
            tot_w += w
        target = uniforms[t] * tot_w
        acc = 0.0
        pick = nconf - 1
        for c in range(nconf):
            acc += scratch[c]
            if acc > target:
                pick = c
                break
        for a in range(B):
            v = members[j, a]
            new = 1 if (pick >> a) & 1 else -1
            if fmask[v]:
                total += new - spins[v]
            spins[v] = new
        if record:
            sums_out[t] = total
    return total
