"""Pure-Python reference kernels for the spin chains.

These are the semantics-defining implementations: plain single-site
heat-bath updates, their monotone coupling (shared site, shared uniform,
accept +1 iff u < p), tracked-set updates (resample one tracked site
jointly with the whole untracked set, integrating the untracked set out),
their monotone coupling, and full block resampling by inverse-CDF walk.

The compiled backend must reproduce these bit for bit: every float
operation here happens in the same order with the same libm calls, so a
trajectory generated from identical draw arrays is identical in either
backend. Keep the arithmetic structure in sync with ``_core.pyx``.

``fmask`` marks the statistic subset: recorded sums are always the spin
sum over the masked vertices. Coupled kernels return the pair
(final Hamming distance, count of order violations at updated sites).
"""

from __future__ import annotations

from math import exp

__all__ = [
    "run_glauber",
    "run_glauber_coupled",
    "run_block_marginal",
    "run_block_marginal_coupled",
    "run_block_full",
]


def _heat_bath_p(m: float) -> float:
    if m >= 0.0:
        return 1.0 / (1.0 + exp(-2.0 * m))
    e = exp(2.0 * m)
    return e / (1.0 + e)


def run_glauber(spins, indptr, indices, weights, field, fmask, sites,
                uniforms, sums_out, record):
    """Single-site heat-bath sweep driven by pre-drawn sites/uniforms.

    Updates ``spins`` in place; when ``record`` is true writes the running
    masked spin sum after each step into ``sums_out``. Returns the final
    masked sum.
    """
    T = sites.shape[0]
    # accumulate in Python ints: += with an int8 element would silently
    # promote the accumulator to int8 and wrap beyond +-127
    total = 0
    for v in range(spins.shape[0]):
        if fmask[v]:
            total += int(spins[v])
    for t in range(T):
        v = sites[t]
        m = field[v]
        for k in range(indptr[v], indptr[v + 1]):
            m += weights[k] * spins[indices[k]]
        p = _heat_bath_p(m)
        new = 1 if uniforms[t] < p else -1
        if fmask[v]:
            total += new - int(spins[v])
        spins[v] = new
        if record:
            sums_out[t] = total
    return total


def run_glauber_coupled(hi, lo, indptr, indices, weights, field, fmask,
                        sites, uniforms, dist_out, sums_hi, sums_lo, record):
    """Monotone coupling of two single-site chains (same site, same uniform).

    Preserves coordinatewise order between the chains. Returns the final
    Hamming distance together with the number of steps whose fresh values
    came out anti-ordered (always 0 when started ordered, by construction);
    optionally records distance and both masked sums after every step.
    """
    T = sites.shape[0]
    n = hi.shape[0]
    dist = 0
    tot_hi = 0
    tot_lo = 0
    violations = 0
    for v in range(n):
        if fmask[v]:
            tot_hi += int(hi[v])
            tot_lo += int(lo[v])
        if hi[v] != lo[v]:
            dist += 1
    for t in range(T):
        v = sites[t]
        u = uniforms[t]
        m = field[v]
        for k in range(indptr[v], indptr[v + 1]):
            m += weights[k] * hi[indices[k]]
        new_hi = 1 if u < _heat_bath_p(m) else -1
        m = field[v]
        for k in range(indptr[v], indptr[v + 1]):
            m += weights[k] * lo[indices[k]]
        new_lo = 1 if u < _heat_bath_p(m) else -1
        if new_hi < new_lo:
            violations += 1
        if hi[v] != lo[v]:
            dist -= 1
        if new_hi != new_lo:
            dist += 1
        if fmask[v]:
            tot_hi += new_hi - int(hi[v])
            tot_lo += new_lo - int(lo[v])
        hi[v] = new_hi
        lo[v] = new_lo
        if record:
            dist_out[t] = dist
            sums_hi[t] = tot_hi
            sums_lo[t] = tot_lo
    return dist, violations


def _tracked_plus_probability(j, z, B, fields, ia_ptr, ia_a, ia_b, ia_w,
                              cr_ptr, cr_a, cr_g, cr_w, scratch):
    """P(tracked site of block j lands on +1 | tracked spins off j).

    Enumerates the 2^B joint configurations of the block (tracked site at
    position 0 plus every untracked site), weighting each by its conditional
    Gibbs factor; terms constant on the block cancel.
    """
    nconf = 1 << B
    emax = -1e308
    for c in range(nconf):
        e = 0.0
        for k in range(ia_ptr[j], ia_ptr[j + 1]):
            sa = 1.0 if (c >> ia_a[k]) & 1 else -1.0
            sb = 1.0 if (c >> ia_b[k]) & 1 else -1.0
            e += ia_w[k] * sa * sb
        for k in range(cr_ptr[j], cr_ptr[j + 1]):
            sa = 1.0 if (c >> cr_a[k]) & 1 else -1.0
            e += cr_w[k] * sa * z[cr_g[k]]
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


def run_block_marginal(z, B, fields, ia_ptr, ia_a, ia_b, ia_w,
                       cr_ptr, cr_a, cr_g, cr_w, sites, uniforms, scratch,
                       sums_out, record):
    """Tracked-set chain: each step resamples one tracked site jointly with
    all untracked sites (conditioned on the other tracked spins) and keeps
    only the tracked site's new value. ``z`` holds the tracked spins in
    sorted-vertex order; ``sites`` indexes into it. Returns the final sum."""
    T = sites.shape[0]
    total = 0
    for j in range(z.shape[0]):
        total += int(z[j])
    for t in range(T):
        j = sites[t]
        q = _tracked_plus_probability(j, z, B, fields, ia_ptr, ia_a, ia_b,
                                      ia_w, cr_ptr, cr_a, cr_g, cr_w, scratch)
        new = 1 if uniforms[t] < q else -1
        total += new - int(z[j])
        z[j] = new
        if record:
            sums_out[t] = total
    return total


def run_block_marginal_coupled(z_hi, z_lo, B, fields, ia_ptr, ia_a, ia_b,
                               ia_w, cr_ptr, cr_a, cr_g, cr_w, sites,
                               uniforms, scratch, dist_out, sums_hi, sums_lo,
                               record):
    """Monotone coupling of two tracked-set chains. Returns (final Hamming
    distance over the tracked set, order-violation count); records distance
    and both sums per step when asked."""
    T = sites.shape[0]
    k = z_hi.shape[0]
    dist = 0
    tot_hi = 0
    tot_lo = 0
    violations = 0
    for j in range(k):
        tot_hi += int(z_hi[j])
        tot_lo += int(z_lo[j])
        if z_hi[j] != z_lo[j]:
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
        tot_hi += new_hi - int(z_hi[j])
        tot_lo += new_lo - int(z_lo[j])
        z_hi[j] = new_hi
        z_lo[j] = new_lo
        if record:
            dist_out[t] = dist
            sums_hi[t] = tot_hi
            sums_lo[t] = tot_lo
    return dist, violations


def run_block_full(spins, B, fields, ia_ptr, ia_a, ia_b, ia_w,
                   cr_ptr, cr_a, cr_g, cr_w, members, fmask, sites, uniforms,
                   scratch, sums_out, record):
    """Full-state block chain: resample tracked site + all untracked sites
    jointly from their conditional law, by inverse-CDF walk over the 2^B
    block configurations. ``cr_g`` here holds global vertex ids and
    ``members[j]`` lists the block's global vertex ids (tracked site first).
    Returns the final masked spin sum."""
    T = sites.shape[0]
    nconf = 1 << B
    total = 0
    for v in range(spins.shape[0]):
        if fmask[v]:
            total += int(spins[v])
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
                e += cr_w[k] * sa * spins[cr_g[k]]
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
                total += new - int(spins[v])
            spins[v] = new
        if record:
            sums_out[t] = total
    return total
