"""Pure numpy implementations of the hot kernels.

Same signatures and semantics as the compiled ``_core`` extension; selected
automatically when the extension is not built (or ``HNOMA_SIM_BACKEND=python``).

Polar kernels share one memory layout: for ``n = 2**m`` the LLR tree keeps
level ``d`` (node size ``n >> d``) at offset ``2n - 2(n >> d)`` of a flat array.
"""
import numpy as np

FLOOR = 1e-300
BOXPLUS_SWITCH = 15.0


def combo_digits(M, d_f):
    """``(M**d_f, d_f)`` table; column k is the symbol of the k-th user of a resource."""
    c = np.arange(M**d_f)[:, None]
    return (c // M ** np.arange(d_f - 1, -1, -1)) % M


def _floor_normalise(x):
    np.maximum(x, FLOOR, out=x)
    x /= x.sum(axis=-1, keepdims=True)
    return x


def mpa_batch(y, gains, noise_var, codewords, resource_users, user_resources, user_slots, iterations):
    B, Z = y.shape
    J, M, _ = codewords.shape
    d_f = resource_users.shape[1]
    d_v = user_resources.shape[1]
    C = M**d_f
    digits = combo_digits(M, d_f)

    phi = np.empty((B, Z, C))
    for z in range(Z):
        users = resource_users[z]
        contrib = gains[:, users, None] * codewords[users, :, z][None]  # (B, d_f, M)
        total = np.zeros((B, C), dtype=np.complex128)
        for k in range(d_f):
            total += contrib[:, k, digits[:, k]]
        diff = y[:, z, None] - total
        dist = diff.real**2 + diff.imag**2
        dist -= dist.min(axis=1, keepdims=True)
        phi[:, z] = np.exp(-dist / noise_var[:, z, None])

    nu = np.full((B, Z, d_f, M), 1.0 / M)
    mu = np.empty((B, Z, d_f, M))
    for _ in range(iterations):
        for z in range(Z):
            for k in range(d_f):
                w = phi[:, z].copy()
                for k2 in range(d_f):
                    if k2 != k:
                        w *= nu[:, z, k2][:, digits[:, k2]]
                mu[:, z, k] = w.reshape(B, M**k, M, M ** (d_f - k - 1)).sum(axis=(1, 3))
        _floor_normalise(mu)
        for j in range(J):
            for d in range(d_v):
                prod = np.ones((B, M))
                for d2 in range(d_v):
                    if d2 != d:
                        prod *= mu[:, user_resources[j, d2], user_slots[j, d2]]
                nu[:, user_resources[j, d], user_slots[j, d]] = prod
        _floor_normalise(nu)

    post = np.ones((B, J, M))
    for j in range(J):
        for d in range(d_v):
            post[:, j] *= mu[:, user_resources[j, d], user_slots[j, d]]
    return _floor_normalise(post)


def _f_minsum(a, b):
    return np.copysign(1.0, a) * np.copysign(1.0, b) * np.minimum(np.abs(a), np.abs(b))


def _f_exact(a, b):
    fa, fb = np.abs(a), np.abs(b)
    s = np.copysign(1.0, a) * np.copysign(1.0, b)
    small = np.minimum(fa, fb) < BOXPLUS_SWITCH
    with np.errstate(divide="ignore"):
        via_tanh = 2.0 * np.arctanh(np.tanh(0.5 * fa) * np.tanh(0.5 * fb))
    jacobian = (np.minimum(fa, fb) + np.log1p(np.exp(-(fa + fb)))) - np.log1p(np.exp(-np.abs(fa - fb)))
    return s * np.where(small, via_tanh, jacobian)


def _g(a, b, u):
    return np.where(u.astype(bool), b - a, b + a)


class _Path:
    __slots__ = ("alpha", "beta_left", "u", "metric")

    def __init__(self, n):
        self.alpha = np.zeros(2 * n - 1)
        self.beta_left = np.zeros(2 * n - 1, dtype=np.uint8)
        self.u = np.zeros(n, dtype=np.uint8)
        self.metric = 0.0

    def clone(self):
        p = _Path.__new__(_Path)
        p.alpha = self.alpha.copy()
        p.beta_left = self.beta_left.copy()
        p.u = self.u.copy()
        p.metric = self.metric
        return p


def _descend(path, i, m, n):
    """Refresh the LLR tree of ``path`` down to leaf ``i``; returns the leaf LLR."""
    start = 0 if i == 0 else m - (i ^ (i - 1)).bit_length()
    a = path.alpha
    for d in range(start, m):
        N = n >> d
        h = N >> 1
        po = 2 * n - 2 * N
        co = 2 * n - N
        left, right = a[po : po + h], a[po + h : po + N]
        if (i >> (m - 1 - d)) & 1:
            a[co : co + h] = _g(left, right, path.beta_left[co : co + h])
        else:
            a[co : co + h] = _f_minsum(left, right)
    return a[2 * n - 2]


def _ascend(path, i, m, n, scratch):
    """Propagate the decision on leaf ``i`` into the partial-sum tree."""
    scratch[2 * n - 2] = path.u[i]
    for d in range(m, 0, -1):
        N = n >> d
        o = 2 * n - 2 * N
        if not (i >> (m - d)) & 1:
            path.beta_left[o : o + N] = scratch[o : o + N]
            return
        po = 2 * n - 4 * N
        left = path.beta_left[o : o + N]
        cur = scratch[o : o + N]
        scratch[po : po + N] = left ^ cur
        scratch[po + N : po + 2 * N] = cur


def scl_batch(llrs, info_mask, list_size):
    """SC-list decoding of a ``(B, n)`` LLR batch.

    Returns ``(paths (B, L, n) uint8, metrics (B, L), n_paths (B,))`` with
    surviving paths in list order; unused slots hold zeros / ``inf``.
    """
    B, n = llrs.shape
    m = n.bit_length() - 1
    L = list_size
    out_u = np.zeros((B, L, n), dtype=np.uint8)
    out_pm = np.full((B, L), np.inf)
    out_np = np.zeros(B, dtype=np.int64)
    scratch = np.zeros(2 * n - 1, dtype=np.uint8)
    for b in range(B):
        root = _Path(n)
        root.alpha[:n] = llrs[b]
        paths = [root]
        for i in range(n):
            lam = [_descend(p, i, m, n) for p in paths]
            if not info_mask[i]:
                for p, x in zip(paths, lam):
                    p.u[i] = 0
                    if x < 0:
                        p.metric += -x
            else:
                cands = []
                for idx, (p, x) in enumerate(zip(paths, lam)):
                    pen0 = -x if x < 0 else 0.0
                    pen1 = x if x >= 0 else 0.0
                    cands.append((p.metric + pen0, idx, 0))
                    cands.append((p.metric + pen1, idx, 1))
                order = sorted(range(len(cands)), key=lambda c: cands[c][0])[:L]
                used = set()
                new_paths = []
                for c in order:
                    pm, idx, bit = cands[c]
                    if idx in used:
                        q = paths[idx].clone()
                    else:
                        q = paths[idx]
                        used.add(idx)
                    new_paths.append((q, pm, bit))
                # clones above were taken before any parent is mutated here
                paths = []
                for q, pm, bit in new_paths:
                    q.metric = pm
                    q.u[i] = bit
                    paths.append(q)
            for p in paths:
                _ascend(p, i, m, n, scratch)
        out_np[b] = len(paths)
        for l, p in enumerate(paths):
            out_u[b, l] = p.u
            out_pm[b, l] = p.metric
    return out_u, out_pm, out_np


def genie_sc_errors(llrs):
    """Per-index decision-error counts of genie-aided SC for the all-zero codeword.

    ``llrs`` is ``(Q, n)``; with every partial sum known to be zero the tree
    is data independent, so the whole batch is processed level by level.
    """
    Q, n = llrs.shape
    errors = np.zeros(n, dtype=np.int64)

    def visit(a, offset):
        N = a.shape[1]
        if N == 1:
            errors[offset] += int(np.count_nonzero(a[:, 0] < 0))
            return
        h = N // 2
        left, right = a[:, :h], a[:, h:]
        visit(_f_exact(left, right), offset)
        visit(right + left, offset + h)

    visit(np.asarray(llrs, dtype=np.float64), 0)
    return errors
