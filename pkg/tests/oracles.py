"""Independent dense reference implementations used as test oracles.

None of these import the package's numerical code; they work on plain
numpy arrays and Python lists.
"""

import itertools
import math

import numpy as np


def jacobi_eigh(a, tol=1e-15, max_sweeps=100):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns eigenvalues (descending) and the matching eigenvectors as
    columns.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off <= tol * max(1.0, np.sqrt(np.sum(a**2))):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if a[p, q] == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * a[p, q])
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                v = v @ rot
    w = np.diag(a).copy()
    order = np.argsort(-w)
    return w[order], v[:, order]


def singular_values(r, k):
    """Top-k singular values of a dense matrix from the eigenvalues of the
    smaller Gram matrix."""
    r = np.asarray(r, dtype=float)
    gram = r.T @ r if r.shape[1] <= r.shape[0] else r @ r.T
    w, _ = jacobi_eigh(gram)
    return np.sqrt(np.maximum(w[:k], 0.0))


def entity_norms(r, k):
    """Norms of the columns of S_k U_k^T, via the eigenvectors of R R^T."""
    r = np.asarray(r, dtype=float)
    w, u = jacobi_eigh(r @ r.T)
    w = np.maximum(w[:k], 0.0)
    return np.sqrt((u[:, :k] ** 2 * w).sum(axis=1))


def svd_prior_dense(r, need_rows, stress=1000.0, k=1):
    """Two SVDs, norm differences, clamp, normalize; uniform fallback."""
    r = np.asarray(r, dtype=float)
    n = r.shape[0]
    if n == 1:
        return np.ones(1)
    prev = entity_norms(r, k)
    r2 = r.copy()
    for i in need_rows:
        r2[i, :] *= stress
    norms = entity_norms(r2, k)
    scores = [max(b - a, 0.0) for a, b in zip(prev, norms)]
    total = sum(scores)
    if total <= 0:
        return np.full(n, 1.0 / n)
    return np.array([s / total for s in scores])


def dense_pagerank(adj, prior, alpha, dangling="prior", epsilon=1e-8, tol=1e-14, max_iter=100000):
    """Materialize H = alpha S + (1 - alpha) 1 p^T and power-iterate x <- x H."""
    adj = np.asarray(adj, dtype=float)
    n = adj.shape[0]
    p = (1 - epsilon) * np.asarray(prior, dtype=float) + epsilon / n
    p = p / p.sum()
    s = np.zeros((n, n))
    for i in range(n):
        total = adj[i].sum()
        if total > 0:
            s[i] = adj[i] / total
        else:
            s[i] = p if dangling == "prior" else np.full(n, 1.0 / n)
    h = alpha * s + (1 - alpha) * np.outer(np.ones(n), p)
    x = p.copy()
    for _ in range(max_iter):
        y = x @ h
        y /= y.sum()
        if np.abs(y - x).sum() < tol:
            return y
        x = y
    raise RuntimeError("oracle did not converge")


def stationary_eig(stoch):
    """Left Perron vector of a dense stochastic matrix via numpy eig."""
    w, v = np.linalg.eig(np.asarray(stoch).T)
    i = int(np.argmin(np.abs(w - 1.0)))
    x = np.real(v[:, i])
    return x / x.sum()


def consensus_reference(opinions, tol=1e-9, max_iter=10000):
    """Damped distance-weighted pooling written with plain loops."""
    ops = [list(map(float, p)) for p in opinions]
    m, n = len(ops), len(ops[0])

    def tv(p, q):
        return 0.5 * sum(abs(a - b) for a, b in zip(p, q))

    for _ in range(max_iter + 1):
        spread = max(tv(ops[i], ops[j]) for i in range(m) for j in range(m))
        if spread < tol:
            mean = [sum(ops[i][k] for i in range(m)) / m for k in range(n)]
            s = sum(mean)
            return [x / s for x in mean]
        new = []
        for i in range(m):
            d = [tv(ops[i], ops[j]) for j in range(m)]
            total = sum(d)
            if total == 0:
                new.append(ops[i][:])
                continue
            mix = [sum(d[j] / total * ops[j][k] for j in range(m)) for k in range(n)]
            new.append([0.5 * ops[i][k] + 0.5 * mix[k] for k in range(n)])
        ops = new
    raise RuntimeError("reference consensus did not converge")


def krippendorff_bruteforce(records, dist):
    """Alpha by enumerating value pairs.

    ``records`` are (unit, worker, value). Observed disagreement averages
    d over ordered pairs of distinct judgments within each unit, weighted
    1/(m_u - 1); expected disagreement averages d over all ordered pairs of
    distinct pairable values.
    """
    units = {}
    for u, _, v in records:
        units.setdefault(u, []).append(v)
    units = {u: vs for u, vs in units.items() if len(vs) >= 2}
    pooled = [v for vs in units.values() for v in vs]
    n = len(pooled)
    d_o = 0.0
    for vs in units.values():
        m = len(vs)
        for a, b in itertools.permutations(range(m), 2):
            d_o += dist[vs[a]][vs[b]] / (m - 1)
    d_o /= n
    d_e = 0.0
    for a, b in itertools.permutations(range(n), 2):
        d_e += dist[pooled[a]][pooled[b]]
    d_e /= n * (n - 1)
    return 1.0 - d_o / d_e


def dense_cp_error(tensor, weights, a, b, c):
    approx = np.einsum("r,ir,jr,kr->ijk", weights, a, b, c)
    return float(np.linalg.norm(tensor - approx))
