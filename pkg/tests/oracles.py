"""Independent reference computations used by the tests.

Nothing here imports the package's derivative machinery: Hessians are written
out by hand for the unit box, and every derivative is a central difference
(with one Richardson step where accuracy matters).
"""

import numpy as np


def box_guillemin_hessian(mu, cubic=0.0):
    """Hessian of ``1/2 sum l log l`` on ``[0,1]^n`` plus ``cubic * x^3 y`` (n = 2)."""
    mu = np.asarray(mu, dtype=float)
    S = np.diag(0.5 / mu + 0.5 / (1.0 - mu))
    if cubic:
        x, y = mu
        S = S + cubic * np.array([[6 * x * y, 3 * x * x], [3 * x * x, 0.0]])
    return S


def xi(S, F):
    return S + 0.25 * F @ np.linalg.solve(S, F)


def _second(fun, mu, i, j, h):
    e_i = np.eye(len(mu))[i] * h
    e_j = np.eye(len(mu))[j] * h
    return (fun(mu + e_i + e_j) - fun(mu + e_i - e_j)
            - fun(mu - e_i + e_j) + fun(mu - e_i - e_j)) / (4 * h * h)


def _first(fun, mu, i, h):
    e = np.eye(len(mu))[i] * h
    return (fun(mu + e) - fun(mu - e)) / (2 * h)


def richardson(fn, h):
    """Second-order central scheme improved to fourth order."""
    return (4 * fn(h / 2) - fn(h)) / 3


def kappa_boulanger_fd(hess, F, mu, h=2e-3):
    mu = np.asarray(mu, dtype=float)
    n = mu.size

    def at(step):
        total = 0.0
        for i in range(n):
            for j in range(n):
                total += _second(lambda m: np.linalg.inv(xi(hess(m), F))[i, j], mu, i, j, step)
        return -total
    return richardson(at, h)


def kappa_goto_fd(hess, F, mu, h=2e-3):
    mu = np.asarray(mu, dtype=float)
    n = mu.size

    def f(m):
        S = hess(m)
        return 0.5 * np.log(np.linalg.det(S) * np.linalg.det(xi(S, F)))

    def flux(m, i, step):
        Xi_inv = np.linalg.inv(xi(hess(m), F))
        return sum(_first(f, m, j, step) * Xi_inv[i, j] for j in range(n))

    def at(step):
        return sum(_first(lambda m: flux(m, i, step), mu, i, step) for i in range(n))
    return richardson(at, h)


def gram_g_b(S, C, F):
    """Metric and b-field Gram matrices assembled block by block."""
    phi = S + C
    P = np.linalg.inv(phi)
    Ps, Pa = 0.5 * (P + P.T), 0.5 * (P - P.T)
    g = np.block([[Ps, 0.5 * Pa @ F], [0.5 * F @ Pa, S + 0.25 * F @ Ps @ F]])
    b = np.block([[Pa, 0.5 * Ps @ F], [0.5 * F @ Ps, C + 0.25 * F @ Pa @ F]])
    return g, b


def chart_derivative(fun, mu, h=1e-5):
    """``D[..., k]``: derivative along chart direction ``k`` (theta-directions are 0)."""
    mu = np.asarray(mu, dtype=float)
    n = mu.size
    base = fun(mu)
    out = np.zeros(base.shape + (2 * n,))
    for i in range(n):
        out[..., n + i] = _first(fun, mu, i, h)
    return out


def levi_civita_fd(g_of_mu, mu, h=1e-5):
    """``Gamma[i, j, k]``: component ``k`` of ``nabla_i d_j`` from differenced metric."""
    g = g_of_mu(mu)
    dg = chart_derivative(g_of_mu, mu, h)         # dg[a, b, m] = d_m g_ab
    ginv = np.linalg.inv(g)
    m = g.shape[0]
    low = np.zeros((m, m, m))
    for i in range(m):
        for j in range(m):
            for l in range(m):
                low[i, j, l] = 0.5 * (dg[j, l, i] + dg[i, l, j] - dg[i, j, l])
    return np.einsum("ijl,lk->ijk", low, ginv)


def torsion_fd(b_of_mu, mu, h=1e-5):
    db = chart_derivative(b_of_mu, mu, h)         # db[b, c, a] = d_a b_bc
    m = db.shape[0]
    H = np.zeros((m, m, m))
    for a in range(m):
        for b in range(m):
            for c in range(m):
                H[a, b, c] = db[b, c, a] + db[c, a, b] + db[a, b, c]
    return H
