"""Legendre/Gauss-Lobatto operators and tensor-product calculus on [-1,1]^3.

This module builds the one-dimensional nodal machinery (nodes, weights,
derivative matrix, SBP matrices) and the discrete 3D calculus used by the
curvilinear DG solver.  Nodal 3D fields are plain numpy arrays whose last
three axes are the (i, j, k) <-> (xi, eta, zeta) tensor indices; any leading
axes (state components, elements) are carried through untouched.

A ``NodalBasis`` is immutable after construction and can be shared freely.
"""

import numpy as np

MAX_DEGREE = 30


def legendre_eval(n, x):
    """Evaluate the Legendre polynomial L_n and its derivative at x.

    Uses the three-term recurrence and its differentiated form.  ``x`` may be
    a scalar or an array.

    Args:
        n: polynomial degree, >= 0.
        x: evaluation point(s) in [-1, 1].

    Returns:
        Tuple (L_n(x), L_n'(x)).
    """
    if n < 0:
        raise ValueError("degree must be non-negative")
    x = np.asarray(x, dtype=float)
    ell = np.ones_like(x)
    dell = np.zeros_like(x)
    if n == 0:
        return ell, dell
    ell_prev, dell_prev = ell, dell
    ell, dell = x.copy(), np.ones_like(x)
    for k in range(1, n):
        a = (2.0 * k + 1.0) / (k + 1.0)
        b = k / (k + 1.0)
        ell_next = a * x * ell - b * ell_prev
        dell_next = a * (ell + x * dell) - b * dell_prev
        ell_prev, dell_prev = ell, dell
        ell, dell = ell_next, dell_next
    return ell, dell


def gauss_lobatto(n):
    """Legendre-Gauss-Lobatto nodes and weights for degree n (n+1 points).

    The nodes are -1, +1 and the zeros of L_n'; the interior zeros are found
    by Newton iteration on (1-x^2) L_n'(x) started from Chebyshev-Gauss-
    Lobatto guesses.  Weights follow the closed form
    w_j = 2 / (n (n+1) [L_n(x_j)]^2).

    Returns:
        (nodes, weights): ascending nodes, positive weights, both shape (n+1,).
    """
    if n < 1:
        raise ValueError("gauss_lobatto requires degree n >= 1")
    nodes = np.empty(n + 1)
    nodes[0], nodes[-1] = -1.0, 1.0
    tol = 4.0 * np.finfo(float).eps
    for j in range(1, n):
        # Newton on g = (1-x^2) L_n'; g' = -n(n+1) L_n by the Legendre ODE.
        x = -np.cos(np.pi * j / n)
        converged = False
        for _ in range(50):
            ell, dell = legendre_eval(n, x)
            dx = (1.0 - x * x) * dell / (n * (n + 1) * ell)
            x += dx
            if abs(dx) <= tol * max(1.0, abs(x)):
                converged = True
                break
        if not converged:
            raise RuntimeError(f"LGL root finding failed to converge for interior node {j} at degree {n}")
        nodes[j] = x
    nodes = 0.5 * (nodes - nodes[::-1])  # enforce exact symmetry
    ell, _ = legendre_eval(n, nodes)
    weights = 2.0 / (n * (n + 1) * ell**2)
    return nodes, weights


def barycentric_weights(nodes):
    """Barycentric weights b_j = 1 / prod_{i != j} (x_j - x_i)."""
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    return 1.0 / diff.prod(axis=1)


class NodalBasis:
    """Degree-N Lagrange basis on LGL nodes with its SBP operator family.

    Attributes:
        n: polynomial degree N.
        nodes: N+1 LGL nodes, ascending, nodes[0] = -1, nodes[-1] = +1.
        weights: LGL quadrature weights (also the diagonal of the mass matrix).
        bary: barycentric interpolation weights.
        D: derivative matrix, D[j, m] = ell_m'(x_j).
        M: diagonal mass matrix (dense, for convenience).
        Q: M @ D; satisfies Q + Q^T = B.
        B: boundary matrix diag(-1, 0, ..., 0, +1).
    """

    def __init__(self, n):
        if not 1 <= n <= MAX_DEGREE:
            raise ValueError(f"degree must be in 1..{MAX_DEGREE}, got {n}")
        self.n = n
        self.nodes, self.weights = gauss_lobatto(n)
        self.bary = barycentric_weights(self.nodes)
        # D from the barycentric form; the diagonal is the negative row sum,
        # which makes D @ 1 = 0 hold exactly.
        diff = self.nodes[:, None] - self.nodes[None, :]
        np.fill_diagonal(diff, 1.0)
        d = (self.bary[None, :] / self.bary[:, None]) / diff
        np.fill_diagonal(d, 0.0)
        np.fill_diagonal(d, -d.sum(axis=1))
        self.D = d
        self.M = np.diag(self.weights)
        self.Q = self.M @ self.D
        b = np.zeros((n + 1, n + 1))
        b[0, 0], b[n, n] = -1.0, 1.0
        self.B = b
        for a in (self.nodes, self.weights, self.bary, self.D, self.M, self.Q, self.B):
            a.setflags(write=False)

    def __repr__(self):
        return f"NodalBasis(n={self.n})"


def build_basis(n):
    """Construct the NodalBasis of degree n (cached per degree)."""
    basis = _basis_cache.get(n)
    if basis is None:
        basis = NodalBasis(n)
        _basis_cache[n] = basis
    return basis


_basis_cache = {}


def lagrange_values(basis, x):
    """Values of all Lagrange basis polynomials at points x.

    Barycentric evaluation; returns shape x.shape + (N+1,).  Exactly
    reproduces the Kronecker property at the nodes.
    """
    x = np.asarray(x, dtype=float)
    diff = x[..., None] - basis.nodes
    at_node = diff == 0.0
    safe = np.where(at_node, 1.0, diff)
    terms = basis.bary / safe
    vals = terms / terms.sum(axis=-1, keepdims=True)
    hit = at_node.any(axis=-1)
    if np.any(hit):
        vals = np.where(hit[..., None], at_node.astype(float), vals)
    return vals


def interpolate(basis, values, x):
    """Evaluate the interpolant of nodal ``values`` at point(s) x.

    ``values`` may have leading axes; the last axis is the nodal index.
    Returns shape values.shape[:-1] + x.shape.
    """
    ell = lagrange_values(basis, x)
    values = np.asarray(values, dtype=float)
    flat = ell.reshape(-1, ell.shape[-1])
    out = np.einsum("...n,pn->...p", values, flat)
    return out.reshape(values.shape[:-1] + ell.shape[:-1])


def interpolation_matrix(basis, x):
    """Matrix P with P[m, j] = ell_j(x_m) for evaluation points x."""
    return lagrange_values(basis, np.asarray(x, dtype=float))


def inner_product(basis, u, v):
    """Discrete 1D inner product <u, v>_N = sum u_j v_j w_j (last axis nodal)."""
    u, v = np.asarray(u), np.asarray(v)
    if u.shape[-1] != basis.n + 1 or v.shape[-1] != basis.n + 1:
        raise ValueError("nodal length does not match basis degree")
    return ((u * v) @ basis.weights)


def inner_product_3d(basis, u, v):
    """Discrete 3D inner product over the last three (i, j, k) axes."""
    n1 = basis.n + 1
    if u.shape[-3:] != (n1, n1, n1) or v.shape[-3:] != (n1, n1, n1):
        raise ValueError("field shape does not match basis degree")
    w = basis.weights
    return np.einsum("...ijk,...ijk,i,j,k->...", u, v, w, w, w)


def quadrature(basis, f):
    """LGL quadrature of nodal values (exact for integrands in P^{2N-1})."""
    return np.asarray(f) @ basis.weights


def quadrature_3d(basis, f):
    w = basis.weights
    return np.einsum("...ijk,i,j,k->...", f, w, w, w)


def aliasing_coefficients(basis, u):
    """Modal (Legendre) coefficients of the interpolant of nodal values u.

    C_k = <u, L_k>_N / ||L_k||_N^2 with the discrete norms
    ||L_k||_N^2 = 2/(2k+1) for k < N and 2/N for k = N.  For u in P^N these
    are the exact Legendre coefficients; otherwise they carry the aliasing
    contribution of unresolved modes.
    """
    n = basis.n
    coeffs = np.empty(n + 1)
    for k in range(n + 1):
        ell_k, _ = legendre_eval(k, basis.nodes)
        norm_sq = 2.0 / (2 * k + 1) if k < n else 2.0 / n
        coeffs[k] = inner_product(basis, u, ell_k) / norm_sq
    return coeffs


def derivative_1d(basis, u):
    """Nodal derivative along the last axis: (D u)."""
    return np.einsum("im,...m->...i", basis.D, u)


def tensor_gradient(basis, field):
    """Reference-space gradient of a 3D nodal field.

    The last three axes of ``field`` are (i, j, k).  Returns an array with a
    new leading axis of length 3 holding (d/dxi, d/deta, d/dzeta).
    """
    d = basis.D
    out = np.empty((3,) + field.shape)
    out[0] = np.einsum("in,...njk->...ijk", d, field)
    out[1] = np.einsum("jn,...ink->...ijk", d, field)
    out[2] = np.einsum("kn,...ijn->...ijk", d, field)
    return out


def tensor_divergence(basis, flux):
    """Reference-space divergence of a vector field.

    ``flux`` has a leading axis of length 3 (the xi/eta/zeta components);
    the last three axes are (i, j, k).
    """
    d = basis.D
    out = np.einsum("in,...njk->...ijk", d, flux[0])
    out += np.einsum("jn,...ink->...ijk", d, flux[1])
    out += np.einsum("kn,...ijn->...ijk", d, flux[2])
    return out
