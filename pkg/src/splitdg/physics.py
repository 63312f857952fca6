"""Compressible Euler/Navier-Stokes state algebra.

Conservative states are numpy arrays with the five components
(rho, rho*v1, rho*v2, rho*v3, rho*E) on the FIRST axis; trailing axes are
arbitrary node/element axes, so every routine here is vectorized over whole
fields.  All quantities are nondimensional with the free-stream scaling in
which the viscous terms carry a 1/Re prefactor and the heat conduction
coefficient is lam = mu / ((gamma-1) Pr Ma^2).
"""

from dataclasses import dataclass

import numpy as np

NVAR = 5


class PositivityError(ValueError):
    """Density or pressure lost positivity; carries location context."""

    def __init__(self, message, where=None):
        if where:
            message = f"{message} ({where})"
        super().__init__(message)
        self.where = where


@dataclass(frozen=True)
class GasModel:
    """Ideal-gas parameters; immutable and shareable across threads.

    mu is the constant dynamic viscosity; reynolds is the Reynolds number
    multiplying the inverse viscous scaling.  ``reynolds=None`` means
    inviscid (the solver skips all viscous terms).
    """

    gamma: float = 1.4
    mach: float = 1.0
    prandtl: float = 0.72
    reynolds: float | None = None
    mu: float = 1.0

    def __post_init__(self):
        if self.gamma <= 1.0:
            raise ValueError("gamma must exceed 1")
        if self.mach <= 0 or self.prandtl <= 0 or self.mu < 0:
            raise ValueError("gas parameters must be positive")
        if self.reynolds is not None and self.reynolds <= 0:
            raise ValueError("Reynolds number must be positive")

    @property
    def viscous(self):
        return self.reynolds is not None

    @property
    def heat_conduction(self):
        """lam = mu / ((gamma - 1) Pr Ma^2)."""
        return self.mu / ((self.gamma - 1.0) * self.prandtl * self.mach**2)


def _check_positive(rho, p, where):
    rho_min = np.min(rho)
    if not rho_min > 0.0:
        raise PositivityError(f"non-positive density, min rho = {rho_min}", where)
    p_min = np.min(p)
    if not p_min > 0.0:
        raise PositivityError(f"non-positive pressure, min p = {p_min}", where)


def primitive_from_conservative(u, gas, where=None):
    """Convert conservative state(s) to (rho, v, p).

    Returns:
        rho: density array, v: velocity array with leading axis 3, p: pressure.

    Raises:
        PositivityError: if rho <= 0 or p <= 0 anywhere.
    """
    rho = u[0]
    v = u[1:4] / rho
    kinetic = 0.5 * rho * np.sum(v * v, axis=0)
    p = (gas.gamma - 1.0) * (u[4] - kinetic)
    _check_positive(rho, p, where)
    return rho, v, p


def conservative_from_primitive(rho, v, p, gas, where=None):
    """Assemble a conservative state from (rho, v, p); v has leading axis 3."""
    rho = np.asarray(rho, dtype=float)
    v = np.asarray(v, dtype=float)
    p = np.asarray(p, dtype=float)
    _check_positive(rho, p, where)
    shape = np.broadcast_shapes(rho.shape, v.shape[1:], p.shape)
    u = np.empty((NVAR,) + shape)
    u[0] = rho
    u[1:4] = rho * v
    u[4] = p / (gas.gamma - 1.0) + 0.5 * rho * np.sum(v * v, axis=0)
    return u


def pressure(u, gas, where=None):
    _, _, p = primitive_from_conservative(u, gas, where)
    return p


def sound_speed(u, gas, where=None):
    rho, _, p = primitive_from_conservative(u, gas, where)
    return np.sqrt(gas.gamma * p / rho)


def advective_flux(u, gas, where=None):
    """Cartesian advective flux triple f_d(u), returned with shape (3, 5, ...)."""
    rho, v, p = primitive_from_conservative(u, gas, where)
    enthalpy_flow = u[4] + p  # rho*H = rho*E + p
    f = np.empty((3,) + u.shape)
    for d in range(3):
        f[d, 0] = u[1 + d]
        for m in range(3):
            f[d, 1 + m] = u[1 + d] * v[m]
        f[d, 1 + d] += p
        f[d, 4] = v[d] * enthalpy_flow
    return f


def entropy(u, gas, where=None):
    """Mathematical entropy s = -rho (ln p - gamma ln rho) / (gamma - 1)."""
    rho, _, p = primitive_from_conservative(u, gas, where)
    sigma = np.log(p) - gas.gamma * np.log(rho)
    return -rho * sigma / (gas.gamma - 1.0)


def entropy_flux(u, gas, where=None):
    """Entropy flux f^S = s * v, shape (3, ...)."""
    rho, v, p = primitive_from_conservative(u, gas, where)
    sigma = np.log(p) - gas.gamma * np.log(rho)
    s = -rho * sigma / (gas.gamma - 1.0)
    return s * v


def entropy_variables(u, gas, where=None):
    """w = ds/du, the entropy variables, shape (5, ...).

    w = [(gamma - sigma)/(gamma-1) - rho|v|^2/(2p), rho v/p, -rho/p] with
    sigma = ln p - gamma ln rho.  w[4] < 0 whenever rho, p > 0.
    """
    rho, v, p = primitive_from_conservative(u, gas, where)
    sigma = np.log(p) - gas.gamma * np.log(rho)
    w = np.empty_like(u)
    rho_over_p = rho / p
    w[0] = (gas.gamma - sigma) / (gas.gamma - 1.0) - 0.5 * rho_over_p * np.sum(v * v, axis=0)
    w[1:4] = rho_over_p * v
    w[4] = -rho_over_p
    return w


def conservative_from_entropy(w, gas):
    """Invert entropy variables back to the conservative state."""
    w = np.asarray(w, dtype=float)
    if not np.all(w[4] < 0.0):
        raise PositivityError("entropy variables require w[4] < 0")
    v = w[1:4] / (-w[4])
    rho_over_p = -w[4]
    # w0 = (gamma - sigma)/(gamma-1) - rho|v|^2/(2p)  =>  solve for sigma.
    sigma = gas.gamma - (gas.gamma - 1.0) * (w[0] + 0.5 * rho_over_p * np.sum(v * v, axis=0))
    # sigma = ln p - gamma ln rho and p = rho / rho_over_p:
    # sigma = (1 - gamma) ln rho - ln(rho_over_p)  =>  ln rho.
    log_rho = (sigma + np.log(rho_over_p)) / (1.0 - gas.gamma)
    rho = np.exp(log_rho)
    p = rho / rho_over_p
    return conservative_from_primitive(rho, v, p, gas)


def entropy_potential(u, gas, where=None):
    """psi_d = w^T f_d - f^S_d; equals rho*v_d for the ideal gas."""
    w = entropy_variables(u, gas, where)
    f = advective_flux(u, gas, where)
    fs = entropy_flux(u, gas, where)
    return np.einsum("c...,dc...->d...", w, f) - fs


def temperature(u, gas, where=None):
    rho, _, p = primitive_from_conservative(u, gas, where)
    return gas.gamma * gas.mach**2 * p / rho


def viscous_flux(u, grad_v, grad_t, gas):
    """Cartesian viscous flux triple from primitive-variable gradients.

    Args:
        u: conservative state, shape (5, ...).
        grad_v: velocity gradients, grad_v[d, m] = d v_m / d x_d, shape (3, 3, ...).
        grad_t: temperature gradient, grad_t[d] = d T / d x_d, shape (3, ...).

    Returns:
        f^v with shape (3, 5, ...); the mass component is zero.
    """
    v = u[1:4] / u[0]
    mu = gas.mu
    div_v = grad_v[0, 0] + grad_v[1, 1] + grad_v[2, 2]
    tau = np.empty((3, 3) + u.shape[1:])
    for i in range(3):
        for j in range(3):
            tau[i, j] = mu * (grad_v[i, j] + grad_v[j, i])
        tau[i, i] -= (2.0 / 3.0) * mu * div_v
    lam = gas.heat_conduction
    f = np.zeros((3, NVAR) + u.shape[1:])
    for d in range(3):
        f[d, 1:4] = tau[d]
        f[d, 4] = np.einsum("m...,m...->...", v, tau[d]) + lam * grad_t[d]
    return f


def gradients_from_entropy_gradients(u, q, gas):
    """Primitive gradients (grad v, grad T) from entropy-variable gradients.

    ``q`` holds d w / d x_d with shape (3, 5, ...).  The map is linear in q
    at a fixed state: with p/rho = -1/w5,
        d v_m / d x_d = (q[d, 1+m] + v_m q[d, 4]) * (p / rho)
        d T  / d x_d = gamma Ma^2 (p / rho)^2 q[d, 4].
    """
    rho = u[0]
    v = u[1:4] / rho
    kinetic = 0.5 * rho * np.sum(v * v, axis=0)
    p = (gas.gamma - 1.0) * (u[4] - kinetic)
    p_over_rho = p / rho
    grad_v = (q[:, 1:4] + v[None, :] * q[:, 4:5]) * p_over_rho
    grad_t = gas.gamma * gas.mach**2 * p_over_rho**2 * q[:, 4]
    return grad_v, grad_t


def viscous_flux_from_entropy_gradients(u, q, gas):
    """f^v evaluated from lifted entropy-variable gradients (3, 5, ...)."""
    grad_v, grad_t = gradients_from_entropy_gradients(u, q, gas)
    return viscous_flux(u, grad_v, grad_t, gas)


def max_wave_speed(u_left, u_right, normal, gas, where=None):
    """Largest |v.n| + c over the two states (symmetric in its arguments)."""
    speeds = []
    for u in (u_left, u_right):
        rho, v, p = primitive_from_conservative(u, gas, where)
        c = np.sqrt(gas.gamma * p / rho)
        speeds.append(np.abs(np.einsum("d...,d...->...", normal, v)) + c)
    return np.maximum(*speeds)
