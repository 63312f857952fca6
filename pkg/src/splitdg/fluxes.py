"""Two-point volume fluxes and interface numerical fluxes.

The volume fluxes are symmetric, consistent two-point functions
F#(u_L, u_R) returning the Cartesian flux triple with shape (3, 5, ...).
They are fully vectorized: the two state arguments may be any mutually
broadcastable arrays with the component axis first, which is what both the
flux-differencing volume kernel (all node pairs along a line) and the
face kernels (all face nodes at once) rely on.

Flux objects split evaluation into ``prepare`` (per-node quantities,
computed once) and ``evaluate`` (pairwise means on broadcast views), so the
O(N^4) pair loops of the volume kernel never recompute primitives.
"""

import numpy as np

from splitdg import physics

LOG_MEAN_SERIES_CUT = 1.0e-4


def log_mean(a_left, a_right):
    """Logarithmic mean (a_L - a_R) / (ln a_L - ln a_R), stable for a_L ~ a_R.

    With zeta = a_L/a_R and u = (zeta-1)^2/(zeta+1)^2, the near-equal branch
    (u < 1e-4) evaluates (a_L + a_R) / (2 (1 + u/3 + u^2/5 + u^3/7)); the
    remainder of that series is below 1e-16 at the cut, so the switch is
    seamless at double precision.
    """
    a_left = np.asarray(a_left, dtype=float)
    a_right = np.asarray(a_right, dtype=float)
    if np.any(a_left <= 0.0) or np.any(a_right <= 0.0):
        raise ValueError("log_mean requires positive arguments")
    out = _log_mean_raw(a_left, a_right)
    if out.ndim == 0:
        return float(out)
    return out


def _log_mean_raw(a_left, a_right):
    zeta = a_left / a_right
    f = (zeta - 1.0) / (zeta + 1.0)
    u = f * f
    series = 2.0 * (1.0 + u * (1.0 / 3.0 + u * (1.0 / 5.0 + u / 7.0)))
    near = u < LOG_MEAN_SERIES_CUT
    log_zeta = np.log(np.where(near, 1.0, zeta))
    safe = np.where(near, 1.0, log_zeta)
    return np.where(near, (a_left + a_right) / series, (a_left - a_right) / safe)


def _mean(a, b):
    return 0.5 * (a + b)


class TwoPointFlux:
    """Symmetric, consistent two-point volume flux F#(u_L, u_R).

    Subclasses implement ``prepare`` (nodal pre-processing, run once per
    field) and ``evaluate`` (pairwise combination of two prepared states,
    possibly broadcast views).  Calling the object with two conservative
    states gives the plain two-argument form.
    """

    name = "abstract"

    def prepare(self, u, gas):
        return (u,)

    def evaluate(self, left, right, gas):
        raise NotImplementedError

    def __call__(self, u_left, u_right, gas):
        return self.evaluate(self.prepare(u_left, gas), self.prepare(u_right, gas), gas)


class CentralFlux(TwoPointFlux):
    """Arithmetic mean of the physical fluxes (recovers standard DGSEM)."""

    name = "central"

    def prepare(self, u, gas):
        return (physics.advective_flux(u, gas),)

    def evaluate(self, left, right, gas):
        return _mean(left[0], right[0])


class EntropyConservativeFlux(TwoPointFlux):
    """Entropy-conservative two-point flux (Chandrashekar) in all directions.

    The x-direction is the printed five-vector built from rho^ln, <v>,
    p_hat = <rho>/(2<beta>) and H_hat with beta = rho/(2p); the y/z
    directions apply the same formula with the transported-velocity role
    rotated.  Satisfies the per-direction entropy conservation (Tadmor)
    condition jump(w)^T F#_d = jump(w^T f_d - f^S_d).
    """

    name = "ec"

    def prepare(self, u, gas):
        rho, v, p = physics.primitive_from_conservative(u, gas)
        beta = 0.5 * rho / p
        vsq = np.einsum("d...,d...->...", v, v)
        return rho, v, beta, vsq

    def evaluate(self, left, right, gas):
        rho_l, v_l, beta_l, vsq_l = left
        rho_r, v_r, beta_r, vsq_r = right

        rho_ln = _log_mean_raw(rho_l, rho_r)
        beta_ln = _log_mean_raw(beta_l, beta_r)
        v_avg = _mean(v_l, v_r)
        p_hat = _mean(rho_l, rho_r) / (2.0 * _mean(beta_l, beta_r))
        h_hat = (
            1.0 / (2.0 * beta_ln * (gas.gamma - 1.0))
            + p_hat / rho_ln
            + np.einsum("d...,d...->...", v_avg, v_avg)
            - 0.5 * _mean(vsq_l, vsq_r)
        )

        f = np.empty((3, physics.NVAR) + rho_ln.shape)
        for d in range(3):
            mass = rho_ln * v_avg[d]
            f[d, 0] = mass
            for m in range(3):
                f[d, 1 + m] = mass * v_avg[m]
            f[d, 1 + d] += p_hat
            f[d, 4] = mass * h_hat
        return f


VOLUME_FLUXES = {"central": CentralFlux(), "ec": EntropyConservativeFlux()}


def central_flux(u_left, u_right, gas):
    return VOLUME_FLUXES["central"](u_left, u_right, gas)


def ec_flux(u_left, u_right, gas):
    return VOLUME_FLUXES["ec"](u_left, u_right, gas)


def get_volume_flux(name):
    try:
        return VOLUME_FLUXES[name]
    except KeyError:
        raise ValueError(
            f"unknown volume flux '{name}'; valid options: {sorted(VOLUME_FLUXES)}"
        ) from None


def kg_momentum_term(u_left, u_right):
    """<rho><v1><v2> two-point product of the cubic-split x-momentum term.

    Split-form demonstrator only: flux differencing of this single entry
    reproduces the seven-term cubic split form on polynomial data.
    """
    rho_l, rho_r = u_left[0], u_right[0]
    v1 = _mean(u_left[1] / rho_l, u_right[1] / rho_r)
    v2 = _mean(u_left[2] / rho_l, u_right[2] / rho_r)
    return _mean(rho_l, rho_r) * v1 * v2


DISSIPATION_MODES = ("none", "llf")


def surface_flux_advective(u_left, u_right, normal, gas, dissipation="llf"):
    """Interface flux F* = F#(u_L,u_R).n - (lambda_max/2) jump(w).

    ``normal`` is the unit outward normal of the left element, shape (3, ...).
    With dissipation "none" this is the entropy-conservative flux contracted
    with the normal; "llf" adds local Lax-Friedrichs dissipation formulated
    in entropy-variable jumps, with lambda_max estimated per face node, so
    its entropy contribution is provably non-positive.
    """
    if dissipation not in DISSIPATION_MODES:
        raise ValueError(
            f"unknown dissipation '{dissipation}'; valid options: {list(DISSIPATION_MODES)}"
        )
    f = ec_flux(u_left, u_right, gas)
    fstar = np.einsum("d...,dc...->c...", normal, f)
    if dissipation == "llf":
        lam = physics.max_wave_speed(u_left, u_right, normal, gas)
        jump_w = physics.entropy_variables(u_right, gas) - physics.entropy_variables(u_left, gas)
        fstar = fstar - 0.5 * lam * jump_w
    return fstar


def br1_viscous_interface(fv_n_left, fv_n_right, w_left, w_right):
    """BR1 coupling: both interface values are plain arithmetic means.

    Args:
        fv_n_left/right: normal viscous fluxes from the two sides, evaluated
            with the same normal vector.
        w_left/right: entropy-variable traces.

    Returns:
        (F^{v,*}_n, W*).
    """
    return _mean(fv_n_left, fv_n_right), _mean(w_left, w_right)
