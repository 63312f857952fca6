"""Semi-discrete split-form DGSEM residual, BR1 lifting, and time integration.

Solution layout: conservative states live in arrays of shape
(5, K, n1, n1, n1) with the component axis first, the element axis second,
and (i, j, k) <-> (xi, eta, zeta) tensor indices last (n1 = N+1).  Entropy
monitors, conserved totals, and the explicit RK driver operate on this
layout.

The residual is

    du/dt = -(1/J) [ D.F# + lift((F*_n - F_n) s_hat) ]
            + (1/(Re J)) [ D_std.F~v + lift((F^{v,*}_n - F^v_n) s_hat) ]

with the two-point flux-differencing divergence D.F#, the standard nodal
divergence D_std for the viscous contravariant fluxes, and surface liftings
scaled by 1/w_0 at the face nodes (strong/penalty form).  Every face flux is
evaluated once with the owner's geometry and scattered to both sides with a
sign flip, so conservation telescopes bitwise across interior faces.

Evaluation is vectorized over all elements (volume kernels) and over all
faces (interface kernels); there are no data dependencies between elements
within a stage, and the fixed numpy reduction order makes results
reproducible run to run.
"""

import numpy as np

from splitdg import fluxes, physics
from splitdg.mesh import orientation_indices

# Five-stage fourth-order low-storage Runge-Kutta (Carpenter-Kennedy).
RK_A = (
    0.0,
    -567301805773.0 / 1357537059087.0,
    -2404267990393.0 / 2016746695238.0,
    -3550918686646.0 / 2091501179385.0,
    -1275806237668.0 / 842570457699.0,
)
RK_B = (
    1432997174477.0 / 9575080441755.0,
    5161836677717.0 / 13612068292357.0,
    1720146321549.0 / 2090206949498.0,
    3134564353537.0 / 4481467310338.0,
    2277821191437.0 / 14882151754819.0,
)
RK_C = (
    0.0,
    1432997174477.0 / 9575080441755.0,
    2526269341429.0 / 6820363962896.0,
    2006345519317.0 / 3224310063776.0,
    2802321613138.0 / 2924317926251.0,
)


def rk_step(u, t, dt, rhs):
    """One five-stage low-storage RK4 step of du/dt = rhs(u, t)."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    g = None
    for a, b, c in zip(RK_A, RK_B, RK_C):
        r = rhs(u, t + c * dt)
        g = dt * r if g is None else a * g + dt * r
        u = u + b * g
    return u


class SolutionField:
    """Per-element nodal conservative states and the simulation time."""

    def __init__(self, u, t=0.0):
        self.u = np.asarray(u, dtype=float)
        self.t = float(t)


def _face_stack(vol):
    """Restrict a (C, K, n, n, n) array to the six faces: (6, C, K, n, n)."""
    return np.stack([
        vol[:, :, 0, :, :], vol[:, :, -1, :, :],
        vol[:, :, :, 0, :], vol[:, :, :, -1, :],
        vol[:, :, :, :, 0], vol[:, :, :, :, -1],
    ])


def _gather(face_stack, fid, fel):
    """Pick per-face values; returns (C, nf, n, n)."""
    return np.moveaxis(face_stack[fid, :, fel], 1, 0)


def _scatter_add(target, fid, fel, values):
    """Accumulate (C, nf, n, n) values into a (6, K, C, n, n) buffer."""
    np.add.at(target, (fid, fel), np.moveaxis(values, 0, 1))


def _fold_faces(buf, out):
    """Add a (6, K, C, n, n) face buffer into the (C, K, n, n, n) volume."""
    mv = lambda a: np.moveaxis(a, 0, 1)
    out[:, :, 0, :, :] += mv(buf[0])
    out[:, :, -1, :, :] += mv(buf[1])
    out[:, :, :, 0, :] += mv(buf[2])
    out[:, :, :, -1, :] += mv(buf[3])
    out[:, :, :, :, 0] += mv(buf[4])
    out[:, :, :, :, -1] += mv(buf[5])


# Axis-insertion views building the (line node, pair partner) index pair for
# each reference direction; applied to every prepared per-node array, whose
# last three axes are always (i, j, k).
_PAIR_LEFT = (
    lambda a: a[..., :, None, :, :],
    lambda a: a[..., :, :, None, :],
    lambda a: a[..., :, :, :, None],
)
_PAIR_RIGHT = (
    lambda a: a[..., None, :, :, :],
    lambda a: a[..., :, None, :, :],
    lambda a: a[..., :, :, None, :],
)


def split_divergence(u, ja, basis, volume_flux, gas):
    """Two-point flux-differencing divergence (not yet divided by J).

    Implements, per node and per reference direction, the sums
    2 sum_m D_im F#(U_i.., U_m..) . <Ja^dir>_(i,m) with arithmetic averaging
    of the volume-weighted contravariant vectors.

    Args:
        u: states (5, K, n, n, n).
        ja: contravariant vectors (3, 3, K, n, n, n) (curl form for the
            free-stream/entropy properties to hold).
        volume_flux: a fluxes.TwoPointFlux object.

    Returns:
        (5, K, n, n, n) array.
    """
    d = basis.D
    contract = ("im,cKimjk->cKijk", "jm,cKijmk->cKijk", "km,cKijkm->cKijk")
    dot = ("dcKimjk,dKimjk->cKimjk", "dcKijmk,dKijmk->cKijmk", "dcKijkm,dKijkm->cKijkm")
    state = volume_flux.prepare(u, gas)
    out = np.zeros_like(u)
    for axis in range(3):
        lview, rview = _PAIR_LEFT[axis], _PAIR_RIGHT[axis]
        f = volume_flux.evaluate(
            tuple(lview(a) for a in state), tuple(rview(a) for a in state), gas)
        jav = 0.5 * (lview(ja[axis]) + rview(ja[axis]))
        fdot = np.einsum(dot[axis], f, jav)
        out += 2.0 * np.einsum(contract[axis], d, fdot)
    return out


def standard_divergence(contrav, basis):
    """Nodal divergence of contravariant fluxes (3, C..., K, n, n, n)."""
    d = basis.D
    out = np.einsum("in,...njk->...ijk", d, contrav[0])
    out += np.einsum("jn,...ink->...ijk", d, contrav[1])
    out += np.einsum("kn,...ijn->...ijk", d, contrav[2])
    return out


class DGSolver:
    """Split-form DGSEM semi-discretization on a conforming curvilinear mesh.

    Args:
        mesh: MeshTopology (curl-form metrics expected for the discrete
            invariants to hold; cross-form is allowed for demonstrations).
        gas: GasModel; ``gas.reynolds is None`` disables all viscous terms.
        volume_flux: "ec" or "central".
        surface_dissipation: "none" or "llf".
        gradient_variables: "entropy" (default) lifts gradients of the
            entropy variables; "conservative" exists for the linear
            diffusion regression test only.
        boundary_states: dict tag -> callable(x, t) -> exterior conservative
            state for Dirichlet faces; x has shape (3, ...).
        source: optional callable(x, t, gas) -> (5, ...) forcing added to
            du/dt (manufactured-solution machinery).
    """

    def __init__(self, mesh, gas, volume_flux="ec", surface_dissipation="llf",
                 gradient_variables="entropy", boundary_states=None, source=None):
        self.mesh = mesh
        self.basis = mesh.basis
        self.gas = gas
        self.volume_flux_name = volume_flux
        self.volume_flux = fluxes.get_volume_flux(volume_flux)
        if surface_dissipation not in fluxes.DISSIPATION_MODES:
            raise ValueError(
                f"unknown surface dissipation '{surface_dissipation}'; "
                f"valid options: {list(fluxes.DISSIPATION_MODES)}")
        self.surface_dissipation = surface_dissipation
        if gradient_variables not in ("entropy", "conservative"):
            raise ValueError("gradient_variables must be 'entropy' or 'conservative'")
        self.gradient_variables = gradient_variables
        self.boundary_states = dict(boundary_states or {})
        self.source = source

        basis = mesh.basis
        n1 = basis.n + 1
        k = mesh.num_elements
        self.num_elements = k
        self.n1 = n1
        # Stacked geometry
        self.ja = np.empty((3, 3, k, n1, n1, n1))
        self.j = np.empty((k, n1, n1, n1))
        self.x = np.empty((3, k, n1, n1, n1))
        self.s_hat = np.empty((6, k, n1, n1))
        self.normal = np.empty((6, 3, k, n1, n1))
        for e, geom in enumerate(mesh.geoms):
            self.ja[:, :, e] = geom.ja
            self.j[e] = geom.j
            self.x[:, e] = geom.x
            self.s_hat[:, e] = geom.s_hat
            self.normal[:, :, e] = geom.normal
        self.w0 = basis.weights[0]  # = weights[-1]; boundary lifting scale

        # Face link batches
        links = mesh.links
        self.l_elem = np.array([ln.left for ln in links], dtype=np.intp)
        self.l_face = np.array([ln.left_face for ln in links], dtype=np.intp)
        self.r_elem = np.array([ln.right for ln in links], dtype=np.intp)
        self.r_face = np.array([ln.right_face for ln in links], dtype=np.intp)
        self.perm_a = np.empty((len(links), n1, n1), dtype=np.intp)
        self.perm_b = np.empty((len(links), n1, n1), dtype=np.intp)
        for i, ln in enumerate(links):
            self.perm_a[i], self.perm_b[i] = orientation_indices(ln.orient, n1)
        self._link_rows = np.arange(len(links))[:, None, None]

        self.b_elem = np.array([bf.element for bf in mesh.boundary], dtype=np.intp)
        self.b_face = np.array([bf.face for bf in mesh.boundary], dtype=np.intp)
        self.b_tags = [bf.tag for bf in mesh.boundary]
        for tag in set(self.b_tags):
            if tag not in self.boundary_states:
                raise ValueError(f"mesh has Dirichlet faces tagged '{tag}' but no boundary state was registered")

    # -- face helpers --------------------------------------------------------

    def _permute_to_owner(self, vals):
        """Map (C, nf, n, n) values from neighbour grids onto owner grids."""
        return vals[:, self._link_rows, self.perm_a, self.perm_b]

    def _scatter_right(self, vals):
        """Inverse permutation: owner-grid values placed on neighbour grids."""
        out = np.empty_like(vals)
        out[:, self._link_rows, self.perm_a, self.perm_b] = vals
        return out

    def _boundary_exterior(self, t):
        """Exterior conservative states on all Dirichlet faces (5, nb, n, n)."""
        xb = _gather(_face_stack(self.x), self.b_face, self.b_elem)
        u_ext = np.empty((5,) + xb.shape[1:])
        for tag in set(self.b_tags):
            sel = np.array([bt == tag for bt in self.b_tags])
            u_ext[:, sel] = self.boundary_states[tag](xb[:, sel], t)
        return u_ext

    # -- gradient lifting (BR1 auxiliary equation, strong form) --------------

    def lift_gradients(self, u, t=0.0):
        """Lifted gradients Q of the entropy variables (or of U).

        Solves the BR1 auxiliary equation in strong collocation form:
        J Q_d = sum_l Ja^l_d (D_l W) + lift((W* - W) n_d s_hat), with
        W* the arithmetic mean at interior faces and the exterior trace at
        Dirichlet faces.

        Returns:
            Q with shape (3, 5, K, n, n, n); Q[d] approximates dW/dx_d.
        """
        gas = self.gas
        if self.gradient_variables == "entropy":
            w = physics.entropy_variables(u, gas)
        else:
            w = u
        grad = np.stack([
            np.einsum("in,cKnjk->cKijk", self.basis.D, w),
            np.einsum("jn,cKink->cKijk", self.basis.D, w),
            np.einsum("kn,cKijn->cKijk", self.basis.D, w),
        ])
        q = np.einsum("ldKijk,lcKijk->dcKijk", self.ja, grad)

        buf = np.zeros((6, self.num_elements, 15, self.n1, self.n1))
        wf = _face_stack(w)
        if len(self.l_elem):
            wl = _gather(wf, self.l_face, self.l_elem)
            wr_own = _gather(wf, self.r_face, self.r_elem)
            wr = self._permute_to_owner(wr_own)
            wstar = 0.5 * (wl + wr)
            nl = _gather(self.normal, self.l_face, self.l_elem)
            sl = self.s_hat[self.l_face, self.l_elem]
            jump_l = (wstar - wl) / self.w0
            lift_l = np.einsum("dfab,cfab->dcfab", nl, jump_l) * sl
            _scatter_add(buf, self.l_face, self.l_elem, lift_l.reshape((15,) + lift_l.shape[2:]))
            nr = _gather(self.normal, self.r_face, self.r_elem)
            sr = self.s_hat[self.r_face, self.r_elem]
            jump_r = (self._scatter_right(wstar) - wr_own) / self.w0
            lift_r = np.einsum("dfab,cfab->dcfab", nr, jump_r) * sr
            _scatter_add(buf, self.r_face, self.r_elem, lift_r.reshape((15,) + lift_r.shape[2:]))
        if len(self.b_elem):
            wb = _gather(wf, self.b_face, self.b_elem)
            u_ext = self._boundary_exterior(t)
            if self.gradient_variables == "entropy":
                w_ext = physics.entropy_variables(u_ext, gas)
            else:
                w_ext = u_ext
            nb = _gather(self.normal, self.b_face, self.b_elem)
            sb = self.s_hat[self.b_face, self.b_elem]
            jump_b = (w_ext - wb) / self.w0
            lift_b = np.einsum("dfab,cfab->dcfab", nb, jump_b) * sb
            _scatter_add(buf, self.b_face, self.b_elem, lift_b.reshape((15,) + lift_b.shape[2:]))

        lift = np.zeros((15, self.num_elements, self.n1, self.n1, self.n1))
        _fold_faces(buf, lift)
        q += lift.reshape(q.shape)
        q /= self.j
        return q

    # -- residual -------------------------------------------------------------

    def residual(self, u, t=0.0):
        """Semi-discrete right-hand side du/dt, shape (5, K, n, n, n)."""
        gas = self.gas
        basis = self.basis
        adv = split_divergence(u, self.ja, basis, self.volume_flux, gas)

        viscous = gas.viscous
        if viscous:
            q = self.lift_gradients(u, t)
            fv = physics.viscous_flux_from_entropy_gradients(u, q, gas)
            fv_contra = np.einsum("ldKijk,dcKijk->lcKijk", self.ja, fv)
            visc = standard_divergence(fv_contra, basis)
        else:
            fv = None
            visc = None

        adv_buf = np.zeros((6, self.num_elements, 5, self.n1, self.n1))
        visc_buf = np.zeros_like(adv_buf) if viscous else None

        uf = _face_stack(u)
        nf_stack = self.normal
        fvf = _face_stack(fv.reshape((15,) + fv.shape[2:])) if viscous else None

        def face_terms(ul, ur, n_l, s_l, fv_l, fv_r):
            fstar = fluxes.surface_flux_advective(ul, ur, n_l, gas, self.surface_dissipation)
            fstar_s = fstar * s_l
            fn_l = np.einsum("dfab,dcfab->cfab", n_l, physics.advective_flux(ul, gas))
            pen_l = fstar_s - fn_l * s_l
            out = [fstar_s, pen_l]
            if viscous:
                fvn_l = np.einsum("dfab,dcfab->cfab", n_l, fv_l)
                fvn_r_owner = np.einsum("dfab,dcfab->cfab", n_l, fv_r)
                fv_star_s = 0.5 * (fvn_l + fvn_r_owner) * s_l
                out += [fv_star_s, fv_star_s - fvn_l * s_l]
            return out

        if len(self.l_elem):
            ul = _gather(uf, self.l_face, self.l_elem)
            ur_own = _gather(uf, self.r_face, self.r_elem)
            ur = self._permute_to_owner(ur_own)
            n_l = _gather(nf_stack, self.l_face, self.l_elem)
            s_l = self.s_hat[self.l_face, self.l_elem]
            if viscous:
                fv_l = _gather(fvf, self.l_face, self.l_elem).reshape((3, 5) + ul.shape[1:])
                fv_r_own = _gather(fvf, self.r_face, self.r_elem)
                fv_r = self._permute_to_owner(fv_r_own).reshape((3, 5) + ul.shape[1:])
            else:
                fv_l = fv_r = None
            terms = face_terms(ul, ur, n_l, s_l, fv_l, fv_r)
            fstar_s, pen_l = terms[0], terms[1]
            _scatter_add(adv_buf, self.l_face, self.l_elem, pen_l / self.w0)
            # Right side: same F* s_hat with flipped sign, own interior flux.
            n_r = _gather(nf_stack, self.r_face, self.r_elem)
            s_r = self.s_hat[self.r_face, self.r_elem]
            fn_r = np.einsum("dfab,dcfab->cfab", n_r, physics.advective_flux(ur_own, gas))
            pen_r = -self._scatter_right(fstar_s) - fn_r * s_r
            _scatter_add(adv_buf, self.r_face, self.r_elem, pen_r / self.w0)
            if viscous:
                fv_star_s, vpen_l = terms[2], terms[3]
                _scatter_add(visc_buf, self.l_face, self.l_elem, vpen_l / self.w0)
                fvn_r = np.einsum("dfab,dcfab->cfab", n_r, fv_r_own.reshape((3, 5) + ur_own.shape[1:]))
                vpen_r = -self._scatter_right(fv_star_s) - fvn_r * s_r
                _scatter_add(visc_buf, self.r_face, self.r_elem, vpen_r / self.w0)

        if len(self.b_elem):
            ul = _gather(uf, self.b_face, self.b_elem)
            u_ext = self._boundary_exterior(t)
            n_l = _gather(nf_stack, self.b_face, self.b_elem)
            s_l = self.s_hat[self.b_face, self.b_elem]
            fstar = fluxes.surface_flux_advective(ul, u_ext, n_l, gas, self.surface_dissipation)
            fn_l = np.einsum("dfab,dcfab->cfab", n_l, physics.advective_flux(ul, gas))
            _scatter_add(adv_buf, self.b_face, self.b_elem, (fstar - fn_l) * s_l / self.w0)
            # Viscous Dirichlet faces use the interior normal flux: zero penalty.

        surf_adv = np.zeros_like(u)
        _fold_faces(adv_buf, surf_adv)
        rhs = -(adv + surf_adv)
        if viscous:
            surf_visc = np.zeros_like(u)
            _fold_faces(visc_buf, surf_visc)
            rhs += (visc + surf_visc) / gas.reynolds
        rhs /= self.j
        if self.source is not None:
            rhs = rhs + self.source(self.x, t, gas)
        return rhs

    # -- monitors and time stepping -------------------------------------------

    def totals(self, u):
        """Conserved totals sum_k <J U, 1>_N, one value per component."""
        w = self.basis.weights
        return np.einsum("cKijk,Kijk,i,j,k->c", u, self.j, w, w, w)

    def total_entropy(self, u):
        s = physics.entropy(u, self.gas)
        w = self.basis.weights
        return float(np.einsum("Kijk,Kijk,i,j,k->", s, self.j, w, w, w))

    def entropy_rate(self, u, rhs):
        """sum_k <J du/dt, W>_N: semi-discrete d/dt of the total entropy."""
        w_vars = physics.entropy_variables(u, self.gas)
        w = self.basis.weights
        return float(np.einsum("cKijk,cKijk,Kijk,i,j,k->", w_vars, rhs, self.j, w, w, w))

    def entropy_surface_scale(self, u):
        """Total surface quadrature of |f^S . n| s_hat: the entropy-flux scale."""
        fs = physics.entropy_flux(u, self.gas)
        fsf = _face_stack(fs)
        w = self.basis.weights
        total = 0.0
        for fid in range(6):
            fn = np.einsum("dKab,dKab->Kab", self.normal[fid], fsf[fid])
            total += np.einsum("Kab,Kab,a,b->", np.abs(fn), self.s_hat[fid], w, w)
        return float(total)

    def timestep_estimate(self, u, cfl):
        """dt = CFL * min over nodes/directions of J / (lam_i |Ja^i|) / (N+1)^2.

        lam_i is |v.n_i| + c with n_i the unit contravariant direction, so
        J/(lam_i |Ja^i|) is the per-direction grid crossing time.  Advective
        estimate only.
        """
        if cfl <= 0.0:
            raise ValueError("CFL must be positive")
        rho, v, p = physics.primitive_from_conservative(u, self.gas)
        c = np.sqrt(self.gas.gamma * p / rho)
        worst = np.inf
        for i in range(3):
            ja_norm = np.sqrt(np.einsum("dKijk,dKijk->Kijk", self.ja[i], self.ja[i]))
            vn = np.abs(np.einsum("dKijk,dKijk->Kijk", self.ja[i], v)) / ja_norm
            local = self.j / (ja_norm * (vn + c))
            worst = min(worst, local.min())
        return cfl * worst / (self.basis.n + 1) ** 2

    def step(self, state, dt):
        """Advance a SolutionField by one RK step (positivity-checked)."""

        def rhs(u, t):
            try:
                return self.residual(u, t)
            except physics.PositivityError as err:
                raise physics.PositivityError(
                    f"positivity failure inside RK stage at t = {t:.6g}: {err}") from err

        u_new = rk_step(state.u, state.t, dt, rhs)
        return SolutionField(u_new, state.t + dt)

