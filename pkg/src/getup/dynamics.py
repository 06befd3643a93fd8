"""Planar articulated rigid-body dynamics with penalty ground contact.

Reduced (generalized) coordinates over the character tree: a floating root
(x, z, angle) plus one hinge angle per actuated joint. The mass matrix is
assembled from link Jacobians, bias forces come from the zero-acceleration
Newton-Euler sweep, and ground contact is a spring-damper normal force with
Coulomb-clamped tangential friction at enumerated contact points.

All functions are pure; `control_step` returns a fresh state. Identical
inputs produce bit-identical outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .character import CharacterModel
from .errors import ConfigurationError, SimulationDivergedError


@dataclass(frozen=True)
class SimConfig:
    """Integration and contact parameters. dt_sim x substeps = control period."""

    dt_sim: float = 1.0 / 800.0
    substeps_per_control: int = 20
    gravity: float = 9.81
    contact_stiffness: float = 1e4     # N/m
    contact_damping: float = 200.0     # N s/m, normal direction
    tangential_damping: float = 200.0  # N s/m, pre-clamp friction force
    friction_coefficient: float = 1.0
    limit_stiffness: float = 300.0     # N m/rad penalty outside joint limits
    limit_damping: float = 5.0

    def __post_init__(self):
        if self.dt_sim <= 0:
            raise ConfigurationError("dt_sim must be > 0")
        if self.substeps_per_control < 1:
            raise ConfigurationError("substeps_per_control must be >= 1")

    @property
    def control_period(self) -> float:
        return self.dt_sim * self.substeps_per_control

    @property
    def control_hz(self) -> float:
        return 1.0 / self.control_period


@dataclass(frozen=True)
class SimState:
    """Generalized coordinates, velocities and simulation clock."""

    q: np.ndarray
    qdot: np.ndarray
    time: float = 0.0

    def copy(self) -> "SimState":
        return SimState(self.q.copy(), self.qdot.copy(), self.time)


class KinematicStructure:
    """Index arrays derived once per model: tree order, ancestor masks, anchors."""

    def __init__(self, model: CharacterModel):
        self.fixed_root = getattr(model, "fixed_root", False)
        names = [ln.name for ln in model.links]
        self.link_index = {n: i for i, n in enumerate(names)}
        L = len(names)
        self.n_links = L
        root = self.link_index[model.root_link]
        self.root = root

        joint_for_child = {}
        for j in model.joints:
            joint_for_child[self.link_index[j.child_link]] = j
        self.parent = np.full(L, -1, dtype=int)
        self.attach = np.zeros((L, 2))
        self.rest = np.zeros(L)
        self.sign = np.ones(L)
        self.weld = np.zeros(L)
        self.joint_dof = np.full(L, -1, dtype=int)   # actuated joint index or -1

        act_names = model.actuated_joint_names
        act_index = {n: i for i, n in enumerate(act_names)}
        for li in range(L):
            if li == root:
                continue
            j = joint_for_child[li]
            self.parent[li] = self.link_index[j.parent_link]
            self.attach[li] = j.attach
            self.rest[li] = j.rest_offset
            self.sign[li] = j.axis
            self.weld[li] = j.weld_angle
            if j.actuated:
                self.joint_dof[li] = act_index[j.name]

        # topological order (parents precede children)
        order, pending = [root], set(range(L)) - {root}
        while pending:
            progressed = [li for li in pending if self.parent[li] in order]
            order.extend(sorted(progressed))
            pending -= set(progressed)
        self.order = order

        self.J = len(act_names)
        self.base = 0 if self.fixed_root else 3
        self.n = self.base + self.J

        # Angle DOFs: (optional root angle) followed by the actuated joints.
        K = (0 if self.fixed_root else 1) + self.J
        self.K = K
        self.dof_coord = np.empty(K, dtype=int)
        self.dof_sign = np.empty(K)
        self.dof_anchor_link = np.empty(K, dtype=int)  # dof rotates about this link's origin
        k0 = 0
        if not self.fixed_root:
            self.dof_coord[0] = 2
            self.dof_sign[0] = 1.0
            self.dof_anchor_link[0] = root
            k0 = 1
        for li in range(L):
            dj = self.joint_dof[li]
            if dj >= 0:
                self.dof_coord[k0 + dj] = self.base + dj
                self.dof_sign[k0 + dj] = self.sign[li]
                self.dof_anchor_link[k0 + dj] = li
        self.joint_dof_offset = k0

        # mask[l, k]: angle dof k is on the path from the root to link l
        self.mask = np.zeros((L, K))
        for li in self.order:
            if li == root:
                if not self.fixed_root:
                    self.mask[li, 0] = 1.0
                continue
            self.mask[li] = self.mask[self.parent[li]]
            dj = self.joint_dof[li]
            if dj >= 0:
                self.mask[li, k0 + dj] = 1.0

        self.mass = np.array([ln.mass for ln in model.links])
        self.inertia = np.array([ln.rotational_inertia for ln in model.links])
        self.com_vec = np.array([[ln.com_offset, 0.0] for ln in model.links])

        cl, co = [], []
        for li, ln in enumerate(model.links):
            for pt in ln.contact_points:
                cl.append(li)
                co.append(pt)
        self.contact_link = np.array(cl, dtype=int)
        self.contact_offset = np.array(co) if co else np.zeros((0, 2))

        self.head_link = self.link_index[model.head_link]
        self.head_offset = np.array(model.head_offset)
        self.torso_link = self.link_index[model.torso_link]
        self.ee_link = np.array([self.link_index[l] for _, l, _ in model.end_effectors],
                                dtype=int)
        self.ee_offset = np.array([o for _, _, o in model.end_effectors]).reshape(-1, 2)
        self.foot_link = np.array([self.link_index[l] for l, _ in model.foot_references],
                                  dtype=int)
        self.foot_offset = np.array([o for _, o in model.foot_references]).reshape(-1, 2)
        self.angle_lo = np.array([j.angle_limits[0] for j in model.actuated_joints])
        self.angle_hi = np.array([j.angle_limits[1] for j in model.actuated_joints])
        self.fixed_root_pose = np.array(model.standing_root) if self.fixed_root else None


def structure(model: CharacterModel) -> KinematicStructure:
    """The cached kinematic index structure for a model."""
    kin = getattr(model, "_kin", None)
    if kin is None:
        kin = KinematicStructure(model)
        model._kin = kin
    return kin


def _check_dims(kin: KinematicStructure, q, name: str):
    if np.shape(q) != (kin.n,):
        raise ConfigurationError(
            f"{name} has shape {np.shape(q)}, model expects ({kin.n},)")


def _rot(phi):
    c, s = np.cos(phi), np.sin(phi)
    return c, s


def _fk_arrays(kin: KinematicStructure, q: np.ndarray):
    """Absolute link angles and origins, root first."""
    L = kin.n_links
    phi = np.empty(L)
    origin = np.empty((L, 2))
    if kin.fixed_root:
        origin[kin.root] = kin.fixed_root_pose[:2]
        phi[kin.root] = kin.fixed_root_pose[2]
    else:
        origin[kin.root] = q[:2]
        phi[kin.root] = q[2]
    for li in kin.order[1:]:
        p = kin.parent[li]
        dj = kin.joint_dof[li]
        angle = q[kin.base + dj] if dj >= 0 else kin.weld[li]
        phi[li] = phi[p] + kin.rest[li] + kin.sign[li] * angle
        c, s = _rot(phi[p])
        ax, az = kin.attach[li]
        origin[li, 0] = origin[p, 0] + c * ax - s * az
        origin[li, 1] = origin[p, 1] + s * ax + c * az
    return phi, origin


def _world_points(phi, origin, link_idx, offsets):
    c, s = _rot(phi[link_idx])
    x = offsets[:, 0]
    z = offsets[:, 1]
    out = np.empty((len(link_idx), 2))
    out[:, 0] = origin[link_idx, 0] + c * x - s * z
    out[:, 1] = origin[link_idx, 1] + s * x + c * z
    return out


def _point_jacobian(kin: KinematicStructure, points, link_idx, anchors):
    """d point / d q for world points attached to links; shape (m, 2, n)."""
    m = len(link_idx)
    J = np.zeros((m, 2, kin.n))
    if not kin.fixed_root:
        J[:, 0, 0] = 1.0
        J[:, 1, 1] = 1.0
    diff = points[:, None, :] - anchors[None, :, :]          # (m, K, 2)
    w = kin.mask[link_idx] * kin.dof_sign[None, :]           # (m, K)
    # d/d(angle k) of a point = perp(point - anchor_k)
    J[:, 0, kin.dof_coord] = -diff[:, :, 1] * w
    J[:, 1, kin.dof_coord] = diff[:, :, 0] * w
    return J


def _link_omegas(kin: KinematicStructure, qdot):
    return kin.mask @ (kin.dof_sign * qdot[kin.dof_coord])


def mass_matrix(model: CharacterModel, q: np.ndarray) -> np.ndarray:
    """Generalized mass matrix M(q); symmetric positive definite."""
    kin = structure(model)
    q = np.asarray(q, dtype=float)
    _check_dims(kin, q, "q")
    phi, origin = _fk_arrays(kin, q)
    coms = _world_points(phi, origin, np.arange(kin.n_links), kin.com_vec)
    anchors = origin[kin.dof_anchor_link]
    Jv = _point_jacobian(kin, coms, np.arange(kin.n_links), anchors)
    M = np.einsum("l,lan,lam->nm", kin.mass, Jv, Jv)
    Jw = kin.mask * kin.dof_sign[None, :]
    Mang = np.einsum("l,lk,lj->kj", kin.inertia, Jw, Jw)
    idx = np.ix_(kin.dof_coord, kin.dof_coord)
    M[idx] += Mang
    return 0.5 * (M + M.T)


def bias_forces(model: CharacterModel, q: np.ndarray, qdot: np.ndarray) -> np.ndarray:
    """Coriolis/centrifugal plus gravity load C(q, qdot).

    Defined so that M(q) qddot + C(q, qdot) = tau for contact-free motion.
    Gravity magnitude follows the default SimConfig.
    """
    return _bias(model, np.asarray(q, float), np.asarray(qdot, float),
                 SimConfig().gravity)


def _bias(model, q, qdot, gravity):
    kin = structure(model)
    _check_dims(kin, q, "q")
    _check_dims(kin, qdot, "qdot")
    phi, origin = _fk_arrays(kin, q)
    omega = _link_omegas(kin, qdot)
    # zero-qddot acceleration sweep: origins then coms, centripetal terms only
    abias = np.zeros((kin.n_links, 2))
    for li in kin.order[1:]:
        p = kin.parent[li]
        c, s = _rot(phi[p])
        ax, az = kin.attach[li]
        w2 = omega[p] ** 2
        abias[li, 0] = abias[p, 0] - w2 * (c * ax - s * az)
        abias[li, 1] = abias[p, 1] - w2 * (s * ax + c * az)
    c, s = _rot(phi)
    cx = kin.com_vec[:, 0]
    acom = abias.copy()
    acom[:, 0] -= omega ** 2 * (c * cx)
    acom[:, 1] -= omega ** 2 * (s * cx)
    acom[:, 1] += gravity  # (a - g) with g = (0, -gravity)
    coms = _world_points(phi, origin, np.arange(kin.n_links), kin.com_vec)
    anchors = origin[kin.dof_anchor_link]
    Jv = _point_jacobian(kin, coms, np.arange(kin.n_links), anchors)
    return np.einsum("l,lan,la->n", kin.mass, Jv, acom)


def contact_forces(model: CharacterModel, q: np.ndarray, qdot: np.ndarray,
                   config: SimConfig | None = None) -> np.ndarray:
    """Ground reaction mapped to generalized coordinates.

    Spring-damper normal force (never adhesive) plus tangential friction
    clamped to the Coulomb cone, evaluated at every declared contact point
    below ground height 0.
    """
    config = config or SimConfig()
    kin = structure(model)
    q = np.asarray(q, float)
    qdot = np.asarray(qdot, float)
    _check_dims(kin, q, "q")
    _check_dims(kin, qdot, "qdot")
    if len(kin.contact_link) == 0:
        return np.zeros(kin.n)
    phi, origin = _fk_arrays(kin, q)
    pts = _world_points(phi, origin, kin.contact_link, kin.contact_offset)
    below = pts[:, 1] < 0.0
    if not below.any():
        return np.zeros(kin.n)
    anchors = origin[kin.dof_anchor_link]
    idx = np.nonzero(below)[0]
    Jc = _point_jacobian(kin, pts[idx], kin.contact_link[idx], anchors)
    vel = Jc @ qdot
    pen = -pts[idx, 1]
    fn = config.contact_stiffness * pen + config.contact_damping * np.maximum(
        0.0, -vel[:, 1])
    fn = np.maximum(fn, 0.0)
    cone = config.friction_coefficient * fn
    ft = np.clip(-config.tangential_damping * vel[:, 0], -cone, cone)
    force = np.stack([ft, fn], axis=1)
    return np.einsum("can,ca->n", Jc, force)


def pd_torque(kp: np.ndarray, kd: np.ndarray, q_target: np.ndarray,
              q: np.ndarray, qdot: np.ndarray, limits: np.ndarray) -> np.ndarray:
    """Proportional-derivative joint torques clamped to the active limits."""
    kp, kd = np.asarray(kp, float), np.asarray(kd, float)
    q_target, q, qdot = (np.asarray(a, float) for a in (q_target, q, qdot))
    limits = np.asarray(limits, float)
    shapes = {a.shape for a in (kp, kd, q_target, q, qdot, limits)}
    if len(shapes) != 1:
        raise ConfigurationError(f"pd_torque operands disagree in shape: {shapes}")
    if np.any(limits <= 0):
        raise ConfigurationError("pd_torque limits must be positive")
    tau = kp * (q_target - q) - kd * qdot
    return np.clip(tau, -limits, limits)


def _limit_torques(kin: KinematicStructure, q, qdot, config: SimConfig):
    if config.limit_stiffness == 0.0 or kin.J == 0:
        return None
    qa = q[kin.base:]
    hi = qa - kin.angle_hi
    lo = kin.angle_lo - qa
    outside_hi = hi > 0
    outside_lo = lo > 0
    if not (outside_hi.any() or outside_lo.any()):
        return None
    tau = np.zeros(kin.J)
    va = qdot[kin.base:]
    tau[outside_hi] = -config.limit_stiffness * hi[outside_hi] \
        - config.limit_damping * va[outside_hi]
    tau[outside_lo] = config.limit_stiffness * lo[outside_lo] \
        - config.limit_damping * va[outside_lo]
    return tau


def _substep(kin: KinematicStructure, q, qdot, torques, config: SimConfig,
             pd=None):
    """One integration substep.

    Stiffness-like forces (contact springs, limit springs, PD proportional
    terms, bias, actuation) are explicit; damping-like forces (contact
    normal/tangential viscosity, limit damping, PD derivative terms) act on
    the new velocity, which keeps arbitrary damping coefficients stable:

        (M + dt D) qdot' = M qdot + dt (explicit forces)

    ``pd`` optionally supplies (kp, kd, q_target, limits) evaluated here at
    the substep rate with the target held over the control period.
    """
    dt = config.dt_sim
    phi, origin = _fk_arrays(kin, q)
    all_links = np.arange(kin.n_links)
    coms = _world_points(phi, origin, all_links, kin.com_vec)
    anchors = origin[kin.dof_anchor_link]
    Jv = _point_jacobian(kin, coms, all_links, anchors)

    M = np.einsum("l,lan,lam->nm", kin.mass, Jv, Jv)
    Jw = kin.mask * kin.dof_sign[None, :]
    M[np.ix_(kin.dof_coord, kin.dof_coord)] += np.einsum(
        "l,lk,lj->kj", kin.inertia, Jw, Jw)

    omega = _link_omegas(kin, qdot)
    abias = np.zeros((kin.n_links, 2))
    for li in kin.order[1:]:
        p = kin.parent[li]
        c, s = _rot(phi[p])
        ax, az = kin.attach[li]
        w2 = omega[p] ** 2
        abias[li, 0] = abias[p, 0] - w2 * (c * ax - s * az)
        abias[li, 1] = abias[p, 1] - w2 * (s * ax + c * az)
    c, s = _rot(phi)
    cx = kin.com_vec[:, 0]
    acom = abias
    acom[:, 0] -= omega ** 2 * (c * cx)
    acom[:, 1] -= omega ** 2 * (s * cx)
    acom[:, 1] += config.gravity
    rhs = -np.einsum("l,lan,la->n", kin.mass, Jv, acom)

    damp_diag = np.zeros(kin.J)  # joint-coordinate damping (PD kd, limit damping)
    A = None                     # full damping matrix, allocated on first contact

    if torques is not None:
        rhs[kin.base:] += torques
    if pd is not None:
        kp, kd, q_target, limits = pd
        qa, va = q[kin.base:], qdot[kin.base:]
        tau_trial = kp * (q_target - qa) - kd * va
        saturated = np.abs(tau_trial) > limits
        tau = np.where(saturated, np.sign(tau_trial) * limits, kp * (q_target - qa))
        rhs[kin.base:] += tau
        damp_diag += np.where(saturated, 0.0, kd)

    qa = q[kin.base:]
    if config.limit_stiffness != 0.0 and kin.J:
        hi = qa - kin.angle_hi
        lo = kin.angle_lo - qa
        out_hi, out_lo = hi > 0, lo > 0
        if out_hi.any() or out_lo.any():
            spring = np.zeros(kin.J)
            spring[out_hi] = -config.limit_stiffness * hi[out_hi]
            spring[out_lo] = config.limit_stiffness * lo[out_lo]
            rhs[kin.base:] += spring
            damp_diag += np.where(out_hi | out_lo, config.limit_damping, 0.0)

    if len(kin.contact_link):
        pts = _world_points(phi, origin, kin.contact_link, kin.contact_offset)
        below = pts[:, 1] < 0.0
        if below.any():
            idx = np.nonzero(below)[0]
            Jc = _point_jacobian(kin, pts[idx], kin.contact_link[idx], anchors)
            vel = Jc @ qdot
            pen = -pts[idx, 1]
            fn_spring = config.contact_stiffness * pen
            approaching = vel[:, 1] < 0.0
            cone = config.friction_coefficient * (
                fn_spring + config.contact_damping * np.maximum(0.0, -vel[:, 1]))
            viscous_t = np.abs(config.tangential_damping * vel[:, 0]) <= cone
            # explicit parts: normal spring, kinetic (sliding) friction
            ft_kinetic = np.where(viscous_t, 0.0,
                                  -np.sign(vel[:, 0]) * cone)
            rhs += np.einsum("can,ca->n", Jc,
                             np.stack([ft_kinetic, fn_spring], axis=1))
            # implicit parts: normal damping while approaching, sticking friction
            cn = np.where(approaching, config.contact_damping, 0.0)
            ct = np.where(viscous_t, config.tangential_damping, 0.0)
            coeff = np.stack([ct, cn], axis=1)                 # (c, 2)
            A = np.einsum("can,ca,cam->nm", Jc, coeff, Jc)

    lhs = M if A is None else M + dt * A
    if damp_diag.any():
        if lhs is M:
            lhs = M.copy()
        j = np.arange(kin.base, kin.n)
        lhs[j, j] += dt * damp_diag
    qdot_new = np.linalg.solve(lhs, M @ qdot + dt * rhs)
    return qdot_new


def control_step(model: CharacterModel, state: SimState, torques: np.ndarray,
                 config: SimConfig | None = None) -> SimState:
    """Advance one control period (substeps_per_control integration substeps).

    The held torque vector is applied at every substep. Velocities update
    semi-implicitly (damping terms use the new velocity); positions advance
    with the substep velocity midpoint, which reproduces ballistic motion
    exactly and keeps contact-free energy drift bounded.

    Raises SimulationDivergedError carrying the substep index if the state
    stops being finite.
    """
    config = config or SimConfig()
    kin = structure(model)
    torques = np.asarray(torques, dtype=float)
    if torques.shape != (kin.J,):
        raise ConfigurationError(
            f"torques have shape {torques.shape}, model expects ({kin.J},)")
    return _integrate(kin, state, config, torques=torques)


def control_step_pd(model: CharacterModel, state: SimState, q_target: np.ndarray,
                    kp: np.ndarray, kd: np.ndarray, limits: np.ndarray,
                    config: SimConfig | None = None) -> SimState:
    """One control period driven by a PD servo re-evaluated at the substep rate.

    The target is held for the whole control period while the proportional
    and derivative terms track the substep state, with torques clamped per
    joint to ``limits``.
    """
    config = config or SimConfig()
    kin = structure(model)
    q_target = np.asarray(q_target, dtype=float)
    for name, arr in (("q_target", q_target), ("kp", kp), ("kd", kd),
                      ("limits", limits)):
        if np.shape(arr) != (kin.J,):
            raise ConfigurationError(
                f"{name} has shape {np.shape(arr)}, model expects ({kin.J},)")
    pd = (np.asarray(kp, float), np.asarray(kd, float), q_target,
          np.asarray(limits, float))
    return _integrate(kin, state, config, pd=pd)


def _integrate(kin, state, config, torques=None, pd=None):
    q = np.asarray(state.q, dtype=float).copy()
    qdot = np.asarray(state.qdot, dtype=float).copy()
    _check_dims(kin, q, "q")
    _check_dims(kin, qdot, "qdot")
    dt = config.dt_sim
    for sub in range(config.substeps_per_control):
        qdot_new = _substep(kin, q, qdot, torques, config, pd=pd)
        q = q + dt * 0.5 * (qdot + qdot_new)
        qdot = qdot_new
        if not (np.isfinite(q).all() and np.isfinite(qdot).all()):
            raise SimulationDivergedError("non-finite state after integration", sub)
    return SimState(q, qdot, state.time + config.control_period)


@dataclass(frozen=True)
class FkFrame:
    """World-frame kinematic snapshot of one configuration."""

    link_angles: np.ndarray          # absolute angle per link
    link_origins: np.ndarray         # proximal joint position per link, (L, 2)
    link_coms: np.ndarray            # (L, 2)
    com: np.ndarray                  # whole-body centre of mass, (2,)
    head_position: np.ndarray        # (2,)
    head_height: float
    torso_up: float                  # vertical projection of the torso axis
    end_effector_world: np.ndarray   # (E, 2)
    end_effector_egocentric: np.ndarray  # (E, 2), root-frame
    foot_points: np.ndarray          # (F, 2) world
    feet_distance: float             # |horizontal separation| of the foot points
    com_velocity: np.ndarray | None  # (2,) when qdot supplied
    root_position: np.ndarray        # (2,)
    root_angle: float


def forward_kinematics(model: CharacterModel, q: np.ndarray,
                       qdot: np.ndarray | None = None) -> FkFrame:
    """Poses of every link plus the derived task quantities.

    Egocentric end-effector positions are expressed in the root frame, which
    makes them invariant to horizontal translation and equivariant under root
    rotation. com_velocity requires qdot.
    """
    kin = structure(model)
    q = np.asarray(q, dtype=float)
    _check_dims(kin, q, "q")
    phi, origin = _fk_arrays(kin, q)
    all_links = np.arange(kin.n_links)
    coms = _world_points(phi, origin, all_links, kin.com_vec)
    total_mass = kin.mass.sum()
    com = (kin.mass[:, None] * coms).sum(axis=0) / total_mass
    head = _world_points(phi, origin, np.array([kin.head_link]),
                         kin.head_offset[None, :])[0]
    ee = _world_points(phi, origin, kin.ee_link, kin.ee_offset)
    root_pos = origin[kin.root]
    root_angle = phi[kin.root]
    c, s = math.cos(-root_angle), math.sin(-root_angle)
    rel = ee - root_pos[None, :]
    ee_ego = np.stack([c * rel[:, 0] - s * rel[:, 1],
                       s * rel[:, 0] + c * rel[:, 1]], axis=1)
    feet = _world_points(phi, origin, kin.foot_link, kin.foot_offset)
    feet_distance = float(abs(feet[0, 0] - feet[1, 0])) if len(feet) == 2 else 0.0
    com_velocity = None
    if qdot is not None:
        qdot = np.asarray(qdot, dtype=float)
        _check_dims(kin, qdot, "qdot")
        anchors = origin[kin.dof_anchor_link]
        Jv = _point_jacobian(kin, coms, all_links, anchors)
        com_velocity = (kin.mass[:, None] * (Jv @ qdot)).sum(axis=0) / total_mass
    return FkFrame(
        link_angles=phi, link_origins=origin, link_coms=coms, com=com,
        head_position=head, head_height=float(head[1]),
        torso_up=float(math.sin(phi[kin.torso_link])),
        end_effector_world=ee, end_effector_egocentric=ee_ego,
        foot_points=feet, feet_distance=feet_distance,
        com_velocity=com_velocity, root_position=root_pos.copy(),
        root_angle=float(root_angle),
    )


def contact_point_positions(model: CharacterModel, q: np.ndarray) -> np.ndarray:
    """World positions of every declared contact point (for inspection/tests)."""
    kin = structure(model)
    q = np.asarray(q, dtype=float)
    _check_dims(kin, q, "q")
    phi, origin = _fk_arrays(kin, q)
    if len(kin.contact_link) == 0:
        return np.zeros((0, 2))
    return _world_points(phi, origin, kin.contact_link, kin.contact_offset)


def total_energy(model: CharacterModel, state: SimState,
                 gravity: float = 9.81) -> float:
    """Kinetic plus gravitational potential energy (potential zero at z=0)."""
    M = mass_matrix(model, state.q)
    kinetic = 0.5 * float(state.qdot @ M @ state.qdot)
    kin = structure(model)
    phi, origin = _fk_arrays(kin, state.q)
    coms = _world_points(phi, origin, np.arange(kin.n_links), kin.com_vec)
    potential = gravity * float((kin.mass * coms[:, 1]).sum())
    return kinetic + potential
