"""Planar humanoid description: links, joints, strength limits, variants.

The character is a tree of rigid links in the sagittal plane. Each joint is a
revolute hinge with a torque limit and an angle range; non-actuated joints are
welds. Variants lock joints (limbs in a cast) or delete whole limbs (missing
arm), shrinking the observation and action spaces accordingly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ConfigurationError

SCHEMA_VERSION = 1

VARIANT_FULL = "Full"
VARIANT_CAST = "CastArmLeg"
VARIANT_MISSING_ARM = "MissingArm"
_SHIPPED_VARIANTS = {VARIANT_CAST: "cast.json", VARIANT_MISSING_ARM: "missing_arm.json"}


@dataclass(frozen=True)
class RigidLink:
    """One rigid body: a segment extending along its local +x axis."""

    name: str
    mass: float                       # kg
    rotational_inertia: float         # kg m^2 about the link com
    length: float                     # m
    com_offset: float                 # m along the axis from the proximal joint
    contact_points: tuple = ()        # (x, z) offsets in the link frame

    def __post_init__(self):
        if self.mass <= 0:
            raise ConfigurationError(f"link {self.name}: mass must be > 0")
        if self.rotational_inertia <= 0:
            raise ConfigurationError(f"link {self.name}: rotational inertia must be > 0")
        if self.length < 0:
            raise ConfigurationError(f"link {self.name}: length must be >= 0")


@dataclass(frozen=True)
class JointSpec:
    """Hinge connecting a child link to its parent.

    ``attach`` is the joint position in the parent frame; ``rest_offset`` and
    ``axis`` fix the child frame orientation: child angle = parent angle +
    rest_offset + axis * q. Welds (actuated=False) contribute a constant
    ``weld_angle`` in place of a degree of freedom.
    """

    name: str
    parent_link: str
    child_link: str
    attach: tuple                     # (x, z) in parent frame
    rest_offset: float
    axis: int
    torque_limit: float               # N m
    angle_limits: tuple               # (lower, upper) rad
    actuated: bool = True
    weld_angle: float = 0.0

    def __post_init__(self):
        if self.torque_limit <= 0:
            raise ConfigurationError(f"joint {self.name}: torque limit must be > 0")
        lo, hi = self.angle_limits
        if self.actuated and not lo < hi:
            raise ConfigurationError(
                f"joint {self.name}: angle limits must satisfy lower < upper")
        if self.axis not in (-1, 1):
            raise ConfigurationError(f"joint {self.name}: axis must be +1 or -1")


@dataclass(frozen=True)
class Variant:
    """A structural modification: joints welded rigid and/or links removed."""

    name: str
    locked_joints: tuple = ()
    removed_links: tuple = ()
    lock_angles: dict = field(default_factory=dict)


@dataclass
class CharacterModel:
    """Immutable-by-convention description of one planar character.

    The actuated-joint declaration order defines the layout of the action
    vector, the torque-limit vector and the joint block of the generalized
    coordinates; the three stay index-aligned by construction.
    """

    name: str
    links: list
    joints: list
    total_mass: float
    root_link: str
    head_link: str
    head_offset: tuple
    torso_link: str
    end_effectors: list               # (name, link, (x, z) offset)
    foot_references: list             # (link, (x, z) offset), exactly two for Full
    hip_joint_names: list
    standing_pose_map: dict           # joint name -> angle, actuated joints only
    standing_root: tuple              # (x, z, angle)
    variant_name: str = VARIANT_FULL
    removed_link_names: frozenset = frozenset()
    fixed_root: bool = False          # weld the root to standing_root (test rigs)
    _kin: object = None               # cached KinematicStructure (set by dynamics)

    def __post_init__(self):
        self._validate()

    # -- derived views -------------------------------------------------

    @property
    def actuated_joints(self) -> list:
        return [j for j in self.joints if j.actuated]

    @property
    def actuated_joint_names(self) -> list:
        return [j.name for j in self.actuated_joints]

    @property
    def action_dim(self) -> int:
        return len(self.actuated_joints)

    @property
    def dof(self) -> int:
        """Generalized-coordinate count: root (x, z, angle) plus hinge angles."""
        return (0 if self.fixed_root else 3) + self.action_dim

    @property
    def torque_limits(self) -> np.ndarray:
        return np.array([j.torque_limit for j in self.actuated_joints])

    @property
    def angle_limits(self) -> np.ndarray:
        return np.array([j.angle_limits for j in self.actuated_joints])

    def link(self, name: str) -> RigidLink:
        for ln in self.links:
            if ln.name == name:
                return ln
        raise ConfigurationError(f"unknown link {name!r}")

    def joint_index(self, name: str) -> int:
        for i, j in enumerate(self.actuated_joints):
            if j.name == name:
                return i
        raise ConfigurationError(f"unknown or non-actuated joint {name!r}")

    # -- validation ----------------------------------------------------

    def _validate(self):
        names = [ln.name for ln in self.links]
        if len(set(names)) != len(names):
            raise ConfigurationError("duplicate link names in character: links[]")
        jnames = [j.name for j in self.joints]
        if len(set(jnames)) != len(jnames):
            raise ConfigurationError("duplicate joint names in character: joints[]")
        if self.root_link not in names:
            raise ConfigurationError(f"root link {self.root_link!r} not defined: root_link")
        parent_of = {}
        for j in self.joints:
            if j.parent_link not in names:
                raise ConfigurationError(
                    f"joint {j.name!r} references absent parent link "
                    f"{j.parent_link!r}: joints[].parent")
            if j.child_link not in names:
                raise ConfigurationError(
                    f"joint {j.name!r} references absent child link "
                    f"{j.child_link!r}: joints[].child")
            if j.child_link in parent_of or j.child_link == self.root_link:
                raise ConfigurationError(
                    f"link {j.child_link!r} has more than one parent joint "
                    f"(cyclic or non-tree kinematics): joints[]")
            parent_of[j.child_link] = j.parent_link
        for name in names:
            if name != self.root_link and name not in parent_of:
                raise ConfigurationError(
                    f"link {name!r} is not connected to the tree: links[]")
        # reject cycles by walking each link to the root
        for name in names:
            seen, cur = set(), name
            while cur != self.root_link:
                if cur in seen:
                    raise ConfigurationError(f"cyclic kinematics at link {cur!r}: joints[]")
                seen.add(cur)
                cur = parent_of[cur]
        mass_sum = math.fsum(ln.mass for ln in self.links)
        if abs(mass_sum - self.total_mass) > 1e-9:
            raise ConfigurationError(
                f"link masses sum to {mass_sum!r}, expected total_mass "
                f"{self.total_mass!r}: links[].mass")
        for j in self.actuated_joints:
            if j.name not in self.standing_pose_map:
                raise ConfigurationError(
                    f"standing pose missing joint {j.name!r}: standing_pose")


def standing_pose(model: CharacterModel) -> np.ndarray:
    """The hand-designed standing joint angles, ordered like the action vector."""
    return np.array([model.standing_pose_map[j.name] for j in model.actuated_joints])


def _link_from_dict(d: dict) -> RigidLink:
    try:
        return RigidLink(
            name=d["name"], mass=float(d["mass"]),
            rotational_inertia=float(d["rotational_inertia"]),
            length=float(d["length"]), com_offset=float(d["com_offset"]),
            contact_points=tuple((float(x), float(z)) for x, z in d.get("contact_points", ())),
        )
    except KeyError as exc:
        raise ConfigurationError(f"link entry missing field {exc}: links[]") from exc


def _joint_from_dict(d: dict) -> JointSpec:
    try:
        return JointSpec(
            name=d["name"], parent_link=d["parent"], child_link=d["child"],
            attach=(float(d["attach"][0]), float(d["attach"][1])),
            rest_offset=float(d["rest_offset"]), axis=int(d["axis"]),
            torque_limit=float(d["torque_limit"]),
            angle_limits=(float(d["angle_limits"][0]), float(d["angle_limits"][1])),
            actuated=bool(d.get("actuated", True)),
            weld_angle=float(d.get("weld_angle", 0.0)),
        )
    except KeyError as exc:
        raise ConfigurationError(f"joint entry missing field {exc}: joints[]") from exc


def load_character(source) -> CharacterModel:
    """Build a CharacterModel from a JSON document (dict, path, or shipped default).

    Raises ConfigurationError naming the offending field for malformed
    documents, duplicate names, broken references, and cyclic kinematics.
    """
    doc = _load_document(source)
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigurationError(
            f"unsupported character schema_version {version!r}: schema_version")
    try:
        model = CharacterModel(
            name=doc.get("name", "character"),
            links=[_link_from_dict(d) for d in doc["links"]],
            joints=[_joint_from_dict(d) for d in doc["joints"]],
            total_mass=float(doc["total_mass"]),
            root_link=doc["root_link"],
            head_link=doc["head"]["link"],
            head_offset=tuple(doc["head"]["offset"]),
            torso_link=doc["torso_link"],
            end_effectors=[(e["name"], e["link"], tuple(e["offset"]))
                           for e in doc["end_effectors"]],
            foot_references=[(f["link"], tuple(f["offset"]))
                             for f in doc["foot_references"]],
            hip_joint_names=list(doc["hip_joints"]),
            standing_pose_map={k: float(v) for k, v in doc["standing_pose"].items()},
            standing_root=tuple(doc["standing_root"]),
            fixed_root=bool(doc.get("fixed_root", False)),
        )
    except KeyError as exc:
        raise ConfigurationError(f"character document missing field {exc}") from exc
    return model


def default_character() -> CharacterModel:
    """The shipped planar humanoid."""
    return load_character("planar_humanoid")


def load_variant(source) -> Variant:
    """Read a variant document (dict, path, or one of the shipped names)."""
    if isinstance(source, str) and source == VARIANT_FULL:
        return Variant(VARIANT_FULL)
    if isinstance(source, str) and source in _SHIPPED_VARIANTS:
        source = _SHIPPED_VARIANTS[source][:-len(".json")]
    doc = _load_document(source)
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ConfigurationError(
            f"unsupported variant schema_version {doc.get('schema_version')!r}:"
            " schema_version")
    return Variant(
        name=doc.get("name", "variant"),
        locked_joints=tuple(doc.get("locked_joints", ())),
        removed_links=tuple(doc.get("removed_links", ())),
        lock_angles={k: float(v) for k, v in doc.get("lock_angles", {}).items()},
    )


def apply_variant(model: CharacterModel, variant: Variant) -> CharacterModel:
    """Weld the locked joints and delete the removed links.

    Locked joints leave the actuated set (welded at the standing-pose angle
    unless the variant overrides it); removed links disappear together with
    their joints, end effectors and standing-pose entries. Idempotent for the
    same variant. Raises ConfigurationError if a removal would disconnect the
    remaining tree.
    """
    if variant.name == VARIANT_FULL:
        return model

    removed = set(variant.removed_links)
    for name in removed:
        if not any(ln.name == name for ln in model.links):
            if name in model.removed_link_names:
                continue  # already applied
            raise ConfigurationError(f"variant removes unknown link {name!r}")
        if name == model.root_link:
            raise ConfigurationError("variant cannot remove the root link")
    removed &= {ln.name for ln in model.links}

    # removal must not strand any surviving link
    child_to_parent = {j.child_link: j.parent_link for j in model.joints}
    for ln in model.links:
        if ln.name in removed or ln.name == model.root_link:
            continue
        parent = child_to_parent[ln.name]
        if parent in removed:
            raise ConfigurationError(
                f"removing {parent!r} would disconnect link {ln.name!r}")

    links = [ln for ln in model.links if ln.name not in removed]
    joints = []
    for j in model.joints:
        if j.child_link in removed or j.parent_link in removed:
            continue
        if j.name in variant.locked_joints:
            if j.actuated:
                angle = variant.lock_angles.get(
                    j.name, model.standing_pose_map.get(j.name, 0.0))
                j = replace(j, actuated=False, weld_angle=angle)
        joints.append(j)
    known_joints = {j.name for j in model.joints}
    for name in variant.locked_joints:
        if name not in known_joints:
            raise ConfigurationError(f"variant locks unknown joint {name!r}")

    pose = {k: v for k, v in model.standing_pose_map.items()
            if any(j.name == k and j.actuated for j in joints)}
    effectors = [(n, l, o) for (n, l, o) in model.end_effectors if l not in removed]
    feet = [(l, o) for (l, o) in model.foot_references if l not in removed]
    hips = [h for h in model.hip_joint_names if any(j.name == h for j in joints)]
    return CharacterModel(
        name=model.name, links=links, joints=joints, total_mass=float(
            math.fsum(ln.mass for ln in links)),
        root_link=model.root_link, head_link=model.head_link,
        head_offset=model.head_offset, torso_link=model.torso_link,
        end_effectors=effectors, foot_references=feet, hip_joint_names=hips,
        standing_pose_map=pose, standing_root=model.standing_root,
        variant_name=variant.name,
        removed_link_names=model.removed_link_names | frozenset(variant.removed_links),
        fixed_root=model.fixed_root,
    )


def _load_document(source) -> dict:
    if isinstance(source, dict):
        return source
    if isinstance(source, (str, Path)):
        path = Path(source)
        if not path.suffix and not path.exists():
            ref = resources.files("getup").joinpath(f"characters/{source}.json")
            text = ref.read_text()
        else:
            try:
                text = path.read_text()
            except OSError as exc:
                raise ConfigurationError(f"cannot read character document {source}: {exc}")
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"malformed JSON in {source}: {exc}") from exc
    raise ConfigurationError(f"unsupported character source {type(source).__name__}")
