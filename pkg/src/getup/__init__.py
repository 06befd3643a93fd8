"""Planar humanoid get-up control: physics, rewards, SAC training pipeline,
torque-limit curriculum, retimed imitation, and trajectory diagnostics."""

from .character import (CharacterModel, JointSpec, RigidLink, Variant,
                        apply_variant, default_character, load_character,
                        load_variant, standing_pose)
from .dynamics import (FkFrame, SimConfig, SimState, bias_forces, contact_forces,
                       control_step, forward_kinematics, mass_matrix, pd_torque)
from .rewards import (RewardBreakdown, RewardParams, ToleranceSpec, reward_balance,
                      reward_slow, reward_weak, tolerance)

__version__ = "0.1.0"
