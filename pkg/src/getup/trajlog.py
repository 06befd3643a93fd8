"""Line-delimited JSON trajectory logs.

One header record then one record per control step. The header carries the
schema version, the joint layout and the character/variant identity so
downstream analysis can map coordinates to named joints without the model.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import TrajectoryParseError

SCHEMA_VERSION = 1

PHASE_RAGDOLL = "ragdoll"
PHASE_GETUP = "getup"
PHASE_STANDING = "standing"


@dataclass
class TrajectoryLog:
    """In-memory trajectory: header dict plus step records."""

    header: dict
    records: list = field(default_factory=list)

    @property
    def joint_names(self) -> list:
        return list(self.header.get("joint_names", []))

    def append(self, record: dict):
        self.records.append(record)

    def dump(self, path):
        with open(path, "w") as fh:
            fh.write(json.dumps({"kind": "header", **self.header}) + "\n")
            for rec in self.records:
                fh.write(json.dumps({"kind": "step", **rec}) + "\n")


def make_header(model, stage: str, run_id: str = "", control_hz: float = 40.0,
                extra: dict | None = None) -> dict:
    header = {
        "schema_version": SCHEMA_VERSION,
        "character": model.name,
        "variant": model.variant_name,
        "stage": stage,
        "run_id": run_id,
        "control_hz": control_hz,
        "joint_names": model.actuated_joint_names,
        "q_layout": ["root_x", "root_z", "root_angle", *model.actuated_joint_names],
    }
    if extra:
        header.update(extra)
    return header


def step_record(step: int, phase: str, state, action, beta: float,
                reward: dict | None, head_height: float, com, o_torso: float) -> dict:
    return {
        "step": step,
        "time": state.time,
        "phase": phase,
        "q": [float(v) for v in state.q],
        "qdot": [float(v) for v in state.qdot],
        "action": [float(v) for v in action],
        "beta": float(beta),
        "reward": reward,
        "head_height": float(head_height),
        "com": [float(com[0]), float(com[1])],
        "o_torso": float(o_torso),
    }


def load(path) -> TrajectoryLog:
    """Parse a trajectory log; raises TrajectoryParseError with the line number."""
    header = None
    records = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise TrajectoryParseError(f"invalid JSON: {exc.msg}", lineno)
            kind = rec.get("kind")
            if kind == "header":
                if rec.get("schema_version") != SCHEMA_VERSION:
                    raise TrajectoryParseError(
                        f"unsupported trajectory schema_version "
                        f"{rec.get('schema_version')!r}", lineno)
                header = rec
            elif kind == "step":
                if header is None:
                    raise TrajectoryParseError("step record before header", lineno)
                records.append(rec)
            else:
                raise TrajectoryParseError(f"unknown record kind {kind!r}", lineno)
    if header is None:
        raise TrajectoryParseError("log has no header record", 1)
    return TrajectoryLog(header=header, records=records)
