"""World state containers, digests and diffs."""

import copy
import hashlib
import json
from dataclasses import dataclass, field

HEADINGS = ["N", "E", "S", "W"]
HEADING_DELTA = {"N": (-1, 0), "E": (0, 1), "S": (1, 0), "W": (0, -1)}

KNOWN_FLAGS = {"sliced", "open", "toggled_on", "filled", "dirty", "held_by_agent"}


class InvalidScenario(Exception):
    pass


@dataclass
class ObjectInstance:
    obj_id: str
    object_type: str
    position: tuple  # (row, col)
    state_flags: set = field(default_factory=set)
    container: str = None  # obj_id of containing receptacle, if any

    def copy(self):
        return ObjectInstance(
            self.obj_id,
            self.object_type,
            tuple(self.position),
            set(self.state_flags),
            self.container,
        )


@dataclass
class WorldState:
    grid_size: tuple  # (rows, cols)
    agent_pose: tuple  # (row, col, heading, camera_pan)
    objects: list
    step_count: int = 0
    rng_seed: int = 0

    def copy(self):
        return WorldState(
            tuple(self.grid_size),
            tuple(self.agent_pose),
            [o.copy() for o in self.objects],
            self.step_count,
            self.rng_seed,
        )

    def object_by_id(self, obj_id):
        for o in self.objects:
            if o.obj_id == obj_id:
                return o
        return None

    def held_object(self):
        for o in self.objects:
            if "held_by_agent" in o.state_flags:
                return o
        return None

    def validate(self):
        rows, cols = self.grid_size
        r, c, heading, pan = self.agent_pose
        if not (0 <= r < rows and 0 <= c < cols):
            raise InvalidScenario(f"agent pose {self.agent_pose} outside grid")
        if heading not in HEADINGS or pan not in (-1, 0, 1):
            raise InvalidScenario(f"bad agent pose {self.agent_pose}")
        held = [o for o in self.objects if "held_by_agent" in o.state_flags]
        if len(held) > 1:
            raise InvalidScenario("more than one object held_by_agent")
        occupied = set()
        for o in self.objects:
            pr, pc = o.position
            if not (0 <= pr < rows and 0 <= pc < cols):
                raise InvalidScenario(f"object {o.obj_id} at {o.position} outside grid")
            if not o.state_flags <= KNOWN_FLAGS:
                raise InvalidScenario(f"object {o.obj_id} has unknown flags")
            # Free-standing objects claim their (cell, surface) slot; contained
            # or held objects do not.
            if o.container is None and "held_by_agent" not in o.state_flags:
                slot = (pr, pc)
                if slot in occupied:
                    raise InvalidScenario(f"two objects occupy cell {slot}")
                occupied.add(slot)


def snapshot_state(state):
    """Order-independent digest of the agent pose and object configuration.

    step_count and rng_seed are deliberately excluded, so dialog actions
    (which only advance the clock) leave the digest unchanged.
    """
    objects = {}
    for o in sorted(state.objects, key=lambda x: x.obj_id):
        objects[o.obj_id] = {
            "type": o.object_type,
            "position": list(o.position),
            "flags": sorted(o.state_flags),
            "container": o.container,
        }
    payload = {
        "agent": list(state.agent_pose),
        "objects": objects,
    }
    blob = json.dumps(payload, sort_keys=True)
    payload["sha256"] = hashlib.sha256(blob.encode()).hexdigest()
    return payload


def digest_hash(digest):
    return digest["sha256"]


def diff_states(a, b):
    """Per-object (and agent) field changes between two digests.

    Returns a dict: key -> {field: [old, new]}. Identical digests yield {}.
    """
    changes = {}
    if a["agent"] != b["agent"]:
        changes["agent"] = {"pose": [a["agent"], b["agent"]]}
    ids = set(a["objects"]) | set(b["objects"])
    for oid in sorted(ids):
        oa = a["objects"].get(oid)
        ob = b["objects"].get(oid)
        entry = {}
        if oa is None or ob is None:
            entry["present"] = [oa is not None, ob is not None]
        else:
            for fld in ("position", "flags", "container"):
                if oa[fld] != ob[fld]:
                    entry[fld] = [oa[fld], ob[fld]]
        if entry:
            changes[oid] = entry
    return changes


def compose_diffs(diffs):
    """Fold a sequence of per-step ChangeSets into one net ChangeSet."""
    net = {}
    for d in diffs:
        for key, entry in d.items():
            slot = net.setdefault(key, {})
            for fld, (old, new) in entry.items():
                if fld in slot:
                    slot[fld] = [slot[fld][0], copy.deepcopy(new)]
                else:
                    slot[fld] = [copy.deepcopy(old), copy.deepcopy(new)]
    # Drop changes that cancelled out.
    out = {}
    for key, entry in net.items():
        kept = {f: v for f, v in entry.items() if v[0] != v[1]}
        if kept:
            out[key] = kept
    return out
