"""GameplaySession container plus lossless JSON export/ingest."""

import json
from dataclasses import dataclass, field

import numpy as np

from ..worldsim import ACTION_DEFS, SchemaError, action_kind

SESSION_SCHEMA_VERSION = 1


@dataclass
class Event:
    actor: str  # Commander | Follower
    action: str  # action name; dialog events use "speak"
    object_id: str = None
    object_type: str = None
    utterance: str = None
    frame_ref: int = None

    def kind(self):
        return action_kind(self.action)


@dataclass
class GameplaySession:
    session_id: str
    scenario: dict
    task: dict  # {"name": ..., "subgoals": [...]}
    seed: int
    events: list = field(default_factory=list)
    frames: list = field(default_factory=list)  # np arrays, indexed by frame_ref
    initial_digest: dict = None
    final_digest: dict = None

    def follower_world_events(self):
        return [
            e
            for e in self.events
            if e.actor == "Follower" and e.kind() in ("navigation", "interaction")
        ]


def validate_session(sess):
    if not sess.events:
        raise SchemaError("events", "must be non-empty")
    if sess.initial_digest is None:
        raise SchemaError("initial_digest", "missing")
    if sess.final_digest is None:
        raise SchemaError("final_digest", "missing")
    for i, e in enumerate(sess.events):
        if e.actor not in ("Commander", "Follower"):
            raise SchemaError(f"events[{i}].actor", f"bad actor {e.actor!r}")
        if e.action not in ACTION_DEFS:
            raise SchemaError(f"events[{i}].action", f"unknown action {e.action!r}")
        kind = e.kind()
        if kind == "dialog" and not e.utterance:
            raise SchemaError(f"events[{i}].utterance", "dialog event needs utterance")
        if e.actor == "Follower" and kind in ("navigation", "interaction"):
            if e.frame_ref is None:
                raise SchemaError(f"events[{i}].frame_ref", "missing")
            if not (0 <= e.frame_ref < len(sess.frames)):
                raise SchemaError(f"events[{i}].frame_ref", "out of range")
        if kind == "interaction" and not e.object_id:
            raise SchemaError(f"events[{i}].object_id", "interaction needs a target")
    return sess


def export_session(sess):
    validate_session(sess)
    return {
        "schema_version": SESSION_SCHEMA_VERSION,
        "session_id": sess.session_id,
        "scenario": sess.scenario,
        "task": sess.task,
        "seed": sess.seed,
        "events": [
            {
                "actor": e.actor,
                "action": e.action,
                "object_id": e.object_id,
                "object_type": e.object_type,
                "utterance": e.utterance,
                "frame_ref": e.frame_ref,
            }
            for e in sess.events
        ],
        "frames": [np.asarray(f, dtype=np.float32).tolist() for f in sess.frames],
        "initial_digest": sess.initial_digest,
        "final_digest": sess.final_digest,
    }


def ingest_session(doc):
    if not isinstance(doc, dict):
        raise SchemaError("", "session must be an object")
    if doc.get("schema_version") != SESSION_SCHEMA_VERSION:
        raise SchemaError("schema_version", f"expected {SESSION_SCHEMA_VERSION}")
    for key in ("session_id", "scenario", "task", "seed", "events"):
        if key not in doc:
            raise SchemaError(key, "missing")
    for key in ("initial_digest", "final_digest"):
        if not doc.get(key):
            raise SchemaError(key, "missing")
    events = []
    for i, ed in enumerate(doc["events"]):
        if "actor" not in ed or "action" not in ed:
            raise SchemaError(f"events[{i}]", "needs actor and action")
        events.append(
            Event(
                actor=ed["actor"],
                action=ed["action"],
                object_id=ed.get("object_id"),
                object_type=ed.get("object_type"),
                utterance=ed.get("utterance"),
                frame_ref=ed.get("frame_ref"),
            )
        )
    sess = GameplaySession(
        session_id=doc["session_id"],
        scenario=doc["scenario"],
        task=doc["task"],
        seed=doc["seed"],
        events=events,
        frames=[np.asarray(f, dtype=np.float32) for f in doc.get("frames", [])],
        initial_digest=doc["initial_digest"],
        final_digest=doc["final_digest"],
    )
    return validate_session(sess)


def save_session(sess, path):
    with open(path, "w") as f:
        json.dump(export_session(sess), f)


def load_session(path):
    with open(path) as f:
        return ingest_session(json.load(f))
