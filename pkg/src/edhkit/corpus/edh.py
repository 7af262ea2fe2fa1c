"""EDH instance slicing, reference plans, and the plan text codec."""

import json
from dataclasses import dataclass, field

import numpy as np

from ..worldsim import (
    INTERACTION_ACTIONS,
    Simulator,
    digest_hash,
    is_interaction,
    snapshot_state,
)

INSTANCE_SCHEMA_VERSION = 1


class ReplayMismatch(Exception):
    pass


@dataclass
class EDHInstance:
    instance_id: str
    scenario: dict
    seed: int
    dialog_history: list  # [(actor, utterance), ...] up to the boundary turn
    action_history: list  # [{action, object_id, object_type}, ...]
    image_history: list  # np arrays aligned with action_history
    future_actions: list  # same shape as action_history, steps (t_i..t_f)
    future_observations: list  # np arrays aligned with future_actions
    final_observation: np.ndarray
    reference_actions: list  # interaction-only [(action, object_type), ...]
    t_i: int
    t_f: int
    initial_digest: dict
    final_digest: dict
    split: str = None


@dataclass
class Plan:
    steps: list = field(default_factory=list)  # [(interaction_action, object_type)]
    malformed: bool = False


def replay_session(sess, channels=16):
    """Re-simulate a session, checking recorded frames along the way.

    Returns (digests, observations_after) where digests[k] is the state digest
    after k follower world actions and observations_after[k] is the render
    after action k.
    """
    sim = Simulator(sess.scenario, channels=channels)
    state = sim.reset(sess.seed)
    digests = [snapshot_state(state)]
    if digest_hash(digests[0]) != digest_hash(sess.initial_digest):
        raise ReplayMismatch("initial digest does not match reset state")
    obs_after = []
    for e in sess.follower_world_events():
        rendered = sim.render_observation(state).feature_grid
        recorded = np.asarray(sess.frames[e.frame_ref], dtype=np.float32)
        if not np.array_equal(rendered, recorded):
            raise ReplayMismatch(f"frame {e.frame_ref} disagrees with re-simulation")
        state, obs, _ = sim.step(state, e.action, e.object_id)
        digests.append(snapshot_state(state))
        obs_after.append(obs.feature_grid)
    if digest_hash(digests[-1]) != digest_hash(sess.final_digest):
        raise ReplayMismatch("final digest does not match replayed state")
    return digests, obs_after


def _boundaries(sess):
    """Indices of Commander dialog turns followed by >=1 Follower interaction
    before the next Commander turn."""
    events = sess.events
    out = []
    for i, e in enumerate(events):
        if not (e.actor == "Commander" and e.kind() == "dialog"):
            continue
        for nxt in events[i + 1 :]:
            if nxt.actor == "Commander" and nxt.kind() == "dialog":
                break
            if nxt.actor == "Follower" and nxt.kind() == "interaction":
                out.append(i)
                break
    return out


def build_edh_instances(sess, channels=16):
    digests, obs_after = replay_session(sess, channels=channels)
    events = sess.events
    bounds = _boundaries(sess)
    # Follower world-action count before each event index.
    steps_before = []
    k = 0
    for e in events:
        steps_before.append(k)
        if e.actor == "Follower" and e.kind() in ("navigation", "interaction"):
            k += 1
    total_steps = k
    world_events = sess.follower_world_events()

    instances = []
    for b_idx, ev_idx in enumerate(bounds):
        t_i = steps_before[ev_idx]
        if b_idx + 1 < len(bounds):
            t_f = steps_before[bounds[b_idx + 1]] - 1
        else:
            t_f = total_steps - 1
        dialog_history = [
            (e.actor, e.utterance)
            for e in events[: ev_idx + 1]
            if e.kind() == "dialog"
        ]
        history = world_events[:t_i]
        future = world_events[t_i : t_f + 1]
        instances.append(
            EDHInstance(
                instance_id=f"{sess.session_id}#{b_idx}",
                scenario=sess.scenario,
                seed=sess.seed,
                dialog_history=dialog_history,
                action_history=[
                    {"action": e.action, "object_id": e.object_id, "object_type": e.object_type}
                    for e in history
                ],
                image_history=[
                    np.asarray(sess.frames[e.frame_ref], dtype=np.float32)
                    for e in history
                ],
                future_actions=[
                    {"action": e.action, "object_id": e.object_id, "object_type": e.object_type}
                    for e in future
                ],
                future_observations=[
                    np.asarray(sess.frames[e.frame_ref], dtype=np.float32)
                    for e in future
                ],
                final_observation=obs_after[t_f],
                reference_actions=[
                    (e.action, e.object_type) for e in future if is_interaction(e.action)
                ],
                t_i=t_i,
                t_f=t_f,
                initial_digest=digests[t_i],
                final_digest=digests[t_f + 1],
            )
        )
    return instances


def extract_plan(instance):
    """Reference plan: the instance's interaction actions in order."""
    return Plan(steps=[tuple(p) for p in instance.reference_actions])


def plan_from_actions(actions):
    """Filter a full (action, object_type) stream down to interaction pairs."""
    return Plan(
        steps=[(a, o) for a, o in actions if is_interaction(a)]
    )


def plan_to_text(plan):
    """Strict alternation: `action object action object ...` token sequence."""
    tokens = []
    for action, obj in plan.steps:
        tokens.append(action)
        tokens.append(obj)
    return tokens


def parse_plan(tokens):
    """Lenient inverse of plan_to_text for evaluating generated text."""
    if isinstance(tokens, str):
        tokens = tokens.split()
    steps = []
    malformed = False
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok in INTERACTION_ACTIONS:
            if i + 1 < len(tokens):
                steps.append((tok, tokens[i + 1]))
                i += 2
            else:
                malformed = True  # dangling action
                i += 1
        else:
            malformed = True  # stray token outside an (action, object) pair
            i += 1
    return Plan(steps=steps, malformed=malformed)


# ------------------------------------------------------------- serialization


def export_instance(inst):
    return {
        "schema_version": INSTANCE_SCHEMA_VERSION,
        "instance_id": inst.instance_id,
        "scenario": inst.scenario,
        "seed": inst.seed,
        "dialog_history": [list(t) for t in inst.dialog_history],
        "action_history": inst.action_history,
        "image_history": [np.asarray(f).tolist() for f in inst.image_history],
        "future_actions": inst.future_actions,
        "future_observations": [np.asarray(f).tolist() for f in inst.future_observations],
        "final_observation": np.asarray(inst.final_observation).tolist(),
        "reference_actions": [list(p) for p in inst.reference_actions],
        "t_i": inst.t_i,
        "t_f": inst.t_f,
        "initial_digest": inst.initial_digest,
        "final_digest": inst.final_digest,
        "split": inst.split,
    }


def ingest_instance(doc):
    return EDHInstance(
        instance_id=doc["instance_id"],
        scenario=doc["scenario"],
        seed=doc["seed"],
        dialog_history=[tuple(t) for t in doc["dialog_history"]],
        action_history=doc["action_history"],
        image_history=[np.asarray(f, dtype=np.float32) for f in doc["image_history"]],
        future_actions=doc["future_actions"],
        future_observations=[
            np.asarray(f, dtype=np.float32) for f in doc["future_observations"]
        ],
        final_observation=np.asarray(doc["final_observation"], dtype=np.float32),
        reference_actions=[tuple(p) for p in doc["reference_actions"]],
        t_i=doc["t_i"],
        t_f=doc["t_f"],
        initial_digest=doc["initial_digest"],
        final_digest=doc["final_digest"],
        split=doc.get("split"),
    )


def save_instance(inst, path):
    with open(path, "w") as f:
        json.dump(export_instance(inst), f)


def load_instance(path):
    with open(path) as f:
        return ingest_instance(json.load(f))
