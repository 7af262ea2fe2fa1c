"""Closed-loop rollout of a trained agent inside the simulator."""

from dataclasses import dataclass, field

import numpy as np
import torch

from ..corpus.vocab import encode_dialog
from ..worldsim import (
    ACTION_DEFS,
    STOP_ACTION,
    Simulator,
    digest_hash,
    snapshot_state,
)
from .model import flat_action_index, predict_indices


class ReplaySetupError(Exception):
    pass


@dataclass
class Trajectory:
    actions: list = field(default_factory=list)  # [(action, object_type or None)]
    observations: list = field(default_factory=list)
    outcomes: list = field(default_factory=list)
    stop_reason: str = "max_steps"


def restore_initial_state(instance, channels=16):
    """Replay the instance's action history from reset to reach S^E."""
    sim = Simulator(instance.scenario, channels=channels)
    state = sim.reset(instance.seed)
    for step in instance.action_history:
        state, _, _ = sim.step(state, step["action"], step.get("object_id"))
    digest = snapshot_state(state)
    if digest_hash(digest) != digest_hash(instance.initial_digest):
        raise ReplaySetupError(
            f"replayed state of {instance.instance_id} does not match S^E digest"
        )
    return sim, state


def _resolve_target(sim, state, object_type):
    """Nearest visible object of the predicted type, or None."""
    candidates = [
        o for o in sim.visible_objects(state) if o.object_type == object_type
    ]
    held = state.held_object()
    if held is not None and held.object_type == object_type:
        candidates.append(held)
    if not candidates:
        return None
    r, c = state.agent_pose[0], state.agent_pose[1]
    candidates.sort(
        key=lambda o: (abs(o.position[0] - r) + abs(o.position[1] - c), o.obj_id)
    )
    return candidates[0].obj_id


@torch.no_grad()
def rollout(model, instance, token_vocab, action_vocab, object_vocab, max_steps):
    """Predict-execute loop realizing the closed-loop task definition.

    Dialog history stays fixed; each predicted action is executed in the
    simulator and the fresh observation is appended to the input streams.
    Simulator failures are recorded per step and the loop continues.
    """
    model.eval()
    cfg = model.config
    sim, state = restore_initial_state(instance, channels=cfg.channels)
    token_ids = torch.tensor(
        encode_dialog(instance.dialog_history, token_vocab, cfg.max_dialog_tokens),
        dtype=torch.long,
    )
    frames = [np.asarray(f, dtype=np.float32) for f in instance.image_history]
    frames.append(sim.render_observation(state).feature_grid)
    prev = [cfg.start_action_index()]
    n_obj = len(object_vocab)
    for s in instance.action_history:
        prev.append(
            flat_action_index(
                action_vocab.encode(s["action"]),
                object_vocab.encode(s["object_type"]),
                n_obj,
            )
        )
    traj = Trajectory()
    for _ in range(max_steps):
        if len(frames) > cfg.max_steps:
            break
        frame_t = torch.from_numpy(np.stack(frames).astype(np.float32))
        prev_t = torch.tensor(prev, dtype=torch.long)
        action_logits, object_logits = model(token_ids, frame_t, prev_t)
        act_idx, obj_idx = predict_indices(action_logits[-1], object_logits[-1])
        action = action_vocab.decode(act_idx)
        if action == STOP_ACTION:
            traj.actions.append((STOP_ACTION, None))
            traj.observations.append(frames[-1])
            traj.outcomes.append("ok")
            traj.stop_reason = "stop_token"
            break
        if ACTION_DEFS[action].requires_object:
            object_type = object_vocab.decode(obj_idx)
            if object_type == "<none>":
                object_type = None
        else:
            object_type = None
        target_id = None
        if ACTION_DEFS[action].requires_object and object_type is not None:
            target_id = _resolve_target(sim, state, object_type)
        if ACTION_DEFS[action].requires_object and target_id is None:
            outcome = "failed_precondition"
            obs = sim.render_observation(state)
        else:
            state, obs, outcome = sim.step(state, action, target_id)
        traj.actions.append((action, object_type))
        traj.observations.append(obs.feature_grid)
        traj.outcomes.append(outcome)
        frames.append(obs.feature_grid)
        prev.append(
            flat_action_index(act_idx, obj_idx if object_type is not None else 0, n_obj)
        )
    return traj
