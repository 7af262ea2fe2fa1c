"""Deterministic toy household gridworld.

Executes navigation/interaction actions on a WorldState and renders symbolic
ego-centric observations as a fixed-shape multi-channel feature grid.
"""

import random
from dataclasses import dataclass

import numpy as np

from .actions import ACTION_DEFS
from .scenario import AffordanceTable, object_type_registry, validate_scenario
from .state import (
    HEADING_DELTA,
    HEADINGS,
    InvalidScenario,
    ObjectInstance,
    WorldState,
)

OBS_SIZE = 7
DEFAULT_CHANNELS = 16
# Channel layout (counted from the end): in-grid mask, visibility cone,
# held-item scalar, 4x heading one-hot. Remaining leading channels encode
# object classes (class index mod n_object_channels).
RESERVED_CHANNELS = 7

FOV_DEPTH = 3
FOV_HALF_WIDTH = 1


class UnknownAction(Exception):
    pass


class MissingObjectArgument(Exception):
    pass


@dataclass
class Observation:
    feature_grid: np.ndarray  # [C, 7, 7] float32
    visible_object_ids: list


def _right_of(heading):
    return HEADINGS[(HEADINGS.index(heading) + 1) % 4]


def _left_of(heading):
    return HEADINGS[(HEADINGS.index(heading) - 1) % 4]


class Simulator:
    def __init__(self, scenario, channels=DEFAULT_CHANNELS):
        self.scenario = validate_scenario(scenario)
        if channels < RESERVED_CHANNELS + 4:
            raise ValueError(f"need at least {RESERVED_CHANNELS + 4} channels")
        self.channels = channels
        self.n_object_channels = channels - RESERVED_CHANNELS
        self.affordances = AffordanceTable(scenario["affordances"])
        self.type_registry = object_type_registry(scenario)
        self._type_index = {t: i for i, t in enumerate(self.type_registry)}
        self.openable_types = set(scenario.get("openable_types", []))

    # ------------------------------------------------------------------ reset

    def reset(self, seed):
        rows, cols = self.scenario["grid_size"]
        agent = self.scenario.get("agent_start", [0, 0, "S", 0])
        state = WorldState(
            grid_size=(rows, cols),
            agent_pose=(agent[0], agent[1], agent[2], agent[3]),
            objects=[],
            step_count=0,
            rng_seed=seed,
        )
        rng = random.Random(seed)
        counts = {}
        deferred = []
        for spec in self.scenario["objects"]:
            otype = spec["type"]
            counts[otype] = counts.get(otype, 0) + 1
            obj = ObjectInstance(
                obj_id=f"{otype}_{counts[otype]}",
                object_type=otype,
                position=(0, 0),
                state_flags=set(spec.get("flags", [])),
                container=None,
            )
            if spec.get("random_placement"):
                deferred.append(obj)
            else:
                obj.position = tuple(spec["position"])
                state.objects.append(obj)
        occupied = {o.position for o in state.objects}
        occupied.add((agent[0], agent[1]))
        free = [
            (r, c)
            for r in range(rows)
            for c in range(cols)
            if (r, c) not in occupied
        ]
        if len(free) < len(deferred):
            raise InvalidScenario("not enough free cells for random placement")
        for obj in deferred:
            cell = free.pop(rng.randrange(len(free)))
            obj.position = cell
            state.objects.append(obj)
        state.validate()
        return state

    # ------------------------------------------------------------- visibility

    def fov_cells(self, state):
        """Cells in the 3-deep, 3-wide cone ahead, shifted by camera pan."""
        r, c, heading, pan = state.agent_pose
        d = HEADING_DELTA[heading]
        rt = HEADING_DELTA[_right_of(heading)]
        cells = []
        for depth in range(1, FOV_DEPTH + 1):
            for lateral in range(-FOV_HALF_WIDTH, FOV_HALF_WIDTH + 1):
                cr = r + depth * d[0] + (lateral + pan) * rt[0]
                cc = c + depth * d[1] + (lateral + pan) * rt[1]
                if 0 <= cr < state.grid_size[0] and 0 <= cc < state.grid_size[1]:
                    cells.append((cr, cc))
        return cells

    def visible_objects(self, state):
        cone = set(self.fov_cells(state))
        out = []
        by_id = {o.obj_id: o for o in state.objects}
        for o in state.objects:
            if "held_by_agent" in o.state_flags:
                continue
            if tuple(o.position) not in cone:
                continue
            if o.container is not None:
                holder = by_id.get(o.container)
                if (
                    holder is not None
                    and holder.object_type in self.openable_types
                    and "open" not in holder.state_flags
                ):
                    continue  # hidden inside a closed container
            out.append(o)
        return out

    # ---------------------------------------------------------------- render

    def render_observation(self, state):
        """Pure symbolic render: equal states produce bitwise-equal grids."""
        grid = np.zeros((self.channels, OBS_SIZE, OBS_SIZE), dtype=np.float32)
        r, c, heading, pan = state.agent_pose
        d = HEADING_DELTA[heading]
        rt = HEADING_DELTA[_right_of(heading)]
        center = OBS_SIZE // 2

        def ego(cell):
            dr, dc = cell[0] - r, cell[1] - c
            fwd = dr * d[0] + dc * d[1]
            lat = dr * rt[0] + dc * rt[1]
            er, ec = center - fwd, center + lat
            if 0 <= er < OBS_SIZE and 0 <= ec < OBS_SIZE:
                return er, ec
            return None

        in_grid_ch = self.channels - 7
        cone_ch = self.channels - 6
        held_ch = self.channels - 5
        heading_ch0 = self.channels - 4

        for wr in range(state.grid_size[0]):
            for wc in range(state.grid_size[1]):
                pos = ego((wr, wc))
                if pos is not None:
                    grid[in_grid_ch, pos[0], pos[1]] = 1.0
        for cell in self.fov_cells(state):
            pos = ego(cell)
            if pos is not None:
                grid[cone_ch, pos[0], pos[1]] = 1.0
        visible = self.visible_objects(state)
        for o in visible:
            pos = ego(tuple(o.position))
            if pos is None:
                continue
            ch = self._type_index.get(o.object_type, 0) % self.n_object_channels
            grid[ch, pos[0], pos[1]] = 1.0
        held = state.held_object()
        if held is not None:
            idx = self._type_index.get(held.object_type, 0)
            grid[held_ch, :, :] = (idx + 1) / float(len(self.type_registry) + 1)
        grid[heading_ch0 + HEADINGS.index(heading), :, :] = 1.0
        return Observation(grid, [o.obj_id for o in visible])

    # ------------------------------------------------------------------ step

    def step(self, state, action, target_id=None):
        """Execute one action; returns (new_state, observation, outcome).

        Outcome is "ok", "noop_blocked" (blocked navigation) or
        "failed_precondition" (illegal interaction; state unchanged).
        """
        if action not in ACTION_DEFS:
            raise UnknownAction(action)
        adef = ACTION_DEFS[action]
        if adef.requires_object and target_id is None:
            raise MissingObjectArgument(action)
        new = state.copy()
        new.step_count += 1
        outcome = "ok"
        if adef.kind == "navigation":
            outcome = self._navigate(new, action)
        elif adef.kind == "interaction":
            outcome = self._interact(new, action, target_id)
        # dialog / stop actions never mutate object or agent state
        held = new.held_object()
        if held is not None:
            held.position = (new.agent_pose[0], new.agent_pose[1])
        return new, self.render_observation(new), outcome

    def _navigate(self, state, action):
        r, c, heading, pan = state.agent_pose
        if action in ("forward", "backward"):
            d = HEADING_DELTA[heading]
            sign = 1 if action == "forward" else -1
            nr, nc = r + sign * d[0], c + sign * d[1]
            if not (0 <= nr < state.grid_size[0] and 0 <= nc < state.grid_size[1]):
                return "noop_blocked"
            state.agent_pose = (nr, nc, heading, pan)
        elif action == "turn_left":
            state.agent_pose = (r, c, _left_of(heading), pan)
        elif action == "turn_right":
            state.agent_pose = (r, c, _right_of(heading), pan)
        elif action == "pan_left":
            if pan <= -1:
                return "noop_blocked"
            state.agent_pose = (r, c, heading, pan - 1)
        elif action == "pan_right":
            if pan >= 1:
                return "noop_blocked"
            state.agent_pose = (r, c, heading, pan + 1)
        return "ok"

    def _interact(self, state, action, target_id):
        target = state.object_by_id(target_id)
        if target is None:
            return "failed_precondition"
        visible = {o.obj_id for o in self.visible_objects(state)}
        if target_id not in visible:
            return "failed_precondition"
        held = state.held_object()
        held_type = held.object_type if held is not None else None
        if not self.affordances.legal(action, target.object_type, held_type):
            return "failed_precondition"

        if action == "pickup":
            if held is not None:
                return "failed_precondition"
            target.state_flags.add("held_by_agent")
            target.container = None
        elif action == "place":
            if held is None or held.obj_id == target.obj_id:
                return "failed_precondition"
            if (
                target.object_type in self.openable_types
                and "open" not in target.state_flags
            ):
                return "failed_precondition"
            held.state_flags.discard("held_by_agent")
            held.container = target.obj_id
            held.position = tuple(target.position)
        elif action == "open":
            if (
                target.object_type not in self.openable_types
                or "open" in target.state_flags
            ):
                return "failed_precondition"
            target.state_flags.add("open")
        elif action == "close":
            if "open" not in target.state_flags:
                return "failed_precondition"
            target.state_flags.discard("open")
        elif action == "slice":
            if "sliced" in target.state_flags:
                return "failed_precondition"
            target.state_flags.add("sliced")
        elif action == "toggle_on":
            if "toggled_on" in target.state_flags:
                return "failed_precondition"
            target.state_flags.add("toggled_on")
        elif action == "toggle_off":
            if "toggled_on" not in target.state_flags:
                return "failed_precondition"
            target.state_flags.discard("toggled_on")
        elif action == "pour":
            if held is None or "filled" not in held.state_flags:
                return "failed_precondition"
            held.state_flags.discard("filled")
            target.state_flags.add("filled")
        return "ok"
