"""Synthetic gameplay sessions from a scripted Commander/Follower pair.

Dialog text is a deterministic function of (scenario, task, subgoal index), so
sessions that share a task and scenario have identical dialogs while object
placements still vary with the seed. Navigation share is tuned toward a target
fraction by inserting state-neutral turn pairs.
"""

import hashlib

from ..worldsim import HEADINGS, Simulator, is_interaction, is_navigation, snapshot_state
from ..worldsim.state import HEADING_DELTA
from .session import Event, GameplaySession, validate_session


class UnachievableTask(Exception):
    pass


GREETING = "what should i do today"

INTRO_TEMPLATES = [
    "hi today we will {task}",
    "hello your job is to {task}",
    "we need to {task} now",
]

INSTRUCTION_TEMPLATES = {
    "pickup": [
        "pick up the {target}",
        "grab the {target}",
        "go find the {target} and take it",
    ],
    "place": [
        "put it in the {target}",
        "place what you are holding on the {target}",
        "set it down at the {target}",
    ],
    "slice": [
        "slice the {target}",
        "cut the {target} with a knife",
        "make slices of the {target}",
    ],
    "toggle_on": [
        "turn on the {target}",
        "switch the {target} on",
        "start the {target}",
    ],
    "toggle_off": [
        "turn off the {target}",
        "switch the {target} off",
        "shut down the {target}",
    ],
    "open": ["open the {target}", "pull the {target} open"],
    "close": ["close the {target}", "shut the {target}"],
    "pour": [
        "pour it on the {target}",
        "empty your container into the {target}",
        "water the {target}",
    ],
}

CLARIFY_TEMPLATES = [
    "where can i find the {target}",
    "which {target} do you mean",
]

CLARIFY_REPLY_TEMPLATES = [
    "look around the room for it",
    "it should be nearby just search",
]

IDLE_REMARK = "nothing to do today just relax"


def _stable_choice(options, *keys):
    h = hashlib.md5("|".join(str(k) for k in keys).encode()).digest()
    return options[h[0] % len(options)]


def _stable_int(*keys):
    h = hashlib.md5("|".join(str(k) for k in keys).encode()).digest()
    return h[1]


class ScriptedSolver:
    """Plans and executes follower actions for one subgoal at a time."""

    def __init__(self, sim, state):
        self.sim = sim
        self.state = state
        self.actions = []  # (action, object_id, object_type)

    def _do(self, action, obj=None):
        target_id = obj.obj_id if obj is not None else None
        target_type = obj.object_type if obj is not None else None
        new_state, _, outcome = self.sim.step(self.state, action, target_id)
        if outcome != "ok":
            raise UnachievableTask(
                f"scripted action {action} on {target_id} failed: {outcome}"
            )
        self.state = new_state
        self.actions.append((action, target_id, target_type))

    def _face(self, heading):
        cur = self.state.agent_pose[2]
        diff = (HEADINGS.index(heading) - HEADINGS.index(cur)) % 4
        if diff == 1:
            self._do("turn_right")
        elif diff == 2:
            self._do("turn_right")
            self._do("turn_right")
        elif diff == 3:
            self._do("turn_left")

    def _reset_pan(self):
        while self.state.agent_pose[3] > 0:
            self._do("pan_left")
        while self.state.agent_pose[3] < 0:
            self._do("pan_right")

    def _goto_facing(self, cell):
        """Walk to a cell adjacent to `cell` and face it."""
        rows, cols = self.state.grid_size
        r, c = self.state.agent_pose[0], self.state.agent_pose[1]
        candidates = []
        for heading, (dr, dc) in HEADING_DELTA.items():
            ar, ac = cell[0] - dr, cell[1] - dc
            if 0 <= ar < rows and 0 <= ac < cols:
                dist = abs(ar - r) + abs(ac - c)
                candidates.append((dist, ar, ac, heading))
        if not candidates:
            raise UnachievableTask(f"no approach cell for {cell}")
        _, tr, tc, face_heading = min(candidates)
        self._reset_pan()
        while self.state.agent_pose[0] != tr:
            step_heading = "N" if self.state.agent_pose[0] > tr else "S"
            self._face(step_heading)
            self._do("forward")
        while self.state.agent_pose[1] != tc:
            step_heading = "W" if self.state.agent_pose[1] > tc else "E"
            self._face(step_heading)
            self._do("forward")
        self._face(face_heading)

    def _nearest(self, object_type):
        r, c = self.state.agent_pose[0], self.state.agent_pose[1]
        best = None
        for o in self.state.objects:
            if o.object_type != object_type:
                continue
            dist = abs(o.position[0] - r) + abs(o.position[1] - c)
            key = (dist, o.obj_id)
            if best is None or key < best[0]:
                best = (key, o)
        if best is None:
            raise UnachievableTask(f"no {object_type} in scenario")
        return best[1]

    def _stash_held(self):
        held = self.state.held_object()
        if held is None:
            return
        for receptacle_type in ("table", "sink", "pot"):
            try:
                target = self._nearest(receptacle_type)
            except UnachievableTask:
                continue
            self._goto_facing(tuple(target.position))
            self._do("place", target)
            return
        raise UnachievableTask("no receptacle available to free the hand")

    def _ensure_held(self, object_type):
        held = self.state.held_object()
        if held is not None and held.object_type == object_type:
            return
        self._stash_held()
        target = self._nearest(object_type)
        self._goto_facing(tuple(target.position))
        self._do("pickup", target)

    def solve_subgoal(self, subgoal):
        action, target_type = subgoal["action"], subgoal["target"]
        if action == "pickup":
            self._ensure_held(target_type)
            return
        required = self.sim.affordances.required_held(action, target_type)
        if required is None and action != "place":
            raise UnachievableTask(f"no affordance for {action} on {target_type}")
        if required not in ("*", None):
            self._ensure_held(required)
        elif required is None and action != "place":
            self._stash_held()
        target = self._nearest(target_type)
        self._goto_facing(tuple(target.position))
        self._do(action, target)


def _subgoal_satisfied(digest, subgoal, scenario_types=None):
    objects = digest["objects"].values()

    def of_type(t):
        return [o for o in digest["objects"].values() if o["type"] == t]

    action, target = subgoal["action"], subgoal["target"]
    if action == "pickup":
        return any(
            "held_by_agent" in o["flags"] or o["container"] is not None
            for o in of_type(target)
        )
    if action == "place":
        target_ids = {
            oid for oid, o in digest["objects"].items() if o["type"] == target
        }
        return any(o["container"] in target_ids for o in objects)
    if action == "slice":
        return any("sliced" in o["flags"] for o in of_type(target))
    if action == "toggle_on":
        return any("toggled_on" in o["flags"] for o in of_type(target))
    if action == "toggle_off":
        return all("toggled_on" not in o["flags"] for o in of_type(target))
    if action == "open":
        return any("open" in o["flags"] for o in of_type(target))
    if action == "close":
        return all("open" not in o["flags"] for o in of_type(target))
    if action == "pour":
        return any("filled" in o["flags"] for o in of_type(target))
    return False


def task_satisfied(digest, task):
    return all(_subgoal_satisfied(digest, sg) for sg in task["subgoals"])


def _pad_segments(segments, nav_skew, scen_name, task_name):
    """Insert state-neutral turn pairs so navigation share approaches nav_skew."""
    if nav_skew is None or not segments:
        return segments
    nav = sum(1 for seg in segments for a in seg if is_navigation(a[0]))
    inter = sum(1 for seg in segments for a in seg if is_interaction(a[0]))
    if inter == 0:
        return segments
    desired_nav = nav_skew / (1.0 - nav_skew) * inter
    extra_pairs = max(0, int(round((desired_nav - nav) / 2.0)))
    out = [list(seg) for seg in segments]
    for i in range(extra_pairs):
        seg = out[i % len(out)]
        seg.insert(0, ("turn_right", None, None))
        seg.insert(0, ("turn_left", None, None))
    return out


def generate_session(seed, scenario, task, nav_skew=0.8, channels=16):
    """Generate one replayable session completing `task` in `scenario`."""
    sim = Simulator(scenario, channels=channels)
    scen_name = scenario["name"]
    task_name = task["name"]
    state0 = sim.reset(seed)
    initial_digest = snapshot_state(state0)

    # Pass 1: solve each subgoal to get raw action segments.
    solver = ScriptedSolver(sim, state0.copy())
    segments = []
    for subgoal in task["subgoals"]:
        mark = len(solver.actions)
        solver.solve_subgoal(subgoal)
        segments.append(solver.actions[mark:])
    segments = _pad_segments(segments, nav_skew, scen_name, task_name)

    # Pass 2: replay with dialog events, recording frames before each action.
    events = [Event("Follower", "speak", utterance=GREETING)]
    intro = _stable_choice(INTRO_TEMPLATES, scen_name, task_name, "intro").format(
        task=task_name.replace("_", " ")
    )
    events.append(Event("Commander", "speak", utterance=intro))
    frames = []
    state = state0.copy()
    if not task["subgoals"]:
        events.append(Event("Commander", "speak", utterance=IDLE_REMARK))
    for i, (subgoal, seg) in enumerate(zip(task["subgoals"], segments)):
        templ = _stable_choice(
            INSTRUCTION_TEMPLATES[subgoal["action"]], scen_name, task_name, i
        )
        events.append(
            Event(
                "Commander",
                "speak",
                utterance=templ.format(target=subgoal["target"]),
            )
        )
        if _stable_int(scen_name, task_name, i, "clarify") % 3 == 0:
            q = _stable_choice(CLARIFY_TEMPLATES, scen_name, task_name, i, "q")
            a = _stable_choice(CLARIFY_REPLY_TEMPLATES, scen_name, task_name, i, "a")
            events.append(
                Event("Follower", "speak", utterance=q.format(target=subgoal["target"]))
            )
            events.append(Event("Commander", "speak", utterance=a))
        for action, target_id, target_type in seg:
            obs = sim.render_observation(state)
            events.append(
                Event(
                    "Follower",
                    action,
                    object_id=target_id,
                    object_type=target_type,
                    frame_ref=len(frames),
                )
            )
            frames.append(obs.feature_grid)
            state, _, outcome = sim.step(state, action, target_id)
            if outcome != "ok":
                raise UnachievableTask(f"replay of scripted action {action} failed")
    final_digest = snapshot_state(state)
    if not task_satisfied(final_digest, task):
        raise UnachievableTask(f"task {task_name} not satisfied after solving")
    sess = GameplaySession(
        session_id=f"{scen_name}-{task_name}-{seed}",
        scenario=scenario,
        task=task,
        seed=seed,
        events=events,
        frames=frames,
        initial_digest=initial_digest,
        final_digest=final_digest,
    )
    return validate_session(sess)


def navigation_share(sessions):
    """Fraction of follower world actions that are navigation."""
    nav = total = 0
    for sess in sessions:
        for e in sess.follower_world_events():
            total += 1
            if is_navigation(e.action):
                nav += 1
    return nav / total if total else 0.0
