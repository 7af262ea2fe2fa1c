"""Built-in scenarios and tasks for synthetic session generation."""

from ..worldsim.scenario import SCHEMA_VERSION

# Shared type registry so render channels and object vocab line up across
# scenarios.
OBJECT_TYPES = [
    "knife",
    "bread",
    "toaster",
    "mug",
    "sink",
    "table",
    "book",
    "box",
    "potato",
    "pot",
    "stove",
    "plant",
    "cup",
]

AFFORDANCES = [
    {"action": "pickup", "target": "knife", "held": None},
    {"action": "pickup", "target": "bread", "held": None},
    {"action": "pickup", "target": "mug", "held": None},
    {"action": "pickup", "target": "book", "held": None},
    {"action": "pickup", "target": "potato", "held": None},
    {"action": "pickup", "target": "cup", "held": None},
    {"action": "place", "target": "table", "held": "*"},
    {"action": "place", "target": "sink", "held": "*"},
    {"action": "place", "target": "box", "held": "*"},
    {"action": "place", "target": "pot", "held": "*"},
    {"action": "slice", "target": "bread", "held": "knife"},
    {"action": "slice", "target": "potato", "held": "knife"},
    {"action": "toggle_on", "target": "toaster", "held": "*"},
    {"action": "toggle_off", "target": "toaster", "held": "*"},
    {"action": "toggle_on", "target": "stove", "held": "*"},
    {"action": "toggle_off", "target": "stove", "held": "*"},
    {"action": "open", "target": "box", "held": "*"},
    {"action": "close", "target": "box", "held": "*"},
    {"action": "pour", "target": "plant", "held": "cup"},
    {"action": "pour", "target": "sink", "held": "*"},
]

OPENABLE_TYPES = ["box"]


def _scenario(name, grid, agent_start, objects):
    return {
        "schema_version": SCHEMA_VERSION,
        "name": name,
        "grid_size": list(grid),
        "agent_start": list(agent_start),
        "objects": objects,
        "affordances": AFFORDANCES,
        "openable_types": OPENABLE_TYPES,
        "object_types": OBJECT_TYPES,
    }


def kitchen_small():
    return _scenario(
        "kitchen_small",
        (6, 6),
        (2, 2, "S", 0),
        [
            {"type": "toaster", "position": [0, 5]},
            {"type": "sink", "position": [0, 3]},
            {"type": "table", "position": [5, 5]},
            {"type": "stove", "position": [5, 0]},
            {"type": "pot", "position": [4, 0]},
            {"type": "knife", "random_placement": True},
            {"type": "bread", "random_placement": True},
            {"type": "mug", "random_placement": True, "flags": ["dirty"]},
            {"type": "potato", "random_placement": True},
        ],
    )


def kitchen_large():
    return _scenario(
        "kitchen_large",
        (8, 8),
        (4, 4, "N", 0),
        [
            {"type": "toaster", "position": [7, 7]},
            {"type": "sink", "position": [7, 0]},
            {"type": "table", "position": [0, 0]},
            {"type": "stove", "position": [0, 7]},
            {"type": "pot", "position": [1, 7]},
            {"type": "knife", "random_placement": True},
            {"type": "bread", "random_placement": True},
            {"type": "mug", "random_placement": True, "flags": ["dirty"]},
            {"type": "potato", "random_placement": True},
        ],
    )


def pantry():
    return _scenario(
        "pantry",
        (6, 6),
        (3, 3, "N", 0),
        [
            {"type": "box", "position": [0, 0]},
            {"type": "table", "position": [0, 5]},
            {"type": "plant", "position": [5, 5]},
            {"type": "sink", "position": [5, 0]},
            {"type": "book", "random_placement": True},
            {"type": "cup", "random_placement": True, "flags": ["filled"]},
        ],
    )


SCENARIOS = {
    "kitchen_small": kitchen_small,
    "kitchen_large": kitchen_large,
    "pantry": pantry,
}

# Tasks: named subgoal lists plus the scenarios they are achievable in.
TASKS = {
    "make_toast": {
        "subgoals": [
            {"action": "slice", "target": "bread"},
            {"action": "toggle_on", "target": "toaster"},
        ],
        "scenarios": ["kitchen_small", "kitchen_large"],
    },
    "boil_potato": {
        "subgoals": [
            {"action": "pickup", "target": "potato"},
            {"action": "place", "target": "pot"},
            {"action": "toggle_on", "target": "stove"},
        ],
        "scenarios": ["kitchen_small", "kitchen_large"],
    },
    "wash_mug": {
        "subgoals": [
            {"action": "pickup", "target": "mug"},
            {"action": "place", "target": "sink"},
        ],
        "scenarios": ["kitchen_small", "kitchen_large"],
    },
    "store_book": {
        "subgoals": [
            {"action": "open", "target": "box"},
            {"action": "pickup", "target": "book"},
            {"action": "place", "target": "box"},
        ],
        "scenarios": ["pantry"],
    },
    "water_plant": {
        "subgoals": [
            {"action": "pickup", "target": "cup"},
            {"action": "pour", "target": "plant"},
        ],
        "scenarios": ["pantry"],
    },
    "idle_chat": {
        "subgoals": [],
        "scenarios": ["kitchen_small", "kitchen_large", "pantry"],
    },
}


def get_scenario(name):
    if name not in SCENARIOS:
        raise KeyError(f"unknown scenario {name!r}")
    return SCENARIOS[name]()


def get_task(name):
    if name not in TASKS:
        raise KeyError(f"unknown task {name!r}")
    return {"name": name, "subgoals": TASKS[name]["subgoals"]}


def task_scenario_pairs():
    """All (task, scenario) combinations the scripted solver can complete."""
    pairs = []
    for task, info in TASKS.items():
        if task == "idle_chat":
            continue
        for scen in info["scenarios"]:
            pairs.append((task, scen))
    return pairs
