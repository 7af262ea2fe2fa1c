from .actions import (
    ACTION_DEFS,
    ACTION_ORDER,
    DIALOG_ACTIONS,
    INTERACTION_ACTIONS,
    NAVIGATION_ACTIONS,
    STOP_ACTION,
    ActionDef,
    action_kind,
    is_interaction,
    is_navigation,
)
from .scenario import (
    SCHEMA_VERSION,
    AffordanceTable,
    SchemaError,
    load_scenario,
    object_type_registry,
    validate_scenario,
)
from .sim import (
    DEFAULT_CHANNELS,
    OBS_SIZE,
    MissingObjectArgument,
    Observation,
    Simulator,
    UnknownAction,
)
from .state import (
    HEADING_DELTA,
    HEADINGS,
    InvalidScenario,
    ObjectInstance,
    WorldState,
    compose_diffs,
    diff_states,
    digest_hash,
    snapshot_state,
)
