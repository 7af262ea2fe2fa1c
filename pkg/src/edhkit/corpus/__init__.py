from .edh import (
    EDHInstance,
    Plan,
    ReplayMismatch,
    build_edh_instances,
    export_instance,
    extract_plan,
    ingest_instance,
    load_instance,
    parse_plan,
    plan_from_actions,
    plan_to_text,
    replay_session,
    save_instance,
)
from .generate import (
    UnachievableTask,
    generate_session,
    navigation_share,
    task_satisfied,
)
from .scenarios import SCENARIOS, TASKS, get_scenario, get_task, task_scenario_pairs
from .session import (
    Event,
    GameplaySession,
    export_session,
    ingest_session,
    load_session,
    save_session,
    validate_session,
)
from .vocab import (
    BOS,
    EOS,
    PAD,
    UNK,
    SymbolVocab,
    TokenVocab,
    build_vocab,
    encode_dialog,
    tokenize,
)
