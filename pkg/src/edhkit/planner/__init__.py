from .model import ConfigError, PlannerConfig, PlannerModel, sequence_loss
from .train import (
    EmptyCorpus,
    load_planner,
    predict_plan,
    save_planner,
    save_text_encoder,
    train_planner,
    train_synthetic_simplification,
)
