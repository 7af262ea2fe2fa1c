from .core import (
    InstanceScore,
    goal_condition,
    matched_count,
    score_instance,
    success,
    tlw,
)
from .report import MetricsReport, aggregate, format_table, pct
from .rouge import lcs_length, rouge_l, rouge_n
