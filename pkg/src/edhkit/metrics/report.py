"""Macro-averaged report assembly and table formatting."""

import math
from dataclasses import dataclass, field


def _mean(values):
    # fsum keeps the mean exact, hence invariant to instance ordering.
    return math.fsum(values) / len(values) if values else 0.0


@dataclass
class MetricsReport:
    split: str
    instance_count: int
    sr: float = 0.0
    gc: float = 0.0
    tlw_sr: float = 0.0
    tlw_gc: float = 0.0
    rouge1: float = None
    rouge2: float = None
    rougeL: float = None
    f1: float = None
    extras: dict = field(default_factory=dict)

    def to_dict(self):
        out = {
            "split": self.split,
            "instance_count": self.instance_count,
            "SR": self.sr,
            "GC": self.gc,
            "TLW_SR": self.tlw_sr,
            "TLW_GC": self.tlw_gc,
        }
        for key, val in (
            ("ROUGE-1", self.rouge1),
            ("ROUGE-2", self.rouge2),
            ("ROUGE-L", self.rougeL),
            ("F1", self.f1),
        ):
            if val is not None:
                out[key] = val
        out.update(self.extras)
        return out


def aggregate(scores, split="valid_seen"):
    """Unweighted (macro) mean of per-instance scores."""
    return MetricsReport(
        split=split,
        instance_count=len(scores),
        sr=_mean([s.success for s in scores]),
        gc=_mean([s.gc for s in scores]),
        tlw_sr=_mean([s.tlw_success for s in scores]),
        tlw_gc=_mean([s.tlw_gc for s in scores]),
    )


def pct(x):
    """Percent with two decimals, matching the result-table layout."""
    return f"{100.0 * x:.2f}"


def format_table(report):
    """Aligned plain-text table: SR [TLW], GC [TLW]; R-1, R-2, R-L; F1."""
    lines = [
        f"split: {report.split}  instances: {report.instance_count}",
        f"{'':12}{'SR [TLW]':>16}{'GC [TLW]':>18}",
        (
            f"{'result':12}"
            f"{pct(report.sr) + ' [' + pct(report.tlw_sr) + ']':>16}"
            f"{pct(report.gc) + ' [' + pct(report.tlw_gc) + ']':>18}"
        ),
    ]
    if report.rouge1 is not None:
        lines.append(f"{'':12}{'R-1':>8}{'R-2':>8}{'R-L':>8}")
        lines.append(
            f"{'rouge':12}"
            f"{pct(report.rouge1):>8}{pct(report.rouge2):>8}{pct(report.rougeL):>8}"
        )
    if report.f1 is not None:
        lines.append(f"{'F1':12}{report.f1:.4f}")
    return "\n".join(lines)
