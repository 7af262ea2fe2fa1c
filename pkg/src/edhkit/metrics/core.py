"""Success, goal-condition success, and trajectory-length weighting."""

from dataclasses import dataclass


def _interaction_pairs(a_f):
    from ..worldsim import is_interaction

    return [(a, o) for a, o in a_f if is_interaction(a)]


def matched_count(a_f, reference, ordered=True):
    """Reference pairs realized by the trajectory's interaction pairs.

    ordered=True matches the reference as an in-order subsequence (greedy);
    ordered=False uses multiset containment.
    """
    pred = _interaction_pairs(a_f)
    if ordered:
        matched = 0
        i = 0
        for pair in pred:
            if matched < len(reference) and pair == tuple(reference[matched]):
                matched += 1
        return matched
    from collections import Counter

    pc = Counter(pred)
    matched = 0
    for pair in reference:
        pair = tuple(pair)
        if pc[pair] > 0:
            pc[pair] -= 1
            matched += 1
    return matched


def success(a_f, reference, ordered=True):
    """1 iff every reference interaction pair is present in the trajectory."""
    if not reference:
        return 1  # vacuous truth
    return 1 if matched_count(a_f, reference, ordered) == len(reference) else 0


def goal_condition(a_f, reference, ordered=True):
    """Fraction of reference interaction pairs realized by the trajectory."""
    if not reference:
        return 1.0
    return matched_count(a_f, reference, ordered) / len(reference)


def tlw(m, ref_len, pred_len):
    """Trajectory-length-weighted metric: m * ref / max(ref, pred)."""
    if ref_len < 0 or pred_len < 0:
        raise ValueError("lengths must be non-negative")
    if ref_len == 0 and pred_len == 0:
        raise ValueError("ref_len and pred_len cannot both be zero")
    return m * ref_len / max(ref_len, pred_len)


@dataclass
class InstanceScore:
    instance_id: str
    success: int
    gc: float
    tlw_success: float
    tlw_gc: float
    ref_len: int
    pred_len: int


def score_instance(instance_id, a_f, reference, ordered=True):
    """Score one closed-loop trajectory against its reference actions.

    Trajectory length |A_F| counts every predicted action (navigation
    included); the reference length is |A^I_R|.
    """
    s = success(a_f, reference, ordered)
    g = goal_condition(a_f, reference, ordered)
    ref_len, pred_len = len(reference), len(a_f)
    if ref_len == 0 and pred_len == 0:
        tlw_s, tlw_g = float(s), float(g)
    else:
        tlw_s = tlw(s, ref_len, pred_len)
        tlw_g = tlw(g, ref_len, pred_len)
    return InstanceScore(instance_id, s, g, tlw_s, tlw_g, ref_len, pred_len)
