import math
import random

import pytest

from edhkit.metrics import (
    InstanceScore,
    aggregate,
    goal_condition,
    lcs_length,
    matched_count,
    pct,
    rouge_l,
    rouge_n,
    score_instance,
    success,
    tlw,
)

# ------------------------------------------------------------ success / gc


def test_success_single_pair_present():
    a_f = [("forward", None), ("pickup", "knife"), ("stop", None)]
    assert success(a_f, [("pickup", "knife")]) == 1


def test_success_partial_reference_fails():
    ref = [("slice", "bread"), ("place", "plate")]
    a_f = [("slice", "bread")]
    assert success(a_f, ref) == 0


def test_success_empty_reference_vacuous():
    assert success([("forward", None)], []) == 1
    assert goal_condition([], []) == 1.0


def test_gc_fraction():
    ref = [("pickup", "knife"), ("slice", "bread")]
    a_f = [("pickup", "knife")]
    assert goal_condition(a_f, ref) == 0.5


def test_gc_all_matched_implies_success():
    ref = [("pickup", "knife"), ("slice", "bread")]
    a_f = [("forward", None), ("pickup", "knife"), ("slice", "bread")]
    assert goal_condition(a_f, ref) == 1.0
    assert success(a_f, ref) == 1


def test_gc_positive_with_task_failure():
    # Two of three goal conditions satisfied but the task as a whole fails.
    ref = [("slice", "bread"), ("place", "plate"), ("toggle_on", "toaster")]
    a_f = [("slice", "bread"), ("place", "plate")]
    assert success(a_f, ref) == 0
    assert goal_condition(a_f, ref) == pytest.approx(2 / 3)


def test_ordered_vs_multiset_matching():
    ref = [("pickup", "knife"), ("slice", "bread")]
    a_f = [("slice", "bread"), ("pickup", "knife")]  # right pairs, wrong order
    assert matched_count(a_f, ref, ordered=True) == 1
    assert matched_count(a_f, ref, ordered=False) == 2


# ---------------------------------------------------------------------- tlw


def test_tlw_longer_prediction_penalized():
    assert tlw(1.0, 4, 8) == 0.5


def test_tlw_equal_lengths_weight_one():
    assert tlw(0.5, 10, 10) == 0.5


def test_tlw_shorter_prediction_never_penalized():
    assert tlw(1.0, 5, 3) == 1.0


def test_tlw_rejects_bad_lengths():
    with pytest.raises(ValueError):
        tlw(1.0, -1, 3)
    with pytest.raises(ValueError):
        tlw(1.0, 0, 0)


def test_tlw_empty_prediction_nonempty_reference():
    # Denominator is max(ref, 0) = ref, so the weight is 1 and TLW = m.
    assert tlw(0.0, 3, 0) == 0.0
    assert tlw(1.0, 3, 0) == 1.0


# ------------------------------------------------------------------ aggregate


def test_aggregate_single_instance():
    s = score_instance("i0", [("pickup", "knife")], [("pickup", "knife")])
    rep = aggregate([s])
    assert rep.instance_count == 1
    assert rep.sr == s.success
    assert rep.gc == s.gc
    assert rep.tlw_sr == s.tlw_success


def test_aggregate_mean_and_pct():
    s1 = InstanceScore("a", 1, 1.0, 1.0, 1.0, 1, 1)
    s0 = InstanceScore("b", 0, 0.0, 0.0, 0.0, 1, 1)
    rep = aggregate([s1, s0])
    assert pct(rep.sr) == "50.00"


def test_aggregate_permutation_invariance():
    rng = random.Random(0)
    scores = [
        InstanceScore(str(i), rng.randint(0, 1), rng.random(), rng.random(),
                      rng.random(), 3, 5)
        for i in range(20)
    ]
    shuffled = scores[:]
    rng.shuffle(shuffled)
    assert aggregate(scores).to_dict() == aggregate(shuffled).to_dict()


def test_pct_two_decimals():
    assert pct(0.0885) == "8.85"
    assert pct(0.1402) == "14.02"


# --------------------------------------------------------------------- rouge


def test_rouge_identical():
    toks = "pickup knife slice bread".split()
    for scores in (rouge_n(toks, toks, 1), rouge_n(toks, toks, 2), rouge_l(toks, toks)):
        assert scores == (1.0, 1.0, 1.0)


def test_rouge_disjoint():
    a, b = ["x", "y"], ["u", "v"]
    for scores in (rouge_n(a, b, 1), rouge_n(a, b, 2), rouge_l(a, b)):
        assert scores == (0.0, 0.0, 0.0)


def test_rouge_half_overlap_example():
    pred = "pickup knife slice bread".split()
    ref = "pickup knife place plate".split()
    assert rouge_n(pred, ref, 1)[2] == pytest.approx(0.5)
    assert lcs_length(pred, ref) == 2
    assert rouge_l(pred, ref)[2] == pytest.approx(0.5)


def test_rouge_empty_inputs():
    assert rouge_n([], [], 1) == (0.0, 0.0, 0.0)
    assert rouge_l([], []) == (0.0, 0.0, 0.0)


def _lcs_oracle(a, b):
    """Independent memoized recursion, cross-checking the DP implementation."""
    from functools import lru_cache

    @lru_cache(maxsize=None)
    def rec(i, j):
        if i == len(a) or j == len(b):
            return 0
        if a[i] == b[j]:
            return 1 + rec(i + 1, j + 1)
        return max(rec(i + 1, j), rec(i, j + 1))

    return rec(0, 0)


def test_rouge_l_matches_recursive_oracle():
    rng = random.Random(1)
    alphabet = list("abcde")
    for _ in range(200):
        a = tuple(rng.choice(alphabet) for _ in range(rng.randint(0, 12)))
        b = tuple(rng.choice(alphabet) for _ in range(rng.randint(0, 12)))
        assert lcs_length(a, b) == _lcs_oracle(a, b)


def test_rouge_f1_symmetry_and_range():
    rng = random.Random(2)
    alphabet = list("abcd")
    for _ in range(100):
        a = [rng.choice(alphabet) for _ in range(rng.randint(0, 8))]
        b = [rng.choice(alphabet) for _ in range(rng.randint(0, 8))]
        for fn in (lambda x, y: rouge_n(x, y, 1), rouge_l):
            p, r, f1 = fn(a, b)
            assert 0.0 <= p <= 1.0 and 0.0 <= r <= 1.0 and 0.0 <= f1 <= 1.0
            assert f1 == pytest.approx(fn(b, a)[2])


# ----------------------------------------------------------- score_instance


def test_score_instance_counts_all_predicted_actions():
    ref = [("pickup", "knife")]
    a_f = [("forward", None), ("pickup", "knife"), ("stop", None)]
    s = score_instance("i", a_f, ref)
    assert s.success == 1 and s.gc == 1.0
    assert s.pred_len == 3 and s.ref_len == 1
    assert s.tlw_success == pytest.approx(1 / 3)


def test_score_instance_invariants_hold():
    rng = random.Random(3)
    pool = [("pickup", "knife"), ("slice", "bread"), ("place", "table"),
            ("forward", None), ("turn_left", None)]
    for _ in range(200):
        a_f = [rng.choice(pool) for _ in range(rng.randint(0, 8))]
        ref = [p for p in (rng.choice(pool) for _ in range(rng.randint(0, 4)))
               if p[1] is not None]
        if not a_f and not ref:
            continue
        s = score_instance("i", a_f, ref)
        assert s.tlw_success <= s.success + 1e-12
        assert s.tlw_gc <= s.gc + 1e-12
        if s.success == 1:
            assert s.gc == 1.0
        if s.gc == 1.0 and ref:
            assert s.success == 1
        for v in (s.gc, s.tlw_success, s.tlw_gc):
            assert 0.0 <= v <= 1.0


def test_tlw_monotone_in_pred_len():
    for pred_len in range(1, 20):
        assert tlw(1.0, 5, pred_len) >= tlw(1.0, 5, pred_len + 1) - 1e-12
