"""Micro multiset F1 over generated vs reference token sequences."""

from collections import Counter


def f1_sequence(pred_tokens, ref_tokens):
    pred, ref = list(pred_tokens), list(ref_tokens)
    if not pred and not ref:
        return 1.0
    overlap = sum((Counter(pred) & Counter(ref)).values())
    if overlap == 0:
        return 0.0
    precision = overlap / len(pred)
    recall = overlap / len(ref)
    return 2 * precision * recall / (precision + recall)
