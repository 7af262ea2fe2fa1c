"""ROUGE-N (clipped n-gram overlap) and sentence-level ROUGE-L."""

from collections import Counter


def _ngrams(tokens, n):
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _prf(overlap, pred_total, ref_total):
    p = overlap / pred_total if pred_total else 0.0
    r = overlap / ref_total if ref_total else 0.0
    f1 = 2 * p * r / (p + r) if (p + r) else 0.0
    return p, r, f1


def rouge_n(pred_tokens, ref_tokens, n):
    """Clipped n-gram multiset overlap; returns (precision, recall, f1)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    pred = _ngrams(list(pred_tokens), n)
    ref = _ngrams(list(ref_tokens), n)
    overlap = sum((pred & ref).values())
    return _prf(overlap, sum(pred.values()), sum(ref.values()))


def lcs_length(a, b):
    """Classic O(n*m) dynamic-programming longest common subsequence."""
    a, b = list(a), list(b)
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_l(pred_tokens, ref_tokens):
    """Sentence-level LCS-based ROUGE-L; returns (precision, recall, f1)."""
    pred, ref = list(pred_tokens), list(ref_tokens)
    lcs = lcs_length(pred, ref)
    return _prf(lcs, len(pred), len(ref))
