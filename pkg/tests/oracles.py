"""Independent brute-force oracles used by the test suite.

Everything here is written the slow, obvious way on purpose: these
implementations are the ground truth the fast library code is checked
against, so they must not share any logic with it.
"""

from itertools import combinations


def lcs_brute(a, b):
    """Longest common subsequence length by exhaustive enumeration.

    Enumerates every subsequence of the shorter sequence and keeps the
    longest one that is also a subsequence of the other. Only usable for
    short inputs (lengths <= ~12).
    """
    short, long_ = (a, b) if len(a) <= len(b) else (b, a)
    best = 0
    for k in range(len(short), 0, -1):
        if k <= best:
            break
        for idxs in combinations(range(len(short)), k):
            cand = [short[i] for i in idxs]
            if _is_subsequence(cand, long_):
                best = k
                break
    return best


def _is_subsequence(sub, seq):
    it = iter(seq)
    return all(any(x == y for y in it) for x in sub)


def ngrams_brute(tokens, n):
    """All n-grams of a token list, counted with an explicit loop."""
    counts = {}
    for i in range(len(tokens) - n + 1):
        g = tuple(tokens[i : i + n])
        counts[g] = counts.get(g, 0) + 1
    return counts


def clipped_matches_brute(pred, refs, n):
    """Modified n-gram precision numerator: per-gram counts clipped at the
    maximum count seen in any single reference."""
    pred_counts = ngrams_brute(pred, n)
    ref_counts = [ngrams_brute(r, n) for r in refs]
    matched = 0
    for gram, c in pred_counts.items():
        max_ref = max((rc.get(gram, 0) for rc in ref_counts), default=0)
        matched += min(c, max_ref)
    return matched


def modified_precision_brute(pred, refs, n):
    """Returns (clipped matches, total candidate n-grams) for one pair."""
    total = max(len(pred) - n + 1, 0)
    return clipped_matches_brute(pred, refs, n), total
