"""Self-contained evaluation metrics: corpus BLEU_1-4, ROUGE_L, METEOR,
plus the shared lowercasing tokenizer and the LCS kernel.

All scores are returned on a 0..100 scale. The exact variant choices
(ROUGE_L beta, METEOR weights and stages, tokenizer rule, BLEU smoothing)
are pinned in METRIC_VARIANT so any report produced from these numbers can
refuse comparison against a differently-configured run.
"""

import logging
import math
import re
from collections import Counter
from dataclasses import dataclass

from .stemmer import porter_stem

log = logging.getLogger(__name__)

ROUGE_BETA = 1.2
METEOR_ALPHA = 0.9
METEOR_BETA = 3.0
METEOR_GAMMA = 0.5
SENTENCE_BLEU_EPSILON = 1e-9

METRIC_VARIANT = {
    "tokenizer": "lowercase-whitespace-punct-split",
    "bleu": {"max_n": 4, "corpus_smoothing": "none",
             "sentence_epsilon": SENTENCE_BLEU_EPSILON},
    "rouge_l": {"beta": ROUGE_BETA, "aggregation": "mean"},
    "meteor": {"alpha": METEOR_ALPHA, "beta": METEOR_BETA,
               "gamma": METEOR_GAMMA, "stages": ["exact", "stem"],
               "stemmer": "porter"},
}

_TOKEN_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)


def tokenize_eval(text: str) -> list[str]:
    """Lowercase, split on whitespace, and give every punctuation
    character its own token. 'Which NFL team?' -> [which, nfl, team, ?]."""
    return _TOKEN_RE.findall(text.lower())


def lcs_length(a: list[str], b: list[str]) -> int:
    """Token-level longest common subsequence length, O(|a|*|b|)."""
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, 1):
            if x == y:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[-1]))
        prev = cur
    return prev[-1]


def _ngram_counts(tokens, n):
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _as_reference_list(ref):
    # A reference entry is either one token list or a list of alternatives.
    if ref and isinstance(ref[0], (list, tuple)):
        return [list(r) for r in ref]
    return [list(ref)]


def bleu_corpus(predictions, references, max_n=4):
    """Corpus-level BLEU_1..BLEU_max_n with clipped modified precision,
    geometric mean over orders, and the standard brevity penalty.

    One reference per prediction is the normal case; a reference entry may
    also be a list of alternatives, in which case clipping uses the maximum
    per-reference count and the effective reference length is the one
    closest to the candidate. Zero matched n-grams at some order give that
    order (and higher) a score of 0; no smoothing at corpus level.
    """
    if not predictions:
        raise ValueError("empty corpus")
    if len(predictions) != len(references):
        raise ValueError(
            f"aligned corpora required: {len(predictions)} predictions vs "
            f"{len(references)} references"
        )
    matched = [0] * max_n
    total = [0] * max_n
    cand_len = 0
    ref_len = 0
    for pred, ref in zip(predictions, references):
        refs = _as_reference_list(ref)
        cand_len += len(pred)
        ref_len += min((len(r) for r in refs),
                       key=lambda L: (abs(L - len(pred)), L))
        for n in range(1, max_n + 1):
            pred_counts = _ngram_counts(pred, n)
            if not pred_counts:
                continue
            max_ref_counts = Counter()
            for r in refs:
                for gram, c in _ngram_counts(r, n).items():
                    if c > max_ref_counts[gram]:
                        max_ref_counts[gram] = c
            matched[n - 1] += sum(
                min(c, max_ref_counts[gram]) for gram, c in pred_counts.items()
            )
            total[n - 1] += sum(pred_counts.values())
    bp = 1.0 if cand_len > ref_len else math.exp(1.0 - ref_len / max(cand_len, 1))
    scores = []
    log_precision_sum = 0.0
    dead = False
    for n in range(1, max_n + 1):
        if dead or matched[n - 1] == 0 or total[n - 1] == 0:
            dead = True
            scores.append(0.0)
            continue
        log_precision_sum += math.log(matched[n - 1] / total[n - 1])
        scores.append(100.0 * bp * math.exp(log_precision_sum / n))
    return tuple(scores)


def bleu_sentence(prediction, reference, max_n=4, epsilon=SENTENCE_BLEU_EPSILON):
    """Single-pair BLEU_1..4 with additive-epsilon smoothing so scores stay
    defined when an order has zero matches. Used by the context-reduction
    experiment; corpus scoring deliberately does not smooth."""
    refs = _as_reference_list(reference)
    cand_len = len(prediction)
    ref_len = min((len(r) for r in refs),
                  key=lambda L: (abs(L - cand_len), L))
    bp = 1.0 if cand_len > ref_len else math.exp(1.0 - ref_len / max(cand_len, 1))
    scores = []
    log_precision_sum = 0.0
    dead = False
    for n in range(1, max_n + 1):
        pred_counts = _ngram_counts(prediction, n)
        total = sum(pred_counts.values())
        if dead or total == 0:
            dead = True
            scores.append(0.0)
            continue
        max_ref_counts = Counter()
        for r in refs:
            for gram, c in _ngram_counts(r, n).items():
                if c > max_ref_counts[gram]:
                    max_ref_counts[gram] = c
        m = sum(min(c, max_ref_counts[gram]) for gram, c in pred_counts.items())
        p = m / total if m > 0 else epsilon
        log_precision_sum += math.log(p)
        scores.append(100.0 * bp * math.exp(log_precision_sum / n))
    return tuple(scores)


def rouge_l(prediction, reference, beta=ROUGE_BETA):
    """LCS-based F-measure for one pair, scaled to 0..100."""
    if not prediction or not reference:
        log.warning("rouge_l on an empty side scores 0")
        return 0.0
    L = lcs_length(prediction, reference)
    if L == 0:
        return 0.0
    recall = L / len(reference)
    precision = L / len(prediction)
    b2 = beta * beta
    f = (1 + b2) * recall * precision / (recall + b2 * precision)
    return 100.0 * f


def _greedy_matches(pred, ref, matched_pred, matched_ref, key):
    """One alignment stage: scan prediction positions left to right and
    pair each with the first unmatched reference position with equal key."""
    pairs = []
    ref_keys = [key(t) for t in ref]
    for i, tok in enumerate(pred):
        if matched_pred[i]:
            continue
        k = key(tok)
        for j in range(len(ref)):
            if not matched_ref[j] and ref_keys[j] == k:
                matched_pred[i] = True
                matched_ref[j] = True
                pairs.append((i, j))
                break
    return pairs


def meteor(prediction, reference,
           alpha=METEOR_ALPHA, beta=METEOR_BETA, gamma=METEOR_GAMMA):
    """Alignment-based score for one pair, 0..100.

    Two greedy matching stages (exact surface, then Porter-stemmed),
    harmonic mean weighted toward recall, and a fragmentation penalty on
    the chunk count of the final alignment. No synonym or paraphrase
    stage: that would need an external lexical database.
    """
    if not prediction or not reference:
        log.warning("meteor on an empty side scores 0")
        return 0.0
    matched_pred = [False] * len(prediction)
    matched_ref = [False] * len(reference)
    pairs = _greedy_matches(prediction, reference, matched_pred, matched_ref,
                            key=lambda t: t)
    pairs += _greedy_matches(prediction, reference, matched_pred, matched_ref,
                             key=porter_stem)
    m = len(pairs)
    if m == 0:
        return 0.0
    pairs.sort()
    chunks = 1
    for (i0, j0), (i1, j1) in zip(pairs, pairs[1:]):
        if i1 != i0 + 1 or j1 != j0 + 1:
            chunks += 1
    precision = m / len(prediction)
    recall = m / len(reference)
    fmean = precision * recall / (alpha * precision + (1 - alpha) * recall)
    penalty = gamma * (chunks / m) ** beta
    return 100.0 * fmean * (1.0 - penalty)


@dataclass
class ScoreReport:
    """The six-metric row shape plus how many pairs produced it."""

    bleu1: float
    bleu2: float
    bleu3: float
    bleu4: float
    meteor: float
    rouge_l: float
    prediction_count: int

    def as_dict(self):
        return {
            "bleu1": self.bleu1, "bleu2": self.bleu2,
            "bleu3": self.bleu3, "bleu4": self.bleu4,
            "meteor": self.meteor, "rouge_l": self.rouge_l,
            "prediction_count": self.prediction_count,
        }


def score_corpus(predictions, references) -> ScoreReport:
    """Score aligned token-list corpora with all six metrics.

    BLEU is corpus-level; ROUGE_L and METEOR are arithmetic means of
    per-pair scores (a multi-reference entry scores against its best
    alternative)."""
    if not predictions or len(predictions) != len(references):
        raise ValueError("score_corpus needs non-empty aligned corpora")
    b1, b2, b3, b4 = bleu_corpus(predictions, references)
    rouge_total = 0.0
    meteor_total = 0.0
    for pred, ref in zip(predictions, references):
        refs = _as_reference_list(ref)
        rouge_total += max(rouge_l(pred, r) for r in refs)
        meteor_total += max(meteor(pred, r) for r in refs)
    n = len(predictions)
    return ScoreReport(
        bleu1=b1, bleu2=b2, bleu3=b3, bleu4=b4,
        meteor=meteor_total / n, rouge_l=rouge_total / n,
        prediction_count=n,
    )
