"""Behavior modeling over session sequences.

Two tools borrowed from text statistics, applied to the symbol streams:

* add-k smoothed n-gram models, with cross entropy and perplexity to
  measure how much of a user's next action is predicted by recent context;
* collocation extraction over adjacent event bigrams, scored by pointwise
  mutual information (base 2) and the G2 log-likelihood ratio.

A model of order n conditions each symbol on the previous n-1; sessions
are padded with n-1 start symbols and closed with one end symbol, so
session length itself is modeled. Start symbols are never predicted.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Union

from .dictionary import Dictionary, decode_symbol
from .errors import DictionaryMismatch, EmptyCorpus
from .sessions import SessionRecord

START_SYMBOL = -1
END_SYMBOL = -2

DEFAULT_SMOOTHING_K = 0.01

Sequences = Iterable[Union[SessionRecord, str]]


def _as_symbols(item: SessionRecord | str) -> list[int]:
    sequence = getattr(item, "session_sequence", item)
    return [ord(ch) for ch in sequence]


class NgramModel:
    """Add-k smoothed conditional distributions over event symbols.

    P(w|c) = (count(c,w) + k) / (count(c) + k * |vocab|), where the vocab
    is every symbol observed in training plus the end symbol.
    """

    def __init__(self, n: int, k: float,
                 dictionary_key: str | None = None):
        if n < 1:
            raise ValueError(f"order must be >= 1, got {n}")
        if k <= 0:
            raise ValueError(f"smoothing constant must be > 0, got {k}")
        self.n = n
        self.k = k
        self.dictionary_key = dictionary_key
        self.vocab: frozenset[int] = frozenset()
        self.counts: dict[tuple[int, ...], Counter] = {}
        self.context_totals: dict[tuple[int, ...], int] = {}
        self.total_tokens = 0

    def _count(self, symbols: list[int]) -> None:
        n = self.n
        padded = [START_SYMBOL] * (n - 1) + symbols + [END_SYMBOL]
        for i in range(n - 1, len(padded)):
            context = tuple(padded[i - n + 1:i])
            outcome = padded[i]
            bucket = self.counts.get(context)
            if bucket is None:
                bucket = self.counts[context] = Counter()
            bucket[outcome] += 1
            self.context_totals[context] = self.context_totals.get(context, 0) + 1
            self.total_tokens += 1

    def prob(self, symbol: int, context: tuple[int, ...]) -> float:
        """Smoothed P(symbol | context); defined for unseen symbols too."""
        bucket = self.counts.get(context)
        seen = bucket[symbol] if bucket else 0
        total = self.context_totals.get(context, 0)
        return (seen + self.k) / (total + self.k * len(self.vocab))

    def log2_prob(self, symbol: int, context: tuple[int, ...]) -> float:
        return math.log2(self.prob(symbol, context))

    def iter_predictions(self, symbols: list[int]) -> Iterator[tuple[tuple[int, ...], int]]:
        """(context, outcome) pairs for one padded sequence, end included."""
        n = self.n
        padded = [START_SYMBOL] * (n - 1) + symbols + [END_SYMBOL]
        for i in range(n - 1, len(padded)):
            yield tuple(padded[i - n + 1:i]), padded[i]


def train_ngram(
    sequences: Sequences,
    n: int,
    k: float = DEFAULT_SMOOTHING_K,
    dictionary_key: str | None = None,
) -> NgramModel:
    """Train an order-n add-k model on session sequences.

    Raises EmptyCorpus if no sequences are supplied. Training is invariant
    to session order.
    """
    model = NgramModel(n=n, k=k, dictionary_key=dictionary_key)
    vocab: set[int] = {END_SYMBOL}
    sessions_seen = 0
    for item in sequences:
        symbols = _as_symbols(item)
        sessions_seen += 1
        vocab.update(symbols)
        model._count(symbols)
    if sessions_seen == 0:
        raise EmptyCorpus("cannot train a model on an empty corpus")
    model.vocab = frozenset(vocab)
    return model


def cross_entropy(
    model: NgramModel,
    sequences: Sequences,
    sequences_key: str | None = None,
) -> float:
    """Bits per predicted token (end symbols included) of the corpus
    under the model. Unseen symbols and contexts get their smoothed mass."""
    if (sequences_key is not None and model.dictionary_key is not None
            and sequences_key != model.dictionary_key):
        raise DictionaryMismatch(
            f"model was trained against dictionary {model.dictionary_key!r}, "
            f"sequences use {sequences_key!r}"
        )
    total_bits = 0.0
    tokens = 0
    for item in sequences:
        for context, outcome in model.iter_predictions(_as_symbols(item)):
            total_bits -= model.log2_prob(outcome, context)
            tokens += 1
    if tokens == 0:
        raise EmptyCorpus("cannot evaluate on an empty corpus")
    return total_bits / tokens


def perplexity(
    model: NgramModel,
    sequences: Sequences,
    sequences_key: str | None = None,
) -> float:
    """2 raised to the corpus cross entropy."""
    return 2.0 ** cross_entropy(model, sequences, sequences_key)


def save_model(model: NgramModel, path: Path | str) -> None:
    """Export n, k, vocab and raw context counts (counts, not
    probabilities, so smoothing stays reproducible)."""
    doc = {
        "n": model.n,
        "k": model.k,
        "dictionary_key": model.dictionary_key,
        "vocab": sorted(model.vocab),
        "contexts": [
            {
                "context": list(context),
                "counts": sorted(model.counts[context].items()),
            }
            for context in sorted(model.counts)
        ],
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(doc, handle, ensure_ascii=False)
        handle.write("\n")


def load_model(path: Path | str) -> NgramModel:
    with open(path, "r", encoding="utf-8") as handle:
        doc = json.load(handle)
    model = NgramModel(n=doc["n"], k=doc["k"],
                       dictionary_key=doc.get("dictionary_key"))
    model.vocab = frozenset(doc["vocab"])
    for item in doc["contexts"]:
        context = tuple(item["context"])
        bucket = Counter(dict((s, c) for s, c in item["counts"]))
        model.counts[context] = bucket
        total = sum(bucket.values())
        model.context_totals[context] = total
        model.total_tokens += total
    return model


@dataclass(frozen=True)
class CollocationStat:
    """Association scores for one adjacent event bigram (x, y).

    ``first_count`` is how often x opens a bigram, ``second_count`` how
    often y closes one, out of ``total`` bigrams. PMI is in bits; g2 is
    the log-likelihood ratio statistic of the 2x2 contingency table.
    """

    x: int
    y: int
    pair_count: int
    first_count: int
    second_count: int
    total: int
    pmi: float
    g2: float


def g2_statistic(o11: int, o12: int, o21: int, o22: int) -> float:
    """2 * sum O*ln(O/E) over the 2x2 table, with 0*ln(0) = 0."""
    n = o11 + o12 + o21 + o22
    row1, row2 = o11 + o12, o21 + o22
    col1, col2 = o11 + o21, o12 + o22
    total = 0.0
    for observed, expected in (
        (o11, row1 * col1 / n),
        (o12, row1 * col2 / n),
        (o21, row2 * col1 / n),
        (o22, row2 * col2 / n),
    ):
        if observed > 0:
            total += observed * math.log(observed / expected)
    return 2.0 * total


def extract_collocations(
    sequences: Sequences,
    min_count: int = 1,
    measure: str = "pmi",
    window: int = 2,
) -> list[CollocationStat]:
    """Score bigrams within sessions (never across boundaries).

    The default ``window`` of 2 counts adjacent pairs only; a wider window
    additionally pairs each symbol with the following ``window - 1``
    symbols. Bigrams below ``min_count`` are dropped. Results are sorted
    descending by the chosen measure, ties by (x, y) symbol order.
    """
    if min_count < 1:
        raise ValueError(f"min_count must be >= 1, got {min_count}")
    if measure not in ("pmi", "g2"):
        raise ValueError(f"unknown collocation measure {measure!r}")
    if window < 2:
        raise ValueError(f"window must be >= 2, got {window}")
    pair_counts: Counter = Counter()
    first_counts: Counter = Counter()
    second_counts: Counter = Counter()
    total = 0
    for item in sequences:
        symbols = _as_symbols(item)
        for i, x in enumerate(symbols):
            for y in symbols[i + 1:i + window]:
                pair_counts[(x, y)] += 1
                first_counts[x] += 1
                second_counts[y] += 1
                total += 1
    stats = []
    for (x, y), c_xy in pair_counts.items():
        if c_xy < min_count:
            continue
        c_x = first_counts[x]
        c_y = second_counts[y]
        stats.append(CollocationStat(
            x=x,
            y=y,
            pair_count=c_xy,
            first_count=c_x,
            second_count=c_y,
            total=total,
            pmi=math.log2(total * c_xy / (c_x * c_y)),
            g2=g2_statistic(c_xy, c_x - c_xy, c_y - c_xy,
                            total - c_x - c_y + c_xy),
        ))
    stats.sort(key=lambda s: (-getattr(s, measure), s.x, s.y))
    return stats


def format_collocation_report(
    stats: Iterable[CollocationStat],
    dictionary: Dictionary,
) -> Iterator[str]:
    """Comma-separated report lines: x_name, y_name, pair count, pmi, g2."""
    for stat in stats:
        yield (f"{decode_symbol(dictionary, stat.x)},"
               f"{decode_symbol(dictionary, stat.y)},"
               f"{stat.pair_count},{stat.pmi:.6f},{stat.g2:.6f}")
