"""Symbol sequences, per-length distribution tables, Hankel matrices and
divergence measures between stochastic process languages.

Sequences are tuples of alphabet indices; rendering to/from strings uses the
alphabet labels (single-character labels assumed for file round trips).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Iterable

import numpy as np

from .linalg import numerical_rank, next_power_of_two

Sequence = tuple[int, ...]

HANKEL_MAX_SIDE = 512


@dataclass
class DistributionTable:
    """Probabilities of all observed sequences of one fixed length."""

    t: int
    probs: dict[Sequence, float] = field(default_factory=dict)

    def prob(self, seq: Sequence) -> float:
        return self.probs.get(tuple(seq), 0.0)

    def total(self) -> float:
        return math.fsum(self.probs.values())

    def items(self):
        return self.probs.items()

    def __len__(self):
        return len(self.probs)


@dataclass
class HankelMatrix:
    prefixes: list[Sequence]
    suffixes: list[Sequence]
    values: np.ndarray


def sequences_of_length(m: int, t: int) -> list[Sequence]:
    """All length-t sequences over an m-symbol alphabet in lexicographic order."""
    return [tuple(s) for s in product(range(m), repeat=t)]


def enumerate_sequences(m: int, max_len: int) -> list[Sequence]:
    """Sequences of length 0..max_len, ordered by length then lexicographically."""
    out: list[Sequence] = []
    for t in range(max_len + 1):
        out.extend(sequences_of_length(m, t))
    return out


def render_sequence(seq: Sequence, alphabet: Iterable[str]) -> str:
    labels = list(alphabet)
    return "".join(labels[i] for i in seq)


def parse_sequence(text: str, alphabet: Iterable[str]) -> Sequence:
    index = {label: i for i, label in enumerate(alphabet)}
    try:
        return tuple(index[ch] for ch in text)
    except KeyError as exc:
        raise ValueError(f"symbol {exc.args[0]!r} not in alphabet") from None


def subsequence_sample(corpus: list[Sequence], t: int) -> list[Sequence]:
    """Every length-t contiguous window of every corpus sequence, with
    multiplicity."""
    if t < 1:
        raise ValueError("window length must be >= 1")
    windows: list[Sequence] = []
    for seq in corpus:
        for i in range(len(seq) - t + 1):
            windows.append(tuple(seq[i : i + t]))
    return windows


def empirical_estimate(windows: list[Sequence], t: int) -> DistributionTable:
    """Empirical frequencies of the windows; counts are exact integers."""
    if not windows:
        raise ValueError("cannot estimate a distribution from an empty sample")
    counts: dict[Sequence, int] = {}
    for w in windows:
        if len(w) != t:
            raise ValueError(f"window {w} does not have length {t}")
        counts[w] = counts.get(w, 0) + 1
    n = len(windows)
    return DistributionTable(t=t, probs={s: c / n for s, c in counts.items()})


def hankel(
    f: Callable[[Sequence], float],
    max_prefix_len: int,
    max_suffix_len: int,
    n_symbols: int,
) -> HankelMatrix:
    """Prefix x suffix array H[p, s] = f(ps), axes ordered length-then-lex."""
    prefixes = enumerate_sequences(n_symbols, max_prefix_len)
    suffixes = enumerate_sequences(n_symbols, max_suffix_len)
    if len(prefixes) > HANKEL_MAX_SIDE or len(suffixes) > HANKEL_MAX_SIDE:
        raise ValueError(
            f"Hankel budget exceeded: {len(prefixes)} x {len(suffixes)} "
            f"(limit {HANKEL_MAX_SIDE} per side)"
        )
    values = np.empty((len(prefixes), len(suffixes)))
    for i, p in enumerate(prefixes):
        for j, s in enumerate(suffixes):
            values[i, j] = f(p + s)
    return HankelMatrix(prefixes=prefixes, suffixes=suffixes, values=values)


def hankel_from_tables(tables: dict[int, DistributionTable],
                       max_prefix_len: int, max_suffix_len: int,
                       n_symbols: int) -> HankelMatrix:
    """Hankel matrix read off a finite set of per-length tables (f(eps) = 1)."""

    def f(seq: Sequence) -> float:
        if len(seq) == 0:
            return 1.0
        table = tables.get(len(seq))
        return table.prob(seq) if table is not None else 0.0

    max_needed = max_prefix_len + max_suffix_len
    missing = [t for t in range(1, max_needed + 1) if t not in tables]
    if missing:
        raise ValueError(f"tables missing for lengths {missing}")
    return hankel(f, max_prefix_len, max_suffix_len, n_symbols)


@dataclass
class OrderEstimate:
    rank: int
    classical_order: int
    quantum_dim: int


def order_estimate(h: HankelMatrix, rel_tol: float = 1e-7) -> OrderEstimate:
    """Hankel rank, the implied minimal classical order, and the qubit-ready
    quantum dimension ceil(sqrt(rank)) rounded up to a power of two."""
    r = numerical_rank(h.values.astype(np.complex128), rel_tol)
    qdim = next_power_of_two(math.ceil(math.sqrt(r))) if r > 0 else 1
    return OrderEstimate(rank=r, classical_order=r, quantum_dim=qdim)


def delta(p_l: float, p_q: float) -> float:
    """Pointwise probability divergence |pL - pQ|."""
    return abs(p_l - p_q)


def divergence_max(d_l: DistributionTable, d_q: DistributionTable) -> float:
    """Max over the union of supports; missing keys read as 0."""
    if d_l.t != d_q.t:
        raise ValueError("tables must cover the same sequence length")
    keys = set(d_l.probs) | set(d_q.probs)
    if not keys:
        return 0.0
    return max(delta(d_l.prob(k), d_q.prob(k)) for k in keys)


def divergence_avg(
    target: list[DistributionTable], hyp: list[DistributionTable]
) -> float:
    """Mean of the per-length max divergences over aligned table lists."""
    if len(target) != len(hyp):
        raise ValueError("table lists must align per length")
    if not target:
        return 0.0
    return math.fsum(divergence_max(a, b) for a, b in zip(target, hyp)) / len(target)


def kl_divergence(
    d_l: DistributionTable, d_q: DistributionTable, epsilon: float = 1e-12
) -> float:
    """Relative entropy sum p log(p/q), hypothesis probabilities floored at
    epsilon so zero-support sequences stay finite."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    acc = 0.0
    for seq, p in d_l.items():
        if p <= 0.0:
            continue
        q = max(d_q.prob(seq), epsilon)
        acc += p * math.log(p / q)
    return max(acc, 0.0)


def total_variation(d_l: DistributionTable, d_q: DistributionTable) -> float:
    keys = set(d_l.probs) | set(d_q.probs)
    return math.fsum(abs(d_l.prob(k) - d_q.prob(k)) for k in keys)


def write_tables_csv(path, tables: Iterable[DistributionTable], alphabet) -> None:
    """CSV lines `sequence,probability` grouped by length (lex within length)."""
    with open(path, "w") as fh:
        fh.write("sequence,probability\n")
        for table in tables:
            for seq in sorted(table.probs):
                fh.write(f"{render_sequence(seq, alphabet)},{table.probs[seq]:.12g}\n")


def read_tables_csv(path, alphabet=None):
    """Read `sequence,probability` lines into per-length tables.

    Returns (alphabet, {length: DistributionTable}). When no alphabet is given
    it is inferred from the symbols present, sorted by label.
    """
    rows: list[tuple[str, float]] = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.lower().startswith("sequence,"):
                continue
            text, _, prob = line.rpartition(",")
            rows.append((text, float(prob)))
    if alphabet is None:
        symbols = sorted({ch for text, _ in rows for ch in text})
        alphabet = symbols if symbols else ["0", "1"]
    grouped: dict[int, dict[Sequence, float]] = {}
    for text, prob in rows:
        seq = parse_sequence(text, alphabet)
        grouped.setdefault(len(seq), {})[seq] = prob
    tables = {
        t: DistributionTable(t=t, probs=probs)
        for t, probs in sorted(grouped.items())
        if t > 0
    }
    return list(alphabet), tables


def read_corpus(path, alphabet=None):
    """One observed sequence per line; returns (alphabet, list of sequences)."""
    lines = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                lines.append(line)
    if alphabet is None:
        alphabet = sorted({ch for line in lines for ch in line})
    corpus = [parse_sequence(line, alphabet) for line in lines]
    return list(alphabet), corpus


def tables_from_corpus(corpus: list[Sequence], max_len: int) -> dict[int, DistributionTable]:
    """Sliding-window empirical tables for lengths 1..max_len."""
    out: dict[int, DistributionTable] = {}
    for t in range(1, max_len + 1):
        windows = subsequence_sample(corpus, t)
        if windows:
            out[t] = empirical_estimate(windows, t)
    return out
