"""Classical hidden Markov models with observable operators.

Conventions: A is column-stochastic with A[to, from]; B[a, i] is the
probability of emitting symbol a from state i (each state's column sums
to 1); x0 is the initial state distribution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lang import DistributionTable, Sequence

STOCHASTIC_TOL = 1e-10


@dataclass
class ClassicalHmm:
    alphabet: list[str]
    A: np.ndarray  # (n, n) column-stochastic transition
    B: np.ndarray  # (m, n) emission, columns sum to 1
    x0: np.ndarray  # (n,) initial distribution

    def __post_init__(self):
        self.alphabet = [str(a) for a in self.alphabet]
        self.A = np.asarray(self.A, dtype=float)
        self.B = np.asarray(self.B, dtype=float)
        self.x0 = np.asarray(self.x0, dtype=float)
        n = self.A.shape[0]
        m = len(self.alphabet)
        if self.A.shape != (n, n):
            raise ValueError("A must be square")
        if self.B.shape != (m, n):
            raise ValueError(f"B must be ({m}, {n})")
        if self.x0.shape != (n,):
            raise ValueError(f"x0 must have length {n}")
        for name, mat in (("A", self.A), ("B", self.B)):
            if mat.min() < 0:
                raise ValueError(f"{name} has negative entries")
            colsums = mat.sum(axis=0)
            if np.abs(colsums - 1.0).max() > STOCHASTIC_TOL:
                raise ValueError(f"columns of {name} must sum to 1")
        if self.x0.min() < 0 or abs(self.x0.sum() - 1.0) > STOCHASTIC_TOL:
            raise ValueError("x0 must be a probability vector")

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return len(self.alphabet)


def observable_operators(h: ClassicalHmm) -> dict[str, np.ndarray]:
    """Per-symbol operators T_a = A diag(B[a, .]); they sum to A."""
    return {a: h.A * h.B[i, :] for i, a in enumerate(h.alphabet)}


def sequence_probability(h: ClassicalHmm, seq: Sequence) -> float:
    """1 T_{a_t} ... T_{a_1} x0; the empty sequence has probability 1."""
    x = h.x0.copy()
    for a in seq:
        if not 0 <= a < h.m:
            raise ValueError(f"symbol index {a} out of range")
        x = h.A @ (h.B[a, :] * x)
    return float(x.sum())


def distribution(h: ClassicalHmm, t: int) -> DistributionTable:
    """Exact table over all m^t sequences, built by branching the state vector."""
    if h.m**t > 4096:
        raise ValueError(f"table of size {h.m}^{t} exceeds the supported budget")
    # states[seq] is the unnormalized filtered distribution after emitting seq
    states: dict[Sequence, np.ndarray] = {(): h.x0.copy()}
    for _ in range(t):
        nxt: dict[Sequence, np.ndarray] = {}
        for seq, x in states.items():
            for a in range(h.m):
                nxt[seq + (a,)] = h.A @ (h.B[a, :] * x)
        states = nxt
    return DistributionTable(t=t, probs={s: float(x.sum()) for s, x in states.items()})


def distribution_tables(h: ClassicalHmm, lengths) -> list[DistributionTable]:
    return [distribution(h, t) for t in lengths]


def steady_state_classical(h: ClassicalHmm) -> np.ndarray:
    """Normalized eigenvector of A with eigenvalue 1."""
    w, v = np.linalg.eig(h.A)
    candidates = np.argsort(np.abs(w - 1.0))
    for i in candidates:
        if abs(w[i] - 1.0) > 1e-6:
            break
        x = v[:, i].real
        if abs(x.sum()) < 1e-12:
            continue
        x = x / x.sum()
        if x.min() >= -1e-12 and np.abs(h.A @ x - x).max() <= 1e-10:
            return np.clip(x, 0.0, None) / np.clip(x, 0.0, None).sum()
    raise ValueError("no stochastic fixed point found for A")


def sample(
    h: ClassicalHmm, t: int, n_seq: int, seed: int
) -> list[Sequence]:
    """Ancestral sampling of n_seq length-t observation sequences."""
    rng = np.random.default_rng(seed)
    out: list[Sequence] = []
    states = np.arange(h.n)
    for _ in range(n_seq):
        x = rng.choice(states, p=h.x0)
        seq = []
        for _ in range(t):
            a = rng.choice(h.m, p=h.B[:, x])
            x = rng.choice(states, p=h.A[:, x])
            seq.append(int(a))
        out.append(tuple(seq))
    return out


def _from_row_tables(alphabet, transition_rows, emission_rows, x0=None) -> ClassicalHmm:
    """Build from row-convention tables: transition rows are FROM-state rows
    and emission rows are per-state symbol distributions."""
    a = np.asarray(transition_rows, dtype=float).T
    b = np.asarray(emission_rows, dtype=float).T
    n = a.shape[0]
    h = ClassicalHmm(alphabet=alphabet, A=a, B=b, x0=np.full(n, 1.0 / n))
    x = steady_state_classical(h) if x0 is None else np.asarray(x0, dtype=float)
    return ClassicalHmm(alphabet=alphabet, A=a, B=b, x0=x)


def market_model(x0=None) -> ClassicalHmm:
    """Four-state price-direction model; x0 defaults to the steady state."""
    transition_rows = [
        [0.50, 0.10, 0.15, 0.25],
        [0.10, 0.50, 0.25, 0.15],
        [0.25, 0.15, 0.50, 0.10],
        [0.15, 0.25, 0.10, 0.50],
    ]
    emission_rows = [
        [0.8, 0.2],
        [0.2, 0.8],
        [0.4, 0.6],
        [0.6, 0.4],
    ]
    return _from_row_tables(["0", "1"], transition_rows, emission_rows, x0)


def gaussian4_model(x0=None) -> ClassicalHmm:
    """Four-state volatility-mixture model with the discretized 4-symbol
    emission table; x0 defaults to the steady state."""
    transition_rows = [
        [0.60, 0.25, 0.05, 0.10],
        [0.05, 0.15, 0.05, 0.75],
        [0.75, 0.05, 0.15, 0.05],
        [0.10, 0.05, 0.65, 0.20],
    ]
    emission_rows = [
        [0.00, 0.50, 0.50, 0.00],
        [0.01, 0.49, 0.49, 0.01],
        [0.13, 0.37, 0.37, 0.13],
        [0.22, 0.28, 0.28, 0.22],
    ]
    return _from_row_tables(["0", "1", "2", "3"], transition_rows, emission_rows, x0)


def fixtures() -> dict[str, ClassicalHmm]:
    return {"market": market_model(), "gaussian4": gaussian4_model()}


def hmm_to_json(h: ClassicalHmm) -> dict:
    return {
        "alphabet": list(h.alphabet),
        "A": h.A.tolist(),
        "B": h.B.tolist(),
        "x0": h.x0.tolist(),
    }


def hmm_from_json(d: dict) -> ClassicalHmm:
    return ClassicalHmm(
        alphabet=list(d["alphabet"]),
        A=np.asarray(d["A"], dtype=float),
        B=np.asarray(d["B"], dtype=float),
        x0=np.asarray(d["x0"], dtype=float),
    )
