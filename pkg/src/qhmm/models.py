"""Quantum hidden Markov models in operator-sum and unitary form.

A Kraus-form model is a symbol-labeled CPTP channel plus an initial density;
a unitary-form model is the dilated 6-tuple (alphabet, state space, emission
space, unitary, outcome partition, initial state) together with the register
designations used when the circuit is stepped: which register is measured
("emission" by default, "system" for the damping-style generator) and whether
the emission register is reset each step ("reset", design a) or carried
("carry", design b).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import channels as ch
from .channels import KrausChannel
from .circuits import Circuit, circuit_from_json, circuit_to_json, unitary_of
from .classical import ClassicalHmm, observable_operators
from .lang import DistributionTable, Sequence
from .linalg import (
    as_matrix,
    check_density,
    dagger,
    ket,
    matrix_from_json,
    matrix_to_json,
    projector,
    tensor_product,
)

TABLE_BUDGET = 4096


@dataclass
class QhmmKraus:
    alphabet: list[str]
    channel: KrausChannel
    rho0: np.ndarray

    def __post_init__(self):
        self.alphabet = [str(a) for a in self.alphabet]
        self.rho0 = check_density(as_matrix(self.rho0))
        if self.rho0.shape[0] != self.channel.dim:
            raise ValueError("rho0 dimension does not match the channel")
        if list(self.channel.groups) != self.alphabet:
            raise ValueError("channel group keys must equal the alphabet")
        rep = ch.validate_cptp(self.channel)
        if not rep.complete:
            raise ValueError(
                f"channel is not trace preserving (violation {rep.max_violation:.3g})"
            )

    @property
    def dim(self) -> int:
        return self.channel.dim


@dataclass
class QhmmUnitary:
    alphabet: list[str]
    dim_s: int
    dim_e: int
    u: object  # np.ndarray or Circuit
    symbol_map: tuple[str, ...]  # measured-register basis index -> symbol
    rho0: np.ndarray  # on the state space
    e0: int = 0
    reset_mode: str = "reset"   # "reset" (design a) | "carry" (design b)
    measured: str = "emission"  # "emission" | "system"

    def __post_init__(self):
        self.alphabet = [str(a) for a in self.alphabet]
        self.symbol_map = tuple(str(s) for s in self.symbol_map)
        self.rho0 = check_density(as_matrix(self.rho0))
        if self.rho0.shape[0] != self.dim_s:
            raise ValueError("rho0 must live on the state space")
        if self.reset_mode not in ("reset", "carry"):
            raise ValueError("reset_mode must be 'reset' or 'carry'")
        if self.measured not in ("emission", "system"):
            raise ValueError("measured must be 'emission' or 'system'")
        if not 0 <= self.e0 < self.dim_e:
            raise ValueError("e0 out of range")
        want = self.dim_e if self.measured == "emission" else self.dim_s
        if len(self.symbol_map) != want:
            raise ValueError(
                f"symbol_map must cover all {want} measured basis states"
            )
        missing = set(self.alphabet) - set(self.symbol_map)
        if missing:
            raise ValueError(f"symbols {sorted(missing)} have empty partitions")
        extra = set(self.symbol_map) - set(self.alphabet)
        if extra:
            raise ValueError(f"symbol_map uses unknown symbols {sorted(extra)}")

    def unitary(self) -> np.ndarray:
        u = unitary_of(self.u)
        if u.shape != (self.dim_s * self.dim_e,) * 2:
            raise ValueError("unitary dimension must be dim_s * dim_e")
        return u


def block_symbol_map(alphabet, dim: int) -> tuple[str, ...]:
    """Default partition: consecutive index blocks, one block per symbol."""
    m = len(alphabet)
    if dim < m:
        raise ValueError("measured register smaller than the alphabet")
    return tuple(str(alphabet[min(i * m // dim, m - 1)]) for i in range(dim))


def to_kraus(q: QhmmUnitary) -> QhmmKraus:
    """Group the extracted Kraus operators by the outcome partition.

    With a measured system register the per-symbol operators are the
    projector-channel compositions P_o K_e, which is the stationary family
    the reset-mode process realizes; design b has no stationary family.
    """
    if q.reset_mode != "reset":
        raise ValueError("design b (carry) has no stationary Kraus family")
    kraus = ch.kraus_from_unitary(q.unitary(), q.dim_s, q.dim_e, q.e0)
    groups: dict[str, list[np.ndarray]] = {a: [] for a in q.alphabet}
    if q.measured == "emission":
        for e, k in enumerate(kraus):
            groups[q.symbol_map[e]].append(k)
    else:
        for o in range(q.dim_s):
            p = projector(o, q.dim_s)
            for k in kraus:
                pk = p @ k
                if np.abs(pk).max() > 1e-15:
                    groups[q.symbol_map[o]].append(pk)
    # an all-zero group still needs one operator to keep the partition intact
    for a, ops in groups.items():
        if not ops:
            ops.append(np.zeros((q.dim_s, q.dim_s), dtype=np.complex128))
    channel = KrausChannel(dim=q.dim_s, groups=groups)
    return QhmmKraus(alphabet=list(q.alphabet), channel=channel, rho0=q.rho0)


def from_kraus(q: QhmmKraus, dim_e: int, e0: int = 0) -> QhmmUnitary:
    """Stinespring dilation with one emission index per Kraus operator;
    emission indices keep the group order, leftovers map to the last symbol."""
    ops = q.channel.operators()
    if dim_e < len(ops):
        raise ValueError(f"dim_e={dim_e} too small for {len(ops)} Kraus operators")
    u = ch.stinespring_dilate(q.channel, dim_e, e0)
    labels: list[str] = []
    for sym, group in q.channel.groups.items():
        labels.extend([sym] * len(group))
    labels.extend([q.alphabet[-1]] * (dim_e - len(labels)))
    return QhmmUnitary(
        alphabet=list(q.alphabet),
        dim_s=q.dim,
        dim_e=dim_e,
        u=u,
        symbol_map=tuple(labels),
        rho0=q.rho0,
        e0=e0,
    )


def quantize_classical(h: ClassicalHmm) -> QhmmKraus:
    """Diagonal embedding of a classical model: one rank-one Kraus operator
    sqrt(O_a[i, j]) |i><j| per positive observable-operator entry, initial
    state diag(x0)."""
    n = h.n
    obs = observable_operators(h)
    groups: dict[str, list[np.ndarray]] = {}
    for a in h.alphabet:
        ops = []
        o = obs[a]
        for i in range(n):
            for j in range(n):
                if o[i, j] > 0.0:
                    k = np.zeros((n, n), dtype=np.complex128)
                    k[i, j] = np.sqrt(o[i, j])
                    ops.append(k)
        if not ops:
            ops.append(np.zeros((n, n), dtype=np.complex128))
        groups[a] = ops
    return QhmmKraus(
        alphabet=list(h.alphabet),
        channel=KrausChannel(dim=n, groups=groups),
        rho0=np.diag(h.x0).astype(np.complex128),
    )


def sequence_probability(q: QhmmKraus, seq: Sequence) -> float:
    """tr(T_at ∘ ... ∘ T_a1 (rho0)); the empty sequence has probability 1."""
    rho = q.rho0
    for a in seq:
        if not 0 <= a < len(q.alphabet):
            raise ValueError(f"symbol index {a} out of range")
        rho = ch.apply_symbol(q.channel, rho, q.alphabet[a])
    p = float(np.trace(rho).real)
    return min(max(p, 0.0), 1.0)


def _kraus_stacks(q: QhmmKraus) -> list[np.ndarray]:
    return [np.stack(q.channel.groups[a]) for a in q.alphabet]


def distribution_tables(
    q: QhmmKraus, lengths, prune: float = 0.0
) -> dict[int, DistributionTable]:
    """Exact tables for several lengths from one branch recursion.

    Branch states are unnormalized post-sequence densities, advanced level by
    level so no Kraus chain is ever re-multiplied. Branches below ``prune``
    mass stop recursing; their descendants read as probability zero.
    """
    lengths = sorted(set(int(t) for t in lengths))
    if not lengths:
        return {}
    m = len(q.alphabet)
    if m ** max(lengths) > TABLE_BUDGET:
        raise ValueError(
            f"table of size {m}^{max(lengths)} exceeds the supported budget"
        )
    stacks = _kraus_stacks(q)
    out: dict[int, DistributionTable] = {}
    seqs: list[Sequence] = [()]
    states = q.rho0[None, :, :]
    for t in range(1, max(lengths) + 1):
        per_symbol = [
            np.einsum("kij,bjl,kml->bim", stacks[a], states, stacks[a].conj())
            for a in range(m)
        ]
        states = np.stack(per_symbol, axis=1).reshape(-1, q.dim, q.dim)
        seqs = [s + (a,) for s in seqs for a in range(m)]
        probs = np.einsum("bii->b", states).real
        if t in lengths:
            out[t] = DistributionTable(
                t=t, probs={s: max(float(p), 0.0) for s, p in zip(seqs, probs)}
            )
        if prune > 0.0:
            keep = probs > prune
            if not keep.all():
                states = states[keep]
                seqs = [s for s, k in zip(seqs, keep) if k]
    return out


def distribution(q: QhmmKraus, t: int) -> DistributionTable:
    if t == 0:
        return DistributionTable(t=0, probs={(): 1.0})
    return distribution_tables(q, [t])[t]


def steady_state(q: QhmmKraus) -> np.ndarray:
    """Fixed point of the symbol-summed channel."""
    return ch.steady_state(q.channel)


def simulate(
    q: QhmmUnitary, t: int, shots: int, seed: int
) -> list[Sequence]:
    """Trajectory sampling: per shot start from rho0 (x) |e0><e0|, then per
    step apply U, projectively measure the designated register, emit the
    outcome's symbol and (in reset mode) reset the emission register."""
    u = q.unitary()
    udag = dagger(u)
    dim = q.dim_s * q.dim_e
    sym_index = {a: i for i, a in enumerate(q.alphabet)}
    outcome_symbol = [sym_index[s] for s in q.symbol_map]
    # composite index -> measured-register outcome, plus the block masks of
    # the projective collapse (measurement in the computational basis keeps
    # exactly the rows/columns of the observed block)
    idx = np.arange(dim)
    outcome_of = idx % q.dim_e if q.measured == "emission" else idx // q.dim_e
    n_outcomes = q.dim_e if q.measured == "emission" else q.dim_s
    masks = [np.outer(outcome_of == o, outcome_of == o) for o in range(n_outcomes)]
    e_ket = np.outer(ket(q.e0, q.dim_e), ket(q.e0, q.dim_e).conj())
    rho_init = tensor_product(q.rho0, e_ket)

    # one uniform draw per (shot, step), all derived from the master seed
    draws = np.random.default_rng(seed).random((shots, t))
    do_reset = q.reset_mode == "reset"
    out: list[Sequence] = []
    for shot in range(shots):
        rho = rho_init
        seq = []
        for step in range(t):
            rho = u @ rho @ udag
            probs = np.bincount(outcome_of, weights=np.diagonal(rho).real,
                                minlength=n_outcomes)
            probs = np.clip(probs, 0.0, None)
            cdf = np.cumsum(probs / probs.sum())
            o = min(int(np.searchsorted(cdf, draws[shot, step])),
                    n_outcomes - 1)
            seq.append(outcome_symbol[o])
            rho = rho * masks[o]
            rho = rho / np.trace(rho).real
            if do_reset:
                rho_s = rho.reshape(q.dim_s, q.dim_e, q.dim_s,
                                    q.dim_e)
                rho_s = np.einsum("sete->st", rho_s)
                rho = np.zeros((dim, dim), dtype=np.complex128)
                rho[q.e0::q.dim_e, q.e0::q.dim_e] = rho_s
        out.append(tuple(seq))
    return out


def empirical_table(samples: list[Sequence], t: int) -> DistributionTable:
    counts: dict[Sequence, int] = {}
    for s in samples:
        counts[s] = counts.get(s, 0) + 1
    n = len(samples)
    return DistributionTable(t=t, probs={s: c / n for s, c in counts.items()})


# --- fixtures -----------------------------------------------------------------

def monras_qhmm() -> QhmmKraus:
    """One-qubit four-symbol generator built from scaled projectors onto
    |0>, |1>, |+>, |->, started in the maximally mixed state."""
    s = 1.0 / np.sqrt(2.0)
    plus = np.array([s, s], dtype=np.complex128)
    minus = np.array([s, -s], dtype=np.complex128)
    ops = {
        "0": s * projector(0, 2),
        "1": s * projector(1, 2),
        "2": s * np.outer(plus, plus.conj()),
        "3": s * np.outer(minus, minus.conj()),
    }
    groups = {a: [k] for a, k in ops.items()}
    return QhmmKraus(
        alphabet=["0", "1", "2", "3"],
        channel=KrausChannel(dim=2, groups=groups),
        rho0=np.eye(2, dtype=np.complex128) / 2,
    )


def amplitude_damping_kraus_pair(gamma: float) -> list[np.ndarray]:
    """State-first damping operators K0 = diag(1, sqrt(1-gamma)),
    K1 = sqrt(gamma)|0><1|."""
    k0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - gamma)]], dtype=np.complex128)
    k1 = np.array([[0.0, np.sqrt(gamma)], [0.0, 0.0]], dtype=np.complex128)
    return [k0, k1]


def amplitude_damping_channel(gamma: float) -> KrausChannel:
    k0, k1 = amplitude_damping_kraus_pair(gamma)
    return KrausChannel(dim=2, groups={"0": [k0], "1": [k1]})


def amplitude_damping_model(theta: float) -> QhmmUnitary:
    """The two-qubit damping generator in unitary form: system qubit prepared
    in |+>, measured each step; emission qubit reset each step."""
    from .circuits import amplitude_damping_circuit, compile_circuit

    design = amplitude_damping_circuit(theta)
    plus = np.full((2, 2), 0.5, dtype=np.complex128)
    return QhmmUnitary(
        alphabet=["0", "1"],
        dim_s=2,
        dim_e=2,
        u=compile_circuit(design.step),
        symbol_map=("0", "1"),
        rho0=plus,
        e0=0,
        reset_mode="reset",
        measured="system",
    )


def amplitude_damping_qhmm(theta: float) -> QhmmKraus:
    """Kraus form of the damping generator (projector-composed family)."""
    return to_kraus(amplitude_damping_model(theta))


# --- serialization -------------------------------------------------------------

def qhmm_to_json(q) -> dict:
    if isinstance(q, QhmmKraus):
        return {
            "type": "kraus",
            "alphabet": list(q.alphabet),
            "channel": ch.channel_to_json(q.channel),
            "rho0": matrix_to_json(q.rho0),
        }
    if isinstance(q, QhmmUnitary):
        d = {
            "type": "unitary",
            "alphabet": list(q.alphabet),
            "dim_s": q.dim_s,
            "dim_e": q.dim_e,
            "symbol_map": list(q.symbol_map),
            "rho0": matrix_to_json(q.rho0),
            "e0": q.e0,
            "reset_mode": q.reset_mode,
            "measured": q.measured,
        }
        if isinstance(q.u, Circuit):
            d["circuit"] = circuit_to_json(q.u)
        else:
            d["unitary"] = matrix_to_json(as_matrix(q.u))
        return d
    raise TypeError(f"not a QHMM: {type(q)}")


def qhmm_from_json(d: dict):
    kind = d.get("type")
    if kind == "kraus":
        return QhmmKraus(
            alphabet=list(d["alphabet"]),
            channel=ch.channel_from_json(d["channel"]),
            rho0=matrix_from_json(d["rho0"]),
        )
    if kind == "unitary":
        u = circuit_from_json(d["circuit"]) if "circuit" in d else matrix_from_json(d["unitary"])
        return QhmmUnitary(
            alphabet=list(d["alphabet"]),
            dim_s=int(d["dim_s"]),
            dim_e=int(d["dim_e"]),
            u=u,
            symbol_map=tuple(d["symbol_map"]),
            rho0=matrix_from_json(d["rho0"]),
            e0=int(d.get("e0", 0)),
            reset_mode=d.get("reset_mode", "reset"),
            measured=d.get("measured", "emission"),
        )
    raise ValueError(f"unknown QHMM type {kind!r}")
