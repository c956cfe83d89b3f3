"""CPTP maps as symbol-labeled Kraus families.

A channel is stored as an ordered mapping symbol -> list of Kraus operators;
summing every group gives the full trace-preserving map, while each group is
the sub-channel realized when its symbol is observed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import (
    as_matrix,
    complete_isometry_to_unitary,
    dagger,
    eig_hermitian,
    matrix_from_json,
    matrix_to_json,
    spectral_norm,
)

CPTP_TOL = 1e-9


@dataclass
class KrausChannel:
    """Kraus operators grouped per observable symbol, all N x N."""

    dim: int
    groups: dict[str, list[np.ndarray]] = field(default_factory=dict)

    def __post_init__(self):
        self.groups = {
            str(sym): [as_matrix(k) for k in ops] for sym, ops in self.groups.items()
        }
        for sym, ops in self.groups.items():
            for k in ops:
                if k.shape != (self.dim, self.dim):
                    raise ValueError(
                        f"Kraus operator for symbol {sym!r} is {k.shape}, "
                        f"expected ({self.dim}, {self.dim})"
                    )

    @property
    def symbols(self) -> list[str]:
        return list(self.groups)

    def operators(self) -> list[np.ndarray]:
        """All Kraus operators flattened in group order."""
        return [k for ops in self.groups.values() for k in ops]

    def completeness_defect(self) -> float:
        s = sum((dagger(k) @ k for k in self.operators()),
                start=np.zeros((self.dim, self.dim), dtype=np.complex128))
        return float(np.abs(s - np.eye(self.dim)).max())


@dataclass
class CptpReport:
    complete: bool
    max_violation: float


def validate_cptp(ch: KrausChannel, tol: float = CPTP_TOL) -> CptpReport:
    """Check sum K†K == I within tol; complete positivity is automatic here."""
    v = ch.completeness_defect()
    return CptpReport(complete=v <= tol, max_violation=v)


def apply(ch: KrausChannel, rho: np.ndarray) -> np.ndarray:
    """Full channel action sum_K K rho K†."""
    rho = as_matrix(rho)
    if rho.shape != (ch.dim, ch.dim):
        raise ValueError(f"state dim {rho.shape} does not match channel dim {ch.dim}")
    out = np.zeros_like(rho)
    for k in ch.operators():
        out += k @ rho @ dagger(k)
    return out


def apply_symbol(ch: KrausChannel, rho: np.ndarray, a: str) -> np.ndarray:
    """Unnormalized post-state for symbol a: sum over that group only."""
    if a not in ch.groups:
        raise KeyError(f"unknown symbol {a!r}")
    out = np.zeros((ch.dim, ch.dim), dtype=np.complex128)
    for k in ch.groups[a]:
        out += k @ rho @ dagger(k)
    return out


def symbol_probability(ch: KrausChannel, rho: np.ndarray, a: str) -> float:
    p = float(np.trace(apply_symbol(ch, rho, a)).real)
    return min(max(p, 0.0), 1.0)


def choi(ch: KrausChannel) -> np.ndarray:
    """Choi matrix sum_ij |i><j| (x) T(|i><j|), an N^2 x N^2 PSD operator."""
    n = ch.dim
    j = np.zeros((n * n, n * n), dtype=np.complex128)
    for k in ch.operators():
        # vec over the (input basis) index: column i holds K|i> blocks
        v = np.zeros(n * n, dtype=np.complex128)
        for i in range(n):
            v[i * n : (i + 1) * n] = k[:, i]
        j += np.outer(v, v.conj())
    return j


def kraus_rank(ch: KrausChannel, rel_tol: float = 1e-7) -> int:
    """Rank of the Choi matrix = minimal number of Kraus operators."""
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")
    w, _ = eig_hermitian(choi(ch))
    top = max(w[0], 0.0)
    if top == 0.0:
        return 0
    return int(np.count_nonzero(w > rel_tol * top))


def kraus_from_unitary(
    u: np.ndarray, dim_s: int, dim_e: int, e0: int = 0
) -> list[np.ndarray]:
    """Slice K_e[s, s'] = U[s*dim_e + e, s'*dim_e + e0] for every emission e."""
    u = as_matrix(u)
    if u.shape != (dim_s * dim_e, dim_s * dim_e):
        raise ValueError("unitary dim does not equal dim_s * dim_e")
    if not 0 <= e0 < dim_e:
        raise ValueError("e0 out of range")
    u4 = u.reshape(dim_s, dim_e, dim_s, dim_e)
    return [np.ascontiguousarray(u4[:, e, :, e0]) for e in range(dim_e)]


def stinespring_dilate(ch: KrausChannel, dim_e: int, e0: int = 0) -> np.ndarray:
    """Dilate to a unitary on H_S (x) H_E with one emission index per Kraus op.

    The isometry sends |v> to sum_k K_k|v> (x) |e_k>; Gram-Schmidt completes it
    to a unitary. Extracting Kraus operators back with ``kraus_from_unitary``
    recovers the original family (zero-padded up to dim_e).
    """
    ops = ch.operators()
    if dim_e < len(ops):
        raise ValueError(
            f"dim_e={dim_e} too small for {len(ops)} Kraus operators"
        )
    rep = validate_cptp(ch)
    if not rep.complete:
        raise ValueError(
            f"channel is not trace preserving (violation {rep.max_violation:.3g})"
        )
    n = ch.dim
    v = np.zeros((n * dim_e, n), dtype=np.complex128)
    for e, k in enumerate(ops):
        v[e::dim_e, :] = k  # rows (s*dim_e + e) for all s
    return complete_isometry_to_unitary(v, e0=e0)


@dataclass
class SteadyStateInfo:
    rho: np.ndarray
    residual: float
    multiplicity: int
    degenerate: bool


def transfer_matrix(ch: KrausChannel) -> np.ndarray:
    """N^2 x N^2 matrix acting on row-major vec(rho): sum_K K (x) conj(K)."""
    n = ch.dim
    t = np.zeros((n * n, n * n), dtype=np.complex128)
    for k in ch.operators():
        t += np.kron(k, k.conj())
    return t


def steady_state_info(ch: KrausChannel, tol_eig: float = 1e-6) -> SteadyStateInfo:
    """Fixed point rho* = T(rho*) via the transfer-matrix eigenproblem.

    The eigenvector of eigenvalue closest to 1 is reshaped, hermitized and
    trace-normalized; degenerate channels (eigenvalue-1 multiplicity > 1) are
    flagged and any valid fixed point is returned.
    """
    n = ch.dim
    t = transfer_matrix(ch)
    w, vecs = np.linalg.eig(t)
    order = np.argsort(np.abs(w - 1.0))
    close = [i for i in order if abs(w[i] - 1.0) <= tol_eig]
    if not close:
        raise ValueError("no transfer-matrix eigenvalue within 1e-6 of 1")
    multiplicity = len(close)

    candidates = []
    for i in close:
        r = vecs[:, i].reshape(n, n)
        candidates.append((r + dagger(r)) / 2)
        candidates.append(1j * (r - dagger(r)) / 2)
    if multiplicity > 1:
        # degenerate fixed space: numpy may hand back indefinite mixtures, so
        # also try the spectral projection of I/N onto the eigenvalue-1 space
        # (the long-run average of the channel applied to I/N), which is PSD
        try:
            sel = (np.abs(w - 1.0) <= tol_eig).astype(float)
            proj = vecs @ (sel[:, None] * np.linalg.inv(vecs))
            candidates.append((proj @ (np.eye(n).ravel() / n)).reshape(n, n))
        except np.linalg.LinAlgError:
            pass
    for cand in candidates:
        cand = (cand + dagger(cand)) / 2
        tr = np.trace(cand).real
        if abs(tr) < 1e-9:
            continue
        rho = cand / tr
        if np.linalg.eigvalsh(rho).min() < -1e-8:
            continue
        residual = spectral_norm(apply(ch, rho) - rho)
        if residual <= 1e-8:
            return SteadyStateInfo(
                rho=rho,
                residual=residual,
                multiplicity=multiplicity,
                degenerate=multiplicity > 1,
            )
    raise ValueError("transfer matrix has eigenvalue 1 but no valid fixed point found")


def steady_state(ch: KrausChannel) -> np.ndarray:
    return steady_state_info(ch).rho


def random_channel(
    dim: int, n_kraus: int, rng: np.random.Generator, n_symbols: int = 1
) -> KrausChannel:
    """Random CPTP channel: Gaussian blocks normalized by the inverse sqrt of
    their completeness sum, split into n_symbols consecutive groups."""
    if n_kraus < n_symbols:
        raise ValueError("need at least one Kraus operator per symbol")
    blocks = [
        rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        for _ in range(n_kraus)
    ]
    s = sum(dagger(b) @ b for b in blocks)
    w, v = np.linalg.eigh(s)
    s_inv_sqrt = v @ np.diag(1.0 / np.sqrt(w)) @ dagger(v)
    ops = [b @ s_inv_sqrt for b in blocks]
    groups: dict[str, list[np.ndarray]] = {str(a): [] for a in range(n_symbols)}
    for i, k in enumerate(ops):
        groups[str(min(i * n_symbols // n_kraus, n_symbols - 1))].append(k)
    return KrausChannel(dim=dim, groups=groups)


def channel_to_json(ch: KrausChannel) -> dict:
    return {
        "dim": ch.dim,
        "groups": {sym: [matrix_to_json(k) for k in ops] for sym, ops in ch.groups.items()},
    }


def channel_from_json(d: dict) -> KrausChannel:
    return KrausChannel(
        dim=int(d["dim"]),
        groups={sym: [matrix_from_json(k) for k in ops] for sym, ops in d["groups"].items()},
    )
