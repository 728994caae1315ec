"""Exact probability bookkeeping for cat-diagonal mixtures.

A block of m states is a dense joint distribution over (2^N)^m encoded
labels.  The multilateral XOR permutes that index space, the amplitude
measurement conditions it, and entropies/yields fall out of the conditioned
distribution.  Everything is exact double-precision arithmetic; there is no
sampling in this module.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, DimensionError

ENSEMBLE_ENTRY_CAP = 1 << 24
NORMALIZATION_TOL = 1e-9


@dataclass(frozen=True)
class WernerParams:
    """Mixing weight alpha and fidelity F of the isotropic (Werner-type)
    state alpha|target><target| + (1-alpha)*I/2^N; F = alpha + (1-alpha)/2^N.
    """

    n_parties: int
    fidelity: float
    alpha: float

    @classmethod
    def from_fidelity(cls, n_parties: int, fidelity: float) -> "WernerParams":
        dim = 1 << n_parties
        alpha = (fidelity - 1.0 / dim) / (1.0 - 1.0 / dim)
        if not -1e-12 <= alpha <= 1.0 + 1e-12:
            raise ValueError(
                f"fidelity {fidelity} outside [{1.0 / dim}, 1] for N={n_parties}"
            )
        return cls(n_parties, fidelity, min(max(alpha, 0.0), 1.0))


@dataclass
class SingleDistribution:
    """Probability vector over the 2^N encoded labels of one state."""

    n_parties: int
    probs: np.ndarray

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=float)
        if self.probs.shape != (1 << self.n_parties,):
            raise DimensionError("probability vector length must be 2^N")
        if abs(self.probs.sum() - 1.0) > NORMALIZATION_TOL:
            raise ValueError("probabilities must sum to 1")

    @property
    def fidelity(self) -> float:
        return float(self.probs[0])


@dataclass
class DiagonalEnsemble:
    """Joint distribution over a block of ``n_states`` labels.

    The flat index concatenates encoded labels with state 0 in the most
    significant position.
    """

    n_parties: int
    n_states: int
    probs: np.ndarray

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=float)
        size = (1 << self.n_parties) ** self.n_states
        if self.probs.shape != (size,):
            raise DimensionError("ensemble vector length must be (2^N)^n_states")

    def _shift(self, slot: int) -> int:
        if not 0 <= slot < self.n_states:
            raise IndexError(f"slot {slot} out of range")
        return self.n_parties * (self.n_states - 1 - slot)

    def slot_digits(self, slot: int) -> np.ndarray:
        """Encoded label of ``slot`` for every flat index."""
        mask = (1 << self.n_parties) - 1
        return (np.arange(self.probs.size) >> self._shift(slot)) & mask


def werner_single(n_parties: int, fidelity: float) -> SingleDistribution:
    """Cat-diagonal form of the isotropic state: the target label carries
    the fidelity, every other label (1-F)/(2^N - 1)."""
    WernerParams.from_fidelity(n_parties, fidelity)  # validates the range
    dim = 1 << n_parties
    # Fidelities within validation tolerance of the endpoints may leave
    # negative dust in the off-target entries; snap it to zero.
    probs = np.full(dim, max((1.0 - fidelity) / (dim - 1), 0.0))
    probs[0] = min(fidelity, 1.0)
    return SingleDistribution(n_parties, probs)


def iid_block(
    single: SingleDistribution, n_states: int, cap: int = ENSEMBLE_ENTRY_CAP
) -> DiagonalEnsemble:
    """Product distribution of ``n_states`` independent copies."""
    if n_states < 1:
        raise ValueError("need at least one state")
    size = (1 << single.n_parties) ** n_states
    if size > cap:
        raise CapacityError(f"{size} ensemble entries exceeds the cap {cap}")
    probs = np.array([1.0])
    for _ in range(n_states):
        probs = np.kron(probs, single.probs)
    return DiagonalEnsemble(single.n_parties, n_states, probs)


def shannon_entropy(probs: np.ndarray) -> float:
    """-sum p log2 p in bits, with 0 log 0 = 0.  Input must be normalized."""
    p = np.asarray(probs, dtype=float).ravel()
    if abs(p.sum() - 1.0) > NORMALIZATION_TOL:
        raise ValueError("entropy input must sum to 1")
    nz = p[p > 0.0]
    return float(-(nz * np.log2(nz)).sum())


def apply_mxor(
    ensemble: DiagonalEnsemble, source_slot: int, target_slot: int
) -> DiagonalEnsemble:
    """Multilateral XOR between two slots, as an exact permutation of the
    joint index space."""
    if source_slot == target_slot:
        raise ValueError("source and target slot collide")
    n = ensemble.n_parties
    amp_mask = (1 << (n - 1)) - 1
    src = ensemble.slot_digits(source_slot)
    tgt = ensemble.slot_digits(target_slot)
    # Phase of the target XORs into the source; amplitudes of the source
    # XOR into the target.
    src_delta = (tgt >> (n - 1)) << (n - 1)
    tgt_delta = src & amp_mask
    idx = np.arange(ensemble.probs.size)
    new_idx = (
        idx
        ^ (src_delta << ensemble._shift(source_slot))
        ^ (tgt_delta << ensemble._shift(target_slot))
    )
    out = np.empty_like(ensemble.probs)
    out[new_idx] = ensemble.probs
    return DiagonalEnsemble(n, ensemble.n_states, out)


def condition_amps_zero(
    ensemble: DiagonalEnsemble, slot: int
) -> tuple[float, DiagonalEnsemble]:
    """Project onto 'all amplitude bits of ``slot`` are zero'.

    Returns the pass probability and the (unnormalized) projected ensemble.
    """
    n = ensemble.n_parties
    amp_mask = (1 << (n - 1)) - 1
    keep = (ensemble.slot_digits(slot) & amp_mask) == 0
    probs = np.where(keep, ensemble.probs, 0.0)
    return float(probs.sum()), DiagonalEnsemble(n, ensemble.n_states, probs)


def marginalize_slot(ensemble: DiagonalEnsemble, slot: int) -> DiagonalEnsemble:
    """Trace out one slot."""
    if ensemble.n_states < 2:
        raise ValueError("cannot marginalize the last remaining slot")
    dim = 1 << ensemble.n_parties
    shaped = ensemble.probs.reshape((dim,) * ensemble.n_states)
    return DiagonalEnsemble(
        ensemble.n_parties, ensemble.n_states - 1, shaped.sum(axis=slot).ravel()
    )


def block_step(
    single: SingleDistribution,
    m: int,
    source_order: tuple[int, ...] | None = None,
    cap: int = ENSEMBLE_ENTRY_CAP,
) -> tuple[float, DiagonalEnsemble | None]:
    """One block-size-m purification step.

    Forms m i.i.d. copies, XORs sources 1..m-1 into the m-th state, measures
    that target's amplitude bits and keeps only the all-zero outcome.  The
    target's phase bit is randomized by the measurement, so the passed
    ensemble is the renormalized marginal over the m-1 sources.

    Returns (p_pass, passed ensemble); the ensemble is None when p_pass is
    exactly 0 and callers must then treat the yield as 0.
    """
    if m < 2:
        raise ValueError("block size must be at least 2")
    block = iid_block(single, m, cap=cap)
    target = m - 1
    order = tuple(range(m - 1)) if source_order is None else tuple(source_order)
    if sorted(order) != list(range(m - 1)):
        raise ValueError("source order must be a permutation of the sources")
    for source in order:
        block = apply_mxor(block, source, target)
    p_pass, projected = condition_amps_zero(block, target)
    if p_pass == 0.0:
        return 0.0, None
    passed = marginalize_slot(projected, target)
    passed.probs /= p_pass
    drift = abs(passed.probs.sum() - 1.0)
    if drift > NORMALIZATION_TOL:
        raise ValueError(f"normalization drift {drift} after conditioning")
    return p_pass, passed


def block_yield(
    single: SingleDistribution, m: int, cap: int = ENSEMBLE_ENTRY_CAP
) -> float:
    """Per-input yield of the block step followed by hashing the survivors:
    p_pass * (m-1)/m * (1 - H(passed)/(m-1)).  May be negative; clamping is
    left to presentation layers."""
    p_pass, passed = block_step(single, m, cap=cap)
    if passed is None:
        return 0.0
    entropy = shannon_entropy(passed.probs)
    return p_pass * ((m - 1) / m) * (1.0 - entropy / (m - 1))


def bit_marginals(single: SingleDistribution) -> tuple[float, np.ndarray]:
    """Marginal probability that the phase bit is 1, and that each
    amplitude bit is 1."""
    n = single.n_parties
    codes = np.arange(1 << n)
    p_phase = float(single.probs[(codes >> (n - 1)) & 1 == 1].sum())
    p_amps = np.array(
        [
            float(single.probs[(codes >> (n - 2 - j)) & 1 == 1].sum())
            for j in range(n - 1)
        ]
    )
    return p_phase, p_amps
