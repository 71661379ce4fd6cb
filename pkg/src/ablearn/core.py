"""Shared domain types for the abductive learning pipeline.

Symbol sequences and revision masks are plain tuples so they can be used as
dictionary keys and compared cheaply; the heavier objects (instances,
datasets) are frozen dataclasses wrapping read-only numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class AblError(Exception):
    """Base class for all library errors."""


class ConfigurationError(AblError):
    """Invalid configuration or construction arguments."""


class ContractViolation(AblError):
    """An operation was called with arguments outside its contract."""


class GenerationError(AblError):
    """Dataset generation cannot satisfy the requested constraints."""


class BudgetError(AblError):
    """A guarded operation would exceed its work budget."""


# A symbol sequence is a tuple of alphabet indices; a revision mask is a
# tuple of booleans of the same length (True = the position becomes a hole).
SymbolSeq = tuple[int, ...]
RevisionMask = tuple[bool, ...]


@dataclass(frozen=True)
class Alphabet:
    """Ordered set of distinct symbol identifiers."""

    symbols: tuple[str, ...]

    def __post_init__(self):
        if len(self.symbols) < 2:
            raise ConfigurationError("alphabet needs at least 2 symbols")
        if len(set(self.symbols)) != len(self.symbols):
            raise ConfigurationError("alphabet symbols must be distinct")

    @property
    def size(self) -> int:
        return len(self.symbols)

    def index(self, symbol: str) -> int:
        try:
            return self.symbols.index(symbol)
        except ValueError:
            raise ConfigurationError(f"symbol {symbol!r} not in alphabet") from None

    def encode(self, text: str) -> SymbolSeq:
        return tuple(self.index(ch) for ch in text)

    def decode(self, seq: SymbolSeq) -> str:
        for s in seq:
            if not 0 <= s < self.size:
                raise ContractViolation(f"symbol index {s} out of range")
        return "".join(self.symbols[s] for s in seq)


# The digital binary-addition task alphabet used throughout the library.
DBA_ALPHABET = Alphabet(("0", "1", "+", "="))


@dataclass(frozen=True, eq=False)
class Instance:
    """One sample sequence: per-position feature vectors plus ground truth.

    ``true_symbols`` is held out for evaluation only; the training loop never
    reads it.
    """

    features: np.ndarray  # shape (l, d)
    true_symbols: SymbolSeq
    label: bool

    def __post_init__(self):
        if self.features.ndim != 2:
            raise ContractViolation("features must be a 2-d array (l, d)")
        if len(self.features) != len(self.true_symbols):
            raise ContractViolation("features and true_symbols lengths differ")
        self.features.setflags(write=False)

    @property
    def length(self) -> int:
        return len(self.true_symbols)


@dataclass(frozen=True, eq=False)
class Dataset:
    instances: tuple[Instance, ...]
    alphabet: Alphabet
    seed: int

    def __post_init__(self):
        dims = {inst.features.shape[1] for inst in self.instances}
        if len(dims) > 1:
            raise ContractViolation(f"inconsistent feature dimensions: {dims}")

    def __len__(self) -> int:
        return len(self.instances)

    @property
    def feature_dim(self) -> int:
        if not self.instances:
            raise ContractViolation("empty dataset has no feature dimension")
        return self.instances[0].features.shape[1]


def argmax_decode(probs) -> SymbolSeq:
    """Decode a probability sequence to symbol indices, row by row.

    Ties break to the smallest symbol index.
    """
    rows = np.asarray(probs, dtype=float)
    if rows.size == 0:
        return ()
    return tuple(int(i) for i in np.argmax(rows, axis=1))


def one_hot(seq: SymbolSeq, n_symbols: int, smoothing: float = 0.0) -> np.ndarray:
    """Encode a symbol sequence as rows of (smoothed) one-hot probabilities.

    With ``smoothing`` s, the true symbol gets 1 - s and the remaining mass is
    spread evenly over the other symbols, so each row still sums to one.
    """
    if not 0.0 <= smoothing < 1.0:
        raise ContractViolation("smoothing must be in [0, 1)")
    rows = np.full((len(seq), n_symbols), smoothing / max(n_symbols - 1, 1))
    for j, s in enumerate(seq):
        if not 0 <= s < n_symbols:
            raise ContractViolation(f"symbol index {s} out of range")
        rows[j, s] = 1.0 - smoothing
    return rows


def validate_prob_seq(rows, n_symbols: int | None = None, tol: float = 1e-9) -> np.ndarray:
    """Check that ``rows`` is a row-stochastic matrix and return it as an array."""
    arr = np.asarray(rows, dtype=float)
    if arr.size == 0:
        return arr.reshape(0, n_symbols or 0)
    if arr.ndim != 2:
        raise ContractViolation("probability sequence must be 2-d")
    if n_symbols is not None and arr.shape[1] != n_symbols:
        raise ContractViolation(f"expected {n_symbols} columns, got {arr.shape[1]}")
    if np.any(arr < -tol):
        raise ContractViolation("probabilities must be non-negative")
    sums = arr.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > tol):
        raise ContractViolation("probability rows must sum to 1")
    return arr
