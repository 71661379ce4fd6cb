"""Knowledge bases over binary-addition equations.

An equation is a symbol sequence matching ``A + B = C`` where A, B, C are
nonempty bitstrings without leading zeros (the single digit ``0`` is
allowed).  Two knowledge bases share this grammar:

* :class:`BinaryAdditionKB` verifies the arithmetic directly and can be made
  deliberately incomplete: operands longer than ``max_verifiable_operand_bits``
  make the verdict ``UNKNOWN``.
* :class:`CompleteKB` holds the explicit set of every valid equation up to a
  length bound, reducing checking to membership; it never answers UNKNOWN.

Both count every ``check``/``abduce`` call on an access counter, which the
training loop uses as its budget ledger.  Internal candidate evaluation
during abduction does not touch the counter.
"""

from __future__ import annotations

import enum
import math
import threading
from dataclasses import dataclass
from itertools import product

from .core import (
    Alphabet,
    BudgetError,
    ConfigurationError,
    ContractViolation,
    DBA_ALPHABET,
    RevisionMask,
    SymbolSeq,
)

# Abduction refuses to enumerate assignments for more holes than this.
MAX_ABDUCTION_HOLES = 8
# Complete-KB enumeration is documented safe up to this total length.
MAX_COMPLETE_LEN = 14

_JOINT_CLAMP = 1e-12


class KbVerdict(enum.Enum):
    VALID = "valid"
    INVALID = "invalid"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Rule:
    """A column-level binary addition fact: a + b + carry_in = sum + 2*carry_out."""

    a: int
    b: int
    carry_in: int
    sum: int
    carry_out: int

    def __post_init__(self):
        if self.a + self.b + self.carry_in != self.sum + 2 * self.carry_out:
            raise ContractViolation(f"inconsistent addition fact {self}")


@dataclass(frozen=True)
class AbductionResult:
    revised: SymbolSeq
    filled_positions: tuple[tuple[int, int], ...]
    joint_log_prob: float


def _bitstrings(n: int) -> list[str]:
    """All length-n operands obeying the leading-zero rule."""
    if n < 1:
        return []
    if n == 1:
        return ["0", "1"]
    return ["1" + format(i, f"0{n - 1}b") for i in range(2 ** (n - 1))]


def parse_equation(seq: SymbolSeq, alphabet: Alphabet = DBA_ALPHABET) -> tuple[str, str, str] | None:
    """Split ``seq`` into operand bitstrings (A, B, C), or None if it is not
    a well-formed equation."""
    try:
        text = alphabet.decode(seq)
    except ContractViolation:
        return None
    plus = text.count("+")
    eq = text.count("=")
    if plus != 1 or eq != 1:
        return None
    left, right = text.split("=")
    if "+" in right:
        return None
    a, b = left.split("+")
    for part in (a, b, right):
        if not part:
            return None
        if any(ch not in "01" for ch in part):
            return None
        if len(part) > 1 and part[0] == "0":
            return None
    return a, b, right


def equation_holds(a: str, b: str, c: str) -> bool:
    return int(a, 2) + int(b, 2) == int(c, 2)


def enumerate_true_equations(len_min: int, len_max: int, alphabet: Alphabet = DBA_ALPHABET) -> list[str]:
    """Every arithmetically true equation whose total length is in range.

    Enumerates operand pairs and derives the sum, so the cost is linear in
    the number of valid equations rather than in the parseable space.
    """
    out = []
    for la in range(1, max(len_max - 4, 0) + 1):
        for lb in range(1, len_max - la - 3 + 1):
            for a in _bitstrings(la):
                for b in _bitstrings(lb):
                    c = format(int(a, 2) + int(b, 2), "b")
                    total = la + lb + len(c) + 2
                    if len_min <= total <= len_max:
                        out.append(f"{a}+{b}={c}")
    out.sort(key=lambda s: (len(s), s))
    return out


def enumerate_false_equations(len_min: int, len_max: int, alphabet: Alphabet = DBA_ALPHABET) -> list[str]:
    """Every parseable but arithmetically false equation in the length range."""
    out = []
    for total in range(len_min, len_max + 1):
        for la in range(1, total - 3):
            for lb in range(1, total - la - 2):
                lc = total - 2 - la - lb
                if lc < 1:
                    continue
                for a in _bitstrings(la):
                    for b in _bitstrings(lb):
                        for c in _bitstrings(lc):
                            if not equation_holds(a, b, c):
                                out.append(f"{a}+{b}={c}")
    out.sort(key=lambda s: (len(s), s))
    return out


class _Tally:
    """Thread-safe access counter (the counting contract must hold even if
    callers share a KB across threads)."""

    def __init__(self):
        self._lock = threading.Lock()
        self._count = 0

    def bump(self) -> None:
        with self._lock:
            self._count += 1

    @property
    def value(self) -> int:
        return self._count


class KnowledgeBase:
    """Validity checker and abducer over symbol sequences with holes."""

    def __init__(self, alphabet: Alphabet):
        for required in ("0", "1", "+", "="):
            alphabet.index(required)
        self.alphabet = alphabet
        self._tally = _Tally()

    @property
    def accesses(self) -> int:
        return self._tally.value

    def clone(self):
        raise NotImplementedError

    def _verdict(self, seq: SymbolSeq) -> KbVerdict:
        raise NotImplementedError

    def check(self, seq: SymbolSeq) -> KbVerdict:
        self._tally.bump()
        return self._verdict(seq)

    def abduce(self, seq: SymbolSeq, mask: RevisionMask, label: bool, probs) -> AbductionResult | None:
        """Fill the hole positions of ``seq`` so the verdict matches ``label``.

        Among all satisfying assignments, returns the one with the highest
        joint probability of the filled symbols under ``probs`` (ties break
        to the lexicographically smallest symbol tuple).  Counts as a single
        knowledge-base access regardless of how many internal candidates are
        evaluated.
        """
        self._tally.bump()
        if len(seq) != len(mask):
            raise ContractViolation("sequence and mask lengths differ")
        if len(probs) != len(seq):
            raise ContractViolation("probability sequence length differs from sequence")
        holes = [i for i, bit in enumerate(mask) if bit]
        if len(holes) > MAX_ABDUCTION_HOLES:
            raise BudgetError(
                f"{len(holes)} holes exceed the abduction guard of {MAX_ABDUCTION_HOLES}"
            )
        want = KbVerdict.VALID if label else KbVerdict.INVALID
        n_sym = self.alphabet.size
        best: tuple[float, tuple[int, ...], SymbolSeq] | None = None
        candidate = list(seq)
        for fill in product(range(n_sym), repeat=len(holes)):
            for pos, sym in zip(holes, fill):
                candidate[pos] = sym
            if self._verdict(tuple(candidate)) != want:
                continue
            joint = math.fsum(
                math.log(max(float(probs[pos][sym]), _JOINT_CLAMP))
                for pos, sym in zip(holes, fill)
            )
            # Lexicographic iteration order makes "first strict improvement"
            # implement the smallest-tuple tie rule.
            if best is None or joint > best[0]:
                best = (joint, fill, tuple(candidate))
        if best is None:
            return None
        joint, fill, revised = best
        return AbductionResult(revised, tuple(zip(holes, fill)), joint)


class BinaryAdditionKB(KnowledgeBase):
    """Arithmetic checker with an optional verifiability horizon.

    With ``max_verifiable_operand_bits`` set, any parseable equation whose
    operand exceeds that many bits is neither provable nor disprovable and
    yields UNKNOWN.
    """

    def __init__(self, alphabet: Alphabet = DBA_ALPHABET, max_verifiable_operand_bits: int | None = None):
        super().__init__(alphabet)
        if max_verifiable_operand_bits is not None and max_verifiable_operand_bits < 1:
            raise ConfigurationError("max_verifiable_operand_bits must be >= 1")
        self.max_verifiable_operand_bits = max_verifiable_operand_bits

    def clone(self) -> "BinaryAdditionKB":
        return BinaryAdditionKB(self.alphabet, self.max_verifiable_operand_bits)

    def _verdict(self, seq: SymbolSeq) -> KbVerdict:
        parts = parse_equation(seq, self.alphabet)
        if parts is None:
            return KbVerdict.INVALID
        bound = self.max_verifiable_operand_bits
        if bound is not None and any(len(p) > bound for p in parts):
            return KbVerdict.UNKNOWN
        return KbVerdict.VALID if equation_holds(*parts) else KbVerdict.INVALID


class CompleteKB(KnowledgeBase):
    """Explicit set of all valid equations up to a maximum length."""

    def __init__(self, alphabet: Alphabet, valid: frozenset[SymbolSeq], max_len: int):
        super().__init__(alphabet)
        self._valid = valid
        self.max_len = max_len

    def clone(self) -> "CompleteKB":
        return CompleteKB(self.alphabet, self._valid, self.max_len)

    def _verdict(self, seq: SymbolSeq) -> KbVerdict:
        return KbVerdict.VALID if tuple(seq) in self._valid else KbVerdict.INVALID

    def valid_sequences(self) -> list[SymbolSeq]:
        """Deterministically ordered list of every stored valid equation."""
        return sorted(self._valid, key=lambda s: (len(s), s))


def build_complete_kb(alphabet: Alphabet = DBA_ALPHABET, max_len: int = 10) -> CompleteKB:
    if max_len > MAX_COMPLETE_LEN:
        raise ConfigurationError(
            f"complete KB enumeration is bounded at total length {MAX_COMPLETE_LEN}"
        )
    strings = enumerate_true_equations(1, max_len, alphabet)
    valid = frozenset(alphabet.encode(s) for s in strings)
    return CompleteKB(alphabet, valid, max_len)


def save_complete_kb(kb: CompleteKB, path) -> None:
    """Persist the valid-equation set as sorted plain text, one per line."""
    lines = sorted(kb.alphabet.decode(seq) for seq in kb.valid_sequences())
    with open(path, "w", encoding="utf-8") as fh:
        for line in lines:
            fh.write(line + "\n")


def load_complete_kb(path, alphabet: Alphabet = DBA_ALPHABET) -> CompleteKB:
    with open(path, "r", encoding="utf-8") as fh:
        strings = [line.strip() for line in fh if line.strip()]
    valid = frozenset(alphabet.encode(s) for s in strings)
    max_len = max((len(s) for s in strings), default=0)
    return CompleteKB(alphabet, valid, max_len)


def column_rules(a: str, b: str, c: str) -> set[Rule]:
    """Column-wise addition facts of one true equation, operands zero-padded
    to the result length."""
    width = len(c)
    a = a.zfill(width)
    b = b.zfill(width)
    rules = set()
    carry = 0
    for j in range(width - 1, -1, -1):
        da, db = int(a[j]), int(b[j])
        total = da + db + carry
        rules.add(Rule(da, db, carry, total & 1, total >> 1))
        carry = total >> 1
    return rules


def generate_rules(kb: KnowledgeBase, groups) -> tuple[set[Rule], int]:
    """Union of addition facts extracted from groups whose members all check
    VALID; groups containing any non-valid sequence contribute nothing."""
    rule_set: set[Rule] = set()
    for group in groups:
        verdicts = [kb.check(seq) for seq in group]
        if any(v != KbVerdict.VALID for v in verdicts):
            continue
        for seq in group:
            parts = parse_equation(seq, kb.alphabet)
            if parts is None:  # VALID verdicts always parse; guard anyway
                continue
            rule_set |= column_rules(*parts)
    return rule_set, len(rule_set)
