"""Pauli strings over GF(2) with phase tracking.

An n-qubit Pauli operator is stored as ``i**phase * prod_j X^x[j] Z^z[j]``
(phase mod 4).  Hermitian strings render as ``±`` followed by letters, with
each Y contributing one factor of i absorbed into the letter.
"""

from __future__ import annotations

import numpy as np

from .errors import SimError

I2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_LETTER_MAT = {"I": I2, "X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}


class PauliString:
    def __init__(self, x, z, phase: int = 0):
        self.x = np.asarray(x, dtype=np.uint8) % 2
        self.z = np.asarray(z, dtype=np.uint8) % 2
        self.phase = phase % 4
        if self.x.shape != self.z.shape or self.x.ndim != 1:
            raise ValueError("x/z bit vectors must be 1-d and equal length")

    # -- constructors ----------------------------------------------------
    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(np.zeros(n, dtype=np.uint8), np.zeros(n, dtype=np.uint8))

    @classmethod
    def from_word(cls, word: str) -> "PauliString":
        """Parse e.g. ``"XZ"``, ``"+XZ"``, ``"-YY"``."""
        word = word.strip()
        phase = 0
        if word and word[0] in "+-":
            if word[0] == "-":
                phase = 2
            word = word[1:]
        if not word:
            raise SimError("empty-pauli-word")
        n = len(word)
        x = np.zeros(n, dtype=np.uint8)
        z = np.zeros(n, dtype=np.uint8)
        for j, letter in enumerate(word):
            if letter == "I":
                pass
            elif letter == "X":
                x[j] = 1
            elif letter == "Z":
                z[j] = 1
            elif letter == "Y":
                x[j] = 1
                z[j] = 1
                phase += 1  # Y = i X Z
            else:
                raise SimError("bad-pauli-letter", letter)
        return cls(x, z, phase)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str) -> "PauliString":
        word = ["I"] * n
        word[qubit] = letter
        return cls.from_word("".join(word))

    # -- properties --------------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def is_hermitian(self) -> bool:
        return (self.phase - int(np.dot(self.x, self.z))) % 2 == 0

    @property
    def sign(self) -> int:
        """+1 or -1 for Hermitian strings."""
        rel = (self.phase - int(np.dot(self.x, self.z))) % 4
        if rel == 0:
            return 1
        if rel == 2:
            return -1
        raise SimError("non-hermitian-pauli", str(self))

    def letters(self) -> str:
        return "".join("IXZY"[xb + 2 * zb] for xb, zb in zip(self.x, self.z))

    def __repr__(self):
        return f"{'+' if self.sign > 0 else '-'}{self.letters()}" if self.is_hermitian \
            else f"i^{self.phase}*{self.letters()}"

    def __eq__(self, other):
        return (isinstance(other, PauliString) and self.phase == other.phase
                and np.array_equal(self.x, other.x) and np.array_equal(self.z, other.z))

    def __hash__(self):
        return hash((self.phase, self.x.tobytes(), self.z.tobytes()))

    # -- algebra ------------------------------------------------------------
    def commutes(self, other: "PauliString") -> bool:
        if self.n != other.n:
            raise SimError("arity-mismatch")
        sym = int(np.dot(self.x, other.z) + np.dot(self.z, other.x)) % 2
        return sym == 0

    def __mul__(self, other: "PauliString") -> "PauliString":
        if self.n != other.n:
            raise SimError("arity-mismatch")
        # X^a Z^b * X^c Z^d = (-1)^(b c) X^(a+c) Z^(b+d) per qubit
        phase = self.phase + other.phase + 2 * int(np.dot(self.z, other.x))
        return PauliString(self.x ^ other.x, self.z ^ other.z, phase)

    def to_matrix(self) -> np.ndarray:
        mat = np.array([[1]], dtype=complex)
        for letter in self.letters():
            mat = np.kron(mat, _LETTER_MAT[letter])
        # letters() folds one i per Y; remove it from the explicit phase
        residual = (self.phase - int(np.dot(self.x, self.z))) % 4
        return (1j ** residual) * mat


def parse_words(text: str) -> list[PauliString]:
    """Parse a space-separated list of equally long Pauli words."""
    words = text.split()
    if not words:
        raise SimError("empty-pauli-word")
    paulis = [PauliString.from_word(w) for w in words]
    n = paulis[0].n
    if any(p.n != n for p in paulis):
        raise SimError("rank-mismatch", "generator words differ in length")
    return paulis


def gf2_rank(rows: np.ndarray) -> int:
    """Rank of a binary matrix over GF(2)."""
    m = np.array(rows, dtype=np.uint8) % 2
    rank = 0
    ncols = m.shape[1] if m.ndim == 2 else 0
    for col in range(ncols):
        pivot = None
        for r in range(rank, m.shape[0]):
            if m[r, col]:
                pivot = r
                break
        if pivot is None:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        for r in range(m.shape[0]):
            if r != rank and m[r, col]:
                m[r] ^= m[rank]
        rank += 1
    return rank


def symplectic_matrix(paulis) -> np.ndarray:
    """Stack [X|Z] bit rows for a list of equal-length Pauli strings."""
    return np.array([np.concatenate([p.x, p.z]) for p in paulis], dtype=np.uint8)


def validate_generators(paulis) -> None:
    """Check a stabilizer generator set: Hermitian, commuting, independent,
    and as many generators as qubits."""
    n = paulis[0].n
    if len(paulis) != n:
        raise SimError("rank-mismatch", f"{len(paulis)} generators for {n} qubits")
    for p in paulis:
        if not p.is_hermitian:
            raise SimError("invalid-stabilizer-group", f"non-Hermitian {p}")
    for i, a in enumerate(paulis):
        for b in paulis[i + 1:]:
            if not a.commutes(b):
                raise SimError("invalid-stabilizer-group", f"{a} anticommutes with {b}")
    if gf2_rank(symplectic_matrix(paulis)) != n:
        raise SimError("invalid-stabilizer-group", "dependent generators")
