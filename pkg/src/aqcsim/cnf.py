"""3-SAT instances: DIMACS I/O, random generation and a brute-force oracle.

Bit convention used across the package: variable ``x_k`` lives in bit
``k - 1`` of an assignment index (``x_1`` is the least significant bit) and
a set bit means *true*.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass
from typing import Iterable, TextIO

import numpy as np

from .errors import DimacsError, SizeError

BRUTE_FORCE_CAP = 24
_ORACLE_CHUNK = 1 << 16


@dataclass(frozen=True, order=True)
class Literal:
    variable_index: int
    negated: bool = False

    def __post_init__(self):
        if self.variable_index < 1:
            raise ValueError(f"variable index must be >= 1, got {self.variable_index}")

    def __neg__(self) -> Literal:
        return Literal(self.variable_index, not self.negated)

    def to_int(self) -> int:
        return -self.variable_index if self.negated else self.variable_index

    @classmethod
    def from_int(cls, value: int) -> Literal:
        if value == 0:
            raise ValueError("0 is not a literal")
        return cls(abs(value), value < 0)

    def value(self, bits: int) -> bool:
        return bool((bits >> (self.variable_index - 1)) & 1) != self.negated


@dataclass(frozen=True)
class Clause:
    literals: tuple[Literal, Literal, Literal]

    def __post_init__(self):
        if len(self.literals) != 3:
            raise ValueError(f"a 3-SAT clause needs 3 literals, got {len(self.literals)}")
        if len({lit.variable_index for lit in self.literals}) != 3:
            raise ValueError(f"clause variables must be distinct: {self.to_ints()}")

    @classmethod
    def from_ints(cls, values: Iterable[int]) -> Clause:
        return cls(tuple(Literal.from_int(v) for v in values))

    def to_ints(self) -> tuple[int, ...]:
        return tuple(lit.to_int() for lit in self.literals)

    @property
    def variables(self) -> tuple[int, ...]:
        return tuple(lit.variable_index for lit in self.literals)

    def satisfied_by(self, bits: int) -> bool:
        return any(lit.value(bits) for lit in self.literals)

    def __str__(self):
        parts = [("¬" if lit.negated else "") + f"x{lit.variable_index}" for lit in self.literals]
        return "(" + " ∨ ".join(parts) + ")"


@dataclass(frozen=True)
class CnfInstance:
    num_variables: int
    clauses: tuple[Clause, ...]

    def __post_init__(self):
        if self.num_variables < 1:
            raise ValueError("an instance needs at least one variable")
        if len(self.clauses) < 1:
            raise ValueError("an instance needs at least one clause")
        for clause in self.clauses:
            if max(clause.variables) > self.num_variables:
                raise ValueError(
                    f"clause {clause.to_ints()} references a variable beyond n={self.num_variables}"
                )

    @classmethod
    def from_ints(cls, num_variables: int, clauses: Iterable[Iterable[int]]) -> CnfInstance:
        return cls(num_variables, tuple(Clause.from_ints(c) for c in clauses))

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    @property
    def ratio(self) -> float:
        return self.num_clauses / self.num_variables

    def with_clause(self, clause: Clause) -> CnfInstance:
        return CnfInstance(self.num_variables, self.clauses + (clause,))

    def bit_masks(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-clause ``(mask, falsifier)`` words.

        A clause is violated by assignment ``i`` exactly when
        ``i & mask == falsifier``: every plain literal reads 0 and every
        negated literal reads 1.
        """
        masks = np.zeros(self.num_clauses, dtype=np.uint64)
        falsifiers = np.zeros(self.num_clauses, dtype=np.uint64)
        for c, clause in enumerate(self.clauses):
            mask = fal = 0
            for lit in clause.literals:
                bit = 1 << (lit.variable_index - 1)
                mask |= bit
                if lit.negated:
                    fal |= bit
            masks[c] = mask
            falsifiers[c] = fal
        return masks, falsifiers


@dataclass(frozen=True, order=True)
class Assignment:
    bits: int
    num_variables: int

    def __post_init__(self):
        if not 0 <= self.bits < (1 << self.num_variables):
            raise ValueError(f"bits={self.bits} out of range for n={self.num_variables}")

    @classmethod
    def from_values(cls, values: Iterable[int]) -> Assignment:
        """Build from ``(x_1, ..., x_n)`` given as 0/1."""
        values = list(values)
        bits = sum(int(bool(v)) << k for k, v in enumerate(values))
        return cls(bits, len(values))

    @property
    def values(self) -> tuple[int, ...]:
        return tuple((self.bits >> k) & 1 for k in range(self.num_variables))

    def __str__(self):
        # x_1 first, matching how solutions are listed by hand
        return "".join(str(v) for v in self.values)


# ---------------------------------------------------------------------------
# DIMACS
# ---------------------------------------------------------------------------

def parse_dimacs(text: str | TextIO) -> CnfInstance:
    """Parse a DIMACS CNF document with exactly three literals per clause.

    Clauses may span lines; each ends at a ``0`` token.  Errors carry the
    1-based line number where the problem was detected.
    """
    if isinstance(text, str):
        text = io.StringIO(text)

    header = None
    clauses: list[tuple[int, ...]] = []
    current: list[int] = []
    current_line = 0
    lineno = 0
    for lineno, raw in enumerate(text, start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            # end marker used by the SATLIB benchmark files
            break
        if line.startswith("p"):
            if header is not None:
                raise DimacsError("duplicate problem line", lineno)
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"malformed header {line!r}, expected 'p cnf <n> <m>'", lineno)
            try:
                n, m = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsError(f"non-integer counts in header {line!r}", lineno) from None
            if n < 1 or m < 1:
                raise DimacsError(f"header counts must be positive, got n={n} m={m}", lineno)
            header = (n, m)
            continue
        if header is None:
            raise DimacsError("clause before 'p cnf' header", lineno)
        n, m = header
        for token in line.split():
            try:
                value = int(token)
            except ValueError:
                raise DimacsError(f"non-integer token {token!r}", lineno) from None
            if not current:
                current_line = lineno
            if value == 0:
                if len(current) != 3:
                    raise DimacsError(f"clause length {len(current)} != 3", lineno)
                if len({abs(v) for v in current}) != 3:
                    raise DimacsError(f"clause {current} repeats a variable", lineno)
                clauses.append(tuple(current))
                current = []
                continue
            if abs(value) > n:
                raise DimacsError(f"variable {abs(value)} out of range 1..{n}", lineno)
            current.append(value)

    if header is None:
        raise DimacsError("missing 'p cnf' header", lineno)
    if current:
        raise DimacsError("last clause not terminated by 0", current_line)
    n, m = header
    if len(clauses) != m:
        raise DimacsError(f"header declares {m} clauses, found {len(clauses)}", lineno)
    return CnfInstance.from_ints(n, clauses)


def write_dimacs(instance: CnfInstance, comments: Iterable[str] = ()) -> str:
    lines = [f"c {c}" for c in comments]
    lines.append(f"p cnf {instance.num_variables} {instance.num_clauses}")
    lines.extend(" ".join(str(v) for v in clause.to_ints()) + " 0" for clause in instance.clauses)
    return "\n".join(lines) + "\n"


def read_dimacs(path: str | os.PathLike) -> CnfInstance:
    with open(path, encoding="ascii") as fh:
        return parse_dimacs(fh)


def save_dimacs(instance: CnfInstance, path: str | os.PathLike, comments: Iterable[str] = ()):
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(write_dimacs(instance, comments))


# ---------------------------------------------------------------------------
# fixtures and generation
# ---------------------------------------------------------------------------

# Six-variable, 27-clause worked example, transcribed literal by literal
# (clauses 1/18 and 2/15 are repeated in the source listing).
_PAPER_CLAUSES = (
    (-1, -4, -5), (-2, -3, -4), (1, 2, -5), (3, 4, 5),
    (4, 5, -6), (-1, -3, -5), (1, -2, -5), (2, -3, -6),
    (-1, -2, -6), (3, -5, -6), (-1, -2, -4), (2, 3, -4),
    (2, 5, -6), (2, -3, -5), (-2, -3, -4), (2, 3, 6),
    (-1, -2, -3), (-1, -4, -5), (-3, -4, -6), (-4, -5, 6),
    (-2, 3, -6), (2, 5, 6), (3, 5, -6), (-1, 3, -6),
    (3, -5, 6), (4, 5, 6), (1, 2, -3),
)

# Solution quoted alongside the listing, as (x_1, ..., x_6).  It violates
# clause 11 of the listing; the listing's true unique solution is 010100.
PAPER_STATED_SOLUTION = (1, 1, 0, 1, 0, 0)


def paper_instance() -> CnfInstance:
    return CnfInstance.from_ints(6, _PAPER_CLAUSES)


def generate_instance(n: int, ratio: float = 4.2, rng_seed: int = 0) -> CnfInstance:
    """Uniform random 3-SAT with ``round(ratio * n)`` distinct clauses.

    Each clause draws 3 distinct variables uniformly and negates each with
    probability 1/2.  Clauses are canonicalised by sorted variable index
    before the duplicate check, so permutations count as duplicates.
    """
    if n < 3:
        raise SizeError(f"need n >= 3 to form a clause of 3 distinct variables, got n={n}")
    if ratio <= 0:
        raise ValueError(f"ratio must be positive, got {ratio}")
    m = max(1, round(ratio * n))
    # 8 sign patterns per variable triple
    capacity = 8 * (n * (n - 1) * (n - 2) // 6)
    if m > capacity:
        raise SizeError(f"cannot draw {m} distinct clauses over {n} variables (max {capacity})")

    rng = np.random.default_rng(rng_seed)
    seen: set[tuple[int, ...]] = set()
    clauses = []
    while len(clauses) < m:
        variables = np.sort(rng.choice(n, size=3, replace=False)) + 1
        signs = rng.integers(0, 2, size=3)
        clause = tuple(int(-v if s else v) for v, s in zip(variables, signs))
        if clause in seen:
            continue
        seen.add(clause)
        clauses.append(clause)
    return CnfInstance.from_ints(n, clauses)


def generate_unique_instance(
    n: int, ratio: float = 4.2, rng_seed: int = 0, max_tries: int = 10_000
) -> tuple[CnfInstance, int]:
    """Draw instances from successive seeds until one has exactly one solution.

    Returns the instance and the seed that produced it.
    """
    for offset in range(max_tries):
        seed = rng_seed + offset
        instance = generate_instance(n, ratio, seed)
        if len(brute_force_solutions(instance)) == 1:
            return instance, seed
    raise RuntimeError(f"no unique-solution instance in {max_tries} seeds from {rng_seed}")


# ---------------------------------------------------------------------------
# brute-force oracle
# ---------------------------------------------------------------------------

def solution_indices(instance: CnfInstance, cap: int = BRUTE_FORCE_CAP) -> np.ndarray:
    """Ascending indices of all satisfying assignments.

    Evaluates each literal as a boolean over a block of assignments and ANDs
    the clause disjunctions together.  Deliberately shares no code with the
    energy kernels, which it is used to check.
    """
    n = instance.num_variables
    if n > cap:
        raise SizeError(f"brute force over 2^{n} assignments exceeds cap n <= {cap}")
    lits = [[(lit.variable_index - 1, lit.negated) for lit in c.literals] for c in instance.clauses]
    found = []
    total = 1 << n
    for start in range(0, total, _ORACLE_CHUNK):
        idx = np.arange(start, min(total, start + _ORACLE_CHUNK), dtype=np.int64)
        ok = np.ones(idx.shape, dtype=bool)
        for clause in lits:
            clause_ok = np.zeros(idx.shape, dtype=bool)
            for var, negated in clause:
                bit = ((idx >> var) & 1).astype(bool)
                clause_ok |= ~bit if negated else bit
            ok &= clause_ok
        found.append(idx[ok])
    return np.concatenate(found)


def brute_force_solutions(instance: CnfInstance, cap: int = BRUTE_FORCE_CAP) -> frozenset[Assignment]:
    n = instance.num_variables
    return frozenset(Assignment(int(i), n) for i in solution_indices(instance, cap))


def sorted_solutions(instance: CnfInstance, cap: int = BRUTE_FORCE_CAP) -> list[Assignment]:
    return sorted(brute_force_solutions(instance, cap))
