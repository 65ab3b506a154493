"""Stabilizer codes and the error = pure-error x logical x stabilizer split.

A code is held as three GF(2) tables over the length-2n Pauli representation:

* ``h`` — the m x 2n parity-check matrix (stabilizer generators g_i),
* ``pure_errors`` — m rows e_i with <g_i, e_j> = delta_ij,
* ``logicals`` — 2k rows ordered (x_1, z_1, ..., x_k, z_k) forming symplectic
  pairs that commute with every g_i and e_i.

Together the 2n rows form a basis of the Pauli group mod phase, so any error
E factors uniquely as E = prod e_i^gamma_i * l_j^beta_j * g_a^alpha_a.  The
bit triple (gamma, beta, alpha) is the code-frame coordinate system used by
the sequence model; serialization order is [gamma, beta, alpha].
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass

import numpy as np

from . import gf2
from .errors import (
    BadFileError,
    DegenerateKernelError,
    LengthMismatchError,
    RankDeficientError,
)


@dataclass
class CodeTables:
    """Derived operator tables for one stabilizer code."""

    n: int
    k: int
    m: int
    h: np.ndarray
    pure_errors: np.ndarray
    logicals: np.ndarray

    @property
    def seq_len(self) -> int:
        """Length of the serialized (gamma, beta, alpha) bit sequence."""
        return 2 * self.n

    def partner_swapped_logicals(self) -> np.ndarray:
        """Logical rows with each (x_i, z_i) pair swapped to (z_i, x_i).

        Pairing a Pauli with the *partner* logical reads off the power of a
        logical: <l_zi, E> counts how often l_xi occurs in E.
        """
        swapped = self.logicals.copy()
        swapped[0::2], swapped[1::2] = (
            self.logicals[1::2].copy(), self.logicals[0::2].copy())
        return swapped


@dataclass
class ElsConfig:
    """(gamma, beta, alpha) coordinates of one error in the code frame."""

    gamma: np.ndarray
    beta: np.ndarray
    alpha: np.ndarray

    def sequence(self) -> np.ndarray:
        return np.concatenate([self.gamma, self.beta, self.alpha]).astype(np.uint8)

    @classmethod
    def from_sequence(cls, code: CodeTables, seq) -> "ElsConfig":
        seq = gf2.as_bits(seq).ravel()
        if seq.shape[0] != code.seq_len:
            raise LengthMismatchError(
                f"sequence length {seq.shape[0]} != 2n = {code.seq_len}")
        m, k2 = code.m, 2 * code.k
        return cls(seq[:m].copy(), seq[m:m + k2].copy(), seq[m + k2:].copy())


def find_pure_errors(h: np.ndarray) -> np.ndarray:
    """Solve for pure errors: rows e_j with <g_i, e_j> = delta_ij.

    Row-reduces (H Lambda | I) to (A | B), solves A e_j = B[:, j] with free
    variables fixed to 0, then repairs mutual commutation: whenever e_i and
    e_j (i < j) anticommute, g_j is multiplied into e_i.  The repair leaves
    the defining pairing intact because <g_j, e_l> = delta_jl.
    """
    h = gf2.as_bits(np.atleast_2d(h))
    m, two_n = h.shape
    if gf2.rank(h) != m:
        raise RankDeficientError(f"{m} check rows have rank {gf2.rank(h)}")
    g = gf2.swap_halves(h)  # row i of g is Lambda applied to g_i
    aug = np.concatenate([g, np.eye(m, dtype=np.uint8)], axis=1)
    red, _ = gf2.gaussian_eliminate(aug)
    a, b = red[:, :two_n], red[:, two_n:]
    pure = np.zeros((m, two_n), dtype=np.uint8)
    for j in range(m):
        pure[j] = gf2.solve(a, b[:, j])
    for i in range(m):
        overlaps = gf2.symplectic_gram(pure[i], pure[i + 1:]).ravel()
        for off in np.nonzero(overlaps)[0]:
            pure[i] ^= h[i + 1 + off]
    return pure


def find_logicals(h: np.ndarray, pure_errors: np.ndarray) -> np.ndarray:
    """Find 2k logical generators as symplectic (x, z) pairs.

    The candidates span the kernel of the symplectic pairing against every
    check and pure-error row.  A Gram-Schmidt pairing sweep then reorganizes
    them: pick a row a with a partner b such that <a, b> = 1, emit the pair,
    and strip both from every remaining row r via r += <r,b> a + <r,a> b.
    Output rows are ordered (x_1, z_1, ..., x_k, z_k).
    """
    h = gf2.as_bits(np.atleast_2d(h))
    pure_errors = gf2.as_bits(np.atleast_2d(pure_errors))
    m, two_n = h.shape
    k = two_n // 2 - m
    stacked = np.concatenate([h, pure_errors], axis=0)
    kernel = gf2.kernel_basis(gf2.swap_halves(stacked))
    if kernel.shape[0] != 2 * k:
        raise DegenerateKernelError(
            f"commutant dimension {kernel.shape[0]}, expected {2 * k}")
    remaining = [row for row in kernel]
    pairs: list[np.ndarray] = []
    while remaining:
        a = remaining.pop(0)
        partner = None
        for idx, row in enumerate(remaining):
            if gf2.symplectic_product(a, row):
                partner = idx
                break
        if partner is None:
            raise DegenerateKernelError("kernel row has no anticommuting partner")
        b = remaining.pop(partner)
        pairs.extend([a, b])
        for idx, row in enumerate(remaining):
            row = row.copy()
            if gf2.symplectic_product(row, b):
                row ^= a
            if gf2.symplectic_product(row, a):
                row ^= b
            remaining[idx] = row
    return np.array(pairs, dtype=np.uint8)


def check_tables(code: CodeTables) -> dict[str, bool]:
    """Evaluate the defining symplectic identities of a code's tables.

    Returns a dict of named boolean checks; all must hold for a valid code.
    """
    h, pe, lg = code.h, code.pure_errors, code.logicals
    m, k = code.m, code.k
    eye = np.eye(m, dtype=np.uint8)
    pair_block = np.zeros((2 * k, 2 * k), dtype=np.uint8)
    for i in range(k):
        pair_block[2 * i, 2 * i + 1] = 1
        pair_block[2 * i + 1, 2 * i] = 1
    return {
        "check_rank_full": gf2.rank(h) == m,
        "checks_commute": not gf2.symplectic_gram(h, h).any(),
        "pure_error_pairing": bool(
            np.array_equal(gf2.symplectic_gram(h, pe), eye)),
        "pure_errors_commute": not gf2.symplectic_gram(pe, pe).any(),
        "logicals_commute_with_checks": not gf2.symplectic_gram(h, lg).any(),
        "logicals_commute_with_pure_errors": not gf2.symplectic_gram(pe, lg).any(),
        "logical_pair_block": bool(
            np.array_equal(gf2.symplectic_gram(lg, lg), pair_block)),
    }


def make_code_tables(h: np.ndarray, n: int, k: int) -> CodeTables:
    """Derive pure errors and logicals from a parity-check matrix."""
    h = gf2.as_bits(np.atleast_2d(h))
    m = h.shape[0]
    if h.shape[1] != 2 * n:
        raise LengthMismatchError(f"check rows have length {h.shape[1]}, expected {2 * n}")
    if m != n - k:
        raise ValueError(f"row count {m} != n - k = {n - k}")
    if gf2.symplectic_gram(h, h).any():
        raise ValueError("check rows do not mutually commute")
    pure = find_pure_errors(h)
    logical = find_logicals(h, pure)
    code = CodeTables(n=n, k=k, m=m, h=h, pure_errors=pure, logicals=logical)
    failed = [name for name, ok in check_tables(code).items() if not ok]
    if failed:
        raise ValueError(f"table identities failed: {failed}")
    return code


# ---------------------------------------------------------------------------
# Built-in code constructions
# ---------------------------------------------------------------------------

def _pauli_row(n, x_qubits=(), z_qubits=()):
    row = np.zeros(2 * n, dtype=np.uint8)
    for q in z_qubits:
        row[q] ^= 1
    for q in x_qubits:
        row[n + q] ^= 1
    return row


def repetition_code(n: int) -> CodeTables:
    """Bit-flip repetition code: checks Z_i Z_{i+1}, one logical qubit."""
    if n < 2:
        raise ValueError("repetition code needs n >= 2")
    rows = [_pauli_row(n, z_qubits=(i, i + 1)) for i in range(n - 1)]
    return make_code_tables(np.array(rows), n=n, k=1)


def surface_code(d: int) -> CodeTables:
    """Planar surface code with n = d^2 + (d-1)^2 data qubits.

    Sites (r, c) of a (2d-1) x (2d-1) grid hold data qubits where r+c is
    even; X checks sit at (odd r, even c) and Z checks at (even r, odd c),
    each acting on its grid neighbours.
    """
    if d < 2:
        raise ValueError("surface code needs d >= 2")
    size = 2 * d - 1
    qubit_index = {}
    for r in range(size):
        for c in range(size):
            if (r + c) % 2 == 0:
                qubit_index[(r, c)] = len(qubit_index)
    n = len(qubit_index)

    def neighbours(r, c):
        for rr, cc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
            if (rr, cc) in qubit_index:
                yield qubit_index[(rr, cc)]

    rows = []
    for r in range(1, size, 2):          # X checks
        for c in range(0, size, 2):
            rows.append(_pauli_row(n, x_qubits=list(neighbours(r, c))))
    for r in range(0, size, 2):          # Z checks
        for c in range(1, size, 2):
            rows.append(_pauli_row(n, z_qubits=list(neighbours(r, c))))
    return make_code_tables(np.array(rows), n=n, k=1)


def rotated_surface_code(d: int) -> CodeTables:
    """Rotated surface code with n = d^2 data qubits on a d x d grid.

    Weight-4 plaquettes between grid vertices alternate X/Z in checkerboard
    fashion; weight-2 boundary checks fill alternating gaps along each edge
    so that every pair of checks overlaps on an even number of qubits.
    """
    if d < 2:
        raise ValueError("rotated surface code needs d >= 2")
    n = d * d

    def q(r, c):
        return r * d + c

    rows = []
    for r in range(d - 1):
        for c in range(d - 1):
            quad = [q(r, c), q(r, c + 1), q(r + 1, c), q(r + 1, c + 1)]
            if (r + c) % 2 == 0:
                rows.append(_pauli_row(n, x_qubits=quad))
            else:
                rows.append(_pauli_row(n, z_qubits=quad))
    for c in range(d - 1):
        if c % 2 == 1:   # top edge
            rows.append(_pauli_row(n, x_qubits=[q(0, c), q(0, c + 1)]))
        else:            # bottom edge
            rows.append(_pauli_row(n, x_qubits=[q(d - 1, c), q(d - 1, c + 1)]))
    for r in range(d - 1):
        if r % 2 == 0:   # left edge
            rows.append(_pauli_row(n, z_qubits=[q(r, 0), q(r + 1, 0)]))
        else:            # right edge
            rows.append(_pauli_row(n, z_qubits=[q(r, d - 1), q(r + 1, d - 1)]))
    return make_code_tables(np.array(rows), n=n, k=1)


def toric_code(d: int) -> CodeTables:
    """Toric code on a d x d periodic lattice: n = 2 d^2, k = 2.

    Qubits live on edges; vertex X checks and plaquette Z checks each have
    one dependent generator, so one of each is dropped to keep full rank.
    """
    if d < 2:
        raise ValueError("toric code needs d >= 2")
    n = 2 * d * d

    def hq(r, c):  # horizontal edge leaving vertex (r, c) rightwards
        return (r % d) * d + (c % d)

    def vq(r, c):  # vertical edge leaving vertex (r, c) downwards
        return d * d + (r % d) * d + (c % d)

    rows = []
    for r in range(d):
        for c in range(d):
            if (r, c) == (d - 1, d - 1):
                continue
            rows.append(_pauli_row(
                n, x_qubits=[hq(r, c), hq(r, c - 1), vq(r, c), vq(r - 1, c)]))
    for r in range(d):
        for c in range(d):
            if (r, c) == (d - 1, d - 1):
                continue
            rows.append(_pauli_row(
                n, z_qubits=[hq(r, c), hq(r + 1, c), vq(r, c), vq(r, c + 1)]))
    return make_code_tables(np.array(rows), n=n, k=2)


_KIND_BUILDERS = {
    "surface": surface_code,
    "rotated_surface": rotated_surface_code,
    "toric": toric_code,
    "repetition": repetition_code,
}


def build_code(kind: str, size: int) -> CodeTables:
    """Build a named code family member (surface / rotated_surface / toric /
    repetition) of the given size (distance, or qubit count for repetition)."""
    try:
        builder = _KIND_BUILDERS[kind]
    except KeyError:
        raise ValueError(
            f"unknown code kind {kind!r}; expected one of {sorted(_KIND_BUILDERS)}")
    return builder(size)


def build_code_from_spec(spec: str) -> CodeTables:
    """Build a code from a compact spec like ``surface3`` or a file path."""
    match = re.fullmatch(r"([a-z_]+)(\d+)", spec.strip())
    if match and match.group(1) in _KIND_BUILDERS:
        return build_code(match.group(1), int(match.group(2)))
    if os.path.exists(spec):
        return load_check_matrix(spec)
    raise ValueError(f"unrecognized code spec {spec!r} (not a family name or file)")


def puncture(code: CodeTables, remove: int, seed: int) -> CodeTables:
    """Drop ``remove`` uniformly random check rows, promoting them to logicals.

    The reduced code keeps n qubits with m' = m - remove checks and
    k' = k + remove logical qubits; all tables are rebuilt from scratch.
    """
    if not 0 <= remove < code.m:
        raise ValueError(f"remove must be in [0, m={code.m})")
    rng = np.random.default_rng(seed)
    drop = set(rng.choice(code.m, size=remove, replace=False).tolist())
    keep = [i for i in range(code.m) if i not in drop]
    return make_code_tables(code.h[keep], n=code.n, k=code.k + remove)


# ---------------------------------------------------------------------------
# Syndromes and coordinate conversion
# ---------------------------------------------------------------------------

def _check_pauli_arg(code: CodeTables, pauli) -> np.ndarray:
    p = gf2.as_bits(pauli)
    if p.shape[-1] != code.seq_len:
        raise LengthMismatchError(
            f"Pauli length {p.shape[-1]} != 2n = {code.seq_len}")
    return p


def syndrome(code: CodeTables, pauli) -> np.ndarray:
    """Syndrome bits gamma_i = <g_i, E>; accepts one vector or a batch."""
    p = _check_pauli_arg(code, pauli)
    return (p @ gf2.swap_halves(code.h).T) & 1


def els_bits(code: CodeTables, paulis) -> np.ndarray:
    """Convert Paulis to serialized [gamma, beta, alpha] bit rows."""
    p = _check_pauli_arg(code, paulis)
    probes = np.concatenate(
        [code.h, code.partner_swapped_logicals(), code.pure_errors], axis=0)
    return (p @ gf2.swap_halves(probes).T) & 1


def pauli_to_els(code: CodeTables, pauli) -> ElsConfig:
    """Coordinates of one error: gamma_i = <g_i,E>, alpha_i = <e_i,E>, and
    beta read through the partner logical (beta_xi = <l_zi, E>)."""
    seq = els_bits(code, gf2.as_bits(pauli).ravel())
    return ElsConfig.from_sequence(code, seq)


def els_sequence_to_pauli(code: CodeTables, seqs) -> np.ndarray:
    """Inverse conversion for serialized rows; accepts one row or a batch."""
    s = gf2.as_bits(seqs)
    if s.shape[-1] != code.seq_len:
        raise LengthMismatchError(
            f"sequence length {s.shape[-1]} != 2n = {code.seq_len}")
    table = np.concatenate([code.pure_errors, code.logicals, code.h], axis=0)
    return (s @ table) & 1


def els_to_pauli(code: CodeTables, config: ElsConfig) -> np.ndarray:
    """Multiply out e^gamma * l^beta * g^alpha to a single Pauli vector."""
    if (config.gamma.shape[0] != code.m or config.beta.shape[0] != 2 * code.k
            or config.alpha.shape[0] != code.m):
        raise LengthMismatchError(
            f"component lengths {(config.gamma.shape[0], config.beta.shape[0], config.alpha.shape[0])}"
            f" do not match (m, 2k, m) = {(code.m, 2 * code.k, code.m)}")
    return els_sequence_to_pauli(code, config.sequence())


# ---------------------------------------------------------------------------
# Parity-check exchange format
# ---------------------------------------------------------------------------

def parse_check_matrix(text: str) -> CodeTables:
    """Parse the plain-text parity-check format.

    First meaningful line is ``n k``; each following line is one check row of
    2n characters from {0,1} in (z|x) layout.  Blank lines and lines starting
    with ``#`` are ignored.
    """
    lines = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        lines.append(line)
    if not lines:
        raise BadFileError("empty parity-check file")
    head = lines[0].split()
    if len(head) != 2:
        raise BadFileError(f"header must be 'n k', got {lines[0]!r}")
    try:
        n, k = int(head[0]), int(head[1])
    except ValueError:
        raise BadFileError(f"non-integer header {lines[0]!r}")
    if n <= 0 or k < 0 or k >= n:
        raise BadFileError(f"invalid dimensions n={n}, k={k}")
    body = lines[1:]
    if len(body) != n - k:
        raise BadFileError(f"expected {n - k} check rows, found {len(body)}")
    rows = np.zeros((n - k, 2 * n), dtype=np.uint8)
    for i, line in enumerate(body):
        if len(line) != 2 * n or set(line) - {"0", "1"}:
            raise BadFileError(
                f"row {i} must be {2 * n} characters of 0/1, got {line!r}")
        rows[i] = np.frombuffer(line.encode(), dtype=np.uint8) - ord("0")
    if gf2.rank(rows) != n - k:
        raise RankDeficientError(
            f"loaded check rows have rank {gf2.rank(rows)} < m = {n - k}")
    try:
        return make_code_tables(rows, n=n, k=k)
    except ValueError as exc:
        raise BadFileError(str(exc))


def load_check_matrix(path: str) -> CodeTables:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_check_matrix(fh.read())


def format_check_matrix(code: CodeTables) -> str:
    lines = [f"{code.n} {code.k}"]
    lines += ["".join(str(int(b)) for b in row) for row in code.h]
    return "\n".join(lines) + "\n"


def save_check_matrix(code: CodeTables, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_check_matrix(code))
