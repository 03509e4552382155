"""Prime-field arithmetic, polynomial codes and their duals.

Vectors and matrices over GF(p) are plain ``numpy`` integer arrays with entries
reduced to ``[0, p)``.  All elimination is exact integer arithmetic.
"""

from __future__ import annotations

import functools
import itertools
import json
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import numpy.typing as npt

from .errors import CapExceeded, DomainError, FormatError, NotFoundError

FORMAT = "qss/1"
MAX_CODEWORDS = 10**6

IntArray = npt.NDArray[np.int64]


################################################################################
# scalar arithmetic


@functools.lru_cache(maxsize=None)
def is_prime(p: int) -> bool:
    """Deterministic trial-division primality test."""
    if p < 2:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    q = 3
    while q * q <= p:
        if p % q == 0:
            return False
        q += 2
    return True


def next_prime(n: int) -> int:
    """Smallest prime >= n."""
    q = max(n, 2)
    while not is_prime(q):
        q += 1
    return q


def check_modulus(p: int) -> int:
    if not isinstance(p, (int, np.integer)) or not is_prime(int(p)):
        raise DomainError(f"modulus {p!r} is not prime")
    return int(p)


def add(a: int, b: int, p: int) -> int:
    return (a + b) % p


def sub(a: int, b: int, p: int) -> int:
    return (a - b) % p


def mul(a: int, b: int, p: int) -> int:
    return (a * b) % p


def inv(a: int, p: int) -> int:
    """Multiplicative inverse of ``a`` modulo the prime ``p``."""
    a %= p
    if a == 0:
        raise DomainError(f"0 has no inverse mod {p}")
    return pow(a, p - 2, p)


def power(a: int, e: int, p: int) -> int:
    if e < 0:
        return pow(inv(a, p), -e, p)
    return pow(a % p, e, p)


################################################################################
# linear algebra


def as_matrix(rows: Any, p: int, ncols: int | None = None) -> IntArray:
    """Coerce ``rows`` to a 2-D int64 array reduced mod ``p``."""
    mat = np.array(rows, dtype=np.int64)
    if mat.size == 0:
        width = ncols if ncols is not None else (mat.shape[1] if mat.ndim == 2 else 0)
        return np.zeros((0, width), dtype=np.int64)
    if mat.ndim == 1:
        mat = mat.reshape(1, -1)
    if mat.ndim != 2:
        raise DomainError("matrix must be two-dimensional")
    return mat % p


def rref(matrix: Any, p: int) -> tuple[IntArray, list[int]]:
    """Reduced row echelon form over GF(p) and the list of pivot columns.

    Pivots are chosen as the first nonzero entry scanning columns left to right
    and rows top to bottom; zero rows are dropped from the result.
    """
    mat = as_matrix(matrix, p).copy()
    nrows, ncols = mat.shape
    pivots: list[int] = []
    row = 0
    for col in range(ncols):
        if row == nrows:
            break
        nonzero = np.nonzero(mat[row:, col])[0]
        if nonzero.size == 0:
            continue
        pivot_row = row + int(nonzero[0])
        if pivot_row != row:
            mat[[row, pivot_row]] = mat[[pivot_row, row]]
        mat[row] = (mat[row] * inv(int(mat[row, col]), p)) % p
        others = np.nonzero(mat[:, col])[0]
        for other in others:
            if other != row:
                mat[other] = (mat[other] - mat[other, col] * mat[row]) % p
        pivots.append(col)
        row += 1
    return mat[:row], pivots


def rank(matrix: Any, p: int) -> int:
    return len(rref(matrix, p)[1])


def nullspace(matrix: Any, p: int) -> IntArray:
    """Basis (as rows, in RREF) of ``{x : matrix @ x = 0 mod p}``."""
    mat = as_matrix(matrix, p)
    ncols = mat.shape[1]
    reduced, pivots = rref(mat, p)
    free = [c for c in range(ncols) if c not in pivots]
    basis = np.zeros((len(free), ncols), dtype=np.int64)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for r, pc in enumerate(pivots):
            basis[i, pc] = (-reduced[r, f]) % p
    if basis.shape[0] == 0:
        return basis
    return rref(basis, p)[0]


def in_row_space(vector: Any, rows: Any, p: int) -> bool:
    rows = as_matrix(rows, p, ncols=len(vector))
    vec = as_matrix(vector, p)
    return rank(np.vstack([rows, vec]), p) == rank(rows, p)


def same_row_space(a: Any, b: Any, p: int) -> bool:
    ra, _ = rref(a, p)
    rb, _ = rref(b, p)
    return ra.shape == rb.shape and bool(np.array_equal(ra, rb))


def solve(matrix: Any, rhs: Any, p: int) -> IntArray:
    """Solve the square system ``matrix @ x = rhs`` over GF(p)."""
    mat = as_matrix(matrix, p)
    n = mat.shape[0]
    if mat.shape != (n, n):
        raise DomainError("solve needs a square matrix")
    aug = np.hstack([mat, as_matrix(rhs, p).reshape(n, -1)])
    reduced, pivots = rref(aug, p)
    if pivots[:n] != list(range(n)):
        raise DomainError("singular system")
    return reduced[:n, n:].reshape(np.shape(rhs)) % p


def inverse_matrix(matrix: Any, p: int) -> IntArray:
    mat = as_matrix(matrix, p)
    return solve(mat, np.eye(mat.shape[0], dtype=np.int64), p)


################################################################################
# polynomials


def evaluate(coeffs: Sequence[int], x: int, p: int) -> int:
    """Evaluate ``sum coeffs[i] x^i`` mod p (Horner)."""
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % p
    return acc


def vandermonde(points: Sequence[int], degree: int, p: int) -> IntArray:
    """Rows ``(1, x, x^2, ..., x^degree)`` for each point."""
    pts = np.array(points, dtype=np.int64) % p
    out = np.ones((len(pts), degree + 1), dtype=np.int64)
    for j in range(1, degree + 1):
        out[:, j] = (out[:, j - 1] * pts) % p
    return out


def interpolate(points: Iterable[tuple[int, int]], p: int) -> IntArray:
    """Coefficients (lowest degree first) of the unique polynomial of degree
    ``< len(points)`` through the given ``(alpha, value)`` pairs."""
    check_modulus(p)
    pts = list(points)
    alphas = [a % p for a, _ in pts]
    if len(set(alphas)) != len(alphas):
        raise DomainError(f"repeated evaluation point in {alphas}")
    if not pts:
        return np.zeros(0, dtype=np.int64)
    values = np.array([v for _, v in pts], dtype=np.int64) % p
    return solve(vandermonde(alphas, len(pts) - 1, p), values, p)


################################################################################
# linear codes


@dataclass(frozen=True)
class LinearCode:
    """Linear code over GF(p) given by a full-rank generator matrix."""

    p: int
    n: int
    generator: IntArray = field(repr=False)
    label: str | None = None

    def __post_init__(self) -> None:
        check_modulus(self.p)
        gen = as_matrix(self.generator, self.p, ncols=self.n)
        if gen.shape[1] != self.n:
            raise DomainError(f"generator rows have length {gen.shape[1]}, expected {self.n}")
        if rank(gen, self.p) != gen.shape[0]:
            raise DomainError("generator matrix is not of full row rank")
        gen.setflags(write=False)
        object.__setattr__(self, "generator", gen)

    @property
    def dimension(self) -> int:
        return int(self.generator.shape[0])

    def codewords(self) -> IntArray:
        """All ``p**dimension`` codewords, as rows."""
        count = self.p**self.dimension
        if count > MAX_CODEWORDS:
            raise CapExceeded(f"{count} codewords exceed the enumeration cap {MAX_CODEWORDS}")
        if self.dimension == 0:
            return np.zeros((1, self.n), dtype=np.int64)
        msgs = np.indices((self.p,) * self.dimension).reshape(self.dimension, -1).T
        return (msgs @ self.generator) % self.p

    def contains(self, vector: Any) -> bool:
        return in_row_space(vector, self.generator, self.p)

    def to_dict(self) -> dict[str, Any]:
        return {
            "format": FORMAT,
            "kind": "code",
            "p": self.p,
            "n": self.n,
            "generator": self.generator.tolist(),
            "label": self.label,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> LinearCode:
        try:
            return cls(int(data["p"]), int(data["n"]), data["generator"], data.get("label"))
        except (KeyError, TypeError) as exc:
            raise FormatError(f"malformed code descriptor: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> LinearCode:
        return cls.from_dict(json.loads(text))


def default_points(n: int) -> tuple[int, ...]:
    return tuple(range(n))


def build_poly_code(
    n: int, r: int, p: int, alphas: Sequence[int] | None = None
) -> LinearCode:
    """The code ``D_r``: evaluations of polynomials of degree ``<= r`` at ``alphas``.

    ``r = -1`` gives the zero code.
    """
    check_modulus(p)
    if p < n:
        raise DomainError(f"field size p={p} is smaller than code length n={n}")
    alphas = default_points(n) if alphas is None else tuple(int(a) % p for a in alphas)
    if len(alphas) != n or len(set(alphas)) != n:
        raise DomainError(f"need {n} distinct evaluation points, got {alphas}")
    if not -1 <= r < n:
        raise DomainError(f"degree bound r={r} outside [-1, n)")
    gen = vandermonde(alphas, r, p).T if r >= 0 else np.zeros((0, n), dtype=np.int64)
    return LinearCode(p, n, gen, label=f"D_{r}")


def dual_code(code: LinearCode) -> LinearCode:
    """Words with vanishing inner product against every codeword (RREF rows)."""
    label = f"{code.label}^perp" if code.label else None
    return LinearCode(code.p, code.n, nullspace(code.generator, code.p), label=label)


def min_distance(code: LinearCode) -> int:
    """Minimum Hamming weight over nonzero codewords, by exhaustive enumeration.

    The zero code is assigned distance ``n + 1``, which keeps the Singleton
    bound ``d = n - dim + 1`` exact for it.
    """
    if code.dimension == 0:
        return code.n + 1
    words = code.codewords()
    weights = np.count_nonzero(words, axis=1)
    return int(weights[weights > 0].min())


def support_codeword(code: LinearCode, support: Iterable[int]) -> IntArray:
    """A nonzero codeword vanishing outside ``support``.

    The message vector is the first null-space basis vector of the off-support
    columns, scaled so its last nonzero entry is 1.
    """
    support = sorted(set(support))
    outside = [j for j in range(code.n) if j not in support]
    constraints = code.generator[:, outside].T
    if code.dimension == 0:
        raise NotFoundError("the zero code has no nonzero codeword")
    msgs = nullspace(constraints, code.p) if outside else np.eye(code.dimension, dtype=np.int64)
    if msgs.shape[0] == 0:
        raise NotFoundError(f"no nonzero codeword of {code.label or 'code'} is supported in {support}")
    return (normalize_last(msgs[0], code.p) @ code.generator) % code.p


def normalize_last(vector: IntArray, p: int) -> IntArray:
    """Scale so the last nonzero entry equals 1."""
    nz = np.nonzero(vector)[0]
    if nz.size == 0:
        return vector
    return (vector * inv(int(vector[nz[-1]]), p)) % p


@dataclass(frozen=True)
class LemmaRows:
    """Distinguished rows for the classical-secret construction.

    ``x_basis`` spans ``D_{r-1}^perp``; its leading rows span ``D_r^perp`` and
    its last row is ``R``.  ``z_basis`` spans ``D_s``; its leading rows span
    ``D_{s-1}`` and its last row is ``S``.
    """

    n: int
    r: int
    s: int
    p: int
    R: IntArray
    S: IntArray
    x_basis: IntArray
    z_basis: IntArray

    @property
    def r_index(self) -> int:
        return self.x_basis.shape[0] - 1

    @property
    def s_index(self) -> int:
        return self.z_basis.shape[0] - 1


def lemma_rows(n: int, r: int, s: int, p: int, alphas: Sequence[int] | None = None) -> LemmaRows:
    """Choose ``R in D_{r-1}^perp \\ D_r^perp`` and ``S in D_s \\ D_{s-1}``.

    ``R`` is the first RREF row of ``D_{r-1}^perp`` rescaled so its last nonzero
    entry is 1; it has weight ``r + 1``, below the distance of ``D_r^perp``, so it
    cannot lie there.  ``S`` is the evaluation row of ``x^s``.
    """
    check_modulus(p)
    if s != n - r - 1:
        raise DomainError(f"need s = n - r - 1, got n={n}, r={r}, s={s}")
    if 2 * r < n:
        raise DomainError(f"need 2r >= n, got n={n}, r={r}")
    if p < n:
        raise DomainError(f"need p >= n, got p={p}, n={n}")
    big = dual_code(build_poly_code(n, r - 1, p, alphas))
    small = dual_code(build_poly_code(n, r, p, alphas))
    R = normalize_last(big.generator[0].copy(), p)
    if in_row_space(R, small.generator, p):  # pragma: no cover - excluded by MDS distance
        raise DomainError("failed to find a row outside D_r^perp")
    x_basis = np.vstack([small.generator, R])
    d_s = build_poly_code(n, s, p, alphas)
    z_basis = d_s.generator.copy()
    S = z_basis[-1].copy()
    for arr in (R, S, x_basis, z_basis):
        arr.setflags(write=False)
    return LemmaRows(n, r, s, p, R, S, x_basis, z_basis)


def combination_supported_in(
    basis: IntArray, support: Iterable[int], target_row: int, p: int
) -> tuple[IntArray, IntArray]:
    """Coefficients ``lam`` with ``lam @ basis`` supported in ``support`` and
    ``lam[target_row] == 1``; returns ``(lam, lam @ basis)``."""
    support = set(support)
    n = basis.shape[1]
    outside = [j for j in range(n) if j not in support]
    if outside:
        sols = nullspace(basis[:, outside].T, p)
    else:
        sols = np.eye(basis.shape[0], dtype=np.int64)
    for lam in sols:
        if lam[target_row] % p:
            lam = (lam * inv(int(lam[target_row]), p)) % p
            return lam, (lam @ basis) % p
    raise NotFoundError(f"no combination supported in {sorted(support)} uses row {target_row}")


def all_subsets(n: int, size: int) -> Iterable[tuple[int, ...]]:
    return itertools.combinations(range(n), size)
