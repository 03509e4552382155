"""Generalized Pauli words on qupits and CSS stabilizers.

A word is ``w^t X^{a_1} Z^{b_1} (x) ... (x) X^{a_n} Z^{b_n}`` with ``w = exp(2 pi i/p)``,
``X|j> = |j+1>`` and ``Z|j> = w^j |j>``.  Words are kept in X-before-Z normal form;
moving ``Z^b`` to the right of ``X^c`` costs ``w^{b c}``, so every phase stays a
p-th root of unity.

Matrices use mixed-radix indexing with the first qupit most significant.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import numpy.typing as npt

from . import gfcodes
from .errors import CapExceeded, CommutationError, DomainError

MAX_MATRIX_DIM = 10**4


def omega(p: int) -> complex:
    return complex(np.exp(2j * np.pi / p))


def _vec(values: Any, p: int, n: int) -> tuple[int, ...]:
    arr = np.zeros(n, dtype=np.int64) if values is None else np.asarray(values, dtype=np.int64)
    if arr.shape != (n,):
        raise DomainError(f"exponent vector {values!r} does not have length {n}")
    return tuple(int(v) % p for v in arr)


@dataclass(frozen=True)
class PauliWord:
    p: int
    x: tuple[int, ...]
    z: tuple[int, ...]
    phase: int = 0

    def __post_init__(self) -> None:
        gfcodes.check_modulus(self.p)
        n = len(self.x)
        object.__setattr__(self, "x", _vec(self.x, self.p, n))
        object.__setattr__(self, "z", _vec(self.z, self.p, n))
        object.__setattr__(self, "phase", int(self.phase) % self.p)

    @classmethod
    def identity(cls, p: int, n: int) -> PauliWord:
        return cls(p, (0,) * n, (0,) * n)

    @classmethod
    def x_type(cls, p: int, row: Sequence[int], phase: int = 0) -> PauliWord:
        return cls(p, tuple(row), (0,) * len(row), phase)

    @classmethod
    def z_type(cls, p: int, row: Sequence[int], phase: int = 0) -> PauliWord:
        return cls(p, (0,) * len(row), tuple(row), phase)

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.n) if self.x[i] or self.z[i])

    @property
    def weight(self) -> int:
        return len(self.support)

    def is_identity(self) -> bool:
        return not any(self.x) and not any(self.z)

    def __mul__(self, other: PauliWord) -> PauliWord:
        return pauli_mul(self, other)

    def __pow__(self, exponent: int) -> PauliWord:
        return pauli_pow(self, exponent)

    def inverse(self) -> PauliWord:
        # (X^a Z^b)^{-1} = Z^{-b} X^{-a} = w^{a.b} X^{-a} Z^{-b}
        p = self.p
        dot = sum(a * b for a, b in zip(self.x, self.z))
        return PauliWord(p, tuple(-a for a in self.x), tuple(-b for b in self.z), dot - self.phase)

    def with_phase(self, phase: int) -> PauliWord:
        return PauliWord(self.p, self.x, self.z, phase)

    def restrict(self, sites: Sequence[int]) -> PauliWord:
        """The tensor factors on ``sites`` (phase kept); all other factors must be trivial."""
        rest = [i for i in self.support if i not in sites]
        if rest:
            raise DomainError(f"word acts on sites {rest} outside {list(sites)}")
        return PauliWord(self.p, tuple(self.x[i] for i in sites), tuple(self.z[i] for i in sites), self.phase)

    def __str__(self) -> str:
        xs = ",".join(map(str, self.x))
        zs = ",".join(map(str, self.z))
        return f"w^{self.phase} X[{xs}] Z[{zs}]"

    @classmethod
    def parse(cls, text: str, p: int) -> PauliWord:
        """Inverse of ``str``: ``"w^t X[a1,..,an] Z[b1,..,bn]"``."""
        try:
            head, xpart, zpart = text.split()
            if not head.startswith("w^") or not xpart.startswith("X[") or not zpart.startswith("Z["):
                raise ValueError(text)
            t = int(head[2:])
            xs = [int(v) for v in xpart[2:-1].split(",") if v]
            zs = [int(v) for v in zpart[2:-1].split(",") if v]
        except ValueError as exc:
            raise DomainError(f"cannot parse Pauli word {text!r}") from exc
        return cls(p, tuple(xs), tuple(zs), t)


def _check_compatible(a: PauliWord, b: PauliWord) -> None:
    if a.p != b.p or a.n != b.n:
        raise DomainError(f"incompatible words: (p={a.p}, n={a.n}) vs (p={b.p}, n={b.n})")


def pauli_mul(a: PauliWord, b: PauliWord) -> PauliWord:
    """Normal form of the product ``a b``."""
    _check_compatible(a, b)
    cross = sum(bz * cx for bz, cx in zip(a.z, b.x))
    return PauliWord(
        a.p,
        tuple(u + v for u, v in zip(a.x, b.x)),
        tuple(u + v for u, v in zip(a.z, b.z)),
        a.phase + b.phase + cross,
    )


def pauli_pow(word: PauliWord, exponent: int) -> PauliWord:
    if exponent < 0:
        return pauli_pow(word.inverse(), -exponent)
    out = PauliWord.identity(word.p, word.n)
    base = word
    while exponent:
        if exponent & 1:
            out = pauli_mul(out, base)
        base = pauli_mul(base, base)
        exponent >>= 1
    return out


def symplectic(a: PauliWord, b: PauliWord) -> int:
    """Exponent ``e`` with ``b a = w^e a b``; zero iff the words commute."""
    _check_compatible(a, b)
    return (sum(u * v for u, v in zip(a.x, b.z)) - sum(u * v for u, v in zip(a.z, b.x))) % a.p


def commutes(a: PauliWord, b: PauliWord) -> bool:
    return symplectic(a, b) == 0


def monomial(word: PauliWord) -> tuple[npt.NDArray[np.int64], npt.NDArray[np.int64]]:
    """Sparse action: column ``j`` maps to row ``rows[j]`` with phase ``w^{exps[j]}``."""
    p, n = word.p, word.n
    digits = np.indices((p,) * n).reshape(n, -1) if n else np.zeros((0, 1), dtype=np.int64)
    x = np.array(word.x, dtype=np.int64).reshape(n, 1)
    z = np.array(word.z, dtype=np.int64).reshape(n, 1)
    shifted = (digits + x) % p
    weights = p ** np.arange(n - 1, -1, -1, dtype=np.int64)
    rows = weights @ shifted if n else np.zeros(1, dtype=np.int64)
    exps = (word.phase + (z * digits).sum(axis=0)) % p
    return rows.astype(np.int64), exps.astype(np.int64)


def pauli_matrix(word: PauliWord) -> npt.NDArray[np.complex128]:
    dim = word.p**word.n
    if dim > MAX_MATRIX_DIM:
        raise CapExceeded(f"Pauli matrix of dimension {dim} exceeds cap {MAX_MATRIX_DIM}")
    rows, exps = monomial(word)
    roots = np.exp(2j * np.pi * np.arange(word.p) / word.p)
    mat = np.zeros((dim, dim), dtype=np.complex128)
    mat[rows, np.arange(dim)] = roots[exps]
    return mat


def all_words(p: int, n: int) -> Iterator[PauliWord]:
    """Every phase-free word on ``n`` qupits (``p**(2n)`` of them)."""
    for xs in itertools.product(range(p), repeat=n):
        for zs in itertools.product(range(p), repeat=n):
            yield PauliWord(p, xs, zs)


def pauli_spectrum(rho: npt.NDArray[np.complex128], p: int, n: int) -> npt.NDArray[np.complex128]:
    """``out[a, b] = tr(X^a Z^b rho)`` for every pair of flattened exponent vectors.

    For a fixed shift ``a`` the trace is a discrete Fourier transform of the
    shifted diagonal ``rho[j, j + a]``, so the whole table costs one FFT per shift.
    """
    dim = p**n
    rho = np.asarray(rho)
    if rho.shape != (dim, dim):
        raise DomainError(f"operator shape {rho.shape} does not match {n} qupits of dimension {p}")
    if n == 0:
        return rho.reshape(1, 1).astype(np.complex128)
    digits = np.indices((p,) * n).reshape(n, -1)
    weights = p ** np.arange(n - 1, -1, -1, dtype=np.int64)
    # shifted[a, j] = index of (j + a)
    shifted = weights @ ((digits[:, None, :] + digits[:, :, None]) % p).reshape(n, -1)
    shifted = shifted.reshape(dim, dim)
    diag = rho[np.arange(dim)[None, :], shifted]
    axes = tuple(range(1, n + 1))
    coeffs = np.fft.ifftn(diag.reshape((dim,) + (p,) * n), axes=axes) * dim
    return coeffs.reshape(dim, dim)


################################################################################
# stabilizers


@dataclass(frozen=True)
class Stabilizer:
    """Abelian group generated by phased words; the code is their joint +1 eigenspace.

    A generator ``w^{-t} g`` fixes exactly the states on which ``g`` has eigenvalue
    ``w^t``.
    """

    p: int
    n: int
    generators: tuple[PauliWord, ...] = field(default=())

    def __post_init__(self) -> None:
        gens = tuple(self.generators)
        object.__setattr__(self, "generators", gens)
        for g in gens:
            if g.p != self.p or g.n != self.n:
                raise DomainError("generator does not match stabilizer (p, n)")
        for i, j in itertools.combinations(range(len(gens)), 2):
            if not commutes(gens[i], gens[j]):
                raise CommutationError(f"generators {i} ({gens[i]}) and {j} ({gens[j]}) do not commute")
        vectors = [list(g.x) + list(g.z) for g in gens]
        if gens and gfcodes.rank(vectors, self.p) != len(gens):
            raise DomainError("stabilizer generators are not independent")
        for i, g in enumerate(gens):
            if not pauli_pow(g, self.p) == PauliWord.identity(self.p, self.n):
                raise DomainError(f"generator {i} ({g}) has order larger than p")

    @property
    def code_dimension(self) -> int:
        return self.p ** (self.n - len(self.generators))

    def elements(self) -> Iterator[PauliWord]:
        """All ``p**len(generators)`` group elements, last generator's exponent fastest."""
        words = [PauliWord.identity(self.p, self.n)]
        for g in reversed(self.generators):
            powers = [PauliWord.identity(self.p, self.n)]
            for _ in range(self.p - 1):
                powers.append(pauli_mul(powers[-1], g))
            words = [pauli_mul(gp, w) for gp in powers for w in words]
        yield from words


def css_stabilizer(
    x_checks: Any,
    z_checks: Any,
    x_phases: Sequence[int] | None = None,
    z_phases: Sequence[int] | None = None,
    p: int = 2,
) -> Stabilizer:
    """Stabilizer with X-type generators from ``x_checks`` rows and Z-type from ``z_checks``.

    Phase ``t`` on a row asks for eigenvalue ``w^t`` of that row's word.
    """
    gfcodes.check_modulus(p)
    xs = gfcodes.as_matrix(x_checks, p)
    zs = gfcodes.as_matrix(z_checks, p)
    n = xs.shape[1] if xs.size else zs.shape[1]
    xs = xs.reshape(-1, n)
    zs = zs.reshape(-1, n)
    x_phases = [0] * len(xs) if x_phases is None else list(x_phases)
    z_phases = [0] * len(zs) if z_phases is None else list(z_phases)
    if len(x_phases) != len(xs) or len(z_phases) != len(zs):
        raise DomainError("one phase per check row is required")
    for i, xr in enumerate(xs):
        for j, zr in enumerate(zs):
            if int(xr @ zr) % p:
                raise CommutationError(
                    f"X-check row {i} {xr.tolist()} and Z-check row {j} {zr.tolist()} "
                    f"have inner product {int(xr @ zr) % p} != 0 mod {p}"
                )
    gens = [PauliWord.x_type(p, xr, -t) for xr, t in zip(xs, x_phases)]
    gens += [PauliWord.z_type(p, zr, -t) for zr, t in zip(zs, z_phases)]
    return Stabilizer(p, n, tuple(gens))


def stabilizer_sum(stab: Stabilizer) -> npt.NDArray[np.complex128]:
    """``sum_{M in S} M`` as a dense matrix, accumulated from monomial actions."""
    dim = stab.p**stab.n
    if dim > MAX_MATRIX_DIM:
        raise CapExceeded(f"stabilizer space dimension {dim} exceeds cap {MAX_MATRIX_DIM}")
    roots = np.exp(2j * np.pi * np.arange(stab.p) / stab.p)
    out = np.zeros((dim, dim), dtype=np.complex128)
    cols = np.arange(dim)
    for word in stab.elements():
        rows, exps = monomial(word)
        out[rows, cols] += roots[exps]
    return out


def stabilizer_projector(stab: Stabilizer) -> npt.NDArray[np.complex128]:
    """Trace-one mixture over the code space: ``(1/p^n) sum_{M in S} M``."""
    return stabilizer_sum(stab) / stab.p**stab.n
