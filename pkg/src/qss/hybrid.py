"""Classical secrets carried by quantum shares: two pits in one qupit per share.

For ``n <= 2k - 2`` and prime ``p >= n`` the construction takes ``r = k - 1``
and ``s = n - r - 1`` and builds the CSS stabilizer whose X-type generators
span ``D_{r-1}^perp`` and whose Z-type generators span ``D_s``.  Two rows are
distinguished: ``R`` (X side, outside ``D_r^perp``) and ``S`` (Z side, outside
``D_{s-1}``).  The secret ``(a, b)`` is the pair of eigenvalues ``w^a`` of
``R`` and ``w^b`` of ``S``; every other generator has eigenvalue 1.  The
encoding is the uniform mixture over that eigenspace.

``k = n = 2`` with ``p = 2`` gives the four Bell states.  For ``p = 2`` the
phase ``w = -1`` is real and every formula below still applies.
"""

from __future__ import annotations

import cmath
import json
import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import numpy.typing as npt

from . import gfcodes, pauli, qsim
from .errors import ConstructionError, DomainError, FormatError, NotFoundError
from .pauli import PauliWord, Stabilizer
from .qsim import DensityMatrix

FORMAT = "qss/1"
ROOT_TOL = 1e-6
MIN_MODULUS = 0.99


@dataclass(frozen=True)
class HybridScheme:
    p: int
    n: int
    k: int
    x_checks: npt.NDArray[np.int64] = field(repr=False)
    z_checks: npt.NDArray[np.int64] = field(repr=False)
    row_r_index: int
    row_s_index: int

    @property
    def r(self) -> int:
        return self.k - 1

    @property
    def s(self) -> int:
        return self.n - self.r - 1

    @property
    def R(self) -> npt.NDArray[np.int64]:
        return self.x_checks[self.row_r_index]

    @property
    def S(self) -> npt.NDArray[np.int64]:
        return self.z_checks[self.row_s_index]

    @property
    def n_generators(self) -> int:
        return len(self.x_checks) + len(self.z_checks)

    @property
    def is_pure(self) -> bool:
        return 2 * self.r == self.n

    def stabilizer(self, a: int = 0, b: int = 0) -> Stabilizer:
        xp = [0] * len(self.x_checks)
        zp = [0] * len(self.z_checks)
        xp[self.row_r_index] = a
        zp[self.row_s_index] = b
        return pauli.css_stabilizer(self.x_checks, self.z_checks, xp, zp, self.p)

    def table(self) -> str:
        """Generator table: one row per generator, phase label on R and S."""
        rows = []
        for i, row in enumerate(self.x_checks):
            rows.append(("w^a" if i == self.row_r_index else "", [_power("X", v) for v in row]))
        for j, row in enumerate(self.z_checks):
            rows.append(("w^b" if j == self.row_s_index else "", [_power("Z", v) for v in row]))
        width = max(len(cell) for _, cells in rows for cell in cells)
        lines = [f"{label:>4} " + " ".join(cell.ljust(width) for cell in cells) for label, cells in rows]
        return "\n".join(line.rstrip() for line in lines)

    def to_dict(self) -> dict[str, Any]:
        return {
            "format": FORMAT,
            "kind": "hybrid",
            "p": self.p,
            "n": self.n,
            "k": self.k,
            "xChecks": self.x_checks.tolist(),
            "zChecks": self.z_checks.tolist(),
            "rowR_index": self.row_r_index,
            "rowS_index": self.row_s_index,
        }

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> HybridScheme:
        try:
            if data.get("format") != FORMAT or data.get("kind") != "hybrid":
                raise FormatError(f"not a {FORMAT} hybrid descriptor")
            p, n, k = int(data["p"]), int(data["n"]), int(data["k"])
            xs = gfcodes.as_matrix(data["xChecks"], p, n)
            zs = gfcodes.as_matrix(data["zChecks"], p, n)
            ri, si = int(data["rowR_index"]), int(data["rowS_index"])
        except FormatError:
            raise
        except (KeyError, TypeError, ValueError, DomainError) as exc:
            raise FormatError(f"malformed hybrid descriptor: {exc}") from exc
        if not (0 <= ri < len(xs) and 0 <= si < len(zs)):
            raise FormatError("row indices out of range")
        _check_parameters(k, n, p)
        return cls(p, n, k, xs, zs, ri, si)

    @classmethod
    def from_json(cls, text: str) -> HybridScheme:
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def _power(letter: str, e: int) -> str:
    return "I" if e == 0 else letter if e == 1 else f"{letter}^{e}"


def _check_parameters(k: int, n: int, p: int) -> None:
    if k > n:
        raise ConstructionError(f"hybrid scheme requires k <= n, got k={k}, n={n}")
    if n > 2 * k - 2:
        raise ConstructionError(f"hybrid scheme requires n <= 2k-2, got n={n}, 2k-2={2 * k - 2}")
    if not gfcodes.is_prime(p):
        raise ConstructionError(f"field size p={p} is not prime")
    if p < n:
        raise ConstructionError(f"hybrid scheme requires p >= n, got p={p}, n={n}")


def build_hybrid(k: int, n: int, p: int | None = None) -> HybridScheme:
    p = gfcodes.next_prime(max(n, 2)) if p is None else int(p)
    _check_parameters(k, n, p)
    r = k - 1
    rows = gfcodes.lemma_rows(n, r, n - r - 1, p)
    scheme = HybridScheme(p, n, k, rows.x_basis.copy(), rows.z_basis.copy(), rows.r_index, rows.s_index)
    scheme.stabilizer()  # commutation and independence
    return scheme


def _check_pits(h: HybridScheme, a: int, b: int) -> None:
    for name, v in (("a", a), ("b", b)):
        if not (isinstance(v, (int, np.integer)) and 0 <= v < h.p):
            raise DomainError(f"classical pit {name}={v!r} is not in [0, {h.p})")


def encode_classical(h: HybridScheme, a: int, b: int) -> DensityMatrix:
    """``rho(ab) = (1/p^n) sum_{M in S(ab)} M``."""
    _check_pits(h, a, b)
    rho = pauli.stabilizer_projector(h.stabilizer(a, b))
    return DensityMatrix((h.p,) * h.n, rho)


@dataclass(frozen=True)
class Readout:
    coords: tuple[int, ...]
    word_a: PauliWord
    coeff_a: int
    word_b: PauliWord
    coeff_b: int


def find_readout_words(h: HybridScheme, coords: Iterable[int]) -> Readout:
    """Stabilizer elements supported in ``coords`` containing ``R`` (resp. ``S``)."""
    coords = tuple(sorted(set(int(c) for c in coords)))
    if any(not 0 <= c < h.n for c in coords):
        raise DomainError(f"coordinates {coords} out of range for n={h.n}")
    if len(coords) < h.k:
        raise NotFoundError(f"need at least k={h.k} coordinates, got {len(coords)}")
    lam_x, row_x = gfcodes.combination_supported_in(h.x_checks, coords, h.row_r_index, h.p)
    lam_z, row_z = gfcodes.combination_supported_in(h.z_checks, coords, h.row_s_index, h.p)
    return Readout(
        coords,
        PauliWord.x_type(h.p, row_x),
        int(lam_x[h.row_r_index]),
        PauliWord.z_type(h.p, row_z),
        int(lam_z[h.row_s_index]),
    )


def root_index(value: complex, p: int, tol: float = ROOT_TOL) -> int:
    """``e`` with ``value = w^e``, by nearest-root rounding."""
    if abs(value) < MIN_MODULUS:
        raise DomainError(f"expectation {value:.6g} has modulus {abs(value):.6g} < {MIN_MODULUS}: state is not a valid codeword")
    turns = cmath.phase(value) * p / (2 * math.pi)
    e = round(turns)
    if abs(turns - e) * 2 * math.pi / p > tol:
        raise DomainError(f"expectation phase {cmath.phase(value):.9g} is not within {tol} of a {p}-th root of unity")
    return e % p


def reconstruct_classical(h: HybridScheme, coords: Iterable[int], rho_t: DensityMatrix) -> tuple[int, int]:
    """Read ``(a, b)`` from the reduced state of ``coords`` (in increasing order)."""
    ro = find_readout_words(h, coords)
    if rho_t.dims != (h.p,) * len(ro.coords):
        raise DomainError(f"reduced state layout {rho_t.dims} does not match {len(ro.coords)} qupits")
    out = []
    for word, coeff in ((ro.word_a, ro.coeff_a), (ro.word_b, ro.coeff_b)):
        local = word.restrict(ro.coords)
        value = qsim.expectation(rho_t, pauli.pauli_matrix(local))
        out.append(gfcodes.mul(gfcodes.inv(coeff, h.p), root_index(value, h.p), h.p))
    return out[0], out[1]


def classical_share_bound(h: HybridScheme) -> int:
    """Share dimension any purely classical scheme would need: the secret size ``p^2``."""
    return h.p**2
