"""Dense states on a tensor product of small subsystems.

Basis index ``j`` of a layout ``dims = (d_0, ..., d_{m-1})`` is row-major mixed
radix with subsystem 0 most significant.  No operation mutates its inputs.

Size caps: state vectors are limited to ``2**14`` amplitudes and dense density
matrices to ``2**12`` rows.  Setting ``QSS_MAX_DIM`` replaces both limits.
"""

from __future__ import annotations

import json
import math
import os
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from typing import Any, Union

import numpy as np
import numpy.typing as npt

from .errors import CapExceeded, DomainError, FormatError
from .pauli import PauliWord, pauli_matrix

FORMAT = "qss/1"
TOL = 1e-9
DEFAULT_VECTOR_CAP = 2**14
DEFAULT_DENSITY_CAP = 2**12

ComplexArray = npt.NDArray[np.complex128]


def vector_cap() -> int:
    env = os.environ.get("QSS_MAX_DIM")
    return int(env) if env else DEFAULT_VECTOR_CAP


def density_cap() -> int:
    env = os.environ.get("QSS_MAX_DIM")
    return int(env) if env else DEFAULT_DENSITY_CAP


def check_vector_dim(dim: int) -> None:
    if dim > vector_cap():
        raise CapExceeded(f"state dimension {dim} exceeds cap {vector_cap()} (set QSS_MAX_DIM to raise)")


def check_density_dim(dim: int) -> None:
    if dim > density_cap():
        raise CapExceeded(f"density matrix dimension {dim} exceeds cap {density_cap()} (set QSS_MAX_DIM to raise)")


def _dims(dims: Iterable[int]) -> tuple[int, ...]:
    out = tuple(int(d) for d in dims)
    if any(d < 1 for d in out):
        raise DomainError(f"subsystem dimensions must be positive: {out}")
    return out


@dataclass(frozen=True)
class StateVector:
    dims: tuple[int, ...]
    amplitudes: ComplexArray = field(repr=False)

    def __post_init__(self) -> None:
        dims = _dims(self.dims)
        dim = math.prod(dims)
        check_vector_dim(dim)
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amps.shape != (dim,):
            raise DomainError(f"{amps.size} amplitudes do not fit layout {dims}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1) > TOL:
            raise DomainError(f"state norm {norm} differs from 1")
        amps.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @classmethod
    def basis(cls, dims: Sequence[int], index: int | Sequence[int]) -> StateVector:
        dims = _dims(dims)
        if not isinstance(index, (int, np.integer)):
            index = int(np.ravel_multi_index(tuple(index), dims))
        amps = np.zeros(math.prod(dims), dtype=np.complex128)
        amps[index] = 1
        return cls(dims, amps)

    @classmethod
    def random(cls, dims: Sequence[int], rng: np.random.Generator) -> StateVector:
        dims = _dims(dims)
        dim = math.prod(dims)
        amps = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        return cls(dims, amps / np.linalg.norm(amps))

    def tensor(self) -> ComplexArray:
        return self.amplitudes.reshape(self.dims)

    def kron(self, other: StateVector) -> StateVector:
        return StateVector(self.dims + other.dims, np.kron(self.amplitudes, other.amplitudes))

    def density(self) -> DensityMatrix:
        return DensityMatrix(self.dims, np.outer(self.amplitudes, self.amplitudes.conj()))

    def to_dict(self) -> dict[str, Any]:
        return {
            "format": FORMAT,
            "kind": "state",
            "dims": list(self.dims),
            "amplitudes": [[_fmt(a.real), _fmt(a.imag)] for a in self.amplitudes],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> StateVector:
        try:
            amps = np.array([complex(float(re), float(im)) for re, im in data["amplitudes"]])
            return cls(tuple(data["dims"]), amps)
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"malformed state dump: {exc}") from exc


def _is_psd(mat: ComplexArray) -> bool:
    # a Cholesky factor of mat + TOL*I exists iff every eigenvalue exceeds -TOL
    try:
        np.linalg.cholesky(mat + TOL * np.eye(mat.shape[0]))
    except np.linalg.LinAlgError:
        return False
    return True


@dataclass(frozen=True)
class DensityMatrix:
    dims: tuple[int, ...]
    matrix: ComplexArray = field(repr=False)

    def __post_init__(self) -> None:
        dims = _dims(self.dims)
        dim = math.prod(dims)
        check_density_dim(dim)
        mat = np.array(self.matrix, dtype=np.complex128)
        if mat.shape != (dim, dim):
            raise DomainError(f"matrix shape {mat.shape} does not fit layout {dims}")
        if np.abs(mat - mat.conj().T).max(initial=0) > TOL:
            raise DomainError("density matrix is not Hermitian")
        if abs(np.trace(mat) - 1) > TOL:
            raise DomainError(f"density matrix has trace {np.trace(mat).real}")
        if dim and not _is_psd(mat):
            raise DomainError("density matrix is not positive semidefinite")
        mat.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def maximally_mixed(cls, dims: Sequence[int]) -> DensityMatrix:
        dims = _dims(dims)
        dim = math.prod(dims)
        return cls(dims, np.eye(dim) / dim)

    def to_dict(self) -> dict[str, Any]:
        return {
            "format": FORMAT,
            "kind": "density",
            "dims": list(self.dims),
            "matrix": [[[_fmt(a.real), _fmt(a.imag)] for a in row] for row in self.matrix],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> DensityMatrix:
        try:
            mat = np.array([[complex(float(re), float(im)) for re, im in row] for row in data["matrix"]])
            return cls(tuple(data["dims"]), mat)
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"malformed density dump: {exc}") from exc


State = Union[StateVector, DensityMatrix]


def _fmt(x: float) -> float:
    # 17 significant digits round-trips a double exactly
    return float(f"{x:.17g}")


def dumps(state: State) -> str:
    return json.dumps(state.to_dict())


def loads(text: str) -> State:
    data = json.loads(text)
    kind = data.get("kind")
    if kind == "state":
        return StateVector.from_dict(data)
    if kind == "density":
        return DensityMatrix.from_dict(data)
    raise FormatError(f"unknown state kind {kind!r}")


def _check_indices(where: Iterable[int], m: int) -> tuple[int, ...]:
    idx = tuple(int(i) for i in where)
    if len(set(idx)) != len(idx) or any(not 0 <= i < m for i in idx):
        raise DomainError(f"bad subsystem indices {idx} for {m} subsystems")
    return idx


def partial_trace(state: State, keep: Iterable[int]) -> DensityMatrix:
    """Reduced density matrix on ``keep`` (factors kept in increasing order)."""
    m = len(state.dims)
    keep = tuple(sorted(_check_indices(keep, m)))
    rest = tuple(i for i in range(m) if i not in keep)
    dk = math.prod(state.dims[i] for i in keep)
    check_density_dim(dk)
    kept_dims = tuple(state.dims[i] for i in keep)
    if isinstance(state, StateVector):
        psi = np.transpose(state.tensor(), keep + rest).reshape(dk, -1)
        return DensityMatrix(kept_dims, psi @ psi.conj().T)
    rho = state.matrix.reshape(state.dims + state.dims)
    perm = keep + rest + tuple(m + i for i in keep) + tuple(m + i for i in rest)
    dr = math.prod(state.dims[i] for i in rest)
    rho = np.transpose(rho, perm).reshape(dk, dr, dk, dr)
    return DensityMatrix(kept_dims, np.einsum("arbr->ab", rho))


def _as_operator(op: Any, target_dims: tuple[int, ...]) -> ComplexArray:
    if isinstance(op, PauliWord):
        if op.n != len(target_dims) or any(d != op.p for d in target_dims):
            raise DomainError(f"word on {op.n} qupits of dim {op.p} does not fit {target_dims}")
        return pauli_matrix(op)
    mat = np.asarray(op, dtype=np.complex128)
    dim = math.prod(target_dims)
    if mat.shape != (dim, dim):
        raise DomainError(f"operator shape {mat.shape} does not fit subsystems of dims {target_dims}")
    return mat


def _apply_to_axes(tensor: ComplexArray, op: ComplexArray, axes: tuple[int, ...], dims: tuple[int, ...]) -> ComplexArray:
    """Contract ``op`` (acting on ``axes`` in the given order) into ``tensor``."""
    k = len(axes)
    sub = tuple(dims[a] for a in axes)
    op_t = op.reshape(sub + sub)
    out = np.tensordot(op_t, tensor, axes=(tuple(range(k, 2 * k)), axes))
    # tensordot puts the new axes first; put them back where they came from
    return np.moveaxis(out, tuple(range(k)), axes)


def apply_on_subset(state: State, op: Any, where: Sequence[int]) -> State:
    """``(op on where) (x) identity elsewhere``; ``where`` order fixes op's factor order."""
    m = len(state.dims)
    where = _check_indices(where, m)
    mat = _as_operator(op, tuple(state.dims[i] for i in where))
    if isinstance(state, StateVector):
        out = _apply_to_axes(state.tensor(), mat, where, state.dims)
        return StateVector(state.dims, out.reshape(-1))
    rho = state.matrix.reshape(state.dims + state.dims)
    rho = _apply_to_axes(rho, mat, where, state.dims + state.dims)
    rho = _apply_to_axes(rho, mat.conj(), tuple(m + i for i in where), state.dims + state.dims)
    return DensityMatrix(state.dims, rho.reshape(state.matrix.shape))


def apply_permutation(state: StateVector, perm: npt.NDArray[np.int64], where: Sequence[int]) -> StateVector:
    """Apply the basis permutation ``|j> -> |perm[j]>`` on subsystems ``where``."""
    m = len(state.dims)
    where = _check_indices(where, m)
    rest = tuple(i for i in range(m) if i not in where)
    dw = math.prod(state.dims[i] for i in where)
    perm = np.asarray(perm, dtype=np.int64)
    if perm.shape != (dw,) or not np.array_equal(np.sort(perm), np.arange(dw)):
        raise DomainError("not a permutation of the target subspace")
    order = where + rest
    psi = np.transpose(state.tensor(), order).reshape(dw, -1)
    out = np.empty_like(psi)
    out[perm] = psi
    out = out.reshape(tuple(state.dims[i] for i in order))
    return StateVector(state.dims, np.transpose(out, np.argsort(order)).reshape(-1))


def expectation(state: State, op: Any, where: Sequence[int] | None = None) -> complex:
    """``tr(rho (op on where))``."""
    m = len(state.dims)
    where = tuple(range(m)) if where is None else _check_indices(where, m)
    mat = _as_operator(op, tuple(state.dims[i] for i in where))
    if isinstance(state, StateVector):
        out = _apply_to_axes(state.tensor(), mat, where, state.dims)
        return complex(np.vdot(state.amplitudes, out.reshape(-1)))
    reduced = partial_trace(state, where)
    # partial_trace sorts the kept factors; reorder op to match
    order = tuple(sorted(where))
    if order != where:
        sub = tuple(state.dims[i] for i in where)
        k = len(where)
        perm = [where.index(i) for i in order]
        mat = mat.reshape(sub + sub).transpose(perm + [k + i for i in perm]).reshape(mat.shape)
    return complex(np.trace(reduced.matrix @ mat))


def trace_distance(rho: State, sigma: State) -> float:
    """``(1/2) ||rho - sigma||_1`` from the eigenvalues of the difference."""
    if rho.dims != sigma.dims:
        raise DomainError(f"layouts differ: {rho.dims} vs {sigma.dims}")
    a = rho.density().matrix if isinstance(rho, StateVector) else rho.matrix
    b = sigma.density().matrix if isinstance(sigma, StateVector) else sigma.matrix
    return float(0.5 * np.abs(np.linalg.eigvalsh(a - b)).sum())


def fidelity(psi: StateVector, rho: State) -> float:
    """``<psi| rho |psi>`` for a pure reference state."""
    if psi.dims != rho.dims:
        raise DomainError(f"layouts differ: {psi.dims} vs {rho.dims}")
    if isinstance(rho, StateVector):
        return float(abs(np.vdot(psi.amplitudes, rho.amplitudes)) ** 2)
    return float(np.real(np.vdot(psi.amplitudes, rho.matrix @ psi.amplitudes)))


def spectrum(rho: DensityMatrix, floor: float = TOL) -> npt.NDArray[np.float64]:
    """Eigenvalues above ``floor``, descending."""
    vals = np.linalg.eigvalsh(rho.matrix)
    return np.sort(vals[vals > floor])[::-1]
