"""Brute-force certification of secret sharing schemes.

Nothing here consults a scheme's declared structure or its decoder: verdicts are
computed from the encoding map alone.

Erasure condition.  A leaf set ``K`` is unauthorized iff ``<phi|E|phi> = c(E)``
for every operator ``E`` on ``K`` and every code state ``phi``; the secret is
recoverable from a set iff this holds on its complement.  Both sides of the
condition are sesquilinear in ``phi``, so it suffices to check the spanning set
of ``p`` basis secrets and the ``p(p-1)`` states ``(|s> + |t>)/sqrt 2`` and
``(|s> + i|t>)/sqrt 2``: polarization recovers every ``<s|V^dag E V|t>`` from
those values.  The Pauli words on ``K`` form an operator basis, so checking them
covers every ``E``.  That literal sweep is :func:`erasure_condition_check`.

The fast path uses the same fact in block form: with ``B[s, t] =
tr_{not K}(V|s><t|V^dag)`` the condition is exactly ``B[s, t] = delta_st B[0, 0]``.
When the traced-out side is small, the Petz map of the complementary channel is
used instead: a channel is exactly reversible iff its Petz map reverses it.
"""

from __future__ import annotations

import itertools
import json
import math
import time
import warnings
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np
import numpy.typing as npt
import scipy.sparse as sp

from . import access, gfcodes, pauli, qsim
from .access import AccessStructure
from .errors import AuditError, CapExceeded, DomainError
from .qsim import DensityMatrix, StateVector

FORMAT = "qss/1"
TOL = 1e-9
SLACK = 1e-6
SUPPORT_LIMIT = 5 * 10**7
DIRECT_NNZ_LIMIT = 5 * 10**6
PETZ_LIMIT = 4 * 10**6


class Verdict(str, Enum):
    AUTHORIZED = "authorized"
    UNAUTHORIZED = "unauthorized"
    NEITHER = "NEITHER"


@dataclass(frozen=True)
class ConditionResult:
    holds: bool
    deviation: float
    method: str = "blocks"


@dataclass(frozen=True)
class MapEntry:
    subset: frozenset[int]
    verdict: Verdict
    unauthorized_deviation: float
    authorized_deviation: float

    @property
    def deviation(self) -> float:
        """Deviation of the condition that decided the verdict."""
        if self.verdict is Verdict.AUTHORIZED:
            return self.authorized_deviation
        if self.verdict is Verdict.UNAUTHORIZED:
            return self.unauthorized_deviation
        return min(self.authorized_deviation, self.unauthorized_deviation)


@dataclass
class AccessMap:
    parties: tuple[int, ...]
    entries: list[MapEntry]
    tolerance: float = TOL
    warnings: list[str] = field(default_factory=list)

    def verdict(self, subset: Iterable[int]) -> Verdict:
        subset = frozenset(subset)
        for e in self.entries:
            if e.subset == subset:
                return e.verdict
        raise KeyError(access.set_name(subset))

    @property
    def authorized(self) -> list[frozenset[int]]:
        return [e.subset for e in self.entries if e.verdict is Verdict.AUTHORIZED]

    @property
    def neither_count(self) -> int:
        return sum(e.verdict is Verdict.NEITHER for e in self.entries)

    @property
    def max_deviation(self) -> float:
        return max((e.deviation for e in self.entries), default=0.0)

    def structure(self) -> AccessStructure | None:
        """Authorized family as a structure, if it is nonempty."""
        auth = self.authorized
        return access.normalize(auth, self.parties) if auth else None

    def matches(self, declared: AccessStructure) -> bool:
        return self.neither_count == 0 and {frozenset(t) for t in declared.authorized_sets()} == set(self.authorized)

    def important_parties(self) -> list[int]:
        """Parties whose removal turns some authorized set unauthorized."""
        auth = set(self.authorized)
        return [x for x in self.parties if any(x in t and (t - {x}) not in auth for t in auth)]

    def to_rows(self) -> list[dict[str, Any]]:
        return [
            {"subset": access.set_name(e.subset) or "{}", "verdict": e.verdict.value, "deviation": float(e.deviation)}
            for e in self.entries
        ]


################################################################################
# encoding, recomputed from the tree descriptor


@dataclass(frozen=True)
class Encoding:
    """Columns ``V|s>`` in sparse form over ``dims``; one ``(indices, amps)`` pair per secret."""

    dims: tuple[int, ...]
    columns: tuple[tuple[npt.NDArray[np.int64], npt.NDArray[np.complex128]], ...]

    @property
    def secret_dim(self) -> int:
        return len(self.columns)

    @property
    def n_sites(self) -> int:
        return len(self.dims)

    def dense(self) -> npt.NDArray[np.complex128]:
        dim = math.prod(self.dims)
        qsim.check_vector_dim(dim)
        out = np.zeros((dim, self.secret_dim), dtype=np.complex128)
        for s, (idx, amp) in enumerate(self.columns):
            np.add.at(out[:, s], idx, amp)
        return out

    def digits(self, s: int) -> npt.NDArray[np.int64]:
        idx = self.columns[s][0]
        out = np.empty((idx.size, self.n_sites), dtype=np.int64)
        rem = idx.copy()
        for site in range(self.n_sites - 1, -1, -1):
            out[:, site] = rem % self.dims[site]
            rem //= self.dims[site]
        return out


def support_size(node: Any, p: int) -> int:
    """Number of basis terms in one encoded basis secret."""
    if not hasattr(node, "children"):
        return 1
    return p ** (node.k - 1) * math.prod(support_size(c, p) for c in node.children)


def _horner(coeffs: Sequence[int], x: int, p: int) -> int:
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % p
    return acc


def tree_encoding(scheme: Any) -> Encoding:
    """Expand the threshold tree into sparse columns by direct polynomial evaluation."""
    p = scheme.p
    n_leaves = len(scheme.share_map)
    if p**n_leaves >= 2**62:
        raise CapExceeded(f"{n_leaves} leaves of dimension {p} overflow 64-bit basis indices")
    if p * support_size(scheme.root, p) * n_leaves > SUPPORT_LIMIT:
        raise CapExceeded("encoding support is too large to enumerate")

    def walk(node: Any) -> tuple[list[tuple[npt.NDArray[np.int64], npt.NDArray[np.complex128]]], int]:
        if not hasattr(node, "children"):
            return [(np.array([v], dtype=np.int64), np.ones(1, dtype=np.complex128)) for v in range(p)], 1
        parts = [walk(c) for c in node.children]
        width = sum(w for _, w in parts)
        norm = p ** (-(node.k - 1) / 2)
        cols = []
        for s in range(p):
            idx_chunks, amp_chunks = [], []
            for low in itertools.product(range(p), repeat=node.k - 1):
                coeffs = list(low) + [s]
                idx = np.zeros(1, dtype=np.int64)
                amp = np.full(1, norm, dtype=np.complex128)
                for alpha, (child_cols, cw) in zip(node.alphas, parts):
                    cidx, camp = child_cols[_horner(coeffs, alpha, p)]
                    idx = (idx[:, None] * p**cw + cidx[None, :]).reshape(-1)
                    amp = (amp[:, None] * camp[None, :]).reshape(-1)
                idx_chunks.append(idx)
                amp_chunks.append(amp)
            cols.append((np.concatenate(idx_chunks), np.concatenate(amp_chunks)))
        return cols, width

    cols, width = walk(scheme.root)
    return Encoding((p,) * width, tuple(cols))


def dense_encoding(matrix: npt.NDArray[np.complex128], dims: Sequence[int]) -> Encoding:
    """Wrap a dense isometry (columns = encoded basis secrets)."""
    cols = []
    for col in np.asarray(matrix).T:
        nz = np.nonzero(np.abs(col) > 1e-15)[0]
        cols.append((nz.astype(np.int64), col[nz].astype(np.complex128)))
    return Encoding(tuple(dims), tuple(cols))


################################################################################
# reduced blocks and erasure conditions


def _split(enc: Encoding, s: int, keep: Sequence[int]) -> tuple[npt.NDArray[np.int64], npt.NDArray[np.int64]]:
    digits = enc.digits(s)
    rest = [i for i in range(enc.n_sites) if i not in keep]
    kept = np.zeros(digits.shape[0], dtype=np.int64)
    for i in keep:
        kept = kept * enc.dims[i] + digits[:, i]
    other = np.zeros(digits.shape[0], dtype=np.int64)
    for i in rest:
        other = other * enc.dims[i] + digits[:, i]
    return kept, other


def _direct_nnz(others: list[npt.NDArray[np.int64]]) -> int:
    _, counts = np.unique(np.concatenate(others), return_counts=True)
    return int((counts.astype(np.float64) ** 2).sum())


def reduced_blocks(enc: Encoding, keep: Sequence[int]) -> list[list[sp.csr_matrix]]:
    """``B[s][t] = tr_rest(V|s><t|V^dag)`` on the sites ``keep`` (sparse)."""
    keep = sorted(keep)
    d_keep = math.prod(enc.dims[i] for i in keep)
    splits = [_split(enc, s, keep) for s in range(enc.secret_dim)]
    labels, inverse = np.unique(np.concatenate([o for _, o in splits]), return_inverse=True)
    mats = []
    offset = 0
    for s, (kept, _) in enumerate(splits):
        rows = inverse[offset : offset + kept.size]
        offset += kept.size
        mats.append(sp.csr_matrix((enc.columns[s][1], (kept, rows)), shape=(d_keep, labels.size)))
    return [[(ms @ mt.conj().T).tocsr() for mt in mats] for ms in mats]


def _sparse_max_abs(m: sp.spmatrix) -> float:
    m = m.tocsr()
    m.eliminate_zeros()
    return float(np.abs(m.data).max()) if m.nnz else 0.0


def erasure_from_blocks(blocks: list[list[sp.csr_matrix]]) -> float:
    """Largest entry of ``B[s, t] - delta_st B[0, 0]``."""
    dev = 0.0
    base = blocks[0][0]
    for s, row in enumerate(blocks):
        for t, b in enumerate(row):
            dev = max(dev, _sparse_max_abs(b - base if s == t else b))
    return dev


def petz_deviation(blocks: list[list[sp.csr_matrix]]) -> float:
    """How far the Petz map fails to invert ``|s><t| -> B[s, t]``.

    Returns the largest entry of ``R(N(|s><t|)) - |s><t|`` over all ``s, t``.
    """
    p = len(blocks)
    d = blocks[0][0].shape[0]
    if p * p * d * d > PETZ_LIMIT:
        raise CapExceeded(f"Petz test on dimension {d} exceeds the working limit")
    dense = np.array([[b.toarray() for b in row] for row in blocks])  # (p, p, d, d)
    sigma = dense[np.arange(p), np.arange(p)].sum(axis=0) / p
    vals, vecs = np.linalg.eigh((sigma + sigma.conj().T) / 2)
    keep = vals > 1e-12
    inv_sqrt = (vecs[:, keep] / np.sqrt(vals[keep])) @ vecs[:, keep].conj().T
    c = inv_sqrt @ dense @ inv_sqrt
    # out[s, t, u, v] = (1/p) tr(C[s, t] B[v, u])
    out = np.einsum("stij,vuji->stuv", c, dense) / p
    target = np.einsum("su,tv->stuv", np.eye(p), np.eye(p))
    return float(np.abs(out - target).max())


def erasure_condition(enc: Encoding, erased: Sequence[int], tolerance: float = TOL) -> ConditionResult:
    """Knill-Laflamme condition on the sites ``erased``.

    Computed on the erased side when that is sparse enough, otherwise as exact
    reversibility (Petz) of the channel onto the remaining sites.
    """
    erased = sorted(set(erased))
    rest = [i for i in range(enc.n_sites) if i not in erased]
    if not erased:
        return ConditionResult(True, 0.0, "trivial")
    others = [_split(enc, s, erased)[1] for s in range(enc.secret_dim)]
    d_rest = math.prod(enc.dims[i] for i in rest)
    petz_ok = enc.secret_dim**2 * d_rest**2 <= PETZ_LIMIT
    nnz = _direct_nnz(others) * enc.secret_dim
    if nnz <= DIRECT_NNZ_LIMIT and not (petz_ok and d_rest < math.prod(enc.dims[i] for i in erased)):
        dev = erasure_from_blocks(reduced_blocks(enc, erased))
        method = "blocks"
    elif petz_ok:
        dev = petz_deviation(reduced_blocks(enc, rest))
        method = "petz"
    else:
        raise CapExceeded(f"erasure check on {len(erased)} of {enc.n_sites} sites exceeds the working limits")
    return ConditionResult(dev <= max(tolerance, SLACK), dev, method)


def spanning_secrets(p: int) -> list[npt.NDArray[np.complex128]]:
    """Basis secrets plus ``(|s> + |t>)/sqrt 2`` and ``(|s> + i|t>)/sqrt 2`` for ``s < t``."""
    eye = np.eye(p, dtype=np.complex128)
    out = [eye[s] for s in range(p)]
    for s, t in itertools.combinations(range(p), 2):
        out.append((eye[s] + eye[t]) / math.sqrt(2))
        out.append((eye[s] + 1j * eye[t]) / math.sqrt(2))
    return out


def erasure_condition_check(
    encoder: Callable[[npt.NDArray[np.complex128]], StateVector],
    secret_dim: int,
    erased: Sequence[int],
    tolerance: float = TOL,
) -> ConditionResult:
    """Literal sweep: ``<phi|E|phi>`` for every Pauli word ``E`` on ``erased``.

    ``encoder`` maps a secret amplitude vector to the global state.  The sites in
    ``erased`` must all have the same prime dimension.
    """
    erased = sorted(set(erased))
    if not erased:
        return ConditionResult(True, 0.0, "literal")
    tables = []
    for phi in spanning_secrets(secret_dim):
        state = encoder(phi)
        dims = {state.dims[i] for i in erased}
        if len(dims) != 1:
            raise DomainError("literal sweep needs equal site dimensions")
        q = dims.pop()
        rho = qsim.partial_trace(state, erased)
        tables.append(pauli.pauli_spectrum(rho.matrix, q, len(erased)))
    tables = np.array(tables)
    dev = float(np.abs(tables - tables[0]).max())
    return ConditionResult(dev <= max(tolerance, SLACK), dev, "literal")


################################################################################
# access maps


def _classify(unauth: ConditionResult, auth: ConditionResult) -> Verdict:
    if unauth.holds and not auth.holds:
        return Verdict.UNAUTHORIZED
    if auth.holds and not unauth.holds:
        return Verdict.AUTHORIZED
    return Verdict.NEITHER


def _note_slack(result: ConditionResult, tolerance: float, label: str, notes: list[str]) -> None:
    if result.holds and result.deviation > tolerance:
        notes.append(f"{label}: deviation {result.deviation:.3g} above {tolerance:g}, within slack {SLACK:g}")


def _sweep(
    parties: Sequence[int],
    check: Callable[[frozenset[int]], tuple[ConditionResult, ConditionResult]],
    tolerance: float,
    jobs: int,
) -> AccessMap:
    subsets = list(access.subsets(parties))
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(check, subsets))
    else:
        results = [check(t) for t in subsets]
    notes: list[str] = []
    entries = []
    for t, (unauth, auth) in zip(subsets, results):
        label = access.set_name(t) or "{}"
        _note_slack(unauth, tolerance, f"{label} (unauthorized test)", notes)
        _note_slack(auth, tolerance, f"{label} (authorized test)", notes)
        entries.append(MapEntry(t, _classify(unauth, auth), unauth.deviation, auth.deviation))
    for note in notes:
        warnings.warn(note, stacklevel=3)
    return AccessMap(tuple(sorted(parties)), entries, tolerance, notes)


def access_map(scheme: Any, tolerance: float = TOL, mode: str = "auto", jobs: int = 1) -> AccessMap:
    """Classify every party subset from the encoding alone.

    ``mode="literal"`` runs the Pauli sweep on dense states; ``"auto"`` uses the
    reduced-block checks.
    """
    owners = list(scheme.share_map)
    n_leaves = len(owners)
    enc = tree_encoding(scheme)
    leaves_of = lambda t: [i for i, o in enumerate(owners) if o in t]  # noqa: E731
    cache: dict[tuple[int, ...], ConditionResult] = {}

    if mode == "literal":
        dense = enc.dense()

        def condition(erased: Sequence[int]) -> ConditionResult:
            key = tuple(erased)
            if key not in cache:
                cache[key] = erasure_condition_check(
                    lambda phi: StateVector(enc.dims, dense @ phi), enc.secret_dim, erased, tolerance
                )
            return cache[key]
    elif mode == "auto":

        def condition(erased: Sequence[int]) -> ConditionResult:
            key = tuple(erased)
            if key not in cache:
                cache[key] = erasure_condition(enc, erased, tolerance)
            return cache[key]
    else:
        raise DomainError(f"unknown oracle mode {mode!r}")

    def check(t: frozenset[int]) -> tuple[ConditionResult, ConditionResult]:
        held = leaves_of(t)
        rest = [i for i in range(n_leaves) if i not in held]
        return condition(held), condition(rest)

    # threads would race on the cache; results are identical either way
    return _sweep(scheme.parties, check, tolerance, jobs if mode == "auto" else 1)


def isometry_deviation(enc: Encoding) -> float:
    """Largest entry of ``V^dag V - I``."""
    p = enc.secret_dim
    mats = [sp.csr_matrix((amp, (idx, np.zeros_like(idx))), shape=(math.prod(enc.dims), 1)) for idx, amp in enc.columns]
    gram = np.array([[(a.conj().T @ b).toarray()[0, 0] for b in mats] for a in mats])
    return float(np.abs(gram - np.eye(p)).max())


################################################################################
# classical secrets


def hybrid_check(h: Any, tolerance: float = TOL, mode: str = "auto") -> AccessMap:
    """Classical-secret conditions for every coordinate subset of a hybrid scheme.

    ``T`` is unauthorized iff ``<psi_i|F|psi_i>`` does not depend on ``i`` for
    operators ``F`` on ``T``; authorized iff ``<psi_i|E|psi_j> = 0`` (``i != j``)
    for operators ``E`` on the complement.  Mixed encodings are purified with the
    purifying register placed on the complement side.  Secrets are indexed
    ``i = (a, b)``.
    """
    from . import hybrid as hyb

    n, p = h.n, h.p
    rhos = [hyb.encode_classical(h, a, b) for a in range(p) for b in range(p)]
    psis = [_purify(r) for r in rhos]

    def check(t: frozenset[int]) -> tuple[ConditionResult, ConditionResult]:
        coords = sorted(x - 1 for x in t)
        if mode == "literal":
            return _noinfo_literal(psis, coords, p, tolerance), _disting_literal(psis, coords, p, tolerance)
        return _noinfo(rhos, coords, tolerance), _disting(psis, coords, tolerance)

    if mode not in ("auto", "literal"):
        raise DomainError(f"unknown oracle mode {mode!r}")
    return _sweep(tuple(range(1, n + 1)), check, tolerance, 1)


def _purify(rho: DensityMatrix) -> StateVector:
    """Purification with the reference register last, of dimension ``rank(rho)``."""
    mat = rho.matrix
    j = int(np.argmax(mat.diagonal().real))
    col = mat[:, j] / math.sqrt(mat[j, j].real)
    if abs(np.vdot(col, col).real - 1) < 1e-12:  # rank one
        return StateVector(rho.dims + (1,), col)
    vals, vecs = np.linalg.eigh(mat)
    keep = vals > 1e-12
    amps = vecs[:, keep] * np.sqrt(vals[keep])
    return StateVector(rho.dims + (int(keep.sum()),), amps.reshape(-1))


def _noinfo(rhos: list[DensityMatrix], coords: list[int], tolerance: float) -> ConditionResult:
    reduced = [qsim.partial_trace(r, coords).matrix for r in rhos]
    dev = max(float(np.abs(m - reduced[0]).max()) for m in reduced)
    return ConditionResult(dev <= max(tolerance, SLACK), dev, "reduced")


def _disting(psis: list[StateVector], coords: list[int], tolerance: float) -> ConditionResult:
    # tr_T(|psi_j><psi_i|) vanishes iff Psi_i^dag Psi_j does, with Psi the T-by-rest amplitude matrix
    if not coords:
        return ConditionResult(False, 1.0, "reduced")
    mats = []
    for psi in psis:
        rest = [i for i in range(len(psi.dims)) if i not in coords]
        amps = np.transpose(psi.amplitudes.reshape(psi.dims), coords + rest)
        mats.append(amps.reshape(math.prod(psi.dims[i] for i in coords), -1))
    dev = 0.0
    for i, j in itertools.combinations(range(len(mats)), 2):
        dev = max(dev, float(np.abs(mats[i].conj().T @ mats[j]).max()))
    return ConditionResult(dev <= max(tolerance, SLACK), dev, "reduced")


def _noinfo_literal(psis: list[StateVector], coords: list[int], p: int, tolerance: float) -> ConditionResult:
    if not coords:
        return ConditionResult(True, 0.0, "literal")
    tables = np.array([pauli.pauli_spectrum(qsim.partial_trace(s, coords).matrix, p, len(coords)) for s in psis])
    dev = float(np.abs(tables - tables[0]).max())
    return ConditionResult(dev <= max(tolerance, SLACK), dev, "literal")


def _disting_literal(psis: list[StateVector], coords: list[int], p: int, tolerance: float) -> ConditionResult:
    """``<psi_i|E|psi_j>`` over Pauli words ``E`` on the complement, the purifying register excluded.

    Words on the complement qupits tensored with any operator on the purifying
    register: it suffices that the partial trace over ``T`` of ``|psi_j><psi_i|``
    vanishes, which is checked through its Pauli spectrum on the qupits and
    entrywise on the purifying register.
    """
    n = len(psis[0].dims) - 1
    comp = [i for i in range(n) if i not in coords]
    dev = 0.0
    for i, j in itertools.permutations(range(len(psis)), 2):
        a = psis[j].amplitudes.reshape(psis[j].dims)
        b = psis[i].amplitudes.reshape(psis[i].dims)
        # contract T; the complement qupits and the purifying register stay open
        block = np.tensordot(a, b.conj(), axes=(coords, coords))
        m = len(comp) + 1
        block = block.reshape(math.prod(block.shape[:m]), -1)
        d_ref = psis[j].dims[-1]
        if comp:
            q = p ** len(comp)
            sub = block.reshape(q, d_ref, q, d_ref)
            for u in range(d_ref):
                for v in range(d_ref):
                    coeffs = pauli.pauli_spectrum(np.ascontiguousarray(sub[:, u, :, v]), p, len(comp))
                    dev = max(dev, float(np.abs(coeffs).max()))
        else:
            dev = max(dev, float(np.abs(block).max()))
        if dev > max(tolerance, SLACK):
            break
    return ConditionResult(dev <= max(tolerance, SLACK), dev, "literal")


################################################################################
# structural certification


def threshold_node_map(k: int, p: int, alphas: Sequence[int], tolerance: float = TOL) -> AccessMap:
    """Oracle map of one pure ((k, 2k-1)) node with the given evaluation points."""
    from . import schemes

    width = 2 * k - 1
    node = schemes.Leaf(1) if width == 1 else schemes.ThresholdNode(k, tuple(schemes.Leaf(i + 1) for i in range(width)), tuple(alphas))
    stub = _Stub(p, node, tuple(range(1, width + 1)))
    return access_map(stub, tolerance)


@dataclass(frozen=True)
class _Stub:
    """Minimal scheme-shaped object: the oracle only needs p, the tree, parties and owners."""

    p: int
    root: Any
    parties: tuple[int, ...]

    @property
    def share_map(self) -> tuple[int | None, ...]:
        out = []

        def walk(node: Any) -> None:
            if hasattr(node, "children"):
                for c in node.children:
                    walk(c)
            else:
                out.append(node.owner)

        walk(self.root)
        return tuple(out)


def composed_structure(scheme: Any, node_maps: dict[tuple[int, tuple[int, ...]], AccessMap]) -> AccessStructure:
    """Structure implied by the tree when node ``i`` has the oracle map ``node_maps[i]``.

    A node's secret is recoverable from a leaf set iff the children recoverable
    from it form an authorized set of that node's oracle map.
    """
    owners = list(scheme.share_map)

    def recoverable(node: Any, held: set[int], counter: Iterable[int]) -> bool:
        if not hasattr(node, "children"):
            return next(counter) in held
        got = frozenset(i + 1 for i, c in enumerate(node.children) if recoverable(c, held, counter))
        nmap = node_maps[(node.k, tuple(node.alphas))]
        return nmap.verdict(got) is Verdict.AUTHORIZED

    def pred(t: frozenset[int]) -> bool:
        held = {i for i, o in enumerate(owners) if o in t}
        return recoverable(scheme.root, held, itertools.count())

    return access.from_predicate(scheme.parties, pred)


@dataclass
class StructuralCertificate:
    node_maps: dict[tuple[int, tuple[int, ...]], AccessMap]
    structure: AccessStructure | None
    ok: bool
    notes: list[str]


def structural_certificate(scheme: Any, tolerance: float = TOL) -> StructuralCertificate:
    """Certify each distinct node by the oracle, then compose by the concatenation rule.

    Used when the whole encoding is too large to enumerate.  Each node must be a
    perfect threshold scheme on its own; concatenating perfect schemes gives a
    perfect scheme whose authorized sets follow the composition of node maps.
    """
    node_maps: dict[tuple[int, tuple[int, ...]], AccessMap] = {}
    notes = []

    def collect(node: Any) -> None:
        if hasattr(node, "children"):
            key = (node.k, tuple(node.alphas))
            if key not in node_maps:
                node_maps[key] = threshold_node_map(node.k, scheme.p, node.alphas, tolerance)
            for c in node.children:
                collect(c)

    collect(scheme.root)
    ok = True
    for (k, alphas), nmap in node_maps.items():
        expected = access.threshold_structure(k, 2 * k - 1)
        if not nmap.matches(expected):
            ok = False
            notes.append(f"node (({k},{2 * k - 1})) at points {list(alphas)}: {nmap.neither_count} NEITHER verdicts")
    structure = composed_structure(scheme, node_maps) if ok else None
    return StructuralCertificate(node_maps, structure, ok, notes)


################################################################################
# share-size audits


@dataclass
class SizeAudit:
    rows: list[dict[str, Any]]
    ok: bool
    kind: str

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "ok": self.ok, "shares": self.rows}


def size_audit(target: Any, amap: AccessMap | None = None, strict: bool = True) -> SizeAudit:
    """Compare each important share's dimension with the lower bound.

    Quantum secrets: an important share is at least as large as the secret.
    Classical secrets: at least the square root of the secret size; the hybrid
    construction meets this with equality.  A violation is a construction bug
    and raises :class:`AuditError` when ``strict``.
    """
    if getattr(target, "n_generators", None) is not None:  # hybrid
        amap = amap or hybrid_check(target)
        bound = math.isqrt(target.p**2)
        rows = []
        for x in amap.important_parties():
            dim = target.p
            rows.append({"party": access.party_name(x), "dimension": dim, "bound": bound, "ok": dim >= bound, "equality": dim == bound})
        ok = all(r["ok"] and r["equality"] for r in rows) and bool(rows)
        audit = SizeAudit(rows, ok, "classical")
    else:
        if amap is None:
            amap = access_map(target)
        owners = list(target.share_map)
        rows = []
        for x in amap.important_parties():
            dim = target.p ** owners.count(x)
            rows.append({"party": access.party_name(x), "dimension": dim, "bound": target.p, "ok": dim >= target.p})
        ok = all(r["ok"] for r in rows)
        audit = SizeAudit(rows, ok, "quantum")
    if strict and not audit.ok:
        bad = [r["party"] for r in audit.rows if not r["ok"] or not r.get("equality", True)]
        raise AuditError(f"share-size audit failed for parties {bad}")
    return audit


################################################################################
# reports


def feasible(scheme: Any) -> bool:
    """Whether the full encoding fits the enumeration limits."""
    n_leaves = len(scheme.share_map)
    return scheme.p**n_leaves < 2**62 and scheme.p * support_size(scheme.root, scheme.p) * n_leaves <= SUPPORT_LIMIT


def report(scheme: Any, tolerance: float = TOL, mode: str = "auto", jobs: int = 1) -> dict[str, Any]:
    """Oracle report for a scheme, comparing the found map with the declared one."""
    start = time.perf_counter()
    declared = scheme.declared_structure
    out: dict[str, Any] = {"format": FORMAT, "kind": "oracle_report", "p": scheme.p, "n_leaves": len(scheme.share_map)}
    out["declared"] = str(declared)
    out["warnings"] = []
    amap = None
    if mode != "structural" and (mode == "literal" or feasible(scheme)):
        try:
            enc = tree_encoding(scheme)
            amap = access_map(scheme, tolerance, mode, jobs)
        except CapExceeded as exc:
            if mode == "literal":
                raise
            out["warnings"].append(f"full enumeration exceeded working limits ({exc}); certified structurally")
    elif mode == "auto":
        out["warnings"].append("encoding support exceeds working limits; certified structurally")
    if amap is None:
        cert = structural_certificate(scheme, tolerance)
        out["method"] = "structural"
        out["nodes"] = [
            {"k": k, "n": 2 * k - 1, "alphas": list(a), "neither": m.neither_count, "max_deviation": m.max_deviation}
            for (k, a), m in cert.node_maps.items()
        ]
        found = cert.structure
        out["found"] = str(found) if found else None
        out["neither"] = sum(m.neither_count for m in cert.node_maps.values())
        out["matches_declared"] = bool(cert.ok and found == declared)
        out["max_deviation"] = max((m.max_deviation for m in cert.node_maps.values()), default=0.0)
        out["entries"] = []
        out["warnings"] += cert.notes
    else:
        out["method"] = "literal" if mode == "literal" else "blocks"
        out["isometry_deviation"] = isometry_deviation(enc)
        found = amap.structure()
        out["found"] = str(found) if found else None
        out["neither"] = amap.neither_count
        out["matches_declared"] = amap.matches(declared)
        out["max_deviation"] = amap.max_deviation
        out["entries"] = amap.to_rows()
        out["warnings"] += amap.warnings
    out["verdict"] = "PASS" if out["neither"] == 0 and out["matches_declared"] else "FAIL"
    out["runtime_s"] = round(time.perf_counter() - start, 3)
    return out


def hybrid_report(h: Any, tolerance: float = TOL, mode: str = "auto") -> dict[str, Any]:
    start = time.perf_counter()
    amap = hybrid_check(h, tolerance, mode)
    expected = access.threshold_structure(h.k, h.n)
    audit = size_audit(h, amap, strict=False)
    out = {
        "format": FORMAT,
        "kind": "hybrid_report",
        "p": h.p,
        "n": h.n,
        "k": h.k,
        "stabilizer": h.table(),
        "found": str(amap.structure()) if amap.structure() else None,
        "expected": str(expected),
        "neither": amap.neither_count,
        "matches_declared": amap.matches(expected),
        "max_deviation": amap.max_deviation,
        "entries": amap.to_rows(),
        "size_audit": audit.to_dict(),
        "classical_share_bound": h.p**2,
        "warnings": amap.warnings,
    }
    out["verdict"] = "PASS" if out["neither"] == 0 and out["matches_declared"] and audit.ok else "FAIL"
    out["runtime_s"] = round(time.perf_counter() - start, 3)
    return out


def dumps_report(rep: dict[str, Any]) -> str:
    return json.dumps(rep, indent=2)
