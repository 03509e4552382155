"""Quantum secret sharing schemes as trees of threshold encoders.

Every internal node is a pure ((k, 2k-1)) polynomial encoder: the secret ``s``
becomes the uniform superposition of ``|f(alpha_1) ... f(alpha_{2k-1})>`` over
polynomials ``f`` of degree ``k - 1`` whose leading coefficient is ``s``.  Each
output register is either a physical qupit (a :class:`Leaf`) or the secret of a
child node.  Leaves are owned by a party or by nobody (the environment); mixed
schemes are always carried this way, as a pure tree with environment leaves.

Leaves are numbered depth first; that order is the tensor-factor order of every
encoded state.
"""

from __future__ import annotations

import itertools
import json
import math
import warnings
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field, replace
from typing import Any, Union

import numpy as np
import numpy.typing as npt

from . import access, gfcodes, qsim
from .access import AccessStructure
from .errors import (
    CapExceeded,
    ConstructionError,
    DomainError,
    FormatError,
    NoCloningError,
    UnauthorizedError,
)
from .qsim import DensityMatrix, StateVector

FORMAT = "qss/1"


@dataclass(frozen=True)
class Leaf:
    owner: int | None = None

    @property
    def is_environment(self) -> bool:
        return self.owner is None


@dataclass(frozen=True)
class ThresholdNode:
    k: int
    children: tuple[Node, ...]
    alphas: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.k < 1:
            raise DomainError(f"threshold k={self.k} must be positive")
        width = 2 * self.k - 1
        children = tuple(self.children)
        if len(children) != width:
            raise DomainError(f"a ((k, 2k-1)) node with k={self.k} needs {width} children, got {len(children)}")
        alphas = tuple(int(a) for a in self.alphas) if self.alphas else tuple(range(width))
        if len(alphas) != width:
            raise DomainError(f"need {width} evaluation points, got {len(alphas)}")
        object.__setattr__(self, "children", children)
        object.__setattr__(self, "alphas", alphas)

    @property
    def n(self) -> int:
        return len(self.children)


Node = Union[Leaf, ThresholdNode]


def iter_leaves(node: Node) -> Iterator[Leaf]:
    if isinstance(node, Leaf):
        yield node
    else:
        for child in node.children:
            yield from iter_leaves(child)


def iter_nodes(node: Node) -> Iterator[ThresholdNode]:
    if isinstance(node, ThresholdNode):
        yield node
        for child in node.children:
            yield from iter_nodes(child)


def count_leaves(node: Node) -> int:
    return sum(1 for _ in iter_leaves(node))


def required_prime(node: Node) -> int:
    """Smallest prime at least as large as every node's width."""
    widths = [2 * t.k - 1 for t in iter_nodes(node)]
    return gfcodes.next_prime(max(widths, default=2))


def map_leaves(node: Node, fn) -> Node:
    if isinstance(node, Leaf):
        return fn(node)
    return ThresholdNode(node.k, tuple(map_leaves(c, fn) for c in node.children), node.alphas)


################################################################################
# scheme container


@dataclass(frozen=True)
class Scheme:
    p: int
    root: Node
    parties: tuple[int, ...]
    declared_structure: AccessStructure

    def __post_init__(self) -> None:
        gfcodes.check_modulus(self.p)
        parties = tuple(sorted(self.parties))
        object.__setattr__(self, "parties", parties)
        for t in iter_nodes(self.root):
            if self.p < t.n:
                raise DomainError(f"p={self.p} is too small for a node with {t.n} shares")
            if any(not 0 <= a < self.p for a in t.alphas):
                raise DomainError(f"evaluation points {t.alphas} are not reduced mod {self.p}")
        owners = {leaf.owner for leaf in iter_leaves(self.root)} - {None}
        if not owners <= set(parties):
            raise DomainError(f"leaves owned by {sorted(owners - set(parties))} outside the parties")
        if self.declared_structure.universe != frozenset(parties):
            raise DomainError("declared structure is over a different party set")
        access.require_no_cloning(self.declared_structure)

    @property
    def leaves(self) -> tuple[Leaf, ...]:
        return tuple(iter_leaves(self.root))

    @property
    def n_leaves(self) -> int:
        return count_leaves(self.root)

    @property
    def share_map(self) -> tuple[int | None, ...]:
        return tuple(leaf.owner for leaf in self.leaves)

    @property
    def environment(self) -> tuple[int, ...]:
        return tuple(i for i, o in enumerate(self.share_map) if o is None)

    @property
    def is_pure(self) -> bool:
        return not self.environment

    @property
    def leaf_dims(self) -> tuple[int, ...]:
        return (self.p,) * self.n_leaves

    def party_leaves(self, parties: Iterable[int]) -> tuple[int, ...]:
        parties = set(parties)
        return tuple(i for i, o in enumerate(self.share_map) if o in parties and o is not None)

    def share_dimension(self, party: int) -> int:
        return self.p ** len(self.party_leaves([party]))

    def to_dict(self) -> dict[str, Any]:
        counter = itertools.count()

        def node_dict(node: Node) -> dict[str, Any]:
            if isinstance(node, Leaf):
                return {"type": "leaf", "leaf": next(counter)}
            return {
                "type": "threshold",
                "k": node.k,
                "n": node.n,
                "p": self.p,
                "alphas": list(node.alphas),
                "children": [node_dict(c) for c in node.children],
            }

        structure = self.declared_structure.to_dict()
        return {
            "format": FORMAT,
            "kind": "scheme",
            "p": self.p,
            "parties": structure["parties"],
            "tree": node_dict(self.root),
            "share_map": list(self.share_map),
            "environment": list(self.environment),
            "declared_structure": structure,
        }

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> Scheme:
        """Load a descriptor.

        Only shape is validated here (field types, tree arity, leaf numbering);
        whether the tree really shares a secret is the oracle's job.
        """
        try:
            if data.get("format") != FORMAT or data.get("kind") != "scheme":
                raise FormatError(f"not a {FORMAT} scheme descriptor")
            p = int(data["p"])
            share_map = list(data["share_map"])
            seen: list[int] = []

            def build(node: Mapping[str, Any], path: str) -> Node:
                kind = node.get("type")
                if kind == "leaf":
                    idx = int(node["leaf"])
                    if idx != len(seen):
                        raise FormatError(f"{path}: leaf {idx} out of depth-first order")
                    seen.append(idx)
                    if idx >= len(share_map):
                        raise FormatError(f"{path}: leaf {idx} missing from share_map")
                    owner = share_map[idx]
                    return Leaf(None if owner is None else int(owner))
                if kind == "threshold":
                    k = int(node["k"])
                    kids = node["children"]
                    if int(node.get("n", len(kids))) != len(kids):
                        raise FormatError(f"{path}: n={node.get('n')} but {len(kids)} children")
                    if int(node.get("p", p)) != p:
                        raise FormatError(f"{path}: node modulus {node.get('p')} differs from scheme modulus {p}")
                    children = tuple(build(c, f"{path}.children[{i}]") for i, c in enumerate(kids))
                    try:
                        return ThresholdNode(k, children, tuple(int(a) for a in node.get("alphas", ())))
                    except DomainError as exc:
                        raise FormatError(f"{path}: {exc}") from exc
                raise FormatError(f"{path}: unknown node type {kind!r}")

            root = build(data["tree"], "tree")
            if len(seen) != len(share_map):
                raise FormatError(f"share_map has {len(share_map)} entries for {len(seen)} leaves")
            env = [i for i, o in enumerate(share_map) if o is None]
            if "environment" in data and sorted(int(i) for i in data["environment"]) != env:
                raise FormatError("environment list disagrees with share_map")
            structure = AccessStructure.from_dict(data["declared_structure"])
            parties = data.get("parties", structure.to_dict()["parties"])
            parties = tuple(range(1, parties + 1)) if isinstance(parties, int) else tuple(parties)
            return cls(p, root, parties, structure)
        except FormatError:
            raise
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise FormatError(f"malformed scheme descriptor: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> Scheme:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
        return cls.from_dict(data)


################################################################################
# threshold encoders


def threshold_values(k: int, p: int, alphas: Sequence[int]) -> npt.NDArray[np.int64]:
    """``Y[s, c, i] = f_{c,s}(alpha_i)`` with ``f = c_0 + ... + c_{k-2} x^{k-2} + s x^{k-1}``.

    The free coefficient tuples ``c`` are enumerated in row-major order.
    """
    vander = gfcodes.vandermonde(alphas, k - 1, p)  # (m, k)
    free = np.indices((p,) * (k - 1)).reshape(k - 1, -1).T if k > 1 else np.zeros((1, 0), dtype=np.int64)
    low = (free @ vander[:, : k - 1].T) % p  # (q, m)
    lead = np.arange(p)[:, None] * vander[:, k - 1][None, :]  # (p, m)
    return (low[None, :, :] + lead[:, None, :]) % p


def logical_state(k: int, p: int, secret: int, alphas: Sequence[int] | None = None) -> dict[tuple[int, ...], complex]:
    """Basis-state expansion of the encoding of ``|secret>`` by one ((k, 2k-1)) node."""
    alphas = tuple(range(2 * k - 1)) if alphas is None else tuple(alphas)
    vals = threshold_values(k, p, alphas)[secret]
    amp = p ** (-(k - 1) / 2)
    out: dict[tuple[int, ...], complex] = {}
    for row in vals:
        key = tuple(int(v) for v in row)
        out[key] = out.get(key, 0) + amp
    return out


@dataclass(frozen=True)
class SparseEncoding:
    """Encoding map as sparse columns: ``V|s> = sum_j amps[s, j] |indices[s, j]>``."""

    p: int
    n_leaves: int
    indices: npt.NDArray[np.int64] = field(repr=False)
    amps: npt.NDArray[np.complex128] = field(repr=False)

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.p,) * self.n_leaves

    def digits(self) -> npt.NDArray[np.int64]:
        """Leaf values of every support entry, shape ``(p, N, n_leaves)``."""
        out = np.empty(self.indices.shape + (self.n_leaves,), dtype=np.int64)
        rem = self.indices.copy()
        for leaf in range(self.n_leaves - 1, -1, -1):
            out[..., leaf] = rem % self.p
            rem //= self.p
        return out


_INDEX_LIMIT = 2**62


def sparse_encoding(scheme: Scheme) -> SparseEncoding:
    p = scheme.p
    if p ** scheme.n_leaves >= _INDEX_LIMIT:
        raise CapExceeded(f"{scheme.n_leaves} leaves of dimension {p} overflow 64-bit basis indices")

    def walk(node: Node):
        if isinstance(node, Leaf):
            return np.arange(p, dtype=np.int64)[:, None], np.ones((p, 1), dtype=np.complex128), 1
        parts = [walk(c) for c in node.children]
        values = threshold_values(node.k, p, node.alphas)
        q = values.shape[1]
        idx = np.zeros((p, q, 1), dtype=np.int64)
        amp = np.full((p, q, 1), p ** (-(node.k - 1) / 2), dtype=np.complex128)
        width = 0
        for i, (cidx, camp, cl) in enumerate(parts):
            sel_idx = cidx[values[:, :, i]]
            sel_amp = camp[values[:, :, i]]
            idx = (idx[:, :, :, None] * p**cl + sel_idx[:, :, None, :]).reshape(p, q, -1)
            amp = (amp[:, :, :, None] * sel_amp[:, :, None, :]).reshape(p, q, -1)
            width += cl
        return idx.reshape(p, -1), amp.reshape(p, -1), width

    idx, amp, width = walk(scheme.root)
    return SparseEncoding(p, width, idx, amp)


def node_isometry(node: Node, p: int) -> npt.NDArray[np.complex128]:
    """Dense encoding matrix of shape ``(p**leaves, p)``, built by tensor contraction."""
    if isinstance(node, Leaf):
        return np.eye(p, dtype=np.complex128)
    qsim.check_vector_dim(p ** count_leaves(node))
    m = node.n
    values = threshold_values(node.k, p, node.alphas)
    core = np.zeros((p,) * m + (p,), dtype=np.complex128)
    secrets = np.repeat(np.arange(p), values.shape[1])
    flat = values.reshape(-1, m)
    np.add.at(core, tuple(flat.T) + (secrets,), p ** (-(node.k - 1) / 2))
    tensor = core
    for i, child in enumerate(node.children):
        iso = node_isometry(child, p)
        tensor = np.moveaxis(np.tensordot(iso, tensor, axes=(1, i)), 0, i)
    return tensor.reshape(-1, p)


def encode(scheme: Scheme, secret: StateVector | Sequence[complex]) -> StateVector:
    """Global pure state over all leaves, environment included."""
    amps = secret.amplitudes if isinstance(secret, StateVector) else np.asarray(secret, dtype=np.complex128)
    if amps.shape != (scheme.p,):
        raise DomainError(f"secret must be a single qupit of dimension {scheme.p}")
    iso = node_isometry(scheme.root, scheme.p)
    return StateVector(scheme.leaf_dims, iso @ amps)


################################################################################
# access structure implied by the tree


def _recoverable(node: Node, held: set[int], counter: Iterator[int]) -> bool:
    if isinstance(node, Leaf):
        return next(counter) in held
    hits = [_recoverable(c, held, counter) for c in node.children]
    return sum(hits) >= node.k


def tree_authorizes(root: Node, leaves: Iterable[int]) -> bool:
    """Secret recoverable from ``leaves`` when each node needs ``k`` recovered shares."""
    return _recoverable(root, set(leaves), itertools.count())


def tree_structure(root: Node, parties: Iterable[int]) -> AccessStructure:
    owners = [leaf.owner for leaf in iter_leaves(root)]

    def pred(t: frozenset[int]) -> bool:
        return tree_authorizes(root, [i for i, o in enumerate(owners) if o in t])

    return access.from_predicate(parties, pred)


################################################################################
# constructions


def _check_threshold(k: int, n: int) -> None:
    if not (n / 2 < k <= n):
        raise NoCloningError(
            f"(({k},{n})) threshold scheme violates no-cloning: need n/2 < k <= n "
            f"(two disjoint sets of {k} shares would each hold a copy of the secret)"
            if k <= n / 2
            else f"(({k},{n})) is not a threshold scheme: need k <= n"
        )


def _check_p(p: int | None, needed: int) -> int:
    if p is None:
        return gfcodes.next_prime(needed)
    if not gfcodes.is_prime(int(p)):
        raise ConstructionError(f"field size p={p} is not prime")
    if p < needed:
        raise ConstructionError(f"field size p={p} is too small: need a prime >= {needed}")
    return int(p)


def threshold_node(k: int, owners: Sequence[int | None]) -> Node:
    if k == 1 and len(owners) == 1:
        return Leaf(owners[0])
    return ThresholdNode(k, tuple(Leaf(o) for o in owners))


def build_threshold(k: int, n: int, p: int | None = None) -> Scheme:
    """((k, n)) scheme on parties ``1..n``; shares ``n+1 .. 2k-1`` go to the environment."""
    _check_threshold(k, n)
    width = 2 * k - 1
    p = _check_p(p, max(width, 2))
    owners = list(range(1, n + 1)) + [None] * (width - n)
    return Scheme(p, threshold_node(k, owners), tuple(range(1, n + 1)), access.threshold_structure(k, n))


def relabel(scheme: Scheme, mapping: Mapping[int, int]) -> Scheme:
    """Rename parties; unmapped parties keep their labels."""
    def ren(x: int) -> int:
        return mapping.get(x, x)

    parties = tuple(ren(x) for x in scheme.parties)
    if len(set(parties)) != len(parties):
        raise DomainError("relabelling merges parties; use bundling explicitly")
    root = map_leaves(scheme.root, lambda lf: Leaf(None if lf.owner is None else ren(lf.owner)))
    structure = access.normalize([[ren(x) for x in s] for s in scheme.declared_structure.minimal_sets], parties)
    return Scheme(scheme.p, root, parties, structure)


def concatenate(outer: Scheme, inners: Sequence[Scheme | None]) -> Scheme:
    """Expand outer share ``i`` (leaf ``i``) into the secret of ``inners[i]``.

    ``None`` keeps the outer leaf as it is.  Party labels are global: the result's
    parties are the union of all inner parties and the owners of kept leaves.
    Schemes whose root is a bare leaf adapt to any modulus.
    """
    if len(inners) != outer.n_leaves:
        raise DomainError(f"need one entry per outer share ({outer.n_leaves}), got {len(inners)}")
    moduli = {s.p for s in [outer, *[i for i in inners if i is not None]] if not isinstance(s.root, Leaf)}
    if len(moduli) > 1:
        raise DomainError(f"modulus mismatch between concatenated schemes: {sorted(moduli)}")
    p = moduli.pop() if moduli else outer.p
    parties: set[int] = set()
    counter = itertools.count()

    def expand(leaf: Leaf) -> Node:
        inner = inners[next(counter)]
        if inner is None:
            if leaf.owner is not None:
                parties.add(leaf.owner)
            return leaf
        parties.update(inner.parties)
        return inner.root

    root = map_leaves(outer.root, expand)
    structure = tree_structure(root, parties)
    return Scheme(p, root, tuple(sorted(parties)), structure)


def purify(scheme: Scheme, new_party: int | None = None) -> Scheme:
    """Hand every environment leaf to one new party, making the scheme pure.

    The new structure follows the purification rule: old sets keep their status,
    and a set holding the new share is authorized iff the old parties outside it
    are unauthorized.
    """
    if scheme.is_pure:
        warnings.warn("scheme is already pure; purify is a no-op", stacklevel=2)
        return scheme
    new_party = max(scheme.parties, default=0) + 1 if new_party is None else int(new_party)
    if new_party in scheme.parties and scheme.party_leaves([new_party]):
        raise DomainError(f"party {new_party} already holds shares")
    old = scheme.declared_structure
    parties = tuple(sorted(set(scheme.parties) | {new_party}))

    def pred(t: frozenset[int]) -> bool:
        if new_party not in t:
            return old.is_authorized(t)
        return not old.is_authorized(old.universe - t)

    structure = access.from_predicate(parties, pred)
    root = map_leaves(scheme.root, lambda lf: Leaf(new_party) if lf.owner is None else lf)
    return Scheme(scheme.p, root, parties, structure)


def discard(scheme: Scheme, party: int) -> Scheme:
    """Give ``party``'s leaves to the environment."""
    structure = access.restrict(scheme.declared_structure, party)
    root = map_leaves(scheme.root, lambda lf: Leaf(None) if lf.owner == party else lf)
    return Scheme(scheme.p, root, structure.parties, structure)


def _unanimity_node(parties: Sequence[int]) -> Node:
    """((k, k)) on the given parties, realized as ((k, 2k-1)) with k-1 environment shares."""
    k = len(parties)
    return threshold_node(k, list(parties) + [None] * (k - 1))


def _purify_node(node: Node, party: int) -> Node:
    return map_leaves(node, lambda lf: Leaf(party) if lf.owner is None else lf)


def _general_node(structure: AccessStructure, completion: Any = "greedy") -> Node:
    access.require_no_cloning(structure)
    sets = structure.minimal_sets
    if len(sets) == 1:
        return _unanimity_node(sorted(sets[0]))
    if access.is_maximal(structure):
        # pure scheme: build the structure without the top party, then purify onto it
        top = structure.parties[-1]
        return _purify_node(_general_node(access.restrict(structure, top)), top)
    cover = _completion(structure, completion)
    r = len(sets)
    children = [_unanimity_node(sorted(a)) for a in sets]
    children += [_general_node(cover) for _ in range(r - 1)]
    return ThresholdNode(r, tuple(children))


def _completion(structure: AccessStructure, completion: Any) -> AccessStructure:
    if isinstance(completion, AccessStructure):
        cover = access.with_parties(completion, structure.parties)
        if not access.no_cloning_ok(cover) or not access.is_maximal(cover):
            raise ConstructionError(f"completion {cover} is not a maximal quantum access structure")
        if not all(cover.is_authorized(a) for a in structure.minimal_sets):
            raise ConstructionError(f"completion {cover} does not authorize every set of {structure}")
        return cover
    if completion == "greedy":
        return access.maximal_completion(structure)
    if completion == "trivial":
        common = frozenset.intersection(*structure.minimal_sets)
        if not common:
            raise ConstructionError(f"no party lies in every minimal set of {structure}; trivial completion impossible")
        return access.AccessStructure(structure.parties, (frozenset([min(common)]),))
    raise DomainError(f"unknown completion {completion!r}")


def build_general(structure: AccessStructure, p: int | None = None, completion: Any = "greedy") -> Scheme:
    """Scheme for any access structure obeying monotonicity and no-cloning.

    ``r`` minimal sets give an outer ((r, 2r-1)) node; its first ``r`` shares are
    ((|A_i|, |A_i|)) schemes on the minimal sets, the remaining ``r - 1`` are
    copies of a pure scheme for a maximal structure covering the input.  A
    maximal structure is built by dropping its highest-index party, building
    the rest, and purifying onto the dropped party.  ``completion`` picks the
    cover at the top level ("greedy", "trivial", or an explicit structure);
    nested levels use the greedy completion.
    """
    access.require_no_cloning(structure)
    root = _general_node(structure, completion)
    p = _check_p(p, required_prime(root))
    scheme = Scheme(p, root, structure.parties, structure)
    produced = tree_structure(root, structure.parties)
    if produced != structure:  # pragma: no cover - construction invariant
        raise ConstructionError(f"construction produced {produced}, expected {structure}")
    return scheme


################################################################################
# reconstruction


@dataclass(frozen=True)
class DecodePlan:
    """Basis permutations on authorized leaves that isolate the secret.

    ``ops`` are ``(registers, perm)`` pairs applied in order; afterwards the
    secret sits on leaf ``register`` (the lowest-numbered leaf of the set).
    """

    leaves: tuple[int, ...]
    ops: tuple[tuple[tuple[int, ...], npt.NDArray[np.int64]], ...]
    register: int


def _digits_to_index(digits: npt.NDArray[np.int64], p: int) -> npt.NDArray[np.int64]:
    k = digits.shape[-1]
    return digits @ (p ** np.arange(k - 1, -1, -1, dtype=np.int64))


def _interpolation_perm(node: ThresholdNode, chosen: Sequence[int], p: int) -> npt.NDArray[np.int64]:
    """Permutation ``|f(alpha_J)> -> |s, f(alpha_M)>`` on the chosen share registers."""
    k = node.k
    missing = [i for i in range(node.n) if i not in chosen]
    v_j = gfcodes.vandermonde([node.alphas[i] for i in chosen], k - 1, p)
    try:
        to_coeffs = gfcodes.inverse_matrix(v_j, p)
    except DomainError as exc:
        raise DomainError(f"evaluation points {node.alphas} are not distinct; cannot interpolate") from exc
    v_m = gfcodes.vandermonde([node.alphas[i] for i in missing], k - 1, p)
    linear = np.vstack([to_coeffs[k - 1 : k], (v_m @ to_coeffs) % p]) % p
    inputs = np.indices((p,) * k).reshape(k, -1).T
    outputs = (inputs @ linear.T) % p
    return _digits_to_index(outputs, p)


def _swap_perm(p: int) -> npt.NDArray[np.int64]:
    a, b = np.divmod(np.arange(p * p), p)
    return b * p + a


def decode_plan(scheme: Scheme, parties: Iterable[int]) -> DecodePlan:
    parties = frozenset(parties)
    if not scheme.declared_structure.is_authorized(parties):
        raise UnauthorizedError(f"{access.set_name(parties)} is not authorized in {scheme.declared_structure}")
    held = set(scheme.party_leaves(parties))
    ops: list[tuple[tuple[int, ...], npt.NDArray[np.int64]]] = []
    counter = itertools.count()
    p = scheme.p

    def plan(node: Node) -> int | None:
        if isinstance(node, Leaf):
            idx = next(counter)
            return idx if idx in held else None
        regs = [plan(c) for c in node.children]
        got = [i for i, r in enumerate(regs) if r is not None]
        if len(got) < node.k:
            return None
        chosen = got[: node.k]
        if node.k > 1:
            ops.append((tuple(regs[i] for i in chosen), _interpolation_perm(node, chosen, p)))
        return regs[chosen[0]]

    register = plan(scheme.root)
    if register is None:
        raise UnauthorizedError(f"the share tree cannot be decoded from {access.set_name(parties)}")
    first = min(held)
    if register != first:
        ops.append(((register, first), _swap_perm(p)))
    return DecodePlan(tuple(sorted(held)), tuple(ops), first)


@dataclass(frozen=True)
class DecodeResult:
    state: StateVector
    register: int
    secret: DensityMatrix


def decode(scheme: Scheme, parties: Iterable[int], state: StateVector) -> DecodeResult:
    """Unitary on the parties' leaves leaving the secret on one of their registers."""
    if state.dims != scheme.leaf_dims:
        raise DomainError(f"state layout {state.dims} does not match the scheme's {scheme.leaf_dims}")
    plan = decode_plan(scheme, parties)
    out = state
    for regs, perm in plan.ops:
        out = qsim.apply_permutation(out, perm, regs)
    return DecodeResult(out, plan.register, qsim.partial_trace(out, [plan.register]))


def decode_permutation(scheme: Scheme, parties: Iterable[int]) -> tuple[DecodePlan, npt.NDArray[np.int64]]:
    """The whole decoding as one permutation of the basis of the parties' leaves."""
    plan = decode_plan(scheme, parties)
    pos = {leaf: i for i, leaf in enumerate(plan.leaves)}
    width = len(plan.leaves)
    p = scheme.p
    digits = np.indices((p,) * width).reshape(width, -1).T.copy()
    for regs, perm in plan.ops:
        cols = [pos[r] for r in regs]
        local = _digits_to_index(digits[:, cols], p)
        new = perm[local]
        for j in range(len(cols) - 1, -1, -1):
            digits[:, cols[j]] = new % p
            new = new // p
    return plan, _digits_to_index(digits, p)


@dataclass(frozen=True)
class LogicalUpdate:
    """Unitary ``V`` acting on ``where`` (the set's leaves, then any ancillas)."""

    matrix: npt.NDArray[np.complex128]
    where: tuple[int, ...]


def local_logical_update(
    scheme: Scheme,
    parties: Iterable[int],
    unitary: Any,
    ancilla_dims: Sequence[int] = (),
) -> LogicalUpdate:
    """``V`` on the parties' leaves with ``V encode(x) = encode(U x)``.

    ``V = D^-1 (U on the decoded secret register) D`` with ``D`` the decoding
    permutation.  ``unitary`` acts on the secret followed by ``ancilla_dims``
    registers, which are assumed to sit after all leaves of the global state.
    """
    plan, perm = decode_permutation(scheme, parties)
    p = scheme.p
    width = len(plan.leaves)
    d_t = p**width
    d_a = math.prod(ancilla_dims)
    u = np.asarray(unitary, dtype=np.complex128)
    if u.shape != (p * d_a, p * d_a):
        raise DomainError(f"unitary shape {u.shape} does not fit a secret of dimension {p} plus ancillas {tuple(ancilla_dims)}")
    if not np.allclose(u.conj().T @ u, np.eye(p * d_a), atol=1e-10):
        raise DomainError("the logical operation is not unitary")
    qsim.check_density_dim(d_t * d_a)
    dims = (p,) * width + tuple(ancilla_dims)
    reg = plan.leaves.index(plan.register)
    axes = (reg,) + tuple(range(width, width + len(ancilla_dims)))
    ident = np.eye(d_t * d_a, dtype=np.complex128).reshape(dims + (d_t * d_a,))
    sub = tuple(dims[a] for a in axes)
    op = np.tensordot(u.reshape(sub + sub), ident, axes=(tuple(range(len(axes), 2 * len(axes))), axes))
    op = np.moveaxis(op, tuple(range(len(axes))), axes).reshape(d_t * d_a, d_t * d_a)
    big = (perm[:, None] * d_a + np.arange(d_a)[None, :]).reshape(-1)
    dmat = np.zeros((d_t * d_a, d_t * d_a))
    dmat[big, np.arange(d_t * d_a)] = 1
    v = dmat.T @ op @ dmat
    where = plan.leaves + tuple(range(scheme.n_leaves, scheme.n_leaves + len(ancilla_dims)))
    return LogicalUpdate(v, where)


def logical_shift(p: int, amount: int = 1) -> npt.NDArray[np.complex128]:
    """``|s> -> |s + amount>``."""
    out = np.zeros((p, p), dtype=np.complex128)
    out[(np.arange(p) + amount) % p, np.arange(p)] = 1
    return out


def swap_unitary(d: int) -> npt.NDArray[np.complex128]:
    out = np.zeros((d * d, d * d), dtype=np.complex128)
    a, b = np.divmod(np.arange(d * d), d)
    out[b * d + a, np.arange(d * d)] = 1
    return out
