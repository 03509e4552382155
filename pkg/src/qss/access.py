"""Monotone access structures over a finite party universe.

Parties are positive integers; letters (1 -> A, 2 -> B, ...) are only a display
convenience.  A structure is stored as its minimal authorized sets, sorted by
size and then lexicographically.
"""

from __future__ import annotations

import itertools
import json
import string
from collections.abc import Callable, Iterable, Iterator
from dataclasses import dataclass
from typing import Any

from .errors import DomainError, FormatError, NoCloningError

FORMAT = "qss/1"
Party = int
PartySet = frozenset[int]


def party_name(party: Party) -> str:
    if 1 <= party <= 26:
        return string.ascii_uppercase[party - 1]
    return f"P{party}"


def set_name(parties: Iterable[Party]) -> str:
    names = [party_name(x) for x in sorted(parties)]
    return "".join(names) if all(len(n) == 1 for n in names) else "{" + ",".join(names) + "}"


def parse_set(text: str) -> PartySet:
    """``"ABC"`` -> ``{1, 2, 3}``."""
    out = set()
    for ch in text.strip():
        if ch not in string.ascii_uppercase:
            raise DomainError(f"cannot parse party letter {ch!r}")
        out.add(string.ascii_uppercase.index(ch) + 1)
    return frozenset(out)


def _order_key(s: Iterable[int]) -> tuple[int, tuple[int, ...]]:
    s = tuple(sorted(s))
    return (len(s), s)


def subsets(universe: Iterable[Party]) -> Iterator[PartySet]:
    """Every subset, ordered by size then lexicographically."""
    items = sorted(universe)
    for size in range(len(items) + 1):
        for combo in itertools.combinations(items, size):
            yield frozenset(combo)


@dataclass(frozen=True)
class AccessStructure:
    parties: tuple[Party, ...]
    minimal_sets: tuple[PartySet, ...]

    def __post_init__(self) -> None:
        parties = tuple(sorted(set(int(x) for x in self.parties)))
        if any(x < 1 for x in parties):
            raise DomainError("parties are positive integers")
        sets = [frozenset(int(x) for x in s) for s in self.minimal_sets]
        if not sets:
            raise DomainError("an access structure needs at least one authorized set")
        for s in sets:
            if not s:
                raise DomainError("the empty set cannot be authorized")
            if not s <= set(parties):
                raise DomainError(f"set {sorted(s)} uses parties outside {list(parties)}")
        for a, b in itertools.permutations(sets, 2):
            if a < b:
                raise DomainError(f"{set_name(b)} is not minimal: it contains {set_name(a)}")
        if len(set(sets)) != len(sets):
            raise DomainError("duplicate minimal sets")
        object.__setattr__(self, "parties", parties)
        object.__setattr__(self, "minimal_sets", tuple(sorted(sets, key=_order_key)))

    @property
    def n_parties(self) -> int:
        return len(self.parties)

    @property
    def universe(self) -> PartySet:
        return frozenset(self.parties)

    def complement(self, subset: Iterable[Party]) -> PartySet:
        return self.universe - frozenset(subset)

    def is_authorized(self, subset: Iterable[Party]) -> bool:
        subset = frozenset(subset)
        return any(m <= subset for m in self.minimal_sets)

    def classify(self, subset: Iterable[Party]) -> str:
        subset = frozenset(subset)
        if not subset <= self.universe:
            raise DomainError(f"{sorted(subset)} is not a subset of the parties {list(self.parties)}")
        return "authorized" if self.is_authorized(subset) else "unauthorized"

    def authorized_sets(self) -> list[PartySet]:
        return [t for t in subsets(self.parties) if self.is_authorized(t)]

    def __str__(self) -> str:
        return " OR ".join(set_name(s) for s in self.minimal_sets)

    def to_dict(self) -> dict[str, Any]:
        natural = self.parties == tuple(range(1, self.n_parties + 1))
        return {
            "format": FORMAT,
            "kind": "access_structure",
            "parties": self.n_parties if natural else list(self.parties),
            "minimal_sets": [sorted(s) for s in self.minimal_sets],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> AccessStructure:
        try:
            parties = data["parties"]
            universe = range(1, int(parties) + 1) if isinstance(parties, int) else parties
            return normalize(data["minimal_sets"], universe)
        except (KeyError, TypeError) as exc:
            raise FormatError(f"malformed access structure: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> AccessStructure:
        return cls.from_dict(json.loads(text))


def normalize(sets: Iterable[Iterable[Party] | str], parties: Iterable[Party] | int | None = None) -> AccessStructure:
    """Minimal sets of the monotone closure of ``sets``.

    Strings are read as party letters.  ``parties`` defaults to ``1..max party``.
    """
    family = {parse_set(s) if isinstance(s, str) else frozenset(int(x) for x in s) for s in sets}
    if not family:
        raise DomainError("empty family of authorized sets")
    minimal = [s for s in family if not any(o < s for o in family)]
    if parties is None:
        parties = range(1, max(max(s) for s in family if s) + 1) if any(family) else ()
    elif isinstance(parties, int):
        parties = range(1, parties + 1)
    return AccessStructure(tuple(parties), tuple(minimal))


def from_predicate(parties: Iterable[Party], authorized: Callable[[PartySet], bool]) -> AccessStructure:
    """Structure whose authorized sets are exactly those where ``authorized`` holds.

    The predicate is assumed monotone; minimal sets are read off by enumeration.
    """
    parties = tuple(sorted(parties))
    family = [t for t in subsets(parties) if authorized(t)]
    if not family:
        raise DomainError("no subset is authorized")
    return normalize(family, parties)


def classify(structure: AccessStructure, subset: Iterable[Party]) -> str:
    return structure.classify(subset)


def cloning_violation(structure: AccessStructure) -> tuple[PartySet, PartySet] | None:
    """A pair ``(later, earlier)`` of disjoint minimal sets, if any."""
    sets = structure.minimal_sets
    for j, later in enumerate(sets):
        for earlier in sets[:j]:
            if not later & earlier:
                return later, earlier
    return None


def no_cloning_ok(structure: AccessStructure) -> bool:
    """True iff every two minimal sets intersect."""
    return cloning_violation(structure) is None


def require_no_cloning(structure: AccessStructure) -> None:
    bad = cloning_violation(structure)
    if bad is not None:
        later, earlier = bad
        comp = structure.complement(later)
        msg = (
            f"access structure {structure} violates no-cloning: {set_name(later)} cannot be "
            f"authorized since its complement {set_name(comp)} is already authorized"
        )
        if comp != earlier:
            msg += f" (it contains {set_name(earlier)})"
        raise NoCloningError(msg)


def is_maximal(structure: AccessStructure) -> bool:
    """True iff exactly one of ``T`` and its complement is authorized, for every ``T``."""
    return all(
        structure.is_authorized(t) != structure.is_authorized(structure.complement(t))
        for t in subsets(structure.parties)
    )


def maximal_completion(structure: AccessStructure) -> AccessStructure:
    """Greedily add authorized sets until the structure is maximal.

    Candidates are the subsets containing the highest-index party, scanned by
    size and then lexicographically; a candidate is added when it and its
    complement are both still unauthorized.  Every undecided pair ``{T,
    complement}`` has exactly one member containing that party, so one pass
    yields a maximal structure.
    """
    require_no_cloning(structure)
    top = structure.parties[-1]
    family = list(structure.minimal_sets)
    for cand in subsets(structure.parties):
        if top not in cand:
            continue
        comp = structure.complement(cand)
        if not any(m <= cand for m in family) and not any(m <= comp for m in family):
            family.append(cand)
    return normalize(family, structure.parties)


def restrict(structure: AccessStructure, dropped: Party) -> AccessStructure:
    """Discard one party: keep the minimal sets avoiding it."""
    if dropped not in structure.universe:
        raise DomainError(f"party {dropped} is not in {list(structure.parties)}")
    kept = [s for s in structure.minimal_sets if dropped not in s]
    if not kept:
        raise DomainError(
            f"degenerate restriction: every minimal set of {structure} contains {party_name(dropped)}"
        )
    return normalize(kept, [x for x in structure.parties if x != dropped])


def is_important(structure: AccessStructure, party: Party) -> bool:
    return any(party in s for s in structure.minimal_sets)


def threshold_structure(k: int, n: int) -> AccessStructure:
    if not 1 <= k <= n:
        raise DomainError(f"need 1 <= k <= n, got k={k}, n={n}")
    return normalize(itertools.combinations(range(1, n + 1), k), n)


def trivial_structure(parties: Iterable[Party]) -> AccessStructure:
    """Only the full party set is authorized."""
    parties = tuple(parties)
    return AccessStructure(parties, (frozenset(parties),))


def with_parties(structure: AccessStructure, parties: Iterable[Party]) -> AccessStructure:
    """Same minimal sets over a (larger) party universe."""
    return normalize(structure.minimal_sets, parties)
