"""Loops of commutators through the identity, and K-move search.

A loop is a finite list of witness pairs whose commutators multiply to
the identity.  A K-move cuts out a contiguous run of steps and splices
in replacement steps with the same endpoint product, subject to
``|removed| + |inserted| <= K``.  Replacement steps are drawn from a
truncated commutator alphabet, so "not found" outcomes are always
relative to the search vocabulary and budget, never impossibility
claims.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .metric import CommutatorAlphabet
from .words import Word, WordSyntaxError, commutator, identity, parse_word

DEFAULT_K = 4  # small enough for the marking-change moves that arise in practice


class MoveError(ValueError):
    """A K-move that does not validate against its loop."""


Pair = tuple[Word, Word]


@dataclass(frozen=True)
class Loop:
    """An ordered list of commutator witness pairs with trivial product."""

    steps: tuple[Pair, ...]

    def __len__(self) -> int:
        return len(self.steps)

    def step_words(self) -> tuple[Word, ...]:
        return tuple(commutator(a, b) for a, b in self.steps)

    def rank(self) -> int | None:
        return self.steps[0][0].rank if self.steps else None

    def residue(self) -> Word | None:
        """Reduced product of all steps; None for the empty loop."""
        if not self.steps:
            return None
        out = identity(self.steps[0][0].rank)
        for a, b in self.steps:
            out = out * commutator(a, b)
        return out

    def key(self) -> tuple:
        return tuple(w.letters for w in self.step_words())

    def canonical_rotation_key(self) -> tuple:
        """Lex-least cyclic rotation of the step words (rotation-invariant)."""
        k = self.key()
        if not k:
            return k
        return min(k[i:] + k[:i] for i in range(len(k)))

    def __str__(self) -> str:
        return "".join(f"({a!s},{b!s})" for a, b in self.steps)


def validate_loop(loop: Loop) -> tuple[bool, Word | None]:
    """Whether the step product reduces to the identity; returns the
    reduced residue for diagnostics when it does not."""
    res = loop.residue()
    if res is None or res.is_identity:
        return True, None
    return False, res


@dataclass(frozen=True)
class KMove:
    start: int
    removed: tuple[Pair, ...]
    inserted: tuple[Pair, ...]
    K: int

    @property
    def size(self) -> int:
        return len(self.removed) + len(self.inserted)

    def inverted(self) -> "KMove":
        return KMove(self.start, self.inserted, self.removed, self.K)

    def to_json_dict(self) -> dict:
        return {
            "start": self.start,
            "removed": [[str(a), str(b)] for a, b in self.removed],
            "inserted": [[str(a), str(b)] for a, b in self.inserted],
            "K": self.K,
        }


def _pairs_product(pairs: tuple[Pair, ...], rank: int) -> Word:
    out = identity(rank)
    for a, b in pairs:
        out = out * commutator(a, b)
    return out


def apply_move(loop: Loop, move: KMove) -> Loop:
    """Apply a validated K-move; the result is checked to still be a loop."""
    n = len(loop.steps)
    if not 0 <= move.start <= n or move.start + len(move.removed) > n:
        raise MoveError(f"move indices [{move.start}, ...) out of range for {n} steps")
    if move.size > move.K:
        raise MoveError(f"move touches {move.size} steps, exceeding K={move.K}")
    slice_ = loop.steps[move.start : move.start + len(move.removed)]
    if slice_ != move.removed:
        raise MoveError("removed steps do not match the loop at the given index")
    rank = loop.rank()
    if rank is None:
        if move.removed:
            raise MoveError("cannot remove steps from the empty loop")
        rank = move.inserted[0][0].rank if move.inserted else None
    if rank is not None:
        removed_prod = _pairs_product(move.removed, rank)
        inserted_prod = _pairs_product(move.inserted, rank)
        if removed_prod != inserted_prod:
            raise MoveError(
                f"endpoint mismatch: removed product {removed_prod!s} vs "
                f"inserted product {inserted_prod!s}, residue "
                f"{(~inserted_prod) * removed_prod!s}"
            )
    new = Loop(
        loop.steps[: move.start]
        + move.inserted
        + loop.steps[move.start + len(move.removed) :]
    )
    ok, res = validate_loop(new)
    if not ok:
        raise MoveError(f"move breaks loop validity, residue {res!s}")
    return new


@dataclass
class MoveSequence:
    start: Loop
    end: Loop
    moves: list[KMove] = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    def replay(self) -> Loop:
        """Re-apply every move through the validating path; no trust in
        the search that produced the sequence."""
        cur = self.start
        for m in self.moves:
            cur = apply_move(cur, m)
        if cur.key() != self.end.key():
            raise MoveError(
                f"replay ends at {cur!s}, expected {self.end!s}"
            )
        return cur

    def inverted(self) -> "MoveSequence":
        return MoveSequence(
            start=self.end,
            end=self.start,
            moves=[m.inverted() for m in reversed(self.moves)],
            stats=dict(self.stats),
        )

    def to_json_dict(self) -> dict:
        return {
            "v": 1,
            "from": str(self.start),
            "to": str(self.end),
            "moves": [m.to_json_dict() for m in self.moves],
            "stats": self.stats,
        }


# -- bounded search over loop space ---------------------------------------------


class _LoopSearch:
    def __init__(
        self,
        K: int,
        alphabet: CommutatorAlphabet,
        max_insert: int,
        scan_limit: int,
        insert2_cap: int,
    ):
        self.K = K
        self.alphabet = alphabet
        self.max_insert = max_insert
        self.scan_limit = scan_limit
        self.insert2_cap = insert2_cap
        self.scans_used = 0

    def neighbors(self, loop: Loop):
        """Deterministic K-move neighbors; replacements come from the
        alphabet (single members, or member pairs while scans last)."""
        steps = loop.steps
        n = len(steps)
        rank = self.alphabet.rank
        K = self.K
        for start in range(n):
            prod = identity(rank)
            for r in range(1, min(K, n - start) + 1):
                a, b = steps[start + r - 1]
                prod = prod * commutator(a, b)
                removed = steps[start : start + r]
                if prod.is_identity:
                    yield KMove(start, removed, (), K)
                    continue  # inserting members on top of id never helps r<=K
                if r + 1 <= K and prod in self.alphabet:
                    pair = self.alphabet.witness_for(prod)
                    if (pair,) != removed:
                        yield KMove(start, removed, (pair,), K)
                if (
                    r + 2 <= K
                    and self.max_insert >= 2
                    and self.scans_used < self.scan_limit
                ):
                    self.scans_used += 1
                    found = 0
                    for m in self.alphabet.members:
                        first = Word._make(m, rank)
                        rest = (~first) * prod
                        if rest.is_identity or rest not in self.alphabet:
                            continue
                        ins = (
                            self.alphabet.witness_for(first),
                            self.alphabet.witness_for(rest),
                        )
                        if ins != removed:
                            yield KMove(start, removed, ins, K)
                            found += 1
                            if found >= self.insert2_cap:
                                break


def _bfs(sources: list[Loop], search: _LoopSearch, budget: int, *, targets: set[tuple]):
    """BFS over concrete loops, stopping on the first target key reached."""
    parents: dict[tuple, tuple] = {}
    queue: deque[Loop] = deque()
    for s in sources:
        parents.setdefault(s.key(), (None, None, s))
        queue.append(s)
    expanded = 0
    while queue and expanded < budget:
        cur = queue.popleft()
        expanded += 1
        for move in search.neighbors(cur):
            new = apply_move(cur, move)
            k = new.key()
            if k in parents:
                continue
            parents[k] = (cur.key(), move, new)
            if k in targets:
                return k, parents, expanded
            queue.append(new)
    return None, parents, expanded


def _path_from(parents: dict, key: tuple) -> tuple[Loop, list[KMove], Loop]:
    moves: list[KMove] = []
    end = parents[key][2]
    while True:
        prev_key, move, loop = parents[key]
        if prev_key is None:
            return loop, list(reversed(moves)), end
        moves.append(move)
        key = prev_key


def reduce_loop(
    loop: Loop,
    K: int = DEFAULT_K,
    alphabet: CommutatorAlphabet | None = None,
    budget: int = 100_000,
    *,
    max_insert: int = 2,
    scan_limit: int = 64,
    insert2_cap: int = 4,
) -> MoveSequence | None:
    """Search for a K-move sequence ending at the empty loop.

    Returns None when the budget or vocabulary runs out -- never a claim
    of impossibility.  A found sequence is replay-verified before being
    returned.
    """
    ok, res = validate_loop(loop)
    if not ok:
        raise ValueError(f"not a loop: residue {res!s}")
    if not loop.steps:
        return MoveSequence(start=loop, end=loop, moves=[], stats={"nodes_expanded": 0})
    if alphabet is None:
        rank = loop.rank() or 1
        alphabet = CommutatorAlphabet.build(rank, 4)
    search = _LoopSearch(K, alphabet, max_insert, scan_limit, insert2_cap)
    hit, parents, expanded = _bfs([loop], search, budget, targets={()})
    stats = {
        "nodes_expanded": expanded,
        "nodes_seen": len(parents),
        "scans_used": search.scans_used,
        "budget": budget,
        "K": K,
        "L": alphabet.L,
    }
    if hit is None:
        return None
    start, moves, end = _path_from(parents, hit)
    seq = MoveSequence(start=start, end=end, moves=moves, stats=stats)
    seq.replay()
    return seq


def k_equivalent(
    loop1: Loop,
    loop2: Loop,
    K: int = DEFAULT_K,
    alphabet: CommutatorAlphabet | None = None,
    budget: int = 100_000,
    *,
    max_insert: int = 2,
    scan_limit: int = 64,
    insert2_cap: int = 4,
) -> MoveSequence | None:
    """Bidirectional K-move search between two loops.

    Both sides expand forward moves; the second side's leg is inverted
    when the frontiers meet, which is sound because every K-move
    inverts to a K-move.
    """
    for which, l in (("first", loop1), ("second", loop2)):
        ok, res = validate_loop(l)
        if not ok:
            raise ValueError(f"{which} argument is not a loop: residue {res!s}")
    if loop1.key() == loop2.key():
        return MoveSequence(start=loop1, end=loop2, moves=[], stats={"nodes_expanded": 0})
    if alphabet is None:
        rank = loop1.rank() or loop2.rank() or 1
        alphabet = CommutatorAlphabet.build(rank, 4)
    sides = {
        "a": {
            "search": _LoopSearch(K, alphabet, max_insert, scan_limit, insert2_cap),
            "parents": {loop1.key(): (None, None, loop1)},
            "frontier": deque([loop1]),
        },
        "b": {
            "search": _LoopSearch(K, alphabet, max_insert, scan_limit, insert2_cap),
            "parents": {loop2.key(): (None, None, loop2)},
            "frontier": deque([loop2]),
        },
    }
    expanded = 0
    meet: tuple | None = None
    while expanded < budget and meet is None:
        live = [s for s in ("a", "b") if sides[s]["frontier"]]
        if not live:
            break
        # expand the smaller frontier one full layer; ties go to side A
        name = min(live, key=lambda s: len(sides[s]["frontier"]))
        side = sides[name]
        other = sides["b" if name == "a" else "a"]["parents"]
        parents = side["parents"]
        frontier: deque[Loop] = side["frontier"]
        nxt: deque[Loop] = deque()
        while frontier and expanded < budget and meet is None:
            cur = frontier.popleft()
            expanded += 1
            for move in side["search"].neighbors(cur):
                new = apply_move(cur, move)
                k = new.key()
                if k in parents:
                    continue
                parents[k] = (cur.key(), move, new)
                nxt.append(new)
                if k in other:
                    meet = k
                    break
        frontier.extend(nxt)  # unprocessed layer (budget/meet exits) stays first
    parents_a = sides["a"]["parents"]
    parents_b = sides["b"]["parents"]
    stats = {
        "nodes_expanded": expanded,
        "nodes_seen": len(parents_a) + len(parents_b),
        "scans_used": sides["a"]["search"].scans_used + sides["b"]["search"].scans_used,
        "budget": budget,
        "K": K,
        "L": alphabet.L,
    }
    if meet is None:
        return None
    _, moves_a, mid_a = _path_from(parents_a, meet)
    _, moves_b, _mid_b = _path_from(parents_b, meet)
    leg_b = MoveSequence(start=loop2, end=mid_a, moves=moves_b).inverted()
    seq = MoveSequence(
        start=loop1, end=loop2, moves=moves_a + leg_b.moves, stats=stats
    )
    seq.replay()
    return seq


# -- loop text form ---------------------------------------------------------------


def parse_loop(text: str, rank: int | None = None) -> Loop:
    """Parse ``(a,b)(c,d)...`` using the standard word syntax."""
    text = text.strip()
    pairs: list[Pair] = []
    i = 0
    raw: list[tuple[str, str]] = []
    while i < len(text):
        if text[i] != "(":
            raise WordSyntaxError(f"expected '(' at column {i}", i)
        close = text.find(")", i)
        if close < 0:
            raise WordSyntaxError(f"unclosed '(' at column {i}", i)
        body = text[i + 1 : close]
        if body.count(",") != 1:
            raise WordSyntaxError(f"expected one ',' inside pair at column {i}", i)
        a_text, b_text = (part.strip() for part in body.split(","))
        raw.append((a_text, b_text))
        i = close + 1
    if rank is None:
        rank = max(
            (max((_needed_rank(a), _needed_rank(b))) for a, b in raw),
            default=1,
        )
    for a_text, b_text in raw:
        pairs.append((parse_word(a_text, rank), parse_word(b_text, rank)))
    return Loop(tuple(pairs))


def _needed_rank(text: str) -> int:
    return max((ord(c.lower()) - ord("a") + 1 for c in text), default=1)
