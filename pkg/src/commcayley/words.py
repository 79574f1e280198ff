"""Reduced-word arithmetic in finitely generated free groups.

A :class:`Word` is an immutable, freely reduced sequence of letters.
Letters are nonzero integers: ``+i`` is the ``i``-th positive generator
(1-based) and ``-i`` its inverse.  The text form uses ``a``..``z`` for
positive generators and ``A``..``Z`` for inverses, so rank is capped at
26 at the text interface only; the internal representation is unbounded.

Because words are always reduced, equal group elements compare equal and
hash equal, which every search structure in this package relies on.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Sequence


class WordSyntaxError(ValueError):
    """Raised on malformed word text; carries the offending column."""

    def __init__(self, message: str, column: int | None = None):
        super().__init__(message)
        self.column = column


def reduce_letters(letters: Iterable[int]) -> tuple[int, ...]:
    """Freely reduce a raw letter sequence (stack cancellation)."""
    out: list[int] = []
    push = out.append
    for x in letters:
        if out and out[-1] == -x:
            out.pop()
        else:
            push(x)
    return tuple(out)


class Word:
    """A freely reduced word in the free group of a fixed rank.

    Words are value objects: immutable, hashable, totally ordered by
    shortlex.  All binary operations require equal ranks.
    """

    __slots__ = ("letters", "rank", "_hash")

    def __init__(self, letters: Iterable[int], rank: int, *, _reduced: bool = False):
        lets = tuple(letters)
        if not _reduced:
            lets = reduce_letters(lets)
        if rank < 0:
            raise ValueError("rank must be non-negative")
        for x in lets:
            if x == 0 or abs(x) > rank:
                raise ValueError(f"letter {x} outside rank-{rank} alphabet")
        object.__setattr__(self, "letters", lets)
        object.__setattr__(self, "rank", rank)
        object.__setattr__(self, "_hash", hash((lets, rank)))

    def __setattr__(self, name, value):
        raise AttributeError("Word is immutable")

    # -- construction helpers -------------------------------------------------

    @classmethod
    def _make(cls, letters: tuple[int, ...], rank: int) -> "Word":
        """Fast path for internally produced, already-reduced letters."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "letters", letters)
        object.__setattr__(obj, "rank", rank)
        object.__setattr__(obj, "_hash", hash((letters, rank)))
        return obj

    # -- group operations -----------------------------------------------------

    def __mul__(self, other: "Word") -> "Word":
        _check_rank(self, other)
        a, b = self.letters, other.letters
        i, j, n = len(a), 0, len(b)
        while i > 0 and j < n and a[i - 1] == -b[j]:
            i -= 1
            j += 1
        return Word._make(a[:i] + b[j:], self.rank)

    def __invert__(self) -> "Word":
        return Word._make(tuple(-x for x in reversed(self.letters)), self.rank)

    def __pow__(self, n: int) -> "Word":
        if n < 0:
            return (~self) ** (-n)
        result = Word._make((), self.rank)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def conjugated_by(self, x: "Word") -> "Word":
        """Return ``x^-1 * self * x``."""
        return (~x) * self * x

    # -- queries ----------------------------------------------------------------

    @property
    def is_identity(self) -> bool:
        return not self.letters

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[int]:
        return iter(self.letters)

    def exponent_sums(self) -> tuple[int, ...]:
        sums = [0] * self.rank
        for x in self.letters:
            sums[abs(x) - 1] += 1 if x > 0 else -1
        return tuple(sums)

    def cyclically_reduced(self) -> tuple["Word", "Word"]:
        """Split ``self = c * core * c^-1`` with ``core`` cyclically reduced.

        Returns ``(core, c)``.
        """
        lets = self.letters
        i, j = 0, len(lets)
        while j - i >= 2 and lets[i] == -lets[j - 1]:
            i += 1
            j -= 1
        conj = Word._make(lets[:i], self.rank)
        core = Word._make(lets[i:j], self.rank)
        return core, conj

    # -- ordering / identity -----------------------------------------------------

    def shortlex_key(self) -> tuple:
        # positive generator sorts just before its inverse: a < A < b < B < ...
        return (len(self.letters), tuple(2 * abs(x) - (x > 0) for x in self.letters))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Word):
            return NotImplemented
        return self.rank == other.rank and self.letters == other.letters

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: "Word") -> bool:
        _check_rank(self, other)
        return self.shortlex_key() < other.shortlex_key()

    def __le__(self, other: "Word") -> bool:
        return self == other or self < other

    # -- text form ----------------------------------------------------------------

    def __str__(self) -> str:
        return format_letters(self.letters)

    def __repr__(self) -> str:
        return f"Word({str(self)!r}, rank={self.rank})"


def _check_rank(u: Word, v: Word) -> None:
    if u.rank != v.rank:
        raise ValueError(f"rank mismatch: {u.rank} vs {v.rank}")


def identity(rank: int) -> Word:
    return Word._make((), rank)


def generator(index: int, rank: int, sign: int = 1) -> Word:
    if not 0 <= index < rank:
        raise ValueError(f"generator index {index} outside rank {rank}")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return Word._make((sign * (index + 1),), rank)


def commutator(a: Word, b: Word) -> Word:
    """The commutator ``[a, b] = a b a^-1 b^-1``."""
    _check_rank(a, b)
    return a * b * ~a * ~b


def in_commutator_subgroup(w: Word) -> bool:
    """True iff every generator's signed exponent sum vanishes."""
    return all(s == 0 for s in w.exponent_sums())


# -- text encoding ------------------------------------------------------------------


def parse_letters(text: str, rank: int | None = None) -> tuple[tuple[int, ...], int]:
    """Parse ``text`` into raw letters, returning ``(letters, rank)``.

    Lowercase letters are positive generators, uppercase their inverses.
    With ``rank=None`` the smallest sufficient rank is inferred.
    """
    letters: list[int] = []
    needed = 0
    for col, ch in enumerate(text):
        if "a" <= ch <= "z":
            x = ord(ch) - ord("a") + 1
        elif "A" <= ch <= "Z":
            x = -(ord(ch) - ord("A") + 1)
        else:
            raise WordSyntaxError(f"invalid character {ch!r} at column {col}", col)
        if rank is not None and abs(x) > rank:
            raise WordSyntaxError(
                f"letter {ch!r} at column {col} exceeds rank {rank}", col
            )
        needed = max(needed, abs(x))
        letters.append(x)
    return tuple(letters), needed if rank is None else rank


def parse_word(text: str, rank: int | None = None) -> Word:
    """Parse and reduce; unreduced input is accepted and reduced."""
    letters, r = parse_letters(text, rank)
    return Word(letters, r)


def format_letters(letters: Sequence[int]) -> str:
    out = []
    for x in letters:
        if abs(x) > 26:
            raise ValueError("text form only supports rank <= 26")
        base = ord("a") if x > 0 else ord("A")
        out.append(chr(base + abs(x) - 1))
    return "".join(out)


# -- endomorphisms ------------------------------------------------------------------


class Endomorphism:
    """A map of the free group given by images of the positive generators.

    Applied without checking invertibility; automorphisms are just the
    invertible special case.
    """

    __slots__ = ("images",)

    def __init__(self, images: Sequence[Word]):
        images = tuple(images)
        if not images:
            raise ValueError("endomorphism needs at least one generator image")
        r = images[0].rank
        for w in images:
            if w.rank != r:
                raise ValueError("generator images must share one rank")
        if len(images) != r:
            raise ValueError(f"expected {r} images for rank {r}, got {len(images)}")
        self.images = images

    @property
    def rank(self) -> int:
        return len(self.images)

    @classmethod
    def identity(cls, rank: int) -> "Endomorphism":
        return cls(tuple(generator(i, rank) for i in range(rank)))

    @classmethod
    def inner(cls, x: Word) -> "Endomorphism":
        """Conjugation ``g -> x g x^-1`` as an endomorphism."""
        return cls(tuple(x * generator(i, x.rank) * ~x for i in range(x.rank)))

    def __call__(self, w: Word) -> Word:
        if w.rank != self.rank:
            raise ValueError(f"rank mismatch: {w.rank} vs {self.rank}")
        out: list[int] = []
        for x in w.letters:
            img = self.images[abs(x) - 1].letters
            chunk = img if x > 0 else tuple(-y for y in reversed(img))
            for y in chunk:
                if out and out[-1] == -y:
                    out.pop()
                else:
                    out.append(y)
        return Word._make(tuple(out), w.rank)

    def __repr__(self) -> str:
        imgs = ", ".join(
            f"{format_letters((i + 1,))}->{w}" for i, w in enumerate(self.images)
        )
        return f"Endomorphism({imgs})"
