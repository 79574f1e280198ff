"""Seeded samplers shared by audits and tests.

Every sampler takes an explicit ``random.Random`` so that identical seeds
give identical streams; no module touches ambient randomness.
"""

from __future__ import annotations

import random

from .words import Word, commutator, identity


def random_reduced_word(rng: random.Random, rank: int, length: int) -> Word:
    """A uniformly chosen reduced word of exactly ``length`` letters."""
    letters: list[int] = []
    choices = [i for i in range(1, rank + 1)] + [-i for i in range(1, rank + 1)]
    while len(letters) < length:
        x = rng.choice(choices)
        if letters and letters[-1] == -x:
            continue
        letters.append(x)
    return Word(letters, rank)


def random_word_up_to(rng: random.Random, rank: int, max_length: int) -> Word:
    return random_reduced_word(rng, rank, rng.randrange(0, max_length + 1))


def random_commutator(
    rng: random.Random, rank: int, piece_length: int
) -> tuple[Word, tuple[Word, Word]]:
    """A random commutator together with its witness pair."""
    a = random_word_up_to(rng, rank, piece_length)
    b = random_word_up_to(rng, rank, piece_length)
    return commutator(a, b), (a, b)


def random_derived_word(
    rng: random.Random,
    rank: int,
    commutators: int,
    piece_length: int,
    max_length: int | None = None,
    max_tries: int = 200,
) -> tuple[Word, tuple[tuple[Word, Word], ...]]:
    """A random product of commutators (hence in the derived subgroup).

    Returns the reduced word and the pair list that produced it.  When
    ``max_length`` is given, resamples until the reduced word fits.
    """
    for _ in range(max_tries):
        pairs = []
        w = identity(rank)
        for _ in range(commutators):
            c, pair = random_commutator(rng, rank, piece_length)
            pairs.append(pair)
            w = w * c
        if max_length is None or len(w) <= max_length:
            return w, tuple(pairs)
    raise RuntimeError(
        f"could not sample a derived word of length <= {max_length} "
        f"in {max_tries} tries"
    )
