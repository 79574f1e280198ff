"""The commutator-length metric with certified bounds.

Distances live in the Cayley graph of the derived subgroup whose
generators are *all* commutators.  That generating set is infinite, so
every search here runs over the truncated alphabet ``S_L`` of
commutators ``[a, b]`` with ``|a| + |b| <= L``.  Upper bounds come with
a verifiable witness and are sound unconditionally; minimality and
search-based lower bounds are always relative to the stated budgets
``(L, depth)`` and carry that radius in their evidence.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .words import Word, commutator, identity, in_commutator_subgroup, parse_word

DEFAULT_WORD_CAP = 256

SCHEMA_VERSION = 1


class DomainError(ValueError):
    """Input outside an operation's domain (e.g. not in the derived subgroup)."""


def _require_derived(w: Word, what: str = "word") -> None:
    if not in_commutator_subgroup(w):
        raise DomainError(f"{what} {w!s} is not in the commutator subgroup")


# -- raw tuple arithmetic (hot paths avoid Word construction) -----------------


def _mul(a: tuple, b: tuple) -> tuple:
    i, j, n = len(a), 0, len(b)
    while i > 0 and j < n and a[i - 1] == -b[j]:
        i -= 1
        j += 1
    return a[:i] + b[j:]


def _inv(a: tuple) -> tuple:
    return tuple(-x for x in reversed(a))


def reduced_words_by_length(rank: int, max_length: int) -> list[list[tuple]]:
    """All reduced letter tuples grouped by length, in generation order."""
    layers: list[list[tuple]] = [[()]]
    for _ in range(max_length):
        layer = []
        for w in layers[-1]:
            last = w[-1] if w else 0
            for x in itertools.chain(range(1, rank + 1), range(-1, -rank - 1, -1)):
                if x != -last:
                    layer.append(w + (x,))
        layers.append(layer)
    return layers


# -- factorizations and certificates ------------------------------------------


@dataclass(frozen=True)
class Factorization:
    """An ordered list of pairs witnessing ``product [a_i, b_i] = target``."""

    pairs: tuple[tuple[Word, Word], ...]

    def __len__(self) -> int:
        return len(self.pairs)

    def product(self) -> Word:
        if not self.pairs:
            raise ValueError("empty factorization has no ambient rank")
        out = identity(self.pairs[0][0].rank)
        for a, b in self.pairs:
            out = out * commutator(a, b)
        return out

    def validate(self, target: Word) -> None:
        if not self.pairs:
            if not target.is_identity:
                raise ValueError(f"empty factorization cannot witness {target!s}")
            return
        prod = self.product()
        if prod != target:
            raise ValueError(
                f"factorization product {prod!s} does not equal target {target!s}"
            )

    def conjugated_by(self, x: Word) -> "Factorization":
        return Factorization(
            tuple((a.conjugated_by(x), b.conjugated_by(x)) for a, b in self.pairs)
        )

    def inverted(self) -> "Factorization":
        # (s_1 ... s_n)^-1 = s_n^-1 ... s_1^-1 and [a,b]^-1 = [b,a]
        return Factorization(tuple((b, a) for a, b in reversed(self.pairs)))


@dataclass
class BoundCertificate:
    """Lower/upper bounds on commutator length with checkable provenance."""

    word: Word
    lower: int
    upper: int | None
    witness: Factorization | None
    lower_evidence: dict
    budgets: dict

    @property
    def exact(self) -> bool:
        return self.upper is not None and self.lower == self.upper

    def to_json_dict(self) -> dict:
        return {
            "v": SCHEMA_VERSION,
            "word": str(self.word),
            "lower": self.lower,
            "upper": "unknown" if self.upper is None else self.upper,
            "exact": self.exact,
            "witness": None
            if self.witness is None
            else [[str(a), str(b)] for a, b in self.witness.pairs],
            "evidence": self.lower_evidence,
            "budgets": self.budgets,
        }

    @classmethod
    def from_json_dict(cls, d: dict, rank: int) -> "BoundCertificate":
        upper = d["upper"]
        witness = d.get("witness")
        return cls(
            word=parse_word(d["word"], rank),
            lower=int(d["lower"]),
            upper=None if upper == "unknown" else int(upper),
            witness=None
            if witness is None
            else Factorization(
                tuple(
                    (parse_word(a, rank), parse_word(b, rank)) for a, b in witness
                )
            ),
            lower_evidence=dict(d["evidence"]),
            budgets=dict(d["budgets"]),
        )


# -- the truncated commutator alphabet -----------------------------------------


class CommutatorAlphabet:
    """Deduplicated nontrivial commutators ``[a, b]`` with ``|a|+|b| <= L``.

    Closed under inversion because ``[a, b]^-1 = [b, a]`` and the pair
    enumeration is symmetric.  Each member stores its least witness pair
    (by shortlex of ``a`` then ``b``), and members are sorted shortlex;
    every search iterates them in that order, which pins down witnesses
    deterministically.
    """

    __slots__ = ("rank", "L", "members", "_index")

    def __init__(self, rank: int, L: int, members: tuple[tuple, ...], index: dict):
        self.rank = rank
        self.L = L
        self.members = members  # letter tuples, shortlex order
        self._index = index  # letters -> (a: Word, b: Word)

    @classmethod
    def build(cls, rank: int, L: int) -> "CommutatorAlphabet":
        if rank < 1 or L < 2:
            raise ValueError("need rank >= 1 and L >= 2")
        layers = reduced_words_by_length(rank, L - 1)
        index: dict[tuple, tuple[Word, Word]] = {}
        for i in range(1, L):
            for j in range(1, L - i + 1):
                for at in layers[i]:
                    a = Word._make(at, rank)
                    ai = _inv(at)
                    for bt in layers[j]:
                        word = _mul(_mul(at, bt), _mul(ai, _inv(bt)))
                        if not word:
                            continue
                        b = Word._make(bt, rank)
                        prev = index.get(word)
                        if prev is None or (a.shortlex_key(), b.shortlex_key()) < (
                            prev[0].shortlex_key(),
                            prev[1].shortlex_key(),
                        ):
                            index[word] = (a, b)
        members = tuple(
            sorted(index, key=lambda t: (len(t), tuple(2 * abs(x) - (x > 0) for x in t)))
        )
        return cls(rank, L, members, index)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, w) -> bool:
        letters = w.letters if isinstance(w, Word) else w
        return letters in self._index

    def witness_for(self, w) -> tuple[Word, Word]:
        letters = w.letters if isinstance(w, Word) else w
        return self._index[letters]

    def member_words(self) -> list[Word]:
        return [Word._make(t, self.rank) for t in self.members]

    def __repr__(self) -> str:
        return f"CommutatorAlphabet(rank={self.rank}, L={self.L}, size={len(self)})"


# -- bounded search for upper bounds -------------------------------------------


class _LevelSearch:
    """Meet-in-the-middle representation search over alphabet products.

    The right half is the alphabet hashed by canonical word; left halves
    are enumerated lazily in member order, so the first representation
    found is the lexicographically least in that order.
    """

    def __init__(self, alphabet: CommutatorAlphabet, word_cap: int):
        self.alphabet = alphabet
        self.cap = word_cap
        self.truncated = False

    def find(self, w: tuple, n: int) -> tuple[tuple, ...] | None:
        if n == 0:
            return () if not w else None
        if n == 1:
            return (w,) if w in self.alphabet._index else None
        index = self.alphabet._index
        cap = self.cap
        for m in self.alphabet.members:
            head = _mul(_inv(m), w)
            if len(head) > cap:
                self.truncated = True
                continue
            if n == 2:
                if head and head in index:
                    return (m, head)
            else:
                rest = self.find(head, n - 1)
                if rest is not None:
                    return (m,) + rest
        return None


def cl_upper(
    g: Word,
    alphabet: CommutatorAlphabet,
    depth: int,
    *,
    word_cap: int = DEFAULT_WORD_CAP,
) -> BoundCertificate:
    """Least ``n <= depth`` with ``g`` a product of ``n`` alphabet members.

    The returned upper bound is sound unconditionally (the witness is
    attached and validated); its minimality is relative to ``(L, depth)``.
    The lower bound records how many levels were cleanly exhausted.
    """
    _require_derived(g)
    if g.rank != alphabet.rank:
        raise ValueError(f"rank mismatch: {g.rank} vs alphabet {alphabet.rank}")
    budgets = {
        "L": alphabet.L,
        "depth": depth,
        "word_cap": word_cap,
        "truncated": False,
    }
    if g.is_identity:
        return BoundCertificate(
            word=g,
            lower=0,
            upper=0,
            witness=Factorization(()),
            lower_evidence={"kind": "identity-test"},
            budgets=budgets,
        )
    search = _LevelSearch(alphabet, word_cap)
    found: tuple[tuple, ...] | None = None
    clean_below = 0  # levels 1..clean_below exhausted without cap skips
    for n in range(1, depth + 1):
        search.truncated = False
        found = search.find(g.letters, n)
        if found is not None:
            break
        if not search.truncated and clean_below == n - 1:
            clean_below = n
    budgets["truncated"] = budgets["truncated"] or search.truncated
    if found is None:
        lower, evidence = _search_lower(g, alphabet, clean_below)
        return BoundCertificate(g, lower, None, None, evidence, budgets)
    upper = len(found)
    witness = Factorization(tuple(alphabet.witness_for(m) for m in found))
    witness.validate(g)
    lower, evidence = _search_lower(g, alphabet, clean_below)
    return BoundCertificate(g, min(lower, upper), upper, witness, evidence, budgets)


def _search_lower(g: Word, alphabet: CommutatorAlphabet, clean_below: int):
    """Best lower bound available from identity test plus level exhaustion."""
    if g.is_identity:
        return 0, {"kind": "identity-test"}
    if clean_below > 0:
        return clean_below + 1, {
            "kind": "exhaustive-search",
            "L": alphabet.L,
            "no_product_below": clean_below + 1,
        }
    return 1, {"kind": "identity-test"}


def cl_lower(g: Word, patterns) -> BoundCertificate:
    """Quasimorphism lower bound: ``cl(g) >= |h_sigma(g)| / (7 D)``.

    ``patterns`` is a sequence of :class:`~commcayley.quasimorphism.DefectBound`
    items, i.e. patterns carrying a certified defect upper bound; anything
    without one is rejected.
    """
    from .quasimorphism import h_sigma

    _require_derived(g)
    best = 0 if g.is_identity else 1
    evidence: dict = {"kind": "identity-test"}
    for d in patterns:
        cert = getattr(d, "certified_upper", None)
        if cert is None or cert <= 0:
            raise ValueError(f"pattern {d!r} has no certified defect upper bound")
        value = h_sigma(g, d.pattern)
        bound = -((-abs(value)) // (7 * cert))  # ceil division
        if bound > best:
            best = bound
            evidence = {
                "kind": "quasimorphism",
                "sigma": str(d.pattern.sigma),
                "defect_upper": cert,
                "h_value": value,
            }
    return BoundCertificate(
        word=g,
        lower=best,
        upper=None,
        witness=None,
        lower_evidence=evidence,
        budgets={},
    )


_ABSOLUTE_EVIDENCE = {"identity-test", "quasimorphism"}


def merge_certificates(a: BoundCertificate, b: BoundCertificate) -> BoundCertificate:
    """Combine certificates for the same word: best lower, best upper.

    On equal lower bounds, evidence that bounds the true length outright
    wins over radius-relative exhaustion evidence.
    """
    if a.word != b.word:
        raise ValueError("certificates describe different words")
    lower, evidence = (a.lower, a.lower_evidence)
    if b.lower > lower or (
        b.lower == lower
        and b.lower_evidence.get("kind") in _ABSOLUTE_EVIDENCE
        and evidence.get("kind") not in _ABSOLUTE_EVIDENCE
    ):
        lower, evidence = b.lower, b.lower_evidence
    if a.upper is not None and (b.upper is None or a.upper <= b.upper):
        upper, witness = a.upper, a.witness
    else:
        upper, witness = b.upper, b.witness
    budgets = dict(a.budgets) or dict(b.budgets)
    return BoundCertificate(a.word, lower, upper, witness, evidence, budgets)


def cl_bounds(
    g: Word,
    alphabet: CommutatorAlphabet,
    depth: int,
    patterns=(),
    *,
    word_cap: int = DEFAULT_WORD_CAP,
) -> BoundCertificate:
    """Upper search plus every available lower route, merged."""
    cert = cl_upper(g, alphabet, depth, word_cap=word_cap)
    if patterns:
        cert = merge_certificates(cert, cl_lower(g, patterns))
    return cert


def distance(
    g: Word,
    h: Word,
    alphabet: CommutatorAlphabet,
    depth: int,
    patterns=(),
    *,
    word_cap: int = DEFAULT_WORD_CAP,
) -> BoundCertificate:
    """Certificate for ``d(g, h) = cl(g^-1 h)``."""
    _require_derived(g, "g")
    _require_derived(h, "h")
    return cl_bounds((~g) * h, alphabet, depth, patterns, word_cap=word_cap)


# -- certificate transports (bi-invariance made operational) --------------------


_CONJUGATION_STABLE = {"identity-test"}
_INVERSION_STABLE = {"identity-test", "quasimorphism", "exhaustive-search"}


def conjugate_certificate(cert: BoundCertificate, x: Word) -> BoundCertificate:
    """Certificate for ``x^-1 w x`` carried by the conjugated witness.

    Only conjugation-stable lower evidence survives; the upper bound and
    its witness transport exactly.
    """
    word = cert.word.conjugated_by(x)
    if cert.lower_evidence.get("kind") in _CONJUGATION_STABLE:
        lower, evidence = cert.lower, dict(cert.lower_evidence)
    else:
        lower = 0 if word.is_identity else min(cert.lower, 1)
        evidence = {"kind": "identity-test"}
    evidence["transport"] = "conjugation"
    budgets = dict(cert.budgets)
    return BoundCertificate(
        word=word,
        lower=lower,
        upper=cert.upper,
        witness=None if cert.witness is None else cert.witness.conjugated_by(x),
        lower_evidence=evidence,
        budgets=budgets,
    )


def invert_certificate(cert: BoundCertificate) -> BoundCertificate:
    """Certificate for ``w^-1``; every evidence kind is inversion-stable."""
    evidence = dict(cert.lower_evidence)
    evidence["transport"] = "inversion"
    return BoundCertificate(
        word=~cert.word,
        lower=cert.lower,
        upper=cert.upper,
        witness=None if cert.witness is None else cert.witness.inverted(),
        lower_evidence=evidence,
        budgets=dict(cert.budgets),
    )


# -- stable commutator length and translation length ----------------------------


@dataclass
class SclEstimate:
    word: Word
    n_max: int
    uppers: list[int | None]  # index n-1 -> cl_upper(g^n) or None
    minima: list[Fraction | None]  # running minima of upper/n

    @property
    def value(self) -> Fraction | None:
        return self.minima[-1] if self.minima else None

    def to_json_dict(self) -> dict:
        return {
            "v": SCHEMA_VERSION,
            "word": str(self.word),
            "n_max": self.n_max,
            "uppers": ["unknown" if u is None else u for u in self.uppers],
            "minima": [None if m is None else str(m) for m in self.minima],
            "scl_upper": None if self.value is None else str(self.value),
        }


def scl_upper(
    g: Word,
    n_max: int,
    alphabet: CommutatorAlphabet,
    depth: int,
    *,
    word_cap: int = DEFAULT_WORD_CAP,
) -> SclEstimate:
    """``min over n <= n_max of cl_upper(g^n) / n`` among known uppers."""
    _require_derived(g)
    if g.is_identity:
        raise DomainError("scl estimate needs a nontrivial element")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    uppers: list[int | None] = []
    minima: list[Fraction | None] = []
    best: Fraction | None = None
    for n in range(1, n_max + 1):
        cert = cl_upper(g**n, alphabet, depth, word_cap=word_cap)
        uppers.append(cert.upper)
        if cert.upper is not None:
            q = Fraction(cert.upper, n)
            best = q if best is None else min(best, q)
        minima.append(best)
    return SclEstimate(g, n_max, uppers, minima)


def translation_length_estimate(
    g: Word,
    p: Word,
    n_max: int,
    alphabet: CommutatorAlphabet,
    depth: int,
    *,
    word_cap: int = DEFAULT_WORD_CAP,
) -> tuple[Fraction | None, BoundCertificate]:
    """``distance(p, g^n p) / n`` at ``n = n_max``.

    The certificate for general basepoints is the conjugation transport
    of the basepoint-id certificate, so the estimate cannot depend on
    ``p``; for ``p = id`` it is exactly ``cl_upper(g^n)/n``.
    """
    _require_derived(g, "g")
    _require_derived(p, "p")
    if g.is_identity:
        base = cl_upper(g, alphabet, depth, word_cap=word_cap)
        return Fraction(0), base
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    base = cl_upper(g**n_max, alphabet, depth, word_cap=word_cap)
    cert = base if p.is_identity else conjugate_certificate(base, p)
    value = None if cert.upper is None else Fraction(cert.upper, n_max)
    return value, cert


# -- ball exploration -------------------------------------------------------------


@dataclass
class BallReport:
    center: Word
    radius: int
    L: int
    distances: dict[Word, int] = field(repr=False)
    layer_sizes: list[int] = field(default_factory=list)
    truncated: int = 0

    @property
    def size(self) -> int:
        return len(self.distances)

    def to_json_dict(self, include_words: bool = False) -> dict:
        d = {
            "v": SCHEMA_VERSION,
            "center": str(self.center),
            "radius": self.radius,
            "L": self.L,
            "layer_sizes": self.layer_sizes,
            "size": self.size,
            "truncated": self.truncated,
        }
        if include_words:
            d["words"] = [
                [str(w), dist]
                for w, dist in sorted(
                    self.distances.items(), key=lambda kv: (kv[1], kv[0].shortlex_key())
                )
            ]
        return d


def ball(
    center: Word,
    radius: int,
    alphabet: CommutatorAlphabet,
    *,
    word_cap: int = DEFAULT_WORD_CAP,
) -> BallReport:
    """All words within ``radius`` steps of ``center`` in the S_L graph.

    Distances reported are S_L-distances, hence upper bounds for the
    untruncated metric.  Products longer than ``word_cap`` are skipped
    and counted in the truncation report.
    """
    _require_derived(center, "center")
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if center.rank != alphabet.rank:
        raise ValueError("center rank does not match alphabet")
    distances: dict[tuple, int] = {center.letters: 0}
    layer_sizes = [1]
    truncated = 0
    frontier = [center.letters]
    for r in range(1, radius + 1):
        nxt = []
        for v in frontier:
            for m in alphabet.members:
                u = _mul(v, m)
                if len(u) > word_cap:
                    truncated += 1
                    continue
                if u not in distances:
                    distances[u] = r
                    nxt.append(u)
        layer_sizes.append(len(nxt))
        frontier = nxt
    rank = alphabet.rank
    return BallReport(
        center=center,
        radius=radius,
        L=alphabet.L,
        distances={Word._make(t, rank): d for t, d in distances.items()},
        layer_sizes=layer_sizes,
        truncated=truncated,
    )


# -- independent replay verification ------------------------------------------------


def verify_certificate(
    cert: BoundCertificate,
    *,
    alphabet: CommutatorAlphabet | None = None,
    recheck_search: bool = False,
) -> tuple[bool, list[str]]:
    """Replay a certificate without trusting the search that produced it.

    Always rechecks witness products, bound ordering and formula-level
    evidence (quasimorphism lower bounds are recomputed from scratch,
    including the defect certificate).  With ``recheck_search`` and an
    alphabet, exhaustion-based lower bounds are re-run too.
    """
    problems: list[str] = []
    w = cert.word
    if cert.upper is not None:
        if cert.witness is None:
            if cert.upper != 0 or not w.is_identity:
                problems.append("known upper bound lacks a witness")
        else:
            if len(cert.witness) != cert.upper:
                problems.append("witness length differs from upper bound")
            try:
                cert.witness.validate(w)
            except ValueError as exc:
                problems.append(str(exc))
        if cert.lower > cert.upper:
            problems.append("lower exceeds upper")
    if cert.lower < 0:
        problems.append("negative lower bound")
    kind = cert.lower_evidence.get("kind")
    if kind == "identity-test":
        if cert.lower > (0 if w.is_identity else 1):
            problems.append("identity-test cannot justify lower > 1")
    elif kind == "quasimorphism":
        from .quasimorphism import Pattern, certified_defect_upper, h_sigma

        sigma = parse_word(cert.lower_evidence["sigma"], w.rank)
        pat = Pattern(sigma)
        value = h_sigma(w, pat)
        d_claimed = cert.lower_evidence["defect_upper"]
        d_fresh = certified_defect_upper(pat)
        if d_fresh > d_claimed:
            problems.append("claimed defect tighter than recomputed certificate")
        bound = -((-abs(value)) // (7 * d_claimed))
        if cert.lower > max(bound, 0 if w.is_identity else 1):
            problems.append("quasimorphism evidence does not reach claimed lower")
    elif kind == "exhaustive-search":
        below = cert.lower_evidence.get("no_product_below")
        if below is None or cert.lower > below:
            problems.append("exhaustion evidence does not reach claimed lower")
        elif recheck_search:
            if alphabet is None or alphabet.L != cert.lower_evidence.get("L"):
                problems.append("cannot recheck exhaustion without matching alphabet")
            else:
                search = _LevelSearch(alphabet, DEFAULT_WORD_CAP)
                for n in range(1, below):
                    if search.truncated or search.find(w.letters, n) is not None:
                        problems.append(f"level {n} representation exists")
                        break
    elif kind is not None:
        problems.append(f"unknown evidence kind {kind!r}")
    return (not problems), problems
