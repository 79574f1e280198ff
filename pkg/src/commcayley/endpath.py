"""Avoidance paths: connect far-from-identity elements while staying far.

The construction runs in four unit-step segments: climb the powers of a
separating commutator ``s``, peel the first endpoint's factorization,
rebuild the second endpoint's factorization, and descend the powers
again.  Every vertex gets a distance-to-identity lower bound certified
by counting quasimorphisms (with the certified defect as the Lipschitz
constant) plus the trivial nontriviality bound; the separator is chosen
so that its pattern is invisible in both endpoints and homogenizes with
a measured error bound, never an assumed one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .metric import Factorization, _require_derived
from .quasimorphism import DefectBound, Pattern, defect_bound, h_sigma
from .words import Word, commutator, generator, identity


class SeparatorError(ValueError):
    """No pool candidate works; carries the per-candidate reasons."""

    def __init__(self, reasons: list[tuple[str, str]]):
        self.reasons = reasons
        lines = "; ".join(f"[{pair}]: {why}" for pair, why in reasons)
        super().__init__(f"separator pool exhausted: {lines}")


@dataclass
class SeparatorChoice:
    """A separating commutator with its pattern and measured constants."""

    s: Word
    pair: tuple[Word, Word]
    sigma: Pattern
    k1: int  # max |h_sigma(s^n) - n| over 1 <= n <= n_max, measured
    n_max: int
    defect: DefectBound  # certified upper bound plays K2
    h_values: tuple[int, ...] = field(repr=False, default=())

    @property
    def k2(self) -> int:
        return self.defect.certified_upper

    def to_json_dict(self) -> dict:
        return {
            "s": str(self.s),
            "pair": [str(self.pair[0]), str(self.pair[1])],
            "sigma": str(self.sigma),
            "K1": self.k1,
            "n_max": self.n_max,
            "defect": self.defect.to_json_dict(),
        }


def default_separator_pool(rank: int) -> list[tuple[Word, Word]]:
    """Pairs ``[a^p, b^q]`` for small p, q, plus single-letter conjugates.

    Their cyclic words are long and overlap-free, which keeps the
    measured homogenization error small.
    """
    if rank < 2:
        raise ValueError("separators need rank >= 2")
    a, b = generator(0, rank), generator(1, rank)
    conjugators = [identity(rank)]
    for i in range(rank):
        conjugators.append(generator(i, rank))
        conjugators.append(~generator(i, rank))
    pool = []
    for p in (2, 3):
        for q in (2, 3):
            for c in conjugators:
                pool.append((c * a**p * ~c, c * b**q * ~c))
    return pool


def _occurs(haystack: tuple, needle: tuple) -> bool:
    n, m = len(haystack), len(needle)
    return any(haystack[i : i + m] == needle for i in range(n - m + 1))


def select_separator(
    g: Word,
    h: Word,
    pool: list[tuple[Word, Word]] | None = None,
    n_max: int = 8,
    *,
    defect_samples: int = 500,
    seed: int = 0,
) -> SeparatorChoice:
    """First pool candidate whose pattern avoids both targets.

    Acceptance requires: the commutator's cyclic word has length >= 2,
    neither it nor its inverse occurs in the reduced words of ``g`` or
    ``h`` (hence both evaluate to quasimorphism value 0), and the
    homogenization values ``h_sigma(s^n)`` are computed for all
    ``n <= n_max`` with their worst error recorded as K1.
    """
    _require_derived(g, "g")
    _require_derived(h, "h")
    if pool is None:
        pool = default_separator_pool(g.rank)
    reasons: list[tuple[str, str]] = []
    for x, y in pool:
        label = f"{x!s},{y!s}"
        s = commutator(x, y)
        if s.is_identity:
            reasons.append((label, "commutator is trivial"))
            continue
        core, _ = s.cyclically_reduced()
        if len(core) < 2:
            reasons.append((label, "cyclic word shorter than 2"))
            continue
        sig = core.letters
        sig_inv = tuple(-t for t in reversed(sig))
        clash = None
        for name, target in (("g", g), ("h", h)):
            if _occurs(target.letters, sig) or _occurs(target.letters, sig_inv):
                clash = name
                break
        if clash is not None:
            reasons.append((label, f"pattern occurs in {clash}"))
            continue
        sigma = Pattern(core)
        h_values = []
        k1 = 0
        power = s
        for n in range(1, n_max + 1):
            value = h_sigma(power, sigma)
            h_values.append(value)
            k1 = max(k1, abs(value - n))
            power = power * s
        bound = defect_bound(sigma, defect_samples, seed=seed)
        return SeparatorChoice(
            s=s,
            pair=(x, y),
            sigma=sigma,
            k1=k1,
            n_max=n_max,
            defect=bound,
            h_values=tuple(h_values),
        )
    raise SeparatorError(reasons)


# -- path construction ---------------------------------------------------------


@dataclass(frozen=True)
class PathStep:
    side: str  # "right": next = prev * [a, b]; "left": next = [a, b] * prev
    pair: tuple[Word, Word]

    def advance(self, v: Word) -> Word:
        c = commutator(*self.pair)
        return v * c if self.side == "right" else c * v


@dataclass
class AvoidancePath:
    vertices: tuple[Word, ...]
    steps: tuple[PathStep, ...]
    segments: tuple[tuple[int, int], ...]  # four half-open vertex ranges

    def validate(self) -> None:
        """Recheck that consecutive vertices differ by one commutator."""
        if len(self.steps) != len(self.vertices) - 1:
            raise ValueError("step list does not match vertex list")
        for i, step in enumerate(self.steps):
            if step.advance(self.vertices[i]) != self.vertices[i + 1]:
                raise ValueError(f"step {i} does not connect its vertices")


def build_path(
    g: Word,
    h: Word,
    fg: Factorization,
    fh: Factorization,
    sep: SeparatorChoice,
    N: int,
) -> AvoidancePath:
    """The four-segment path ``g -> g s^N -> s^N -> h s^N -> h``.

    ``N = 0`` is allowed as the negative control: the path then passes
    through the identity region and certification reports it.
    """
    fg.validate(g)
    fh.validate(h)
    if N < 0:
        raise ValueError("N must be >= 0")
    s = sep.s
    x, y = sep.pair
    vertices = [g]
    steps: list[PathStep] = []
    for _ in range(N):  # climb
        steps.append(PathStep("right", (x, y)))
        vertices.append(vertices[-1] * s)
    seg1 = (0, len(vertices))
    for a, b in fg.pairs:  # peel the leading commutator of what remains of g
        steps.append(PathStep("left", (b, a)))
        vertices.append(commutator(b, a) * vertices[-1])
    seg2 = (seg1[1], len(vertices))
    for a, b in reversed(fh.pairs):  # rebuild h from its last factor inward
        steps.append(PathStep("left", (a, b)))
        vertices.append(commutator(a, b) * vertices[-1])
    seg3 = (seg2[1], len(vertices))
    for _ in range(N):  # descend
        steps.append(PathStep("right", (y, x)))
        vertices.append(vertices[-1] * ~s)
    seg4 = (seg3[1], len(vertices))
    path = AvoidancePath(tuple(vertices), tuple(steps), (seg1, seg2, seg3, seg4))
    if path.vertices[-1] != h:
        raise ValueError("construction did not land on h")
    if len(path.vertices) != 2 * N + len(fg) + len(fh) + 1:
        raise ValueError("unexpected path length")
    path.validate()
    return path


# -- certification -------------------------------------------------------------


@dataclass
class PathCertificate:
    path: AvoidancePath
    sep: SeparatorChoice
    bounds: list[Fraction]
    evidence: list[dict]
    r_min: Fraction
    analytic_segment1: list[Fraction]
    analytic_r: Fraction | None

    def to_json_dict(self, g: Word, h: Word, N: int) -> dict:
        return {
            "v": 1,
            "g": str(g),
            "h": str(h),
            "s": str(self.sep.s),
            "sigma": str(self.sep.sigma),
            "N": N,
            "K1": self.sep.k1,
            "D_upper": self.sep.k2,
            "r_min": str(self.r_min),
            "analytic_r": None if self.analytic_r is None else str(self.analytic_r),
            "vertices": [
                {
                    "word": str(w),
                    "bound": str(b),
                    "evidence": e,
                }
                for w, b, e in zip(self.path.vertices, self.bounds, self.evidence)
            ],
            "segments": [list(r) for r in self.path.segments],
        }


def certify_path(
    path: AvoidancePath,
    sep: SeparatorChoice,
    extra_patterns: tuple[DefectBound, ...] = (),
    *,
    endpoint_lower: int | None = None,
) -> PathCertificate:
    """Per-vertex distance-to-identity lower bounds.

    Each vertex gets the best of the quasimorphism bounds
    ``|h_sigma(v)| / (7 D)`` over the separator pattern and any extra
    certified patterns, floored at 0, plus the trivial bound 1 for any
    nonidentity vertex.  Certificates may be weak, never wrong.  The
    analytic per-step prediction ``(i - K2 - K1) / (7 K2)`` and, when the
    endpoint lower bound ``R`` is supplied, the closed-form radius
    ``R/(14 K2) - (K1 + K2)/(7 K2)`` are reported for comparison.
    """
    banks: list[tuple[Pattern, int]] = [(sep.sigma, sep.k2)]
    for d in extra_patterns:
        if d.certified_upper <= 0:
            raise ValueError("extra pattern lacks a certified defect")
        banks.append((d.pattern, d.certified_upper))
    bounds: list[Fraction] = []
    evidence: list[dict] = []
    for v in path.vertices:
        best = Fraction(0)
        how: dict = {"kind": "identity-test", "value": 0}
        if not v.is_identity:
            best = Fraction(1)
            how = {"kind": "identity-test", "value": 1}
        for pattern, d_upper in banks:
            value = h_sigma(v, pattern)
            bound = Fraction(abs(value), 7 * d_upper)
            if bound > best:
                best = bound
                how = {
                    "kind": "quasimorphism",
                    "sigma": str(pattern),
                    "h_value": value,
                    "defect_upper": d_upper,
                }
        bounds.append(best)
        evidence.append(how)
    k1, k2 = sep.k1, sep.k2
    seg1 = path.segments[0]
    analytic1 = [
        Fraction(i - k2 - k1, 7 * k2) for i in range(seg1[0], seg1[1])
    ]
    analytic_r = None
    if endpoint_lower is not None:
        analytic_r = Fraction(endpoint_lower, 14 * k2) - Fraction(k1 + k2, 7 * k2)
    return PathCertificate(
        path=path,
        sep=sep,
        bounds=bounds,
        evidence=evidence,
        r_min=min(bounds),
        analytic_segment1=analytic1,
        analytic_r=analytic_r,
    )


def choose_N(sep: SeparatorChoice, target_r: int = 1, *, safety: int = 2) -> int:
    """Smallest N with ``(N - K1 - D)/(7 D) >= target_r``, times a safety
    factor (the construction only needs N to be large enough)."""
    base = target_r * 7 * sep.k2 + sep.k1 + sep.k2
    return safety * base


def endpath_report(
    g: Word,
    h: Word,
    fg: Factorization,
    fh: Factorization,
    sep: SeparatorChoice,
    N: int,
    extra_patterns: tuple[DefectBound, ...] = (),
    *,
    endpoint_lower: int | None = None,
) -> dict:
    """Build, certify, and serialize in one step (the CLI's report path)."""
    path = build_path(g, h, fg, fh, sep, N)
    cert = certify_path(path, sep, extra_patterns, endpoint_lower=endpoint_lower)
    return cert.to_json_dict(g, h, N)
