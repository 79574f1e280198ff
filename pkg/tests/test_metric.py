import json
import random
from fractions import Fraction

import pytest

from commcayley.metric import (
    BoundCertificate,
    CommutatorAlphabet,
    DomainError,
    Factorization,
    ball,
    cl_bounds,
    cl_lower,
    cl_upper,
    conjugate_certificate,
    distance,
    invert_certificate,
    merge_certificates,
    scl_upper,
    translation_length_estimate,
    verify_certificate,
)
from commcayley.sampling import random_derived_word
from commcayley.words import commutator, identity, parse_word


def W(text, rank=2):
    return parse_word(text, rank)


AB = commutator(W("a"), W("b"))


# -- alphabet -----------------------------------------------------------------


def test_alphabet_S2_members(A2_L2):
    # the eight nontrivial commutators of single letters
    assert len(A2_L2) == 8
    words = {str(w) for w in A2_L2.member_words()}
    assert "abAB" in words and "baBA" in words


def test_alphabet_closed_under_inversion(A2_L4):
    for m in A2_L4.members:
        inv = tuple(-x for x in reversed(m))
        assert inv in A2_L4._index


def test_alphabet_witnesses_are_valid(A2_L4):
    for m in A2_L4.members:
        a, b = A2_L4.witness_for(m)
        assert commutator(a, b).letters == m
        assert m  # identity excluded


def test_alphabet_sizes_match_enumeration_oracle():
    # brute-force oracle values computed from the raw pair enumeration
    assert len(CommutatorAlphabet.build(2, 2)) == 8
    assert len(CommutatorAlphabet.build(2, 4)) == 200
    assert len(CommutatorAlphabet.build(2, 6)) == 3944


def test_alphabet_rejects_bad_budgets():
    with pytest.raises(ValueError):
        CommutatorAlphabet.build(2, 1)
    with pytest.raises(ValueError):
        CommutatorAlphabet.build(0, 4)


# -- cl upper -------------------------------------------------------------------


def test_cl_upper_identity(A2_L2):
    cert = cl_upper(identity(2), A2_L2, 3)
    assert cert.upper == 0 and cert.lower == 0 and cert.exact
    assert len(cert.witness) == 0


def test_cl_upper_single_commutator(A2_L2):
    cert = cl_upper(AB, A2_L2, 1)
    assert cert.upper == 1 and cert.lower == 1 and cert.exact
    assert cert.witness.pairs == ((W("a"), W("b")),)
    ok, problems = verify_certificate(cert)
    assert ok, problems


def test_cl_upper_square_is_two(A2_L6):
    cert = cl_upper(AB**2, A2_L6, 3)
    assert cert.upper == 2
    assert cert.lower == 2  # level-1 exhaustion at L=6
    assert cert.lower_evidence["kind"] == "exhaustive-search"
    cert.witness.validate(AB**2)


def test_cl_upper_cube_needs_three_at_L6(A2_L6):
    # No product of two S_6 members equals [a,b]^3 (level-2 exhaustion);
    # the two-commutator witness only appears at L=7.
    cert = cl_upper(AB**3, A2_L6, 3)
    assert cert.upper == 3 and cert.lower == 3


def test_cl_upper_cube_is_two_at_L7():
    A7 = CommutatorAlphabet.build(2, 7)
    cert = cl_upper(AB**3, A7, 2)
    assert cert.upper == 2
    cert.witness.validate(AB**3)


def test_cl_upper_unknown_when_budget_exhausted(A2_L2):
    cert = cl_upper(AB**2 * commutator(W("aa"), W("bb")), A2_L2, 1)
    assert cert.upper is None
    assert cert.witness is None
    assert cert.lower == 2  # level 1 cleanly exhausted
    ok, problems = verify_certificate(cert)
    assert ok, problems


def test_cl_upper_rejects_non_derived(A2_L2):
    with pytest.raises(DomainError):
        cl_upper(W("a"), A2_L2, 1)


def test_products_of_members_are_found(A2_L4):
    # constructive oracle for the search: products of n members have upper <= n
    rng = random.Random(17)
    members = A2_L4.member_words()
    for _ in range(25):
        m1, m2 = rng.choice(members), rng.choice(members)
        w = m1 * m2
        cert = cl_upper(w, A2_L4, 2)
        assert cert.upper is not None and cert.upper <= 2
        ok, problems = verify_certificate(cert)
        assert ok, problems


def test_monotone_in_L_and_depth(A2_L2, A2_L4, A2_L6):
    rng = random.Random(23)
    for _ in range(10):
        w, _ = random_derived_word(rng, 2, 2, 2, max_length=16)
        uppers = []
        for alphabet in (A2_L2, A2_L4, A2_L6):
            cert = cl_upper(w, alphabet, 2)
            uppers.append(cert.upper)
        known = [u for u in uppers if u is not None]
        assert known == sorted(known, reverse=True)
        # enlarging depth never increases the reported upper
        c2 = cl_upper(w, A2_L4, 2)
        c3 = cl_upper(w, A2_L4, 3)
        if c2.upper is not None:
            assert c3.upper is not None and c3.upper <= c2.upper


def test_subadditivity(A2_L4):
    rng = random.Random(29)
    for _ in range(10):
        g, _ = random_derived_word(rng, 2, 1, 2)
        h, _ = random_derived_word(rng, 2, 1, 2)
        cg = cl_upper(g, A2_L4, 2)
        ch = cl_upper(h, A2_L4, 2)
        cgh = cl_upper(g * h, A2_L4, 4)
        if None not in (cg.upper, ch.upper, cgh.upper):
            assert cgh.upper <= cg.upper + ch.upper


# -- lower bounds ----------------------------------------------------------------


def test_cl_lower_identity_and_nontrivial(defect_abAB):
    assert cl_lower(identity(2), []).lower == 0
    assert cl_lower(AB, []).lower == 1
    cert = cl_lower(AB**20, [defect_abAB])
    # h_sigma([a,b]^20) = 20, defect 2: ceil(20/14) = 2
    assert cert.lower == 2
    assert cert.lower_evidence["kind"] == "quasimorphism"
    ok, problems = verify_certificate(cert)
    assert ok, problems


def test_cl_lower_rejects_uncertified_pattern():
    class Fake:
        certified_upper = 0
        pattern = None

    with pytest.raises(ValueError):
        cl_lower(AB, [Fake()])


def test_merge_certificates(A2_L6, defect_abAB):
    upper = cl_upper(AB**2, A2_L6, 3)
    lower = cl_lower(AB**2, [defect_abAB])
    merged = merge_certificates(upper, lower)
    assert merged.upper == 2 and merged.lower == 2
    assert merged.exact


# -- distance and bi-invariance ----------------------------------------------------


def test_distance_examples(A2_L6):
    g = AB
    assert distance(g, g, A2_L6, 1).upper == 0
    assert distance(g, g * AB, A2_L6, 1).upper == 1
    cert = distance(W("abAB"), W("baBA"), A2_L6, 3)
    assert cert.upper == 2  # frozen from the meet-in-the-middle oracle
    assert cert.lower == 2


def test_distance_requires_derived_points(A2_L2):
    with pytest.raises(DomainError):
        distance(W("a"), W("abAB"), A2_L2, 1)


def test_left_translation_leaves_word_unchanged():
    rng = random.Random(37)
    for _ in range(50):
        x, _ = random_derived_word(rng, 2, 1, 3)
        g, _ = random_derived_word(rng, 2, 1, 3)
        h, _ = random_derived_word(rng, 2, 1, 3)
        assert ~(x * g) * (x * h) == ~g * h


def test_conjugation_transport(A2_L4):
    rng = random.Random(43)
    for _ in range(30):
        g, _ = random_derived_word(rng, 2, 1, 2)
        h, _ = random_derived_word(rng, 2, 1, 2)
        x, _ = random_derived_word(rng, 2, 1, 2)
        base = distance(g, h, A2_L4, 2)
        moved = conjugate_certificate(base, x)
        assert moved.word == ~(g * x) * (h * x)
        assert moved.upper == base.upper
        ok, problems = verify_certificate(moved)
        assert ok, problems
        # transporting back restores the original upper bound
        back = conjugate_certificate(moved, ~x)
        assert back.word == base.word and back.upper == base.upper
        if back.witness is not None:
            back.witness.validate(base.word)


def test_inversion_transport(A2_L6, defect_abAB):
    cert = cl_bounds(AB**2, A2_L6, 3, [defect_abAB])
    inv = invert_certificate(cert)
    assert inv.word == ~(AB**2)
    assert inv.upper == cert.upper and inv.lower == cert.lower
    ok, problems = verify_certificate(inv)
    assert ok, problems


def test_exact_invariance_under_inverse_and_conjugation(A2_L6):
    # cl certificates for g, g^-1 and xgx^-1 carry equal exact values
    g = AB**2
    x = W("ab")
    base = cl_upper(g, A2_L6, 3)
    assert base.exact
    inv = cl_upper(~g, A2_L6, 3)
    conj = cl_upper(g.conjugated_by(x), A2_L6, 3)
    assert inv.exact and inv.upper == base.upper
    assert conj.upper == base.upper  # same value found by fresh search


# -- scl and translation length ------------------------------------------------------


def test_scl_upper_values(A2_L6):
    est = scl_upper(AB, 4, A2_L6, 3)
    assert est.uppers == [1, 2, 3, 3]
    assert [str(m) for m in est.minima] == ["1", "1", "1", "3/4"]
    assert est.value == Fraction(3, 4)
    # minima sequence is non-increasing
    known = [m for m in est.minima if m is not None]
    assert all(a >= b for a, b in zip(known, known[1:]))


def test_scl_upper_sees_the_L7_witness():
    A7 = CommutatorAlphabet.build(2, 7)
    est = scl_upper(AB, 3, A7, 2)
    assert est.value == Fraction(2, 3)


def test_scl_rejects_identity(A2_L2):
    with pytest.raises(DomainError):
        scl_upper(identity(2), 3, A2_L2, 2)


def test_translation_length_estimate(A2_L6):
    value, cert = translation_length_estimate(AB, identity(2), 3, A2_L6, 3)
    assert value == Fraction(1)  # cl([a,b]^3) = 3 at L=6
    p = AB  # nontrivial basepoint in the derived subgroup
    value_p, cert_p = translation_length_estimate(AB, p, 3, A2_L6, 3)
    assert value_p == value
    assert cert_p.word == ~p * AB**3 * p
    ok, problems = verify_certificate(cert_p)
    assert ok, problems
    value0, _ = translation_length_estimate(identity(2), p, 5, A2_L6, 1)
    assert value0 == 0


# -- balls ---------------------------------------------------------------------------


def test_ball_radius_zero(A2_L2):
    report = ball(identity(2), 0, A2_L2)
    assert report.size == 1 and report.layer_sizes == [1]


def test_ball_radius_one_is_id_plus_alphabet(A2_L2):
    report = ball(identity(2), 1, A2_L2)
    assert report.layer_sizes == [1, 8]
    words = {str(w) for w in report.distances}
    assert words == {""} | {str(w) for w in A2_L2.member_words()}


def test_ball_radius_two_matches_bfs_oracle(A2_L2):
    # independent BFS oracle
    seen = {identity(2): 0}
    frontier = [identity(2)]
    for r in (1, 2):
        nxt = []
        for v in frontier:
            for m in A2_L2.member_words():
                u = v * m
                if u not in seen:
                    seen[u] = r
                    nxt.append(u)
        frontier = nxt
    report = ball(identity(2), 2, A2_L2)
    assert report.layer_sizes == [1, 8, 56]
    assert report.size == 65 == len(seen)
    assert report.distances == seen


def test_ball_truncation_report(A2_L2):
    report = ball(identity(2), 2, A2_L2, word_cap=4)
    assert report.truncated > 0
    assert all(len(w) <= 4 for w in report.distances)


def test_ball_distances_are_metric_upper_bounds(A2_L2, A2_L4):
    # enlarging the alphabet cannot increase S_L distances
    small = ball(identity(2), 2, A2_L2)
    large = ball(identity(2), 2, A2_L4)
    for w, d in small.distances.items():
        assert large.distances[w] <= d


# -- serialization and verification ---------------------------------------------------


def test_certificate_json_round_trip(A2_L6, defect_abAB):
    cert = cl_bounds(AB**2, A2_L6, 3, [defect_abAB])
    payload = cert.to_json_dict()
    text = json.dumps(payload, sort_keys=True)
    back = BoundCertificate.from_json_dict(json.loads(text), 2)
    assert back.word == cert.word
    assert back.lower == cert.lower and back.upper == cert.upper
    assert back.witness.pairs == cert.witness.pairs
    ok, problems = verify_certificate(back, alphabet=A2_L6, recheck_search=True)
    assert ok, problems


def test_verifier_catches_tampering(A2_L6):
    cert = cl_upper(AB**2, A2_L6, 2)
    cert.upper = 1  # claim a better bound than the witness shows
    ok, problems = verify_certificate(cert)
    assert not ok and problems
    cert2 = cl_upper(AB**2, A2_L6, 2)
    cert2.lower = 3
    ok2, problems2 = verify_certificate(cert2)
    assert not ok2


def test_factorization_validate():
    f = Factorization(((W("a"), W("b")), (W("a"), W("b"))))
    f.validate(AB**2)
    with pytest.raises(ValueError):
        f.validate(AB)
    with pytest.raises(ValueError):
        Factorization(()).validate(AB)
