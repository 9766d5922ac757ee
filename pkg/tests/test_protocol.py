import json
import random
from collections import Counter
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, strategies as st

from gen import random_connected_pin
from hyperkey import catalog
from hyperkey.capacity import NotPin, TreePacking, spanning_trees, tree_packing_number
from hyperkey.model import mask_of, validate, weight_function
from hyperkey.protocol import (
    BitSource,
    DependentKey,
    DisconnectedTree,
    InfeasiblePacking,
    LinearScheme,
    SchemeError,
    SenderSupportViolated,
    check_perfect_secrecy,
    check_recoverability,
    gf2_rank,
    load_scheme,
    scheme_from_dict,
    scheme_rates,
    tree_protocol,
)

F = Fraction


def parity(x: int) -> int:
    return bin(x).count("1") & 1


def brute_secret(scheme) -> bool:
    """Key uniform and independent of the messages, by enumerating every realization."""
    total = scheme.source.total_bits
    joint = Counter()
    per_f = Counter()
    for x in range(1 << total):
        f = tuple(parity(r & x) for r in scheme.message_rows)
        k = tuple(parity(r & x) for r in scheme.key)
        joint[f, k] += 1
        per_f[f] += 1
    keys = list(product((0, 1), repeat=len(scheme.key)))
    # P(K = k | F = f) must be 2^-|K| for every f and k
    return all(joint[f, k] * len(keys) == c for f, c in per_f.items() for k in keys)


def brute_recoverable(scheme) -> bool:
    """Every user's view (own bits, messages) determines the key."""
    src = scheme.source
    total = src.total_bits
    for v in range(1, src.hg.m + 1):
        seen = src.observed(v)
        table = {}
        for x in range(1 << total):
            view = (x & seen, tuple(parity(r & x) for r in scheme.message_rows))
            k = tuple(parity(r & x) for r in scheme.key)
            if table.setdefault(view, k) != k:
                return False
    return True


def scheme_3_1_with_key(label):
    src = BitSource(catalog.motivating_pin(), 1)
    return LinearScheme(src, ((2, src.var("a") ^ src.var("b")),), (src.var(label),))


# ---------------------------------------------------------------- checks

def test_recoverability_examples():
    assert check_recoverability(catalog.scheme_3_1()) == (True, None)
    assert check_recoverability(catalog.scheme_4_8()) == (True, None)
    assert check_recoverability(scheme_3_1_with_key("c")) == (False, 1)


def test_secrecy_examples():
    assert check_perfect_secrecy(catalog.scheme_3_1())
    assert check_perfect_secrecy(catalog.scheme_4_5())
    src = BitSource(catalog.motivating_pin(), 1)
    leaky = LinearScheme(src, ((2, src.var("a") ^ src.var("b")),), (src.var("a") ^ src.var("b"),))
    assert not check_perfect_secrecy(leaky)


def test_rates():
    assert scheme_rates(catalog.scheme_4_5()).to_dict() == {
        "recoverable": True, "failing_user": None, "secret": True, "key_bits": 2,
        "discussion_bits": 3, "n": 2, "key_rate": "1", "discussion_rate": "3/2",
    }
    v = scheme_rates(catalog.scheme_4_8())
    assert (v.key_rate, v.discussion_rate) == (1, F(3, 2))
    v = scheme_rates(catalog.scheme_3_1())
    assert (v.key_rate, v.discussion_rate) == (1, 1)


def test_builtin_examples():
    ex = catalog.builtin_examples()
    assert set(ex) == {"example_3_1", "example_4_5", "example_4_8"}
    for hg, scheme, expected in ex.values():
        assert scheme.source.hg == hg
        assert scheme_rates(scheme) == expected
        assert expected.verified


def test_variable_order():
    src = BitSource(validate(3, [("a", [1, 2], 2), ("b", [2, 3], 1)]), 2)
    order = [src.describe(k) for k in range(src.total_bits)]
    assert order == [("a", 0, 0), ("a", 1, 0), ("b", 0, 0), ("a", 0, 1), ("a", 1, 1), ("b", 0, 1)]


def test_sender_support_enforced():
    src = BitSource(catalog.motivating_pin(), 1)
    with pytest.raises(SenderSupportViolated):
        LinearScheme(src, ((1, src.var("b")),), (src.var("a"),))


def test_dependent_key_rejected():
    src = BitSource(catalog.motivating_pin(), 1)
    with pytest.raises(DependentKey):
        LinearScheme(src, (), (src.var("a"), src.var("a")))


def test_fractional_weights_rejected():
    with pytest.raises(SchemeError):
        BitSource(validate(3, [("a", [1, 2], F(1, 2))]), 1)


def test_unknown_edge():
    src = BitSource(catalog.motivating_pin(), 1)
    with pytest.raises(SchemeError):
        src.var("z")
    with pytest.raises(SchemeError):
        src.var("a", 0, 1)


def test_scheme_json_round_trip(tmp_path):
    scheme = catalog.scheme_4_8()
    assert scheme_from_dict(json.loads(json.dumps(scheme.to_dict()))) == scheme
    (tmp_path / "src.json").write_text(scheme.source.hg.to_json())
    (tmp_path / "s.json").write_text(json.dumps(scheme.to_dict(source="src.json")))
    assert load_scheme(tmp_path / "s.json") == scheme


# ---------------------------------------------------------------- oracles

@pytest.mark.parametrize("name", ["example_3_1", "example_4_5", "example_4_8"])
def test_builtin_against_enumeration(name):
    _, scheme, _ = catalog.builtin_examples()[name]
    assert scheme.source.total_bits <= 10
    assert brute_secret(scheme) == check_perfect_secrecy(scheme) is True
    assert brute_recoverable(scheme) == check_recoverability(scheme)[0] is True


@given(st.data())
def test_rank_criterion_matches_enumeration(data):
    hg = catalog.receptacle()
    src = BitSource(hg, 2)
    msgs = []
    for _ in range(data.draw(st.integers(0, 3))):
        sender = data.draw(st.integers(1, 5))
        seen = src.observed(sender)
        msgs.append((sender, data.draw(st.integers(0, (1 << src.total_bits) - 1)) & seen))
    keys = []
    for _ in range(data.draw(st.integers(1, 2))):
        row = data.draw(st.integers(1, (1 << src.total_bits) - 1))
        if gf2_rank(keys + [row]) == len(keys) + 1:
            keys.append(row)
    scheme = LinearScheme(src, tuple(msgs), tuple(keys))
    assert check_perfect_secrecy(scheme) == brute_secret(scheme)
    assert check_recoverability(scheme)[0] == brute_recoverable(scheme)


# ---------------------------------------------------------------- tree protocol

def test_tree_protocol_path3():
    hg = catalog.motivating_pin()
    v = scheme_rates(tree_protocol(hg, tree_packing_number(hg)))
    assert v.verified and (v.key_bits, v.discussion_bits, v.n) == (1, 1, 1)


def test_tree_protocol_triangle():
    scheme = tree_protocol(catalog.triangle(), catalog.triangle_packing())
    v = scheme_rates(scheme)
    assert v.verified and (v.n, v.key_bits, v.discussion_bits) == (2, 3, 3)
    assert (v.key_rate, v.discussion_rate) == (F(3, 2), F(3, 2))
    assert brute_secret(scheme) and brute_recoverable(scheme)


def test_tree_protocol_k4_disjoint_trees():
    hg = catalog.complete_pin(4)
    t1 = tuple(sorted(mask_of(p) for p in ([1, 2], [2, 3], [3, 4])))
    t2 = tuple(sorted(mask_of(p) for p in ([1, 3], [1, 4], [2, 4])))
    v = scheme_rates(tree_protocol(hg, TreePacking([t1, t2], [F(1), F(1)])))
    assert v.verified and (v.n, v.key_bits, v.discussion_bits) == (1, 2, 4)
    assert (v.key_rate, v.discussion_rate) == (2, 4)


def test_tree_protocol_errors():
    with pytest.raises(NotPin):
        tree_protocol(catalog.receptacle(), TreePacking([], []))
    hg = catalog.motivating_pin()
    tree = (mask_of([1, 2]), mask_of([2, 3]))
    with pytest.raises(InfeasiblePacking):
        tree_protocol(hg, TreePacking([tree], [F(2)]))
    with pytest.raises(DisconnectedTree):
        tree_protocol(hg, TreePacking([(mask_of([2, 3]),)], [F(1)]))


def random_packing(rng, hg):
    trees = spanning_trees(hg.m, list(weight_function(hg)))
    pick = rng.sample(trees, min(len(trees), rng.randint(1, 3)))
    eta = [F(rng.randint(1, 3), rng.choice([1, 2, 3])) for _ in pick]
    c = weight_function(hg)
    load = {}
    for t, e in zip(pick, eta):
        for p in t:
            load[p] = load.get(p, 0) + e
    scale = min(F(1), min(c[p] / v for p, v in load.items()))
    # keep denominators small so the block length stays tiny
    scale = F(int(scale * 6), 6) if scale < 1 else scale
    eta = [e * scale for e in eta]
    keep = [(t, e) for t, e in zip(pick, eta) if e > 0]
    return TreePacking([t for t, _ in keep], [e for _, e in keep])


def test_tree_protocol_random():
    rng = random.Random(41)
    done = 0
    while done < 25:
        hg = random_connected_pin(rng, rng.randint(3, 6), max_weight=3)
        pk = random_packing(rng, hg)
        if not pk.trees:
            continue
        assert pk.is_feasible(hg)
        v = scheme_rates(tree_protocol(hg, pk))
        assert v.verified
        assert v.key_rate == pk.value
        assert v.discussion_rate == (hg.m - 2) * pk.value
        done += 1
