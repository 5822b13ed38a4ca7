import random
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracle
from tmdtochain import corefn, tmdto
from tmdtochain.tmdto import Mode, TableSpec


def spec(**kw):
    base = dict(j=0, ell=12, M=16, t=8, mode=Mode.CONSTRAINED, seed=1)
    base.update(kw)
    return TableSpec(**base)


def oracle_covered(table):
    n, s = table.n, table.spec
    return {img & ((1 << s.ell) - 1)
            for start in table.starts.tolist()
            for _, img in oracle.walk_images(start, s.t, n, s.ell, s.constrained)}


def test_chain_step_unconstrained():
    s = spec(mode=Mode.UNCONSTRAINED, ell=8)
    assert tmdto.chain_step(0, s, 16) == oracle.oneway_step(0, 16)


def test_chain_step_constrained():
    s = spec(ell=8)
    assert tmdto.chain_step(0x0042, s, 16) == oracle.oneway_step(0xFF42, 16)
    assert tmdto.chain_step(0x0042, s, 16) == oracle.constrained_image(0x0042, 16, 8)


def test_chain_step_full_ell_is_unconstrained():
    c = spec(ell=12)
    u = spec(ell=12, mode=Mode.UNCONSTRAINED)
    assert all(tmdto.chain_step(x, c, 12) == tmdto.chain_step(x, u, 12) for x in range(1 << 12))


def test_single_row_single_step(kernels):
    t = tmdto.build_table(spec(M=1, t=1), 16, kernels=kernels)
    (start, end), = t.rows()
    assert end == tmdto.chain_step(start, t.spec, 16)


def test_build_table_rewalk_oracle(kernels):
    s = spec(ell=12, M=4, t=3, seed=7)
    t = tmdto.build_table(s, 16, kernels=kernels)
    assert len(t) == 4
    for start, end in t.rows():
        assert start >> 12 == 0xF
        x = start
        for _ in range(3):
            x = oracle.constrained_image(x, 16, 12)
        assert end == x


def test_build_table_invariants():
    t = tmdto.build_table(spec(mode=Mode.UNCONSTRAINED, ell=8, M=64, t=8, seed=1), 12)
    starts, ends = t.starts.tolist(), t.ends.tolist()
    assert len(set(starts)) == 64
    assert ends == sorted(ends)
    suffix = [e & 0xFF for e in ends]
    assert t.suffix_keys.tolist() == sorted(suffix)
    reordered = [(suffix[r], ends[r]) for r in t.suffix_rows.tolist()]
    assert reordered == sorted(reordered)


def test_build_table_is_reproducible(kernels):
    s = spec(ell=16, M=200, t=5, seed=99)
    a = tmdto.build_table(s, 20, kernels=kernels)
    b = tmdto.build_table(s, 20)
    assert a.to_bytes() == b.to_bytes()
    assert tmdto.build_table(spec(ell=16, M=200, t=5, seed=100), 20).to_bytes() != a.to_bytes()


def test_build_table_rejects_oversized_sampling():
    with pytest.raises(ValueError):
        tmdto.build_table(spec(ell=4, M=17, t=1), 16)
    with pytest.raises(ValueError):
        tmdto.build_table(spec(ell=17), 16)


def test_matrix_stopping_rule_warns():
    with pytest.warns(tmdto.MatrixStoppingRuleWarning):
        tmdto.build_table(spec(ell=10, M=64, t=8), 16)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        tmdto.build_table(spec(ell=12, M=16, t=8), 16)


def test_empty_table_allowed():
    t = tmdto.build_table(spec(M=0), 16)
    assert len(t) == 0
    assert tmdto.invert(t, 5) is None
    assert tmdto.covered_set(t) == frozenset()


def test_serialization_round_trip(tmp_path):
    t = tmdto.build_table(spec(M=32, t=4, seed=3), 16)
    path = tmp_path / "x.tmt"
    t.save(path)
    back = tmdto.TradeoffTable.load(path)
    assert back.to_bytes() == path.read_bytes()
    assert back.spec == t.spec and back.n == 16
    assert np.array_equal(back.suffix_rows, t.suffix_rows)


def test_serialization_header_layout():
    t = tmdto.build_table(spec(M=2, t=4, seed=3, j=5), 16)
    raw = t.to_bytes()
    assert raw[:4] == b"TMDT"
    assert int.from_bytes(raw[8:12], "little") == 16
    assert int.from_bytes(raw[12:16], "little") == 5
    assert len(raw) == 48 + 2 * 16
    start0 = int.from_bytes(raw[48:56], "little")
    assert start0 == t.starts[0]


@pytest.mark.parametrize("mutate", ["magic", "truncate", "unsorted"])
def test_serialization_rejects_damage(mutate):
    raw = bytearray(tmdto.build_table(spec(M=4, t=2, seed=3), 16).to_bytes())
    if mutate == "magic":
        raw[0:4] = b"XXXX"
    elif mutate == "truncate":
        raw = raw[:-3]
    else:
        raw[48 + 8:48 + 16], raw[48 + 24:48 + 32] = raw[48 + 24:48 + 32], raw[48 + 8:48 + 16]
    with pytest.raises(tmdto.TableFormatError):
        tmdto.TradeoffTable.from_bytes(bytes(raw))


def test_invert_covered_and_uncovered(kernels):
    t = tmdto.build_table(spec(ell=12, M=16, t=8, seed=4), 16, kernels=kernels)
    covered = oracle_covered(t)
    some = sorted(covered)[len(covered) // 2]
    key = tmdto.invert(t, some, kernels=kernels)
    assert key is not None
    assert key >> 12 == 0xF
    assert oracle.oneway_step(key, 16) & 0xFFF == some
    missing = next(c for c in range(4096) if c not in covered)
    assert tmdto.invert(t, missing, kernels=kernels) is None


def test_invert_rejects_wide_challenge():
    t = tmdto.build_table(spec(), 16)
    with pytest.raises(ValueError):
        tmdto.invert(t, 1 << 12)


def test_covered_set_single_row():
    t = tmdto.build_table(spec(M=1, t=1), 16)
    assert tmdto.covered_set(t) == {int(t.ends[0]) & 0xFFF}


def test_covered_set_matches_brute_force(kernels):
    t = tmdto.build_table(spec(ell=12, M=16, t=8, seed=2), 16, kernels=kernels)
    cov = tmdto.covered_set(t, kernels=kernels)
    assert len(cov) <= 128
    assert cov == oracle_covered(t)


def test_covered_set_cap():
    t = tmdto.build_table(spec(M=16, t=8), 16)
    with pytest.raises(ValueError):
        tmdto.covered_set(t, cap=100)


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_constrained_exhaustive_agreement(kernels, seed):
    t = tmdto.build_table(spec(ell=12, M=32, t=8, seed=seed), 20, kernels=kernels)
    cov = tmdto.covered_set(t)
    for c in range(1 << 12):
        assert (tmdto.invert(t, c, kernels=kernels) is not None) == (c in cov)


def test_constrained_completeness_at_ell_14():
    t = tmdto.build_table(spec(ell=14, M=64, t=16, seed=8), 24)
    cov = tmdto.covered_set(t)
    hits = {c for c in range(1 << 14) if tmdto.invert(t, c) is not None}
    assert hits == cov


@pytest.mark.parametrize("mode", list(Mode))
def test_soundness_random_challenges(kernels, mode):
    n, ell = 24, 16
    t = tmdto.build_table(spec(ell=ell, M=256, t=16, seed=21, mode=mode), n, kernels=kernels)
    rng = random.Random(3)
    found = 0
    for _ in range(10_000):
        c = rng.getrandbits(ell)
        key = tmdto.invert(t, c, kernels=kernels)
        if key is not None:
            found += 1
            assert oracle.oneway_step(key, n) & 0xFFFF == c
            if mode is Mode.CONSTRAINED:
                assert key >> ell == 0xFF
    assert found > 0


def test_soundness_exhaustive_n20_unconstrained():
    t = tmdto.build_table(spec(mode=Mode.UNCONSTRAINED, ell=10, M=64, t=8, seed=5), 20)
    for c in range(1 << 10):
        key = tmdto.invert(t, c)
        if key is not None:
            assert tmdto.is_valid_key(key, c, 20, 10, False)


def test_unconstrained_endpoint_suffixes_always_invert():
    t = tmdto.build_table(spec(mode=Mode.UNCONSTRAINED, ell=16, M=256, t=16, seed=9), 24)
    for c in tmdto.endpoint_suffixes(t):
        assert tmdto.invert(t, c) is not None


def test_work_bound(kernels):
    t = tmdto.build_table(spec(mode=Mode.UNCONSTRAINED, ell=8, M=64, t=16, seed=6), 14, kernels=kernels)
    for c in range(256):
        r = tmdto.invert_counted(t, c, kernels=kernels)
        assert r.steps <= t.spec.t * (2 + len(t))


def test_deterministic_outcome():
    t = tmdto.build_table(spec(M=64, seed=12), 20)
    assert [tmdto.invert(t, c) for c in range(500)] == [tmdto.invert(t, c) for c in range(500)]


@settings(max_examples=40, deadline=None)
@given(
    n=st.integers(8, 40),
    data=st.data(),
    mode=st.sampled_from(list(Mode)),
    seed=st.integers(0, 2**64 - 1),
)
def test_backends_agree(n, data, mode, seed):
    from tmdtochain._backend import available

    backends = available()
    ell = data.draw(st.integers(1, min(n, 16)))
    space = ell if mode is Mode.CONSTRAINED else n
    m = data.draw(st.integers(0, min(64, 1 << space)))
    t = data.draw(st.integers(1, 12))
    s = TableSpec(j=0, ell=ell, M=m, t=t, mode=mode, seed=seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        tables = [tmdto.build_table(s, n, kernels=k) for k in backends]
    assert len({tb.to_bytes() for tb in tables}) == 1
    challenges = data.draw(st.lists(st.integers(0, (1 << ell) - 1), min_size=1, max_size=20))
    for c in challenges:
        results = {tmdto.invert_counted(tb, c, kernels=k) for tb, k in zip(tables, backends)}
        assert len(results) == 1
