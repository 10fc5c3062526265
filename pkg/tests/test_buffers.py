from hypothesis import given, settings
from hypothesis import strategies as st

from orchestral import orchestrators as O
from orchestral.buffers import EMPTY, Buffer, apply_action, classify, left_restrict, run_sequence
from orchestral.graphs import Lasso

a_c, a_s, sl = O.in_c, O.in_s, O.sync_l
oc, os_ = O.out_c, O.out_s

actions = st.builds(O.OrchAction, st.sampled_from(list(O.ActionKind)), st.sampled_from("abc"))


class TestApply:
    def test_sync_leaves_buffer(self):
        assert apply_action(EMPTY, sl("a")) == EMPTY
        assert apply_action(EMPTY, O.sync_r("a")) == EMPTY

    def test_client_input(self):
        assert apply_action(EMPTY, a_c("a")) == Buffer.of({"a": (1, 0)})

    def test_relay_round_trip(self):
        assert apply_action(Buffer.of({"a": (1, 0)}), os_("a")) == EMPTY

    def test_directions(self):
        assert apply_action(EMPTY, a_s("a"))["a"] == (0, 1)
        assert apply_action(EMPTY, oc("a"))["a"] == (0, -1)
        assert apply_action(EMPTY, os_("a"))["a"] == (-1, 0)


class TestRun:
    def test_unsound(self):
        final, low = run_sequence(EMPTY, [a_c("a"), os_("b"), os_("a")])
        assert final == Buffer.of({"b": (-1, 0)})
        assert low["b"][0] == -1

    def test_sound_but_leftover(self):
        final, low = run_sequence(EMPTY, [a_c("a"), a_c("b"), os_("a")])
        assert final == Buffer.of({"b": (1, 0)})
        assert all(min(v) >= 0 for v in low.values())

    def test_empty(self):
        final, low = run_sequence(EMPTY, [])
        assert final == EMPTY and all(v == (0, 0) for v in low.values())

    @given(st.lists(actions, max_size=30))
    def test_final_is_counting(self, seq):
        final, _ = run_sequence(EMPTY, seq)
        for a in "abc":
            cs = sum(m == a_c(a) for m in seq) - sum(m == os_(a) for m in seq)
            sc = sum(m == a_s(a) for m in seq) - sum(m == oc(a) for m in seq)
            assert final[a] == (cs, sc)

    @given(actions)
    def test_one_counter_moves(self, m):
        b = apply_action(EMPTY, m)
        changed = [x for x in "abc" for side in (0, 1) if b[x][side] != 0]
        sync = m.kind in (O.ActionKind.SYNC_L, O.ActionKind.SYNC_R)
        assert len(changed) == (0 if sync else 1)


class TestRestrict:
    def test_drops_sync(self):
        assert left_restrict((sl("a"), a_c("b")), "a") == ()

    def test_keeps_buffering(self):
        assert left_restrict((sl("a"), a_c("b")), "b") == (a_c("b"),)

    def test_lasso_becomes_finite(self):
        assert left_restrict(Lasso((a_c("a"),), (sl("a"),)), "a") == (a_c("a"),)

    def test_lasso_stays_infinite(self):
        s = Lasso((sl("a"),), (a_c("a"), os_("a")))
        assert left_restrict(s, "a") == Lasso((), (a_c("a"), os_("a")))


class TestClassify:
    def test_unsound(self):
        v = classify((a_c("a"), os_("b"), os_("a")))
        assert not v.sound and v.witnesses["sound"].name == "b"

    def test_leftover(self):
        v = classify((a_c("a"), a_c("b"), os_("a")))
        assert v.sound and not v.client_respectful
        assert v.witnesses["client_respectful"].name == "b"

    def test_server_input_cycle(self):
        v = classify(Lasso((sl("c"),), (a_s("b"), a_s("c"))))
        assert v.sound and v.client_respectful and not v.non_def_server_inputted

    def test_definitely_buffering(self):
        v = classify(Lasso((sl("c"),), (a_c("c"), sl("b"))))
        assert not v.client_respectful and v.witnesses["client_respectful"].name == "c"

    def test_remark_one(self):
        v = classify(Lasso((a_c("a"),), (sl("a"),)))
        assert v.sound and not v.client_respectful

    def test_cycle_drain_is_unsound(self):
        assert not classify(Lasso((a_c("a"), a_c("a")), (os_("a"),))).sound

    def test_unbounded_server_side_is_fine(self):
        v = classify(Lasso((), (a_s("b"), O.sync_r("a"))))
        assert v.respectful

    def test_growing_client_side_with_delivery(self):
        # cs_a grows by one each round but is never definitely-<a,_>
        assert classify(Lasso((), (a_c("a"), a_c("a"), os_("a")))).client_respectful

    @settings(max_examples=300)
    @given(st.lists(actions, max_size=5), st.lists(actions, min_size=1, max_size=5),
           st.integers(1, 4))
    def test_lasso_soundness_matches_unrolling(self, pre, cyc, k):
        v = classify(Lasso(tuple(pre), tuple(cyc)))
        unrolled = classify(tuple(pre) + tuple(cyc) * k)
        if v.sound:
            assert unrolled.sound
        elif unrolled.sound:
            # only a negative net cycle weight can hide beyond k rounds
            assert not classify(tuple(pre) + tuple(cyc) * 50).sound

    @given(st.lists(actions, max_size=8))
    def test_respectful_is_conjunction(self, seq):
        v = classify(tuple(seq))
        assert v.respectful == (v.sound and v.client_respectful and v.non_def_server_inputted)
        assert v.non_def_server_inputted


def test_json_round_trip():
    b = Buffer.of({"a": (1, -2), "b": (0, 3)})
    assert b.to_json() == {"a": {"cs": 1, "sc": -2}, "b": {"cs": 0, "sc": 3}}
    assert Buffer.from_json(b.to_json()) == b
    assert str(EMPTY) == "{}"
