import random

import pytest

from fdsolver.model import new_domain
from fdsolver.state import PopAtRoot, SearchState


def make(n=3):
    return SearchState([new_domain(0, 9) for _ in range(n)])


def test_save_once_per_level():
    st = make()
    for _ in range(3):
        st.push_level()
    before = st[0]
    st[0] = st[0].remove((1,))
    assert st.stacks[0] == [(3, before)]
    st[0] = st[0].remove((2,))
    assert st.stacks[0] == [(3, before)]


def test_levels_stack_in_order():
    st = make()
    st.push_level()
    st[0] = st[0].remove((1,))
    st.push_level()
    st[0] = st[0].remove((2,))
    assert [lvl for lvl, _ in st.stacks[0]] == [1, 2]


def test_restore_single():
    st = make()
    orig = st[0]
    st.push_level()
    st[0] = st[0].remove((0, 1, 2))
    st.restore_to_level(0)
    assert st[0] == orig and st.stacks[0] == []


def test_restore_to_current_level_is_noop():
    st = make()
    st.push_level()
    st[1] = st[1].remove((5,))
    snap = list(st)
    st.restore_to_level(st.level)
    assert list(st) == snap


def test_restore_skipping_levels():
    st = make()
    st.push_level()  # level 1
    st[0] = st[0].remove((0,))
    at1 = st[0]
    st.push_level()
    st.push_level()  # level 3
    entering3 = st[0]
    st[0] = st[0].remove((1, 2))
    st.restore_to_level(1)
    assert st[0] == entering3 == at1
    assert [lvl for lvl, _ in st.stacks[0]] == [1]


def test_push_pop_counter():
    st = make()
    assert st.push_level() == 1
    st.push_level()
    assert st.pop_level() == 1
    st.pop_level()
    with pytest.raises(PopAtRoot):
        st.pop_level()


def test_restore_forward_rejected():
    with pytest.raises(ValueError):
        make().restore_to_level(2)


@pytest.mark.parametrize("seed", range(20))
def test_random_trace_against_shadow(seed):
    rng = random.Random(seed)
    st = SearchState([new_domain(0, rng.randint(0, 30)) for _ in range(5)])
    shadow = []  # domains as they were when each open level was entered
    for _ in range(300):
        op = rng.random()
        if op < 0.3:
            st.push_level()
            shadow.append(list(st))
        elif op < 0.5 and st.level > 0:
            st.pop_level()
            assert list(st) == shadow.pop()
        else:
            v = rng.randrange(5)
            vals = list(st[v])
            if vals:
                st[v] = st[v].remove(rng.sample(vals, rng.randint(1, len(vals))))
        for stack in st.stacks:
            levels = [lvl for lvl, _ in stack]
            assert levels == sorted(set(levels))
            assert all(lvl <= st.level for lvl in levels)


def test_restore_order_independent():
    rng = random.Random(3)
    base = SearchState([new_domain(0, 15) for _ in range(6)])
    ops = []
    for _ in range(80):
        if rng.random() < 0.2:
            ops.append(("push",))
        else:
            v = rng.randrange(6)
            ops.append(("rm", v, rng.randrange(16)))

    def replay():
        st = SearchState(list(base))
        for op in ops:
            if op[0] == "push":
                st.push_level()
            else:
                st[op[1]] = st[op[1]].remove((op[2],))
        return st

    target = replay().level // 2
    ref = replay()
    ref.restore_to_level(target)
    for _ in range(5):
        order = list(range(6))
        rng.shuffle(order)
        st = replay()
        st.restore_to_level(target, order=order)
        assert list(st) == list(ref)
