import json
import random

import pytest

from padic_ciphers.core import DomainError, PadicContext
from padic_ciphers.automaton import (
    MealyMachine,
    TransducerRun,
    check_induced_bijections,
    function_of_automaton,
    machine_from_json,
    machine_to_json,
    random_machine,
    run,
    transduce,
    unroll_from_function,
)
from padic_ciphers.lipschitz import (
    NotOneLipschitzError,
    ValueTable,
    check_measure_bruteforce,
    check_one_lipschitz,
    random_one_lipschitz_table,
)

C33 = PadicContext(3, 3)
C34 = PadicContext(3, 4)


def identity_machine(p):
    return MealyMachine(
        p=p,
        n_states=1,
        transition=tuple((0,) for _ in range(p)),
        output=tuple((d,) for d in range(p)),
        initial=0,
    )


def test_identity_machine():
    m = identity_machine(3)
    assert run(m, [2, 0, 1]) == [2, 0, 1]
    x = C33.integer(17)
    assert transduce(m, x) == x


def test_shift_machine_example():
    # multiply by p: emit 0 first, then echo the previous input digit.
    # states: 0 = fresh, 1+d = "last digit was d"
    p = 3
    m = MealyMachine(
        p=p,
        n_states=1 + p,
        transition=tuple(tuple(1 + d for _ in range(1 + p)) for d in range(p)),
        output=tuple(
            tuple(0 if s == 0 else s - 1 for s in range(1 + p)) for d in range(p)
        ),
        initial=0,
    )
    assert run(m, [1, 2]) == [0, 1]
    # matches multiplication by p on the table side
    table = function_of_automaton(m, 3)
    assert all(table.values[x] == (3 * x) % 27 for x in range(27))


def test_binary_increment_example():
    # carry automaton for x+1 at p=2: state is the pending carry (start 1)
    m = MealyMachine(
        p=2,
        n_states=2,
        transition=(
            (0, 0),  # input 0: carry consumed
            (0, 1),  # input 1: carry propagates only if it was set
        ),
        output=(
            (0, 1),  # 0 + carry
            (1, 0),  # 1 + carry
        ),
        initial=1,
    )
    assert run(m, [1, 1, 0]) == [0, 0, 1]
    table = function_of_automaton(m, 4)
    assert all(table.values[x] == (x + 1) % 16 for x in range(16))


def test_stepping_cursor():
    m = identity_machine(3)
    cur = TransducerRun(m)
    assert cur.step(2) == 2
    assert cur.consumed == 1
    with pytest.raises(DomainError):
        cur.step(3)


def test_unroll_identity_and_replay():
    t = ValueTable.from_callable(C33, lambda x: x)
    m = unroll_from_function(t)
    assert m.n_states == 1 + 3 + 9 + 1
    assert function_of_automaton(m, 3).values == t.values


def test_unroll_affine_exhaustive():
    ctx = PadicContext(5, 3)
    t = ValueTable.from_callable(ctx, lambda x: 2 * x)
    m = unroll_from_function(t)
    assert function_of_automaton(m, 3).values == t.values


def test_unroll_rejects_non_lipschitz():
    t = ValueTable.from_callable(C33, lambda x: x // 3)
    with pytest.raises(NotOneLipschitzError):
        unroll_from_function(t)


def test_unroll_xor_constant_is_stateless_per_level():
    # f(x) = x xor c has output digits that ignore the prefix class
    c = 14  # digits (2, 1, 1)
    t = ValueTable.from_callable(
        C33, lambda x: sum(((x // 3**k + c // 3**k) % 3) * 3**k for k in range(3))
    )
    m = unroll_from_function(t)
    offsets = [0, 1, 4, 13]
    for k in range(3):
        for d in range(3):
            outs = {m.output[d][offsets[k] + a] for a in range(3**k)}
            assert len(outs) == 1
    assert function_of_automaton(m, 3).values == t.values


def test_unroll_roundtrip_random_tables():
    rng = random.Random(41)
    for _ in range(30):
        t = random_one_lipschitz_table(C34, rng)
        m = unroll_from_function(t)
        assert function_of_automaton(m, 4).values == t.values


def test_machine_functions_are_one_lipschitz():
    rng = random.Random(43)
    for _ in range(40):
        m = random_machine(3, rng.randrange(1, 6), rng)
        t = function_of_automaton(m, 3)
        assert check_one_lipschitz(t)


def test_bijectivity_bridge():
    rng = random.Random(47)
    for _ in range(40):
        m = random_machine(3, rng.randrange(1, 6), rng)
        t = function_of_automaton(m, 3)
        assert check_induced_bijections(m, 3) == check_measure_bruteforce(t)
    # the unrolled doubling map is bijective level by level
    ctx = PadicContext(5, 2)
    t = ValueTable.from_callable(ctx, lambda x: 7 * x)
    assert check_induced_bijections(unroll_from_function(t), 2)


def test_json_roundtrip():
    rng = random.Random(53)
    m = random_machine(3, 5, rng, initial=2)
    blob = json.dumps(machine_to_json(m))
    back = machine_from_json(json.loads(blob))
    assert back == m

    from padic_ciphers.core import FormatError

    with pytest.raises(FormatError):
        machine_from_json({"p": 2, "states": 1})
    bad = machine_to_json(m) | {"transition": [0] * 7}
    with pytest.raises(FormatError):
        machine_from_json(bad)


def test_run_validates_digits():
    m = identity_machine(3)
    with pytest.raises(DomainError):
        run(m, [0, 3])
