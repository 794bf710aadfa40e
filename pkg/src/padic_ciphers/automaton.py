"""Mealy transducers over the digit alphabet {0..p-1}.

A machine reads input digits x0, x1, ... and emits one output digit per
input digit; because the k-th output depends only on inputs 0..k, the
induced map on digit strings is always 1-Lipschitz.  Conversely every
1-Lipschitz table unrolls into a finite machine whose states are the input
prefixes seen so far (one state per residue class mod p^k at each level k,
plus an echo sink that is only reachable after the working precision is
exhausted).
"""

from __future__ import annotations

from dataclasses import dataclass
from random import Random
from typing import Iterable, Sequence

from .core import DomainError, FormatError, PadicContext, PadicInt
from .lipschitz import (
    DEFAULT_TABLE_LIMIT,
    NotOneLipschitzError,
    ValueTable,
    check_one_lipschitz,
)


@dataclass(frozen=True)
class MealyMachine:
    """Transition/output tables indexed [input digit][state]."""

    p: int
    n_states: int
    transition: tuple[tuple[int, ...], ...]
    output: tuple[tuple[int, ...], ...]
    initial: int

    def __post_init__(self) -> None:
        if self.p < 2:
            raise DomainError("alphabet needs p >= 2")
        if self.n_states < 1:
            raise DomainError("at least one state required")
        if not 0 <= self.initial < self.n_states:
            raise DomainError("initial state out of range")
        for name, table, bound in (
            ("transition", self.transition, self.n_states),
            ("output", self.output, self.p),
        ):
            if len(table) != self.p:
                raise DomainError(f"{name} table needs one row per input digit")
            for row in table:
                if len(row) != self.n_states:
                    raise DomainError(f"{name} row needs one entry per state")
                for v in row:
                    if not 0 <= v < bound:
                        raise DomainError(f"{name} entry {v} out of range")


class TransducerRun:
    """Stepping cursor over a machine: feed one digit, get one digit."""

    def __init__(self, machine: MealyMachine, state: int | None = None):
        self.machine = machine
        self.state = machine.initial if state is None else state
        self.consumed = 0

    def step(self, digit: int) -> int:
        m = self.machine
        if not 0 <= digit < m.p:
            raise DomainError(f"input digit {digit} out of range [0, {m.p})")
        out = m.output[digit][self.state]
        self.state = m.transition[digit][self.state]
        self.consumed += 1
        return out


def run(machine: MealyMachine, digits: Iterable[int]) -> list[int]:
    cursor = TransducerRun(machine)
    return [cursor.step(d) for d in digits]


def transduce(machine: MealyMachine, x: PadicInt) -> PadicInt:
    if machine.p != x.ctx.p:
        raise DomainError("machine and argument alphabet differ")
    return x.ctx.from_digits(run(machine, x.digits))


# -- unrolling a table into a machine -----------------------------------------


def unroll_from_function(table: ValueTable) -> MealyMachine:
    """One state per input-prefix class mod p^k, k < K, plus an echo sink.

    State (k, a) means: k digits consumed, their value is a.  On digit d the
    machine emits digit k of the table value at the representative a + d*p^k
    (well defined by the 1-Lipschitz property) and moves to level k+1.
    """
    if not check_one_lipschitz(table):
        raise NotOneLipschitzError("only 1-Lipschitz tables unroll into transducers")
    ctx = table.ctx
    p, K = ctx.p, ctx.precision
    offsets = [0]
    for k in range(K):
        offsets.append(offsets[-1] + p**k)
    sink = offsets[K]
    n_states = sink + 1

    transition = [[sink] * n_states for _ in range(p)]
    output = [[0] * n_states for _ in range(p)]
    for d in range(p):
        # the sink echoes its input and loops
        output[d][sink] = d
        for k in range(K):
            pk = p**k
            for a in range(pk):
                state = offsets[k] + a
                rep = a + d * pk
                output[d][state] = (table.values[rep] // pk) % p
                if k + 1 < K:
                    transition[d][state] = offsets[k + 1] + rep
    return MealyMachine(
        p=p,
        n_states=n_states,
        transition=tuple(tuple(row) for row in transition),
        output=tuple(tuple(row) for row in output),
        initial=0,
    )


def function_of_automaton(
    machine: MealyMachine, precision: int, limit: int = DEFAULT_TABLE_LIMIT
) -> ValueTable:
    """Value table of the induced map on the first ``precision`` digits."""
    ctx = PadicContext(machine.p, precision)
    if ctx.modulus > limit:
        raise DomainError(f"table of size {ctx.modulus} exceeds the limit {limit}")

    def fn(x: int) -> int:
        digits = []
        v = x
        for _ in range(precision):
            digits.append(v % machine.p)
            v //= machine.p
        out = run(machine, digits)
        total = 0
        for d in reversed(out):
            total = total * machine.p + d
        return total

    return ValueTable.from_callable(ctx, fn)


def check_induced_bijections(machine: MealyMachine, precision: int) -> bool:
    """True iff the word map is a bijection on length-n words for all n <= precision."""
    table = function_of_automaton(machine, precision)
    p = machine.p
    for n in range(1, precision + 1):
        pn = p**n
        if len({table.values[x] % pn for x in range(pn)}) != pn:
            return False
    return True


# -- serialization ------------------------------------------------------------


def machine_to_json(machine: MealyMachine) -> dict:
    """Row-major flattening: entry for input digit t and state s at t*states + s."""
    return {
        "p": machine.p,
        "states": machine.n_states,
        "initial": machine.initial,
        "transition": [v for row in machine.transition for v in row],
        "output": [v for row in machine.output for v in row],
    }


def machine_from_json(data: dict) -> MealyMachine:
    try:
        p = int(data["p"])
        n_states = int(data["states"])
        initial = int(data["initial"])
        flat_t = [int(v) for v in data["transition"]]
        flat_o = [int(v) for v in data["output"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed machine object: {exc}") from exc
    if len(flat_t) != p * n_states or len(flat_o) != p * n_states:
        raise FormatError("transition/output tables have the wrong size")
    unflatten = lambda flat: tuple(
        tuple(flat[t * n_states : (t + 1) * n_states]) for t in range(p)
    )
    try:
        return MealyMachine(p, n_states, unflatten(flat_t), unflatten(flat_o), initial)
    except DomainError as exc:
        raise FormatError(str(exc)) from exc


def random_machine(p: int, n_states: int, rng: Random, initial: int = 0) -> MealyMachine:
    return MealyMachine(
        p=p,
        n_states=n_states,
        transition=tuple(
            tuple(rng.randrange(n_states) for _ in range(n_states)) for _ in range(p)
        ),
        output=tuple(
            tuple(rng.randrange(p) for _ in range(n_states)) for _ in range(p)
        ),
        initial=initial,
    )
