"""Three interchangeable representations of 1-Lipschitz maps on Z_p at
precision K, with measure-preservation checks.

* ``ValueTable``: the full value table on residues mod p**K.
* ``VdpSeries``: interpolation coefficients B_m over the indicator basis
  chi(m, .), where chi(m, x) = 1 iff the first n digits of x spell m
  (n = number of digits of m; n = 1 for m = 0).  A table is 1-Lipschitz
  exactly when p**(digits(m) - 1) divides B_m for every m.
* ``CoordRep``: digit functions phi_k with f(x) = sum p^k phi_k(x mod p^(k+1));
  the restriction of phi_k to a fixed length-k prefix is a one-digit
  sub-function, and f preserves Haar measure exactly when every sub-function
  is a bijection of the digit alphabet.

Measure preservation can be decided three ways (brute-force reductions,
series coefficient criterion, sub-function bijectivity); the criteria agree
on 1-Lipschitz inputs.  The series criterion is stated in its corrected form
with level-1 coefficient bands included; ``min_level=2`` reproduces a weaker
published variant that the tests demonstrate to disagree with brute force.
"""

from __future__ import annotations

from dataclasses import dataclass
from random import Random
from typing import Callable, Iterable

from .core import DomainError, FormatError, PadicContext, PadicInt, PadicError

DEFAULT_TABLE_LIMIT = 1 << 20


class NotOneLipschitzError(PadicError):
    """A 1-Lipschitz table/series was required."""


def _check_table_size(ctx: PadicContext, limit: int = DEFAULT_TABLE_LIMIT) -> None:
    if ctx.modulus > limit:
        raise DomainError(
            f"table of size p**K = {ctx.modulus} exceeds the limit {limit}"
        )


def digit_length(m: int, p: int) -> int:
    """Number of base-p digits of m; by convention 1 for m = 0."""
    if m < 0:
        raise DomainError("index must be non-negative")
    n = 1
    while m >= p:
        m //= p
        n += 1
    return n


@dataclass(frozen=True)
class ValueTable:
    """Residue-indexed value table of a map on Z/p**K."""

    ctx: PadicContext
    values: tuple[int, ...]

    def __post_init__(self) -> None:
        _check_table_size(self.ctx)
        if len(self.values) != self.ctx.modulus:
            raise DomainError(
                f"table needs {self.ctx.modulus} entries, got {len(self.values)}"
            )
        for v in self.values:
            if not 0 <= v < self.ctx.modulus:
                raise DomainError(f"table entry {v} out of range")

    @classmethod
    def from_callable(cls, ctx: PadicContext, fn: Callable[[int], int]) -> "ValueTable":
        _check_table_size(ctx)
        return cls(ctx, tuple(fn(x) % ctx.modulus for x in ctx.residues()))

    def __getitem__(self, x: int) -> int:
        return self.values[x]

    def apply(self, x: PadicInt) -> PadicInt:
        return PadicInt(self.ctx, self.values[x.value])


@dataclass(frozen=True)
class VdpSeries:
    """Interpolation coefficients B_m, m in [0, p**K)."""

    ctx: PadicContext
    B: tuple[int, ...]

    def __post_init__(self) -> None:
        _check_table_size(self.ctx)
        if len(self.B) != self.ctx.modulus:
            raise DomainError(
                f"series needs {self.ctx.modulus} coefficients, got {len(self.B)}"
            )
        for v in self.B:
            if not 0 <= v < self.ctx.modulus:
                raise DomainError(f"coefficient {v} out of range")

    def b(self, m: int) -> int:
        """Normalized coefficient B_m / p**(digits(m)-1); raises when not divisible."""
        q = self.ctx.p ** (digit_length(m, self.ctx.p) - 1)
        if self.B[m] % q:
            raise NotOneLipschitzError(
                f"B_{m} = {self.B[m]} is not divisible by {q}"
            )
        return self.B[m] // q


@dataclass(frozen=True)
class CoordRep:
    """Digit functions phi_k indexed by the first k+1 input digits."""

    ctx: PadicContext
    phi: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        _check_table_size(self.ctx)
        if len(self.phi) != self.ctx.precision:
            raise DomainError(
                f"need {self.ctx.precision} digit functions, got {len(self.phi)}"
            )
        for k, row in enumerate(self.phi):
            if len(row) != self.ctx.p ** (k + 1):
                raise DomainError(f"phi_{k} needs {self.ctx.p ** (k + 1)} entries")
            for v in row:
                if not 0 <= v < self.ctx.p:
                    raise DomainError(f"phi_{k} value {v} is not a digit")

    def subfn(self, k: int, prefix: int) -> tuple[int, ...]:
        """phi_k restricted to a fixed length-k prefix, as a map on digits."""
        p = self.ctx.p
        if not 0 <= k < self.ctx.precision:
            raise DomainError(f"level {k} out of range")
        if not 0 <= prefix < p**k:
            raise DomainError(f"prefix {prefix} out of range for level {k}")
        return tuple(self.phi[k][prefix + d * p**k] for d in range(p))


# -- indicator basis ----------------------------------------------------------


def chi(m: int, x: PadicInt) -> int:
    """1 iff x = m mod p**n where n is the digit length of m (1 for m = 0)."""
    p = x.ctx.p
    if not 0 <= m < x.ctx.modulus:
        raise DomainError(f"index {m} out of range [0, {x.ctx.modulus})")
    n = digit_length(m, p)
    return 1 if (x.value - m) % p**n == 0 else 0


def vdp_eval(series: VdpSeries, x: PadicInt) -> PadicInt:
    """Sum of B over the distinct digit prefixes of x (the indices with chi = 1)."""
    if series.ctx != x.ctx:
        raise DomainError("series and argument contexts differ")
    ctx = series.ctx
    p = ctx.p
    total = series.B[x.value % p]
    pj = p
    for _ in range(2, ctx.precision + 1):
        prev, pj = pj, pj * p
        m = x.value % pj
        if m >= prev:  # leading digit nonzero: a new prefix value
            total += series.B[m]
    return PadicInt(ctx, total % ctx.modulus)


def vdp_interpolate(table: ValueTable) -> VdpSeries:
    """Coefficients with B_m = t[m] for m < p and
    B_m = t[m] - t[m without its leading digit] otherwise."""
    ctx = table.ctx
    p, modulus = ctx.p, ctx.modulus
    B = list(table.values[:p])
    pn = p
    while pn < modulus:
        for m in range(pn, pn * p):
            B.append((table.values[m] - table.values[m % pn]) % modulus)
        pn *= p
    return VdpSeries(ctx, tuple(B))


def vdp_to_table(series: VdpSeries) -> ValueTable:
    ctx = series.ctx
    return ValueTable.from_callable(
        ctx, lambda x: vdp_eval(series, PadicInt(ctx, x)).value
    )


# -- 1-Lipschitz checks --------------------------------------------------------


def check_one_lipschitz(obj: ValueTable | VdpSeries) -> bool:
    """Table: x = y mod p^j implies f(x) = f(y) mod p^j for all j.
    Series: p**(digits(m)-1) divides B_m for all m."""
    if isinstance(obj, VdpSeries):
        p = obj.ctx.p
        q, pn = 1, p
        for m, coeff in enumerate(obj.B):
            if m == pn:
                q *= p
                pn *= p
            if coeff % q:
                return False
        return True
    ctx = obj.ctx
    p = ctx.p
    values = obj.values
    for j in range(1, ctx.precision):
        pj = p**j
        for x in range(ctx.modulus):
            if (values[x] - values[x % pj]) % pj:
                return False
    return True


# -- coordinate representation --------------------------------------------------


def coord_from_table(table: ValueTable) -> CoordRep:
    if not check_one_lipschitz(table):
        raise NotOneLipschitzError("coordinate form exists only for 1-Lipschitz tables")
    ctx = table.ctx
    p = ctx.p
    phi = []
    pk = 1
    for k in range(ctx.precision):
        pk1 = pk * p
        phi.append(tuple((table.values[a] // pk) % p for a in range(pk1)))
        pk = pk1
    return CoordRep(ctx, tuple(phi))


def table_from_coord(coord: CoordRep) -> ValueTable:
    ctx = coord.ctx
    p = ctx.p

    def fn(x: int) -> int:
        total, pk = 0, 1
        for k in range(ctx.precision):
            pk1 = pk * p
            total += coord.phi[k][x % pk1] * pk
            pk = pk1
        return total

    return ValueTable.from_callable(ctx, fn)


# -- measure preservation --------------------------------------------------------


def check_measure_bruteforce(table: ValueTable) -> bool:
    """Bijectivity of every reduction mod p^k, k = 1..K (input must be 1-Lipschitz)."""
    ctx = table.ctx
    for k in range(1, ctx.precision + 1):
        pk = ctx.p**k
        if len({table.values[x] % pk for x in range(pk)}) != pk:
            return False
    return True


def check_measure_vdp(series: VdpSeries, min_level: int = 1) -> bool:
    """Coefficient criterion on normalized b_m:

    (1) b_0..b_{p-1} form a complete residue system mod p, and
    (2) for every level k >= min_level with p^(k+1) <= p^K and every
        m in [0, p^k), the values {b_{m + i p^k} : i = 1..p-1} are exactly
        the nonzero residues mod p.

    ``min_level=1`` is the corrected criterion used everywhere in this
    package; ``min_level=2`` reproduces a weaker published variant (it leaves
    the level-1 band unconstrained and disagrees with brute force).
    """
    if min_level < 1:
        raise DomainError("min_level must be >= 1")
    ctx = series.ctx
    p = ctx.p
    nonzero = frozenset(range(1, p))
    if {series.b(m) % p for m in range(p)} != frozenset(range(p)):
        return False
    for k in range(min_level, ctx.precision):
        pk = p**k
        for m in range(pk):
            if {series.b(m + i * pk) % p for i in range(1, p)} != nonzero:
                return False
    return True


def check_measure_coord(coord: CoordRep) -> bool:
    """Every one-digit sub-function (phi_0 included) must be a bijection."""
    ctx = coord.ctx
    p = ctx.p
    for k in range(ctx.precision):
        for prefix in range(p**k):
            if len(set(coord.subfn(k, prefix))) != p:
                return False
    return True


# -- random generation ------------------------------------------------------------


def random_one_lipschitz_table(
    ctx: PadicContext, rng: Random, permutation_bias: float = 0.5
) -> ValueTable:
    """Draw each one-digit sub-function independently and compose.

    Each sub-function is a random permutation of the digit alphabet with
    probability ``permutation_bias`` and an arbitrary random digit map
    otherwise; bias 1.0 therefore yields exactly the measure-preserving
    tables, while intermediate values mix verdicts.
    """
    _check_table_size(ctx)
    p = ctx.p
    alphabet = list(range(p))
    phi = []
    pk = 1
    for k in range(ctx.precision):
        row = [0] * (pk * p)
        for prefix in range(pk):
            if rng.random() < permutation_bias:
                sub = alphabet[:]
                rng.shuffle(sub)
            else:
                sub = [rng.randrange(p) for _ in range(p)]
            for d in range(p):
                row[prefix + d * pk] = sub[d]
        phi.append(tuple(row))
        pk *= p
    return table_from_coord(CoordRep(ctx, tuple(phi)))


# -- text serialization --------------------------------------------------------------


def serialize_table_text(obj: ValueTable | VdpSeries) -> str:
    """Line format: header ``p K kind``, then one residue per line."""
    kind = "table" if isinstance(obj, ValueTable) else "vdp"
    ctx = obj.ctx
    entries = obj.values if isinstance(obj, ValueTable) else obj.B
    lines = [f"{ctx.p} {ctx.precision} {kind}"]
    lines.extend(str(PadicInt(ctx, v)) for v in entries)
    return "\n".join(lines) + "\n"


def parse_table_text(text: str) -> ValueTable | VdpSeries:
    from .core import from_text

    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise FormatError("empty table file")
    head = lines[0].split()
    if len(head) != 3 or head[2] not in ("table", "vdp"):
        raise FormatError(f"bad header {lines[0]!r}; expected 'p K table' or 'p K vdp'")
    try:
        ctx = PadicContext(int(head[0]), int(head[1]))
    except (ValueError, DomainError) as exc:
        raise FormatError(f"bad header {lines[0]!r}: {exc}") from exc
    if len(lines) - 1 != ctx.modulus:
        raise FormatError(
            f"expected {ctx.modulus} entries, found {len(lines) - 1}"
        )
    entries = tuple(from_text(ln, ctx).value for ln in lines[1:])
    if head[2] == "table":
        return ValueTable(ctx, entries)
    return VdpSeries(ctx, entries)
