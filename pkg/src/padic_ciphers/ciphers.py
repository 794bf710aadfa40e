"""Homomorphic digit ciphers over Z_p at fixed precision.

Five key families, each measure preserving and homomorphic for one
operation on plaintexts:

* additive:        y = A*x                        respects +
* multiplicative:  y = p^k A^k w(t0)^s <u>^a      respects *
* xor:             lower-triangular digit maps    respects digitwise +
* and:             digitwise exponentiation       respects digitwise *
* fhe:             y = A*x with A^d = 1           respects + and a chosen
                   two-variable operation G simultaneously

The multiplicative rule decomposes x = p^k u, splits the unit into its
Teichmuller part w = w(t0) and principal part <u> = u/w (which is = 1 mod p),
and maps them through independent exponents.  Writing the rule directly on
the digits t0 and t (as x = p^k(t0 + pt) -> p^k A^k (t0^s mod p)(1+pt)^a)
breaks multiplicativity whenever s != 1 because (t0^s mod p) is not a
multiplicative function of the unit; the Teichmuller form repairs exactly
that defect and the tests keep the broken variant around as a regression
witness.

For a two-variable operation G whose monomials all have total degree in some
set N, a unit A commutes with G (A*G(x,y) = G(Ax,Ay)) exactly when A^d = 1
for d = gcd{n - 1 : n in N}.  For odd p the solutions in Z_p are the
Teichmuller lifts of the mod-p solutions, so there are at most p-1 usable
multipliers: small primes make thin fhe key spaces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from random import Random

from .core import (
    DomainError,
    FormatError,
    PadicContext,
    PadicError,
    PadicInt,
    and_p,
    from_text,
    invert_unit,
    is_unit,
    pow_nat,
    pow_unit,
    teichmuller,
    to_text,
    unit_decompose,
    xor_p,
)
from .lipschitz import DEFAULT_TABLE_LIMIT, ValueTable


class InvalidKeyError(PadicError):
    """Key parameters violate the family's constraints."""


class FamilyMismatchError(PadicError):
    """Key belongs to a different family than the operation requires."""


# -- two-variable operations ---------------------------------------------------


@dataclass(frozen=True)
class LinearG:
    """G(x, y) = a*x + b*y."""

    a: PadicInt
    b: PadicInt


@dataclass(frozen=True)
class G1:
    """G(x, y) = x * y**(p-1)."""


@dataclass(frozen=True)
class G2:
    """G(x, y) = x**(p-1) * y + x * y**(p-1)."""


@dataclass(frozen=True)
class G3:
    """G(x, y) = x**((p-1)/2) * y**((p-1)/2); p odd."""


@dataclass(frozen=True)
class G4:
    """G(x, y) = x/(1 - p x**(p-1)) + y/(1 - p y**(p-1))
    = sum over s >= 0 of p^s (x**((p-1)s+1) + y**((p-1)s+1))."""


@dataclass(frozen=True)
class SeriesG:
    """G(x, y) = c + a*x + b*y + sum c_ij x^i y^j over a finite term list.

    Terms are ((i, j), coefficient) pairs with i + j >= 2.  A nonzero c
    cannot commute with any multiplier, so c = 0 is required whenever the
    term list is nonempty.
    """

    c: PadicInt
    a: PadicInt
    b: PadicInt
    terms: tuple[tuple[tuple[int, int], PadicInt], ...]

    def __post_init__(self) -> None:
        for (i, j), coeff in self.terms:
            if i < 0 or j < 0 or i + j < 2:
                raise DomainError(
                    f"series term x^{i} y^{j} must have total degree >= 2"
                )
        if self.terms and self.c.value != 0:
            raise DomainError("a nonzero constant term admits no multipliers; use c = 0")


GOperation = LinearG | G1 | G2 | G3 | G4 | SeriesG

_G_NAMES = {G1: "G1", G2: "G2", G3: "G3", G4: "G4"}


def g_name(op: GOperation) -> str:
    if isinstance(op, LinearG):
        return "GLIN"
    if isinstance(op, SeriesG):
        return "GSERIES"
    return _G_NAMES[type(op)]


def g_eval(op: GOperation, x: PadicInt, y: PadicInt) -> PadicInt:
    if x.ctx != y.ctx:
        raise DomainError("operands live in different contexts")
    ctx = x.ctx
    p = ctx.p
    if isinstance(op, LinearG):
        if op.a.ctx != ctx or op.b.ctx != ctx:
            raise DomainError("linear coefficients live in a different context")
        return op.a * x + op.b * y
    if isinstance(op, G1):
        return x * pow_nat(y, p - 1)
    if isinstance(op, G2):
        return pow_nat(x, p - 1) * y + x * pow_nat(y, p - 1)
    if isinstance(op, G3):
        if p == 2:
            raise DomainError("this operation needs an odd p (exponent (p-1)/2)")
        e = (p - 1) // 2
        return pow_nat(x, e) * pow_nat(y, e)
    if isinstance(op, G4):
        one = ctx.one
        px = ctx.integer(p) * pow_nat(x, p - 1)
        py = ctx.integer(p) * pow_nat(y, p - 1)
        return x * invert_unit(one - px) + y * invert_unit(one - py)
    if isinstance(op, SeriesG):
        total = op.c + op.a * x + op.b * y
        for (i, j), coeff in op.terms:
            total = total + coeff * pow_nat(x, i) * pow_nat(y, j)
        return total
    raise DomainError(f"unknown operation {op!r}")


def exponent_gcd(op: GOperation, p: int) -> int | None:
    """d = gcd{n - 1 : n a total degree appearing in G}; None for linear G."""
    if isinstance(op, LinearG):
        return None
    if isinstance(op, (G1, G2)):
        return p - 1  # single total degree p
    if isinstance(op, G3):
        return p - 2  # single total degree p - 1
    if isinstance(op, G4):
        return p - 1  # degrees (p-1)s + 1, s >= 1
    degrees = {i + j for (i, j), coeff in op.terms if coeff.value != 0}
    if not degrees:
        return None
    return math.gcd(*[n - 1 for n in degrees])


class AllUnits:
    """Marker: every unit multiplier is admissible (linear G)."""

    def __repr__(self) -> str:  # pragma: no cover
        return "AllUnits()"

    def __eq__(self, other) -> bool:
        return isinstance(other, AllUnits)

    def __hash__(self) -> int:
        return hash("AllUnits")


ALL_UNITS = AllUnits()


def admissible_multipliers(
    ctx: PadicContext, op: GOperation
) -> frozenset[PadicInt] | AllUnits:
    """All solutions of A^d = 1 in Z_p at precision K, for d = exponent_gcd.

    For odd p the principal units are torsion free, so the solutions are
    exactly the Teichmuller lifts of the digits j with j^d = 1 mod p; there
    are gcd(d, p-1) of them.
    """
    if ctx.p == 2:
        raise DomainError("admissible multipliers are computed for odd p")
    d = exponent_gcd(op, ctx.p)
    if d is None:
        return ALL_UNITS
    return frozenset(
        teichmuller(ctx, j) for j in range(1, ctx.p) if pow(j, d, ctx.p) == 1
    )


def roots_of_unity(ctx: PadicContext, d: int) -> frozenset[PadicInt]:
    """Solutions of A^d = 1 in Z_p at precision K (p odd)."""
    if ctx.p == 2:
        raise DomainError("roots of unity are computed for odd p")
    if d < 1:
        raise DomainError("exponent must be >= 1")
    return frozenset(
        teichmuller(ctx, j) for j in range(1, ctx.p) if pow(j, d, ctx.p) == 1
    )


# -- key families ----------------------------------------------------------------


@dataclass(frozen=True)
class AdditiveKey:
    family = "additive"
    A: PadicInt

    def __post_init__(self) -> None:
        if not is_unit(self.A):
            raise InvalidKeyError("multiplier A must be a unit")

    @property
    def ctx(self) -> PadicContext:
        return self.A.ctx


@dataclass(frozen=True)
class MultiplicativeKey:
    family = "multiplicative"
    A: PadicInt
    s: int
    a: PadicInt

    def __post_init__(self) -> None:
        ctx = self.A.ctx
        if ctx.p == 2:
            raise InvalidKeyError("the multiplicative family needs odd p")
        if not is_unit(self.A):
            raise InvalidKeyError("multiplier A must be a unit")
        if self.a.ctx != ctx:
            raise InvalidKeyError("parameters A and a must share a context")
        if not is_unit(self.a):
            raise InvalidKeyError("principal-unit exponent a must be a unit")
        if not 1 <= self.s <= ctx.p - 1 or math.gcd(self.s, ctx.p - 1) != 1:
            raise InvalidKeyError(
                f"digit exponent s must be in [1, {ctx.p - 1}] and coprime to p-1"
            )

    @property
    def ctx(self) -> PadicContext:
        return self.A.ctx


@dataclass(frozen=True)
class XorKey:
    """Row k holds the coefficients of output digit k over input digits 0..k."""

    family = "xor"
    key_ctx: PadicContext
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        ctx = self.key_ctx
        if len(self.rows) != ctx.precision:
            raise InvalidKeyError(f"need {ctx.precision} rows, got {len(self.rows)}")
        for k, row in enumerate(self.rows):
            if len(row) != k + 1:
                raise InvalidKeyError(f"row {k} needs {k + 1} coefficients")
            if any(not 0 <= c < ctx.p for c in row):
                raise InvalidKeyError(f"row {k} has a coefficient out of range")
            if row[k] % ctx.p == 0:
                raise InvalidKeyError(f"row {k} has zero diagonal; not invertible")

    @property
    def ctx(self) -> PadicContext:
        return self.key_ctx


@dataclass(frozen=True)
class AndKey:
    """Digit k maps through x -> x**s_k on the digit alphabet."""

    family = "and"
    key_ctx: PadicContext
    exponents: tuple[int, ...]

    def __post_init__(self) -> None:
        ctx = self.key_ctx
        if len(self.exponents) != ctx.precision:
            raise InvalidKeyError(
                f"need {ctx.precision} exponents, got {len(self.exponents)}"
            )
        for s in self.exponents:
            if not 1 <= s <= ctx.p - 1 or math.gcd(s, ctx.p - 1) != 1:
                raise InvalidKeyError(
                    f"digit exponent {s} must be in [1, {ctx.p - 1}] and coprime to p-1"
                )

    @property
    def ctx(self) -> PadicContext:
        return self.key_ctx


@dataclass(frozen=True)
class FheKey:
    """Additive key constrained to A^d = 1 so that a chosen G also commutes."""

    family = "fhe"
    A: PadicInt
    g: GOperation

    def __post_init__(self) -> None:
        if not is_unit(self.A):
            raise InvalidKeyError("multiplier A must be a unit")
        d = exponent_gcd(self.g, self.A.ctx.p)
        if d is not None and pow_nat(self.A, d).value != 1:
            raise InvalidKeyError(f"A^{d} != 1: multiplier does not commute with G")

    @property
    def ctx(self) -> PadicContext:
        return self.A.ctx

    @property
    def d(self) -> int | None:
        return exponent_gcd(self.g, self.A.ctx.p)


CipherKey = AdditiveKey | MultiplicativeKey | XorKey | AndKey | FheKey

FAMILIES = ("additive", "multiplicative", "xor", "and", "fhe")


# -- key generation ----------------------------------------------------------------


def _random_unit(ctx: PadicContext, rng: Random) -> PadicInt:
    return PadicInt(
        ctx,
        rng.randrange(1, ctx.p) + ctx.p * rng.randrange(ctx.modulus // ctx.p),
    )


def _coprime_exponents(p: int) -> list[int]:
    return [s for s in range(1, p) if math.gcd(s, p - 1) == 1]


def keygen(
    ctx: PadicContext, family: str, rng: Random, g: GOperation | None = None
) -> CipherKey:
    """Uniformly random valid key of the requested family.

    fhe keys draw A from the non-trivial solutions of A^d = 1 for the
    declared operation; when only A = 1 exists the family offers no secrecy
    and this raises instead of silently returning the identity.
    """
    if family == "additive":
        return AdditiveKey(_random_unit(ctx, rng))
    if family == "multiplicative":
        exps = _coprime_exponents(ctx.p)
        return MultiplicativeKey(
            A=_random_unit(ctx, rng),
            s=rng.choice(exps),
            a=_random_unit(ctx, rng),
        )
    if family == "xor":
        rows = []
        for k in range(ctx.precision):
            rows.append(
                tuple(rng.randrange(ctx.p) for _ in range(k))
                + (rng.randrange(1, ctx.p),)
            )
        return XorKey(ctx, tuple(rows))
    if family == "and":
        exps = _coprime_exponents(ctx.p)
        return AndKey(ctx, tuple(rng.choice(exps) for _ in range(ctx.precision)))
    if family == "fhe":
        if g is None:
            g = G1()
        admissible = admissible_multipliers(ctx, g)
        if isinstance(admissible, AllUnits):
            return FheKey(_random_unit(ctx, rng), g)
        candidates = sorted(a.value for a in admissible if a.value != 1)
        if not candidates:
            raise InvalidKeyError(
                "only the trivial multiplier A = 1 commutes with this operation "
                f"at p = {ctx.p}; pick a different operation or a larger prime"
            )
        return FheKey(PadicInt(ctx, rng.choice(candidates)), g)
    raise DomainError(f"unknown family {family!r}; expected one of {FAMILIES}")


# -- encryption / decryption ----------------------------------------------------------


def encrypt(key: CipherKey, x: PadicInt) -> PadicInt:
    if x.ctx != key.ctx:
        raise DomainError("plaintext context does not match the key")
    if isinstance(key, (AdditiveKey, FheKey)):
        return key.A * x
    if isinstance(key, MultiplicativeKey):
        return _multiplicative_encrypt(key, x)
    if isinstance(key, XorKey):
        return _xor_apply(key.rows, x)
    if isinstance(key, AndKey):
        return _and_apply(key.key_ctx, key.exponents, x)
    raise FamilyMismatchError(f"unknown key type {type(key).__name__}")


def decrypt(key: CipherKey, y: PadicInt) -> PadicInt:
    if y.ctx != key.ctx:
        raise DomainError("ciphertext context does not match the key")
    if isinstance(key, (AdditiveKey, FheKey)):
        return _inverse_unit_cached(key.A) * y
    if isinstance(key, MultiplicativeKey):
        return _multiplicative_decrypt(key, y)
    if isinstance(key, XorKey):
        return _xor_solve(key, y)
    if isinstance(key, AndKey):
        p = key.key_ctx.p
        inverse = tuple(pow(s, -1, p - 1) if p > 2 else 1 for s in key.exponents)
        return _and_apply(key.key_ctx, inverse, y)
    raise FamilyMismatchError(f"unknown key type {type(key).__name__}")


@lru_cache(maxsize=4096)
def _inverse_unit_cached(a: PadicInt) -> PadicInt:
    return invert_unit(a)


def _multiplicative_encrypt(key: MultiplicativeKey, x: PadicInt) -> PadicInt:
    ctx = key.ctx
    if x.value == 0:
        return ctx.zero
    dec = unit_decompose(x)
    k = dec.valuation
    u = PadicInt(ctx, x.value // ctx.p**k)
    w = teichmuller(ctx, dec.unit_digit)
    principal = u * _inverse_unit_cached(w)  # = 1 mod p
    unit_image = pow_nat(key.A, k) * pow_nat(w, key.s) * pow_unit(principal, key.a)
    return PadicInt(ctx, unit_image.value * ctx.p**k % ctx.modulus)


def _multiplicative_decrypt(key: MultiplicativeKey, y: PadicInt) -> PadicInt:
    ctx = key.ctx
    if y.value == 0:
        return ctx.zero
    p = ctx.p
    dec = unit_decompose(y)
    k = dec.valuation
    w_img = PadicInt(ctx, y.value // p**k)
    # strip A^k, then read t0 through the inverse digit exponent
    w1 = w_img * _inverse_unit_cached(pow_nat(key.A, k))
    t0 = pow(w1.value % p, pow(key.s, -1, p - 1), p)
    w = teichmuller(ctx, t0)
    principal_img = w1 * _inverse_unit_cached(pow_nat(w, key.s))
    a_inv = pow(key.a.value, -1, p ** (ctx.precision - 1)) if ctx.precision > 1 else 0
    principal = pow_unit(principal_img, a_inv)
    u = w * principal
    return PadicInt(ctx, u.value * p**k % ctx.modulus)


def _xor_apply(rows: tuple[tuple[int, ...], ...], x: PadicInt) -> PadicInt:
    ctx = x.ctx
    p = ctx.p
    digits = x.digits
    out, shift = 0, 1
    for k, row in enumerate(rows):
        acc = 0
        for i in range(k + 1):
            acc += row[i] * digits[i]
        out += (acc % p) * shift
        shift *= p
    return PadicInt(ctx, out)


def _xor_solve(key: XorKey, y: PadicInt) -> PadicInt:
    ctx = key.key_ctx
    p = ctx.p
    ydig = y.digits
    xdig: list[int] = []
    for k, row in enumerate(key.rows):
        acc = sum(row[i] * xdig[i] for i in range(k))
        xk = (ydig[k] - acc) * pow(row[k], -1, p) % p
        xdig.append(xk)
    return ctx.from_digits(xdig)


def _and_apply(ctx: PadicContext, exponents: tuple[int, ...], x: PadicInt) -> PadicInt:
    p = ctx.p
    digits = x.digits
    out, shift = 0, 1
    for k, s in enumerate(exponents):
        out += pow(digits[k], s, p) * shift
        shift *= p
    return PadicInt(ctx, out)


# -- whole-map views ------------------------------------------------------------------


def encryption_table(key: CipherKey, limit: int = DEFAULT_TABLE_LIMIT) -> ValueTable:
    ctx = key.ctx
    if ctx.modulus > limit:
        raise DomainError(f"table of size {ctx.modulus} exceeds the limit {limit}")
    return ValueTable.from_callable(
        ctx, lambda x: encrypt(key, PadicInt(ctx, x)).value
    )


def is_identity_key(key: CipherKey, limit: int = DEFAULT_TABLE_LIMIT) -> bool:
    """True iff the encryption map equals the identity mod p**K."""
    table = encryption_table(key, limit)
    return all(table.values[x] == x for x in key.ctx.residues())


# -- serialization ----------------------------------------------------------------------


def key_to_json(key: CipherKey) -> dict:
    base = {"family": key.family, "p": key.ctx.p, "precision": key.ctx.precision}
    if isinstance(key, AdditiveKey):
        return base | {"A": to_text(key.A)}
    if isinstance(key, MultiplicativeKey):
        return base | {"A": to_text(key.A), "s": key.s, "a": to_text(key.a)}
    if isinstance(key, XorKey):
        return base | {"rows": [list(r) for r in key.rows]}
    if isinstance(key, AndKey):
        return base | {"exponents": list(key.exponents)}
    if isinstance(key, FheKey):
        name = g_name(key.g)
        if name == "GSERIES":
            raise DomainError("series operations are not supported in key files")
        extra = {"A": to_text(key.A), "g": name}
        if isinstance(key.g, LinearG):
            extra["ga"] = to_text(key.g.a)
            extra["gb"] = to_text(key.g.b)
        return base | extra
    raise FamilyMismatchError(f"unknown key type {type(key).__name__}")


def key_from_json(data: dict) -> CipherKey:
    try:
        family = data["family"]
        ctx = PadicContext(int(data["p"]), int(data["precision"]))
    except (KeyError, TypeError, ValueError, DomainError) as exc:
        raise FormatError(f"malformed key object: {exc}") from exc
    try:
        if family == "additive":
            return AdditiveKey(from_text(data["A"], ctx))
        if family == "multiplicative":
            return MultiplicativeKey(
                A=from_text(data["A"], ctx),
                s=int(data["s"]),
                a=from_text(data["a"], ctx),
            )
        if family == "xor":
            return XorKey(ctx, tuple(tuple(int(c) for c in row) for row in data["rows"]))
        if family == "and":
            return AndKey(ctx, tuple(int(s) for s in data["exponents"]))
        if family == "fhe":
            g = operation_from_name(
                data["g"],
                ctx,
                a=from_text(data["ga"], ctx) if "ga" in data else None,
                b=from_text(data["gb"], ctx) if "gb" in data else None,
            )
            return FheKey(from_text(data["A"], ctx), g)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed key object: {exc}") from exc
    except (InvalidKeyError, DomainError, FormatError) as exc:
        raise FormatError(f"invalid key material: {exc}") from exc
    raise FormatError(f"unknown family {family!r}")


G_CHOICES = ("G1", "G2", "G3", "G4", "GLIN")


def operation_from_name(
    name: str,
    ctx: PadicContext,
    a: PadicInt | None = None,
    b: PadicInt | None = None,
) -> GOperation:
    if name == "G1":
        return G1()
    if name == "G2":
        return G2()
    if name == "G3":
        return G3()
    if name == "G4":
        return G4()
    if name == "GLIN":
        return LinearG(a if a is not None else ctx.one, b if b is not None else ctx.one)
    raise FormatError(f"unknown operation {name!r}; expected one of {G_CHOICES}")
