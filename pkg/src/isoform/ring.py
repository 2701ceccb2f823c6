"""Exact arithmetic in F_p and Z/p^k for odd primes p.

Both coefficient structures share one descriptor class: a prime field is
the k = 1 case with its own kind tag, a local ring Z/p^k has maximal
ideal (p) and residue field F_p.  Elements are canonical residues in
[0, p^k), so a value is a unit exactly when p does not divide it and
invertibility is decided by a single residue test.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import NonUnitInverse, RingMismatch

# int64 matrix products at the ranks used here must never overflow
MAX_MODULUS = 1 << 24


def _is_odd_prime(p: int) -> bool:
    if p < 3 or p % 2 == 0:
        return False
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class Ring:
    """Descriptor for F_p (kind ``"fp"``) or Z/p^k (kind ``"zpk"``)."""

    kind: str
    p: int
    k: int = 1

    def __post_init__(self):
        if self.kind not in ("fp", "zpk"):
            raise ValueError(f"unknown ring kind {self.kind!r}")
        if not _is_odd_prime(self.p):
            raise ValueError(f"p must be an odd prime, got {self.p}")
        if self.k < 1:
            raise ValueError(f"exponent must be >= 1, got {self.k}")
        if self.kind == "fp" and self.k != 1:
            raise ValueError("a prime field forces k = 1")
        if self.p**self.k > MAX_MODULUS:
            raise ValueError(f"modulus {self.p}^{self.k} exceeds the supported range")

    @property
    def modulus(self) -> int:
        return self.p**self.k

    @property
    def is_field(self) -> bool:
        return self.k == 1

    # -- scalar arithmetic on canonical residues ---------------------------

    def normalize(self, x: int) -> int:
        return int(x) % self.modulus

    def add(self, x: int, y: int) -> int:
        return (int(x) + int(y)) % self.modulus

    def sub(self, x: int, y: int) -> int:
        return (int(x) - int(y)) % self.modulus

    def mul(self, x: int, y: int) -> int:
        return (int(x) * int(y)) % self.modulus

    def neg(self, x: int) -> int:
        return -int(x) % self.modulus

    def is_unit(self, x: int) -> bool:
        return int(x) % self.p != 0

    def inverse(self, x: int) -> int:
        if not self.is_unit(x):
            raise NonUnitInverse(f"{int(x) % self.modulus} is not a unit in {self}")
        return pow(int(x), -1, self.modulus)

    def units(self):
        """All units, in increasing canonical order."""
        return [x for x in range(self.modulus) if x % self.p != 0]

    # -- residue map and canonical lift -------------------------------------

    @property
    def residue_ring(self) -> "Ring":
        return self if self.kind == "fp" else Ring("fp", self.p)

    def residue_of(self, x: int) -> int:
        return int(x) % self.p

    def lift_to(self, x: int, target: "Ring") -> int:
        """Canonical lift of a residue: the same integer value."""
        if target.p != self.p:
            raise RingMismatch(f"cannot lift from {self} to {target}")
        return int(x) % self.p

    # -- array helpers -------------------------------------------------------

    def vector(self, data) -> np.ndarray:
        return np.asarray(data, dtype=np.int64) % self.modulus

    def matrix(self, data) -> np.ndarray:
        a = np.asarray(data, dtype=np.int64) % self.modulus
        if a.ndim != 2:
            raise ValueError("matrix data must be two-dimensional")
        return a

    def residue_matrix(self, a) -> np.ndarray:
        return np.asarray(a, dtype=np.int64) % self.p

    # -- element construction ------------------------------------------------

    def __call__(self, value: int) -> "RingElem":
        return RingElem(self.normalize(value), self)

    # -- serialization ---------------------------------------------------------

    def token(self) -> str:
        if self.kind == "fp":
            return f"fp:{self.p}"
        return f"zpk:{self.p},{self.k}"

    def to_json(self) -> dict:
        if self.kind == "fp":
            return {"kind": "fp", "p": self.p}
        return {"kind": "zpk", "p": self.p, "k": self.k}

    def __str__(self):
        return f"F_{self.p}" if self.kind == "fp" else f"Z/{self.modulus}"


def fp(p: int) -> Ring:
    return Ring("fp", p)


def zpk(p: int, k: int) -> Ring:
    return Ring("zpk", p, k)


def ring_from_json(data) -> Ring:
    if isinstance(data, str):
        data = json.loads(data)
    kind = data.get("kind")
    if kind == "fp":
        return fp(int(data["p"]))
    if kind == "zpk":
        return zpk(int(data["p"]), int(data["k"]))
    raise ValueError(f"unknown ring kind {kind!r}")


def parse_ring_token(token: str) -> Ring:
    """Parse the command-line syntax ``fp:p`` or ``zpk:p,k``."""
    try:
        kind, _, rest = token.partition(":")
        if kind == "fp":
            return fp(int(rest))
        if kind == "zpk":
            p_str, k_str = rest.split(",")
            return zpk(int(p_str), int(k_str))
    except (ValueError, TypeError) as exc:
        raise ValueError(f"malformed ring token {token!r}: {exc}") from exc
    raise ValueError(f"malformed ring token {token!r}")


class RingElem:
    """A canonical residue paired with its ring descriptor."""

    __slots__ = ("value", "ring")

    def __init__(self, value: int, ring: Ring):
        self.value = ring.normalize(value)
        self.ring = ring

    def _coerce(self, other) -> "RingElem":
        if isinstance(other, RingElem):
            if other.ring != self.ring:
                raise RingMismatch(f"{self.ring} vs {other.ring}")
            return other
        if isinstance(other, (int, np.integer)):
            return RingElem(int(other), self.ring)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return RingElem(self.ring.add(self.value, other.value), self.ring)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return RingElem(self.ring.sub(self.value, other.value), self.ring)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return RingElem(self.ring.sub(other.value, self.value), self.ring)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return RingElem(self.ring.mul(self.value, other.value), self.ring)

    __rmul__ = __mul__

    def __neg__(self):
        return RingElem(self.ring.neg(self.value), self.ring)

    def __pow__(self, exp):
        return RingElem(pow(self.value, int(exp), self.ring.modulus), self.ring)

    def inverse(self) -> "RingElem":
        return RingElem(self.ring.inverse(self.value), self.ring)

    def is_unit(self) -> bool:
        return self.ring.is_unit(self.value)

    def residue(self) -> "RingElem":
        return RingElem(self.ring.residue_of(self.value), self.ring.residue_ring)

    def lift(self, target: Ring) -> "RingElem":
        return RingElem(self.ring.lift_to(self.value, target), target)

    def __int__(self):
        return self.value

    def __eq__(self, other):
        if isinstance(other, RingElem):
            return self.ring == other.ring and self.value == other.value
        if isinstance(other, (int, np.integer)):
            return self.value == int(other) % self.ring.modulus
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.ring))

    def __repr__(self):
        return f"RingElem({self.value}, {self.ring})"


# -- square roots -------------------------------------------------------------


def sqrt_mod_p(a: int, p: int):
    """A square root of a modulo an odd prime p, or None for a non-residue.

    Tonelli-Shanks; the p % 4 == 3 shortcut covers half the primes.
    """
    a %= p
    if a == 0:
        return 0
    if pow(a, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    # write p-1 = q * 2^s with q odd
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) == 1:
        z += 1
    c = pow(z, q, p)
    r = pow(a, (q + 1) // 2, p)
    t = pow(a, q, p)
    m = s
    while t != 1:
        i, x = 1, (t * t) % p
        while x != 1:
            x = (x * x) % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        r = (r * b) % p
        c = (b * b) % p
        t = (t * c) % p
        m = i
    return r


def sqrt_unit(ring: Ring, a: int):
    """A unit square root of a unit a over the ring, or None.

    A unit of Z/p^k (p odd) is a square iff its residue is a square mod p;
    the mod-p root refines Newton-style until it is exact mod p^k.
    """
    a = ring.normalize(a)
    if not ring.is_unit(a):
        raise NonUnitInverse(f"{a} is not a unit in {ring}")
    x = sqrt_mod_p(a, ring.p)
    if x is None:
        return None
    m = ring.modulus
    while (x * x - a) % m:
        x = (x - (x * x - a) * pow(2 * x, -1, m)) % m
    return x
