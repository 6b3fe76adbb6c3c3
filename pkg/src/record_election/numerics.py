"""Tower-scale numerics: iterated exponentials/logarithms and helpers.

Core objects:

* ``TowerReal`` -- a real number ``x >= 1`` stored as ``(level, residue)``
  meaning ``E_level(residue)``, where ``E`` is the modified tetration
  ``E_n(r) = exp(E_{n-1}(r) - 1)``, ``E_0(r) = r``.  This represents values
  far beyond float range while keeping a total order.
* ``modified_tetration`` / ``modified_iterlog`` -- the inverse pair
  ``E_n`` and ``L_n(x) = 1 + log L_{n-1}(x)`` with the group property
  ``L_n(E_m(s)) = E_{m-n}(s)``.
* ``standard_tetration`` -- the plain n-fold exponential.
* ``conjugacy_f`` -- the increasing bijection with
  ``f(z) = 1 + log f(exp(z))`` that intertwines the two tetration dynamics.
* ``log_star`` -- the iterated-logarithm count, with an optional
  weight ``theta`` (cutoff ``exp(max(2*theta, 1)) + 1`` for ``theta != 1``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "TowerReal",
    "ThetaParams",
    "modified_tetration",
    "modified_iterlog",
    "standard_tetration",
    "conjugacy_f",
    "log_star",
    "tower_harmonic",
    "harmonic",
    "harmonic2",
    "EULER_GAMMA",
]

EULER_GAMMA = 0.5772156649015328606
_E = math.e

# Above this, "x - 1" and "x + c" are lost to double rounding anyway, so
# small additive terms on tower residues may be dropped.
_ADDITIVE_NEGLIGIBLE = 1e18

# Values below this stay plain floats when convenient.
_FLOAT_SAFE_EXP = 700.0


@dataclass(frozen=True)
class ThetaParams:
    """Weight parameter for the theta-variant record model.

    ``theta = 1`` recovers the classical record process.  The iterated-log
    cutoff ``x0`` for ``theta != 1`` is ``exp(max(2*theta, 1)) + 1``.
    """

    theta: float = 1.0

    def __post_init__(self) -> None:
        if not (self.theta > 0):
            raise ValueError(f"theta must be positive, got {self.theta}")

    @property
    def log_star_cutoff(self) -> float:
        return math.exp(max(2.0 * self.theta, 1.0)) + 1.0


@dataclass(frozen=True, order=False)
class TowerReal:
    """A value ``E_level(residue)`` with canonical residue in [1, e).

    The canonical form has the smallest level bringing the residue below
    ``e``; with that convention levels partition ``[1, inf)`` into
    consecutive intervals, so comparison is lexicographic in
    ``(level, residue)``.
    """

    level: int
    residue: float

    def __post_init__(self) -> None:
        if self.level < 0:
            raise ValueError("level must be >= 0")
        if not (1.0 <= self.residue < _E):
            raise ValueError(f"residue {self.residue} outside [1, e)")

    # -- construction -------------------------------------------------

    @staticmethod
    def from_value(x) -> "TowerReal":
        """Canonicalize a real (float or int) ``x >= 1``."""
        if isinstance(x, TowerReal):
            return x
        if isinstance(x, int):
            v = math.log(x) if x > 2**53 else float(x)
            if x > 2**53:
                # already took one log
                return TowerReal._from_partial(1.0 + v, 1)
        else:
            v = float(x)
        if math.isnan(v) or v < 1.0:
            raise ValueError(f"TowerReal requires a value >= 1, got {x}")
        if math.isinf(v):
            raise ValueError("cannot canonicalize an infinite value")
        return TowerReal._from_partial(v, 0)

    @staticmethod
    def _from_partial(v: float, level: int) -> "TowerReal":
        while v >= _E:
            v = 1.0 + math.log(v)
            level += 1
        return TowerReal(level, v)

    # -- conversion ---------------------------------------------------

    @property
    def value(self) -> float:
        """Float value; ``inf`` when the tower exceeds float range."""
        v = self.residue
        for _ in range(self.level):
            if v - 1.0 > _FLOAT_SAFE_EXP:
                return math.inf
            v = math.exp(v - 1.0)
        return v

    def floor_int(self) -> int:
        v = self.value
        if math.isinf(v):
            raise OverflowError("tower value does not fit an integer")
        # the (level, residue) form round-trips integers only to ~1e-13
        # relative accuracy; snap near-integers before flooring
        r = round(v)
        if abs(v - r) <= 1e-9 * max(v, 1.0):
            return int(r)
        return int(math.floor(v))

    def log_value(self):
        """``log`` of the represented value: float or TowerReal."""
        if self.level == 0:
            return math.log(self.residue)
        # log E_n(r) = E_{n-1}(r) - 1
        inner = TowerReal(self.level - 1, self.residue)
        v = inner.value
        if math.isinf(v):
            return inner  # the "-1" is below representable precision
        if v > _ADDITIVE_NEGLIGIBLE:
            return inner
        return v - 1.0

    # -- ordering -----------------------------------------------------

    def _key(self):
        return (self.level, self.residue)

    def __lt__(self, other):
        return self._key() < _as_key(other)

    def __le__(self, other):
        return self._key() <= _as_key(other)

    def __gt__(self, other):
        return self._key() > _as_key(other)

    def __ge__(self, other):
        return self._key() >= _as_key(other)

    def to_json(self) -> dict:
        return {"level": self.level, "residue": self.residue}

    @staticmethod
    def from_json(obj: dict) -> "TowerReal":
        return TowerReal(int(obj["level"]), float(obj["residue"]))

    def __repr__(self) -> str:
        return f"TowerReal(level={self.level}, residue={self.residue!r})"


def _as_key(x):
    if isinstance(x, TowerReal):
        return x._key()
    return TowerReal.from_value(x)._key()


# ---------------------------------------------------------------------
# modified tetration / iterated logarithm
# ---------------------------------------------------------------------


def modified_tetration(n: int, rho) -> TowerReal:
    """``E_n(rho)`` with ``E_n(r) = exp(E_{n-1}(r) - 1)``; ``n >= 0``."""
    if n < 0:
        raise ValueError("n must be >= 0; use modified_iterlog for descent")
    t = TowerReal.from_value(rho)
    level, r = t.level + n, t.residue
    # canonical form needs residue >= 2 at positive level (else the level
    # can be folded into the residue and lexicographic order breaks)
    while level > 0 and r < 2.0:
        r = math.exp(r - 1.0)
        level -= 1
    return TowerReal(level, r)


def modified_iterlog(n: int, x):
    """``L_n(x)`` with ``L_n(x) = 1 + log L_{n-1}(x)``.

    Negative ``n`` means ``E_{|n|}``.  Returns a float when the result fits
    comfortably, otherwise a ``TowerReal``.
    """
    t = TowerReal.from_value(x)
    level = t.level - n
    if level >= 0:
        r = t.residue
        while level > 0 and r < 2.0:   # keep the form canonical
            r = math.exp(r - 1.0)
            level -= 1
        out = TowerReal(level, r)
        v = out.value
        return out if math.isinf(v) else v
    # descended past level 0: keep applying 1 + log to the residue
    v = t.residue
    for _ in range(-level):
        if v < 1.0:
            raise ValueError("iterated log left the domain [1, inf)")
        v = 1.0 + math.log(v)
    return v


def standard_tetration(n: int, rho: float):
    """Plain n-fold exponential of ``rho`` (any real).

    Returns a float while representable, then a ``TowerReal``.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    v = float(rho)
    tower = None
    for _ in range(n):
        if tower is not None:
            # exp(E_m(r)) = E_{m+1}(r') with r' from value + 1; the +1 is
            # below double resolution once the value exceeds ~1e18.
            tower = TowerReal(tower.level + 1, tower.residue)
            continue
        if v > _FLOAT_SAFE_EXP:
            t = TowerReal.from_value(v + 1.0)
            tower = TowerReal(t.level + 1, t.residue)
            continue
        v = math.exp(v)
    if tower is not None:
        return tower
    return v


def e_tower(j: int):
    """Knuth arrow ``e ^^ j`` (j-fold tower of e), the log* breakpoints."""
    return standard_tetration(j, 1.0)


# ---------------------------------------------------------------------
# iterated-logarithm count
# ---------------------------------------------------------------------


def log_star(x, theta: float = 1.0) -> int:
    """Number of (theta-weighted) log applications to fall below the cutoff.

    ``theta = 1``: count of ``log`` applications until the value drops
    below 1 (so breakpoints sit at the e-towers).  ``theta != 1``: iterate
    ``x -> theta * log(x)`` with cutoff ``exp(max(2*theta, 1)) + 1``.
    """
    if theta <= 0:
        raise ValueError("theta must be positive")
    if isinstance(x, TowerReal):
        count = 0
        while isinstance(x, TowerReal):
            v = x.value
            if not math.isinf(v):
                x = v
                break
            x = _scaled_log(x, theta)
            count += 1
        return count + log_star(x, theta)
    x = float(x)
    if math.isnan(x):
        raise ValueError("log_star of NaN")
    if x < 0:
        raise ValueError("log_star requires a nonnegative argument")
    count = 0
    if theta == 1.0:
        while x >= 1.0:
            x = math.log(x)
            count += 1
        return count
    cutoff = math.exp(max(2.0 * theta, 1.0)) + 1.0
    while x >= cutoff:
        x = theta * math.log(x)
        count += 1
    return count


def _scaled_log(t: TowerReal, theta: float):
    """``theta * log(value)`` for a TowerReal, float or TowerReal result."""
    lv = t.log_value()
    if isinstance(lv, float):
        return theta * lv
    if theta == 1.0:
        return lv
    # theta * E_m(r): the multiplicative factor only shifts the value by
    # log(theta) after one more log, negligible at tower scale.
    v = lv.value
    if math.isinf(v) or v * theta > _ADDITIVE_NEGLIGIBLE:
        return lv
    return theta * v


# ---------------------------------------------------------------------
# conjugacy function
# ---------------------------------------------------------------------

_Z_CUT = 40.0  # asymptote f(z) ~ z + 1 holds within exp(-40) past this


def conjugacy_f(z: float) -> float:
    """The conjugacy ``f(z) = lim_n L_n(exp^n(z))``.

    Satisfies ``f(z) = 1 + log f(exp(z))``; computed by iterating ``exp``
    forward until the asymptote ``f(w) ~ w + 1`` applies, then unwinding.
    ``f(-inf) = 1 + log f(0)``.
    """
    if math.isnan(z):
        raise ValueError("conjugacy_f of NaN")
    if math.isinf(z):
        if z > 0:
            return math.inf
        return 1.0 + math.log(conjugacy_f(0.0))
    traj = [float(z)]
    while traj[-1] < _Z_CUT:
        traj.append(math.exp(traj[-1]))
    val = traj[-1] + 1.0
    for _ in range(len(traj) - 1):
        val = 1.0 + math.log(val)
    return val


F_AT_MINUS_INF = 1.6130198923451345686407  # f(-inf), for reference/tests


# ---------------------------------------------------------------------
# harmonic numbers at tower scale
# ---------------------------------------------------------------------

_EXACT_HARMONIC_LIMIT = 10**7
_PI2_6 = math.pi**2 / 6.0


@lru_cache(maxsize=256)
def harmonic(n: int) -> float:
    """H_n, exact partial sum up to 1e7, asymptotic expansion beyond."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n <= _EXACT_HARMONIC_LIMIT:
        return float(np.sum(1.0 / np.arange(1, n + 1, dtype=np.float64)))
    return math.log(n) + EULER_GAMMA + 0.5 / n - 1.0 / (12.0 * n * n)


@lru_cache(maxsize=256)
def harmonic2(n: int) -> float:
    """H_n^(2) = sum of 1/i^2, exact up to 1e7, asymptotic beyond."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n <= _EXACT_HARMONIC_LIMIT:
        i = np.arange(1, n + 1, dtype=np.float64)
        return float(np.sum(1.0 / (i * i)))
    return _PI2_6 - 1.0 / n + 1.0 / (2.0 * n * n)


def tower_harmonic(x):
    """Mean and variance of the one-round record count at population ``x``.

    Returns ``(H_m, H_m - H_m^(2))`` where ``m = floor(x)``.  Accepts floats
    and TowerReals; at tower scale the mean is returned as a TowerReal (the
    additive constants are below representable precision).
    """
    if isinstance(x, TowerReal) and math.isinf(x.value):
        lv = x.log_value()
        if isinstance(lv, TowerReal):
            return lv, lv  # variance ~ mean at this scale
        mean = lv + EULER_GAMMA
        return mean, mean - _PI2_6
    m = (x.floor_int() if isinstance(x, TowerReal)
         else int(math.floor(float(x))))
    if m < 1:
        raise ValueError("population must be >= 1")
    if m <= _EXACT_HARMONIC_LIMIT:
        h = harmonic(m)
        return h, h - harmonic2(m)
    h = math.log(m) + EULER_GAMMA + 0.5 / m
    return h, h - (_PI2_6 - 1.0 / m)
