"""Truncated matrix representations of the SU(1,1) generators.

Basis states are labelled by the sector-internal index ``m`` (0, 1, 2, ...).
For the single-boson realization the even sector holds Fock states ``n = 2m``
and the odd sector ``n = 2m + 1``; both are discrete-series representations
with Bargmann index ``k = 1/4`` and ``k = 3/4`` respectively, so the generic
formulas

    Sz |k, m> = (k + m) |k, m>
    Sp |k, m> = sqrt((m + 1)(m + 2k)) |k, m + 1>

cover every sector.  Matrices are the exact infinite matrices restricted to the
first ``dim`` states; nothing is corrected at the boundary.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InvalidDimensionError, ShapeError


class SectorKind(enum.Enum):
    BOSON_EVEN = "boson-even"
    BOSON_ODD = "boson-odd"
    BARGMANN = "bargmann"


@dataclass(frozen=True)
class Sector:
    """Which representation a truncated basis belongs to."""

    kind: SectorKind
    k: float

    def __post_init__(self):
        if not np.isfinite(self.k) or self.k <= 0:
            raise DomainError(f"Bargmann index must be positive, got {self.k!r}")

    @classmethod
    def boson_even(cls) -> "Sector":
        return cls(SectorKind.BOSON_EVEN, 0.25)

    @classmethod
    def boson_odd(cls) -> "Sector":
        return cls(SectorKind.BOSON_ODD, 0.75)

    @classmethod
    def bargmann(cls, k: float) -> "Sector":
        return cls(SectorKind.BARGMANN, float(k))

    @classmethod
    def parse(cls, text: str) -> "Sector":
        """``even``, ``odd`` or ``bargmann:<k>``."""
        t = text.strip().lower()
        if t in ("even", "boson-even"):
            return cls.boson_even()
        if t in ("odd", "boson-odd"):
            return cls.boson_odd()
        if t.startswith("bargmann:"):
            return cls.bargmann(float(t.split(":", 1)[1]))
        raise ValueError(f"unknown sector {text!r}")

    @property
    def is_boson(self) -> bool:
        return self.kind is not SectorKind.BARGMANN

    @property
    def fock_offset(self) -> int:
        """Fock number of sector state ``m = 0`` (boson sectors only)."""
        if not self.is_boson:
            raise DomainError("Fock numbers are only defined for boson sectors")
        return 0 if self.kind is SectorKind.BOSON_EVEN else 1

    def label(self) -> str:
        if self.kind is SectorKind.BARGMANN:
            return f"bargmann:{self.k!r}"
        return "even" if self.kind is SectorKind.BOSON_EVEN else "odd"


@dataclass(frozen=True, eq=False)
class TruncatedRep:
    """Generators restricted to the first ``dim`` states of a sector."""

    sector: Sector
    dim: int
    Sz: np.ndarray
    Sp: np.ndarray
    Sm: np.ndarray
    interior_dim: int
    amp: np.ndarray = field(repr=False)

    @property
    def k(self) -> float:
        return self.sector.k

    @property
    def sz_diag(self) -> np.ndarray:
        return self.Sz.diagonal().real.copy()

    def eigenvalue(self, m: int) -> float:
        """Sz eigenvalue ``k + m`` of sector state ``m``."""
        return self.k + m

    def fock_index(self, m: int) -> float:
        """Oscillator label ``n`` with ``(n + 1/2)/2 = k + m``.

        For boson sectors this is the Fock number ``2m`` or ``2m + 1``; for a
        general Bargmann index it is the formal real value.
        """
        return 2.0 * (self.k + m) - 0.5

    def sector_index(self, n: float) -> int:
        """Inverse of :meth:`fock_index`; raises if ``n`` is not a level of this sector."""
        m = 0.5 * (n + 0.5) - self.k
        mi = int(round(m))
        if mi < 0 or abs(m - mi) > 1e-12:
            raise DomainError(f"level n={n} is not in the {self.sector.label()} sector")
        if mi >= self.dim:
            raise DomainError(f"level n={n} (state {mi}) lies outside dim={self.dim}")
        return mi


def _make_rep(sector: Sector, dim: int) -> TruncatedRep:
    if int(dim) != dim or dim < 2:
        raise InvalidDimensionError(f"dim must be an integer >= 2, got {dim!r}")
    dim = int(dim)
    k = sector.k
    m = np.arange(dim, dtype=float)
    amp = np.sqrt((m[:-1] + 1.0) * (m[:-1] + 2.0 * k))
    Sz = np.diag(k + m).astype(np.complex128)
    Sp = np.zeros((dim, dim), dtype=np.complex128)
    Sp[np.arange(1, dim), np.arange(dim - 1)] = amp
    Sm = Sp.conj().T.copy()
    for a in (Sz, Sp, Sm):
        a.setflags(write=False)
    amp.setflags(write=False)
    return TruncatedRep(sector=sector, dim=dim, Sz=Sz, Sp=Sp, Sm=Sm,
                        interior_dim=dim - 1, amp=amp)


def build_boson_rep(sector: Sector, dim: int) -> TruncatedRep:
    """Even or odd sector of ``Sz = (a'a + 1/2)/2``, ``Sp = a'^2/2``, ``Sm = a^2/2``.

    Matrix elements are taken from the boson ladder rules directly so that the
    Bargmann formulas can be checked against them independently.
    """
    if not sector.is_boson:
        raise DomainError("build_boson_rep needs a boson sector; use build_bargmann_rep")
    if int(dim) != dim or dim < 2:
        raise InvalidDimensionError(f"dim must be an integer >= 2, got {dim!r}")
    dim = int(dim)
    n = 2 * np.arange(dim) + sector.fock_offset
    sz = 0.5 * (n + 0.5)
    # <n+2| a'^2 |n> / 2 = sqrt((n+1)(n+2)) / 2
    amp = 0.5 * np.sqrt((n[:-1] + 1.0) * (n[:-1] + 2.0))
    Sz = np.diag(sz).astype(np.complex128)
    Sp = np.zeros((dim, dim), dtype=np.complex128)
    Sp[np.arange(1, dim), np.arange(dim - 1)] = amp
    Sm = Sp.conj().T.copy()
    for a in (Sz, Sp, Sm):
        a.setflags(write=False)
    amp.setflags(write=False)
    return TruncatedRep(sector=sector, dim=dim, Sz=Sz, Sp=Sp, Sm=Sm,
                        interior_dim=dim - 1, amp=amp)


def build_bargmann_rep(k: float, dim: int) -> TruncatedRep:
    """Discrete-series representation with Bargmann index ``k > 0``."""
    if not np.isfinite(k) or k <= 0:
        raise DomainError(f"Bargmann index must be positive, got {k!r}")
    return _make_rep(Sector.bargmann(k), dim)


def build_rep(sector: Sector, dim: int) -> TruncatedRep:
    if sector.is_boson:
        return build_boson_rep(sector, dim)
    return build_bargmann_rep(sector.k, dim)


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def commutator_residual(rep: TruncatedRep, block: int | None = None) -> tuple[float, float, float]:
    """Max-norm of ``[Sp,Sm]+2Sz``, ``[Sz,Sp]-Sp``, ``[Sz,Sm]+Sm`` on a leading block.

    ``block`` defaults to ``rep.interior_dim``; pass ``rep.dim`` to see the
    truncation damage in the last row and column.
    """
    n = rep.interior_dim if block is None else int(block)
    Sz, Sp, Sm = rep.Sz, rep.Sp, rep.Sm
    r1 = commutator(Sp, Sm) + 2.0 * Sz
    r2 = commutator(Sz, Sp) - Sp
    r3 = commutator(Sz, Sm) + Sm
    return tuple(float(np.abs(r[:n, :n]).max()) for r in (r1, r2, r3))


def parity_matrix(sector: Sector, dim: int) -> np.ndarray:
    """Space-time reflection restricted to one sector.

    The reflection multiplies Fock state ``n`` by ``(-1)**n``, which is a
    constant inside a sector; the sign drops out of ``P M P^-1``.
    """
    return np.eye(dim, dtype=np.complex128)


def pt_apply(M: np.ndarray, within_sector: Sector) -> np.ndarray:
    """Antilinear PT action ``P conj(M) P^-1`` on an operator in sector basis."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ShapeError(f"pt_apply needs a square matrix, got shape {M.shape}")
    P = parity_matrix(within_sector, M.shape[0])
    return P @ np.conj(M) @ P.conj().T


def fock_ladder(nmax: int) -> np.ndarray:
    """Annihilation operator on Fock states ``0..nmax-1``."""
    a = np.zeros((nmax, nmax), dtype=np.complex128)
    idx = np.arange(1, nmax)
    a[idx - 1, idx] = np.sqrt(idx)
    return a
