"""Mode bookkeeping and the truncated occupation-number basis.

A mode system is an ordered, finite list of field modes: bosonic modes
first, fermionic modes after them.  Bosonic occupations run from 0 up to a
per-mode ``cutoff``; fermionic occupations are 0 or 1.  Basis states are
labelled by occupation tuples, and their enumeration order is frozen so
that serialized operators and reports are reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterator

import numpy as np

BOSON = "boson"
FERMION = "fermion"

DEFAULT_CUTOFF = 6


@dataclass(frozen=True)
class ModeSystem:
    """Finite list of modes with a bosonic occupation cutoff.

    The truncated basis is the set of occupation tuples
    ``(n_0, ..., n_{M-1})`` with ``0 <= n_m <= cutoff`` for bosonic modes
    and ``n_m in {0, 1}`` for fermionic modes, so the basis size is
    ``(cutoff+1)**boson_modes * 2**fermion_modes``.

    Enumeration order (frozen): tuples are ordered lexicographically with
    mode 0 as the most significant digit.  Equivalently, the basis index is
    the mixed-radix number whose digits are the occupations, with radix
    ``cutoff+1`` for bosonic and 2 for fermionic positions.
    """

    boson_modes: int
    fermion_modes: int = 0
    cutoff: int = DEFAULT_CUTOFF

    def __post_init__(self):
        if self.boson_modes < 0 or self.fermion_modes < 0:
            raise ValueError("mode counts must be non-negative")
        if self.boson_modes + self.fermion_modes < 1:
            raise ValueError("a mode system needs at least one mode")
        if self.cutoff < 1:
            raise ValueError("cutoff must be at least 1")

    @property
    def total_modes(self) -> int:
        return self.boson_modes + self.fermion_modes

    @cached_property
    def basis_size(self) -> int:
        return (self.cutoff + 1) ** self.boson_modes * 2 ** self.fermion_modes

    def validate_mode(self, mode: int) -> None:
        if not 0 <= mode < self.total_modes:
            raise IndexError(
                f"mode {mode} out of range for a system of {self.total_modes} modes"
            )

    def species(self, mode: int) -> str:
        self.validate_mode(mode)
        return BOSON if mode < self.boson_modes else FERMION

    def is_boson(self, mode: int) -> bool:
        return self.species(mode) == BOSON

    def mode_dim(self, mode: int) -> int:
        """Number of allowed occupations of ``mode``."""
        return self.cutoff + 1 if self.is_boson(mode) else 2

    @cached_property
    def _dims(self) -> tuple[int, ...]:
        return tuple(
            self.cutoff + 1 if m < self.boson_modes else 2
            for m in range(self.total_modes)
        )

    @cached_property
    def strides(self) -> tuple[int, ...]:
        """Mixed-radix place values; mode 0 is the most significant digit."""
        strides = [1] * self.total_modes
        for m in range(self.total_modes - 2, -1, -1):
            strides[m] = strides[m + 1] * self._dims[m + 1]
        return tuple(strides)

    def validate_occupation(self, occupation) -> None:
        if len(occupation) != self.total_modes:
            raise ValueError(
                f"occupation tuple has length {len(occupation)}, "
                f"expected {self.total_modes}"
            )
        for m, n in enumerate(occupation):
            if not 0 <= n < self._dims[m]:
                raise ValueError(
                    f"occupation {n} invalid for mode {m} "
                    f"(allowed range 0..{self._dims[m] - 1})"
                )

    def index_of(self, occupation) -> int:
        """Basis index of an occupation tuple."""
        occupation = tuple(int(n) for n in occupation)
        self.validate_occupation(occupation)
        return sum(n * s for n, s in zip(occupation, self.strides))

    def occupation_of(self, index: int) -> tuple[int, ...]:
        """Occupation tuple of a basis index."""
        if not 0 <= index < self.basis_size:
            raise IndexError(f"basis index {index} out of range")
        return tuple(
            index // self.strides[m] % self._dims[m] for m in range(self.total_modes)
        )

    def occupations(self) -> Iterator[tuple[int, ...]]:
        """Iterate all occupation tuples in basis order."""
        return (self.occupation_of(i) for i in range(self.basis_size))

    def occupation_digits(self, indices: np.ndarray, mode: int) -> np.ndarray:
        """Vectorized occupation of ``mode`` for an array of basis indices."""
        self.validate_mode(mode)
        return indices // self.strides[mode] % self._dims[mode]

    def vacuum_occupation(self) -> tuple[int, ...]:
        return (0,) * self.total_modes
