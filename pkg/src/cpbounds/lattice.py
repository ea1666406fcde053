"""Finite periodic lattice (torus) arithmetic and displacement boxes.

The torus is the finite-volume stand-in for Z^d used by both simulators:
sites are flat row-major indices into an L^d grid with periodic wrap, and
every site has exactly 2d neighbors.  Displacement boxes are separate
objects living on Z^d itself (no wrap); they carry the truncated domains
on which pair-correlation fields and hitting functions are tabulated.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class TorusLattice:
    """Periodic hypercubic lattice with ``side`` sites per axis.

    ``side`` must be even and at least 4 so that no site is its own
    neighbor and bipartite parity arguments remain available.
    """

    d: int
    side: int
    neighbor_table: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        if self.side < 4 or self.side % 2 != 0:
            raise ValueError(f"side must be an even integer >= 4, got {self.side}")
        object.__setattr__(self, "neighbor_table", self._build_neighbor_table())

    @property
    def n_sites(self) -> int:
        return self.side**self.d

    def _build_neighbor_table(self) -> np.ndarray:
        d, L = self.d, self.side
        coords = np.indices((L,) * d).reshape(d, -1)  # (d, N)
        table = np.empty((L**d, 2 * d), dtype=np.int32)
        for axis in range(d):
            for k, step in enumerate((1, -1)):
                shifted = coords.copy()
                shifted[axis] = (shifted[axis] + step) % L
                table[:, 2 * axis + k] = np.ravel_multi_index(shifted, (L,) * d)
        table.setflags(write=False)
        return table

    def coords_to_index(self, coords) -> int:
        c = tuple(int(x) % self.side for x in coords)
        if len(c) != self.d:
            raise ValueError(f"expected {self.d} coordinates, got {len(c)}")
        return int(np.ravel_multi_index(c, (self.side,) * self.d))

    def index_to_coords(self, site: int) -> tuple[int, ...]:
        self._check_site(site)
        return tuple(int(x) for x in np.unravel_index(site, (self.side,) * self.d))

    def neighbors(self, site: int) -> np.ndarray:
        """The 2d sites at l1-distance 1 from ``site`` (periodic wrap).

        Column order: +e_1, -e_1, +e_2, -e_2, ...
        """
        self._check_site(site)
        return self.neighbor_table[site]

    def shift_index(self, site: int, displacement) -> int:
        """Index of site + displacement with periodic wrap."""
        c = self.index_to_coords(site)
        return self.coords_to_index(tuple(a + b for a, b in zip(c, displacement)))

    def _check_site(self, site: int):
        if not 0 <= site < self.n_sites:
            raise ValueError(f"site id {site} out of range [0, {self.n_sites})")


@dataclass(frozen=True)
class DisplacementBox:
    """All displacements x in Z^d with max-coordinate at most ``radius``.

    Closed under negation and coordinate permutation by construction.
    Enumeration is row-major over coordinates running -R..R.
    """

    d: int
    radius: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        if self.radius < 1:
            raise ValueError(f"radius must be >= 1, got {self.radius}")

    @property
    def size(self) -> int:
        return (2 * self.radius + 1) ** self.d

    @property
    def shape(self) -> tuple[int, ...]:
        return (2 * self.radius + 1,) * self.d

    def displacements(self):
        """Yield every displacement once, as a coordinate tuple."""
        rng = range(-self.radius, self.radius + 1)
        yield from itertools.product(rng, repeat=self.d)

    def contains(self, x) -> bool:
        return len(x) == self.d and max(abs(int(c)) for c in x) <= self.radius

    def index(self, x) -> int:
        """Flat row-major index of displacement ``x``."""
        if not self.contains(x):
            raise ValueError(f"displacement {tuple(x)} outside radius-{self.radius} box")
        return int(np.ravel_multi_index(tuple(int(c) + self.radius for c in x), self.shape))

    @property
    def origin_index(self) -> int:
        return self.index((0,) * self.d)

    def unit_vector(self, axis: int, sign: int = 1) -> tuple[int, ...]:
        e = [0] * self.d
        e[axis] = 1 if sign >= 0 else -1
        return tuple(e)

    def is_boundary(self, x) -> bool:
        return max(abs(int(c)) for c in x) == self.radius


def box_sites(box: DisplacementBox):
    """Enumerate (displacement, is_boundary) pairs, each displacement once."""
    for x in box.displacements():
        yield x, box.is_boundary(x)


def displacement_offset_table(lattice: TorusLattice, displacements) -> np.ndarray:
    """For each displacement delta, the map ``site u -> index of u + delta``.

    Returns an int32 array of shape (len(displacements), n_sites).  Used by
    the Monte Carlo pair-correlation accumulator, which averages products
    xi(u) * xi(u + delta) over all torus translations u.
    """
    d, L = lattice.d, lattice.side
    coords = np.indices((L,) * d).reshape(d, -1)
    disp = list(displacements)
    table = np.empty((len(disp), lattice.n_sites), dtype=np.int32)
    for j, delta in enumerate(disp):
        shifted = (coords + np.asarray(delta, dtype=np.int64).reshape(d, 1)) % L
        table[j] = np.ravel_multi_index(tuple(shifted), (L,) * d)
    return table
