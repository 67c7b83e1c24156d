"""
Hamiltonian term lists and the named model presets.

A term acts on one or two sites; a two-site operator is a (d*d) x (d*d)
matrix with its first listed site as the major index. Sites of 2-D
lattices are numbered row-major (site = row * cols + col).
"""

from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from exceptions import DimensionError, UnsupportedModelError, UnsupportedRangeError
from modules.mps import Boundary
from modules.tensor_core import as_tensor

from .operators import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    named_operator,
    spin_one_projector_two,
)


def swap_two_site(op: np.ndarray, d_first: int, d_second: int) -> np.ndarray:
    """Reorder a two-site operator so the second site becomes the major index."""
    return (
        op.reshape(d_first, d_second, d_first, d_second)
        .transpose(1, 0, 3, 2)
        .reshape(d_first * d_second, d_first * d_second)
    )


@dataclass(frozen=True)
class Term:
    """coupling * operator acting on `sites`."""

    sites: Tuple[int, ...]
    operator: np.ndarray = field(repr=False)
    coupling: complex = 1.0
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "sites", tuple(int(s) for s in self.sites))
        object.__setattr__(self, "operator", as_tensor(self.operator))

    @property
    def matrix(self) -> np.ndarray:
        return self.coupling * self.operator

    @property
    def channel_key(self) -> str:
        """Terms sharing a key are grouped into one channel by channel-split schemes."""
        if self.label:
            return self.label
        return np.round(self.operator, 12).tobytes().hex()


@dataclass(frozen=True)
class HamiltonianSpec:
    """Sum of one- and two-site terms on n sites of local dimension d."""

    n: int
    d: int
    terms: Tuple[Term, ...]
    boundary: Boundary = Boundary.OPEN
    lattice: Optional[Tuple[int, int]] = None
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        object.__setattr__(self, "boundary", Boundary(self.boundary))
        if self.n < 1 or self.d < 1:
            raise DimensionError(f"need n >= 1 and d >= 1, got n={self.n}, d={self.d}")
        if self.lattice is not None and self.lattice[0] * self.lattice[1] != self.n:
            raise DimensionError(f"lattice {self.lattice} does not hold {self.n} sites")
        for term in self.terms:
            k = len(term.sites)
            if k not in (1, 2):
                raise UnsupportedRangeError(f"terms must touch one or two sites, got {term.sites}")
            if any(not 0 <= s < self.n for s in term.sites):
                raise DimensionError(f"term sites {term.sites} out of range for n={self.n}")
            if k == 2 and term.sites[0] == term.sites[1]:
                raise DimensionError(f"two-site term on a repeated site {term.sites}")
            if term.operator.shape != (self.d ** k, self.d ** k):
                raise DimensionError(
                    f"operator on {term.sites} must be {self.d ** k}x{self.d ** k}, got {term.operator.shape}"
                )

    # ------------------------------------------------------------------
    # Geometry
    # ------------------------------------------------------------------

    def are_neighbours(self, i: int, j: int) -> bool:
        if self.lattice is None:
            if abs(i - j) == 1:
                return True
            return self.boundary == Boundary.PERIODIC and {i, j} == {0, self.n - 1} and self.n > 2
        cols = self.lattice[1]
        (ri, ci), (rj, cj) = divmod(i, cols), divmod(j, cols)
        return abs(ri - rj) + abs(ci - cj) == 1

    def is_nearest_neighbour(self) -> bool:
        return all(len(t.sites) == 1 or self.are_neighbours(*t.sites) for t in self.terms)

    def require_nearest_neighbour(self) -> None:
        for term in self.terms:
            if len(term.sites) == 2 and not self.are_neighbours(*term.sites):
                raise UnsupportedRangeError(f"term on sites {term.sites} is not nearest-neighbour")

    def bonds(self) -> List[Tuple[int, int]]:
        """Ordered site pairs carrying two-site terms."""
        found = {self._bond_key(*t.sites) for t in self.terms if len(t.sites) == 2}
        return sorted(found)

    def _bond_key(self, i: int, j: int) -> Tuple[int, int]:
        if self.lattice is None and self.boundary == Boundary.PERIODIC and {i, j} == {0, self.n - 1}:
            return (self.n - 1, 0)
        return (min(i, j), max(i, j))

    # ------------------------------------------------------------------
    # Local operators
    # ------------------------------------------------------------------

    def site_operator(self, i: int) -> np.ndarray:
        """Sum of all single-site terms on site i (d x d)."""
        op = np.zeros((self.d, self.d), dtype=np.complex128)
        for term in self.terms:
            if term.sites == (i,):
                op += term.matrix
        return op

    def bond_operator(self, i: int, j: int) -> np.ndarray:
        """Sum of all two-site terms on the pair, with i as the major index."""
        op = np.zeros((self.d ** 2, self.d ** 2), dtype=np.complex128)
        for term in self.terms:
            if len(term.sites) != 2 or set(term.sites) != {i, j}:
                continue
            if term.sites == (i, j):
                op += term.matrix
            else:
                op += swap_two_site(term.matrix, self.d, self.d)
        return op

    def uniform_bond_operator(self) -> np.ndarray:
        """
        Bond Hamiltonian of the translation-invariant chain this spec describes.

        Single-site terms are split evenly between the two bonds of a site.

        Raises:
            UnsupportedModelError: If bonds or sites are not all equal
        """
        if self.lattice is not None:
            raise UnsupportedModelError("uniform bond operators are defined for chains only")
        self.require_nearest_neighbour()
        bond_range = self.n if self.boundary == Boundary.PERIODIC else self.n - 1
        reference_bond = self.bond_operator(0, 1)
        reference_site = self.site_operator(0)
        for k in range(1, bond_range):
            if not np.allclose(self.bond_operator(k, (k + 1) % self.n), reference_bond, atol=1e-12):
                raise UnsupportedModelError(f"bond ({k}, {k + 1}) differs from bond (0, 1)")
        for k in range(1, self.n):
            if not np.allclose(self.site_operator(k), reference_site, atol=1e-12):
                raise UnsupportedModelError(f"site {k} carries a different field than site 0")
        identity = np.eye(self.d)
        half = 0.5 * (np.kron(reference_site, identity) + np.kron(identity, reference_site))
        return reference_bond + half

    # ------------------------------------------------------------------
    # Derived specs
    # ------------------------------------------------------------------

    def is_real(self) -> bool:
        return all(np.allclose(t.matrix.imag, 0.0) for t in self.terms)

    def is_hermitian(self) -> bool:
        return all(np.allclose(t.matrix, t.matrix.conj().T) for t in self.terms)

    def with_ancilla(self, ancilla_dim: int) -> "HamiltonianSpec":
        """Same model acting on the system factor of system x ancilla sites."""
        eye = np.eye(ancilla_dim)
        terms = []
        for term in self.terms:
            if len(term.sites) == 1:
                op = np.kron(term.operator, eye)
            else:
                d = self.d
                op4 = term.operator.reshape(d, d, d, d)
                full = np.einsum("abAB,xX,yY->axbyAXBY", op4, eye, eye)
                size = (d * ancilla_dim) ** 2
                op = full.reshape(size, size)
            terms.append(replace(term, operator=op))
        return replace(self, d=self.d * ancilla_dim, terms=tuple(terms))

    def with_terms(self, extra: Iterable[Term]) -> "HamiltonianSpec":
        return replace(self, terms=self.terms + tuple(extra))

    def scaled(self, factor: float) -> "HamiltonianSpec":
        return replace(self, terms=tuple(replace(t, coupling=t.coupling * factor) for t in self.terms))


# ----------------------------------------------------------------------
# Presets
# ----------------------------------------------------------------------

def _chain_bonds(n: int, boundary: Boundary) -> List[Tuple[int, int]]:
    bonds = [(k, k + 1) for k in range(n - 1)]
    if Boundary(boundary) == Boundary.PERIODIC and n > 2:
        bonds.append((n - 1, 0))
    return bonds


def _coupled_terms(bonds, couplings: Dict[str, Tuple[np.ndarray, float]]) -> List[Term]:
    terms = []
    for bond in bonds:
        for label, (op, coupling) in couplings.items():
            if coupling != 0.0:
                terms.append(Term(bond, np.kron(op, op), coupling, label))
    return terms


def _field_terms(n: int, op: np.ndarray, fields, label: str) -> List[Term]:
    values = np.broadcast_to(np.asarray(fields, dtype=float), (n,))
    return [Term((k,), op, float(values[k]), label) for k in range(n) if values[k] != 0.0]


def heisenberg(n: int, j: float = 1.0, field: float = 0.0, boundary: Boundary = Boundary.OPEN) -> HamiltonianSpec:
    """H = j * sum (sx sx + sy sy + sz sz) + field * sum sz, Pauli matrices."""
    couplings = {"xx": (SIGMA_X, j), "yy": (SIGMA_Y, j), "zz": (SIGMA_Z, j)}
    terms = _coupled_terms(_chain_bonds(n, boundary), couplings) + _field_terms(n, SIGMA_Z, field, "z")
    return HamiltonianSpec(n, 2, tuple(terms), boundary, name="heisenberg")


def xxz(n: int, delta: float, j: float = 1.0, boundary: Boundary = Boundary.OPEN) -> HamiltonianSpec:
    """H = j * sum (sx sx + sy sy + delta sz sz)."""
    couplings = {"xx": (SIGMA_X, j), "yy": (SIGMA_Y, j), "zz": (SIGMA_Z, j * delta)}
    return HamiltonianSpec(n, 2, tuple(_coupled_terms(_chain_bonds(n, boundary), couplings)),
                           boundary, name="xxz")


def ising_transverse(n: int, h: float, j: float = 1.0, boundary: Boundary = Boundary.OPEN) -> HamiltonianSpec:
    """H = j * sum sz sz + h * sum sx (no overall minus sign)."""
    terms = _coupled_terms(_chain_bonds(n, boundary), {"zz": (SIGMA_Z, j)})
    terms += _field_terms(n, SIGMA_X, h, "x")
    return HamiltonianSpec(n, 2, tuple(terms), boundary, name="ising_transverse")


def xx_field(n: int, fields: Sequence[float] = 0.0, j: float = 1.0,
             boundary: Boundary = Boundary.OPEN) -> HamiltonianSpec:
    """H = j * sum (sx sx + sy sy) + sum_l b_l sz_l."""
    couplings = {"xx": (SIGMA_X, j), "yy": (SIGMA_Y, j)}
    terms = _coupled_terms(_chain_bonds(n, boundary), couplings) + _field_terms(n, SIGMA_Z, fields, "z")
    return HamiltonianSpec(n, 2, tuple(terms), boundary, name="xx_field")


def aklt(n: int, boundary: Boundary = Boundary.OPEN) -> HamiltonianSpec:
    """Spin-1 chain H = sum of projectors onto total spin 2 of each bond."""
    projector = spin_one_projector_two()
    terms = [Term(bond, projector, 1.0, "aklt") for bond in _chain_bonds(n, boundary)]
    return HamiltonianSpec(n, 3, tuple(terms), boundary, name="aklt")


def field_only(n: int, h: float, op: str = "sx") -> HamiltonianSpec:
    """H = h * sum O_k for a named Pauli operator."""
    return HamiltonianSpec(n, 2, tuple(_field_terms(n, named_operator(op), h, op)), name="field_only")


def trap_potential(rows: int, cols: int, v0: float) -> np.ndarray:
    """Harmonic trap V_i = v0 |r_i - r_0|^2 / L^2 centered on the lattice (row-major)."""
    r0, c0 = 0.5 * (rows - 1), 0.5 * (cols - 1)
    scale = float(max(rows, cols)) ** 2
    r, c = np.meshgrid(np.arange(rows), np.arange(cols), indexing="ij")
    return (v0 * ((r - r0) ** 2 + (c - c0) ** 2) / scale).ravel()


def hardcore_bosons_2d(rows: int, cols: int, v0: float, mu: float, j: float = 1.0) -> HamiltonianSpec:
    """
    Hard-core bosons in a trap as an XX model on an open square lattice.

    H = -(j/2) sum_<kl> (sx sx + sy sy) + (1/2) sum_k (V_k - mu) sz_k,
    with a particle on site k represented by sz = +1.
    """
    bonds = []
    for r in range(rows):
        for c in range(cols):
            site = r * cols + c
            if c + 1 < cols:
                bonds.append((site, site + 1))
            if r + 1 < rows:
                bonds.append((site, site + cols))
    couplings = {"xx": (SIGMA_X, -0.5 * j), "yy": (SIGMA_Y, -0.5 * j)}
    fields = 0.5 * (trap_potential(rows, cols, v0) - mu)
    terms = _coupled_terms(bonds, couplings) + _field_terms(rows * cols, SIGMA_Z, fields, "z")
    return HamiltonianSpec(rows * cols, 2, tuple(terms), lattice=(rows, cols), name="hardcore_bosons")


def heisenberg_2d(rows: int, cols: int, j: float = 1.0) -> HamiltonianSpec:
    """Heisenberg model (Pauli matrices) on an open square lattice."""
    bonds = []
    for r in range(rows):
        for c in range(cols):
            site = r * cols + c
            if c + 1 < cols:
                bonds.append((site, site + 1))
            if r + 1 < rows:
                bonds.append((site, site + cols))
    couplings = {"xx": (SIGMA_X, j), "yy": (SIGMA_Y, j), "zz": (SIGMA_Z, j)}
    return HamiltonianSpec(rows * cols, 2, tuple(_coupled_terms(bonds, couplings)),
                           lattice=(rows, cols), name="heisenberg_2d")


def field_only_2d(rows: int, cols: int, h: float, op: str = "sx") -> HamiltonianSpec:
    """Decoupled field on an open square lattice."""
    n = rows * cols
    return HamiltonianSpec(n, 2, tuple(_field_terms(n, named_operator(op), h, op)),
                           lattice=(rows, cols), name="field_only_2d")


PRESETS = {
    "heisenberg": heisenberg,
    "xxz": xxz,
    "ising_transverse": ising_transverse,
    "xx_field": xx_field,
    "aklt": aklt,
    "field_only": field_only,
    "hardcore_bosons_2d": hardcore_bosons_2d,
    "heisenberg_2d": heisenberg_2d,
    "field_only_2d": field_only_2d,
}


def build_preset(name: str, **params) -> HamiltonianSpec:
    """Instantiate a named preset."""
    if name not in PRESETS:
        raise KeyError(f"unknown preset '{name}'; known: {', '.join(sorted(PRESETS))}")
    return PRESETS[name](**params)


def spec_from_terms(
    n: int,
    d: int,
    table: Sequence[Dict],
    boundary: Boundary = Boundary.OPEN,
    lattice: Optional[Tuple[int, int]] = None,
) -> HamiltonianSpec:
    """
    Build a spec from a configuration term table.

    Each row has `sites` (one or two ints), `ops` (one operator name per
    site, multiplied as a tensor product) and an optional `coupling`.
    """
    terms = []
    for row in table:
        sites = tuple(row["sites"])
        ops = [named_operator(name) for name in row["ops"]]
        if len(ops) != len(sites):
            raise DimensionError(f"term on {sites} lists {len(ops)} operators")
        op = ops[0] if len(ops) == 1 else np.kron(ops[0], ops[1])
        terms.append(Term(sites, op, complex(row.get("coupling", 1.0)), "".join(row["ops"])))
    return HamiltonianSpec(n, d, tuple(terms), boundary, lattice)
