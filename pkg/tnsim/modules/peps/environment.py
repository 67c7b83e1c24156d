"""
Double-layer networks and boundary environments of a PEPS.

A sandwich <bra| O |ket> is a grid of double-layer tensors
E[(l l'), (r r'), (u u'), (d d')] with the bra index major. Rows above a
given row are absorbed into a top boundary MPS and rows below into a
bottom boundary MPS, both compressed to Dtilde with the shared boundary
compressor. Together with the partial contractions of the row itself they
give the environment of any single site.
"""

from dataclasses import dataclass, field
from typing import Dict, Hashable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from exceptions import DimensionError
from modules.apps import sweep_rows
from modules.mpo import MatrixProductOperator
from modules.mps import MatrixProductState

from .state import Peps

Position = Tuple[int, int]
OperatorMap = Mapping[Position, np.ndarray]


def double_layer(bra: np.ndarray, ket: np.ndarray, op: Optional[np.ndarray] = None) -> np.ndarray:
    """E[l, r, u, d] of conj(bra) O ket, combined index = bra * D_ket + ket."""
    if op is None:
        e = np.einsum("sLRUD,slrud->LlRrUuDd", bra.conj(), ket)
    else:
        e = np.einsum("sLRUD,st,tlrud->LlRrUuDd", bra.conj(), op, ket)
    shape = tuple(b * k for b, k in zip(bra.shape[1:], ket.shape[1:]))
    return e.reshape(shape)


def layer_grid(bra: Peps, ket: Peps, ops: Optional[OperatorMap] = None) -> List[List[np.ndarray]]:
    """Double-layer tensors of <bra| prod O |ket> row by row."""
    if (bra.rows, bra.cols) != (ket.rows, ket.cols) or bra.phys_dims != ket.phys_dims:
        raise DimensionError("bra and ket PEPS differ in shape")
    ops = ops or {}
    return [
        [double_layer(bra.site(i, j), ket.site(i, j), ops.get((i, j))) for j in range(bra.cols)]
        for i in range(bra.rows)
    ]


def trivial_boundary(cols: int) -> MatrixProductState:
    return MatrixProductState(tuple(np.ones((1, 1, 1), dtype=np.complex128) for _ in range(cols)))


def downward_mpo(row: Sequence[np.ndarray]) -> MatrixProductOperator:
    """Row acting on a top boundary: input = up bonds, output = down bonds."""
    return MatrixProductOperator(tuple(e.transpose(0, 1, 3, 2) for e in row))


def upward_mpo(row: Sequence[np.ndarray]) -> MatrixProductOperator:
    """Row acting on a bottom boundary: input = down bonds, output = up bonds."""
    return MatrixProductOperator(tuple(row))


@dataclass
class Edge:
    """Normalized boundary MPS with its accumulated log scale."""

    state: MatrixProductState
    log_scale: float = 0.0


def push(edge: Edge, mpo: MatrixProductOperator, dtilde: int, stage: str) -> Tuple[Edge, float]:
    """Absorb one row into a boundary; returns the new edge and its delta_K."""
    result = sweep_rows(edge.state, [mpo], dtilde, stage=stage)
    return Edge(result.state, edge.log_scale + result.log_scale), result.delta_ks[0]


def _left_step(le: np.ndarray, top: np.ndarray, e: np.ndarray, bottom: np.ndarray) -> np.ndarray:
    return np.einsum("tmb,tTu,mMud,bBd->TMB", le, top, e, bottom)


def _right_step(re: np.ndarray, top: np.ndarray, e: np.ndarray, bottom: np.ndarray) -> np.ndarray:
    return np.einsum("TMB,tTu,mMud,bBd->tmb", re, top, e, bottom)


@dataclass
class BoundaryEnv:
    """Top and bottom boundary of one row, for strip contractions."""

    top: Edge
    bottom: Edge

    @property
    def log_scale(self) -> float:
        return self.top.log_scale + self.bottom.log_scale

    def value(self, row: Sequence[np.ndarray]) -> complex:
        """Strip contraction; the sandwich value is exp(log_scale) times this."""
        le = np.ones((1, 1, 1), dtype=np.complex128)
        for t, e, b in zip(self.top.state.sites, row, self.bottom.state.sites):
            le = _left_step(le, t, e, b)
        return complex(le[0, 0, 0])

    def hole(self, row: Sequence[np.ndarray], j: int) -> np.ndarray:
        """Environment of column j, shaped like its double-layer tensor (l, r, u, d)."""
        tops, bottoms = self.top.state.sites, self.bottom.state.sites
        le = np.ones((1, 1, 1), dtype=np.complex128)
        for k in range(j):
            le = _left_step(le, tops[k], row[k], bottoms[k])
        re = np.ones((1, 1, 1), dtype=np.complex128)
        for k in range(len(row) - 1, j, -1):
            re = _right_step(re, tops[k], row[k], bottoms[k])
        return np.einsum("tmb,tTu,bBd,TMB->mMud", le, tops[j], bottoms[j], re)


@dataclass(frozen=True)
class Sandwich:
    """
    One network <state| prod O |ket> whose environments a sweep needs.

    ket = None means the state being optimized itself.
    """

    ops: OperatorMap = field(default_factory=dict)
    ket: Optional[Peps] = None

    def ops_in_rows(self, rows: range) -> Tuple[Tuple[Position, int], ...]:
        return tuple(sorted((pos, id(op)) for pos, op in self.ops.items() if pos[0] in rows))

    def row(self, state: Peps, i: int) -> List[np.ndarray]:
        ket = state if self.ket is None else self.ket
        return [double_layer(state.site(i, j), ket.site(i, j), self.ops.get((i, j))) for j in range(state.cols)]


class SweepEnvironments:
    """
    Top/bottom boundaries of several sandwiches during a downward row sweep.

    Boundaries are cached by what they contain (which ket and which
    operators in the absorbed rows), so sandwiches that agree above or
    below a row share one compression. Bottoms are built at the start of
    every sweep; tops are extended after each finished row.
    """

    def __init__(self, sandwiches: Sequence[Sandwich], dtilde: int, stage: str = "peps"):
        self.sandwiches = list(sandwiches)
        self.dtilde = dtilde
        self.stage = stage
        self.delta_ks: List[float] = []
        self._tops: Dict[Hashable, Edge] = {}
        self._bottoms: List[Dict[Hashable, Edge]] = []
        self._row = 0

    def _key(self, sandwich: Sandwich, rows: range) -> Hashable:
        ket = "self" if sandwich.ket is None else id(sandwich.ket)
        return ket, sandwich.ops_in_rows(rows)

    def start_sweep(self, state: Peps) -> None:
        """Rebuild every bottom boundary and reset the tops to row 0."""
        rows = state.rows
        self._bottoms = [dict() for _ in range(rows)]
        trivial = Edge(trivial_boundary(state.cols))
        for s in self.sandwiches:
            self._bottoms[rows - 1].setdefault(self._key(s, range(rows, rows)), trivial)
        for i in range(rows - 2, -1, -1):
            for s in self.sandwiches:
                key = self._key(s, range(i + 1, rows))
                if key in self._bottoms[i]:
                    continue
                below = self._bottoms[i + 1][self._key(s, range(i + 2, rows))]
                edge, delta_k = push(below, upward_mpo(s.row(state, i + 1)), self.dtilde, self.stage)
                self._bottoms[i][key] = edge
                self.delta_ks.append(delta_k)
        self._tops = {self._key(s, range(0)): trivial for s in self.sandwiches}
        self._row = 0

    def advance(self, state: Peps) -> None:
        """Absorb the finished current row (with its updated tensors) into the tops."""
        i = self._row
        tops = {}
        for s in self.sandwiches:
            key = self._key(s, range(0, i + 1))
            if key in tops:
                continue
            above = self._tops[self._key(s, range(0, i))]
            edge, delta_k = push(above, downward_mpo(s.row(state, i)), self.dtilde, self.stage)
            tops[key] = edge
            self.delta_ks.append(delta_k)
        self._tops = tops
        self._row = i + 1

    def env(self, sandwich: Sandwich, state: Peps) -> BoundaryEnv:
        i = self._row
        return BoundaryEnv(
            self._tops[self._key(sandwich, range(0, i))],
            self._bottoms[i][self._key(sandwich, range(i + 1, state.rows))],
        )

    def holes(self, state: Peps, j: int) -> List[Tuple[np.ndarray, float]]:
        """(environment, log scale) of site (current row, j) in every sandwich."""
        i = self._row
        result = []
        for s in self.sandwiches:
            env = self.env(s, state)
            result.append((env.hole(s.row(state, i), j), env.log_scale))
        return result

    @property
    def row(self) -> int:
        return self._row

    @property
    def max_delta_k(self) -> float:
        return max(self.delta_ks, default=0.0)


def split_environment(env: np.ndarray, bra_shape: Sequence[int], ket_shape: Sequence[int]) -> np.ndarray:
    """(l, r, u, d) environment -> (L, l, R, r, U, u, D, d) with bra/ket bonds separated."""
    dims = []
    for b, k in zip(bra_shape[1:], ket_shape[1:]):
        dims.extend((b, k))
    return env.reshape(dims)


def quadratic_form(env: np.ndarray, site_shape: Sequence[int], op: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Matrix M with <bra|O|ket> = conj(a) . M . a for the site vector a.

    Rows are indexed by the bra tensor, columns by the ket tensor, both
    flattened in the site layout (d, l, r, u, dn).
    """
    d = site_shape[0]
    env8 = split_environment(env, site_shape, site_shape)
    op = np.eye(d, dtype=np.complex128) if op is None else op
    m = np.einsum("st,LlRrUuDd->sLRUDtlrud", op, env8)
    dim = int(np.prod(site_shape))
    return m.reshape(dim, dim)


def snake_order(rows: int, cols: int) -> List[Position]:
    """Row-major snake: even rows left to right, odd rows right to left."""
    order = []
    for i in range(rows):
        columns = range(cols) if i % 2 == 0 else range(cols - 1, -1, -1)
        order.extend((i, j) for j in columns)
    return order
