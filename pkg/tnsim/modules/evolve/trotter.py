"""
Trotter layers of exp(-dt H).

Every step applies exp(-dt H): real-time evolution over delta uses
dt = i * delta, imaginary-time evolution uses a real dt > 0.

Two splittings are supported:
    even_odd       gates on even bonds, then odd bonds; single-site terms
                   are shared between the two bonds of a site
    channel_split  one MPO per group of mutually commuting terms (grouped
                   by term label), which keeps translation invariance
"""

from collections import OrderedDict
from dataclasses import dataclass
from utils.compat import StrEnum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg as sla

from exceptions import InvalidSchemeError
from modules.mpo import (
    HamiltonianSpec,
    MatrixProductOperator,
    Term,
    identity_mpo,
    mpo_product,
)
from modules.mps import Boundary
from modules.oracle import embed_operator
from modules.tensor_core import as_tensor, operator_schmidt

COMMUTATOR_TOLERANCE = 1e-12


class SchemeKind(StrEnum):
    EVEN_ODD = "even_odd"
    CHANNEL_SPLIT = "channel_split"


class EvolutionMode(StrEnum):
    REAL = "real"
    IMAGINARY = "imaginary"


@dataclass(frozen=True)
class TrotterScheme:
    """Splitting kind, order (1 or 2) and complex step dt of exp(-dt H)."""

    kind: SchemeKind = SchemeKind.EVEN_ODD
    order: int = 2
    dt: complex = 0.01

    def __post_init__(self):
        object.__setattr__(self, "kind", SchemeKind(self.kind))
        object.__setattr__(self, "dt", complex(self.dt))
        if self.order not in (1, 2):
            raise InvalidSchemeError(f"Trotter order must be 1 or 2, got {self.order}")
        if abs(self.dt) == 0:
            raise InvalidSchemeError("time step must be non-zero")

    @classmethod
    def real_time(cls, delta: float, kind: SchemeKind = SchemeKind.EVEN_ODD, order: int = 2) -> "TrotterScheme":
        return cls(kind, order, 1j * delta)

    @classmethod
    def imaginary_time(cls, tau: float, kind: SchemeKind = SchemeKind.EVEN_ODD, order: int = 2) -> "TrotterScheme":
        return cls(kind, order, tau)

    @property
    def step_length(self) -> float:
        return abs(self.dt)

    def with_dt(self, dt: complex) -> "TrotterScheme":
        return TrotterScheme(self.kind, self.order, dt)

    def check_mode(self, mode: EvolutionMode) -> None:
        """Raise InvalidSchemeError unless dt matches the evolution mode."""
        mode = EvolutionMode(mode)
        if mode == EvolutionMode.REAL and not (self.dt.real == 0.0 and self.dt.imag != 0.0):
            raise InvalidSchemeError(f"real-time evolution needs dt = i * delta, got {self.dt}")
        if mode == EvolutionMode.IMAGINARY and not (self.dt.imag == 0.0 and self.dt.real > 0.0):
            raise InvalidSchemeError(f"imaginary-time evolution needs a real dt > 0, got {self.dt}")


@dataclass(frozen=True)
class Gate:
    """Local unitary or imaginary-time factor on one site or a neighbouring pair."""

    sites: Tuple[int, ...]
    matrix: np.ndarray


@dataclass(frozen=True)
class GateLayer:
    """Non-overlapping gates, or one MPO for channel-split layers."""

    gates: Tuple[Gate, ...] = ()
    mpo: Optional[MatrixProductOperator] = None

    @property
    def is_mpo(self) -> bool:
        return self.mpo is not None


# ----------------------------------------------------------------------
# Even / odd
# ----------------------------------------------------------------------

def bond_hamiltonian(spec: HamiltonianSpec, k: int) -> np.ndarray:
    """Bond (k, k + 1) operator with the single-site terms of both sites shared."""
    n = spec.n
    eye = np.eye(spec.d)
    left = spec.site_operator(k) * (1.0 if k == 0 else 0.5)
    right = spec.site_operator(k + 1) * (1.0 if k + 1 == n - 1 else 0.5)
    return spec.bond_operator(k, k + 1) + np.kron(left, eye) + np.kron(eye, right)


def _even_odd_layer(spec: HamiltonianSpec, parity: int, tau: complex) -> GateLayer:
    if spec.n == 1:
        return GateLayer((Gate((0,), sla.expm(-tau * spec.site_operator(0))),))
    gates = [Gate((k, k + 1), sla.expm(-tau * bond_hamiltonian(spec, k))) for k in range(parity, spec.n - 1, 2)]
    return GateLayer(tuple(gates))


def _even_odd_layers(spec: HamiltonianSpec, scheme: TrotterScheme) -> List[GateLayer]:
    if spec.boundary != Boundary.OPEN or spec.lattice is not None:
        raise InvalidSchemeError("even/odd layers are built for open chains")
    spec.require_nearest_neighbour()
    dt = scheme.dt
    if spec.n == 1:
        return [_even_odd_layer(spec, 0, dt)]
    if scheme.order == 1:
        return [_even_odd_layer(spec, 0, dt), _even_odd_layer(spec, 1, dt)]
    return [_even_odd_layer(spec, 0, dt / 2), _even_odd_layer(spec, 1, dt), _even_odd_layer(spec, 0, dt / 2)]


# ----------------------------------------------------------------------
# Channel split
# ----------------------------------------------------------------------

def group_channels(spec: HamiltonianSpec) -> "OrderedDict[str, List[Term]]":
    """Terms grouped by channel key, in order of first appearance."""
    groups: "OrderedDict[str, List[Term]]" = OrderedDict()
    for term in spec.terms:
        groups.setdefault(term.channel_key, []).append(term)
    return groups


def _commute(a: Term, b: Term, d: int) -> bool:
    shared = set(a.sites) & set(b.sites)
    if not shared:
        return True
    union = sorted(set(a.sites) | set(b.sites))

    def embed(term: Term) -> np.ndarray:
        positions = [union.index(s) for s in term.sites]
        return embed_operator(term.matrix, positions, [d] * len(union))

    ma, mb = embed(a), embed(b)
    return np.linalg.norm(ma @ mb - mb @ ma) <= COMMUTATOR_TOLERANCE * max(1.0, np.linalg.norm(ma) * np.linalg.norm(mb))


def check_channel(terms: Sequence[Term], d: int, name: str = "") -> None:
    for i, a in enumerate(terms):
        for b in terms[i + 1:]:
            if not _commute(a, b, d):
                raise InvalidSchemeError(
                    f"channel '{name}' mixes non-commuting terms on sites {a.sites} and {b.sites}"
                )


def gate_mpo(gate: Gate, dims: Sequence[int]) -> MatrixProductOperator:
    """Embed a one- or two-site gate into an MPO on the whole chain."""
    sites = [np.eye(d, dtype=np.complex128)[None, None] for d in dims]
    if len(gate.sites) == 1:
        sites[gate.sites[0]] = as_tensor(gate.matrix)[None, None]
        return MatrixProductOperator(tuple(sites))
    i, j = gate.sites
    if j != i + 1:
        raise InvalidSchemeError(f"gate on sites {gate.sites} is not a neighbouring pair")
    lefts, rights = operator_schmidt(gate.matrix, dims[i], dims[j])
    sites[i] = lefts[None]
    sites[j] = rights[:, None]
    return MatrixProductOperator(tuple(sites))


def channel_mpo(terms: Sequence[Term], n: int, d: int, tau: complex) -> MatrixProductOperator:
    """exp(-tau * sum of the channel's terms) as a product of commuting gate MPOs."""
    mpo = identity_mpo(d, n)
    for term in terms:
        mpo = mpo_product(gate_mpo(Gate(term.sites, sla.expm(-tau * term.matrix)), [d] * n), mpo)
    return mpo


def _channel_layers(spec: HamiltonianSpec, scheme: TrotterScheme) -> List[GateLayer]:
    if spec.boundary != Boundary.OPEN or spec.lattice is not None:
        raise InvalidSchemeError("finite channel-split layers are built for open chains")
    spec.require_nearest_neighbour()
    groups = group_channels(spec)
    for name, terms in groups.items():
        check_channel(terms, spec.d, name)
    channels = list(groups.values())
    dt = scheme.dt
    if scheme.order == 1:
        taus = [dt] * len(channels)
        order = list(range(len(channels)))
    else:
        order = list(range(len(channels))) + list(range(len(channels) - 2, -1, -1))
        taus = [dt / 2] * (len(channels) - 1) + [dt] + [dt / 2] * (len(channels) - 1)
    return [GateLayer(mpo=channel_mpo(channels[c], spec.n, spec.d, tau)) for c, tau in zip(order, taus)]


def trotter_layers(spec: HamiltonianSpec, scheme: TrotterScheme) -> List[GateLayer]:
    """
    Layers whose ordered product approximates exp(-dt H).

    Raises:
        InvalidSchemeError: If a channel groups non-commuting terms
        UnsupportedRangeError: For terms beyond nearest neighbours
    """
    if scheme.kind == SchemeKind.EVEN_ODD:
        return _even_odd_layers(spec, scheme)
    return _channel_layers(spec, scheme)


def layer_to_mpo(layer: GateLayer, dims: Sequence[int]) -> MatrixProductOperator:
    """A gate layer as one MPO (bond = Schmidt rank of its gates)."""
    if layer.is_mpo:
        return layer.mpo
    mpo = identity_mpo(list(dims))
    for gate in layer.gates:
        mpo = mpo_product(gate_mpo(gate, dims), mpo)
    return mpo


def zz_channel_tensors(delta: complex) -> Dict[str, np.ndarray]:
    """
    Bulk MPO tensor of exp(delta * sum_k sz_k sz_{k+1}).

    exp(delta sz sz) = cosh(delta) + sinh(delta) sz sz; splitting each
    factor symmetrically gives W = C0 x I + C1 x sz with
    C0 = diag(cosh, sinh) and C1 off-diagonal sqrt(sinh) sqrt(cosh).
    """
    c, s = np.cosh(delta), np.sinh(delta)
    sqrt_c, sqrt_s = np.sqrt(c + 0j), np.sqrt(s + 0j)
    c0 = np.diag([c, s]).astype(np.complex128)
    c1 = np.array([[0, sqrt_c * sqrt_s], [sqrt_c * sqrt_s, 0]], dtype=np.complex128)
    x0 = np.eye(2, dtype=np.complex128)
    x1 = np.diag([1.0, -1.0]).astype(np.complex128)
    bulk = np.einsum("ab,st->abst", c0, x0) + np.einsum("ab,st->abst", c1, x1)
    return {"C0": c0, "C1": c1, "X0": x0, "X1": x1, "bulk": bulk,
            "left": np.array([sqrt_c, sqrt_s]), "right": np.array([sqrt_c, sqrt_s])}


def zz_channel_mpo(n: int, delta: complex) -> MatrixProductOperator:
    """Open-chain MPO of exp(delta * sum sz sz) built from the explicit C/X tensors."""
    tensors = zz_channel_tensors(delta)
    x = np.stack([tensors["X0"], tensors["X1"]])
    first = np.einsum("b,bst->bst", tensors["left"], x)[None]
    last = np.einsum("a,ast->ast", tensors["right"], x)[:, None]
    sites = [first] + [tensors["bulk"]] * (n - 2) + [last]
    return MatrixProductOperator(tuple(sites))
