"""
Transfer-matrix contraction of <bra| W_1 ... W_k |ket> networks.

Every layer is a list of rank-4 operator tensors (D_left, D_right, d_out,
d_in). The environment carries a leading "prefix" axis that keeps the
bonds at the starting cut open, so open and periodic chains share one
code path: for open chains the prefix has extent 1, for periodic chains
it is traced against the closing bonds at the end. Cost per site is
O(d D^3) for open and O(d D^5) for periodic chains.
"""

from functools import lru_cache
from typing import Sequence

import numpy as np
from opt_einsum import contract

from exceptions import DimensionError

_OLD = "efgh"
_NEW = "mnop"
_PHYS = "stuvw"


@lru_cache(maxsize=None)
def _left_step(layers: int) -> str:
    old, new, phys = _OLD[:layers], _NEW[:layers], _PHYS[: layers + 1]
    ops = [old[i] + new[i] + phys[i] + phys[i + 1] for i in range(layers)]
    inputs = ["Pa" + old + "b", "ac" + phys[0], *ops, "bd" + phys[layers]]
    return ",".join(inputs) + "->Pc" + new + "d"


@lru_cache(maxsize=None)
def _right_step(layers: int) -> str:
    old, new, phys = _OLD[:layers], _NEW[:layers], _PHYS[: layers + 1]
    ops = [new[i] + old[i] + phys[i] + phys[i + 1] for i in range(layers)]
    inputs = ["c" + old + "dP", "ac" + phys[0], *ops, "bd" + phys[layers]]
    return ",".join(inputs) + "->a" + new + "bP"


def check_compatible(bra, ket, layers: Sequence[Sequence[np.ndarray]] = ()) -> None:
    """Raise DimensionError unless all chains have matching length and physical dims."""
    if len(bra) != len(ket) or any(len(layer) != len(bra) for layer in layers):
        raise DimensionError("chains of different length cannot be contracted")
    for k in range(len(bra)):
        d_bra, d_ket = bra[k].shape[2], ket[k].shape[2]
        expected = d_bra
        for layer in layers:
            if layer[k].shape[2] != expected:
                raise DimensionError(f"physical dimension mismatch at site {k}")
            expected = layer[k].shape[3]
        if expected != d_ket:
            raise DimensionError(f"physical dimension mismatch at site {k}: {expected} != {d_ket}")


def left_start(bra_first, ket_first, layer_firsts=()) -> np.ndarray:
    """Identity environment over the bonds left of the first site."""
    dims = (bra_first.shape[0], *(w.shape[0] for w in layer_firsts), ket_first.shape[0])
    size = int(np.prod(dims))
    return np.eye(size, dtype=np.complex128).reshape((size,) + dims)


def right_start(bra_last, ket_last, layer_lasts=()) -> np.ndarray:
    """Identity environment over the bonds right of the last site."""
    dims = (bra_last.shape[1], *(w.shape[1] for w in layer_lasts), ket_last.shape[1])
    size = int(np.prod(dims))
    return np.eye(size, dtype=np.complex128).reshape(dims + (size,))


def left_step(env: np.ndarray, bra_site, ket_site, layer_sites=()) -> np.ndarray:
    """Absorb one site column into a left environment (P, a, w..., b)."""
    return contract(_left_step(len(layer_sites)), env, bra_site.conj(), *layer_sites, ket_site)


def right_step(env: np.ndarray, bra_site, ket_site, layer_sites=()) -> np.ndarray:
    """Absorb one site column into a right environment (a, w..., b, P)."""
    return contract(_right_step(len(layer_sites)), env, bra_site.conj(), *layer_sites, ket_site)


def close_left(env: np.ndarray) -> complex:
    size = env.shape[0]
    return complex(np.trace(env.reshape(size, -1)))


def close_right(env: np.ndarray) -> complex:
    size = env.shape[-1]
    return complex(np.trace(env.reshape(-1, size)))


def sandwich(bra, ket, layers: Sequence[Sequence[np.ndarray]] = (), from_right: bool = False) -> complex:
    """
    Raw value of <bra| W_1 ... W_k |ket>.

    Args:
        bra: Site tensors of the bra chain
        ket: Site tensors of the ket chain
        layers: Operator layers applied between them (first layer next to the bra)
        from_right: Contract right-to-left instead of left-to-right
    """
    check_compatible(bra, ket, layers)
    n = len(bra)
    if not from_right:
        env = left_start(bra[0], ket[0], [layer[0] for layer in layers])
        for k in range(n):
            env = left_step(env, bra[k], ket[k], [layer[k] for layer in layers])
        return close_left(env)
    env = right_start(bra[-1], ket[-1], [layer[-1] for layer in layers])
    for k in range(n - 1, -1, -1):
        env = right_step(env, bra[k], ket[k], [layer[k] for layer in layers])
    return close_right(env)
