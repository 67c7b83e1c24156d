"""
Cached left/right environments of an open chain.

A channel is <psi| W |ket> with an MPO W (identity when None) and a ket
that is either psi itself (quadratic channel) or a fixed reference
state (linear channel). Environments are rank 3: (bra bond, MPO bond,
ket bond). left[k] holds sites < k, right[k] holds sites > k.
"""

from typing import List, Optional, Sequence

import numpy as np
from opt_einsum import contract
from scipy.sparse.linalg import LinearOperator

from exceptions import DimensionError, UnsupportedGaugeError
from modules.mpo import MatrixProductOperator, identity_mpo
from modules.mps import Boundary, MatrixProductState

_LEFT_UPDATE = "awb,aes,wvst,bct->evc"
_RIGHT_UPDATE = "aes,wvst,bct,evc->awb"
_APPLY = "awb,wvst,bct,evc->aes"
_DENSE = "awb,wvst,evc->aesbct"


def _unit() -> np.ndarray:
    return np.ones((1, 1, 1), dtype=np.complex128)


class _Channel:
    def __init__(self, n: int, mpo: MatrixProductOperator, ket: Optional[MatrixProductState]):
        self.mpo = mpo.sites
        self.ket = None if ket is None else ket.sites
        self.left: List[Optional[np.ndarray]] = [None] * n
        self.right: List[Optional[np.ndarray]] = [None] * n
        self.left[0] = _unit()
        self.right[n - 1] = _unit()


class EnvironmentCache:
    """
    Environments for single-site alternating least squares on an open chain.

    Args:
        sites: Mutable list of the current site tensors of psi
        quadratic: MPO of the quadratic form (None for no quadratic channel)
        linear: (reference state, MPO or None) pairs for <psi|O|phi> channels
        with_norm: Also track <psi|psi> (effective overlap matrix)
    """

    def __init__(
        self,
        sites: List[np.ndarray],
        quadratic: Optional[MatrixProductOperator] = None,
        linear: Sequence = (),
        with_norm: bool = False,
    ):
        self.sites = sites
        self.n = len(sites)
        dims = [a.shape[2] for a in sites]
        if sites[0].shape[0] != 1 or sites[-1].shape[1] != 1:
            raise UnsupportedGaugeError("environment caches need an open chain")
        self.quadratic = None if quadratic is None else _Channel(self.n, quadratic, None)
        self.norm = _Channel(self.n, identity_mpo(dims), None) if with_norm else None
        self.linear: List[_Channel] = []
        for ket, op in linear:
            expected = tuple(dims) if op is None else op.in_dims
            if ket.boundary != Boundary.OPEN or ket.phys_dims != expected:
                raise DimensionError("reference states must be open chains matching the operator input dims")
            if op is not None and op.out_dims != tuple(dims):
                raise DimensionError(f"operator output dims {op.out_dims} do not match state dims {tuple(dims)}")
            self.linear.append(_Channel(self.n, op if op is not None else identity_mpo(dims), ket))
        for channel in self._channels():
            if len(channel.mpo) != self.n:
                raise DimensionError("operator and state lengths differ")

    def _channels(self) -> List[_Channel]:
        channels = [c for c in (self.quadratic, self.norm) if c is not None]
        return channels + self.linear

    def _ket(self, channel: _Channel, k: int) -> np.ndarray:
        return self.sites[k] if channel.ket is None else channel.ket[k]

    # ------------------------------------------------------------------
    # Updates
    # ------------------------------------------------------------------

    def _left_of(self, channel: _Channel, k: int, env: np.ndarray) -> np.ndarray:
        return contract(_LEFT_UPDATE, env, self.sites[k].conj(), channel.mpo[k], self._ket(channel, k))

    def _right_of(self, channel: _Channel, k: int, env: np.ndarray) -> np.ndarray:
        return contract(_RIGHT_UPDATE, self.sites[k].conj(), channel.mpo[k], self._ket(channel, k), env)

    def build_right(self, start: int = 0) -> None:
        """Recompute every right environment needed for a sweep starting at `start`."""
        for channel in self._channels():
            for k in range(self.n - 1, start, -1):
                channel.right[k - 1] = self._right_of(channel, k, channel.right[k])

    def build_left(self, stop: Optional[int] = None) -> None:
        stop = self.n - 1 if stop is None else stop
        for channel in self._channels():
            for k in range(stop):
                channel.left[k + 1] = self._left_of(channel, k, channel.left[k])

    def advance_left(self, k: int) -> None:
        """Site k is final for a left-to-right pass: extend left[k + 1]."""
        for channel in self._channels():
            channel.left[k + 1] = self._left_of(channel, k, channel.left[k])

    def advance_right(self, k: int) -> None:
        """Site k is final for a right-to-left pass: extend right[k - 1]."""
        for channel in self._channels():
            channel.right[k - 1] = self._right_of(channel, k, channel.right[k])

    def recompute_left(self, channel_index: int, k: int) -> np.ndarray:
        """left[k] of a channel contracted from scratch."""
        channel = self._channels()[channel_index]
        env = _unit()
        for j in range(k):
            env = self._left_of(channel, j, env)
        return env

    def recompute_right(self, channel_index: int, k: int) -> np.ndarray:
        channel = self._channels()[channel_index]
        env = _unit()
        for j in range(self.n - 1, k, -1):
            env = self._right_of(channel, j, env)
        return env

    def left_env(self, channel_index: int, k: int) -> np.ndarray:
        return self._channels()[channel_index].left[k]

    def right_env(self, channel_index: int, k: int) -> np.ndarray:
        return self._channels()[channel_index].right[k]

    # ------------------------------------------------------------------
    # Effective forms at a site
    # ------------------------------------------------------------------

    def site_shape(self, k: int):
        return self.sites[k].shape

    def effective_operator(self, k: int) -> LinearOperator:
        """Matrix-free H_eff of the quadratic channel at site k."""
        channel = self.quadratic
        left, right, w = channel.left[k], channel.right[k], channel.mpo[k]
        shape = self.sites[k].shape
        dim = int(np.prod(shape))

        def matvec(x):
            return contract(_APPLY, left, w, np.reshape(x, shape), right).reshape(dim)

        # the quadratic channels used here are Hermitian
        return LinearOperator((dim, dim), matvec=matvec, rmatvec=matvec, dtype=np.complex128)

    def _dense(self, channel: _Channel, k: int) -> np.ndarray:
        dim = int(np.prod(self.sites[k].shape))
        m = contract(_DENSE, channel.left[k], channel.mpo[k], channel.right[k])
        return m.reshape(dim, dim)

    def effective_matrix(self, k: int) -> np.ndarray:
        """Dense, Hermitized H_eff of the quadratic channel."""
        m = self._dense(self.quadratic, k)
        return 0.5 * (m + m.conj().T)

    def effective_norm(self, k: int) -> np.ndarray:
        """Dense N_eff (identity for a mixed-canonical chain centred at k)."""
        if self.norm is None:
            raise DimensionError("cache was built without a norm channel")
        m = self._dense(self.norm, k)
        return 0.5 * (m + m.conj().T)

    def linear_vector(self, index: int, k: int) -> np.ndarray:
        """b with <psi|O|phi> = x^dag b for the site-k tensor x."""
        channel = self.linear[index]
        phi = channel.ket[k]
        return contract(_APPLY, channel.left[k], channel.mpo[k], phi, channel.right[k]).ravel()

    def linear_vectors(self, k: int) -> np.ndarray:
        if not self.linear:
            return np.zeros((int(np.prod(self.sites[k].shape)), 0), dtype=np.complex128)
        return np.stack([self.linear_vector(i, k) for i in range(len(self.linear))], axis=1)
