"""
HDF5 containers for tensor-network states.

Layout: root attributes `format`, `version` and the state metadata; one
dataset per site tensor named site_00000, ... stored as little-endian
complex128 with its shape. PEPS containers add a grid header.
"""

from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import h5py
import numpy as np

from exceptions import DimensionError

from .state import Boundary, CanonicalForm, MatrixProductState

MPS_FORMAT = "tnsim-mps"
CONTAINER_VERSION = 1
SITE_DTYPE = np.dtype("<c16")


def write_container(path: Union[str, Path], kind: str, attrs: Dict, tensors: Sequence[np.ndarray]) -> None:
    with h5py.File(path, "w") as handle:
        handle.attrs["format"] = kind
        handle.attrs["version"] = CONTAINER_VERSION
        for key, value in attrs.items():
            handle.attrs[key] = value
        for k, tensor in enumerate(tensors):
            handle.create_dataset(f"site_{k:05d}", data=np.asarray(tensor, dtype=SITE_DTYPE))


def read_container(path: Union[str, Path], kind: str) -> Tuple[Dict, List[np.ndarray]]:
    with h5py.File(path, "r") as handle:
        found = handle.attrs.get("format")
        if isinstance(found, bytes):
            found = found.decode()
        if found != kind:
            raise DimensionError(f"{path} holds '{found}', expected '{kind}'")
        version = int(handle.attrs.get("version", -1))
        if version != CONTAINER_VERSION:
            raise DimensionError(f"unsupported container version {version} in {path}")
        attrs = {key: handle.attrs[key] for key in handle.attrs}
        names = sorted(name for name in handle.keys() if name.startswith("site_"))
        tensors = [np.asarray(handle[name][()], dtype=np.complex128) for name in names]
    return attrs, tensors


def save_mps(path: Union[str, Path], psi: MatrixProductState) -> None:
    """Write a state to an HDF5 container."""
    attrs = {
        "boundary": str(psi.boundary),
        "canonical": str(psi.canonical),
        "center": -1 if psi.center is None else psi.center,
        "n": psi.n,
    }
    write_container(path, MPS_FORMAT, attrs, psi.sites)


def load_mps(path: Union[str, Path]) -> MatrixProductState:
    """Read a state written by save_mps."""
    attrs, tensors = read_container(path, MPS_FORMAT)
    center = int(attrs["center"])
    return MatrixProductState(
        tuple(tensors),
        Boundary(str(attrs["boundary"])),
        CanonicalForm(str(attrs["canonical"])),
        None if center < 0 else center,
    )
