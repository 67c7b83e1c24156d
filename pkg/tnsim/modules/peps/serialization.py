"""HDF5 containers for PEPS: the MPS layout plus a rows/cols grid header."""

from pathlib import Path
from typing import Union

from exceptions import DimensionError
from modules.mps import read_container, write_container

from .state import Peps

PEPS_FORMAT = "tnsim-peps"


def save_peps(path: Union[str, Path], psi: Peps) -> None:
    """Write site tensors row-major (site_00000 is (0, 0))."""
    tensors = [a for row in psi.tensors for a in row]
    write_container(path, PEPS_FORMAT, {"rows": psi.rows, "cols": psi.cols}, tensors)


def load_peps(path: Union[str, Path]) -> Peps:
    attrs, tensors = read_container(path, PEPS_FORMAT)
    rows, cols = int(attrs["rows"]), int(attrs["cols"])
    if rows * cols != len(tensors):
        raise DimensionError(f"{path} declares a {rows}x{cols} grid but holds {len(tensors)} sites")
    return Peps(tuple(tuple(tensors[i * cols:(i + 1) * cols]) for i in range(rows)))
