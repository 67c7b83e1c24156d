"""Local operator matrices (Pauli and spin-1)."""

from typing import Dict

import numpy as np

IDENTITY2 = np.eye(2, dtype=np.complex128)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=np.complex128)
SIGMA_MINUS = SIGMA_PLUS.T.copy()

# spin-1 in the S^z = +1, 0, -1 basis
SPIN1_Z = np.diag([1.0, 0.0, -1.0]).astype(np.complex128)
SPIN1_PLUS = np.sqrt(2.0) * np.array([[0, 1, 0], [0, 0, 1], [0, 0, 0]], dtype=np.complex128)
SPIN1_MINUS = SPIN1_PLUS.T.copy()
SPIN1_X = 0.5 * (SPIN1_PLUS + SPIN1_MINUS)
SPIN1_Y = -0.5j * (SPIN1_PLUS - SPIN1_MINUS)

NAMED_OPERATORS: Dict[str, np.ndarray] = {
    "id": IDENTITY2,
    "sx": SIGMA_X,
    "sy": SIGMA_Y,
    "sz": SIGMA_Z,
    "sp": SIGMA_PLUS,
    "sm": SIGMA_MINUS,
    "n": 0.5 * (IDENTITY2 + SIGMA_Z),
    "s1x": SPIN1_X,
    "s1y": SPIN1_Y,
    "s1z": SPIN1_Z,
    "id3": np.eye(3, dtype=np.complex128),
}


def named_operator(name: str) -> np.ndarray:
    """Look up a local operator by its configuration name."""
    try:
        return NAMED_OPERATORS[name]
    except KeyError:
        raise KeyError(f"unknown operator '{name}'; known: {', '.join(sorted(NAMED_OPERATORS))}")


def spin_one_projector_two() -> np.ndarray:
    """Projector of two spin-1 sites onto total spin 2 (9 x 9)."""
    s_dot_s = sum(np.kron(s, s) for s in (SPIN1_X, SPIN1_Y, SPIN1_Z))
    return 0.5 * s_dot_s + s_dot_s @ s_dot_s / 6.0 + np.eye(9) / 3.0
