"""Energy error bars from the Hamiltonian variance."""

from typing import NamedTuple, Union

import numpy as np

from exceptions import NumericalConsistencyError
from modules.mpo import HamiltonianSpec, MatrixProductOperator, h_moments
from modules.mps import MatrixProductState

NEGATIVE_VARIANCE_TOLERANCE = 1e-9


class VarianceWindow(NamedTuple):
    energy: float
    epsilon: float

    def contains(self, value: float, slack: float = 0.0) -> bool:
        """True if value lies in [E - epsilon, E] (widened by slack)."""
        return self.energy - self.epsilon - slack <= value <= self.energy + slack


def variance_window(psi: MatrixProductState, spec: Union[HamiltonianSpec, MatrixProductOperator]) -> VarianceWindow:
    """
    E = <H> and epsilon = sqrt(<(H - E)^2>); some eigenvalue lies in [E - epsilon, E].

    Raises:
        NumericalConsistencyError: If <H^2> - <H>^2 is negative beyond round-off
    """
    moments = h_moments(psi, spec)
    variance = moments.variance
    if variance < -NEGATIVE_VARIANCE_TOLERANCE * max(1.0, abs(moments.e2)):
        raise NumericalConsistencyError(
            f"negative variance {variance:.3e} (<H>={moments.e1:.12g}, <H^2>={moments.e2:.12g})"
        )
    return VarianceWindow(moments.e1, float(np.sqrt(max(variance, 0.0))))
