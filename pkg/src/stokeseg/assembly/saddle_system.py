from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.sparse import csr_matrix

from stokeseg.constants import Method
from stokeseg.spaces.eg_space import EGSpace


@dataclass(frozen=True, eq=False)
class SaddleSystem:
    """
    Discrete Stokes system: a(u, v) - b(v, p) = F(v), b(u, q) = 0.

    ``A`` is (n_velocity, n_velocity), ``B`` is (n_pres, n_velocity) with rows
    indexed by pressure cells, ``m`` holds the cell measures for the mean-zero
    pressure constraint.
    """
    space: EGSpace
    method: Method
    nu: float
    A: csr_matrix
    B: csr_matrix
    F: np.ndarray
    m: np.ndarray
    rho: Optional[float] = None

    def with_load(self, F: np.ndarray) -> "SaddleSystem":
        F = np.asarray(F, dtype=float)
        if F.shape != (self.space.n_velocity,):
            raise ValueError(f"load vector must have {self.space.n_velocity} entries, got {F.shape}")
        return replace(self, F=F)
