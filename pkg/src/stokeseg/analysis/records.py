import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from stokeseg.constants import Method


@dataclass(frozen=True)
class ConvergenceRecord:
    method: Method
    h: float
    nu: float
    rho: Optional[float]
    err_u_triple: float
    err_u_energy: float
    err_p_l2: float
    err_p_proj: float
    rate_u: float = math.nan
    rate_p: float = math.nan
    cond2: float = math.nan
    assemble_s: float = math.nan
    solve_s: float = math.nan
    error_message: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.error_message is not None

    @classmethod
    def failure(cls, method: Method, h: float, nu: float, rho: Optional[float], message: str) -> "ConvergenceRecord":
        return cls(method=method, h=h, nu=nu, rho=rho, err_u_triple=math.nan, err_u_energy=math.nan,
                   err_p_l2=math.nan, err_p_proj=math.nan, error_message=message)


def pairwise_rate(coarse_error: float, fine_error: float, coarse_h: float, fine_h: float) -> float:
    """log2(e_coarse / e_fine) per halving of h; NaN unless both errors are positive and finite."""
    if not (0 < coarse_error < math.inf and 0 < fine_error < math.inf) or coarse_h <= fine_h:
        return math.nan
    return float(np.log2(coarse_error / fine_error) / np.log2(coarse_h / fine_h))


def attach_rates(records: list[ConvergenceRecord]) -> list[ConvergenceRecord]:
    """Rates against the previous record; the first record has none."""
    rated = records[:1]
    for previous, current in zip(records, records[1:]):
        rated.append(replace(
            current,
            rate_u=pairwise_rate(previous.err_u_triple, current.err_u_triple, previous.h, current.h),
            rate_p=pairwise_rate(previous.err_p_l2, current.err_p_l2, previous.h, current.h),
        ))
    return rated
