# SPDX-License-Identifier: Apache-2.0
"""Atom diode with laser quenching.

Units: um, ms and 1/ms inside the core; the helpers below take speeds in cm/s.
"""

from ._core import (
    NEON_HBAR_OVER_M,
    DiodeConfig,
    Error,
    LaserProfile,
    PhysicalParams,
    Side,
    __version__,
    master_oracle,
    propagate,
    recoil_cdf,
    sample_recoil,
    scattering,
    scattering_table,
    trajectories,
)

__all__ = [
    "NEON_HBAR_OVER_M",
    "DiodeConfig",
    "Error",
    "LaserProfile",
    "PhysicalParams",
    "Side",
    "__version__",
    "master_oracle",
    "propagate",
    "recoil_cdf",
    "sample_recoil",
    "scattering",
    "scattering_table",
    "trajectories",
]
