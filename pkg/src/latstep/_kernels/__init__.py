"""Numeric kernel backend selection.

The compiled extension is preferred when importable; setting the environment
variable LATSTEP_FORCE_FALLBACK=1 forces the pure numpy implementation (used
by tests and the backend benchmark). The selected module is re-exported as
`kernels` and its name is available as BACKEND.
"""

import os

from . import _fallback

if os.environ.get("LATSTEP_FORCE_FALLBACK", "") == "1":
    kernels = _fallback
else:
    try:
        from . import _core as kernels  # type: ignore[no-redef]
    except ImportError:
        kernels = _fallback

BACKEND: str = kernels.BACKEND

network_rk4_step = kernels.network_rk4_step
network_rk4_run = kernels.network_rk4_run
plant_rk4_step = kernels.plant_rk4_step
biquad_step = kernels.biquad_step

__all__ = [
    "BACKEND",
    "kernels",
    "network_rk4_step",
    "network_rk4_run",
    "plant_rk4_step",
    "biquad_step",
]
