"""Compare the compiled kernel backend against the pure-Python fallback.

Run:  python3 benchmarks/bench_kernels.py [n_seconds_simulated]

Times the raw oscillator-network integrator and a full closed-loop scenario
on both backends; the scenario timing includes planning, filtering, and
telemetry, so it shows the end-to-end speedup a user actually sees.
"""

from __future__ import annotations

import sys
import time

import numpy as np

from latstep._kernels import _fallback
from latstep.cpg import OscillatorParams, gait_matrix, initial_network

try:
    from latstep._kernels import _core
except ImportError:
    _core = None


def time_network(mod, n_ticks: int, dt: float = 1e-3) -> float:
    p = OscillatorParams()
    x, y, en = initial_network().as_arrays()
    en[:] = 1.0
    k = np.asarray(gait_matrix(4.0))
    t0 = time.perf_counter()
    mod.network_rk4_run(x, y, en, p.a, p.b, p.mu, p.tau,
                        p.omega_st, p.omega_sw, k, dt, n_ticks)
    return time.perf_counter() - t0


_SCENARIO_SNIPPET = """
import time
from latstep.scenario import default_config, run_scenario
cfg = default_config()
run_scenario(cfg, record_trace=True)  # warm caches
t0 = time.perf_counter()
res = run_scenario(cfg, record_trace=True)
print(res.run.backend, time.perf_counter() - t0)
"""


def time_scenario(force_fallback: bool) -> tuple[str, float]:
    # backend choice happens at import, so isolate each run in a subprocess
    import os
    import subprocess

    env = dict(os.environ)
    env["LATSTEP_FORCE_FALLBACK"] = "1" if force_fallback else "0"
    out = subprocess.run([sys.executable, "-c", _SCENARIO_SNIPPET],
                         env=env, capture_output=True, text=True, check=True)
    backend, elapsed = out.stdout.split()
    return backend, float(elapsed)


def main() -> int:
    seconds = float(sys.argv[1]) if len(sys.argv) > 1 else 30.0
    n_ticks = int(round(seconds / 1e-3))

    print(f"network integrator, 8 units, {n_ticks} ticks of 1 ms:")
    t_fb = time_network(_fallback, n_ticks)
    print(f"  fallback : {t_fb * 1e3:8.1f} ms  "
          f"({n_ticks / t_fb / 1e6:.2f} Mticks/s)")
    if _core is not None:
        t_c = time_network(_core, n_ticks)
        print(f"  compiled : {t_c * 1e3:8.1f} ms  "
              f"({n_ticks / t_c / 1e6:.2f} Mticks/s)")
        print(f"  speedup  : {t_fb / t_c:8.1f}x")
    else:
        print("  compiled : not built")

    print("full default scenario (9 s sim, trace on):")
    backend, t_fb = time_scenario(force_fallback=True)
    print(f"  {backend:9}: {t_fb * 1e3:8.1f} ms")
    if _core is not None:
        backend, t_c = time_scenario(force_fallback=False)
        print(f"  {backend:9}: {t_c * 1e3:8.1f} ms")
        print(f"  speedup  : {t_fb / t_c:8.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
