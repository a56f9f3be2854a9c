"""Why the classical dichotomy recipe fails and how the nonuniform one fixes it.

With t ranging far beyond the window H, Steklov averages of 4 - 2 t sin t
grow without bound, so the exponential-dichotomy interval of that component
is flagged divergent.  Taking H much larger than every sample time instead
gives averages that settle on [2, 6].  The ratio H/T2 controls how close they
get.

Run with:  python3 demos/03_ed_versus_ned.py
"""
# %% ED intervals: bounded versus growing oscillation
import math
import warnings

from dichospec import builtin, ed_intervals, ned_intervals

system = builtin("planar-nubg")
for T in (1e5, 1e6):
    c1, c2 = ed_intervals(system, 1e2, 1e3, T, grid_step=math.pi / 4)
    print(f"T = {T:.0e}: a1 in [{c1.lower:+.4f}, {c1.upper:+.4f}]  "
          f"a2 in [{c2.lower:+.3e}, {c2.upper:+.3e}] divergent={c2.divergent}")

# %% NED intervals for growing H / T2
print("\nNED interval of component 2 on [1e2, 1e3]:")
for H in (1e4, 1e5, 1e6, 1e7):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)   # H/T2 = 10 warns by design
        (iv,) = ned_intervals(system, H, 1e2, 1e3, components=[2])
    print(f"  H/T2 = {H / 1e3:8.0f}: [{iv.lower:.4f}, {iv.upper:.4f}]")

# Below H/T2 = 10 the estimate is refused outright.
try:
    ned_intervals(system, 5e3, 1e2, 1e3)
except Exception as exc:  # PreconditionError
    print("\nrefused:", exc)
