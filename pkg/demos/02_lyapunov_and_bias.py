"""Lyapunov intervals and the nonuniform-bias detector on the planar example.

The planar system diag(sin(ln t) + cos(ln t), 4 - 2 t sin t) has a bounded
first coefficient and a second one whose oscillation grows linearly in t.
Running averages F_j(t)/t recover the Lyapunov intervals.  The bias statistic
sup |(1/t) int_t^{t+H} a_j| separates the two components: it decays for the
bounded term and stays of order one for the growing one.

Run with:  python3 demos/02_lyapunov_and_bias.py
"""
# %% Lyapunov intervals over two windows
from dichospec import builtin, lyapunov_intervals, nonuniform_bias

system = builtin("planar-nubg")
for T1, T2 in [(1e2, 1e4), (1e4, 1e6)]:
    ivs = lyapunov_intervals(system, T1, T2)
    row = "  ".join(f"[{iv.lower:+.4f}, {iv.upper:+.4f}]" for iv in ivs)
    print(f"T1={T1:8.0e} T2={T2:8.0e}: {row}")

# The first component oscillates on a logarithmic clock with period e^(2 pi),
# so a window spanning only two decades may not see a full cycle.

# %% Bias as T1 grows
print("\nbias of component 1 for H = 10:")
for k in (3, 4, 5):
    rep = nonuniform_bias(system, 10.0, 10.0 ** k, 10.0 ** (k + 1), components=[1])
    print(f"  T1 = 1e{k}: b = {rep.components[0].b_bar:.3e}")

# %% Decisions with the default threshold
rep = nonuniform_bias(system, 1e2, 1e4, 1e5, epsilon=0.01)
for c in rep.components:
    print(f"component {c.component}: b = {c.b_bar:.4f} at t = {c.t_at_sup:.1f} -> "
          f"{rep.decision(c.component)}")
