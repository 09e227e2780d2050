"""Local consistency on small cycles.

Run with ``python3 demos/consistency_on_cycles.py``.
"""
from sensitive_csp import corpus
from sensitive_csp.consistency import enforce_kl, is_kl_instance
from sensitive_csp.solver import enumerate_solutions

# %% An odd cycle of disequalities over two colours has no solution,
# and (2,3)-consistency already notices it.
triangle = corpus.load("triangle")
res = enforce_kl(triangle, 2, 3)
print("triangle:", res.status.value, "rounds", res.rounds, "removed", res.removed)

# %% The even cycle survives. Enforcement only prunes pairs that do not
# extend to a third variable.
cycle = corpus.load("four-cycle")
for mode in ("jacobi", "gauss-seidel"):
    res = enforce_kl(cycle, 2, 3, mode=mode)
    print(f"four-cycle ({mode}):", res.status.value, "removed", res.removed)

print("consistent afterwards:", is_kl_instance(res.instance, 2, 3).holds)
print("solutions:", enumerate_solutions(res.instance))
