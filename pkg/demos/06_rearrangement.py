"""Half-line operator integrals rearranged into modular form, three ways.

The integral of f_0(uA) b_1 f_1(uA) ... b_p f_p(uA) over u in (0, inf) equals
the kernel F applied to the slot lifts of A, and equals A^-1 times the kernel
G applied to cumulative products of the modular operators exp(-nabla_a).
The essence is the substitution u -> u/s that turns F into G.
"""

import numpy as np

from opcalc import (
    family_from_exponents,
    gen_matrix,
    kernel_F,
    kernel_G,
    matrix_exp,
    modular_family,
    opnorm,
    rearrange_lhs,
    rearrange_rhs_F,
    rearrange_rhs_G,
    sector_check,
)

fam = family_from_exponents([1, 1])  # f_j(s) = (1 + s)^-1

print("=" * 70)
print("1. the scalar kernels and the scaling identity")
print("=" * 70)
print(f"  F(1, 1) = {kernel_F(fam, [1.0, 1.0]):.12f}   (= integral of (1+u)^-2 = 1)")
print(f"  G(2)    = {kernel_G(fam, [2.0]):.12f}   (= ln 2)")
rng = np.random.default_rng(0)
worst = 0.0
for _ in range(50):
    s = rng.uniform(0.5, 2.0, 2) * np.exp(1j * rng.uniform(-0.3, 0.3, 2))
    F = kernel_F(fam, s)
    worst = max(worst, abs(F - kernel_G(fam, [s[1] / s[0]]) / s[0]) / abs(F))
print(f"  F(s0, s1) = G(s1/s0)/s0 on 50 sector points, worst: {worst:.2e}")

print()
print("=" * 70)
print("2. modular operators of a Hermitian log")
print("=" * 70)
a = gen_matrix("hermitian", 2, 3)
ok, report = sector_check(a, 0.3)
print(f"  spectrum in the strip of half-width 0.3: {ok}")
fam_mod = modular_family(a, p=2, delta=0.3)
print(f"  slot-lift factorization residual: {fam_mod.eqtrear5_residual:.2e}")
mu = np.linalg.eigvals(fam_mod.delta_products[-1].matrix)
print(f"  product spectrum args within double sector: max |arg| = "
      f"{np.max(np.abs(np.angle(mu))):.3f} < 0.6")

print()
print("=" * 70)
print("3. the three-way identity on random data")
print("=" * 70)
A = matrix_exp(a)
b = gen_matrix("random", 2, 9)
lhs = rearrange_lhs(fam, A, [b], delta=0.3)
rf = rearrange_rhs_F(fam, A, [b], delta=0.3)
rg = rearrange_rhs_G(fam, A, [b], delta=0.3)
scale = opnorm(lhs)
print(f"  direct integral vs kernel-F route: {opnorm(lhs - rf) / scale:.2e}")
print(f"  direct integral vs kernel-G route: {opnorm(lhs - rg) / scale:.2e}")
print(f"  kernel-F route vs kernel-G route:  {opnorm(rf - rg) / scale:.2e}")

print()
print("=" * 70)
print("4. higher arity: p = 2 insertions, dimension 3")
print("=" * 70)
fam3 = family_from_exponents([1, 1, 1])
a3 = gen_matrix("hermitian", 3, 4)
A3 = matrix_exp(a3)
bs = [gen_matrix("random", 3, 10), gen_matrix("random", 3, 11)]
lhs = rearrange_lhs(fam3, A3, bs, delta=0.3)
rf = rearrange_rhs_F(fam3, A3, bs, delta=0.3)
rg = rearrange_rhs_G(fam3, A3, bs, delta=0.3)
scale = opnorm(lhs)
print(f"  lhs vs F route: {opnorm(lhs - rf) / scale:.2e}")
print(f"  lhs vs G route: {opnorm(lhs - rg) / scale:.2e}")
