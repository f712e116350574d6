"""Planning the recursive protocol: even splits, advanced composition, optimization.

Each level of the recursive protocol refines the previous digit of the
input and pays for its own blanket randomized response.  Three planners
choose the per-level precision and privacy budget; the analytic MSE bound
compares them.
"""

import math

from shufflesum.recursive import (
    mse_bound_recursive,
    optimize_recursive_params,
    plan_recursive_advanced,
    plan_recursive_basic,
)


def show(label, params):
    bound = mse_bound_recursive(params)
    gammas = ", ".join(f"{g:.3f}" for g in params.gammas)
    print(f"  {label:<10} p={params.precisions} gamma=({gammas}) bound={bound:.4g}")


if __name__ == "__main__":
    for n in (10**5, 10**6, 10**7):
        eps, delta = 1.0, 1 / n**2
        print(f"n={n}, eps={eps}, delta=1/n^2")
        show("basic", plan_recursive_basic(eps, delta, n, 2))
        show("optimized", optimize_recursive_params(eps, delta, n, 2))
        adv = plan_recursive_advanced(eps, delta, n)
        show(f"advanced (m={adv.m})", adv)
        print(f"  rounding floor n/(4 q_m^2) of the optimized plan: "
              f"{n / (4 * math.prod(optimize_recursive_params(eps, delta, n, 2).precisions) ** 2):.4g}")
