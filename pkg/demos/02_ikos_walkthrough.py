"""One execution of the secure-aggregation protocol, step by step.

Each user rounds its value to a grid of p steps, adds a small share of
discrete Laplace noise, and splits the result into additive shares mod q.
The analyzer only sees shuffled columns of shares, yet their total mod q is
the noisy rounded sum.
"""

import math

import numpy as np

from shufflesum import RngStream, execute, ikos_protocol, mse_bound_ikos, plan_ikos
from shufflesum.datasets import gen_uniform
from shufflesum.ikos import ikos_randomize

if __name__ == "__main__":
    n, eps = 10_000, 1.0
    params = plan_ikos(eps, 1 / n**2, n)
    print(f"planned: p={params.p}, q={params.q}, alpha={params.alpha:.5f}, "
          f"sigma={params.sigma:.2f} bits, messages={params.m_total} "
          f"({params.m_shuffled} shuffled + 1 sent directly)")

    x = gen_uniform(n, seed=1)
    shares = ikos_randomize(x[:3], params, RngStream(1))
    print("first three users' shares:\n", shares)
    print("each row sums (mod q) to the noisy rounded input:", shares.sum(axis=1) % params.q)

    proto = ikos_protocol(params)
    root = RngStream(2)
    errs = np.array([execute(proto, x, root.substream(k))[1] - x.sum() for k in range(200)])
    print(f"true sum {x.sum():.3f}; 200 runs: mean error {errs.mean():+.3f}, "
          f"MSE {np.mean(errs**2):.3f} vs bound {mse_bound_ikos(eps, n, params.p, params.q):.3f}")
    print(f"standard error |sum - estimate|/n is about {math.sqrt(np.mean(errs**2)) / n:.2e}")
