"""The weak-form loss of the exact solution is pure quadrature error.

Feeding the analytic solution of each benchmark problem into its
weak-form terms should give zero up to two error sources: the trapezium
rule on the default grid, and the finite-difference stencils standing in
for analytic derivatives.  Re-evaluating on a 10x finer grid shrinks the
quadrature part, so the default-grid loss should track the refined
estimate closely, and both should be tiny compared to the loss of an
untrained model.
"""
import numpy as np

from vqpinn.problems import (
    DampedOscillator,
    Laplace2D,
    Linear2D,
    Region,
    StationaryBurgers,
)

REFINE = 10


def fd_truth_evaluator(problem):
    sol = problem.solution

    def evaluate(region, X, req):
        X = np.asarray(X, dtype=float)
        if req is None:
            return sol(X)

        def at(delta):
            shifted = X.copy()
            shifted[:, req.dim] += delta
            return sol(shifted)

        if req.order == 1:
            h = 1e-4
            return (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h)
        h = 1e-3
        return (-at(2 * h) + 16 * at(h) - 30 * at(0.0) + 16 * at(-h) - at(-2 * h)) / (
            12 * h * h
        )

    return evaluate


def regions_1d(problem, refine=1):
    (lo, hi), = problem.domain
    cuts = [lo, *problem.default_splits[0], hi]
    return [
        Region(((a, b),), (np.linspace(a, b, problem.points_per_subdomain * refine),))
        for a, b in zip(cuts[:-1], cuts[1:])
    ]


def segments(axis, splits, lo, hi):
    # each segment must reach its cut coordinates even when the global grid
    # has no point there, otherwise the union of regions misses a band
    cuts = [lo, *splits, hi]
    out = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        seg = axis[(axis >= a - 1e-12) & (axis <= b + 1e-12)]
        if seg.size == 0 or seg[0] > a + 1e-12:
            seg = np.concatenate([[a], seg])
        if seg[-1] < b - 1e-12:
            seg = np.concatenate([seg, [b]])
        out.append((a, b, seg))
    return out


def regions_2d(problem, refine=1):
    xs, ys = problem.default_axis_grids()
    (xlo, xhi), (ylo, yhi) = problem.domain
    out = []
    for xa, xb, sx in segments(xs, problem.default_splits[0], xlo, xhi):
        for ya, yb, sy in segments(ys, problem.default_splits[1], ylo, yhi):
            if refine > 1:
                sx_r = np.linspace(xa, xb, sx.size * refine)
                sy_r = np.linspace(ya, yb, sy.size * refine)
                out.append(Region(((xa, xb), (ya, yb)), (sx_r, sy_r)))
            else:
                out.append(Region(((xa, xb), (ya, yb)), (sx, sy)))
    return out


def weak_loss_of_truth(problem, refine=1):
    regions = (regions_1d if problem.input_dim == 1 else regions_2d)(problem, refine)
    evaluate = fd_truth_evaluator(problem)
    family = problem.test_functions(seed=0)
    terms = [problem.weak_term(v, evaluate, regions) for v in family]
    return float(np.mean(np.square(terms)))


def main():
    for problem in (DampedOscillator(), StationaryBurgers(), Linear2D(), Laplace2D()):
        coarse = weak_loss_of_truth(problem, refine=1)
        fine = weak_loss_of_truth(problem, refine=REFINE)
        print(f"{problem.name:12s} default grid {coarse:.3e}   "
              f"{REFINE}x finer {fine:.3e}   ratio {coarse / max(fine, 1e-300):8.2f}")


if __name__ == "__main__":
    main()
