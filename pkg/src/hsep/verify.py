"""Cross-module identity suite behind `hsep verify`.

Each check returns (name, residual, threshold); the suite passes when every
residual is at or below its threshold.  `quick` covers the fast closed-form
identities plus small oracle comparisons (< 60 s); `full` adds the finite-q
quadrature comparisons, the vanishing permutation sum, and the conditional
kernels.
"""

from __future__ import annotations

import math
from itertools import combinations

import numpy as np

from . import asep_integral as ai
from . import conditional as cond
from . import kernels as ker
from . import markov_oracle as orc
from . import tasep_formulas as tf
from .kernels import ModelParams
from .pfaffian import (
    identity_suite,
    skew_borel,
    skew_borel_explicit_inverse,
)

__all__ = ["run_checks", "CHECK_LEVELS"]


def _check_pfaffian_identities(seed):
    rep = identity_suite(seed=seed)
    worst = max(rep["checks"].values())
    return [("pfaffian-identity-suite", worst, 1e-9)]


def _check_skew_borel(seed):
    rng = np.random.default_rng(seed)
    out = []
    worst_rec, worst_inv = 0.0, 0.0
    for n in (4, 6, 8):
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        a = a - a.T
        fac = skew_borel(a)
        worst_rec = max(
            worst_rec,
            np.max(np.abs(fac.reconstruct() - a)) / max(np.max(np.abs(a)), 1.0),
        )
        worst_inv = max(
            worst_inv,
            np.max(np.abs(skew_borel_explicit_inverse(a) - np.linalg.inv(fac.r))),
        )
    out.append(("skew-borel-reconstruction", worst_rec, 1e-10))
    out.append(("skew-borel-explicit-inverse", worst_inv, 1e-9))
    return out


def _check_kernel_recurrences(seed):
    rng = np.random.default_rng(seed)
    p = ModelParams(q=0.0, alpha=0.7, gamma=0.0, t=0.9)
    worst = 0.0
    for _ in range(60):
        i, j = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        s = int(rng.integers(1, 4))
        xx = s + int(rng.integers(1, 5))
        xj = int(rng.integers(1, 7))
        lhs = ker.kernel_Q(i + 1, j, s, xj, p) - ker.kernel_Q(i + 1, j, xx, xj, p)
        rhs = sum(ker.kernel_Q(i, j, v, xj, p) for v in range(s, xx))
        worst = max(worst, abs(lhs - rhs))
    anti = 0.0
    for _ in range(60):
        a, b = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        x, y = int(rng.integers(1, 9)), int(rng.integers(1, 9))
        anti = max(
            anti, abs(ker.kernel_Q(a, b, x, y, p) + ker.kernel_Q(b, a, y, x, p))
        )
    quad = 0.0
    for _ in range(10):
        a, b = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        x, y = int(rng.integers(1, 8)), int(rng.integers(1, 8))
        quad = max(
            quad,
            abs(ker.kernel_Q(a, b, x, y, p) - ker.kernel_Q_quadrature(a, b, x, y, p)),
        )
    return [
        ("q-kernel-finite-recurrence", worst, 1e-11),
        ("q-kernel-antisymmetry", anti, 1e-12),
        ("q-kernel-vs-quadrature", quad, 1e-10),
    ]


def _check_phi_algebra(seed):
    worst = 0
    for x in range(1, 7):
        for y in range(1, 7):
            lhs = ker.phi_conv(1, 4, x, y)
            rhs = sum(
                ker.phi_conv(1, 2, x, v) * ker.phi_conv(2, 4, v, y)
                for v in range(1, 14)
            )
            worst = max(worst, abs(lhs - rhs))
            for (l, j, n) in ((1, 2, 4), (3, 2, 4)):
                lhs = sum(
                    ker.phi_conv(l, n, x, v) * ker.phi_neg(j, n, v, y)
                    for v in range(1, 30)
                )
                rhs = ker.phi_conv(l, j, x, y) if l <= j else ker.phi_neg(j, l, x, y)
                worst = max(worst, abs(lhs - rhs))
    return [("phi-convolution-algebra", float(worst), 0.0)]


def _check_symmetrization(seed):
    rng = np.random.default_rng(seed)
    p = ModelParams(q=0.37, alpha=0.8, gamma=0.0, t=1.0)
    worst_fac, worst_f1, worst_alt = 0.0, 0.0, 0.0
    for n in (2, 3, 4):
        w = 0.3 * rng.normal(size=n) + 0.3j * rng.normal(size=n) + 0.3
        s = ai.bc_symmetrization_sum(w, p.q)
        worst_fac = max(worst_fac, abs(s - 1.0 / ai.V_constant(n, p.q)) / abs(s))
        v = ai.eval_F((1,), w, p)
        rhs = p.alpha ** (n - 1) * sum(
            (1 - p.q) ** 2 * wi / ((1 - wi) * (1 - p.q * wi)) for wi in w
        )
        worst_f1 = max(worst_f1, abs(v - rhs) / max(abs(rhs), 1e-12))
    for (y, n) in (((3,), 2), ((4, 2), 3)):
        w = 0.3 * rng.normal(size=n) + 0.3j * rng.normal(size=n) + 0.3
        a = ai.eval_F(y, w, p)
        b = ai.eval_F_alternative(y, w, p)
        worst_alt = max(worst_alt, abs(a - b) / max(abs(a), 1e-12))
    return [
        ("bc-symmetrization-factorization", worst_fac, 1e-9),
        ("f-at-config-1-evaluation", worst_f1, 1e-10),
        ("f-partial-symmetrization-form", worst_alt, 1e-10),
    ]


def _check_eigenvector(seed):
    rng = np.random.default_rng(seed)
    p = ModelParams(q=0.45, alpha=0.7, gamma=0.0, t=1.0)
    worst = 0.0
    for (y, n) in (((), 2), ((3,), 2), ((3, 2), 3), ((2, 1), 2), ((4, 1), 3)):
        for _ in range(4):
            w = 0.25 * rng.normal(size=n) + 0.25j * rng.normal(size=n) + 0.3
            worst = max(worst, ai.test_eigenvector_relation(y, w, p))
    return [("generator-eigenvector-relation", worst, 1e-9)]


def _check_tasep_vs_oracle(seed):
    p = ModelParams(q=0.0, alpha=0.8, gamma=0.0, t=1.0)
    dist = orc.oracle_distribution((), 1.0, p, s_max=16)
    worst = 0.0
    for n in range(0, 4):
        for sites in combinations(range(1, 6), n):
            x = tuple(sorted(sites, reverse=True))
            worst = max(
                worst,
                abs(tf.tasep_transition_probability((), x, 1.0, p) - dist.probability(x)),
            )
    y = (6, 4)
    disty = orc.oracle_distribution(y, 1.0, p, s_max=17)
    for n in (2, 3):
        for sites in combinations(range(1, 8), n):
            x = tuple(sorted(sites, reverse=True))
            worst = max(
                worst,
                abs(tf.tasep_transition_probability(y, x, 1.0, p) - disty.probability(x)),
            )
    return [("tasep-pfaffian-vs-oracle", worst, 1e-9)]


def _check_gt_sum(seed):
    p = ModelParams(q=0.0, alpha=0.6, gamma=0.0, t=0.8)
    out = []
    v, _ = tf.gt_pattern_sum((3, 1), (), 0.8, p)
    f = tf.tasep_transition_probability((), (3, 1), 0.8, p)
    out.append(("gt-decomposition-n2", abs(v - f), 1e-8))
    v, _ = tf.gt_pattern_sum((5, 2), (6, 4), 0.8, p)
    f = tf.tasep_transition_probability((6, 4), (5, 2), 0.8, p)
    out.append(("gt-decomposition-n2-m2", abs(v - f), 1e-8))
    return out


def _check_conditional_quick(seed):
    p = ModelParams(q=0.0, alpha=0.5, gamma=0.0, t=1.0)
    ens = cond.correlation_kernel_bruteforce(2, 0, (), p, 14)
    kern = cond.conditional_kernel(2, 0, (), p)
    worst = 0.0
    for i in (1, 2):
        for j in (1, 2):
            for x1 in (1, 3, 5):
                for x2 in (2, 4):
                    worst = max(
                        worst,
                        np.max(
                            np.abs(
                                ens.kernel_block(i, x1, j, x2)
                                - kern.block(i, x1, j, x2)
                            )
                        ),
                    )
    dist = orc.oracle_distribution((), 1.0, p, s_max=17)
    f = cond.conditional_distribution((2,), (2,), 2, 0, (), 1.0, p)
    o, _ = orc.conditional_event_probability(dist, 2, (2,), (2,))
    return [
        ("conditional-kernel-brute-vs-analytic", worst, 1e-7),
        ("conditional-distribution-vs-oracle", abs(f - o), 1e-6),
    ]


def _check_asep_quadrature(seed):
    p = ModelParams(q=0.3, alpha=0.6, gamma=0.0, t=0.5)
    dist = orc.oracle_distribution((), 0.5, p, s_max=14)
    worst = 0.0
    for n in (1, 2):
        xs = [tuple(sorted(s, reverse=True)) for s in combinations(range(1, 5), n)]
        vals, _ = ai.asep_transition_batch((), n, xs, 0.5, p, nodes=24, tol=1e-8)
        for x, v in vals.items():
            worst = max(worst, abs(v - dist.probability(x)))
    y = (4, 2)
    disty = orc.oracle_distribution(y, 0.5, p, s_max=14)
    xs = [tuple(sorted(s, reverse=True)) for s in combinations(range(1, 5), 2)]
    vals, _ = ai.asep_transition_batch(y, 2, xs, 0.5, p, nodes=24, tol=1e-8)
    for x, v in vals.items():
        worst = max(worst, abs(v - disty.probability(x)))
    return [("asep-integral-vs-oracle", worst, 1e-6)]


def _check_orthogonality(seed):
    p = ModelParams(q=0.3, alpha=0.6, gamma=0.0, t=0.0)
    worst = 0.0
    for n in (1, 2):
        xs = [tuple(sorted(s, reverse=True)) for s in combinations(range(1, 5), n)]
        for m in range(0, n + 1):
            for ys in combinations(range(1, 5), m):
                y = tuple(sorted(ys, reverse=True))
                vals, _ = ai.asep_transition_batch(y, n, xs, 0.0, p, nodes=24, tol=1e-8)
                for x, v in vals.items():
                    worst = max(worst, abs(v - (1.0 if x == y else 0.0)))
    return [("t0-orthogonality", worst, 1e-7)]


def _check_tw_vanishing(seed):
    out = []
    for (x, y, q) in (((3, 1), (4, 2), 0.4), ((5, 3, 1), (6, 4, 2), 0.2)):
        p = ModelParams(q=q, alpha=0.6, gamma=0.0, t=1.0)
        out.append(
            (f"tw-vanishing-sum-n{len(x)}", ai.test_tw_vanishing_sum(x, y, p), 1e-8)
        )
    return out


def _check_conditional_initial(seed):
    p = ModelParams(q=0.0, alpha=0.5, gamma=0.0, t=1.0)
    dist = orc.oracle_distribution((6,), 1.0, p, s_max=17)
    f = cond.conditional_distribution((1, 3), (6, 2), 3, 1, (6,), 1.0, p)
    o, _ = orc.conditional_event_probability(dist, 3, (1, 3), (6, 2))
    ens = cond.correlation_kernel_bruteforce(3, 1, (6,), p, 20)
    kern = cond.conditional_kernel(3, 1, (6,), p)
    worst = 0.0
    for i in (1, 2, 3):
        for x1 in (1, 4):
            for x2 in (2, 5):
                worst = max(
                    worst,
                    np.max(
                        np.abs(
                            ens.kernel_block(i, x1, 2, x2) - kern.block(i, x1, 2, x2)
                        )
                    ),
                )
    return [
        ("conditional-initial-data-vs-oracle", abs(f - o), 1e-6),
        ("conditional-initial-kernel-agreement", worst, 1e-7),
    ]


def _check_fullspace(seed):
    p0 = ModelParams(q=0.0, alpha=0.0, gamma=0.0, t=1.0)
    y = (5, 3)
    f_pf = cond.conditional_distribution((1, 2), (6, 4), 2, 2, y, 1.0, p0)
    f_det = cond.fullspace_distribution((1, 2), (6, 4), 2, y, 1.0)
    out = [("fullspace-pf-vs-det", abs(f_pf - f_det), 1e-8)]
    y3, x3 = (7, 5, 2), (9, 6, 3)
    vals = []
    for al in (0.3, 0.9):
        pa = ModelParams(q=0.0, alpha=al, gamma=0.0, t=1.0)
        vals.append(
            tf.tasep_transition_probability(y3, x3, 1.0, pa) * math.exp(al * 1.0)
        )
    out.append(("schutz-alpha-independence", abs(vals[0] - vals[1]), 1e-10))
    return out


CHECK_LEVELS = {
    "quick": [
        _check_pfaffian_identities,
        _check_skew_borel,
        _check_kernel_recurrences,
        _check_phi_algebra,
        _check_symmetrization,
        _check_tasep_vs_oracle,
        _check_gt_sum,
        _check_conditional_quick,
        _check_fullspace,
    ],
    "full": [
        _check_pfaffian_identities,
        _check_skew_borel,
        _check_kernel_recurrences,
        _check_phi_algebra,
        _check_symmetrization,
        _check_eigenvector,
        _check_tasep_vs_oracle,
        _check_gt_sum,
        _check_conditional_quick,
        _check_conditional_initial,
        _check_asep_quadrature,
        _check_orthogonality,
        _check_tw_vanishing,
        _check_fullspace,
    ],
}


def run_checks(level="quick", seed=0):
    """Run the suite; returns (rows, all_passed) with rows of
    (name, residual, threshold, passed)."""
    if level not in CHECK_LEVELS:
        raise ValueError(f"unknown level {level!r}; use quick or full")
    rows = []
    for fn in CHECK_LEVELS[level]:
        for name, residual, threshold in fn(seed):
            res, thr = float(residual), float(threshold)
            passed = res <= thr if thr > 0 else res == 0.0
            rows.append((name, res, thr, passed))
    return rows, all(r[3] for r in rows)
