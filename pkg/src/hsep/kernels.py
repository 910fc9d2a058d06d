"""The integral kernels of the half-line TASEP layer.

Everything here is a residue evaluation of an explicit contour integral, or
exact integer combinatorics:

* ``kernel_Q``     -- the universal double-contour kernel Q_{a,b}(x,y)
* ``kernel_p``     -- the single-contour column kernel p_i(x)
* ``kernel_U``     -- the origin-residue kernel U_k(z) (depends on N - M)
* ``kernel_Xi``    -- the initial-data kernels Xi_{N-k} and the convolved /
                      virtual variants Xi^(i), Xi^[i)
* ``phi_conv``, ``phi_neg``, ``phi_virtual``, ``theta`` -- the binomial
  convolution algebra with virtual coordinates
* ``conv_reduce``  -- collapses star-convolutions of the closed family
  {Theta-polynomials, Psi, phi} into finite combinations of Q evaluations

The double integral is evaluated by iterated residues: the coupling factor
(u-w)/(1-u-w) equals 1 + (2u-1)/(1-u-w), so the inner w-residues produce an
explicit rational-times-entire function of u whose residues are then taken.
A torus quadrature with unequal radii (the coupling pole stays outside the
inner circle) provides an independent cross-check path.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .numerics import Jet, residue_at

__all__ = [
    "ModelParams",
    "KernelTable",
    "table_for",
    "kernel_Q",
    "kernel_p",
    "kernel_U",
    "kernel_Xi",
    "kernel_Xi_upper",
    "kernel_Xi_virtual",
    "kernel_Q_quadrature",
    "kernel_p_quadrature",
    "phi_conv",
    "phi_neg",
    "phi_virtual",
    "theta",
    "rising",
    "Theta",
    "Psi",
    "PhiPos",
    "PhiNeg",
    "conv_reduce",
]

_CLUSTER_TOL = 1e-8
_IMAG_TOL = 1e-9


@dataclass(frozen=True)
class ModelParams:
    """Model rates: right rate 1, left rate q, injection alpha, exit gamma."""

    q: float = 0.0
    alpha: float = 0.5
    gamma: float = 0.0
    t: float = 1.0

    def __post_init__(self):
        if self.q < 0 or self.alpha < 0 or self.gamma < 0 or self.t < 0:
            raise ValueError("rates and time must be non-negative")

    def require_exact(self):
        """The exact integral formulas all require gamma = 0."""
        if self.gamma != 0.0:
            raise ValueError("exact formulas require gamma = 0")

    def require_tasep(self):
        self.require_exact()
        if self.q != 0.0:
            raise ValueError("Pfaffian formulas require q = 0 (TASEP)")


def _real(value, tol=_IMAG_TOL, what="kernel value"):
    """Drop a numerically-zero imaginary part; complain if it is not tiny."""
    v = complex(value)
    if abs(v.imag) > tol * max(1.0, abs(v)):
        raise ArithmeticError(f"{what} has imaginary part {v.imag:g}")
    return v.real


def _cluster_poles(candidates, tol=_CLUSTER_TOL):
    """Merge (point, order) candidates lying within tol; drop zero orders.

    Colliding poles (alpha = 1, alpha = 1/2, alpha = 0) become a single
    expansion point with the order bounds added, which is always safe.
    """
    merged = []
    for p, m in candidates:
        if m <= 0:
            continue
        p = complex(p)
        for entry in merged:
            if abs(entry[0] - p) <= tol:
                entry[1] += m
                break
        else:
            merged.append([p, m])
    return [(p, m) for p, m in merged]


def _jpow(z, n):
    """z**n that is exact for n == 0 (avoids a needless window truncation)."""
    if n == 0:
        return 1.0
    return z**n


def _outer_coeffs(alpha, power_at_one, smax, with_alpha=True):
    """Coefficients h_s of 1/((w-alpha)^e (w-1)^m) expanded for large |w|.

    The factor 1/(w-c)^m contributes w^(-m) * sum_s C(m-1+s, s) c^s w^(-s);
    h_s is the Cauchy product of the factors, the coefficient of
    w^(-total_degree - s).  Summing *all* enclosed poles through this single
    expansion avoids the catastrophic cancellation that per-pole residues
    suffer when alpha < 1 and the site argument is large.
    """
    h = np.zeros(smax + 1)
    h[0] = 1.0
    if with_alpha:
        pa = alpha ** np.arange(smax + 1)
        h = np.convolve(h, pa)[: smax + 1]
    if power_at_one > 0:
        for _ in range(power_at_one):
            h = np.cumsum(h)  # convolution with the all-ones series of 1/(w-1)
    return h


def _poisson_weights(t, jmax):
    """e^(-t) t^j / j! for j = 0..jmax, computed iteratively (no overflow)."""
    w = np.zeros(jmax + 1)
    w[0] = math.exp(-t)
    for j in range(1, jmax + 1):
        w[j] = w[j - 1] * t / j
    return w


class KernelTable:
    """Memoized kernel evaluations for one parameter set (gamma = 0)."""

    _SMAX = 700  # annulus series cap; terms die off on a Poisson tail scale

    def __init__(self, params: ModelParams):
        params.require_exact()
        self.params = params
        self.memo = {}

    def _pois(self, jmax):
        w = self.memo.get("_pois")
        if w is None or len(w) <= jmax:
            w = _poisson_weights(self.params.t, max(jmax, 64) * 2)
            self.memo["_pois"] = w
        return w

    # -- single-contour kernels ---------------------------------------------

    def p(self, i, x):
        """p_i(x): contour surrounds 0 (iff x > i), alpha and 1.

        Evaluated as the w^(-1) coefficient of the integrand's expansion in
        the annulus beyond all enclosed poles:
        p_i(x) = sum_s h_s e^(-t) t^(x+s) / (x+s)!.
        """
        key = ("p", i, x)
        if key not in self.memo:
            smax = self._SMAX
            h = _outer_coeffs(self.params.alpha, i, smax)
            pois = self._pois(x + smax)
            s = np.arange(smax + 1)
            self.memo[key] = complex(np.dot(h, pois[x + s]))
        return self.memo[key]

    def p_residue_poles(self, i, x):
        """p_i(x) via per-pole jet residues (independent small-site path)."""
        a, t = self.params.alpha, self.params.t

        def f(w):
            return (
                _jpow(w, i - x)
                * ((w - 1.0) * t).exp()
                / ((w - a) * _jpow(w - 1.0, i))
            )

        poles = _cluster_poles([(0.0, x - i), (a, 1), (1.0, i)])
        return sum(residue_at(f, p0, m) for p0, m in poles)

    # -- the double-contour kernel (stable annulus path) ----------------------

    def _f1_annulus(self, a, x, kmax):
        """a_k = [w^(-k-1)] f1(w) for k = 0..kmax, f1 the w-side of Q_{a,b}.

        a_k = sum_s h_s e^(-t) t^(x+s-k) / (x+s-k)!  (terms with negative
        exponent absent).
        """
        key = ("f1ann", a, x, kmax)
        if key not in self.memo:
            smax = self._SMAX
            h = _outer_coeffs(self.params.alpha, a, smax)
            pois = self._pois(x + smax)
            out = np.zeros(kmax + 1, dtype=complex)
            s = np.arange(smax + 1)
            for k in range(kmax + 1):
                j = x + s - k
                ok = j >= 0
                out[k] = np.dot(h[ok], pois[j[ok]])
            self.memo[key] = out
        return self.memo[key]

    def q_kernel(self, a, b, x, y):
        """Q_{a,b}(x,y) by iterated residues, resummation form.

        Inner w-residues first (coupling pole excluded, per the unequal-radii
        contour choice); expanding the coupling as
        (u-w)/(1-u-w) = sum_k (u a_k - a_{k+1}) w^k clears the w-integral and
        the u-integral is then another annulus coefficient extraction.
        """
        key = ("Q", a, b, x, y)
        if key not in self.memo:
            al = self.params.alpha
            kcap = 360
            a_coef = self._f1_annulus(a, x, kcap + 1)
            smax = self._SMAX
            pois = self._pois(y + kcap + smax + 2)
            s = np.arange(smax + 1)
            h = _outer_coeffs(al, b + 1, smax)  # 1/((u-alpha)(u-1)^(b+1))
            total = 0.0 + 0.0j
            tiny_run = 0
            for k in range(kcap + 1):
                # B_delta = [u^(-1)] u^(b-y+delta) e^(t(u-1)) /
                #           ((u-alpha)(u-1)^(b+k+1)); exponent j = y+k+s+1-delta
                j1 = y + k + s  # delta = 1
                j0 = j1 + 1     # delta = 0
                b1 = np.dot(h, pois[j1])
                b0 = np.dot(h, pois[j0])
                term = (-1.0) ** (k + 1) * (a_coef[k] * b1 - a_coef[k + 1] * b0)
                total += term
                # a_k peaks near k ~ x, so only trust a run of tiny terms
                # once the peak has certainly passed.
                if k > x + self.params.t + 8 and abs(term) < 1e-18 * (
                    1.0 + abs(total)
                ):
                    tiny_run += 1
                    if tiny_run >= 25:
                        break
                else:
                    tiny_run = 0
                h = np.cumsum(h)  # raise the (u-1) power for the next k
                if np.max(h) > 1e280:
                    break  # remaining terms are zero against the Poisson tail
            self.memo[key] = al**2 * total
        return self.memo[key]

    def u(self, k, z, n_minus_m):
        """U_k(z): residues at the origin and (for k > N-M) at w = 1.

        The (w-1)^(N-M-k) factor has a pole at 1 once k exceeds N-M; the
        contour must enclose it along with the origin — that choice is what
        makes the summation recurrence U_{k+1}(z) = sum_{y>=z} U_k(y) hold
        and the general-initial-data Pfaffians match the Markov oracle.
        With the 1-pole absent and z - k + N - M + 1 <= 0 the kernel is 0.
        """
        key = ("U", k, z, n_minus_m)
        if key not in self.memo:
            t = self.params.t
            expo = z - k + n_minus_m + 1

            def f(w):
                return (
                    _jpow(w - 1.0, n_minus_m - k)
                    * ((w - 1.0) * t).exp()
                    / _jpow(w, expo)
                )

            poles = _cluster_poles([(0.0, expo), (1.0, k - n_minus_m)])
            self.memo[key] = sum(residue_at(f, p0, m) for p0, m in poles)
        return self.memo[key]

    # -- the double-contour kernel ------------------------------------------

    def _inner_laurent(self, a, x):
        """Laurent data of f1(w) = w^(a-x) e^(t(w-1)) / ((w-alpha)(w-1)^a).

        Returns [(pole, order, coeffs)] with coeffs[r] the Laurent coefficient
        at exponent -1-r, r = 0..order-1, for each enclosed pole of f1.
        """
        key = ("innerL", a, x)
        if key not in self.memo:
            al, t = self.params.alpha, self.params.t

            def f1(w):
                return (
                    _jpow(w, a - x)
                    * ((w - 1.0) * t).exp()
                    / ((w - al) * _jpow(w - 1.0, a))
                )

            poles = _cluster_poles([(0.0, x - a), (al, 1), (1.0, a)])
            data = []
            for p0, m in poles:
                jet = f1(Jet.variable(p0, 2 * m + 6))
                coeffs = [jet.coeff(-1 - r) for r in range(m)]
                data.append((p0, m, coeffs))
            self.memo[key] = data
        return self.memo[key]

    def q_kernel_residue_poles(self, a, b, x, y):
        """Q_{a,b}(x,y) by per-pole jet residues (inner w, then outer u).

        Independent of the annulus path; per-pole contributions cancel
        heavily when alpha < 1 and sites are large, so use for modest
        arguments (cross-checks) only.
        """
        al, t = self.params.alpha, self.params.t
        inner = self._inner_laurent(a, x)

        def outer_integrand(u):
            f2 = (
                _jpow(u, b - y)
                * ((u - 1.0) * t).exp()
                / ((u - al) * _jpow(u - 1.0, b))
            )
            total = 0.0
            for p0, m, coeffs in inner:
                inv = 1.0 / (1.0 - u - p0)
                acc = 0.0
                pw = inv
                for r in range(m):
                    acc = acc + coeffs[r] * pw
                    pw = pw * inv
                total = total + coeffs[0] + (2.0 * u - 1.0) * acc
            return f2 * total

        candidates = [(0.0, y - b), (al, 1), (1.0, b)]
        candidates += [(1.0 - p0, m) for p0, m, _ in inner]
        value = sum(
            residue_at(outer_integrand, p0, m)
            for p0, m in _cluster_poles(candidates)
        )
        return self.params.alpha**2 * value

    # -- initial-data kernels -------------------------------------------------

    def xi(self, n, k, y_k, z):
        """Xi_{N-k}(z) = (-1)^k * residue at 0 of (w-1)^(N-k) e^(t(w-1)) / w^(z-y_k+N-k+1)."""
        key = ("Xi", n, k, y_k, z)
        if key not in self.memo:
            t = self.params.t
            expo = z - y_k + n - k + 1
            if expo <= 0:
                self.memo[key] = 0.0 + 0.0j
            else:
                def f(w):
                    return (
                        _jpow(w - 1.0, n - k)
                        * ((w - 1.0) * t).exp()
                        / _jpow(w, expo)
                    )

                self.memo[key] = (-1.0) ** k * residue_at(f, 0.0, expo)
        return self.memo[key]

    def xi_upper(self, n, i, k, y_k, x):
        """Xi^(i)_{N-k}(x) = phi_{(i,N]} * Xi_{N-k}, as the closed contour form.

        (-1)^i times the integral over a contour around both 0 and 1 of
        (1-u)^(i-k) e^(t(u-1)) / u^(x-y_k+i-k+1).
        """
        key = ("XiU", n, i, k, y_k, x)
        if key not in self.memo:
            t = self.params.t
            expo0 = x - y_k + i - k + 1

            def f(u):
                return (
                    _jpow(1.0 - u, i - k)
                    * ((u - 1.0) * t).exp()
                    / _jpow(u, expo0)
                )

            poles = _cluster_poles([(0.0, expo0), (1.0, k - i)])
            self.memo[key] = (-1.0) ** i * sum(
                residue_at(f, p0, m) for p0, m in poles
            )
        return self.memo[key]

    def xi_virtual(self, n, i, k, y_k):
        """Xi^[i)_{N-k}(dagger_i): the virtual-coordinate pairing."""
        key = ("XiV", n, i, k, y_k)
        if key not in self.memo:
            t = self.params.t
            expo0 = i - k + 1 - y_k

            def f(u):
                return (
                    _jpow(1.0 - u, i - k - 1)
                    * ((u - 1.0) * t).exp()
                    / _jpow(u, expo0)
                )

            poles = _cluster_poles([(0.0, expo0), (1.0, k + 1 - i)])
            self.memo[key] = (-1.0) ** (i + 1) * sum(
                residue_at(f, p0, m) for p0, m in poles
            )
        return self.memo[key]


@lru_cache(maxsize=64)
def table_for(params: ModelParams) -> KernelTable:
    return KernelTable(params)


# -- module-level entry points (thin wrappers over the memo table) ------------


def kernel_Q(a, b, x, y, params):
    return table_for(params).q_kernel(a, b, x, y)


def kernel_p(i, x, params):
    return table_for(params).p(i, x)


def kernel_U(k, z, n_minus_m, params):
    return table_for(params).u(k, z, n_minus_m)


def kernel_Xi(n, k, y_k, z, params):
    return table_for(params).xi(n, k, y_k, z)


def kernel_Xi_upper(n, i, k, y_k, x, params):
    return table_for(params).xi_upper(n, i, k, y_k, x)


def kernel_Xi_virtual(n, i, k, y_k, params):
    return table_for(params).xi_virtual(n, i, k, y_k)


# -- quadrature cross-check path ----------------------------------------------


def _torus_radii(params):
    a = params.alpha
    rw = max(1.0, a, abs(1.0 - a)) + 0.5
    return rw, rw + 2.0


def kernel_Q_quadrature(a, b, x, y, params, nodes=256):
    """Q_{a,b}(x,y) by trapezoid quadrature on circles |w| = R_w, |u| = R_u.

    R_u = R_w + 2 keeps the coupling pole w = 1 - u outside the inner circle
    for every outer node, so this integrates the same iterated-contour object
    as the residue path, fully independently.
    """
    params.require_exact()
    al, t = params.alpha, params.t
    rw, ru = _torus_radii(params)
    w = rw * np.exp(2j * np.pi * np.arange(nodes) / nodes)
    u = ru * np.exp(2j * np.pi * (np.arange(nodes) + 0.5) / nodes)
    wg, ug = np.meshgrid(w, u)
    f1 = wg ** (a - x) * np.exp(t * (wg - 1.0)) / ((wg - al) * (wg - 1.0) ** a)
    f2 = ug ** (b - y) * np.exp(t * (ug - 1.0)) / ((ug - al) * (ug - 1.0) ** b)
    coupling = (ug - wg) / (1.0 - ug - wg)
    val = np.sum(f1 * f2 * coupling * wg * ug) / nodes**2
    return al**2 * val


def kernel_p_quadrature(i, x, params, nodes=256):
    params.require_exact()
    al, t = params.alpha, params.t
    rw, _ = _torus_radii(params)
    w = rw * np.exp(2j * np.pi * np.arange(nodes) / nodes)
    f = w ** (i - x) * np.exp(t * (w - 1.0)) / ((w - al) * (w - 1.0) ** i)
    return np.sum(f * w) / nodes


# -- binomial convolution algebra ---------------------------------------------


def phi_conv(k, l, x, y):
    """phi_{(k,l]}(x,y): iterated half-space convolution of indicator kernels."""
    if k > l:
        return 0
    if k == l:
        return 1 if x == y else 0
    if x > y:
        return 0
    return math.comb(y - x + l - k - 1, l - k - 1)


def phi_neg(j, m, x, y):
    """phi_{-(j,m]}(x,y) = (-1)^(y-x) C(m-j, y-x) on x <= y (any integers)."""
    d = y - x
    if d < 0 or d > m - j:
        return 0
    return (-1) ** d * math.comb(m - j, d)


def rising(x, n):
    """Pochhammer (x)_n = x (x+1) ... (x+n-1); 1 for n = 0, 0 for n < 0."""
    if n < 0:
        return 0
    out = 1
    for i in range(n):
        out *= x + i
    return out


def phi_virtual(k, l, x):
    """phi_{[k,l]}(dagger_k, x) = (x)_{l-k} / (l-k)!, a polynomial in x."""
    if k > l:
        return 0
    n = l - k
    num = rising(x, n)
    if isinstance(num, int):
        from fractions import Fraction

        return Fraction(num, math.factorial(n))
    return num / math.factorial(n)


def theta(i, x):
    """Theta_i(x) = C(x+i-2, x-1), the degree-(i-1) virtual-pairing polynomial."""
    if isinstance(x, int) and x >= 1:
        return math.comb(x + i - 2, x - 1)
    v = phi_virtual(1, i, x)
    return v


# -- symbolic convolution reduction -------------------------------------------


@dataclass(frozen=True)
class Theta:
    """Token: the polynomial Theta_i = phi_{[N-i+1,N]}(dagger, .)."""

    i: int


@dataclass(frozen=True)
class Psi:
    """Token: Psi = Q_{1,1}, or its extension Psi^N_{(k,l)} with indices set."""

    n: int = 0
    k: int = 0
    l: int = 0

    @property
    def extended(self):
        return self.n > 0


@dataclass(frozen=True)
class PhiPos:
    """Token: phi_{(k,l]}."""

    k: int
    l: int


@dataclass(frozen=True)
class PhiNeg:
    """Token: phi_{-(j,m]} (full-space convolution)."""

    j: int
    m: int


def conv_reduce(factors, params=None):
    """Collapse a star-convolution of closed-family factors.

    Handles the reduction rules the conditional-kernel assembly relies on;
    infinite lattice sums are eliminated via the generating-function identity
    sum_{y>=1} u^{1-y} Theta_j(y) = u^j/(u-1)^j.  Returns either a complex
    number (fully paired), a callable of one or two lattice arguments, or a
    PhiPos/PhiNeg token for pure indicator-algebra.  Raises ValueError for
    expressions outside the closed family.
    """
    factors = list(factors)
    if not factors:
        raise ValueError("empty expression")

    # pure phi algebra: compose / annihilate exactly
    if all(isinstance(f, (PhiPos, PhiNeg)) for f in factors):
        cur = factors[0]
        for nxt in factors[1:]:
            if isinstance(cur, PhiPos) and isinstance(nxt, PhiPos):
                if cur.l != nxt.k:
                    raise ValueError("phi composition needs matching indices")
                cur = PhiPos(cur.k, nxt.l)
            elif isinstance(cur, PhiPos) and isinstance(nxt, PhiNeg):
                if cur.l != nxt.m:
                    raise ValueError("phi annihilation needs matching N")
                if cur.k <= nxt.j:
                    cur = PhiPos(cur.k, nxt.j)
                else:
                    cur = PhiNeg(nxt.j, cur.k)
            else:
                raise ValueError("unsupported phi combination")
        return cur

    if params is None:
        raise ValueError("params required for Psi reductions")
    tab = table_for(params)

    # Psi^N_{(k,l)} alone -> Q_{N-k+1, N-l+1}
    if len(factors) == 1 and isinstance(factors[0], Psi) and factors[0].extended:
        f = factors[0]
        return lambda x, y: tab.q_kernel(f.n - f.k + 1, f.n - f.l + 1, x, y)

    # Theta_i * Psi * Theta_j -> Q_{i+1,j+1}(1,1)
    if (
        len(factors) == 3
        and isinstance(factors[0], Theta)
        and isinstance(factors[1], Psi)
        and not factors[1].extended
        and isinstance(factors[2], Theta)
    ):
        return tab.q_kernel(factors[0].i + 1, factors[2].i + 1, 1, 1)

    # Psi * Theta_j -> x |-> Q_{1, j+1}(x, 1)
    if (
        len(factors) == 2
        and isinstance(factors[0], Psi)
        and not factors[0].extended
        and isinstance(factors[1], Theta)
    ):
        j = factors[1].i
        return lambda x: tab.q_kernel(1, j + 1, x, 1)

    # Theta_i * Psi -> y |-> Q_{i+1, 1}(1, y)
    if (
        len(factors) == 2
        and isinstance(factors[0], Theta)
        and isinstance(factors[1], Psi)
        and not factors[1].extended
    ):
        i = factors[0].i
        return lambda y: tab.q_kernel(i + 1, 1, 1, y)

    raise ValueError("expression outside the closed convolution family")
