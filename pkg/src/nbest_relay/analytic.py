"""Closed-form and high-SNR BER / outage of N'th-best DF relay selection.

Every finite-SNR density here is a short alternating sum of exponentials in
the SNR variable.  BER, CDF and mean then follow by applying one linear
functional to each exponential ``exp(-r x)``:

* density at ``x``      -> ``exp(-r x)``
* ``0.5 * int erfc(sqrt(x)) f(x) dx`` -> ``omega(r)``
* CDF at ``phi``        -> ``chi(1/r, phi)``
* mean                  -> ``1 / r**2``

The ``(T(a) - T(b)) / (b - a)`` pairs that appear when two rates coincide are
routed through :func:`_divdiff`, which switches to the derivative limit.

The alternating sums cancel badly at high SNR (the result is many orders of
magnitude below the individual terms), so the scalar functionals (BER, CDF,
outage, mean) are evaluated with mpmath at a working precision scaled to the
SNR.  Densities stay in numpy for fast vectorised evaluation.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import mpmath
import numpy as np
from scipy.special import comb, gammaln

__all__ = [
    "AvgSnrSet",
    "SelectionConfig",
    "omega",
    "omega_prime",
    "chi",
    "rate_threshold",
    "state_weights",
    "pdf_gamma_sr_n",
    "cdf_gamma_sr_n",
    "pdf_gamma_rnd",
    "cdf_gamma_rnd",
    "mean_gamma_rnd",
    "pdf_gamma_srnd",
    "cdf_gamma_srnd",
    "pdf_gamma_sr_bad",
    "cdf_gamma_sr_bad",
    "ber_relay_nth",
    "ber_mrc_nth",
    "ber_er_nth",
    "ber_nth_good",
    "ber_relay_bad",
    "ber_mrc_bad",
    "ber_er_bad",
    "ber_bad_state",
    "ber_overall",
    "ber_relay_overall",
    "outage_sd",
    "outage_nth_good",
    "outage_joint_nth",
    "outage_mrc_bad",
    "outage_bad_state",
    "outage_overall",
    "OUTAGE_JOINT_MODES",
    "asym_pdf_sr_n",
    "asym_pdf_rnd",
    "asym_pdf_srnd",
    "asym_ber_relay",
    "asym_ber_mrc",
    "asym_mean_rnd",
    "asym_ber_dest",
    "asym_pdf_sr_bad",
    "asym_ber_relay_bad",
    "asym_ber_bad",
    "asym_ber_overall",
    "asym_outage_sr_n",
    "asym_outage_sd",
    "asym_outage_srnd",
    "asym_outage",
    "asym_outage_sr_bad",
    "asym_outage_mrc_bad",
    "asym_outage_bad",
    "asym_outage_overall",
    "diversity_order",
    "CURVES",
    "curve",
]

# Relative gap below which two exponential rates are treated as equal.
_COINCIDENT_REL = 1e-6
_OMEGA_SERIES_BELOW = 1e-6
_OMEGA_PRIME_SERIES_BELOW = 1e-5


@dataclass(frozen=True)
class AvgSnrSet:
    """Average per-link SNRs (linear) plus the impulsive power ratio."""

    g_SR: float
    g_RD: float
    g_SD: float
    rho: float = 1.0

    def __post_init__(self):
        for name in ("g_SR", "g_RD", "g_SD"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        if not self.rho >= 1:
            raise ValueError(f"rho must be >= 1, got {self.rho!r}")

    @property
    def g_a(self) -> float:
        """Harmonic-mean scale of the max-min metric ``min(g_SR, g_RD)``."""
        return self.g_SR * self.g_RD / (self.g_SR + self.g_RD)

    @property
    def g_SR_B(self) -> float:
        return self.g_SR / self.rho

    def scaled(self, factor: float) -> "AvgSnrSet":
        return AvgSnrSet(self.g_SR * factor, self.g_RD * factor, self.g_SD * factor, self.rho)


@dataclass(frozen=True)
class SelectionConfig:
    M: int
    N: int = 1
    p_B: float = 0.01
    R: float = 1.0

    def __post_init__(self):
        _check_mn(self.M, self.N)
        if not 0 <= self.p_B < 1:
            raise ValueError(f"p_B must lie in [0, 1), got {self.p_B!r}")
        if not self.R > 0:
            raise ValueError(f"R must be positive, got {self.R!r}")

    @property
    def phi(self) -> float:
        return rate_threshold(self.R)


class _Kernel(NamedTuple):
    value: Callable[[float], object]
    deriv: Callable[[float], object]


def _check_mn(M, N):
    if int(M) != M or M < 1:
        raise ValueError(f"M must be a positive integer, got {M!r}")
    if int(N) != N or not 1 <= N <= M:
        raise ValueError(f"N must satisfy 1 <= N <= M={M}, got {N!r}")


def _neumaier(terms):
    """Compensated elementwise sum of a list of scalars or equal-shape arrays.

    mpmath terms are summed exactly with ``mpmath.fsum``.
    """
    if any(isinstance(t, mpmath.mpf) for t in terms):
        return mpmath.fsum(terms)
    total = np.zeros_like(np.asarray(terms[0], dtype=float))
    comp = np.zeros_like(total)
    for term in terms:
        term = np.asarray(term, dtype=float)
        t = total + term
        big = np.abs(total) >= np.abs(term)
        comp = comp + np.where(big, (total - t) + term, (term - t) + total)
        total = t
    out = total + comp
    return float(out) if out.ndim == 0 else out


def _finite(value, what):
    if not np.all(np.isfinite(value)):
        raise FloatingPointError(f"non-finite value in {what}")
    return value


def _divdiff(kernel: _Kernel, a: float, b: float):
    """``(T(a) - T(b)) / (b - a)``; tends to ``-T'(a)`` as ``b -> a``."""
    tol = _COINCIDENT_REL
    if isinstance(a, mpmath.mpf) or isinstance(b, mpmath.mpf):
        tol = mpmath.mpf(10) ** (-(mpmath.mp.dps // 3))
    if abs(b - a) <= tol * max(abs(a), abs(b)):
        return -kernel.deriv(0.5 * (a + b))
    return (kernel.value(a) - kernel.value(b)) / (b - a)


# --------------------------------------------------------------------------
# special functions
# --------------------------------------------------------------------------

def omega(theta):
    """``0.5 * int_0^inf erfc(sqrt(x)) exp(-theta x) dx``.

    Equal to ``(1 - 1/sqrt(1+theta)) / (2 theta)`` with the limit 1/4 at 0.
    """
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < 0):
        raise ValueError("omega is defined for theta >= 0")
    small = theta < _OMEGA_SERIES_BELOW
    safe = np.where(small, 1.0, theta)
    direct = -np.expm1(-0.5 * np.log1p(safe)) / (2.0 * safe)
    series = 0.25 - 3.0 * theta / 16.0 + 5.0 * theta**2 / 32.0
    out = np.where(small, series, direct)
    return float(out) if out.ndim == 0 else out


def omega_prime(theta):
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < 0):
        raise ValueError("omega is defined for theta >= 0")
    small = theta < _OMEGA_PRIME_SERIES_BELOW
    safe = np.where(small, 1.0, theta)
    inv_sqrt = 1.0 / np.sqrt(1.0 + safe)
    direct = (safe * inv_sqrt / (1.0 + safe) + 2.0 * np.expm1(-0.5 * np.log1p(safe))) / (4.0 * safe**2)
    series = -3.0 / 16.0 + 5.0 * theta / 16.0 - 105.0 * theta**2 / 256.0
    out = np.where(small, series, direct)
    return float(out) if out.ndim == 0 else out


def chi(a, x):
    """``a * (1 - exp(-x / a))``."""
    a = np.asarray(a, dtype=float)
    if np.any(a <= 0):
        raise ValueError("chi requires a > 0")
    out = -a * np.expm1(-np.asarray(x, dtype=float) / a)
    return float(out) if out.ndim == 0 else out


def rate_threshold(R: float) -> float:
    """Outage SNR threshold ``2**(2R) - 1`` of the two-slot protocol."""
    return 2.0 ** (2.0 * R) - 1.0


def state_weights(M: int, p_B: float):
    """Probabilities that the N'th best relay is the first good one, N = 1..M,
    followed by the all-bad probability ``p_B**M``."""
    weights = [(1.0 - p_B) * p_B ** (n - 1) for n in range(1, M + 1)]
    return weights, p_B**M


def _omega_mp(theta):
    if theta == 0:
        return mpmath.mpf(1) / 4
    return -mpmath.expm1(-mpmath.log1p(theta) / 2) / (2 * theta)


def _omega_prime_mp(theta):
    if theta == 0:
        return mpmath.mpf(-3) / 16
    em = mpmath.expm1(-mpmath.log1p(theta) / 2)
    return (theta / (1 + theta) ** mpmath.mpf(1.5) + 2 * em) / (4 * theta**2)


def _chi_mp(a, x):
    return -a * mpmath.expm1(-mpmath.mpf(x) / a)


def _pdf_kernel(x) -> _Kernel:
    x = np.asarray(x, dtype=float)
    return _Kernel(lambda r: np.exp(-r * x), lambda r: -x * np.exp(-r * x))


def _exp_kernel_mp(x) -> _Kernel:
    x = mpmath.mpf(x)
    return _Kernel(lambda r: mpmath.exp(-r * x), lambda r: -x * mpmath.exp(-r * x))


def _cdf_kernel(phi) -> _Kernel:
    """``int_0^phi exp(-r x) dx`` (high precision, scalar ``phi``)."""
    phi = mpmath.mpf(phi)

    def value(r):
        return _chi_mp(1 / r, phi)

    def deriv(r):
        return (r * phi * mpmath.exp(-r * phi) + mpmath.expm1(-r * phi)) / r**2

    return _Kernel(value, deriv)


_BER_KERNEL = _Kernel(_omega_mp, _omega_prime_mp)
_MEAN_KERNEL = _Kernel(lambda r: 1 / r**2, lambda r: -2 / r**3)


def _working_dps(snrs: AvgSnrSet, M: int) -> int:
    # digits lost to cancellation grow like (M + 1) * log10(SNR)
    top = max(float(snrs.g_SR), float(snrs.g_RD), float(snrs.g_SD), float(snrs.rho), 10.0)
    return 30 + (M + 2) * math.ceil(math.log10(top))


def _to_mp(snrs: AvgSnrSet) -> AvgSnrSet:
    return AvgSnrSet(mpmath.mpf(snrs.g_SR), mpmath.mpf(snrs.g_RD), mpmath.mpf(snrs.g_SD), mpmath.mpf(snrs.rho))


def _high_precision(fn):
    """Run ``fn`` under mpmath at an SNR-dependent precision; return floats.

    The wrapped function must take an :class:`AvgSnrSet`; the largest integer
    argument is read as the relay count.
    """

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        snrs = next(a for a in (*args, *kwargs.values()) if isinstance(a, AvgSnrSet))
        M = max((a for a in args if isinstance(a, (int, np.integer)) and not isinstance(a, bool)), default=1)
        with mpmath.workdps(_working_dps(snrs, int(M))):
            args = [_to_mp(a) if isinstance(a, AvgSnrSet) else a for a in args]
            kwargs = {k: _to_mp(v) if isinstance(v, AvgSnrSet) else v for k, v in kwargs.items()}
            out = fn(*args, **kwargs)
        if isinstance(out, tuple):
            return tuple(float(v) for v in out)
        return float(out)

    return wrapper


def _cdf_map(fn, x):
    """Apply a scalar high-precision CDF over an array of points."""
    arr = np.asarray(x, dtype=float)
    out = np.array([fn(float(v)) for v in arr.ravel()]).reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# order-statistic densities of the N'th best relay (selected relay in G)
# --------------------------------------------------------------------------

def _c_m(M, N):
    return M * comb(M - 1, N - 1, exact=True)


def _alternating(M, N):
    for k in range(M - N + 1):
        yield k, (-1) ** k * comb(M - N, k, exact=True)


def _hop_functional(kernel, M, N, g_self, g_other, g_a):
    """One hop of the N'th best relay: the SR hop uses (g_SR, g_RD), the RD hop
    the mirrored pair.  Each summand is ``g_a/((k+N) g_self - g_a)`` times a
    difference of two exponentials, rewritten as ``(1/g_self) * divdiff``."""
    _check_mn(M, N)
    a = 1.0 / g_self
    terms = []
    for k, c in _alternating(M, N):
        b = (k + N) / g_a
        terms.append(c / (g_other * g_self) * _divdiff(kernel, a, b))
        terms.append(c / g_self * kernel.value(b))
    return _c_m(M, N) * _neumaier(terms)


def _combined_functional(kernel, M, N, s: AvgSnrSet):
    """Functional of ``gamma_SD + gamma_RND`` (MRC at the destination)."""
    _check_mn(M, N)
    u, v = 1.0 / s.g_SD, 1.0 / s.g_RD
    terms = []
    for k, c in _alternating(M, N):
        b = (k + N) / s.g_a
        d_uv = _divdiff(kernel, u, v)
        d_ub = _divdiff(kernel, u, b)
        # b > v whenever k + N >= 1, so this prefactor is never singular
        terms.append(c / s.g_SR * (v / (b - v)) * u * (d_uv - d_ub))
        terms.append(c / s.g_RD * u * d_ub)
    return _c_m(M, N) * _neumaier(terms)


def pdf_gamma_sr_n(x, M: int, N: int, snrs: AvgSnrSet):
    """Density of the source -> N'th-best-relay SNR."""
    return _finite(_hop_functional(_pdf_kernel(x), M, N, snrs.g_SR, snrs.g_RD, snrs.g_a), "pdf_gamma_sr_n")


@_high_precision
def _cdf_sr_n(x, M, N, snrs):
    return _hop_functional(_cdf_kernel(x), M, N, snrs.g_SR, snrs.g_RD, snrs.g_a)


def cdf_gamma_sr_n(x, M: int, N: int, snrs: AvgSnrSet):
    """CDF of the source -> N'th-best-relay SNR (outage at the relay)."""
    _check_mn(M, N)
    return _finite(_cdf_map(lambda v: _cdf_sr_n(v, M, N, snrs), x), "cdf_gamma_sr_n")


def pdf_gamma_rnd(x, M: int, N: int, snrs: AvgSnrSet):
    """Density of the N'th-best-relay -> destination SNR."""
    return _finite(_hop_functional(_pdf_kernel(x), M, N, snrs.g_RD, snrs.g_SR, snrs.g_a), "pdf_gamma_rnd")


@_high_precision
def _cdf_rnd(x, M, N, snrs):
    return _hop_functional(_cdf_kernel(x), M, N, snrs.g_RD, snrs.g_SR, snrs.g_a)


def cdf_gamma_rnd(x, M: int, N: int, snrs: AvgSnrSet):
    _check_mn(M, N)
    return _finite(_cdf_map(lambda v: _cdf_rnd(v, M, N, snrs), x), "cdf_gamma_rnd")


@_high_precision
def mean_gamma_rnd(M: int, N: int, snrs: AvgSnrSet) -> float:
    return _hop_functional(_MEAN_KERNEL, M, N, snrs.g_RD, snrs.g_SR, snrs.g_a)


def pdf_gamma_srnd(theta, M: int, N: int, snrs: AvgSnrSet):
    """Density of the MRC output SNR ``gamma_SD + gamma_RND``."""
    return _finite(_combined_functional(_pdf_kernel(theta), M, N, snrs), "pdf_gamma_srnd")


@_high_precision
def _cdf_srnd(theta, M, N, snrs):
    return _combined_functional(_cdf_kernel(theta), M, N, snrs)


def cdf_gamma_srnd(theta, M: int, N: int, snrs: AvgSnrSet):
    _check_mn(M, N)
    return _finite(_cdf_map(lambda v: _cdf_srnd(v, M, N, snrs), theta), "cdf_gamma_srnd")


# --------------------------------------------------------------------------
# all relays in B: partial selection on the SR hop only
# --------------------------------------------------------------------------

def _bad_functional(kernel, M, g_b):
    _check_mn(M, 1)
    terms = [(-1) ** k * comb(M - 1, k, exact=True) * kernel.value((k + 1) / g_b) for k in range(M)]
    return M / g_b * _neumaier(terms)


def pdf_gamma_sr_bad(y, M: int, snrs: AvgSnrSet):
    """Density of ``max_m gamma_SR_m / rho`` (best relay when all are in B)."""
    return _finite(_bad_functional(_pdf_kernel(y), M, snrs.g_SR_B), "pdf_gamma_sr_bad")


@_high_precision
def _cdf_sr_bad(y, M, snrs):
    return _bad_functional(_cdf_kernel(y), M, snrs.g_SR_B)


def cdf_gamma_sr_bad(y, M: int, snrs: AvgSnrSet):
    _check_mn(M, 1)
    return _finite(_cdf_map(lambda v: _cdf_sr_bad(v, M, snrs), y), "cdf_gamma_sr_bad")


# --------------------------------------------------------------------------
# BER
# --------------------------------------------------------------------------

@_high_precision
def ber_relay_nth(M: int, N: int, snrs: AvgSnrSet) -> float:
    """BPSK error probability at the N'th best relay (relay in G)."""
    return _hop_functional(_BER_KERNEL, M, N, snrs.g_SR, snrs.g_RD, snrs.g_a)


@_high_precision
def ber_mrc_nth(M: int, N: int, snrs: AvgSnrSet) -> float:
    """Destination MRC error probability when the relay forwarded correctly."""
    return _combined_functional(_BER_KERNEL, M, N, snrs)


def ber_er_nth(M: int, N: int, snrs: AvgSnrSet) -> float:
    """Destination error probability when the relay forwarded a wrong bit
    (the mean-SNR ratio approximation)."""
    g_rnd = mean_gamma_rnd(M, N, snrs)
    return g_rnd / (g_rnd + float(snrs.g_SD))


def _compose(p_relay, p_er, p_ner):
    return p_relay * p_er + (1.0 - p_relay) * p_ner


def ber_nth_good(M: int, N: int, snrs: AvgSnrSet):
    """``(relay BER, end-to-end BER)`` when the N'th best relay is selected in G."""
    p_relay = ber_relay_nth(M, N, snrs)
    return p_relay, _compose(p_relay, ber_er_nth(M, N, snrs), ber_mrc_nth(M, N, snrs))


@_high_precision
def ber_relay_bad(M: int, snrs: AvgSnrSet) -> float:
    return _bad_functional(_BER_KERNEL, M, snrs.g_SR_B)


def _tau(g):
    return 1 - mpmath.sqrt(g / (1 + g))


@_high_precision
def ber_mrc_bad(snrs: AvgSnrSet) -> float:
    """Two-branch MRC BER over independent Rayleigh branches of means g_SD, g_RD."""
    a, b = snrs.g_SD, snrs.g_RD
    if abs(a - b) <= mpmath.mpf(10) ** (-(mpmath.mp.dps // 3)) * max(a, b):
        g = (a + b) / 2
        # d/dg [g tau(g)]
        return (_tau(g) - mpmath.sqrt(g / (1 + g)) / (2 * (1 + g))) / 2
    return (a * _tau(a) - b * _tau(b)) / (2 * (a - b))


def ber_er_bad(snrs: AvgSnrSet) -> float:
    return snrs.g_RD / (snrs.g_RD + snrs.g_SD)


def ber_bad_state(M: int, snrs: AvgSnrSet) -> float:
    """End-to-end BER when every relay is in B and the partial rule picks one."""
    return _compose(ber_relay_bad(M, snrs), ber_er_bad(snrs), ber_mrc_bad(snrs))


def ber_overall(M: int, snrs: AvgSnrSet, p_B: float) -> float:
    """End-to-end BER averaged over which rank ends up selected."""
    weights, w_bad = state_weights(M, p_B)
    terms = [w * ber_nth_good(M, n, snrs)[1] for n, w in enumerate(weights, start=1)]
    if w_bad > 0:
        terms.append(w_bad * ber_bad_state(M, snrs))
    return _neumaier(terms)


def ber_relay_overall(M: int, snrs: AvgSnrSet, p_B: float) -> float:
    weights, w_bad = state_weights(M, p_B)
    terms = [w * ber_relay_nth(M, n, snrs) for n, w in enumerate(weights, start=1)]
    if w_bad > 0:
        terms.append(w_bad * ber_relay_bad(M, snrs))
    return _neumaier(terms)


# --------------------------------------------------------------------------
# outage
# --------------------------------------------------------------------------

OUTAGE_JOINT_MODES = ("product", "exact")


def _check_joint(joint):
    if joint not in OUTAGE_JOINT_MODES:
        raise ValueError(f"joint must be one of {OUTAGE_JOINT_MODES}, got {joint!r}")


def _check_phi(phi):
    if not phi > 0:
        raise ValueError("phi must be positive")


@_high_precision
def outage_sd(snrs: AvgSnrSet, phi: float) -> float:
    return _chi_mp(snrs.g_SD, phi) / snrs.g_SD


@_high_precision
def outage_joint_nth(M: int, N: int, snrs: AvgSnrSet, phi: float) -> float:
    """``P{gamma_SR_N >= phi, gamma_RND + gamma_SD < phi}`` without factorising.

    With ``z < phi <= x`` the bottleneck ``min(x, z)`` is always ``z``, so the
    joint density of the selected pair splits into an SR tail times a sum of
    exponentials in ``z``, and the ``gamma_SD`` CDF integrates in closed form.
    """
    _check_mn(M, N)
    _check_phi(phi)
    phi = mpmath.mpf(phi)
    u = 1 / snrs.g_SD
    cdf_k, exp_k = _cdf_kernel(phi), _exp_kernel_mp(phi)
    terms = []
    for k, c in _alternating(M, N):
        r = 1 / snrs.g_RD + (k + N - 1) / snrs.g_a
        terms.append(c * cdf_k.value(r))
        terms.append(-c * _divdiff(exp_k, u, r))
    return _c_m(M, N) * mpmath.exp(-phi / snrs.g_SR) / snrs.g_RD * _neumaier(terms)


def outage_nth_good(M: int, N: int, snrs: AvgSnrSet, phi: float, joint: str = "product") -> float:
    """End-to-end outage with the N'th best relay in G.

    ``joint="product"`` approximates ``P{gamma_SR_N >= phi, gamma_RND +
    gamma_SD < phi}`` by the product of its marginals; ``"exact"`` keeps the
    dependence between the two hops of the selected relay.
    """
    _check_joint(joint)
    _check_phi(phi)
    p_sr = cdf_gamma_sr_n(phi, M, N, snrs)
    if joint == "exact":
        first = outage_joint_nth(M, N, snrs, phi)
    else:
        first = (1.0 - p_sr) * cdf_gamma_srnd(phi, M, N, snrs)
    return first + p_sr * outage_sd(snrs, phi)


@_high_precision
def outage_mrc_bad(snrs: AvgSnrSet, phi: float, joint: str = "product") -> float:
    """``P{gamma_SD + gamma_RD < phi}`` for an unselected RD hop.

    ``"product"`` uses ``0.5 * F_SD * F_RD``; ``"exact"`` the CDF of a sum of
    two independent exponentials.
    """
    _check_joint(joint)
    a, b = snrs.g_SD, snrs.g_RD
    if joint == "product":
        return _chi_mp(a, phi) * _chi_mp(b, phi) / (2 * a * b)
    if abs(a - b) <= mpmath.mpf(10) ** (-(mpmath.mp.dps // 3)) * max(a, b):
        g = (a + b) / 2
        return 1 - mpmath.exp(-phi / g) * (1 + phi / g)
    return 1 - (a * mpmath.exp(-phi / a) - b * mpmath.exp(-phi / b)) / (a - b)


def outage_bad_state(M: int, snrs: AvgSnrSet, phi: float, joint: str = "product") -> float:
    p_sr = cdf_gamma_sr_bad(phi, M, snrs)
    return p_sr * outage_sd(snrs, phi) + (1.0 - p_sr) * outage_mrc_bad(snrs, phi, joint)


def outage_overall(M: int, snrs: AvgSnrSet, p_B: float, phi: float, joint: str = "product") -> float:
    weights, w_bad = state_weights(M, p_B)
    terms = [w * outage_nth_good(M, n, snrs, phi, joint) for n, w in enumerate(weights, start=1)]
    if w_bad > 0:
        terms.append(w_bad * outage_bad_state(M, snrs, phi, joint))
    return _neumaier(terms)


# --------------------------------------------------------------------------
# high-SNR equivalents
# --------------------------------------------------------------------------

def _asym_coef(M, N, g_link, g_a):
    _check_mn(M, N)
    return _c_m(M, N) / g_link * (1.0 / g_a) ** (M - N)


def asym_pdf_sr_n(x, M: int, N: int, snrs: AvgSnrSet):
    return _asym_coef(M, N, snrs.g_SR, snrs.g_a) * np.asarray(x, dtype=float) ** (M - N)


def asym_pdf_rnd(z, M: int, N: int, snrs: AvgSnrSet):
    return _asym_coef(M, N, snrs.g_RD, snrs.g_a) * np.asarray(z, dtype=float) ** (M - N)


def asym_pdf_srnd(theta, M: int, N: int, snrs: AvgSnrSet):
    n = M - N
    return _asym_coef(M, N, snrs.g_RD, snrs.g_a) / (n + 1) * np.asarray(theta, dtype=float) ** (n + 1) / snrs.g_SD


def asym_ber_relay(M: int, N: int, snrs: AvgSnrSet) -> float:
    n = M - N
    return _asym_coef(M, N, snrs.g_SR, snrs.g_a) * math.exp(gammaln(n + 1.5)) / (2.0 * math.sqrt(math.pi) * (n + 1))


def asym_ber_mrc(M: int, N: int, snrs: AvgSnrSet) -> float:
    n = M - N
    return (
        _asym_coef(M, N, snrs.g_RD, snrs.g_a)
        / (2.0 * math.sqrt(math.pi) * (n + 1) * snrs.g_SD)
        * math.exp(gammaln(n + 2.5))
        / (n + 2)
    )


def asym_mean_rnd(M: int, N: int, snrs: AvgSnrSet) -> float:
    _check_mn(M, N)
    return _c_m(M, N) / snrs.g_RD * snrs.g_a**2 * math.exp(gammaln(M - N + 2))


def asym_ber_dest(M: int, N: int, snrs: AvgSnrSet) -> float:
    p_relay = asym_ber_relay(M, N, snrs)
    g_rnd = asym_mean_rnd(M, N, snrs)
    return _compose(p_relay, g_rnd / (g_rnd + snrs.g_SD), asym_ber_mrc(M, N, snrs))


def asym_pdf_sr_bad(y, M: int, snrs: AvgSnrSet):
    return M * (1.0 / snrs.g_SR_B) ** M * np.asarray(y, dtype=float) ** (M - 1)


def asym_ber_relay_bad(M: int, snrs: AvgSnrSet) -> float:
    return (1.0 / snrs.g_SR_B) ** M * math.exp(gammaln(M + 0.5)) / (2.0 * math.sqrt(math.pi))


def asym_ber_bad(M: int, snrs: AvgSnrSet) -> float:
    return _compose(asym_ber_relay_bad(M, snrs), ber_er_bad(snrs), ber_mrc_bad(snrs))


def asym_ber_overall(M: int, snrs: AvgSnrSet, p_B: float) -> float:
    weights, w_bad = state_weights(M, p_B)
    terms = [w * asym_ber_dest(M, n, snrs) for n, w in enumerate(weights, start=1)]
    if w_bad > 0:
        terms.append(w_bad * asym_ber_bad(M, snrs))
    return _neumaier(terms)


def asym_outage_sr_n(M: int, N: int, snrs: AvgSnrSet, phi: float) -> float:
    n = M - N
    return _asym_coef(M, N, snrs.g_SR, snrs.g_a) * phi ** (n + 1) / (n + 1)


def asym_outage_sd(snrs: AvgSnrSet, phi: float) -> float:
    return phi / snrs.g_SD


def asym_outage_srnd(M: int, N: int, snrs: AvgSnrSet, phi: float) -> float:
    n = M - N
    return _asym_coef(M, N, snrs.g_RD, snrs.g_a) / (n + 1) / snrs.g_SD * phi ** (n + 2) / (n + 2)


def asym_outage(M: int, N: int, snrs: AvgSnrSet, phi: float) -> float:
    """High-SNR outage with the N'th best relay in G; a pure power law of
    order ``M - N + 2`` in the common SNR scale."""
    _check_mn(M, N)
    n = M - N
    lead = _c_m(M, N) / (n + 1) / snrs.g_SD * (1.0 / snrs.g_a) ** n * phi ** (n + 2)
    return lead * (1.0 / ((n + 2) * snrs.g_RD) + 1.0 / snrs.g_SR)


def asym_outage_sr_bad(M: int, snrs: AvgSnrSet, phi: float) -> float:
    return (phi / snrs.g_SR_B) ** M


def asym_outage_mrc_bad(snrs: AvgSnrSet, phi: float) -> float:
    return phi**2 / (2.0 * snrs.g_SD * snrs.g_RD)


def asym_outage_bad(M: int, snrs: AvgSnrSet, phi: float) -> float:
    p_sr = asym_outage_sr_bad(M, snrs, phi)
    return p_sr * asym_outage_sd(snrs, phi) + (1.0 - p_sr) * asym_outage_mrc_bad(snrs, phi)


def asym_outage_overall(M: int, snrs: AvgSnrSet, p_B: float, phi: float) -> float:
    weights, w_bad = state_weights(M, p_B)
    terms = [w * asym_outage(M, n, snrs, phi) for n, w in enumerate(weights, start=1)]
    if w_bad > 0:
        terms.append(w_bad * asym_outage_bad(M, snrs, phi))
    return _neumaier(terms)


def diversity_order(M: int, N: int) -> int:
    _check_mn(M, N)
    return M - N + 2


# --------------------------------------------------------------------------
# curve export
# --------------------------------------------------------------------------

CURVES: dict[str, Callable[[SelectionConfig, AvgSnrSet], float]] = {
    "ber_dest": lambda c, s: ber_overall(c.M, s, c.p_B),
    "ber_relay": lambda c, s: ber_relay_overall(c.M, s, c.p_B),
    "ber_dest_n": lambda c, s: ber_nth_good(c.M, c.N, s)[1],
    "ber_relay_n": lambda c, s: ber_relay_nth(c.M, c.N, s),
    "p_out": lambda c, s: outage_overall(c.M, s, c.p_B, c.phi),
    "p_out_n": lambda c, s: outage_nth_good(c.M, c.N, s, c.phi),
    "p_out_relay_n": lambda c, s: cdf_gamma_sr_n(c.phi, c.M, c.N, s),
    "asym_ber_dest": lambda c, s: asym_ber_overall(c.M, s, c.p_B),
    "asym_ber_relay_n": lambda c, s: asym_ber_relay(c.M, c.N, s),
    "asym_ber_dest_n": lambda c, s: asym_ber_dest(c.M, c.N, s),
    "asym_p_out": lambda c, s: asym_outage_overall(c.M, s, c.p_B, c.phi),
    "asym_p_out_n": lambda c, s: asym_outage(c.M, c.N, s, c.phi),
}


def curve(name: str, snr_db, cfg: SelectionConfig, unit_snrs: AvgSnrSet):
    """``(snr_db, value)`` pairs of a named quantity.

    ``unit_snrs`` holds the per-link average SNRs at 0 dB; each grid point
    scales all three links by ``10**(snr_db/10)``.
    """
    try:
        fn = CURVES[name]
    except KeyError:
        raise ValueError(f"unknown curve {name!r}; choose from {sorted(CURVES)}") from None
    return [(float(db), float(fn(cfg, unit_snrs.scaled(10.0 ** (db / 10.0))))) for db in snr_db]
