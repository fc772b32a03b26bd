"""Noise-state detection at a relay: genie, MAP forward-backward, memoryless.

All detectors take received samples ``y`` and gains ``h`` of shape
``(..., K)``; leading axes are independent frames (or relays) and are
processed together.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .noise_channel import B, G, FrameTrace, TsmgParams


class DetectorDegeneracyError(FloatingPointError):
    """The trellis lost all probability mass in some frame."""


@dataclass
class TrellisPosteriors:
    alpha: np.ndarray | None
    beta: np.ndarray | None
    llr: np.ndarray
    posterior: np.ndarray
    failed: np.ndarray

    def hard_decisions(self) -> np.ndarray:
        return llr_to_state(self.llr)


@dataclass
class DetectedStates:
    states: np.ndarray
    source: str


def state_log_likelihoods(y, h, P_S: float, params: TsmgParams) -> np.ndarray:
    """``log p(y_k | s_k)`` with the equiprobable BPSK symbol summed out.

    Returns shape ``(..., K, 2)`` indexed by state (G, B).
    """
    y = np.asarray(y)
    a = np.sqrt(P_S) * np.asarray(h)
    d_plus = np.abs(y - a) ** 2
    d_minus = np.abs(y + a) ** 2
    var = params.variances
    out = np.empty(y.shape + (2,))
    for s in (G, B):
        e1 = -d_plus / var[s]
        e2 = -d_minus / var[s]
        out[..., s] = np.logaddexp(e1, e2) - np.log(2.0) - np.log(np.pi * var[s])
    return out


def llr_to_state(llr):
    """G where ``llr >= 0``, B otherwise."""
    llr = np.asarray(llr, dtype=float)
    if np.any(np.isnan(llr)):
        raise ValueError("llr contains NaN")
    out = np.where(llr >= 0, G, B).astype(np.uint8)
    return out if out.ndim else int(out)


def _log_ratio(num_g, num_b):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(num_g) - np.log(num_b)


def _finish(llr, failed, strict):
    llr = np.where(failed[..., None], np.nan, llr)
    with np.errstate(over="ignore", invalid="ignore"):
        post_g = np.where(llr >= 0, 1.0 / (1.0 + np.exp(-llr)), np.exp(llr) / (1.0 + np.exp(llr)))
    posterior = np.stack([post_g, 1.0 - post_g], axis=-1)
    if strict and np.any(failed):
        raise DetectorDegeneracyError(f"{int(np.sum(failed))} frame(s) lost all trellis mass")
    return llr, posterior


def memoryless_posteriors(
    y, h, P_S: float, params: TsmgParams, strict: bool = True, ll=None
) -> TrellisPosteriors:
    """Sample-by-sample state posteriors using only the stationary prior.

    ``ll`` may carry precomputed :func:`state_log_likelihoods`.
    """
    if ll is None:
        ll = state_log_likelihoods(y, h, P_S, params)
    with np.errstate(divide="ignore"):
        prior = np.log(params.p_G) - np.log(params.p_B)
    llr = prior + (ll[..., G] - ll[..., B])
    failed = np.any(np.isnan(llr), axis=-1)
    llr, posterior = _finish(llr, failed, strict)
    return TrellisPosteriors(None, None, llr, posterior, failed)


def map_posteriors(
    y, h, P_S: float, params: TsmgParams, strict: bool = True, keep_metrics: bool = True, ll=None
) -> TrellisPosteriors:
    """Forward-backward state posteriors over the two-state noise trellis.

    ``alpha[k]`` covers ``y_0..y_{k-1}`` and ``beta[k]`` covers
    ``y_{k+1}..y_{K-1}``; both are renormalised to sum to 1 at every epoch.
    The posterior is ``alpha * p(y_k|s) * beta``, and the emission ratio of
    epoch ``k`` enters the LLR in the log domain so strong evidence does not
    lose precision.  Inside the recursions emissions are scaled by their
    per-epoch maximum, which cancels after renormalisation.

    Frames whose normaliser vanishes are flagged in ``failed``; with
    ``strict`` a :class:`DetectorDegeneracyError` is raised instead.
    """
    if ll is None:
        ll = state_log_likelihoods(y, h, P_S, params)
    K = ll.shape[-2]
    batch = ll.shape[:-2]
    # time-major for contiguous per-epoch slices
    ll = np.moveaxis(ll, -2, 0).reshape(K, -1, 2)
    with np.errstate(invalid="ignore"):
        d_ll = ll[..., G] - ll[..., B]
        e = np.exp(ll - ll.max(axis=-1, keepdims=True))
    e_g, e_b = e[..., G], e[..., B]
    (a_gg, a_gb), (a_bg, a_bb) = params.transition_matrix
    width = e.shape[1]
    failed = ~np.all(np.isfinite(e_g) & np.isfinite(e_b), axis=0)

    def _normalise(n_g, n_b):
        nonlocal failed
        norm = n_g + n_b
        bad = ~(norm > 0) | ~np.isfinite(norm)
        if bad.any():
            failed |= bad
            norm = np.where(bad, 1.0, norm)
            n_g = np.where(bad, 0.5, n_g)
            n_b = np.where(bad, 0.5, n_b)
        return n_g / norm, n_b / norm

    alpha = np.empty((K, width, 2))
    alpha[0, :, G] = params.p_G
    alpha[0, :, B] = params.p_B
    for k in range(K - 1):
        t_g = alpha[k, :, G] * e_g[k]
        t_b = alpha[k, :, B] * e_b[k]
        alpha[k + 1, :, G], alpha[k + 1, :, B] = _normalise(t_g * a_gg + t_b * a_bg, t_g * a_gb + t_b * a_bb)

    beta = np.empty((K, width, 2))
    beta[K - 1] = 0.5
    for k in range(K - 2, -1, -1):
        u_g = e_g[k + 1] * beta[k + 1, :, G]
        u_b = e_b[k + 1] * beta[k + 1, :, B]
        beta[k, :, G], beta[k, :, B] = _normalise(a_gg * u_g + a_gb * u_b, a_bg * u_g + a_bb * u_b)

    with np.errstate(divide="ignore", invalid="ignore"):
        llr = (
            _log_ratio(alpha[..., G], alpha[..., B])
            + d_ll
            + _log_ratio(beta[..., G], beta[..., B])
        )
    failed |= np.any(np.isnan(llr), axis=0)

    def batch_major(a):
        return np.moveaxis(a.reshape((K,) + batch + a.shape[2:]), 0, len(batch))

    failed = failed.reshape(batch)
    llr, posterior = _finish(batch_major(llr), failed, strict)
    if keep_metrics:
        return TrellisPosteriors(batch_major(alpha), batch_major(beta), llr, posterior, failed)
    return TrellisPosteriors(None, None, llr, posterior, failed)


def genie_states(trace: FrameTrace, relay: int) -> DetectedStates:
    return DetectedStates(trace.states[relay].copy(), "genie")


DETECTORS = ("genie", "map", "memoryless")


def detect_states(y, h, states, P_S: float, params: TsmgParams, method: str, ll=None):
    """Hard state decisions for a batch plus a per-frame failure mask.

    ``states`` (the true path) is only read by the genie.
    """
    if method == "genie":
        states = np.asarray(states, dtype=np.uint8)
        return states.copy(), np.zeros(states.shape[:-1], dtype=bool)
    if method == "map":
        post = map_posteriors(y, h, P_S, params, strict=False, keep_metrics=False, ll=ll)
    elif method == "memoryless":
        post = memoryless_posteriors(y, h, P_S, params, strict=False, ll=ll)
    else:
        raise ValueError(f"unknown detector {method!r}; choose from {DETECTORS}")
    llr = np.where(np.isnan(post.llr), 0.0, post.llr)
    return llr_to_state(llr), post.failed
