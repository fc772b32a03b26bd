"""BPSK decode-and-forward link: relay decision, destination MRC, per-epoch events."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .noise_channel import FrameTrace, Topology, TsmgParams, draw_frame_trace
from .relay_selector import ALL_BAD_RULES, detector_for, rank_max_min, select_batch
from .state_detector import detect_states, state_log_likelihoods


def bpsk_map(bits):
    """0 -> +1, 1 -> -1."""
    return 1.0 - 2.0 * np.asarray(bits, dtype=float)


def bpsk_decide(metric):
    """Sign decision on a real metric; a zero metric decodes to bit 0."""
    out = (np.asarray(metric) < 0).astype(np.uint8)
    return out if out.ndim else int(out)


def relay_decode(y_SR, h, P_S: float = 1.0):
    """Coherent matched-filter decision at the relay, no error detection."""
    return bpsk_decide(np.real(np.conj(h) * y_SR))


def mrc_combine(y_SD, h_SD, y_RD, h_RD, sigma2: float = 1.0):
    """Real MRC metric for branches of equal noise variance (which cancels)."""
    return np.real(np.conj(h_SD) * y_SD + np.conj(h_RD) * y_RD)


@dataclass(frozen=True)
class FrameSetup:
    """Everything one frame needs at a fixed SNR point."""

    topo: Topology
    params: TsmgParams
    K: int
    phi: float
    protocols: tuple[str, ...] = ("nth_best_genie",)
    channel_mode: str = "per_symbol"
    all_bad_rule: str = "partial"
    force_correct_relay: bool = False

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("K must be >= 1")
        for p in self.protocols:
            detector_for(p)
        if self.all_bad_rule not in ALL_BAD_RULES:
            raise ValueError(f"all_bad_rule must be one of {ALL_BAD_RULES}")

    @property
    def detectors(self) -> tuple[str, ...]:
        found = {detector_for(p) for p in self.protocols} - {None}
        return tuple(sorted(found))


@dataclass
class FrameOutcome:
    """Per-epoch outcome arrays of one protocol, shape ``(..., K)``.

    ``failed`` is per frame: the protocol's detector degenerated and the
    frame carries no valid outcome.
    """

    relay: np.ndarray
    rank_used: np.ndarray
    fallback: np.ndarray
    relay_bit_error: np.ndarray
    dest_bit_error: np.ndarray
    outage_event: np.ndarray
    direct_bit_error: np.ndarray
    failed: np.ndarray = field(default_factory=lambda: np.zeros((), dtype=bool))


def stack_traces(traces: list[FrameTrace]) -> FrameTrace:
    """Concatenate frames along a new leading axis."""
    first = traces[0]
    arrays = {
        name: np.stack([getattr(t, name) for t in traces])
        for name in ("bits", "states", "h_SR", "h_RD", "h_SD", "n_SR", "n_SD", "n_RD", "pick")
    }
    return FrameTrace(params=first.params, topo=first.topo, **arrays)


def _gather(a, relay):
    # a: (..., M, K), relay: (..., K)
    return np.take_along_axis(a, relay[..., None, :], axis=-2)[..., 0, :]


def evaluate_trace(trace: FrameTrace, setup: FrameSetup) -> dict[str, FrameOutcome]:
    """Run every protocol of ``setup`` on the same (possibly stacked) trace."""
    topo, params = setup.topo, setup.params
    sigma2 = params.sigma_G2
    x = bpsk_map(trace.bits)
    var_relay = params.variances[trace.states]

    abs_sr = np.abs(trace.h_SR) ** 2
    gamma_SR = topo.P_S * abs_sr / sigma2
    gamma_RD = topo.P_N * np.abs(trace.h_RD) ** 2 / sigma2
    gamma_SD = topo.P_S * np.abs(trace.h_SD) ** 2 / sigma2
    gamma_SR_true = topo.P_S * abs_sr / var_relay

    y_SR = np.sqrt(topo.P_S) * trace.h_SR * x[..., None, :] + trace.n_SR
    relay_bits = relay_decode(y_SR, trace.h_SR, topo.P_S)
    y_SD = np.sqrt(topo.P_S) * trace.h_SD * x + trace.n_SD
    direct_err = bpsk_decide(np.real(np.conj(trace.h_SD) * y_SD)) != trace.bits

    ll = None
    if set(setup.detectors) - {"genie"}:
        ll = state_log_likelihoods(y_SR, trace.h_SR, topo.P_S, params)
    detected = {}
    for method in setup.detectors:
        detected[method] = detect_states(y_SR, trace.h_SR, trace.states, topo.P_S, params, method, ll=ll)

    # relay axis last for selection
    g_sr_m = np.moveaxis(gamma_SR, -2, -1)
    g_rd_m = np.moveaxis(gamma_RD, -2, -1)
    ranking = rank_max_min(g_sr_m, g_rd_m)
    frame_shape = trace.bits.shape[:-1]

    out = {}
    for protocol in setup.protocols:
        method = detector_for(protocol)
        states_m, failed = None, np.zeros(frame_shape, dtype=bool)
        if method is not None:
            states, failed_rm = detected[method]
            states_m = np.moveaxis(states, -2, -1)
            failed = np.any(failed_rm, axis=-1)
        relay, rank_used, fallback = select_batch(
            protocol, g_sr_m, g_rd_m, states_m, params.rho, pick=trace.pick, rule=setup.all_bad_rule, ranking=ranking
        )
        r_bits = trace.bits if setup.force_correct_relay else _gather(relay_bits, relay)
        h_RD = _gather(trace.h_RD, relay)
        y_RD = np.sqrt(topo.P_N) * h_RD * bpsk_map(r_bits) + trace.n_RD
        dest_bits = bpsk_decide(mrc_combine(y_SD, trace.h_SD, y_RD, h_RD, sigma2))

        g_sr_sel = _gather(gamma_SR_true, relay)
        g_rd_sel = _gather(gamma_RD, relay)
        phi = setup.phi
        outage = ((g_sr_sel >= phi) & (g_rd_sel + gamma_SD < phi)) | ((g_sr_sel < phi) & (gamma_SD < phi))

        out[protocol] = FrameOutcome(
            relay=relay,
            rank_used=rank_used,
            fallback=fallback,
            relay_bit_error=_gather(relay_bits, relay) != trace.bits,
            dest_bit_error=dest_bits != trace.bits,
            outage_event=outage,
            direct_bit_error=direct_err,
            failed=failed,
        )
    return out


def simulate_frame(setup: FrameSetup, rng: np.random.Generator) -> dict[str, FrameOutcome]:
    """Draw one frame and evaluate each configured protocol on it."""
    trace = draw_frame_trace(setup.topo, setup.params, setup.K, rng, setup.channel_mode)
    return evaluate_trace(trace, setup)
