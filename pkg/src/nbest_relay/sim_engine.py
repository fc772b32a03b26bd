"""Monte Carlo SNR sweeps with deterministic per-frame seeding.

Every frame draws from its own generator seeded by ``(seed, snr key, frame
index)``, and chunks only return integer counters.  Summing counters is
order independent, so a sweep gives the same records for any worker count.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import analytic as an
from .noise_channel import (
    CHANNEL_MODES,
    ParameterDomainError,
    Topology,
    TsmgParams,
    average_snrs,
    derive_transition_probs,
    draw_frame_trace,
)
from .relay_selector import ALL_BAD_RULES, PROTOCOLS
from .transceiver import FrameSetup, evaluate_trace, stack_traces

log = logging.getLogger(__name__)

FAILURE_THRESHOLD = 1e-3
_COUNTERS = ("frames_ok", "failed_frames", "relay_errors", "dest_errors", "outage_events", "fallback_epochs")


class SimulationAborted(RuntimeError):
    """Too many frames were lost to detector degeneracy."""


@dataclass(frozen=True)
class SimulationConfig:
    """One Monte Carlo sweep.  ``snr_db`` sets ``sigma_G2 = P_S / 10**(snr/10)``."""

    M: int = 5
    lambda_SD: float = 1.0
    lambda_SR: float = 0.4
    lambda_RD: float | None = None
    eta: float = 2.0
    p_B: float = 0.01
    mu: float = 100.0
    rho: float = 100.0
    R: float = 1.0
    protocols: tuple[str, ...] = ("nth_best_genie",)
    snr_db: tuple[float, ...] = (5.0, 10.0, 15.0, 20.0, 25.0)
    frames: int = 20_000
    symbols: int = 1000
    seed: int = 0
    channel_mode: str = "per_symbol"
    all_bad_rule: str = "partial"
    outage_joint: str = "exact"
    workers: int = 1
    chunk_frames: int = 100

    def __post_init__(self):
        object.__setattr__(self, "protocols", tuple(self.protocols))
        object.__setattr__(self, "snr_db", tuple(float(v) for v in self.snr_db))
        self.validate()

    def validate(self):
        def need(ok, symbol, msg):
            if not ok:
                raise ParameterDomainError(f"{symbol}: {msg}")

        for name in ("frames", "symbols", "workers", "chunk_frames", "M"):
            v = getattr(self, name)
            need(isinstance(v, (int, np.integer)) and not isinstance(v, bool) and v >= 1, name, f"must be an integer >= 1, got {v!r}")
        need(isinstance(self.seed, (int, np.integer)) and self.seed >= 0, "seed", f"must be a non-negative integer, got {self.seed!r}")
        need(0.0 < self.p_B < 1.0, "p_B", f"must lie in (0, 1), got {self.p_B!r}")
        need(self.mu > 0, "mu", f"must be positive, got {self.mu!r}")
        try:
            derive_transition_probs(self.p_B, self.mu)
        except ParameterDomainError as exc:
            raise ParameterDomainError(f"mu: {exc}") from None
        need(self.rho >= 1.0, "rho", f"must be >= 1, got {self.rho!r}")
        need(self.R > 0, "R", f"must be positive, got {self.R!r}")
        need(len(self.protocols) > 0, "protocols", "at least one protocol is required")
        for p in self.protocols:
            need(p in PROTOCOLS, "protocols", f"unknown protocol {p!r}; choose from {PROTOCOLS}")
        need(len(set(self.protocols)) == len(self.protocols), "protocols", "duplicate protocol")
        grid = self.snr_db
        need(len(grid) > 0, "snr_db", "grid must be nonempty")
        need(all(math.isfinite(v) for v in grid), "snr_db", "grid must be finite")
        need(all(b > a for a, b in zip(grid, grid[1:])), "snr_db", "grid must be strictly increasing")
        need(self.channel_mode in CHANNEL_MODES, "channel_mode", f"must be one of {CHANNEL_MODES}")
        need(self.all_bad_rule in ALL_BAD_RULES, "all_bad_rule", f"must be one of {ALL_BAD_RULES}")
        need(self.outage_joint in an.OUTAGE_JOINT_MODES, "outage_joint", f"must be one of {an.OUTAGE_JOINT_MODES}")
        self.topology()

    def topology(self) -> Topology:
        return Topology(self.M, self.lambda_SD, self.lambda_SR, self.lambda_RD, self.eta)

    def sigma_G2(self, snr_db: float) -> float:
        return self.topology().P_S / 10.0 ** (snr_db / 10.0)

    def tsmg(self, snr_db: float) -> TsmgParams:
        return TsmgParams.from_memory(self.p_B, self.mu, self.rho, self.sigma_G2(snr_db))

    @property
    def phi(self) -> float:
        return an.rate_threshold(self.R)

    def frame_setup(self, snr_db: float) -> FrameSetup:
        return FrameSetup(
            self.topology(), self.tsmg(snr_db), self.symbols, self.phi, self.protocols, self.channel_mode, self.all_bad_rule
        )


@dataclass
class SweepRecord:
    snr_db: float
    protocol: str
    frames: int
    symbols_per_frame: int
    seed: int
    bits: int
    failed_frames: int
    relay_errors: int
    dest_errors: int
    outage_events: int
    fallback_epochs: int
    ber_relay: float
    ber_relay_ci: float
    ber_dest: float
    ber_dest_ci: float
    p_out: float
    p_out_ci: float
    analytic_ber: float
    analytic_ber_relay: float
    analytic_pout: float
    analytic_pout_product: float
    asym_ber: float
    asym_pout: float

    def to_dict(self) -> dict:
        return asdict(self)


RECORD_FIELDS = tuple(f.name for f in fields(SweepRecord))


def estimate_with_ci(errors: int, trials: int) -> tuple[float, float]:
    """Point estimate and 95% normal-approximation half-width.

    With zero errors the half-width is the rule-of-three bound ``3/trials``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 0 <= errors <= trials:
        raise ValueError("need 0 <= errors <= trials")
    p = errors / trials
    if errors == 0:
        return 0.0, 3.0 / trials
    return p, 1.96 * math.sqrt(p * (1.0 - p) / trials)


def snr_key(snr_db: float) -> int:
    """Non-negative integer tag of a grid point (milli-dB, offset)."""
    return int(round(snr_db * 1000)) + 1_000_000


def frame_rng(seed: int, snr_db: float, frame: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, snr_key(snr_db), frame]))


def _run_chunk(args) -> dict[str, dict[str, int]]:
    config, snr_db, start, stop = args
    setup = config.frame_setup(snr_db)
    topo, params = setup.topo, setup.params
    traces = [draw_frame_trace(topo, params, config.symbols, frame_rng(config.seed, snr_db, f), config.channel_mode) for f in range(start, stop)]
    outcomes = evaluate_trace(stack_traces(traces), setup)
    counts = {}
    for protocol, o in outcomes.items():
        ok = ~np.asarray(o.failed, dtype=bool).reshape(stop - start)
        counts[protocol] = {
            "frames_ok": int(ok.sum()),
            "failed_frames": int((~ok).sum()),
            "relay_errors": int(o.relay_bit_error[ok].sum()),
            "dest_errors": int(o.dest_bit_error[ok].sum()),
            "outage_events": int(o.outage_event[ok].sum()),
            "fallback_epochs": int(o.fallback[ok].sum()),
        }
    return counts


def _chunks(config: SimulationConfig, snr_db: float):
    step = config.chunk_frames
    return [(config, snr_db, a, min(a + step, config.frames)) for a in range(0, config.frames, step)]


def simulate_point(config: SimulationConfig, snr_db: float, pool=None) -> dict[str, dict[str, int]]:
    """Reduce the counters of every frame at one grid point."""
    totals = {p: dict.fromkeys(_COUNTERS, 0) for p in config.protocols}
    jobs = _chunks(config, snr_db)
    results = pool.map(_run_chunk, jobs) if pool is not None else map(_run_chunk, jobs)
    for counts in results:
        for p, c in counts.items():
            for k, v in c.items():
                totals[p][k] += v
    return totals


@dataclass(frozen=True)
class AnalyticPoint:
    ber: float
    ber_relay: float
    pout: float
    pout_product: float
    asym_ber: float
    asym_pout: float


def analytic_point(config: SimulationConfig, snr_db: float) -> AnalyticPoint:
    """Closed-form and high-SNR values for the N'th-best scheme at one point."""
    snrs = average_snrs(config.topology(), config.sigma_G2(snr_db), config.rho)
    M, p_B, phi = config.M, config.p_B, config.phi
    return AnalyticPoint(
        ber=an.ber_overall(M, snrs, p_B),
        ber_relay=an.ber_relay_overall(M, snrs, p_B),
        pout=an.outage_overall(M, snrs, p_B, phi, joint=config.outage_joint),
        pout_product=an.outage_overall(M, snrs, p_B, phi, joint="product"),
        asym_ber=an.asym_ber_overall(M, snrs, p_B),
        asym_pout=an.asym_outage_overall(M, snrs, p_B, phi),
    )


def make_record(config: SimulationConfig, snr_db: float, protocol: str, c: dict[str, int], ref: AnalyticPoint) -> SweepRecord:
    if c["frames_ok"] == 0:
        raise SimulationAborted(f"{protocol} at {snr_db} dB: every frame failed")
    bits = c["frames_ok"] * config.symbols
    br, br_ci = estimate_with_ci(c["relay_errors"], bits)
    bd, bd_ci = estimate_with_ci(c["dest_errors"], bits)
    po, po_ci = estimate_with_ci(c["outage_events"], bits)
    return SweepRecord(
        snr_db=snr_db,
        protocol=protocol,
        frames=config.frames,
        symbols_per_frame=config.symbols,
        seed=config.seed,
        bits=bits,
        failed_frames=c["failed_frames"],
        relay_errors=c["relay_errors"],
        dest_errors=c["dest_errors"],
        outage_events=c["outage_events"],
        fallback_epochs=c["fallback_epochs"],
        ber_relay=br,
        ber_relay_ci=br_ci,
        ber_dest=bd,
        ber_dest_ci=bd_ci,
        p_out=po,
        p_out_ci=po_ci,
        analytic_ber=ref.ber,
        analytic_ber_relay=ref.ber_relay,
        analytic_pout=ref.pout,
        analytic_pout_product=ref.pout_product,
        asym_ber=ref.asym_ber,
        asym_pout=ref.asym_pout,
    )


def run_sweep(config: SimulationConfig) -> list[SweepRecord]:
    """Simulate every grid point and protocol; records ordered by (snr, protocol)."""
    records = []
    pool = ProcessPoolExecutor(max_workers=config.workers) if config.workers > 1 else None
    try:
        for snr_db in config.snr_db:
            totals = simulate_point(config, snr_db, pool)
            ref = analytic_point(config, snr_db)
            for protocol in config.protocols:
                c = totals[protocol]
                rate = c["failed_frames"] / config.frames
                if c["failed_frames"]:
                    log.warning("%s at %g dB: %d failed frame(s)", protocol, snr_db, c["failed_frames"])
                if rate > FAILURE_THRESHOLD:
                    raise SimulationAborted(
                        f"{protocol} at {snr_db} dB: {c['failed_frames']}/{config.frames} frames failed "
                        f"(limit {FAILURE_THRESHOLD:.1%})"
                    )
                records.append(make_record(config, snr_db, protocol, c, ref))
            log.info("done %g dB", snr_db)
    finally:
        if pool is not None:
            pool.shutdown()
    return records


def fit_diversity_slope(points, window: tuple[float, float] | None = None, metric: str = "ber_dest") -> float:
    """Negated least-squares slope of ``log10(value)`` against ``snr_db / 10``.

    ``points`` holds ``(snr_db, value)`` pairs or :class:`SweepRecord` objects
    (read through ``metric``).  Only points inside ``window`` (inclusive) with
    a positive value are used.
    """
    pairs = []
    for p in points:
        if isinstance(p, SweepRecord):
            pairs.append((p.snr_db, getattr(p, metric)))
        else:
            pairs.append((float(p[0]), float(p[1])))
    if window is not None:
        lo, hi = window
        pairs = [(x, y) for x, y in pairs if lo <= x <= hi]
    pairs = [(x, y) for x, y in pairs if y > 0]
    if len(pairs) < 2:
        raise ValueError("need at least two positive points in the window")
    x = np.array([p[0] for p in pairs]) / 10.0
    y = np.log10([p[1] for p in pairs])
    slope = np.polyfit(x, y, 1)[0]
    return float(-slope)


__all__ = [
    "AnalyticPoint",
    "FAILURE_THRESHOLD",
    "RECORD_FIELDS",
    "SimulationAborted",
    "SimulationConfig",
    "SweepRecord",
    "analytic_point",
    "estimate_with_ci",
    "fit_diversity_slope",
    "frame_rng",
    "run_sweep",
    "simulate_point",
    "snr_key",
]
