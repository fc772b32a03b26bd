"""Rayleigh link gains, two-state Markov-Gaussian (TSMG) noise, and topology SNRs."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .analytic import AvgSnrSet

# noise states, stored as uint8
G = 0
B = 1


class ParameterDomainError(ValueError):
    pass


@dataclass(frozen=True)
class TsmgParams:
    """Two-state Markov-Gaussian noise.

    State G carries variance ``sigma_G2``; state B carries ``rho * sigma_G2``.
    ``p_GB`` and ``p_BG`` are the per-epoch transition probabilities.
    """

    p_GB: float
    p_BG: float
    rho: float = 100.0
    sigma_G2: float = 1.0

    def __post_init__(self):
        for name in ("p_GB", "p_BG"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ParameterDomainError(f"{name} must lie in [0, 1], got {p!r}")
        if self.p_GB + self.p_BG <= 0:
            raise ParameterDomainError("p_GB + p_BG must be positive")
        if not self.rho >= 1.0:
            raise ParameterDomainError(f"rho must be >= 1, got {self.rho!r}")
        if not (self.sigma_G2 > 0 and math.isfinite(self.sigma_G2)):
            raise ParameterDomainError(f"sigma_G2 must be positive, got {self.sigma_G2!r}")

    @classmethod
    def from_memory(cls, p_B: float, mu: float, rho: float = 100.0, sigma_G2: float = 1.0) -> "TsmgParams":
        p_GB, p_BG = derive_transition_probs(p_B, mu)
        return cls(p_GB, p_BG, rho, sigma_G2)

    @property
    def p_B(self) -> float:
        return self.p_GB / (self.p_GB + self.p_BG)

    @property
    def p_G(self) -> float:
        return self.p_BG / (self.p_GB + self.p_BG)

    @property
    def mu(self) -> float:
        return 1.0 / (self.p_GB + self.p_BG)

    @property
    def variances(self) -> np.ndarray:
        """Noise variance indexed by state (G, B)."""
        return np.array([self.sigma_G2, self.rho * self.sigma_G2])

    @property
    def transition_matrix(self) -> np.ndarray:
        return np.array([[1.0 - self.p_GB, self.p_GB], [self.p_BG, 1.0 - self.p_BG]])

    def with_sigma(self, sigma_G2: float) -> "TsmgParams":
        return replace(self, sigma_G2=sigma_G2)


def derive_transition_probs(p_B: float, mu: float) -> tuple[float, float]:
    """Transition probabilities reproducing a stationary ``p_B`` and memory ``mu``."""
    if not 0.0 < p_B < 1.0:
        raise ParameterDomainError(f"p_B must lie in (0, 1), got {p_B!r}")
    if not mu > 0:
        raise ParameterDomainError(f"mu must be positive, got {mu!r}")
    p_GB = p_B / mu
    p_BG = (1.0 - p_B) / mu
    if p_GB >= 1.0 or p_BG >= 1.0:
        raise ParameterDomainError(f"(p_B={p_B}, mu={mu}) needs a transition probability >= 1")
    return p_GB, p_BG


@dataclass(frozen=True)
class Topology:
    """Relay count, relative distances and powers.

    ``lambda_RD`` defaults to ``lambda_SD - lambda_SR`` (relays on the S-D line).
    """

    M: int = 5
    lambda_SD: float = 1.0
    lambda_SR: float = 0.4
    lambda_RD: float | None = None
    eta: float = 2.0
    P_S: float = 1.0
    P_N: float = 1.0

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 1:
            raise ParameterDomainError(f"M must be a positive integer, got {self.M!r}")
        if self.lambda_RD is None:
            object.__setattr__(self, "lambda_RD", self.lambda_SD - self.lambda_SR)
        for name in ("lambda_SD", "lambda_SR", "lambda_RD", "eta", "P_S", "P_N"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ParameterDomainError(f"{name} must be positive, got {value!r}")

    @property
    def omega_SD(self) -> float:
        return self.lambda_SD ** -self.eta

    @property
    def omega_SR(self) -> float:
        return self.lambda_SR ** -self.eta

    @property
    def omega_RD(self) -> float:
        return self.lambda_RD ** -self.eta


def average_snrs(topo: Topology, sigma_G2: float, rho: float = 1.0) -> AvgSnrSet:
    return AvgSnrSet(
        g_SR=topo.P_S * topo.omega_SR / sigma_G2,
        g_RD=topo.P_N * topo.omega_RD / sigma_G2,
        g_SD=topo.P_S * topo.omega_SD / sigma_G2,
        rho=rho,
    )


def sample_state_sequence(params: TsmgParams, K: int, rng: np.random.Generator) -> np.ndarray:
    """One noise-state path of length K, started from the stationary law.

    Built from alternating geometric sojourns, which is the same law as the
    epoch-by-epoch chain.
    """
    if K < 1:
        raise ParameterDomainError("K must be >= 1")
    states = np.empty(K, dtype=np.uint8)
    current = B if rng.random() < params.p_B else G
    leave = (params.p_GB, params.p_BG)
    pos = 0
    batch = 8
    while pos < K:
        # draw sojourns for a block of alternating runs at once
        lengths = []
        s = current
        for _ in range(batch):
            p = leave[s]
            lengths.append(rng.geometric(p) if p > 0 else K)
            s ^= 1
        for length in lengths:
            stop = min(K, pos + int(length))
            states[pos:stop] = current
            pos = stop
            current ^= 1
            if pos >= K:
                break
        batch = min(batch * 2, 4096)
    return states


def sample_tsmg_noise(states: np.ndarray, params: TsmgParams, rng: np.random.Generator) -> np.ndarray:
    """CSCG noise whose total complex variance follows the state path."""
    std = np.sqrt(params.variances[np.asarray(states, dtype=np.intp)] / 2.0)
    shape = np.shape(states)
    return std * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def sample_awgn(shape, sigma2: float, rng: np.random.Generator) -> np.ndarray:
    return math.sqrt(sigma2 / 2.0) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def sample_fading(omega: float, K, rng: np.random.Generator) -> np.ndarray:
    """Rayleigh gains: CSCG with ``E|h|^2 = omega``."""
    if not omega > 0:
        raise ParameterDomainError(f"omega must be positive, got {omega!r}")
    return sample_awgn(K, omega, rng)


@dataclass
class FrameTrace:
    """Everything drawn for one frame.

    Relay-indexed arrays have shape ``(M, K)``.  The destination sees one
    noise sample per epoch and slot (``n_SD`` and ``n_RD``), shared by
    whichever relay ends up forwarding.
    """

    bits: np.ndarray
    states: np.ndarray
    h_SR: np.ndarray
    h_RD: np.ndarray
    h_SD: np.ndarray
    n_SR: np.ndarray
    n_SD: np.ndarray
    n_RD: np.ndarray
    pick: np.ndarray
    params: TsmgParams
    topo: Topology

    @property
    def K(self) -> int:
        return self.bits.shape[-1]

    @property
    def y_SR(self) -> np.ndarray:
        x = 1.0 - 2.0 * self.bits
        return math.sqrt(self.topo.P_S) * self.h_SR * x[..., None, :] + self.n_SR


CHANNEL_MODES = ("per_symbol", "quasi_static")


def draw_frame_trace(
    topo: Topology,
    params: TsmgParams,
    K: int,
    rng: np.random.Generator,
    channel_mode: str = "per_symbol",
) -> FrameTrace:
    """Draw one frame.  The draw order is fixed so a seed pins the whole frame."""
    if channel_mode not in CHANNEL_MODES:
        raise ParameterDomainError(f"channel_mode must be one of {CHANNEL_MODES}")
    M = topo.M
    bits = rng.integers(0, 2, size=K, dtype=np.uint8)
    states = np.stack([sample_state_sequence(params, K, rng) for _ in range(M)])
    gain_len = K if channel_mode == "per_symbol" else 1
    h_SR = np.broadcast_to(sample_fading(topo.omega_SR, (M, gain_len), rng), (M, K))
    h_RD = np.broadcast_to(sample_fading(topo.omega_RD, (M, gain_len), rng), (M, K))
    h_SD = np.broadcast_to(sample_fading(topo.omega_SD, gain_len, rng), (K,))
    n_SR = sample_tsmg_noise(states, params, rng)
    n_SD = sample_awgn(K, params.sigma_G2, rng)
    n_RD = sample_awgn(K, params.sigma_G2, rng)
    pick = rng.integers(0, M, size=K)
    return FrameTrace(bits, states, h_SR, h_RD, h_SD, n_SR, n_SD, n_RD, pick, params, topo)
