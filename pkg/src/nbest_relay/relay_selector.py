"""Relay selection rules.

Relay indices are 0-based.  ``rank_used`` is the 1-based position of the
chosen relay in the max-min ranking (1 = best).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .noise_channel import G

PROTOCOLS = ("nth_best_map", "nth_best_memoryless", "nth_best_genie", "conventional", "random")
ALL_BAD_RULES = ("partial", "max_min")


def detector_for(protocol: str) -> str | None:
    """Detector a protocol relies on, or None for state-blind rules."""
    if protocol not in PROTOCOLS:
        raise ValueError(f"unknown protocol {protocol!r}; choose from {PROTOCOLS}")
    if protocol.startswith("nth_best_"):
        return protocol[len("nth_best_"):]
    return None


@dataclass
class RankingTable:
    order: np.ndarray
    key: np.ndarray


@dataclass
class SelectionDecision:
    relay: int
    rank_used: int | None
    fallback: bool = False
    detector_source: str | None = None


def rank_max_min(gamma_SR, gamma_RD) -> RankingTable:
    """Sort relays by ``min(gamma_SR, gamma_RD)``, best first, ties to the lower index."""
    key = np.minimum(np.asarray(gamma_SR, dtype=float), np.asarray(gamma_RD, dtype=float))
    order = np.argsort(-key, axis=-1, kind="stable")
    return RankingTable(order, key)


def select_all_bad(gamma_SR, rho: float, gamma_RD=None, rule: str = "partial"):
    """Relay to use when every relay is in B.

    ``partial`` maximises ``gamma_SR / rho`` (the SR hop alone); ``max_min``
    keeps the RD hop in the bottleneck, ``min(gamma_SR / rho, gamma_RD)``.
    """
    gamma_SR = np.asarray(gamma_SR, dtype=float)
    if rule == "partial":
        metric = gamma_SR / rho
    elif rule == "max_min":
        if gamma_RD is None:
            raise ValueError("max_min fallback needs gamma_RD")
        metric = np.minimum(gamma_SR / rho, np.asarray(gamma_RD, dtype=float))
    else:
        raise ValueError(f"unknown all-bad rule {rule!r}; choose from {ALL_BAD_RULES}")
    out = np.argmax(metric, axis=-1)
    return int(out) if np.ndim(out) == 0 else out


def select_nth_best(
    ranking: RankingTable,
    detected,
    gamma_SR=None,
    rho: float = 1.0,
    gamma_RD=None,
    rule: str = "partial",
    detector_source: str | None = None,
) -> SelectionDecision:
    """Walk down the ranking and take the first relay detected in G.

    If none is in G, fall back to :func:`select_all_bad`, which needs the SR
    SNRs.
    """
    detected = np.asarray(detected)
    for pos, relay in enumerate(ranking.order):
        if detected[relay] == G:
            return SelectionDecision(int(relay), pos + 1, False, detector_source)
    if gamma_SR is None:
        raise ValueError("all relays in B: gamma_SR is required for the fallback")
    relay = select_all_bad(gamma_SR, rho, gamma_RD, rule)
    pos = int(np.flatnonzero(ranking.order == relay)[0])
    return SelectionDecision(relay, pos + 1, True, detector_source)


def select_conventional(ranking: RankingTable) -> SelectionDecision:
    return SelectionDecision(int(ranking.order[0]), 1, False, None)


def select_random(M: int, rng: np.random.Generator, ranking: RankingTable | None = None) -> SelectionDecision:
    """Uniform pick; ``rank_used`` is filled in only when a ranking is given."""
    if M < 1:
        raise ValueError("M must be >= 1")
    relay = int(rng.integers(0, M))
    rank = None if ranking is None else int(np.flatnonzero(ranking.order == relay)[0]) + 1
    return SelectionDecision(relay, rank, False, None)


def select_batch(
    protocol: str,
    gamma_SR: np.ndarray,
    gamma_RD: np.ndarray,
    detected: np.ndarray | None,
    rho: float,
    pick: np.ndarray | None = None,
    rule: str = "partial",
    ranking: RankingTable | None = None,
):
    """Vectorised selection over epochs.

    SNR and state arrays have shape ``(..., M)`` with the relay axis last;
    ``pick`` holds the uniform relay draw used by ``random``.  A precomputed
    ``ranking`` can be shared between protocols.  Returns
    ``(relay, rank_used, fallback)`` arrays of the leading shape.
    """
    if ranking is None:
        ranking = rank_max_min(gamma_SR, gamma_RD)
    order = ranking.order
    lead = order.shape[:-1]
    fallback = np.zeros(lead, dtype=bool)
    if protocol == "conventional":
        relay = order[..., 0]
    elif protocol == "random":
        if pick is None:
            raise ValueError("random selection needs pre-drawn picks")
        relay = np.asarray(pick)
    else:
        detector_for(protocol)
        good = np.take_along_axis(np.asarray(detected), order, axis=-1) == G
        first = np.argmax(good, axis=-1)
        fallback = ~good.any(axis=-1)
        relay = np.take_along_axis(order, first[..., None], axis=-1)[..., 0]
        if fallback.any():
            relay = np.where(fallback, select_all_bad(gamma_SR, rho, gamma_RD, rule), relay)
    rank_used = np.argmax(order == relay[..., None], axis=-1) + 1
    return relay, rank_used, fallback
