"""State-detection error rate of the MAP and memoryless detectors against burst memory.

For each mu the script draws frames at one SNR and counts epochs where the
detected state differs from the true one.
"""

import argparse

import numpy as np

from nbest_relay.noise_channel import Topology, TsmgParams, draw_frame_trace
from nbest_relay.state_detector import detect_states


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--snr", type=float, default=10.0)
    ap.add_argument("--frames", type=int, default=50)
    ap.add_argument("--symbols", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=3)
    args = ap.parse_args()

    topo = Topology()
    rng = np.random.default_rng(args.seed)
    print(f"{'mu':>6s} {'map':>10s} {'memoryless':>11s}")
    for mu in (1.0, 5.0, 20.0, 100.0, 500.0):
        params = TsmgParams.from_memory(0.01, mu, 100.0, 10 ** (-args.snr / 10))
        wrong = {"map": 0, "memoryless": 0}
        total = 0
        for _ in range(args.frames):
            tr = draw_frame_trace(topo, params, args.symbols, rng)
            for method in wrong:
                states, _ = detect_states(tr.y_SR, tr.h_SR, tr.states, topo.P_S, params, method)
                wrong[method] += int(np.count_nonzero(states != tr.states))
            total += tr.states.size
        print(f"{mu:6.0f} {wrong['map'] / total:10.2e} {wrong['memoryless'] / total:11.2e}")


if __name__ == "__main__":
    main()
