"""Exhaustive search for the shortest general-k replay violation.

Enumerates every event sequence up to --max-len (arrivals and timer
firings) and reports the first one where the system with fewer copies
holds fewer batches than the one sending to all servers.
"""
import argparse
import itertools

from redq.coupling import ARRIVAL, format_events, replay_general_k


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=4)
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--r", type=int, default=3)
    ap.add_argument("--max-len", type=int, default=8)
    args = ap.parse_args()

    alphabet = [ARRIVAL] + list(range(args.n))
    for length in range(1, args.max_len + 1):
        for seq in itertools.product(alphabet, repeat=length):
            if seq[0] != ARRIVAL:
                continue
            t = replay_general_k(args.n, args.k, args.r, list(seq))
            if t.first_violation == length - 1:
                print(f"shortest violation, length {length}:")
                print(format_events(seq), end="")
                print(f"b(r={args.r}) = {t.b1}\nb(r={args.n}) = {t.b2}")
                return
    print(f"no violation up to length {args.max_len}")


if __name__ == "__main__":
    main()
