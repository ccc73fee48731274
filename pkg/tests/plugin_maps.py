"""Reference plugin for the JSON-lines extension protocol.

Usage: ``plugin_maps.py KIND`` with KIND one of zero, identity, natural,
nan, garbage, short, silent.  The last four break the protocol on purpose.
"""

from __future__ import annotations

import json
import math
import sys
import time


def mazur(x: float, p: int) -> float:
    return math.copysign(abs(x) ** (2.0 / p), x) if x != 0 else 0.0


def respond(kind: str, msg: dict) -> str:
    pt = msg["point"]
    n = msg["component_dim"]
    ps = msg["p_list"]
    if kind == "zero":
        out = [0.0] * len(pt)
    elif kind == "identity":
        out = list(pt)
    elif kind == "natural":
        out = [mazur(pt[i * n + j], ps[i]) for i in range(len(ps)) for j in range(n)]
    elif kind == "nan":
        out = [float("nan")] * len(pt)
    elif kind == "garbage":
        return "this is not json"
    elif kind == "short":
        out = list(pt[:-1])
    elif kind == "silent":
        time.sleep(60)
        out = []
    else:
        raise SystemExit(f"unknown kind {kind}")
    return json.dumps({"result": out})


def main() -> None:
    kind = sys.argv[1]
    for line in sys.stdin:
        if not line.strip():
            continue
        sys.stdout.write(respond(kind, json.loads(line)) + "\n")
        sys.stdout.flush()


if __name__ == "__main__":
    main()
