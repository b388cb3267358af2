"""Produce data/calibration.json.

Every constant is the largest value observed on CALIBRATION_SEED (never used by
the acceptance suite) times a safety margin. Run once with
``python -m momentlab.calibrate``; everything else only reads the file.
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

from .acceptance import CALIBRATION_SEED, bernstein_table, bound_ratios, domination_ratios

MARGINS = {"intersection_bound_C": 2.0, "C_dom": 2.0, "symbol_B": 2.0, "bernstein_C": 1.5}


def calibrate(seed: int = CALIBRATION_SEED) -> dict:
    from .multiplier import verify_symbol_conditions

    consts = {}
    rows = bound_ratios(100, 10**5, seed)
    m = max(v / bd for _, v, _, bd in rows)
    consts["intersection_bound_C"] = (m, "max MC volume / (delta^d / sqrt((delta+Delta_bar)(delta+d_bar))), "
                                         "100 intersecting pairs x 3 deltas, 1e5 samples")
    pairs = domination_ratios(50, 20, seed)
    m = max(ta / sa for ta, sa in pairs if sa > 0)
    consts["C_dom"] = (m, "max tube_average / smooth_average, 50 random fields x 20 curves, delta 2^-4")
    rep = verify_symbol_conditions(3, 1.0e300, 4, samples=400, seed=seed)
    consts["symbol_B"] = (rep.B_required, "B_required at k = 4, |alpha| <= 4, 400 samples")
    table = bernstein_table(100, seed)
    m = max(max(v) for v in table.values())
    consts["bernstein_C"] = (m, "max worst ratio over s in {1,2}, p in {2,4}, R in {8,16,32}, 100 trials")
    return {
        "calibration_seed": seed,
        "constants": {k: {"value": v * MARGINS[k], "observed": v, "margin": MARGINS[k], "procedure": how}
                      for k, (v, how) in consts.items()},
    }


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="python -m momentlab.calibrate")
    ap.add_argument("--seed", type=int, default=CALIBRATION_SEED)
    ap.add_argument("--out", default=str(Path(__file__).parent / "data" / "calibration.json"))
    args = ap.parse_args(argv)
    data = calibrate(args.seed)
    Path(args.out).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    for k, v in data["constants"].items():
        print(f"{k} = {v['value']:.6g} (observed {v['observed']:.6g}, margin {v['margin']:g})")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
