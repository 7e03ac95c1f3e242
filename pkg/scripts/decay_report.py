"""Summarise finished runs: final losses, decay fits, errors.

    python scripts/decay_report.py [runs_dir]
"""
import json
import sys
from pathlib import Path


def main(root: Path):
    for manifest in sorted(root.glob("*/manifest.json")):
        m = json.loads(manifest.read_text())
        fits = m["summary"]["fits"]
        print(f"== {manifest.parent.name}  chi={m['chi']:.3g}  "
              f"final loss={m['final_loss']['total']:.3e}  ({m['train_seconds'] / 60:.0f} min)")
        for model in ("exponential", "polynomial", "logarithmic"):
            f = fits[model]
            if "error" in f:
                print(f"   {model:12s} {f['error']}")
            else:
                print(f"   {model:12s} slope {f['slope']:+.4f} intercept {f['intercept']:+.4f} "
                      f"R2 {f['r_squared']:.5f}")
        print(f"   best {fits['best']}  E_inf {fits['E_inf']:.3e}")
        rel = m["summary"].get("relative_error")
        if rel:
            print("   relative error " + " ".join(f"{k}={v:.2e}" for k, v in rel.items()))


if __name__ == "__main__":
    main(Path(sys.argv[1] if len(sys.argv) > 1 else "runs"))
