#!/usr/bin/env python3
"""Render one synthetic lead, digitize it both ways, and write debug files.

Writes into the output directory:
    lead.png            the color rendering
    lead.mask.png       the clean ground-truth mask
    lead.json           the ground-truth signal
    lead.pred.json      signal digitized from the raw image
    lead.overlay.png    extracted trace drawn over the image (debugging aid)

    python3 scripts/demo_digitize.py --out /tmp/demo --seed 4
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from ecgdigitize import RasterImage, SignalSpec, digitize, evaluate, gen_signal, rasterize, write_png
from ecgdigitize.synth import vary_signal


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="demo_out")
    parser.add_argument("--seed", type=int, default=4)
    args = parser.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    signal = gen_signal(vary_signal(SignalSpec(noise_mv=0.01), args.seed))
    image, mask, geometry = rasterize(signal)
    write_png(out / "lead.png", image)
    write_png(out / "lead.mask.png", mask)
    (out / "lead.json").write_text(json.dumps(signal.to_json_dict()) + "\n")

    prediction, diagnostics = digitize(image)
    (out / "lead.pred.json").write_text(json.dumps(prediction.to_json_dict()) + "\n")

    overlay = image.pixels.copy()
    columns = np.arange(diagnostics.trace.n_columns)
    rows = np.clip(np.round(diagnostics.trace.y).astype(int), 0, image.height - 1)
    overlay[rows, columns] = (0, 120, 255)
    write_png(out / "lead.overlay.png", RasterImage(overlay))

    report = evaluate(prediction, signal)
    print(f"grid: {geometry.width_pixels:.1f} x {geometry.height_pixels:.1f} px per large square")
    print(f"detected: {diagnostics.grid.width_pixels:.2f} x {diagnostics.grid.height_pixels:.2f} px")
    print(f"rho {report.pearson:.5f}   mse {report.mse:.6f} mV^2   lag {report.lag}")
    print(f"wrote {out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
