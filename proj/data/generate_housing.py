# Copyright 2026 The sdcfhe Authors.
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Writes housing_synth.csv and prints the plaintext-trained linear model.

The columns follow the California Housing layout. Values are synthetic.
"""

import numpy as np

COLUMNS = ["MedInc", "HouseAge", "AveRooms", "AveBedrms", "Population",
           "AveOccup", "Latitude", "Longitude", "MedHouseVal"]


def synthesize(rows, rng):
    inc = np.clip(rng.lognormal(1.25, 0.45, rows), 0.5, 15.0)
    age = rng.integers(1, 53, rows).astype(float)
    rooms = np.clip(rng.normal(5.2, 1.2, rows) + 0.25 * (inc - 3.8), 2.0, 10.0)
    bedrms = np.clip(rng.normal(1.07, 0.08, rows) * rooms / 5.2, 0.6, 2.5)
    pop = np.clip(rng.lognormal(7.05, 0.7, rows), 30, 12000).round()
    occup = np.clip(rng.normal(2.9, 0.6, rows), 1.2, 6.0)
    lat = rng.uniform(32.6, 41.9, rows)
    lon = -114.4 - (lat - 32.6) * 0.78 - rng.uniform(0.0, 3.0, rows)
    val = (0.45 * inc + 0.012 * age - 0.09 * rooms + 0.55 * bedrms
           - 0.00001 * pop - 0.08 * occup - 0.38 * (lat - 36.0)
           - 0.36 * (lon + 119.5) + 0.3 + rng.normal(0, 0.35, rows))
    val = np.clip(val, 0.15, 5.0)
    return np.column_stack([inc, age, rooms, bedrms, pop, occup, lat, lon, val])


def main():
    rng = np.random.default_rng(20260101)
    data = synthesize(1024, rng)
    with open("housing_synth.csv", "w") as f:
        f.write(",".join(COLUMNS) + "\n")
        for row in data:
            f.write(",".join(f"{v:.6f}" for v in row) + "\n")
    text = np.loadtxt("housing_synth.csv", delimiter=",", skiprows=1)
    x, y = text[:, :8], text[:, 8]
    mean, std = x.mean(axis=0), x.std(axis=0)
    z = (x - mean) / std
    design = np.column_stack([z, np.ones(len(z))])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    for name, v in [("mean", mean), ("stddev", std), ("weight", coef[:8])]:
        print(name, ", ".join(f"{c:.17g}" for c in v))
    print("bias", f"{coef[8]:.17g}")


if __name__ == "__main__":
    main()
