"""Exposure-to-intensity response curves under increasing ambient light.

The sensor integrates light linearly in exposure time until the 8-bit code
ceiling clips it. Brighter scenes saturate at proportionally shorter
exposures, which is why a fixed exposure cannot serve all conditions.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import pulsecam as pc

r0, roi = pc.uniform_scene()
sensor = pc.SensorConfig(responsivity=1.0)
exposures = list(np.linspace(0.5, 22.0, 44))

fig, ax = plt.subplots(figsize=(7, 4.5))
for level in (10.0, 20.0, 40.0, 80.0):
    spec = pc.ScenarioSpec(
        duration=5.0,
        illumination=pc.IlluminationField(level),
        skin=pc.SkinReflectanceField(r0, (0.0, 0.0, 0.0)),
        roi=roi,
    )
    curve = pc.response_curve(spec, sensor, 0.0, exposures)
    ax.plot(*zip(*curve), label=f"ambient level {level:g}")

ax.axhline(140, color="grey", ls="--", lw=0.8, label="target code 140")
ax.axhline(255, color="k", ls=":", lw=0.8)
ax.set_xlabel("exposure time [ms]")
ax.set_ylabel("mean face intensity [codes]")
ax.set_title("Brighter scenes clip at shorter exposures")
ax.legend(loc="lower right", fontsize=8)
fig.tight_layout()
fig.savefig("output/01_exposure_response.png", dpi=130)
print("wrote output/01_exposure_response.png")
