"""
Does query noise restore deniability?
=====================================

Sessions interleave sensitive queries with random popular queries. The
observer still picks up the sensitive topic, and the reported PDE at the
last probe stays far above the detection level.
"""

from plausdeny.estimators import train
from plausdeny.harness import NoiseModel, aggregate, build_session, run_grid
from plausdeny.world import build_world

world = build_world(seed=0)
est = train(world.corpus, normalizer=world.normalizer)
observer = world.observer()

####################################################################
# A session with two noise queries before every probe.

script = build_session(world, "payday", NoiseModel.M, seed=1)
for step in script.steps[:12]:
    print(f"{step.kind:<10} {step.query}")

####################################################################
# Reported PDE per probe, as max and (median) over folds.

topics = ["payday", "gambling", "divorce"]
for noise in (NoiseModel.NONE, NoiseModel.H):
    logs = run_grid(world, observer, est, topics, 14, seed=1, noise=noise)
    print(aggregate(logs, title=f"noise {noise.name}").to_text())
