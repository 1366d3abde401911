"""
Hiding behind a proxy topic
===========================

Every sensitive query is wrapped in a block of queries about an innocuous
proxy topic. The adverts follow the proxy, so the estimator sees nothing and
the reported PDE is zero whatever the user clicks.
"""

from plausdeny.estimators import train
from plausdeny.harness import ClickKind, ClickPolicy, aggregate, build_session, run_grid
from plausdeny.world import build_world

world = build_world(seed=0)
est = train(world.corpus, normalizer=world.normalizer)
observer = world.observer()

script = build_session(world, "diabetes", proxy="car", seed=2)
print(" | ".join(s.query for s in script.steps[:8]))

####################################################################
# Even clicking on every result does not leak the topic.

logs = run_grid(world, observer, est, ["diabetes", "location"], 14, seed=2,
                clicks=ClickPolicy(ClickKind.ALL), proxy="rotate")
print(aggregate(logs, title="proxy, ClickAll").to_text())
