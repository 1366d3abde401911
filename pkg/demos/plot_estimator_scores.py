"""
Scoring advert pages
====================

Train the smoothed estimator on the simulated advert corpus and score a few
pages. A score above 1.1 counts as evidence of interest in the topic.
"""

from plausdeny.core import AdvertPage
from plausdeny.estimators import pri, pri_all, pri_plus, train
from plausdeny.world import build_world

world = build_world(seed=0)
est = train(world.corpus, normalizer=world.normalizer)
print(len(est.topics), "topics,", len(est.dictionary), "keywords")

####################################################################
# An advert page from the gambling bank scores high for gambling only.

page = AdvertPage(world.banks["gambling"].texts[:2])
for topic, score in sorted(zip(est.topics, pri_all(est, page)), key=lambda x: -x[1])[:4]:
    print(f"{topic:<12} {score:8.3f}")

####################################################################
# A page without any dictionary keyword is neutral: the score is exactly 1.

v = est.single("gambling")
print("empty page:", pri_plus(est, AdvertPage(), v).value)

####################################################################
# Without smoothing, keywords the topic never saw contribute nothing.

mixed = AdvertPage(world.banks["divorce"].texts[:1] + world.banks["gambling"].texts[:1])
print("smoothed  :", pri_plus(est, mixed, v).value)
print("unsmoothed:", pri(est, mixed, v).value)
