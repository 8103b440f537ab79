"""The worked commentary example as a concrete model and frame.

Quoted to three decimals, the example's win-scores and weights multiply out
to p = 0.774. The unrounded values below round to every quoted figure (win
scores, weights and contributions alike) and give p = 0.7747, the quoted
77.5%. Spatial models are made constant by zeroing their weights and setting
the output bias to atanh(s).
"""
import os

import numpy as np

from conftest import frame, team
from tsstn.core import FrameTable
from tsstn.ingest import NORM_FEATURES, NormStats
from tsstn.model import TsstnModel
from tsstn.temporal import time_bin

QUOTED_S = (0.590, 0.292, 0.612, 0.901, 0.611, 0.231)
QUOTED_W = (0.348, 0.184, 0.129, 0.101, 0.172, 0.065)
QUOTED_C = (0.205, 0.054, 0.079, 0.091, 0.105, 0.015)
FIXTURE_S = (0.59049, 0.29249, 0.61249, 0.90149, 0.61149, 0.23149)
FIXTURE_W = (0.348, 0.184, 0.12949, 0.10149, 0.17202, 0.065)
FIXTURE_T = 15.0

DATA = os.path.join(os.path.dirname(__file__), "data")
ARTIFACT = os.path.join(DATA, "worked_example.tsstn")
FRAMES = os.path.join(DATA, "worked_example_frames.jsonl")


def fixture_stats():
    mins = [-20000.0, -30.0, -9.0] + [0.0] * 6 + [0.0]
    maxs = [20000.0, 30.0, 9.0] + [12000.0] * 6 + [30.0]
    return NormStats(tuple(mins), tuple(maxs), NORM_FEATURES)


def constant_model(s=FIXTURE_S, w=FIXTURE_W, t=FIXTURE_T):
    model = TsstnModel(fixture_stats(), seed=0)
    for m, target in zip(model.spatial.models, s):
        out = m.net.layers[-2]
        for p in m.params():
            if p is out.b:
                p.value[...] = np.arctanh(target)
            elif p is out.W:
                p.value[...] = 0.0
    model.temporal.set_bin_weights(time_bin(t), w)
    return model


def fixture_frames(t=FIXTURE_T):
    blue = team(gold=23884, kills=11, towers=8, heroes=(12, 34, 56, 78, 90))
    red = team(gold=20000, kills=7, towers=6, heroes=(13, 35, 57, 79, 91))
    return FrameTable.from_frames([frame(t=t, blue=blue, red=red, match_id="fixture", blue_wins=True)])
