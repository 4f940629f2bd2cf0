#!/usr/bin/env python3
"""Density scoring and the consecutive-window novelty machine.

A diagonal Gaussian mixture (one component per known pattern) is fit by EM
over the 27-dim features. Every live window gets a log-density score; three
consecutive scores below the lower threshold raise a new-pattern candidate,
and a confirmed candidate collects 120 samples for training.
"""

import numpy as np

from harstream.corpus import basic_profiles, novel_profile, pattern_stream_for_windows
from harstream.features import extract_features, feature_matrix, project_density, windows
from harstream.gmm import EmConfig, em_fit
from harstream.novelty import (
    NoveltyState,
    calibrate_thresholds,
    collect_step,
    resolve_candidate,
    step,
)

profiles = basic_profiles()
known = ("walking", "running", "shooting")

fvs, labels = [], []
for i, name in enumerate(known):
    for w in windows(pattern_stream_for_windows(profiles[name], 80, seed=i)):
        fvs.append(extract_features(w))
        labels.append(name)
X = project_density(feature_matrix(fvs))

model = em_fit(X, k=len(known), cfg=EmConfig(seed=0))
print(f"fit {model.k}-component mixture over {X.shape} features; "
      f"EM took {len(model.log_likelihoods)} iterations")
print(f"log-likelihood climbed {model.log_likelihoods[0]:.1f} -> {model.log_likelihoods[-1]:.1f}\n")

scores = model.log_pdf_batch(X)
per_pattern = {n: [s for s, l in zip(scores, labels) if l == n] for n in known}
cfg = calibrate_thresholds(model, per_pattern)
print(f"calibrated thresholds: match >= {cfg.theta_match:.1f}, new < {cfg.theta_new:.1f}")

# A known pattern scores comfortably above the match threshold...
walk_fv = fvs[0]
print(f"walking window score: {model.log_pdf(project_density(walk_fv)):.1f}")

# ...while an unseen movement scores far below the novelty threshold.
boxing_windows = [
    extract_features(w)
    for w in windows(pattern_stream_for_windows(novel_profile("boxing"), 6, seed=99))
]
print(f"boxing window score:  {model.log_pdf(project_density(boxing_windows[0])):.1f}\n")

state = NoveltyState()
for i, fv in enumerate(boxing_windows):
    state, event = step(state, model.log_pdf(project_density(fv)), fv, cfg)
    if event is not None:
        print(f"window {i}: {event.kind.value} (buffer holds {len(state.candidate_buffer)})")
        break

# The operator names the pattern; the triggering windows seed the collection.
state = resolve_candidate(state, "save", name="boxing", activity="WORKOUT")
print(f"saving as 'boxing' -> mode {state.mode.value}, "
      f"{len(state.candidate_buffer)}/{cfg.collect_target} collected")

for fv in boxing_windows[len(state.candidate_buffer):]:
    state, event = collect_step(state, fv, cfg)
print(f"after a few more windows: {event.kind.value} {event.collected}/{event.target}")
print("(a live session keeps collecting to 120, stores the pattern, then retrains)")
