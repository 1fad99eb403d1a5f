"""Score profiles on the synthetic scenarios, with and without supervision.

Recreates the qualitative picture that motivates the supervised objective:
a pure likelihood model flags anomalies in empty regions but cannot flag an
anomaly sitting inside the normal cluster, while the supervised model flags
both.  Prints an ASCII score profile over the first attribute.
"""

import numpy as np

from anodens import (
    GAUSSIAN_MIXTURE,
    anomaly_score_batch,
    build_masks,
    dedup,
    init_params,
    normalize_minmax,
    split,
)
from anodens.synth import make_scenario, profile_grid
from anodens.training import TrainConfig, train

SEED = 1


def fit_models(scenario):
    raw = make_scenario(scenario, SEED)
    ds = dedup(raw)
    ds, _ = normalize_minmax(ds)
    bundle = split(ds, SEED, n_train_anom=4, n_val_anom=4)
    masks = build_masks(2, 64, 2, 2, seed=1000 + SEED)
    init = init_params(masks, GAUSSIAN_MIXTURE, 3, seed=2000 + SEED)
    cfg = TrainConfig(learning_rate=3e-3, max_epochs=60, batch_size=16,
                      patience=15, seed=SEED)
    unsup, _ = train(init, ds, bundle, cfg, 0.0)
    sup, _ = train(init, ds, bundle, cfg, 1000.0)
    anoms = ds.attributes[ds.labels == 1][:, 0]
    return unsup, sup, anoms


def ascii_profile(scores, width=61):
    # clip the top so one extreme spike cannot wash out the rest of the row
    lo, hi = scores.min(), np.quantile(scores, 0.95)
    levels = " .:-=+*#%@"
    span = hi - lo if hi > lo else 1.0
    idx = np.clip((scores - lo) / span * (len(levels) - 1), 0, len(levels) - 1).astype(int)
    return "".join(levels[i] for i in idx[:: max(1, len(scores) // width)])


grid = profile_grid(241)
for scenario in ("outside_cluster", "inside_cluster"):
    unsup, sup, anom_x = fit_models(scenario)
    print(f"\n=== {scenario} ===")
    print(f"anomaly positions on the x axis (normalized): "
          f"{np.round(np.unique(anom_x.round(2)), 2).tolist()}")
    print("score over x in [0, 1], darker = more anomalous")
    print(f"  plain likelihood : |{ascii_profile(anomaly_score_batch(unsup, grid))}|")
    print(f"  supervised       : |{ascii_profile(anomaly_score_batch(sup, grid))}|")

print(
    "\nreading: in the outside scenario both rows darken at the edges, where"
    "\nthe anomalies live.  in the inside scenario only the supervised row"
    "\ndevelops a dark notch at the cluster center, where the planted"
    "\nanomalies hide among the normals."
)
