"""Full-scale model-clustering experiment.

Generates 50 graphs per model at n = 50,000 with mean degree 15, computes
r = 200 fingerprints, embeds them with a cosine kernel PCA, and reports
clustering purity for the default and the "cs1-tuned" distance settings.
This takes several hours on a single machine, so it lives outside the test
suite; run it directly:

    python3 scripts/cluster_models_full.py [--out results.json]

Fingerprints are cached to --cache (default /tmp/cluster_full_fps.pkl) so
the expensive generation phase only runs once.
"""

import argparse
import json
import pickle
import time
from pathlib import Path

import numpy as np

from nbdist import (ModelSpec, PRESETS, TuningParams, feature_vector,
                    generate, top_eigenvalues)
from nbdist.analysis import gmm_em, kpca_cosine, purity

MODELS = ("er", "ba", "ws", "cm", "kr", "hg")
N = 50_000
PER_MODEL = 50
R = 200


def build_fingerprints(cache):
    if cache.exists():
        with cache.open("rb") as fh:
            return pickle.load(fh)
    fps, labels = [], []
    for mi, model in enumerate(MODELS):
        gamma = 2.3 if model in ("cm", "hg") else None
        for s in range(PER_MODEL):
            t0 = time.time()
            spec = ModelSpec(model, n=N, target_mean_degree=15.0,
                             gamma=gamma, seed=1000 * mi + s)
            fps.append(top_eigenvalues(generate(spec), R))
            labels.append(model)
            print(f"{model} {s + 1}/{PER_MODEL} ({time.time() - t0:.0f}s)",
                  flush=True)
        with cache.open("wb") as fh:
            pickle.dump((fps, labels), fh)
    return fps, labels


def mean_purity(fps, labels, tuning, seeds=range(5)):
    feats = [feature_vector(fp, tuning) for fp in fps]
    embedded = kpca_cosine(feats, dims=2)
    scores = [purity(gmm_em(embedded, k=len(MODELS), restarts=10,
                            seed=s).assignments, labels)
              for s in seeds]
    return float(np.mean(scores)), [float(p) for p in scores]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cache", type=Path,
                    default=Path("/tmp/cluster_full_fps.pkl"))
    ap.add_argument("--out", type=Path, default=None)
    args = ap.parse_args()

    fps, labels = build_fingerprints(args.cache)
    results = {}
    for name, tuning in (("untuned", TuningParams()),
                         ("cs1-tuned", PRESETS["cs1-tuned"])):
        mean, scores = mean_purity(fps, labels, tuning)
        results[name] = {"mean_purity": mean, "per_seed": scores}
        print(f"{name}: mean purity {mean:.4f} over seeds {scores}")

    if args.out:
        args.out.write_text(json.dumps(results, indent=2) + "\n")


if __name__ == "__main__":
    main()
