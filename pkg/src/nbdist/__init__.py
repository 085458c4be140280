"""Graph distance from truncated non-backtracking spectra.

Compare undirected, unweighted graphs by the largest complex eigenvalues
of their non-backtracking operator: shave to the 2-core, eigensolve the
2n x 2n Ihara block matrix, and take the Euclidean distance between the
sorted (real, imaginary) eigenvalue feature vectors, with optional
triangle (sigma) and degree (eta) emphasis.
"""

from .analysis import (KSResult, LabeledPointSet, TimelineReport,
                       fingerprint_ks_test, gmm_em, kpca_cosine, ks_two_sample,
                       purity, rewiring_profile, timeline)
from .distance import (PRESETS, TuningParams, distance_matrix, feature_vector,
                       tnbsd)
from .generators import (ModelSpec, SampleSpec, cm_null_ensemble, generate,
                         rewire, sample)
from .graph import (DegreeMoments, Graph, degree_moments, parse_edge_list,
                    serialize, shave)
from .spectral import (Fingerprint, build_ihara_matrix, build_nb_matrix,
                       fingerprint_from_csv, fingerprint_to_csv,
                       full_spectrum_dense, nb_cycle_count, top_eigenvalues,
                       triangle_count_spectral)

__version__ = "0.1.0"

__all__ = [
    "DegreeMoments", "Fingerprint", "Graph", "KSResult", "LabeledPointSet",
    "ModelSpec", "PRESETS", "SampleSpec", "TimelineReport", "TuningParams",
    "build_ihara_matrix", "build_nb_matrix", "cm_null_ensemble",
    "degree_moments", "distance_matrix", "feature_vector",
    "fingerprint_from_csv", "fingerprint_ks_test", "fingerprint_to_csv",
    "full_spectrum_dense", "generate", "gmm_em", "kpca_cosine",
    "ks_two_sample", "nb_cycle_count", "parse_edge_list", "purity",
    "rewire", "rewiring_profile", "sample", "serialize", "shave",
    "timeline", "tnbsd", "top_eigenvalues", "triangle_count_spectral",
]
