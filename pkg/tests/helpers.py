"""Shared helpers for tests that rebuild solver output from disk."""

import os

from trendcsc.fileio import parse_bool, read_config, read_matrix, read_triplets
from trendcsc.model import Activations, Decomposition, Dictionary, Trend


def rebuild_decomposition(out_dir):
    """Reconstruct a Decomposition from the files a fit command wrote.

    Returns (decomposition, manifest_mapping).
    """
    path = lambda name: os.path.join(out_dir, name)
    manifest = read_config(path("manifest.txt"))
    k = int(manifest["k"])
    w = int(manifest["w"])
    n = int(manifest["n_samples"])
    _, atoms = read_matrix(path("atoms.csv"))
    maps = read_triplets(path("activations.csv"), k, n - w + 1)
    _, trend = read_matrix(path("trend.csv"))
    _, residual = read_matrix(path("residual.csv"))
    _, trace = read_matrix(path("objective.csv"))
    dec = Decomposition(
        dictionary=Dictionary(atoms.T),
        activations=Activations(maps),
        trend=Trend(trend[:, 0]),
        residual=residual[:, 0],
        objective_trace=trace[:, 0],
        iterations_run=int(manifest["iterations_run"]),
        converged=parse_bool(manifest["converged"]),
        lambda_value=float(manifest["lambda_abs"]),
        lambda_max_value=float(manifest["lambda_max"]),
        lambda_tv_value=float(manifest["lambda_tv"]),
        epsilon_value=float(manifest["epsilon"]),
    )
    return dec, manifest
