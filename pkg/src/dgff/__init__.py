"""Graph Fourier frames with denser graph frequencies."""
from .basis import dcb, dfb, gfb, mag_gfb, rgff, sf_gfb
from .containers import Origin, SpectralBasis, SpectralFrame
from .convex_solver import DivergenceError, basis_pursuit, pds_solve
from .frames import FAMILIES, adgff_path, adgff_ring, build_frame, lidgff, lrlidgff, mag_dgff, sfdgff
from .graph import (Graph, GraphError, laplacian, magnetic_laplacian, make_path, make_random, make_ring,
                    make_sbm, make_swiss_roll, normalized_laplacian)
from .manifold_opt import PCALError, SolverConfig, pcal_solve
from .spectral import (FilterResponse, analyze, dgs_filter, ideal_lowpass, make_sampling, recover_noiseless,
                       recover_noisy, relative_error, snr_db, spectral_dispersion, synthesize, tikhonov_response)

__version__ = "0.1.0"

__all__ = [
    "DivergenceError", "FAMILIES", "FilterResponse", "Graph", "GraphError", "Origin", "PCALError", "SolverConfig",
    "SpectralBasis", "SpectralFrame", "adgff_path", "adgff_ring", "analyze", "basis_pursuit", "build_frame",
    "dcb", "dfb", "dgs_filter", "gfb", "ideal_lowpass", "laplacian", "lidgff", "lrlidgff", "mag_dgff",
    "mag_gfb", "magnetic_laplacian", "make_path", "make_random", "make_ring", "make_sbm", "make_sampling",
    "make_swiss_roll", "normalized_laplacian", "pcal_solve", "pds_solve", "recover_noiseless", "recover_noisy",
    "relative_error", "rgff", "sf_gfb", "sfdgff", "snr_db", "spectral_dispersion", "synthesize",
    "tikhonov_response",
]
