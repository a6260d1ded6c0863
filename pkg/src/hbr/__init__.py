"""Stage-wise (H, B, R) fidelity attribution for quantum compilation pipelines."""

__version__ = "0.1.0"
