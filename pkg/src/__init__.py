"""TEMSP: truncated Euler-Maruyama segment process for stochastic delay equations."""

__version__ = "0.6.0"
__author__ = "Aeturnis Development Labs LLC"
__email__ = "projects@aeturnis.dev"

# Version history:
# 0.1.0 - Initial project setup (enums, exceptions, grid, segments)
# 0.2.0 - SDDE models, certificates and sampling-based model checks
# 0.3.0 - Truncation rules, step-size gates and keyed random substreams
# 0.4.0 - Vectorised segment-process engine with inline diagnostics
# 0.5.0 - Test functionals, sample statistics and truncated Wasserstein distances
# 0.6.0 - Run configuration, ensemble runs, manifests, CSV tables, plots and the CLI
