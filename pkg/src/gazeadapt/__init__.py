"""Gaze-driven highlighting for narrative visualizations with embedded bar charts.

The package converts a raw gaze stream into fixations, tracks attention over
the reference sentences of a document, and fires highlighting interventions
on the document's chart when a reference has received enough fixations.
It also ships the surrounding study tooling: a session service, a trace
synthesizer/replay harness, and the statistics used to evaluate runs.
"""

__version__ = "0.1.0"
