"""Fine-tune/inference shim around a span-based NER/RE model.

Consumes exchange JSONL, emits prediction JSONL in the same convention, and is
driven entirely by a JSON run manifest. Two backends: the built-in ``tiny``
torch classifier (default, CPU-friendly) and ``external`` command templates
for a separately installed trainer.
"""

from .exchange import ENTITY_LABELS, RELATION_LABELS, Segment, read_segments, write_predictions
from .manifest import RunManifest
from .runner import predict, train

__all__ = [
    "ENTITY_LABELS",
    "RELATION_LABELS",
    "RunManifest",
    "Segment",
    "predict",
    "read_segments",
    "train",
    "write_predictions",
]
