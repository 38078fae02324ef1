"""kinfuse: entity-context pipeline for knowledge-infused fine-tuning.

Stages: ingest and segment a domain corpus, index entity mentions, retrieve
per-entity context under a token budget, emit masked prompt datasets with
context on the training side only, and score ranked predictions.
"""

__version__ = "0.1.0"
