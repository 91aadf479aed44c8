"""
affembed: affect-enriched word embeddings.

Post-processes pretrained word vectors with an affect lexicon
(Valence-Arousal-Dominance) and evaluates the result.

Pipelines:
    enrich     - concatenate affect vectors, standardize, PCA back to D dims
    retrofit   - pull vectors toward ontology neighbors, optionally weighted by affect strength
    eval-sim   - Spearman correlation against word-similarity benchmarks
    noise      - polarity / granular noise of affect-lexicon neighborhoods
    neighbors  - top-k cosine neighbors of a word
    serve      - read-only HTTP query service
"""

import logging

__version__ = "0.3.0"

logger = logging.getLogger(__name__)
logger.addHandler(logging.NullHandler())
