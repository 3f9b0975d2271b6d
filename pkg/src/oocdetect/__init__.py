"""Out-of-context news detection engine.

Builds a multi-granularity evidence database (entity- and event-level
vector indices) from a news corpus, retrieves top-k evidence for an
input image-caption pair, and routes everything through a staged LLM
reasoning pipeline that ends in a binary verdict plus explanation. Also
ships the evaluation harness and an HTTP service backing the review
console.
"""

__version__ = "0.1.0"
