"""Monthly topical correlation between posting streams."""

from ._core import (
    ConfigError,
    EmbeddingTable,
    EmptyLexicon,
    EmptyVocabulary,
    Error,
    Lexicon,
    ParseError,
    Posting,
    cosine,
    cross_filter,
    derive_seed,
    generate_synthetic_bundle,
    load_lexicon,
    load_postings,
    load_table,
    merge_phrases,
    mine_phrases,
    month_counts,
    pair_correlation,
    phrase_score,
    run_pipeline,
    select_k,
    tokenize,
    train_lda,
    train_sgns,
    tsne_reduce,
    umass_coherence,
    validate_manifest,
    write_postings,
    write_table,
)

__version__ = "0.1.0"
