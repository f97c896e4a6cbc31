"""Lyrics corpus tooling: tokenization, vocabulary, synthetic paired dataset."""

from .vocab import (
    BOS,
    EOS,
    PAD,
    UNK,
    Vocabulary,
    build_vocab,
    detokenize,
    normalize,
    tokenize,
)
from .synth import (
    SynthClass,
    SynthDataset,
    SynthSpec,
    default_synth_spec,
    synthesize_alternating_song,
    synthesize_dataset,
)
from .io import (
    PairedExample,
    attach_embeddings,
    load_lines_corpus,
    make_paired_examples,
    save_lines_corpus,
)

__all__ = [
    "PAD",
    "BOS",
    "EOS",
    "UNK",
    "Vocabulary",
    "normalize",
    "tokenize",
    "detokenize",
    "build_vocab",
    "SynthClass",
    "SynthSpec",
    "SynthDataset",
    "default_synth_spec",
    "synthesize_dataset",
    "synthesize_alternating_song",
    "PairedExample",
    "make_paired_examples",
    "attach_embeddings",
    "save_lines_corpus",
    "load_lines_corpus",
]
