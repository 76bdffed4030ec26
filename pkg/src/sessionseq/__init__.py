"""sessionseq: unified event logs, coded session sequences, and the
session-oriented analytics built on top of them."""

from .catalog import (
    CatalogEntry,
    CatalogReport,
    generate_catalog,
    load_descriptions,
    save_descriptions,
    search_catalog,
)
from .dictionary import (
    ALPHABET_SIZE,
    Dictionary,
    DictionaryEntry,
    EventHistogram,
    build_dictionary,
    code_point_for_rank,
    decode_symbol,
    dictionary_from_histogram,
    encode_event,
    load_dictionary,
    save_dictionary,
)
from .errors import (
    AlphabetExhausted,
    CharsetError,
    ComponentCountError,
    DictionaryMismatch,
    EmptyCorpus,
    EmptyFunnel,
    EmptyRequiredComponent,
    EventNameError,
    PatternSyntaxError,
    SessionSeqError,
    UnknownEvent,
    UnknownSymbol,
)
from .events import (
    ClientEvent,
    EventInitiator,
    EventName,
    EventPattern,
    ValidationReport,
    compile_pattern,
    event_to_record,
    match_pattern,
    parse_event_name,
    serialize_event_name,
    validate_event,
)
from .logio import (
    IngestStats,
    LogWindow,
    scan_log_window,
    write_log_window,
)
from .modeling import (
    CollocationStat,
    NgramModel,
    cross_entropy,
    extract_collocations,
    g2_statistic,
    load_model,
    perplexity,
    save_model,
    train_ngram,
)
from .queries import (
    FunnelResult,
    RollupTable,
    SummaryStats,
    SymbolClass,
    count_events,
    expand_pattern,
    funnel,
    funnel_unique_users,
    rollup,
    summary_stats,
)
from .sessions import (
    SequenceSet,
    SessionRecord,
    SessionizeStats,
    decode_sequence,
    read_session_file,
    sessionize,
    write_session_file,
)
from .synth import GenConfig, generate_corpus, zipf_weights

__version__ = "0.1.0"

__all__ = [
    "ALPHABET_SIZE",
    "AlphabetExhausted",
    "CatalogEntry",
    "CatalogReport",
    "CharsetError",
    "ClientEvent",
    "CollocationStat",
    "ComponentCountError",
    "Dictionary",
    "DictionaryEntry",
    "DictionaryMismatch",
    "EmptyCorpus",
    "EmptyFunnel",
    "EmptyRequiredComponent",
    "EventHistogram",
    "EventInitiator",
    "EventName",
    "EventNameError",
    "EventPattern",
    "FunnelResult",
    "GenConfig",
    "IngestStats",
    "LogWindow",
    "NgramModel",
    "PatternSyntaxError",
    "RollupTable",
    "SequenceSet",
    "SessionRecord",
    "SessionSeqError",
    "SessionizeStats",
    "SummaryStats",
    "SymbolClass",
    "UnknownEvent",
    "UnknownSymbol",
    "ValidationReport",
    "build_dictionary",
    "code_point_for_rank",
    "compile_pattern",
    "count_events",
    "cross_entropy",
    "decode_sequence",
    "decode_symbol",
    "dictionary_from_histogram",
    "encode_event",
    "event_to_record",
    "expand_pattern",
    "extract_collocations",
    "funnel",
    "funnel_unique_users",
    "g2_statistic",
    "generate_catalog",
    "generate_corpus",
    "load_descriptions",
    "load_dictionary",
    "load_model",
    "match_pattern",
    "parse_event_name",
    "perplexity",
    "read_session_file",
    "rollup",
    "save_descriptions",
    "save_dictionary",
    "save_model",
    "scan_log_window",
    "search_catalog",
    "serialize_event_name",
    "sessionize",
    "summary_stats",
    "train_ngram",
    "validate_event",
    "write_log_window",
    "write_session_file",
    "zipf_weights",
]
