"""Trip tries: GPS trips as region strings in a prefix tree that doubles as a
single-linkage dendrogram."""
from triptrie.geo_grid import NULL_PAD, ROOT, Grid, coord_to_symbol, make_grid, symbol_to_cell
from triptrie.ingest import TripString, encode_trip, extract_trips, pad_strings, parse_trace_file, resample_trip
from triptrie.kernels import BACKEND
from triptrie.metrics import levenshtein, shared_prefix_len, weighted_hamming
from triptrie.trie import Partition, Trie, build_trie, build_trie_from_matrix

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Grid",
    "NULL_PAD",
    "Partition",
    "ROOT",
    "Trie",
    "TripString",
    "build_trie",
    "build_trie_from_matrix",
    "coord_to_symbol",
    "encode_trip",
    "extract_trips",
    "levenshtein",
    "make_grid",
    "pad_strings",
    "parse_trace_file",
    "resample_trip",
    "shared_prefix_len",
    "symbol_to_cell",
    "weighted_hamming",
]
