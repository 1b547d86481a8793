"""Raw taxi traces to trip strings.

Trace files hold one record per line: ``lat, lon, occupied, epoch`` with
commas and/or whitespace between fields, e.g.
``37.75134, -122.39488, 0, 1213084687``.
"""
from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np

from triptrie.geo_grid import NULL_PAD, Grid, OutOfBoundsError, coords_to_symbols

log = logging.getLogger(__name__)

_SPLIT = re.compile(r"[,\s]+")

CORPUS_FORMAT = "triptrie-corpus"
CORPUS_VERSION = 1


class TraceFormatError(ValueError):
    pass


class TripRejected(ValueError):
    def __init__(self, trip_id, index, message):
        super().__init__(message)
        self.trip_id = trip_id
        self.index = index


class TraceRecord(NamedTuple):
    lat: float
    lon: float
    occupied: bool
    epoch: int


@dataclass
class RawTrip:
    taxi_id: str
    records: list

    @property
    def start(self) -> int:
        return self.records[0].epoch

    @property
    def duration(self) -> int:
        return self.records[-1].epoch - self.records[0].epoch


@dataclass(frozen=True)
class TripString:
    symbols: tuple
    t_r: int
    trip_id: int
    taxi_id: str = ""
    start: int = 0

    def __len__(self):
        return len(self.symbols)

    @property
    def unpadded(self) -> tuple:
        end = len(self.symbols)
        while end and self.symbols[end - 1] == NULL_PAD:
            end -= 1
        return self.symbols[:end]


def _parse_line(line: str):
    fields = [f for f in _SPLIT.split(line.strip()) if f]
    if len(fields) != 4:
        return None
    try:
        lat, lon = float(fields[0]), float(fields[1])
        flag, epoch = int(fields[2]), int(fields[3])
    except ValueError:
        return None
    if flag not in (0, 1) or epoch < 0:
        return None
    if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
        return None
    return TraceRecord(lat, lon, bool(flag), epoch)


def parse_trace_lines(lines: Iterable[str]) -> tuple[list[TraceRecord], int]:
    """Parse trace lines; return records sorted by epoch and the malformed-line count."""
    records = []
    bad = 0
    for line in lines:
        if not line.strip():
            continue
        rec = _parse_line(line)
        if rec is None:
            bad += 1
        else:
            records.append(rec)
    total = len(records) + bad
    if total and bad * 2 > total:
        raise TraceFormatError(f"{bad} of {total} lines malformed")
    # stable: equal epochs keep file order
    records.sort(key=lambda r: r.epoch)
    return records, bad


def parse_trace_file(source, taxi_id: str = "") -> list[TraceRecord]:
    """Parse a trace file (path or iterable of lines)."""
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            records, bad = parse_trace_lines(fh)
    else:
        records, bad = parse_trace_lines(source)
    if bad:
        log.info("taxi %s: skipped %d malformed lines", taxi_id, bad)
    return records


def taxi_id_from_path(path) -> str:
    stem = Path(path).stem
    return stem[4:] if stem.startswith("new_") else stem


def extract_trips(records: list[TraceRecord], taxi_id: str = "") -> list[RawTrip]:
    """Split epoch-sorted records into maximal occupied runs of >= 2 samples.

    Repeated epochs inside a run keep their first record only.
    """
    trips = []
    run: list[TraceRecord] = []

    def close():
        if len(run) >= 2:
            trips.append(RawTrip(taxi_id, list(run)))
        run.clear()

    for rec in records:
        if rec.occupied:
            if run and rec.epoch == run[-1].epoch:
                continue
            run.append(rec)
        elif run:
            close()
    close()
    return trips


def resample_trip(trip: RawTrip, t_r: int) -> list[tuple[float, float]]:
    """Linearly interpolate ``(lon, lat)`` at times ``0, t_r, 2 t_r, ...`` from trip start."""
    if t_r <= 0:
        raise ValueError(f"temporal resolution must be positive, got {t_r}")
    epochs = np.array([r.epoch for r in trip.records], dtype=float)
    lons = np.array([r.lon for r in trip.records])
    lats = np.array([r.lat for r in trip.records])
    steps = int(trip.duration // t_r) + 1
    t = epochs[0] + np.arange(steps, dtype=float) * t_r
    # np.interp clamps outside [epochs[0], epochs[-1]] to the endpoint values
    return list(zip(np.interp(t, epochs, lons).tolist(), np.interp(t, epochs, lats).tolist()))


def encode_trip(grid: Grid, samples, trip_id: int, t_r: int = 60, taxi_id: str = "", start: int = 0) -> TripString:
    """Map each ``(lon, lat)`` sample to its region; repeated regions are kept."""
    if len(samples) == 0:
        return TripString((), t_r, trip_id, taxi_id, start)
    xs, ys = zip(*samples)
    try:
        symbols = coords_to_symbols(grid, xs, ys)
    except OutOfBoundsError as exc:
        raise TripRejected(trip_id, exc.index, f"trip {trip_id}: {exc}") from exc
    return TripString(tuple(symbols.tolist()), t_r, trip_id, taxi_id, start)


def filter_by_duration(trips, max_minutes: float):
    """Keep trips lasting at most ``max_minutes``; return ``(kept, kept_fraction)``."""
    trips = list(trips)
    limit = max_minutes * 60
    kept = [t for t in trips if t.duration <= limit]
    frac = len(kept) / len(trips) if trips else 1.0
    return kept, frac


def pad_strings(strings):
    """Right-pad with NULL_PAD to the longest length; return ``(padded, l)``."""
    strings = list(strings)
    if not strings:
        raise ValueError("cannot pad an empty corpus")
    l = max(len(s) for s in strings)
    out = []
    for s in strings:
        if len(s) == l:
            out.append(s)
        else:
            out.append(TripString(tuple(s.symbols) + (NULL_PAD,) * (l - len(s)), s.t_r, s.trip_id, s.taxi_id, s.start))
    return out, l


def as_matrix(strings, l=None) -> np.ndarray:
    """Stack strings into an int64 ``(n, l)`` matrix, padding with NULL_PAD."""
    seqs = [s.symbols if hasattr(s, "symbols") else tuple(s) for s in strings]
    if l is None:
        l = max((len(s) for s in seqs), default=0)
    mat = np.full((len(seqs), l), NULL_PAD, dtype=np.int64)
    for i, s in enumerate(seqs):
        if len(s) > l:
            raise ValueError(f"string {i} longer than l={l}")
        mat[i, : len(s)] = s
    return mat


# --- on-disk formats -------------------------------------------------------

def write_trips(path, trips: list[RawTrip]) -> None:
    """Raw trips as JSON lines: ``{"taxi_id", "records": [[epoch, lat, lon], ...]}``."""
    with open(path, "w", encoding="utf-8") as fh:
        for t in trips:
            recs = [[r.epoch, r.lat, r.lon] for r in t.records]
            fh.write(json.dumps({"taxi_id": t.taxi_id, "records": recs}, separators=(",", ":")) + "\n")


def read_trips(path) -> list[RawTrip]:
    trips = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            recs = [TraceRecord(lat, lon, True, int(ep)) for ep, lat, lon in obj["records"]]
            trips.append(RawTrip(obj["taxi_id"], recs))
    return trips


def _corpus_line(s: TripString) -> str:
    obj = {"trip_id": s.trip_id, "taxi_id": s.taxi_id, "start": s.start, "t_r": s.t_r, "symbols": list(s.symbols)}
    return json.dumps(obj, separators=(",", ":"))


def write_corpus(path, strings) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps({"format": CORPUS_FORMAT, "version": CORPUS_VERSION}, separators=(",", ":")) + "\n")
        for s in strings:
            fh.write(_corpus_line(s) + "\n")


def read_corpus(path) -> list[TripString]:
    with open(path, encoding="utf-8") as fh:
        header = json.loads(fh.readline() or "{}")
        if header.get("format") != CORPUS_FORMAT or header.get("version") != CORPUS_VERSION:
            raise TraceFormatError(f"{path}: not a {CORPUS_FORMAT} v{CORPUS_VERSION} file")
        out = []
        for line in fh:
            if not line.strip():
                continue
            o = json.loads(line)
            out.append(TripString(tuple(o["symbols"]), o["t_r"], o["trip_id"], o.get("taxi_id", ""), o.get("start", 0)))
    return out


def encode_corpus(grid: Grid, trips: list[RawTrip], t_r: int, first_id: int = 0):
    """Resample and encode trips in order; return ``(strings, rejected_count)``.

    Trip ids are assigned sequentially to every input trip, so rejected trips
    leave gaps rather than shifting later ids.
    """
    out = []
    rejected = 0
    for i, trip in enumerate(trips):
        samples = resample_trip(trip, t_r)
        try:
            out.append(encode_trip(grid, samples, first_id + i, t_r, trip.taxi_id, trip.start))
        except TripRejected:
            rejected += 1
    return out, rejected


def extract_directory(trace_dir) -> list[RawTrip]:
    """Parse every trace file in a directory; trips ordered by (taxi_id, start)."""
    trips = []
    for path in sorted(Path(trace_dir).iterdir()):
        if not path.is_file() or path.name.startswith("."):
            continue
        if path.name == "_cabs.txt":
            continue
        taxi = taxi_id_from_path(path)
        trips.extend(extract_trips(parse_trace_file(path, taxi), taxi))
    trips.sort(key=lambda t: (t.taxi_id, t.start))
    return trips
