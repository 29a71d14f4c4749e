"""File formats: delay-scan CSVs, reconstruction CSVs, JSON reports.

All floats are written with ``repr``, which round-trips exactly, so a run is
byte-reproducible from its manifest.

Count/probability CSV:
    # pol=<D|A|R|L> exposure_pulses=<int> mean_photons=<float> efficiency=<float> seed=<int>
    <t_ps>,<value>
    ...
Noiseless files store probability density per ps and zeros in the counting
metadata; counting files store integer counts.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .apparatus import CountRecord, POLARIZATIONS, ProjectionDistribution
from .errors import DataFormatError
from .grids import TimeGrid

COUNTS_FILE = "counts_{pol}.csv"
PROBABILITY_FILE = "probability_{pol}.csv"


def _fmt(x) -> str:
    return repr(float(x))


def _nice(value: float) -> float:
    """Round to 12 significant digits (undo parse jitter in derived steps)."""
    return float(f"{value:.12g}")


def format_record_csv(rec) -> str:
    """Serialize a CountRecord or ProjectionDistribution."""
    if isinstance(rec, CountRecord):
        header = (
            f"# pol={rec.pol} exposure_pulses={rec.exposure_pulses} "
            f"mean_photons={_fmt(rec.mean_photons_per_pulse)} "
            f"efficiency={_fmt(rec.detection_efficiency)} seed={rec.seed}"
        )
        rows = (f"{_fmt(t)},{int(c)}" for t, c in zip(rec.grid.times, rec.counts))
    elif isinstance(rec, ProjectionDistribution):
        header = (
            f"# pol={rec.pol} exposure_pulses=0 mean_photons=0.0 "
            f"efficiency=1.0 seed=0"
        )
        rows = (f"{_fmt(t)},{_fmt(v)}" for t, v in zip(rec.grid.times, rec.values))
    else:
        raise DataFormatError(f"cannot serialize {type(rec).__name__}")
    return "\n".join([header, *rows]) + "\n"


def _parse_header(line: str, path: str) -> dict:
    if not line.startswith("#"):
        raise DataFormatError(f"{path}: missing '#' metadata header")
    meta = {}
    for token in line[1:].split():
        if "=" not in token:
            raise DataFormatError(f"{path}: malformed header token {token!r}")
        key, value = token.split("=", 1)
        meta[key] = value
    for key in ("pol", "exposure_pulses", "mean_photons", "efficiency", "seed"):
        if key not in meta:
            raise DataFormatError(f"{path}: header is missing {key!r}")
    if meta["pol"] not in POLARIZATIONS:
        raise DataFormatError(f"{path}: unknown polarization {meta['pol']!r}")
    return meta


def _infer_time_grid(times: np.ndarray, path: str) -> TimeGrid:
    if times.size < 2:
        raise DataFormatError(f"{path}: needs at least two samples")
    diffs = np.diff(times)
    dt = float(np.median(diffs))
    if dt <= 0:
        raise DataFormatError(f"{path}: time column is not increasing")
    if np.max(np.abs(diffs - dt)) > 1e-6 * dt:
        raise DataFormatError(f"{path}: time column is not uniform to 1e-6 relative")
    n = times.size
    center = float(times[n // 2])
    dt_nice, center_nice = _nice(dt), _nice(center)
    rebuilt = center_nice + (np.arange(n) - n // 2) * dt_nice
    if np.max(np.abs(rebuilt - times)) <= 1e-6 * dt:
        return TimeGrid(n, dt_nice, center_nice)
    return TimeGrid(n, dt, center)


def parse_count_csv(text: str, path: str = "<memory>") -> CountRecord:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise DataFormatError(f"{path}: empty file")
    meta = _parse_header(lines[0], path)
    times, counts = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 2:
            raise DataFormatError(f"{path}:{lineno}: expected 't_ps,value'")
        try:
            times.append(float(parts[0]))
        except ValueError as exc:
            raise DataFormatError(f"{path}:{lineno}: bad time {parts[0]!r}") from exc
        try:
            count = int(parts[1])
        except ValueError as exc:
            raise DataFormatError(
                f"{path}:{lineno}: counts must be integers, got {parts[1]!r}"
            ) from exc
        if count < 0:
            raise DataFormatError(f"{path}:{lineno}: negative count {count}")
        counts.append(count)
    grid = _infer_time_grid(np.asarray(times), path)
    return CountRecord(
        grid=grid,
        pol=meta["pol"],
        counts=np.asarray(counts, dtype=np.int64),
        exposure_pulses=int(meta["exposure_pulses"]),
        mean_photons_per_pulse=float(meta["mean_photons"]),
        detection_efficiency=float(meta["efficiency"]),
        seed=int(meta["seed"]),
    )


def parse_probability_csv(text: str, path: str = "<memory>") -> ProjectionDistribution:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise DataFormatError(f"{path}: empty file")
    meta = _parse_header(lines[0], path)
    times, values = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 2:
            raise DataFormatError(f"{path}:{lineno}: expected 't_ps,value'")
        try:
            times.append(float(parts[0]))
            values.append(float(parts[1]))
        except ValueError as exc:
            raise DataFormatError(f"{path}:{lineno}: bad row {line!r}") from exc
    vals = np.asarray(values)
    if np.any(vals < 0):
        raise DataFormatError(f"{path}: negative probability density")
    grid = _infer_time_grid(np.asarray(times), path)
    return ProjectionDistribution(grid=grid, pol=meta["pol"], values=vals)


def _ingest(path, template, parser) -> dict:
    records = {}
    for pol in POLARIZATIONS:
        fname = os.path.join(path, template.format(pol=pol))
        if not os.path.exists(fname):
            raise DataFormatError(f"missing polarization {pol}: no file {fname}")
        with open(fname, "r", encoding="utf-8") as fh:
            rec = parser(fh.read(), fname)
        if rec.pol != pol:
            raise DataFormatError(f"{fname}: header says pol={rec.pol}, expected {pol}")
        records[pol] = rec
    first = records["D"].grid
    for pol in POLARIZATIONS[1:]:
        if records[pol].grid != first:
            raise DataFormatError(f"{template.format(pol=pol)} grid differs from the D channel")
    return records


def ingest_counts(path) -> dict:
    """Read the four count CSVs of one acquisition from a directory.

    Expects ``counts_D.csv`` .. ``counts_L.csv``; every polarization must be
    present and the four grids must agree.
    """
    return _ingest(path, COUNTS_FILE, parse_count_csv)


def ingest_distributions(path) -> dict:
    """Read four noiseless probability CSVs (``probability_<pol>.csv``)."""
    return _ingest(path, PROBABILITY_FILE, parse_probability_csv)


def format_reconstruction_csv(result) -> str:
    """t_ps,re,im,sigma_re,sigma_im,valid rows of a ReconstructionResult."""
    env = result.envelope
    n = env.grid.n_samples
    sig_re = result.sigma_re if result.sigma_re is not None else np.zeros(n)
    sig_im = result.sigma_im if result.sigma_im is not None else np.zeros(n)
    lines = ["t_ps,re,im,sigma_re,sigma_im,valid"]
    for t, a, sr, si, v in zip(
        env.grid.times, env.amplitudes, sig_re, sig_im, result.mask.valid
    ):
        lines.append(f"{_fmt(t)},{_fmt(a.real)},{_fmt(a.imag)},{_fmt(sr)},{_fmt(si)},{int(v)}")
    return "\n".join(lines) + "\n"


def parse_reconstruction_csv(text: str, path: str = "<memory>"):
    """(times, amplitudes, sigma_re, sigma_im, valid) arrays."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "t_ps,re,im,sigma_re,sigma_im,valid":
        raise DataFormatError(f"{path}: not a reconstruction CSV")
    cols = [[], [], [], [], [], []]
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 6:
            raise DataFormatError(f"{path}:{lineno}: expected 6 columns")
        for col, part in zip(cols, parts):
            col.append(float(part))
    t = np.asarray(cols[0])
    amps = np.asarray(cols[1]) + 1j * np.asarray(cols[2])
    return t, amps, np.asarray(cols[3]), np.asarray(cols[4]), np.asarray(cols[5]) > 0.5


def format_spectral_csv(spectrum) -> str:
    lines = ["w_radps,re,im"]
    for w, a in zip(spectrum.grid.freqs, spectrum.amplitudes):
        lines.append(f"{_fmt(w)},{_fmt(a.real)},{_fmt(a.imag)}")
    return "\n".join(lines) + "\n"


def format_distribution_csv(centers, values, axis_label: str) -> str:
    lines = [f"{axis_label},value"]
    for x, v in zip(centers, values):
        lines.append(f"{_fmt(x)},{_fmt(v)}")
    return "\n".join(lines) + "\n"


def parse_distribution_csv(text: str, path: str = "<memory>"):
    """(centers, values) from a two-column CSV, skipping '#' and header lines."""
    xs, vs = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) < 2:
            raise DataFormatError(f"{path}:{lineno}: expected at least two columns")
        try:
            x = float(parts[0])
        except ValueError:
            continue  # column-header line
        if len(parts) == 6:
            # reconstruction CSV: use |re + i*im|^2 as the distribution value
            vs.append(float(parts[1]) ** 2 + float(parts[2]) ** 2)
        else:
            vs.append(float(parts[1]))
        xs.append(x)
    if len(xs) < 2:
        raise DataFormatError(f"{path}: no data rows")
    return np.asarray(xs), np.asarray(vs)


def format_sweep_csv(rows) -> str:
    lines = ["param,estimate,stderr"]
    for param, estimate, stderr in rows:
        lines.append(f"{_fmt(param)},{_fmt(estimate)},{_fmt(stderr)}")
    return "\n".join(lines) + "\n"


def format_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def write_bundle(bundle: dict, out_dir) -> list:
    """Write a {relative path: text} bundle under a directory."""
    written = []
    os.makedirs(out_dir, exist_ok=True)
    for rel, text in sorted(bundle.items()):
        dest = os.path.join(out_dir, rel)
        os.makedirs(os.path.dirname(dest) or out_dir, exist_ok=True)
        with open(dest, "w", encoding="utf-8") as fh:
            fh.write(text)
        written.append(dest)
    return written
