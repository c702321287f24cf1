"""
Binary spike file (little-endian).

Layout::

    magic      5s   b"SPKW1"
    version    u16  1
    flags      u8   bit 0: input was z-scored before encoding
    dt         f64
    K          u16
    c          f64
    sigma1     f64  finest scale (seconds)
    n          u16  cascade order (0 when unused)
    family     u8 length + ASCII bytes
    theta      f64
    norms      K x f64
    samples    u64
    events     u64
    records    events x (channel u16, time u64, polarity i8), sorted by (channel, time)
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace

import numpy as np

from .spike_codec import SpikeTrain
from .wavelets import make_bank

__all__ = ["SpikeHeader", "SpikeFileError", "write_spikefile", "read_spikefile",
           "header_for", "MAGIC", "VERSION"]

MAGIC = b"SPKW1"
VERSION = 1
FLAG_ZSCORED = 1
RECORD = np.dtype([("channel", "<u2"), ("time", "<u8"), ("polarity", "i1")])


class SpikeFileError(ValueError):
    """Malformed, truncated or unsupported spike file."""


@dataclass(frozen=True)
class SpikeHeader:
    dt: float
    K: int
    c: float
    sigma1: float
    family: str
    theta: float
    norms: tuple
    n_samples: int
    n: int = 0
    zscored: bool = False
    version: int = VERSION

    def bank(self):
        """Rebuild the filter bank; the stored norms are used verbatim."""
        b = make_bank(self.family, self.sigma1, self.c, self.K, self.dt,
                      n=self.n or None, theta=self.theta)
        norms = np.array(self.norms, dtype=float)
        norms.flags.writeable = False
        return replace(b, norms=norms)


def header_for(bank, n_samples, zscored=False, theta=None):
    return SpikeHeader(bank.dt, bank.K, bank.c, bank.grid.sigma1, bank.family,
                       bank.theta if theta is None else float(theta),
                       tuple(float(v) for v in bank.norms), int(n_samples),
                       int(bank.n or 0), bool(zscored))


def write_spikefile(path, header, trains):
    fam = header.family.encode("ascii")
    if len(header.norms) != header.K:
        raise SpikeFileError("header norms must have K entries")
    recs = []
    for tr in sorted(trains, key=lambda t: t.channel):
        if tr.n_samples != header.n_samples:
            raise SpikeFileError(f"train {tr.channel} length differs from header")
        r = np.empty(len(tr), dtype=RECORD)
        r["channel"] = tr.channel
        r["time"] = tr.times
        r["polarity"] = tr.polarity
        recs.append(r)
    body = np.concatenate(recs) if recs else np.empty(0, dtype=RECORD)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<HBdHddH", header.version,
                             FLAG_ZSCORED if header.zscored else 0,
                             header.dt, header.K, header.c, header.sigma1, header.n))
        fh.write(struct.pack("<B", len(fam)) + fam)
        fh.write(struct.pack("<d", header.theta))
        fh.write(struct.pack(f"<{header.K}d", *header.norms))
        fh.write(struct.pack("<QQ", header.n_samples, body.size))
        fh.write(body.tobytes())


class _Reader:
    def __init__(self, data):
        self.data, self.pos = data, 0

    def take(self, fmt):
        size = struct.calcsize(fmt)
        if self.pos + size > len(self.data):
            raise SpikeFileError("truncated header")
        out = struct.unpack_from(fmt, self.data, self.pos)
        self.pos += size
        return out


def read_spikefile(path):
    """Return (header, trains) with one train per channel 0..K."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:5] != MAGIC:
        raise SpikeFileError(f"{path}: not a spike file (bad magic)")
    rd = _Reader(data)
    rd.pos = 5
    version, flags, dt, K, c, sigma1, n = rd.take("<HBdHddH")
    if version != VERSION:
        raise SpikeFileError(f"{path}: unsupported spike file version {version}")
    (flen,) = rd.take("<B")
    if rd.pos + flen > len(data):
        raise SpikeFileError("truncated header")
    family = data[rd.pos:rd.pos + flen].decode("ascii")
    rd.pos += flen
    (theta,) = rd.take("<d")
    norms = rd.take(f"<{K}d")
    n_samples, n_events = rd.take("<QQ")
    need = n_events * RECORD.itemsize
    have = len(data) - rd.pos
    if have < need:
        raise SpikeFileError(f"{path}: truncated body, header declares {n_events} "
                             f"events but only {have // RECORD.itemsize} present")
    if have > need:
        raise SpikeFileError(f"{path}: {have - need} trailing bytes after events")
    body = np.frombuffer(data, dtype=RECORD, count=n_events, offset=rd.pos)
    if body.size and np.any(body["channel"] > K):
        raise SpikeFileError(f"{path}: channel index above K={K}")
    key = body["channel"].astype(np.int64) * (n_samples + 1) + body["time"].astype(np.int64)
    if body.size and np.any(np.diff(key) < 0):
        raise SpikeFileError(f"{path}: events not sorted by (channel, time)")
    header = SpikeHeader(dt, K, c, sigma1, family, theta, tuple(norms),
                         int(n_samples), int(n), bool(flags & FLAG_ZSCORED), version)
    trains = []
    for ch in range(K + 1):
        sel = body[body["channel"] == ch]
        try:
            trains.append(SpikeTrain(ch, sel["time"].astype(np.int64),
                                     sel["polarity"].astype(np.int8), theta, dt,
                                     int(n_samples)))
        except ValueError as exc:
            raise SpikeFileError(f"{path}: channel {ch}: {exc}") from None
    return header, trains
