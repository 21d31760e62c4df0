"""Time-series container shared by the dynamical and adiabatic tracks, with CSV I/O.

CSV layout (one header row, floats written with ``repr`` so files round-trip
bit-exactly)::

    t_s, s_Er, re_alpha, im_alpha, nphot, overlap, p0, p1, p2, p3, q [, houston_phase]

``houston_phase`` is only present for adiabatic traces. Run metadata goes to a
JSON sidecar next to the CSV (``<name>.meta.json``).
"""

from __future__ import annotations

import csv
import enum
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

N_POP_COLUMNS = 4
BASE_COLUMNS = ["t_s", "s_Er", "re_alpha", "im_alpha", "nphot", "overlap"] + [
    f"p{i}" for i in range(N_POP_COLUMNS)
] + ["q"]


class Mode(str, enum.Enum):
    FULL = "full"
    ELIMINATED = "eliminated"
    ADIABATIC = "adiabatic"


@dataclass
class RunTrace:
    """Uniformly sampled record of a run.

    ``t`` is in seconds, ``s`` is the signed lattice depth in E_R, ``q`` the
    wrapped quasimomentum in units of k_c.
    """

    t: np.ndarray
    s: np.ndarray
    alpha: np.ndarray
    overlap: np.ndarray
    populations: np.ndarray
    q: np.ndarray
    mode: Mode
    metadata: dict = field(default_factory=dict)
    houston_phase: np.ndarray | None = None

    def __post_init__(self):
        self.mode = Mode(self.mode)
        n = len(self.t)
        for name in ("s", "alpha", "overlap", "q"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"trace column {name!r} has wrong length")
        if self.populations.shape[0] != n:
            raise ValueError("populations must have one row per sample")

    def __len__(self):
        return len(self.t)

    @property
    def nphot(self) -> np.ndarray:
        return np.abs(self.alpha) ** 2

    @property
    def sample_dt(self) -> float:
        return float(self.t[1] - self.t[0])

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0])

    def column(self, name: str) -> np.ndarray:
        """Look up a series by CSV column name or attribute name."""
        aliases = {
            "s_Er": self.s,
            "s": self.s,
            "nphot": self.nphot,
            "re_alpha": self.alpha.real,
            "im_alpha": self.alpha.imag,
            "overlap": self.overlap,
            "q": self.q,
            "t_s": self.t,
        }
        if name in aliases:
            return aliases[name]
        if name.startswith("p") and name[1:].isdigit():
            return self.populations[:, int(name[1:])]
        raise KeyError(f"unknown trace column {name!r}")

    def is_uniform(self, rtol: float = 1e-9) -> bool:
        if len(self.t) < 2:
            return False
        steps = np.diff(self.t)
        return bool(np.all(np.abs(steps - steps[0]) <= rtol * abs(steps[0])))

    def rows(self):
        pops = np.zeros((len(self), N_POP_COLUMNS))
        k = min(N_POP_COLUMNS, self.populations.shape[1])
        pops[:, :k] = self.populations[:, :k]
        cols = [self.t, self.s, self.alpha.real, self.alpha.imag, self.nphot, self.overlap]
        cols += [pops[:, i] for i in range(N_POP_COLUMNS)] + [self.q]
        if self.houston_phase is not None:
            cols.append(self.houston_phase)
        return np.column_stack(cols)

    def columns(self) -> list[str]:
        names = list(BASE_COLUMNS)
        if self.houston_phase is not None:
            names.append("houston_phase")
        return names

    def to_csv(self, path, metadata: dict | None = None) -> Path:
        path = Path(path)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.columns())
            for row in self.rows():
                writer.writerow([repr(float(v)) for v in row])
        meta = dict(self.metadata)
        meta.update(metadata or {})
        meta["mode"] = self.mode.value
        meta_path = sidecar_path(path)
        meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True, default=json_default))
        return path

    @classmethod
    def from_csv(cls, path) -> "RunTrace":
        path = Path(path)
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            data = np.array([[float(v) for v in row] for row in reader])
        missing = [c for c in BASE_COLUMNS if c not in header]
        if missing:
            raise ValueError(f"{path}: missing trace columns {missing}")
        col = {name: data[:, i] for i, name in enumerate(header)}
        meta_path = sidecar_path(path)
        metadata = json.loads(meta_path.read_text()) if meta_path.exists() else {}
        mode = metadata.get("mode", Mode.FULL.value)
        return cls(
            t=col["t_s"],
            s=col["s_Er"],
            alpha=col["re_alpha"] + 1j * col["im_alpha"],
            overlap=col["overlap"],
            populations=np.column_stack([col[f"p{i}"] for i in range(N_POP_COLUMNS)]),
            q=col["q"],
            mode=mode,
            metadata=metadata,
            houston_phase=col.get("houston_phase"),
        )


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".meta.json")


def params_hash(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, default=json_default).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def json_default(obj):
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")
