"""Moment statistics of coefficient sequences and nearest-group matching."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .st_groups import group_info, sample_batch

M_MAX_A1 = 12
M_MAX_A2 = 8
# rows of this many pairs are drawn when building reference tables
CHUNK = 10_000
# below this magnitude a reference moment is compared in absolute terms
ABS_FALLBACK = 0.5


@dataclass
class MomentTable:
    group: str
    a1_moments: list[float]
    a2_moments: list[float] = field(default_factory=list)
    n_samples: int = 0
    seed: int | None = None

    def to_dict(self) -> dict:
        return {
            "group": self.group,
            "a1_moments": self.a1_moments,
            "a2_moments": self.a2_moments,
            "n_samples": self.n_samples,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> MomentTable:
        return cls(d["group"], list(d["a1_moments"]), list(d.get("a2_moments", [])), d.get("n_samples", 0), d.get("seed"))


def empirical_moments(values, m_max: int) -> list[float]:
    """[mean(v^0), mean(v^1), ..., mean(v^m_max)]."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise ValueError("cannot take moments of an empty sequence")
    out, power = [], np.ones_like(v)
    for _ in range(m_max + 1):
        out.append(float(power.mean()))
        power = power * v
    return out


def moments_of_pairs(label: str, a1, a2=None, m_max_a1: int = M_MAX_A1, m_max_a2: int = M_MAX_A2, n_samples=None, seed=None) -> MomentTable:
    a2m = [] if a2 is None else empirical_moments(a2, m_max_a2)
    n = len(np.ravel(a1)) if n_samples is None else n_samples
    return MomentTable(label, empirical_moments(a1, m_max_a1), a2m, n, seed)


def reference_tables(groups, n_samples: int, seed: int, m_max_a1: int = M_MAX_A1, m_max_a2: int = M_MAX_A2) -> list[MomentTable]:
    """Moment tables estimated from ``n_samples`` Haar draws per group.

    Draws come from ``sample_batch`` rows of CHUNK pairs, so a larger
    ``n_samples`` with the same seed extends rather than replaces the sample.
    """
    tables = []
    for g in groups:
        chunk = min(n_samples, CHUNK)
        rows = -(-n_samples // chunk)
        X, _ = sample_batch(g, chunk, rows, seed)
        if group_info(g).genus == 2:
            a1 = X[:, 0::2].ravel()[:n_samples]
            a2 = X[:, 1::2].ravel()[:n_samples]
        else:
            a1, a2 = X.ravel()[:n_samples], None
        tables.append(moments_of_pairs(g, a1, a2, m_max_a1, m_max_a2, n_samples, seed))
    return tables


def discrepancy(observed: MomentTable, reference: MomentTable, odd_a1: bool = False) -> float:
    """Largest relative error over the shared moments (m >= 1), with an
    absolute error where the reference moment is smaller than ABS_FALLBACK.

    Odd a1 moments are skipped unless ``odd_a1``: every identity component
    contains -I, so they vanish for all groups and only contribute noise.
    """
    worst = 0.0
    for seq, (got, want) in enumerate(((observed.a1_moments, reference.a1_moments), (observed.a2_moments, reference.a2_moments))):
        n = min(len(got), len(want))
        for m in range(1, n):
            if seq == 0 and m % 2 and not odd_a1:
                continue
            err = abs(got[m] - want[m])
            if abs(want[m]) >= ABS_FALLBACK:
                err /= abs(want[m])
            worst = max(worst, err)
    return worst


def nearest_group(curve_moments: MomentTable, tables, odd_a1: bool = False) -> tuple[str, dict[str, float]]:
    """Group whose reference table is closest; ties resolve by label so the
    answer does not depend on the order of ``tables``."""
    tables = list(tables)
    lengths = {(len(t.a1_moments), len(t.a2_moments)) for t in tables}
    if len(lengths) > 1:
        raise ValueError("reference tables disagree on m_max")
    scores = {t.group: discrepancy(curve_moments, t, odd_a1) for t in tables}
    best = min(scores, key=lambda g: (scores[g], g))
    return best, scores
