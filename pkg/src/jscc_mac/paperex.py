"""The worked example: two binary sources over a 6x6-input, 4-output MAC."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ClassPolicy, InputDistribution, MacChannel, SourceSpec, SystemModel

FIXTURE_NAME = "paper-example"


@dataclass(frozen=True)
class ExampleParams:
    k1: float = 0.056
    k2: float = 0.01
    p1: float = 0.028
    p2: float = 0.01155

    def check(self) -> None:
        if not 0.0 <= 3 * self.k1 <= 1.0:
            raise ValueError(f"k1 must satisfy 0 <= 3*k1 <= 1, got {self.k1}")
        if not 0.0 <= self.k2 <= 0.5:
            raise ValueError(f"k2 must lie in [0, 0.5], got {self.k2}")
        for name in ("p1", "p2"):
            p = getattr(self, name)
            if not 0.0 < p < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {p}")


def build_w1(params: ExampleParams = ExampleParams()) -> np.ndarray:
    """6x4 base block: a 4-ary symmetric part and two half-split rows."""
    params.check()
    k1, k2 = params.k1, params.k2
    w1 = np.full((6, 4), k1)
    np.fill_diagonal(w1[:4], 1.0 - 3.0 * k1)
    w1[4] = (0.5 - k2, 0.5 - k2, k2, k2)
    w1[5] = (k2, k2, 0.5 - k2, 0.5 - k2)
    return w1


# Row permutations of W1 giving blocks W4, W5, W6 (0-based row indices).
_PERMS = {
    4: (1, 2, 3, 0, 5, 4),
    5: (2, 3, 0, 1, 4, 5),
    6: (3, 0, 1, 2, 5, 4),
}


def build_paper_channel(params: ExampleParams = ExampleParams()) -> MacChannel:
    """Stack W1..W6; block x2 holds the rows for x1 = 1..6, i.e. row x1 + 6*(x2-1)."""
    w1 = build_w1(params)
    blocks = [
        w1,
        np.tile(w1[4], (6, 1)),
        np.tile(w1[5], (6, 1)),
        w1[list(_PERMS[4])],
        w1[list(_PERMS[5])],
        w1[list(_PERMS[6])],
    ]
    return MacChannel.from_array(np.vstack(blocks), 6, 6)


Q_HALF_SPLIT = InputDistribution((0.0, 0.0, 0.0, 0.0, 0.5, 0.5))
Q_UNIFORM4 = InputDistribution((0.25, 0.25, 0.25, 0.25, 0.0, 0.0))


def build_paper_model(params: ExampleParams = ExampleParams()) -> SystemModel:
    params.check()
    pair = (Q_HALF_SPLIT, Q_UNIFORM4)
    return SystemModel(
        source1=SourceSpec((params.p1, 1.0 - params.p1)),
        source2=SourceSpec((params.p2, 1.0 - params.p2)),
        channel=build_paper_channel(params),
        policy=ClassPolicy((pair, pair)),
        name=FIXTURE_NAME,
    )
