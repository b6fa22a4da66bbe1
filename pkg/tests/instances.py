"""Deterministic randomized problem instances spanning every regime.

Each instance draws a weighting, a loss model, a loading and a utility
(linear, CARA, log or power), then picks the premium inside the band of a
target regime using the thresholds computed for that instance.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from rdu_insurance import (ProblemSpec, UtilitySpec, WeightingSpec, make_atom_exponential,
                           make_truncated_exponential, pi_c)
from rdu_insurance.landmarks import rdu_landmarks
from rdu_insurance.loss_model import LossModel
from rdu_insurance.preferences import ARAClass

KINDS = ("identity", "cara", "dara_log", "dara_pow")
TARGETS = ("threefold", "deductible", "full", "no_coverage")


@dataclass(frozen=True)
class Instance:
    index: int
    kind: str
    target: str
    problem: ProblemSpec
    utility: UtilitySpec
    weighting: WeightingSpec
    loss: LossModel

    @property
    def label(self) -> str:
        return f"#{self.index} {self.kind} {self.target} pi={self.problem.pi:.4f}"


@lru_cache(maxsize=None)
def random_instances(count: int = 20, seed: int = 20240) -> tuple[Instance, ...]:
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        # every utility kind visits every regime; the fifth round alternates the interior ones
        kind = KINDS[i % len(KINDS)]
        rnd = i // len(KINDS)
        target = TARGETS[rnd] if rnd < len(TARGETS) else ("threefold", "deductible")[i % 2]
        w = WeightingSpec.tversky_kahneman(float(rng.uniform(0.4, 0.7)))
        if rng.uniform() < 0.7:
            loss = make_truncated_exponential(float(rng.uniform(0.05, 0.3)), 10.0)
        else:
            loss = make_atom_exponential(float(rng.uniform(0.5, 0.9)), float(rng.uniform(0.2, 0.6)), 10.0)
        rho = float(rng.uniform(0.1, 0.3))
        if kind == "identity":
            u, W0 = UtilitySpec.identity(), 15.0
        elif kind == "cara":
            u, W0 = UtilitySpec.exponential(float(rng.uniform(0.005, 0.05))), 15.0
        elif kind == "dara_log":
            u, W0 = UtilitySpec.log(), 20.0
        else:
            u, W0 = UtilitySpec.power(float(rng.uniform(0.3, 0.7))), 20.0
        base = ProblemSpec.for_loss(W0, 0.0, rho, loss)
        full = base.full_cover_premium
        if u.is_identity:
            upper_split = lower_split = pi_c(w, loss, rho)
        else:
            rl = rdu_landmarks(base.with_premium(0.5 * full), u, w, loss)
            if u.ara_class is ARAClass.CONSTANT:
                upper_split = lower_split = base.premium_for(rl.K_Delta)
            else:
                upper_split = base.premium_for(rl.Delta_tilde)
                lower_split = base.premium_for(rl.Delta_bar)
        r = float(rng.uniform(0.15, 0.85))
        pi = {"threefold": upper_split + r * (full - upper_split),
              "deductible": r * lower_split,
              "full": full * (1.0 + 0.05 * r),
              "no_coverage": 0.0}[target]
        out.append(Instance(i, kind, target, base.with_premium(pi), u, w, loss))
    return tuple(out)
