"""Seeded Monte Carlo experiments and statistical checks.

Every experiment takes an integer seed; trial ``i`` draws from the
independent stream ``Rng(seed, i)`` so results do not depend on how trials
are scheduled.  Results come back as :class:`StatReport` objects whose
``passed`` flag is recomputable from their serialised fields.
"""
from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .boosted import chain_statistics, constructive_partition, cycle_statistics
from .buffers import evolve, lt, min_sigma2, recognize
from .errors import TooLarge
from .kary import count_shuffle_squares
from .words import Rng, Word, _gen, random_even_parity_word, random_word

__all__ = [
    "ExperimentConfig", "StatReport", "sample_nb", "sample_geom", "chernoff_check",
    "nb_chernoff_bound", "validate_claims", "density_experiment", "density_trend",
    "lt_experiment", "cesaro_Y_experiment", "cesaro_X_experiment", "cycle_report",
    "map_trials", "mean_report",
]


@dataclass
class ExperimentConfig:
    name: str = "run"
    seed: int = 0
    trials: int = 1000
    n: int = 0
    k: int = 2
    params: dict = field(default_factory=dict)
    out: Optional[str] = None

    def to_dict(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        blob = json.dumps({k: v for k, v in self.to_dict().items() if k != "out"},
                          sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    @classmethod
    def from_file(cls, path: str) -> dict:
        """Read ``key=value`` lines (``#`` starts a comment)."""
        out = {}
        with open(path) as fh:
            for line in fh:
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                key, _, value = line.partition("=")
                out[key.strip().replace("-", "_")] = _parse_value(value.strip())
        return out


def _parse_value(text: str):
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    return text


@dataclass
class StatReport:
    """An estimate compared against a target.

    ``kind`` is ``"eq"`` (within ``sigmas`` standard errors, plus ``atol``),
    ``"le"``/``"ge"`` (one-sided with the same slack) or ``"info"`` (no check).
    """

    name: str
    estimate: float
    stderr: float
    n_samples: int
    target: Optional[float] = None
    kind: str = "info"
    sigmas: float = 4.0
    atol: float = 0.0
    provenance: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def slack(self) -> float:
        return self.sigmas * self.stderr + self.atol

    @property
    def passed(self) -> Optional[bool]:
        if self.kind == "info" or self.target is None:
            return None
        if self.kind == "eq":
            return abs(self.estimate - self.target) <= self.slack
        if self.kind == "le":
            return self.estimate <= self.target + self.slack
        if self.kind == "ge":
            return self.estimate >= self.target - self.slack
        raise ValueError(f"unknown comparison {self.kind!r}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d

    def line(self) -> str:
        flag = {True: "PASS", False: "FAIL", None: "INFO"}[self.passed]
        tgt = "" if self.target is None else f" target {self.kind} {self.target:.6g}"
        return f"{flag} {self.name}: {self.estimate:.6g} +- {self.stderr:.2g}{tgt} (n={self.n_samples})"


def mean_report(name, values, target=None, kind="info", sigmas=4.0, provenance="", **extra) -> StatReport:
    v = np.asarray(values, dtype=np.float64)
    n = v.size
    # np.mean uses pairwise summation, so the result is order-stable
    est = float(np.mean(v)) if n else math.nan
    se = float(np.std(v, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return StatReport(name, est, se, n, target, kind, sigmas, 0.0, provenance, extra)


def map_trials(fn: Callable, n: int, seed: int, threads: int = 1) -> list:
    """``[fn(Rng(seed, i)) for i in range(n)]``, optionally across processes."""
    rngs = [Rng(seed, i) for i in range(n)]
    if threads <= 1:
        return [fn(r) for r in rngs]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, rngs, chunksize=max(1, n // (8 * threads))))


# -- negative binomial and geometric ---------------------------------------------

def sample_geom(rng=None, size=None):
    """Geometric(1/2) on ``{0, 1, ...}``: failures before the first success."""
    return _gen(rng).geometric(0.5, size=size) - 1


def sample_nb(k: int, rng=None, size=None, chunk: int = 1 << 22):
    """``NB(k)`` as a sum of ``k`` independent geometric(1/2) variables."""
    g = _gen(rng)
    if size is None:
        return int(sample_geom(g, k).sum()) if k else 0
    out = np.zeros(size, dtype=np.int64)
    if k == 0:
        return out
    step = max(1, chunk // k)
    for lo in range(0, size, step):
        hi = min(size, lo + step)
        out[lo:hi] = (g.geometric(0.5, size=(hi - lo, k)) - 1).sum(axis=1)
    return out


def nb_chernoff_bound(k: int, eps: float) -> float:
    return math.exp(-eps * eps * k / (2 * (2 + eps)))


def chernoff_check(k: int, eps: float, trials: int, seed: int = 0) -> StatReport:
    """Both tails of ``NB(k)`` against the exponential bound."""
    if eps <= 0 or k < 1:
        raise ValueError("need eps > 0 and k >= 1")
    x = sample_nb(k, Rng(seed).generator(), size=trials)
    bound = nb_chernoff_bound(k, eps)
    upper = float(np.mean(x >= (1 + eps) * k))
    lower = float(np.mean(x <= (1 - eps) * k))
    worst = max(upper, lower)
    se = math.sqrt(worst * (1 - worst) / trials)
    return StatReport(f"nb_tails(k={k},eps={eps})", worst, se, trials, bound, "le",
                      provenance=ExperimentConfig("chernoff", seed, trials, k=k,
                                                  params={"eps": eps}).digest(),
                      extra={"upper_tail": upper, "lower_tail": lower})


# -- compound variables of one cycle --------------------------------------------------

def validate_claims(k: int, trials: int, seed: int = 0, drop_leftmost=True) -> list:
    """Check the first and second moments of the cycle's compound variables
    against their closed forms, using samples from instrumented cycles.

    When the indicator phase ends the cycle, the following run of ones is
    still read so that ``Z`` is defined; ``Y`` and ``C3`` are then 0.
    """
    if k < 2:
        raise ValueError("need k >= 2")
    st = cycle_statistics(k, trials, Rng(seed).generator(), drop_leftmost, ghost=True)
    Y = st["Y"].astype(np.float64)
    Z = st["Z"].astype(np.float64)
    C3 = st["C3"].astype(np.float64)
    pos = Z > 0
    C_prime = Z - C3
    prov = ExperimentConfig("claims", seed, trials, k=k).digest()
    kp = k - 1
    return [
        mean_report(f"E[(Y-Z)1(Z>0)] k={k}", (Y - Z) * pos, 0.5 * (k - 3 + 2.0 ** -k), "eq", provenance=prov),
        mean_report(f"E[(Y-Z-k)^2 1(Z>0)] k={k}", (Y - Z - k) ** 2 * pos, 4 * k + 9, "le", provenance=prov),
        mean_report(f"E[C'] k={k}", C_prime, 2 * (7 / 8) ** kp, "le", provenance=prov),
        mean_report(f"E[C'^2] k={k}", C_prime ** 2, 6 * (7 / 8) ** kp, "le", provenance=prov),
    ]


def cycle_report(k: int, n_cycles: int, seed: int = 0, drop_leftmost=True) -> dict:
    """Drift, second moment and tail frequencies of one cycle from ``1^k``."""
    st = cycle_statistics(k, n_cycles, Rng(seed).generator(), drop_leftmost)
    dX = st["X_star"].astype(np.float64) - k
    T = st["T_star"]
    return {
        "k": k,
        "cycles": n_cycles,
        "mean_dX": float(np.mean(dX)),
        "var_dX": float(np.var(dX)),
        "mean_dX2": float(np.mean(dX ** 2)),
        "tail_T_4.5k": float(np.mean(T >= 4.5 * k)),
        "tail_absdX_0.5k": float(np.mean(np.abs(dX) >= 0.5 * k)),
        "end_phase_freq": [float(np.mean(st["end_phase"] == j)) for j in range(3)],
    }


# -- density of shuffle squares -----------------------------------------------------

def density_experiment(n: int, trials: int = 10000, mode: str = "exact", seed: int = 0,
                       fallback: bool = False, exact_limit: int = 16,
                       enumerate_limit: int = 10, threads: int = 1, target=None) -> StatReport:
    """Estimate ``P[s is a shuffle square]`` for uniform ``s`` of length ``2n``.

    ``exact`` mode counts every word when ``n <= enumerate_limit`` and
    otherwise samples with exact recognition.  ``constructive`` mode draws
    even-parity words and reports how often the constructive partitioner
    succeeds (optionally falling back to exact recognition).
    """
    prov = ExperimentConfig("density", seed, trials, n=n,
                            params={"mode": mode, "fallback": fallback}).digest()
    if mode == "exact":
        if n > exact_limit:
            raise TooLarge(f"exact density limited to n={exact_limit}")
        if n <= enumerate_limit:
            c = count_shuffle_squares(2, n, budget=4.0 ** enumerate_limit)
            frac = Fraction(c, 4 ** n)
            cond = Fraction(c, 2 ** (2 * n - 1)) if n else Fraction(1)
            return StatReport(f"density(n={n})", float(frac), 0.0, 4 ** n, target,
                              "ge" if target is not None else "info", provenance=prov,
                              extra={"count": c, "fraction": str(frac),
                                     "even_parity_rate": float(cond), "method": "enumeration"})
        hits = map_trials(_density_trial(n), trials, seed, threads)
        hits = np.array(hits)
        p = float(hits[:, 0].mean())
        even = hits[:, 1] == 1
        return StatReport(f"density(n={n})", p, math.sqrt(p * (1 - p) / trials), trials, target,
                          "ge" if target is not None else "info", provenance=prov,
                          extra={"even_parity_rate": float(hits[even, 0].mean()) if even.any() else None,
                                 "method": "sampled"})
    if mode == "constructive":
        res = map_trials(_constructive_trial(n, fallback), trials, seed, threads)
        p = float(np.mean(res))
        return StatReport(f"constructive_rate(n={n})", p, math.sqrt(p * (1 - p) / trials), trials,
                          target, "ge" if target is not None else "info", provenance=prov,
                          extra={"word_length": 2 * n, "even_parity_inputs": True})
    raise ValueError(f"unknown mode {mode!r}")


class _density_trial:
    def __init__(self, n):
        self.n = n

    def __call__(self, rng):
        s = random_word(2 * self.n, rng=rng)
        return int(recognize(s)), int(s.count(0) % 2 == 0)


class _constructive_trial:
    def __init__(self, n, fallback):
        self.n = n
        self.fallback = fallback

    def __call__(self, rng):
        s = random_even_parity_word(2 * self.n, rng)
        p = constructive_partition(s)
        if p:
            return 1
        if self.fallback and len(s) <= 28:
            return int(recognize(s))
        return 0


def density_trend(ns=(2, 4, 6, 8)) -> StatReport:
    """Exact densities at each ``n``; passes iff they strictly increase."""
    vals = [Fraction(count_shuffle_squares(2, n), 4 ** n) for n in ns]
    increasing = all(a < b for a, b in zip(vals, vals[1:]))
    worst = min((float(b - a) for a, b in zip(vals, vals[1:])), default=0.0)
    return StatReport("density_increments_min", worst, 0.0, len(ns), 0.0, "ge", sigmas=0.0,
                      atol=-1e-300 if increasing else 0.0,
                      extra={"n": list(ns), "fractions": [str(v) for v in vals],
                             "values": [float(v) for v in vals], "strictly_increasing": increasing})


# -- longest twins --------------------------------------------------------------------

def lt_experiment(n: int, trials: int = 10000, seed: int = 0, exhaustive: Optional[bool] = None,
                  limit: int = 24, threads: int = 1) -> StatReport:
    """Fraction of words of length ``n`` with ``LT >= ceil(n/2) - 1``.

    Also reports, for even ``n``, how often dropping the last two letters
    leaves twins of length ``n/2 - 2`` next to the plain shuffle-square rate.
    """
    if n > limit:
        raise TooLarge(f"exact LT experiments limited to n={limit}")
    if exhaustive is None:
        exhaustive = 2 ** n <= trials
    need = -(-n // 2) - 1
    if exhaustive:
        rows = [_lt_row(Word(tuple((i >> j) & 1 for j in range(n))), need) for i in range(2 ** n)]
    else:
        rows = map_trials(_lt_trial(n, need), trials, seed, threads)
    rows = np.array(rows, dtype=np.float64)
    m = len(rows)
    p = float(rows[:, 0].mean())
    se = 0.0 if exhaustive else math.sqrt(p * (1 - p) / m)
    extra = {"threshold": need, "exhaustive": exhaustive}
    if n % 2 == 0 and n >= 2:
        extra["trimmed_rate"] = float(rows[:, 1].mean())
        extra["square_rate"] = float(rows[:, 2].mean())
    return StatReport(f"lt_fraction(n={n})", p, se, m, None, "info",
                      provenance=ExperimentConfig("lt", seed, trials, n=n).digest(), extra=extra)


def _lt_row(s: Word, need: int):
    n = len(s)
    row = [int(lt(s) >= need), 0, 0]
    if n % 2 == 0 and n >= 2:
        row[1] = int(lt(s[:n - 2]) >= n // 2 - 2)
        row[2] = int(recognize(s))
    return row


class _lt_trial:
    def __init__(self, n, need):
        self.n = n
        self.need = need

    def __call__(self, rng):
        return _lt_row(random_word(self.n, rng=rng), self.need)


# -- Cesaro means -------------------------------------------------------------------------

def _powmean(Y, delta):
    Y = np.asarray(Y, dtype=np.float64)
    # 0 ** 0 is taken as 1, so delta = 0 gives exactly 1
    return float(np.mean(np.power(Y, delta)))


def _proxy_Y(n: int, rng) -> np.ndarray:
    """``X_{M(t)} + (t - T_{M(t)})`` for ``t = 1..n`` along one cycle chain."""
    X, T = chain_statistics(n, rng)
    X = np.concatenate(([0], X))
    T = np.concatenate(([0], T))
    t = np.arange(1, n + 1)
    m = np.searchsorted(T, t, side="right") - 1
    return X[m] + (t - T[m])


def _exact_Y(s: Word) -> np.ndarray:
    hist = evolve(s)
    return np.array([min_sigma2(B) for B in hist[1:]])


def cesaro_Y_experiment(n: int, trials: int = 100, delta: float = 0.3, seed: int = 0,
                        mode: str = "auto", span: int = 4, limit: int = 1.2) -> StatReport:
    """Cesaro means ``(1/m) sum_{t<=m} mean(Y_t^delta)`` at ``m = n/span`` and ``n``.

    With ``mode="proxy"`` (default for ``n > 16``) ``Y_t`` is replaced by the
    upper bound ``X_{M(t)} + (t - T_{M(t)})`` from the cycle chain, so the
    reported means are upper bounds.  ``mode="exact"`` uses true buffer sets.
    """
    if delta >= 1 / 3:
        raise ValueError("delta must be below 1/3")
    if mode == "auto":
        mode = "exact" if n <= 16 else "proxy"
    g = Rng(seed)
    rows = []
    for i in range(trials):
        if mode == "exact":
            rows.append(_exact_Y(random_word(n, rng=g.spawn(i))))
        else:
            rows.append(_proxy_Y(n, g.spawn(i).generator()))
    Y = np.stack(rows)
    m0 = max(1, n // span)
    short = _powmean(Y[:, :m0], delta)
    full = _powmean(Y, delta)
    ratio = full / short if short > 0 else math.nan
    per_trial = np.power(Y.astype(np.float64), delta).mean(axis=1)
    return StatReport(f"cesaro_ratio(n={n},delta={delta})", ratio, 0.0, trials, limit, "le", sigmas=0.0,
                      provenance=ExperimentConfig("cesaro", seed, trials, n=n,
                                                  params={"delta": delta, "mode": mode}).digest(),
                      extra={"mode": mode, "bound_kind": "upper bound" if mode == "proxy" else "exact",
                             "mean_short": short, "mean_full": full, "m_short": m0,
                             "stderr_full": float(per_trial.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0,
                             "zero_power_convention": "0**0 = 1"})


def cesaro_X_experiment(n_cycles: int, seeds=range(20), p: float = 1.3) -> dict:
    """``(1/m) sum_{i<=m} X_i^p`` over the first ``n_cycles`` entries of
    independent cycle chains, one value per seed."""
    out = []
    for s in seeds:
        X, _ = chain_statistics(8 * n_cycles + 1000, Rng(s).generator())
        X = X[:n_cycles].astype(np.float64)
        out.append(float(np.mean(X ** p)))
    return {"values": out, "max": max(out), "mean": float(np.mean(out))}
