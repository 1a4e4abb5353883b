"""Spot-checking protocols: sampling, output length, extraction, exact audit.

Each round is independently tagged estimation (probability pE) or rawbit.
Estimation rounds draw uniform settings and record z = a + b + xy mod 2;
rawbit rounds measure Alice's setting 0 and keep the outcome. The output
length is a constrained maximisation over the transcript statistic
(nE, nR, q0), after which the raw bits pass through the parity function
or a certified m-bit table.

``exact_security_audit`` replaces sampling with exhaustive enumeration of
tag vectors and estimation outcomes at small round counts, computing the
exact average conditional trace distance and checking it against the
tolerable error.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from .bell import RoundDevices, ShiftedChshParams, devices_from_angles
from .linalg import embed_operator, kron, partial_trace
from .extractor import (
    ExtractorTable,
    certify,
    read_table,
    search_extractor,
    small_certified_table,
    write_certificate,
    write_table,
    xor_table,
)
from .quantum import TripartiteState, build_rho_ke, trace_distance_to_ideal
from .rates import maximize_weighted

Mode = Literal["xor", "mbit"]

CACHE_ENV_VAR = "SEEDLESS_DI_CACHE"
MAX_TABLE_BITS = 26


@dataclass(frozen=True)
class HonestDeviceModel:
    """Product-across-rounds honest device: one two-qubit state plus angles."""

    state: np.ndarray
    alice_angles: tuple[float, float]
    bob_angles: tuple[float, float]

    def devices(self) -> RoundDevices:
        return devices_from_angles(self.alice_angles, self.bob_angles)

    def estimation_z0_probs(self) -> np.ndarray:
        """P(z = 0 | x, y) for the four settings, indexed by 2x + y."""
        dev = self.devices()
        probs = np.zeros(4)
        for x in range(2):
            for y in range(2):
                for a in range(2):
                    for b in range(2):
                        if (a + b + x * y) % 2 == 0:
                            op = kron(dev.alice[x].element(a), dev.bob[y].element(b))
                            probs[2 * x + y] += float(np.trace(self.state @ op).real)
        return probs

    def rawbit_p0(self) -> float:
        """P(a = 0) for the setting-0 measurement."""
        dev = self.devices()
        op = kron(dev.alice[0].element(0), np.eye(dev.dimB))
        return float(np.trace(self.state @ op).real)


@dataclass(frozen=True)
class ProtocolConfig:
    n: int
    p_e: float
    epsilon: float
    mode: Mode
    rng_seed: int
    device: HonestDeviceModel | None = None
    cache_dir: str | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if not (0.0 < self.p_e < 1.0):
            raise ValueError("p_e must lie in (0, 1)")
        if not (0.0 < self.epsilon <= 1.0):
            raise ValueError("epsilon must lie in (0, 1]")
        if self.mode not in ("xor", "mbit"):
            raise ValueError("mode must be 'xor' or 'mbit'")


@dataclass(frozen=True)
class Transcript:
    seed: int
    n: int
    p_e: float
    epsilon: float
    mode: Mode
    tags: np.ndarray  # 1 = estimation, 0 = rawbit
    xy: np.ndarray  # setting index 2x + y per estimation round
    z: np.ndarray
    a: np.ndarray
    m_out: int
    k: int | None  # packed output bits, None when the table is not materialised

    @property
    def n_e(self) -> int:
        return int(self.z.size)

    @property
    def n_r(self) -> int:
        return int(self.a.size)

    @property
    def q0(self) -> float:
        return float(np.count_nonzero(self.z == 0) / self.z.size) if self.z.size else math.nan

    def k_hex(self) -> str | None:
        if self.k is None or self.m_out == 0:
            return None
        return format(self.k, "x")

    def to_json_line(self) -> str:
        payload = {
            "seed": self.seed,
            "n": self.n,
            "pE": self.p_e,
            "epsilon": self.epsilon,
            "mode": self.mode,
            "nE": self.n_e,
            "nR": self.n_r,
            "q0": None if math.isnan(self.q0) else self.q0,
            "mOut": self.m_out,
            "kHex": self.k_hex(),
        }
        return json.dumps(payload)


# ---------------------------------------------------------------------------
# output length


def _counts(tags: np.ndarray) -> tuple[int, int]:
    n_e = int(np.count_nonzero(tags))
    return n_e, int(tags.size - n_e)


def output_length_xor(tags: np.ndarray, z: np.ndarray, p_e: float, epsilon: float) -> int:
    """One output bit when the transcript supports it, else zero.

    The yield test maximises sum_j alpha_{z_j} + (beta - 1) nR against the
    2 log2(1/eps) penalty, with the parity-mode constraints.
    """
    n_e, n_r = _counts(tags)
    if n_e == 0 or n_r == 0:
        return 0
    q0 = float(np.count_nonzero(z == 0) / n_e)
    sol = maximize_weighted("xor", p_e, q0, float(n_e), float(n_r))
    value = sol.objective - n_r - 2.0 * math.log2(1.0 / epsilon)
    return 1 if value >= 0.0 else 0


def output_length_mbit(tags: np.ndarray, z: np.ndarray, p_e: float, epsilon: float) -> int:
    """Floor of the maximised output length, clamped to [0, nR - 1]."""
    n_e, n_r = _counts(tags)
    if n_e == 0 or n_r <= 1:
        return 0
    q0 = float(np.count_nonzero(z == 0) / n_e)
    sol = maximize_weighted("mbit", p_e, q0, float(n_e), float(n_r))
    value = sol.objective - 2.0 * math.log2(1.0 / epsilon) - 4.0 * math.log2(n_r)
    m = math.floor(value)
    return max(0, min(m, n_r - 1))


# ---------------------------------------------------------------------------
# m-bit table provisioning (disk cache keyed by size and seed)


def table_cache_dir(override: str | None = None) -> Path:
    if override:
        return Path(override)
    env = os.environ.get(CACHE_ENV_VAR)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "seedless-di"


def mbit_table_for(
    n_r: int, m_out: int, seed: int, cache_dir: str | None = None
) -> ExtractorTable:
    """Certified table at (n_r, m_out); searched once, then reused from disk.

    Sizes at or below the search hypothesis bound use the deterministic
    small-table construction instead of random search.
    """
    if m_out >= n_r:
        raise ValueError("need m_out < n_r")
    if n_r <= 5:
        return small_certified_table(n_r, m_out)
    if n_r > MAX_TABLE_BITS:
        raise ValueError(f"cannot materialise tables beyond {MAX_TABLE_BITS} input bits")
    root = table_cache_dir(cache_dir)
    root.mkdir(parents=True, exist_ok=True)
    path = root / f"table_n{n_r}_m{m_out}_seed{seed}.txt"
    if path.exists():
        g = read_table(path)
        if certify(g).passed:
            return g
    g, cert, _ = search_extractor(n_r, m_out, max_attempts=64, rng_seed=seed)
    write_table(g, path)
    write_certificate(cert, path.with_suffix(".cert.json"), seed=seed)
    return g


# ---------------------------------------------------------------------------
# sampling protocol


def _streams(seed: int, count: int) -> list[np.random.Generator]:
    root = np.random.SeedSequence(seed)
    return [np.random.Generator(np.random.Philox(s)) for s in root.spawn(count)]


def run_protocol(cfg: ProtocolConfig) -> Transcript:
    """Sample one transcript from the honest device model and process it."""
    if cfg.device is None:
        raise ValueError("run_protocol needs an honest device model")
    rng_tag, rng_xy, rng_z, rng_a, rng_table = _streams(cfg.rng_seed, 5)
    tags = (rng_tag.random(cfg.n) < cfg.p_e).astype(np.int8)
    n_e = int(np.count_nonzero(tags))
    n_r = cfg.n - n_e

    z0 = cfg.device.estimation_z0_probs()
    xy = rng_xy.integers(0, 4, size=n_e)
    z = (rng_z.random(n_e) >= z0[xy]).astype(np.int8)

    p0 = cfg.device.rawbit_p0()
    a = (rng_a.random(n_r) >= p0).astype(np.int8)

    if cfg.mode == "xor":
        m_out = output_length_xor(tags, z, cfg.p_e, cfg.epsilon)
        k = int(np.bitwise_xor.reduce(a)) if m_out == 1 else 0
    else:
        m_out = output_length_mbit(tags, z, cfg.p_e, cfg.epsilon)
        k = 0 if m_out == 0 else None
        if m_out >= 1 and n_r <= MAX_TABLE_BITS:
            table_seed = int(rng_table.integers(0, 2**63 - 1))
            g = mbit_table_for(n_r, m_out, table_seed, cfg.cache_dir)
            k = g.apply_bits(a)
    return Transcript(
        seed=cfg.rng_seed,
        n=cfg.n,
        p_e=cfg.p_e,
        epsilon=cfg.epsilon,
        mode=cfg.mode,
        tags=tags,
        xy=xy,
        z=z,
        a=a,
        m_out=m_out,
        k=k,
    )


# ---------------------------------------------------------------------------
# estimation-round POVM and the exact small-n audit


def q_operators(devices: RoundDevices) -> tuple[np.ndarray, np.ndarray]:
    """Two-outcome POVM (Q0, Q1) realising the estimation statistic.

    Q_z averages A(a|x) B(b|y) over uniform settings, keeping the terms
    with a + b + xy = z mod 2.
    """
    d = devices.dim
    q = [np.zeros((d, d), dtype=complex), np.zeros((d, d), dtype=complex)]
    for x in range(2):
        for y in range(2):
            for a_bit in range(2):
                for b_bit in range(2):
                    op = kron(devices.alice[x].element(a_bit), devices.bob[y].element(b_bit))
                    q[(a_bit + b_bit + x * y) % 2] += 0.25 * op
    return q[0], q[1]


def shifted_operator_from_q(params: ShiftedChshParams, devices: RoundDevices) -> np.ndarray:
    """mu I - 4 nu (Q0 - Q1); equals the shifted operator identically."""
    q0_op, q1_op = q_operators(devices)
    return params.mu * np.eye(devices.dim) - 4.0 * params.nu * (q0_op - q1_op)


def _conditional_state(
    fixture: TripartiteState,
    devices: Sequence[RoundDevices],
    est_rounds: Sequence[int],
    z_bits: Sequence[int],
) -> tuple[float, TripartiteState | None, list[int]]:
    """Weight P(z | t) and the normalised post-measurement raw-round state."""
    n = fixture.n_rounds
    dims = fixture.site_dims
    raw_rounds = [i for i in range(n) if i not in est_rounds]
    measured = fixture.rho
    for j, rnd in enumerate(est_rounds):
        q0_op, q1_op = q_operators(devices[rnd])
        op = q0_op if z_bits[j] == 0 else q1_op
        measured = measured @ embed_operator(op, [rnd, n + rnd], dims)
    keep = raw_rounds + [n + i for i in raw_rounds] + [2 * n]
    sigma = partial_trace(measured, dims, keep=keep)
    weight = float(np.trace(sigma).real)
    if weight <= 1e-10 or not raw_rounds:
        # too little mass to normalise stably; callers bound the contribution
        return max(weight, 0.0), None, raw_rounds
    sigma = sigma / weight
    sigma = (sigma + sigma.conj().T) / 2.0
    state = TripartiteState(
        n_rounds=len(raw_rounds),
        dims_a=tuple(fixture.dims_a[i] for i in raw_rounds),
        dims_b=tuple(fixture.dims_b[i] for i in raw_rounds),
        dim_e=fixture.dim_e,
        rho=sigma,
    )
    return weight, state, raw_rounds


def exact_security_audit(
    fixture: TripartiteState,
    devices: Sequence[RoundDevices],
    cfg: ProtocolConfig,
) -> dict:
    """Exhaustively average the conditional trace distance over (t, z).

    Every tag vector and estimation outcome is enumerated with its exact
    probability; branches with zero output length contribute zero. The
    average must not exceed the tolerable error.
    """
    n = fixture.n_rounds
    if cfg.n != n:
        raise ValueError("config round count must match the fixture")
    if n > 3:
        raise ValueError("exact audit is limited to n <= 3")
    if len(devices) != n:
        raise ValueError("need one device pair per round")
    p_e, p_r = cfg.p_e, 1.0 - cfg.p_e
    total = 0.0
    skipped_mass = 0.0  # branches too improbable to normalise; bounded below by distance <= 2
    weight_check = 0.0
    branches = []
    for tag_bits in product((0, 1), repeat=n):
        est_rounds = [i for i in range(n) if tag_bits[i] == 1]
        n_e = len(est_rounds)
        n_r = n - n_e
        p_t = p_e**n_e * p_r**n_r
        tags = np.array(tag_bits, dtype=np.int8)
        for z_bits in product((0, 1), repeat=n_e):
            weight, state, raw_rounds = _conditional_state(fixture, devices, est_rounds, z_bits)
            weight_check += p_t * weight
            z_arr = np.array(z_bits, dtype=np.int8)
            if cfg.mode == "xor":
                m = output_length_xor(tags, z_arr, p_e, cfg.epsilon)
            else:
                m = output_length_mbit(tags, z_arr, p_e, cfg.epsilon)
            dist = 0.0
            if m >= 1:
                if state is None:
                    skipped_mass += p_t * weight
                else:
                    if cfg.mode == "xor":
                        g = xor_table(n_r)
                    else:
                        g = small_certified_table(n_r, m)
                    raw_devices = [devices[i] for i in raw_rounds]
                    dist = trace_distance_to_ideal(build_rho_ke(state, raw_devices, g))
                    total += p_t * weight * dist
            branches.append(
                {"tags": tag_bits, "z": z_bits, "prob": p_t * weight, "m": m, "dist": dist}
            )
    lhs_upper = total + 2.0 * skipped_mass
    return {
        "lhsAverage": lhs_upper,
        "epsilon": cfg.epsilon,
        "pass": bool(lhs_upper <= cfg.epsilon + 1e-12),
        "probabilityTotal": weight_check,
        "branches": branches,
    }
