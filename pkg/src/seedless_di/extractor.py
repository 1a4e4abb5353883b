"""Extractor truth tables and their Walsh-spectrum certification.

A table g maps n-bit inputs to m-bit outputs. It is accepted when every
centered Walsh coefficient

    sum_a ([g(a) = k] - 2^-m) * (-1)^(a . r)

is bounded by n^2 * sqrt(2)^(n - m) in absolute value, for all k and r.
Random tables pass with overwhelming probability once n > 5 and n > m,
which the seeded rejection search below exploits; certification itself is
unconditional and never trusts the generator.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels

MAX_INPUT_BITS = 26  # 2^26-entry tables already need a 0.5 GiB transform buffer


@dataclass(frozen=True)
class ExtractorTable:
    """Packed truth table of g: {0,1}^n_in -> {0,1}^m_out."""

    n_in: int
    m_out: int
    table: np.ndarray

    def __post_init__(self):
        if not (1 <= self.n_in <= MAX_INPUT_BITS):
            raise ValueError(f"n_in must lie in [1, {MAX_INPUT_BITS}]")
        if self.m_out < 1:
            raise ValueError("m_out must be positive")
        table = np.ascontiguousarray(self.table, dtype=np.int64)
        if table.shape != (1 << self.n_in,):
            raise ValueError("table length must be 2^n_in")
        if table.min() < 0 or table.max() >= (1 << self.m_out):
            raise ValueError("table entries must be m_out-bit values")
        object.__setattr__(self, "table", table)

    def __call__(self, a: int) -> int:
        return int(self.table[a])

    def apply_bits(self, bits: np.ndarray) -> int:
        """Evaluate the table on a bit vector, bit 0 most significant."""
        if bits.size != self.n_in:
            raise ValueError("input length mismatch")
        idx = 0
        for b in bits:
            idx = (idx << 1) | int(b)
        return int(self.table[idx])


@dataclass(frozen=True)
class WalshCertificate:
    n_in: int
    m_out: int
    max_deviation: float
    bound: float
    passed: bool
    argmax_k: int
    argmax_r: int

    def to_json_dict(self, seed: int | None = None) -> dict:
        out = {
            "n": self.n_in,
            "m": self.m_out,
            "maxDeviation": self.max_deviation,
            "bound": self.bound,
            "pass": self.passed,
            "argmaxK": self.argmax_k,
            "argmaxR": self.argmax_r,
            "seed": seed,
        }
        return out


def certification_bound(n_in: int, m_out: int) -> float:
    """n^2 * sqrt(2)^(n - m)."""
    return float(n_in * n_in * np.sqrt(2.0) ** (n_in - m_out))


def xor_table(n_in: int) -> ExtractorTable:
    """Parity of the input bits; the only explicit construction used here."""
    if not (1 <= n_in <= MAX_INPUT_BITS):
        raise ValueError(f"n_in must lie in [1, {MAX_INPUT_BITS}]")
    a = np.arange(1 << n_in, dtype=np.uint64)
    return ExtractorTable(n_in, 1, (np.bitwise_count(a) & np.uint64(1)).astype(np.int64))


def truncation_table(n_in: int, m_out: int) -> ExtractorTable:
    """g(a) = low m bits of a; certifiable whenever sqrt(2)^(n-m) <= n^2.

    Used only for tiny inputs where the randomized search hypotheses
    (n > 5) do not apply but a certified table is still required.
    """
    a = np.arange(1 << n_in, dtype=np.int64)
    return ExtractorTable(n_in, m_out, a & ((1 << m_out) - 1))


def walsh_deviations(g: ExtractorTable, k: int) -> np.ndarray:
    """Centered Walsh coefficients of the indicator of output value k.

    Entry r is sum_a ([g(a) = k] - 2^-m) * (-1)^(a . r), computed with the
    fast transform in O(n 2^n).
    """
    if not (0 <= k < (1 << g.m_out)):
        raise ValueError("k out of range")
    vec = _kernels.centered_indicator(g.table, k, g.m_out)
    return _kernels.fwht_inplace(vec)


def naive_deviations(g: ExtractorTable, k: int) -> np.ndarray:
    """O(4^n) direct double summation; the independent oracle for the FWHT path."""
    if g.n_in > 14:
        raise ValueError("naive oracle limited to n_in <= 14")
    n = 1 << g.n_in
    centered = (g.table == k).astype(np.float64) - 0.5**g.m_out
    a = np.arange(n, dtype=np.uint32)
    out = np.empty(n, dtype=np.float64)
    for r in range(n):
        masked = a & np.uint32(r)
        # popcount parity via 16-bit lookup-free folding
        par = masked
        for shift in (16, 8, 4, 2, 1):
            par = par ^ (par >> np.uint32(shift))
        signs = 1.0 - 2.0 * (par & np.uint32(1)).astype(np.float64)
        out[r] = float(centered @ signs)
    return out


def certify(g: ExtractorTable) -> WalshCertificate:
    """Scan all 2^m output values for the largest centered Walsh coefficient."""
    if g.m_out >= g.n_in:
        raise ValueError("certification requires m_out < n_in")
    bound = certification_bound(g.n_in, g.m_out)
    best = -1.0
    arg_k = arg_r = 0
    for k in range(1 << g.m_out):
        dev = walsh_deviations(g, k)
        mx, r = _kernels.max_abs_argmax(dev)
        if mx > best:
            best, arg_k, arg_r = mx, k, r
    return WalshCertificate(
        n_in=g.n_in,
        m_out=g.m_out,
        max_deviation=best,
        bound=bound,
        passed=bool(best <= bound),
        argmax_k=arg_k,
        argmax_r=arg_r,
    )


class SearchExhausted(RuntimeError):
    """No passing table within the attempt budget."""

    def __init__(self, attempts: int):
        super().__init__(f"no certified table found in {attempts} attempts")
        self.attempts = attempts


def search_extractor(
    n_in: int,
    m_out: int,
    max_attempts: int = 32,
    rng_seed: int = 0,
) -> tuple[ExtractorTable, WalshCertificate, int]:
    """Rejection-sample uniformly random tables until one certifies.

    Requires n_in > 5 and n_in > m_out, the regime where passing tables
    exist in abundance. Returns (table, certificate, attempts used);
    deterministic in ``rng_seed`` (Philox streams).
    """
    if n_in <= 5:
        raise ValueError("search requires n_in > 5")
    if m_out >= n_in:
        raise ValueError("search requires n_in - m_out > 0")
    if m_out < 1:
        raise ValueError("m_out must be positive")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(rng_seed)))
    for attempt in range(1, max_attempts + 1):
        table = ExtractorTable(
            n_in, m_out, rng.integers(0, 1 << m_out, size=1 << n_in, dtype=np.int64)
        )
        cert = certify(table)
        if cert.passed:
            return table, cert, attempt
    raise SearchExhausted(max_attempts)


def small_certified_table(n_in: int, m_out: int) -> ExtractorTable:
    """Deterministic certified table for sizes below the search hypotheses.

    Truncation satisfies the coefficient bound whenever sqrt(2)^(n-m) <= n^2,
    which covers every n_in the small-round protocol verifier needs.
    """
    g = truncation_table(n_in, m_out)
    cert = certify(g)
    if not cert.passed:
        raise ValueError(f"no certified truncation table at n={n_in}, m={m_out}")
    return g


# ---------------------------------------------------------------------------
# on-disk format: header line "n=<n> m=<m>", then 2^n hex values


def write_table(g: ExtractorTable, path: str | Path) -> None:
    path = Path(path)
    with path.open("w") as fh:
        fh.write(f"n={g.n_in} m={g.m_out}\n")
        for v in g.table:
            fh.write(f"{int(v):x}\n")


def read_table(path: str | Path) -> ExtractorTable:
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip()
        fields = dict(part.split("=", 1) for part in header.split())
        n_in = int(fields["n"])
        m_out = int(fields["m"])
        table = np.fromiter((int(line, 16) for line in fh if line.strip()), dtype=np.int64)
    return ExtractorTable(n_in, m_out, table)


def write_certificate(cert: WalshCertificate, path: str | Path, seed: int | None = None) -> None:
    Path(path).write_text(json.dumps(cert.to_json_dict(seed), indent=2) + "\n")


def read_certificate(path: str | Path) -> WalshCertificate:
    data = json.loads(Path(path).read_text())
    return WalshCertificate(
        n_in=data["n"],
        m_out=data["m"],
        max_deviation=data["maxDeviation"],
        bound=data["bound"],
        passed=data["pass"],
        argmax_k=data["argmaxK"],
        argmax_r=data["argmaxR"],
    )
