"""CSV emission, zero-table files and the on-disk cache."""

from __future__ import annotations

import csv
import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .errors import ConfigError
from .zerofinder import Rectangle, ZeroTable, ZetaPrimeZero, ZetaZero, berndt_main_term

CODE_VERSION = f"{__version__}+em2"
KINDS = ("zeta_zeros", "zeta_prime_zeros")


def fmt(x: float, digits: int = 18) -> str:
    """Fixed-width scientific text; 18 significant digits round-trip doubles losslessly."""
    if isinstance(x, str):
        return x
    if not math.isfinite(x):
        return "NA" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return f"{x:.{digits - 1}e}"


def gamma_repr(text: str | None, value: float, digits: int = 18) -> str:
    """Ordinate with ``digits`` significant digits, taken from the high precision text when present."""
    if text is None:
        return f"{value:.{digits}g}"
    from decimal import Context, Decimal

    return format(Context(prec=digits).create_decimal(Decimal(text)), "f")


def atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def rows_to_csv(header: list[str], rows, footer: list[str] | None = None) -> str:
    import io as _io

    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) if isinstance(v, float) else v for v in r])
    for line in footer or ():
        buf.write(f"# {line}\n")
    return buf.getvalue()


def write_csv(path: Path, header, rows, footer=None) -> Path:
    atomic_write_text(Path(path), rows_to_csv(header, rows, footer))
    return Path(path)


def read_csv(path: Path) -> tuple[list[str], list[list[str]], list[str]]:
    """(header, rows, footer lines without the leading '# ')."""
    lines = Path(path).read_text().splitlines()
    footer = [ln[2:] for ln in lines if ln.startswith("#")]
    body = [ln for ln in lines if not ln.startswith("#")]
    rows = list(csv.reader(body))
    return rows[0], rows[1:], footer


# --- zero tables -----------------------------------------------------------------------------------


def zeros_csv_text(table: ZeroTable) -> str:
    rows = [(z.n, gamma_repr(z.gamma_text, z.gamma), fmt(z.residual, 3)) for z in table.zeros]
    footer = [f"certified={str(table.certified).lower()} count={table.count_check} tmax={table.t_max!r}"]
    return rows_to_csv(["n", "gamma", "residual"], rows, footer)


def parse_footer(line: str) -> dict[str, str]:
    return dict(part.split("=", 1) for part in line.split())


def read_zeros_csv(path: Path) -> ZeroTable:
    """Load a zeros.csv (or a user-supplied table with the same columns) as a ZeroTable."""
    header, rows, footer = read_csv(path)
    if header[:2] != ["n", "gamma"]:
        raise ConfigError(f"{path}: expected columns n,gamma[,residual]")
    zeros = tuple(ZetaZero(int(r[0]), float(r[1]), float(r[2]) if len(r) > 2 else 0.0, r[1]) for r in rows)
    meta = parse_footer(footer[-1]) if footer else {}
    t_max = float(meta.get("tmax", zeros[-1].gamma if zeros else 0.0))
    count = int(meta.get("count", len(zeros)))
    certified = meta.get("certified", "false") == "true" and count == len(zeros)
    return ZeroTable(zeros, t_max, certified, count)


def prime_zeros_csv_text(zeros: list[ZetaPrimeZero], t_max: float) -> str:
    rows = [(k + 1, gamma_repr(z.beta_text, z.beta), gamma_repr(z.gamma_text, z.gamma), fmt(z.residual, 3))
            for k, z in enumerate(zeros)]
    if t_max > 4 * math.pi * math.e:
        main = berndt_main_term(t_max)
        footer = [f"count={len(zeros)} berndt_main={main!r} difference={len(zeros) - main!r} "
                  f"two_log_t={2 * math.log(t_max)!r} tmax={t_max!r}"]
    else:
        footer = [f"count={len(zeros)} tmax={t_max!r}"]
    return rows_to_csv(["k", "beta", "gamma", "residual"], rows, footer)


# --- cache -------------------------------------------------------------------------------------------


@dataclass(frozen=True)
class CacheKey:
    kind: str
    t_max: float
    precision_digits: int
    code_version: str = CODE_VERSION

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown cache kind {self.kind}")

    def filename(self) -> str:
        return f"{self.kind}-T{self.t_max!r}-d{self.precision_digits}-v{self.code_version}.json"


class Cache:
    def __init__(self, root: str | os.PathLike | None):
        self.root = Path(root) if root else None

    def _path(self, key: CacheKey) -> Path | None:
        return self.root / key.filename() if self.root else None

    def load_zeros(self, key: CacheKey) -> ZeroTable | None:
        p = self._path(key)
        if p is None or not p.exists():
            return None
        d = json.loads(p.read_text())
        if d.get("key") != key.filename():
            return None
        zeros = tuple(ZetaZero(n, float(text), res, text) for n, text, res in d["zeros"])
        return ZeroTable(zeros, d["t_max"], d["certified"], d["count_check"])

    def store_zeros(self, key: CacheKey, table: ZeroTable) -> None:
        p = self._path(key)
        if p is None:
            return
        d = {"key": key.filename(), "t_max": table.t_max, "certified": table.certified,
             "count_check": table.count_check,
             "zeros": [[z.n, z.gamma_text or repr(z.gamma), z.residual] for z in table.zeros]}
        atomic_write_text(p, json.dumps(d))

    def load_primes(self, key: CacheKey) -> list[ZetaPrimeZero] | None:
        p = self._path(key)
        if p is None or not p.exists():
            return None
        d = json.loads(p.read_text())
        if d.get("key") != key.filename():
            return None
        return [ZetaPrimeZero(float(b), float(g), r, Rectangle(*box), b, g) for b, g, r, box in d["zeros"]]

    def store_primes(self, key: CacheKey, zeros: list[ZetaPrimeZero]) -> None:
        p = self._path(key)
        if p is None:
            return
        d = {"key": key.filename(),
             "zeros": [[z.beta_text or repr(z.beta), z.gamma_text or repr(z.gamma), z.residual,
                        [z.box.sigma_lo, z.box.sigma_hi, z.box.t_lo, z.box.t_hi]] for z in zeros]}
        atomic_write_text(p, json.dumps(d))
