"""Schema presets for the common intrusion-detection benchmark CSVs.

Only column maps live here; the datasets themselves must be fetched by the
user. Presets either carry a fixed column list (headerless files) or
classify the actual header by name, so minor column-order differences
between dataset distributions are tolerated.

The kddcup99 preset also documents the attack-class downsampling used for
evaluation: the raw stream is ~80% attack records, so keeping every 16th
attack record (by arrival ordinal, deterministic) brings the attack share
to roughly 20%. Published AUC figures for this dataset depend on the exact
downsampling, so expect extra variance when comparing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Sequence

from .pipeline import ConfigError, RunConfig
from .records import Schema, TickPolicy

KDD_ATTACK_KEEP_EVERY = 16

_KDD_COLUMNS = [
    "duration", "protocol_type", "service", "flag", "src_bytes", "dst_bytes",
    "land", "wrong_fragment", "urgent", "hot", "num_failed_logins",
    "logged_in", "num_compromised", "root_shell", "su_attempted", "num_root",
    "num_file_creations", "num_shells", "num_access_files",
    "num_outbound_cmds", "is_host_login", "is_guest_login", "count",
    "srv_count", "serror_rate", "srv_serror_rate", "rerror_rate",
    "srv_rerror_rate", "same_srv_rate", "diff_srv_rate",
    "srv_diff_host_rate", "dst_host_count", "dst_host_srv_count",
    "dst_host_same_srv_rate", "dst_host_diff_srv_rate",
    "dst_host_same_src_port_rate", "dst_host_srv_diff_host_rate",
    "dst_host_serror_rate", "dst_host_srv_serror_rate",
    "dst_host_rerror_rate", "dst_host_srv_rerror_rate", "label",
]
_KDD_CATEGORICAL = {
    "protocol_type", "service", "flag", "land", "logged_in",
    "is_host_login", "is_guest_login",
}

_UNSW_COLUMNS = [
    "srcip", "sport", "dstip", "dsport", "proto", "state", "dur", "sbytes",
    "dbytes", "sttl", "dttl", "sloss", "dloss", "service", "sload", "dload",
    "spkts", "dpkts", "swin", "dwin", "stcpb", "dtcpb", "smeansz", "dmeansz",
    "trans_depth", "res_bdy_len", "sjit", "djit", "stime", "ltime",
    "sintpkt", "dintpkt", "tcprtt", "synack", "ackdat", "is_sm_ips_ports",
    "ct_state_ttl", "ct_flw_http_mthd", "is_ftp_login", "ct_ftp_cmd",
    "ct_srv_src", "ct_srv_dst", "ct_dst_ltm", "ct_src_ltm",
    "ct_src_dport_ltm", "ct_dst_sport_ltm", "ct_dst_src_ltm", "attack_cat",
    "label",
]
_UNSW_CATEGORICAL = {
    "srcip", "sport", "dstip", "dsport", "proto", "state", "service",
    "is_sm_ips_ports", "is_ftp_login",
}

# CSE-CIC-IDS2018 headers vary slightly per capture day; classify by name.
_CICIDS_CATEGORICAL = {
    "flow id", "src ip", "source ip", "dst ip", "destination ip",
    "src port", "source port", "dst port", "destination port", "protocol",
}


def _fixed_schema(
    columns: Sequence[str],
    categorical: set[str],
    timestamp: str | None,
    label: str | None,
    ignore: set[str] | None = None,
) -> Schema:
    ignore = ignore or set()
    pairs = []
    for name in columns:
        if name == timestamp:
            kind = "timestamp"
        elif name == label:
            kind = "label"
        elif name in ignore:
            kind = "ignore"
        elif name in categorical:
            kind = "categorical"
        else:
            kind = "numeric"
        pairs.append((name, kind))
    return Schema.of(*pairs)


def _cicids_schema(header: Sequence[str]) -> Schema:
    pairs = []
    for name in header:
        low = name.strip().lower()
        if low == "timestamp":
            kind = "timestamp"
        elif low == "label":
            kind = "label"
        elif low in _CICIDS_CATEGORICAL:
            kind = "categorical"
        else:
            kind = "numeric"
        pairs.append((name.strip(), kind))
    return Schema.of(*pairs)


@dataclass(frozen=True)
class DatasetPreset:
    """Named column map plus the operating parameters used in evaluation."""

    name: str
    expected_dims: int
    alpha: float
    tick: TickPolicy
    has_header: bool
    benign_tokens: tuple[str, ...]
    build_schema: Callable[[Sequence[str] | None], Schema]

    def config(self, header: Sequence[str] | None = None, **overrides) -> RunConfig:
        schema = self.build_schema(header)
        base = RunConfig(
            schema=schema,
            tick=self.tick,
            alpha=self.alpha,
            has_header=self.has_header,
            benign_tokens=self.benign_tokens,
        )
        if overrides:
            from dataclasses import replace

            base = replace(base, **overrides)
        return base.validated()


def _kdd_schema(header: Sequence[str] | None) -> Schema:
    return _fixed_schema(_KDD_COLUMNS, _KDD_CATEGORICAL, None, "label")


def _unsw_schema(header: Sequence[str] | None) -> Schema:
    return _fixed_schema(
        _UNSW_COLUMNS, _UNSW_CATEGORICAL, "stime", "label", ignore={"attack_cat", "ltime"}
    )


def _cicids(header: Sequence[str] | None) -> Schema:
    if header is None:
        raise ConfigError("CICIDS presets classify the CSV header; none given")
    return _cicids_schema(header)


PRESETS: dict[str, DatasetPreset] = {
    "kddcup99": DatasetPreset(
        name="kddcup99",
        expected_dims=42,
        alpha=0.85,
        tick=TickPolicy.every_n(1000),
        has_header=False,
        benign_tokens=("normal.", "normal"),
        build_schema=_kdd_schema,
    ),
    "unsw_nb15": DatasetPreset(
        name="unsw_nb15",
        expected_dims=49,
        alpha=0.4,
        tick=TickPolicy.from_timestamp(),
        has_header=False,
        benign_tokens=("0",),
        build_schema=_unsw_schema,
    ),
    "cicids_dos": DatasetPreset(
        name="cicids_dos",
        expected_dims=80,
        alpha=0.95,
        tick=TickPolicy.from_timestamp(),
        has_header=True,
        benign_tokens=("benign",),
        build_schema=_cicids,
    ),
    "cicids_ddos": DatasetPreset(
        name="cicids_ddos",
        expected_dims=83,
        alpha=0.95,
        tick=TickPolicy.from_timestamp(),
        has_header=True,
        benign_tokens=("benign",),
        build_schema=_cicids,
    ),
}


def get_preset(name: str) -> DatasetPreset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}"
        ) from None


def downsample_kdd(
    rows: Iterable[Sequence[str]],
    keep_every: int = KDD_ATTACK_KEEP_EVERY,
    label_index: int = -1,
    benign_token: str = "normal.",
) -> Iterator[Sequence[str]]:
    """Keep all benign rows and every keep_every-th attack row, by ordinal."""
    attack_seen = 0
    for row in rows:
        if row[label_index].strip().lower() == benign_token:
            yield row
        else:
            if attack_seen % keep_every == 0:
                yield row
            attack_seen += 1
