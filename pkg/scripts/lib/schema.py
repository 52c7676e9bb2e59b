"""Data schemas for the edgecode simulator."""

from dataclasses import dataclass, field
from typing import Any, Dict, List, NamedTuple, Optional, Tuple

TOOL_VERSION = "0.3.0"

POLICIES = ("lru", "lfu", "belady", "lfu-index")

SOURCE_CACHE = "cache"
SOURCE_NETWORK = "network"


class EdgecodeError(Exception):
    """Base class for every error the simulator raises on purpose."""


class SegmentId(NamedTuple):
    """A segment of a file. Tuple order is the canonical tie-break order."""
    file_id: int
    index: int  # 1-based

    def __str__(self) -> str:
        return f"{self.file_id}:{self.index}"


@dataclass(frozen=True)
class SegmentSizeModel:
    """Synthetic segment-size distribution."""
    family: str = "lognormal"  # lognormal | uniform | constant
    mean_bytes: int = 2_500_000
    sigma: float = 0.25  # log-space dispersion, lognormal only
    min_bytes: int = 500_000
    max_bytes: int = 6_000_000

    def to_dict(self) -> Dict[str, Any]:
        return {
            'family': self.family,
            'mean_bytes': self.mean_bytes,
            'sigma': self.sigma,
            'min_bytes': self.min_bytes,
            'max_bytes': self.max_bytes,
        }


@dataclass(frozen=True)
class FileSpec:
    """One video file: its duration and per-segment sizes in bytes."""
    file_id: int
    duration: float
    segments: Tuple[int, ...]

    @property
    def n_segments(self) -> int:
        return len(self.segments)

    @property
    def total_bytes(self) -> int:
        return sum(self.segments)

    def segment_ids(self) -> List[SegmentId]:
        return [SegmentId(self.file_id, i) for i in range(1, len(self.segments) + 1)]


@dataclass
class Catalog:
    """Files indexed by popularity rank (file_id 1..N)."""
    files: List[FileSpec]
    segment_duration: float

    @property
    def n_files(self) -> int:
        return len(self.files)

    @property
    def total_bytes(self) -> int:
        return sum(f.total_bytes for f in self.files)

    def file(self, file_id: int) -> FileSpec:
        return self.files[file_id - 1]

    def segment_size(self, segment: SegmentId) -> int:
        return self.files[segment.file_id - 1].segments[segment.index - 1]


@dataclass(frozen=True)
class PopularityParams:
    """MZipf shape plus the rewatch factor."""
    n_files: int
    gamma: float = 2.5
    q: float = 10.0
    alpha: float = 1.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            'n_files': self.n_files,
            'gamma': self.gamma,
            'q': self.q,
            'alpha': self.alpha,
        }


@dataclass(frozen=True)
class ProfileEntry:
    """One file request: the client waits, then streams the file."""
    file_id: int
    wait_ms: int

    @property
    def wait(self) -> float:
        return self.wait_ms / 1000.0


@dataclass
class RequestProfile:
    """Pregenerated per-client request sequences shared by compared runs."""
    clients: List[List[ProfileEntry]]
    seed: int
    params: PopularityParams
    mean_wait: float
    horizon: float
    catalog_hash: str = ""

    @property
    def n_clients(self) -> int:
        return len(self.clients)


@dataclass(frozen=True)
class SimConfig:
    """One simulation run."""
    n_clients: int = 10
    link_rate: float = 24e6  # bits/s
    horizon: float = 10800.0
    cache_fraction: float = 0.05
    policy: str = "lru"
    coding_enabled: bool = True
    backhaul_delay: float = 0.0
    seed: int = 0
    require_positive_dof: bool = False
    check_invariants: bool = True
    cache_trace: bool = False


@dataclass(frozen=True)
class DeliveryRecord:
    """A satisfied segment request."""
    client: int
    segment: SegmentId
    size: int
    request_time: float
    delivery_time: float
    source: str  # cache | network
    payload_bytes: int = 0
    group_size: int = 0

    @property
    def elapsed(self) -> float:
        return self.delivery_time - self.request_time


@dataclass(frozen=True)
class Transmission:
    """One multicast on the shared link (plain or XOR-coded)."""
    start: float
    end: float
    payload_bytes: int
    members: Tuple[Tuple[int, SegmentId], ...]


@dataclass
class SimResult:
    """Everything a run produces."""
    deliveries: List[DeliveryRecord] = field(default_factory=list)
    transmissions: List[Transmission] = field(default_factory=list)
    coding_trace: List[str] = field(default_factory=list)
    cache_trace: List[str] = field(default_factory=list)
    requests_issued: int = 0
    oversize: int = 0
    idle_clients: int = 0
    # Per client, how many profile files were started before the run ended.
    files_started: List[int] = field(default_factory=list)

    @property
    def tx_bytes(self) -> int:
        return sum(t.payload_bytes for t in self.transmissions)

    @property
    def hits(self) -> int:
        return sum(1 for d in self.deliveries if d.source == SOURCE_CACHE)

    @property
    def misses(self) -> int:
        return sum(1 for d in self.deliveries if d.source == SOURCE_NETWORK)


@dataclass
class MetricsReport:
    """Gains, latency and throughput for one (alpha, M, policy, seed) cell.

    None marks an undefined metric (zero denominator or empty trace).
    """
    gain_caching: Optional[float] = None
    gain_coding: Optional[float] = None
    gain_combined: Optional[float] = None
    latency_per_mb: Optional[float] = None
    perceived_throughput: Optional[float] = None
    tx_bytes_nocache: int = 0
    tx_bytes_cache: int = 0
    tx_bytes_cache_coded: int = 0
    hits: int = 0
    misses: int = 0
    requests_completed: int = 0
    latency_per_mb_uncoded: Optional[float] = None
    throughput_uncoded: Optional[float] = None


@dataclass
class SweepCell:
    alpha: float
    cache_fraction: float
    policy: str
    seed: int
    report: MetricsReport

    @property
    def key(self) -> Tuple[float, float, str, int]:
        return (self.alpha, self.cache_fraction, self.policy, self.seed)


@dataclass
class ExperimentConfig:
    """Every tunable of a sweep. Defaults are the published settings."""
    n_files: int = 100
    duration_range: Tuple[float, float] = (120.0, 300.0)
    segment_duration: float = 4.0
    size_model: SegmentSizeModel = field(default_factory=SegmentSizeModel)
    gamma: float = 2.5
    q: float = 10.0
    mean_wait: float = 5.0
    horizon: float = 10800.0
    alphas: List[float] = field(default_factory=lambda: [0.0, 0.25, 0.5, 0.75, 1.0])
    n_clients: int = 10
    link_rate: float = 24e6
    cache_fractions: List[float] = field(default_factory=lambda: [0.05, 0.10, 0.15])
    policies: List[str] = field(default_factory=lambda: list(POLICIES))
    coding: List[bool] = field(default_factory=lambda: [False, True])
    backhaul_delay: float = 0.0
    require_positive_dof: bool = False
    check_invariants: bool = True
    cache_trace: bool = False
    seeds: List[int] = field(default_factory=lambda: [1])
    output_dir: str = "out"

    def popularity(self, alpha: float) -> PopularityParams:
        return PopularityParams(n_files=self.n_files, gamma=self.gamma, q=self.q, alpha=alpha)

    def sim_config(self, cache_fraction: float, policy: str, coding: bool, seed: int) -> SimConfig:
        return SimConfig(
            n_clients=self.n_clients,
            link_rate=self.link_rate,
            horizon=self.horizon,
            cache_fraction=cache_fraction,
            policy=policy,
            coding_enabled=coding,
            backhaul_delay=self.backhaul_delay,
            seed=seed,
            require_positive_dof=self.require_positive_dof,
            check_invariants=self.check_invariants,
            cache_trace=self.cache_trace,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            'catalog': {
                'n_files': self.n_files,
                'duration_range': list(self.duration_range),
                'segment_duration': self.segment_duration,
                'size_model': self.size_model.to_dict(),
            },
            'popularity': {
                'gamma': self.gamma,
                'q': self.q,
            },
            'workload': {
                'mean_wait': self.mean_wait,
                'horizon': self.horizon,
                'alphas': list(self.alphas),
            },
            'system': {
                'n_clients': self.n_clients,
                'link_rate': self.link_rate,
                'cache_fractions': list(self.cache_fractions),
                'policies': list(self.policies),
                'coding': list(self.coding),
                'backhaul_delay': self.backhaul_delay,
                'require_positive_dof': self.require_positive_dof,
                'check_invariants': self.check_invariants,
                'cache_trace': self.cache_trace,
            },
            'sweep': {
                'seeds': list(self.seeds),
            },
            'output': {
                'dir': self.output_dir,
            },
        }


@dataclass
class RunManifest:
    """Which files a sweep produced, with digests for resume checks."""
    config_hash: str
    tool_version: str = TOOL_VERSION
    cells: Dict[str, Dict[str, str]] = field(default_factory=dict)  # cell key -> {relpath: digest}

    def to_dict(self) -> Dict[str, Any]:
        return {
            'config_hash': self.config_hash,
            'tool_version': self.tool_version,
            'cells': {k: dict(sorted(v.items())) for k, v in sorted(self.cells.items())},
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunManifest":
        return cls(
            config_hash=data['config_hash'],
            tool_version=data.get('tool_version', TOOL_VERSION),
            cells={k: dict(v) for k, v in data.get('cells', {}).items()},
        )
