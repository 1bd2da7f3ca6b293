"""Data ingestion, validation, Zeta simulation and evaluation metrics."""

from gibbs_discovery.data_sim.io import (
    build_report,
    dumps_report,
    estimates_csv,
    format_frequency_counts,
    parse_frequency_counts,
    read_frequency_counts,
    read_raw_sample,
    write_frequency_counts,
)
from gibbs_discovery.data_sim.metrics import (
    MetricsReport,
    approx_ratio,
    group_by_k,
    metrics_report,
    pick_representatives,
    sse,
)
from gibbs_discovery.data_sim.partitions import expected_frequency_share, sample_pd_partition
from gibbs_discovery.data_sim.summary import RawSample, ValidationReport, summarize, synthesize, validate
from gibbs_discovery.data_sim.zeta import ZetaPopulation, sample_zeta, true_discovery, true_discovery_table

__all__ = [
    "MetricsReport",
    "RawSample",
    "ValidationReport",
    "ZetaPopulation",
    "approx_ratio",
    "build_report",
    "dumps_report",
    "estimates_csv",
    "expected_frequency_share",
    "format_frequency_counts",
    "group_by_k",
    "metrics_report",
    "parse_frequency_counts",
    "pick_representatives",
    "read_frequency_counts",
    "read_raw_sample",
    "sample_pd_partition",
    "sample_zeta",
    "sse",
    "summarize",
    "synthesize",
    "true_discovery",
    "true_discovery_table",
    "validate",
    "write_frequency_counts",
]
