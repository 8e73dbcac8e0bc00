"""Versioned data snapshots, computed template variables and generated figures."""
from .sources import Snapshot, SnapshotStore, discover_revision, fetch_source
from .spec import DataConfig, FigureSpec, SeriesSpec, SourceSpec, StatSpec, config_from_dict, load_data_config
from .tables import Table, parse_payload, parse_predicate, reduce_table
from .update import UpdateResult, compute_stats, figure_svg, render_figure, update_all, write_variable_file

__all__ = [
    "DataConfig",
    "FigureSpec",
    "SeriesSpec",
    "Snapshot",
    "SnapshotStore",
    "SourceSpec",
    "StatSpec",
    "Table",
    "UpdateResult",
    "compute_stats",
    "config_from_dict",
    "discover_revision",
    "fetch_source",
    "figure_svg",
    "load_data_config",
    "parse_payload",
    "parse_predicate",
    "reduce_table",
    "render_figure",
    "update_all",
    "write_variable_file",
]
