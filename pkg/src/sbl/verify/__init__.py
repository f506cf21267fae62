"""Verification harness: run configuration, suites and reports."""

from sbl.verify.config import SUITES, ConfigError, RunConfig, build_config
from sbl.verify.report import IdentityRecord, VerificationReport, emit_report, from_json, to_json
from sbl.verify.suites import SUITE_FUNCS, Context


def run_verification(config: RunConfig) -> VerificationReport:
    """Run the selected suites; records come out ordered by identity id."""
    ctx = Context(config)
    report = VerificationReport(config=config.echo())
    for name in config.selected_suites:
        for rec in SUITE_FUNCS[name](ctx):
            report.add(rec)
    return report


__all__ = [
    "SUITES",
    "ConfigError",
    "Context",
    "IdentityRecord",
    "RunConfig",
    "VerificationReport",
    "build_config",
    "emit_report",
    "from_json",
    "run_verification",
    "to_json",
]
