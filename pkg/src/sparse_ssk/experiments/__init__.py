"""Monte Carlo experiment suites and their statistical machinery."""

from .report import SCHEMA_VERSION, ExperimentReport, TrialRecord, read_csv_records
from .runner import compute_spectrum, default_threads, run_trials
from .stats import ks_test, ks_two_sample, moment_table
from .suites import (
    lss_variance,
    regime_of,
    rigidity_bound,
    rigidity_scaling,
    run_edge,
    run_high_t,
    run_low_t,
    run_lss,
    run_rigidity,
)
from .tw import TWReference, tw1_reference_sample
