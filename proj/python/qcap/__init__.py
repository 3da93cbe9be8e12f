"""Holevo capacity solver and converse-bound checks (Python bindings).

Matrices are numpy complex arrays; entropic values are in nats.
"""

import json

from ._qcap import (
    BoundReport,
    CapacityResult,
    Channel,
    Code,
    QcapError,
    certificate_gap,
    channel_from_kraus,
    cq_channel,
    depolarizing,
    holevo_capacity,
    holevo_quantity,
    identity_channel,
    lemma5_check,
    measured_renyi_divergence,
    messages_for_rate,
    petz_renyi_divergence,
    proof_chain_verify,
    random_pgm_code,
    relative_entropy,
    second_order_converse_check,
    second_order_rhs,
    theorem1_check,
    uniqueness_distance,
    von_neumann_entropy,
)
from ._qcap import run_experiment as _run_experiment


def run_experiment(task, config, base_dir="."):
    """Run a config-driven experiment; `config` is a dict or a JSON string.

    Returns (report dict, summary CSV text, checks, failures).
    """
    text = config if isinstance(config, str) else json.dumps(config)
    report, csv, checks, failures = _run_experiment(task, text, base_dir)
    return json.loads(report), csv, checks, failures
