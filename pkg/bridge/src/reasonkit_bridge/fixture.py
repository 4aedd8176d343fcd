"""Shipped golden fixture and the parity self-test.

The fixture file holds a batch of inputs together with the advantage
arrays the core kernel produced for them at build time. self_test()
replays the batch through the bridge and fails loudly if any element
drifts beyond the parity budget, which guards against skew between an
installed bridge and the core package it wraps.
"""

from __future__ import annotations

import json
from importlib import resources

import numpy as np

from reasonkit import LengthBounds

from .batch import BridgeBatch, compute_advantages_batch

FIXTURE_NAME = "golden_fixture.json"
PARITY_ATOL = 1e-9


class ParityError(AssertionError):
    """Bridge output drifted from the recorded core output."""


def load_fixture() -> dict:
    path = resources.files("reasonkit_bridge").joinpath("data", FIXTURE_NAME)
    return json.loads(path.read_text(encoding="utf-8"))


def fixture_batch(fixture: dict) -> tuple[BridgeBatch, dict, bool]:
    raw = fixture["batch"]
    batch = BridgeBatch(
        r_task=raw["r_task"], l_cot=raw["l_cot"], l_nocot=raw["l_nocot"],
        lengths=raw["lengths"], bucket_ids=np.asarray(raw["bucket_ids"]),
        correct=raw["correct"], format_ok=raw["format_ok"],
        group_sizes=raw["group_sizes"], prompt_ids=tuple(raw["prompt_ids"]),
        lambda_q=fixture["config"]["lambda_q"],
        tau=fixture["config"]["tau"],
        epsilon=fixture["config"]["epsilon"],
    )
    bounds = {b.bucket: b for b in
              (LengthBounds.from_record(rec) for rec in fixture["bounds"])}
    return batch, bounds, fixture["config"]["skip_uniform_groups"]


def self_test(atol: float = PARITY_ATOL) -> dict:
    """Replay the golden batch and compare elementwise against the record.

    Returns a small summary on success; raises ParityError on drift.
    """

    fixture = load_fixture()
    batch, bounds, skip = fixture_batch(fixture)
    result = compute_advantages_batch(batch, bounds,
                                      skip_uniform_groups=skip)
    expected = fixture["expected"]

    max_err = 0.0
    for name in ("r_q", "r", "a_tilde", "g", "a_hat"):
        got = getattr(result, name)
        want = np.asarray(expected[name], dtype=np.float64)
        err = float(np.max(np.abs(got - want))) if got.size else 0.0
        max_err = max(max_err, err)
        if err > atol:
            raise ParityError(f"{name} drifted from the golden fixture: "
                              f"max abs error {err:.3e} > {atol:.0e}")
    want_skip = np.asarray(expected["skipped"], dtype=bool)
    if not np.array_equal(result.skipped, want_skip):
        raise ParityError("skipped flags differ from the golden fixture")

    return {"groups": batch.num_groups, "members": batch.n,
            "max_abs_error": max_err, "atol": atol}
