import os
from dataclasses import replace

import pytest

from teleassist import harness, intent
from teleassist.records import Dataset
from teleassist.scenario import load_scenario

SCENARIOS = os.path.join(os.path.dirname(__file__), "..", "scenarios")


def scenario_path(name):
    return os.path.join(SCENARIOS, name)


@pytest.fixture(scope="session")
def drawer_sc():
    return load_scenario(scenario_path("drawer_can.yaml"))


@pytest.fixture(scope="session")
def drawer_ds(drawer_sc):
    return Dataset(harness.generate_demos(drawer_sc, "drawer", 5))


@pytest.fixture(scope="session")
def drawer_bundle(drawer_sc, drawer_ds):
    bundle, _ = intent.train_bundle(
        drawer_ds, drawer_sc.feat, drawer_sc.train, 42, drawer_sc.sim.v_max
    )
    return bundle


@pytest.fixture(scope="session")
def reach_sc():
    return load_scenario(scenario_path("reach3.yaml"))


@pytest.fixture(scope="session")
def reach_ds(reach_sc):
    records = []
    for name in reach_sc.tasks:
        records += harness.generate_demos(reach_sc, name, 5)
    return Dataset(records)


@pytest.fixture(scope="session")
def reach_bundle(reach_sc, reach_ds):
    cfg = replace(reach_sc.train, epochs=200)  # fixture-grade model, tests tolerate it
    bundle, _ = intent.train_bundle(reach_ds, reach_sc.feat, cfg, 7, reach_sc.sim.v_max)
    return bundle
