#!/usr/bin/env python3
# Copyright 2024 Jon Seager (@jnsgruk)
# See LICENSE file for licensing details.


from . import SEED
from .ggtest import GGTest


def test_samples_are_byte_identical(workdir):
    a, b = workdir / "a.csv", workdir / "b.csv"
    GGTest.sample(a, 500, m=3, s=0.5, seed=SEED)
    GGTest.sample(b, 500, m=3, s=0.5, seed=SEED)
    assert a.read_bytes() == b.read_bytes()


def test_tables_do_not_depend_on_threads(workdir):
    serial, threaded = workdir / "serial.json", workdir / "threaded.json"
    GGTest.critical_values(serial, 2, 1.0, 100, seed=SEED, replicates=1000, threads=1)
    GGTest.critical_values(threaded, 2, 1.0, 100, seed=SEED, replicates=1000, threads=4)
    assert serial.read_bytes() == threaded.read_bytes()


def test_experiment_output_does_not_depend_on_threads():
    flags = {"dims": [1, 2], "shapes": [0.5, 2], "sizes": [100, 200], "repetitions": 3}
    serial = GGTest.experiment("misspec", seed=SEED, threads=1, **flags)
    threaded = GGTest.experiment("misspec", seed=SEED, threads=4, **flags)
    assert serial.returncode == 0
    assert serial.stdout == threaded.stdout
    assert serial.stdout.startswith(f"# experiment: misspec\n# seed: {SEED}\n")
