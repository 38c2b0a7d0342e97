# Copyright 2024 Jon Seager (@jnsgruk)
# See LICENSE file for licensing details.

import pytest
from _pytest.config import Config
from _pytest.config.argparsing import Parser


def pytest_addoption(parser: Parser):
    parser.addoption(
        "--run-slow",
        action="store_true",
        default=False,
        help="Also run the Monte-Carlo studies marked as slow",
    )
    parser.addoption(
        "--ggtest-path",
        help="ggtest executable for the integration tests, rather than `python -m cli`",
    )


def pytest_collection_modifyitems(config: Config, items):
    if config.getoption("--run-slow"):
        return
    skip = pytest.mark.skip(reason="needs --run-slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)
