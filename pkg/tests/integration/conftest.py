# Copyright 2024 Jon Seager (@jnsgruk)
# See LICENSE file for licensing details.

from pytest import fixture

from .ggtest import GGTest


@fixture(scope="module", autouse=True)
def ggtest_command(request):
    """Command used to run ggtest: the installed executable if given, else the source tree."""
    path = request.config.getoption("--ggtest-path")
    if path:
        GGTest.command = [path]
    return GGTest.command


@fixture(scope="module")
def workdir(tmp_path_factory):
    return tmp_path_factory.mktemp("ggtest")
