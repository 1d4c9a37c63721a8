import os
import stat

import pytest

from paratrap.builtins import builtin


@pytest.fixture(scope="session")
def flag():
    """The bundled flag protocol, the workhorse of most tests."""
    return builtin("example21")


@pytest.fixture(scope="session")
def mutex(flag):
    return flag.property_named("mutex")


def _script(path, body):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("#!/bin/sh\n" + body + "\n")
    os.chmod(path, os.stat(path).st_mode | stat.S_IXUSR)
    return str(path)


@pytest.fixture
def stub_prover(tmp_path):
    """Fake prover scripts that answer with a fixed SZS status."""

    def make(status, sleep=0.0):
        name = f"prover_{status.lower()}.sh"
        body = ""
        if sleep:
            body += f"sleep {sleep}\n"
        body += f'echo "% SZS status {status} for $1"'
        return _script(tmp_path / name, body)

    return make
