import sys
from pathlib import Path

# Add project root to path
project_root = str(Path(__file__).resolve().parents[1])
if project_root not in sys.path:
    sys.path.insert(0, project_root)

import pytest

from src.groups import load_group
from src.machine import load_machine

FIXTURES = Path(project_root) / 'fixtures'
GROUPS = FIXTURES / 'groups'
MACHINES = FIXTURES / 'machines'

# every valid tape used by the cross-group suites
TAPE_GROUPS = ['z', 'z2', 'f2', 'dihedral']


@pytest.fixture(scope='session')
def z():
    return load_group(GROUPS / 'z.json')


@pytest.fixture(scope='session')
def z2():
    return load_group(GROUPS / 'z2.json')


@pytest.fixture(scope='session')
def f2():
    return load_group(GROUPS / 'f2.json')


@pytest.fixture(scope='session')
def dihedral():
    return load_group(GROUPS / 'dihedral.json')


@pytest.fixture(scope='session')
def presented():
    return load_group(GROUPS / 'z2_presented.json')


@pytest.fixture(scope='session', params=TAPE_GROUPS)
def tape(request):
    return load_group(GROUPS / f'{request.param}.json')


@pytest.fixture(scope='session')
def palindrome():
    return load_machine(MACHINES / 'palindrome.json')


@pytest.fixture(scope='session')
def succ():
    return load_machine(MACHINES / 'succ.json')


@pytest.fixture(scope='session')
def sweep_right():
    return load_machine(MACHINES / 'sweep_right.json')
