import os

import hypothesis
import pytest

from congestlab import fixtures

hypothesis.settings.register_profile("ci", max_examples=60, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "ci"))

FIXTURE_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "fixtures")


@pytest.fixture
def fixture_path():
    def path(name):
        return os.path.normpath(os.path.join(FIXTURE_DIR, f"{name}.json"))

    return path


ORACLE_FIXTURES = {
    "twolink": fixtures.two_link(3.0),
    "twolink_bpr_b4": fixtures.two_link_bpr(4.0, 2.0),
    "twolink_bpr_b1": fixtures.two_link_bpr(1.0, 5.0),
    "pigou_b4": fixtures.pigou(4.0, 1.0),
    "three_path": fixtures.three_path(4.0),
    "three_path_light": fixtures.three_path(0.5),
    "diamond": fixtures.diamond((1.4, 0.6)),
    "two_od_top": fixtures.two_od_parallel((2.0, 0.0)),
    "two_od_bottom": fixtures.two_od_parallel((0.0, 2.0)),
}
