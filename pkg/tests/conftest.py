import pytest

from edhkit.corpus import (
    build_edh_instances,
    build_vocab,
    generate_session,
    get_scenario,
    get_task,
)


@pytest.fixture(scope="session")
def toast_session():
    return generate_session(0, get_scenario("kitchen_small"), get_task("make_toast"))


@pytest.fixture(scope="session")
def toast_instances(toast_session):
    return build_edh_instances(toast_session)


@pytest.fixture(scope="session")
def small_corpus():
    combos = [
        (0, "kitchen_small", "make_toast"),
        (1, "kitchen_large", "wash_mug"),
        (2, "kitchen_small", "boil_potato"),
        (3, "pantry", "water_plant"),
    ]
    return [
        generate_session(seed, get_scenario(s), get_task(t)) for seed, s, t in combos
    ]


@pytest.fixture(scope="session")
def vocabs(small_corpus):
    return build_vocab(small_corpus)
