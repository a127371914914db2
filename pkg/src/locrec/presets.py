"""Built-in scenario matrices for the three result tables."""

from __future__ import annotations

from locrec.errors import ConfigError
from locrec.model import ItemFilter, MainCategory, Method, ScenarioSpec

ALL = ItemFilter.all()
LOCAL = ItemFilter.parse("Local")

# (train, test) blocks in table order
_LOCALITY_BLOCK = ((ALL, ALL), (LOCAL, LOCAL), (ALL, LOCAL))

TABLE5_SUBCATEGORIES = (
    "News/crime",
    "News/politics",
    "News/news",
    "Sports/sports",
    "Sports/orange-basketball",
    "Sports/highschool-sports",
)


def table3(cutoffs=(10, 20)) -> list[ScenarioSpec]:
    """Every method under the three locality scenarios."""
    methods = (Method.SKNN, Method.MC, Method.AR, Method.SR)
    return [ScenarioSpec(tr, te, m, tuple(cutoffs)) for m in methods for tr, te in _LOCALITY_BLOCK]


def table4(cutoffs=(10, 20)) -> list[ScenarioSpec]:
    """SKNN on the locality block, then one block per main category."""
    specs = [ScenarioSpec(tr, te, Method.SKNN, tuple(cutoffs)) for tr, te in _LOCALITY_BLOCK]
    for cat in (MainCategory.SPORTS, MainCategory.LIFE_CULTURE, MainCategory.NEWS):
        specs += [
            ScenarioSpec(ALL, ItemFilter.of_category(cat), Method.SKNN, tuple(cutoffs)),
            ScenarioSpec(LOCAL, ItemFilter.of_local_category(cat), Method.SKNN, tuple(cutoffs)),
            ScenarioSpec(ALL, ItemFilter.of_local_category(cat), Method.SKNN, tuple(cutoffs)),
        ]
    return specs


def table5(subcategories=TABLE5_SUBCATEGORIES, cutoffs=(10, 20)) -> list[ScenarioSpec]:
    """SKNN per subcategory with local, local-category, global and category training."""
    specs = []
    for text in subcategories:
        sub = ItemFilter.parse(text)
        if sub.subcategory is None:
            raise ConfigError(f"table5 columns must be Category/subcategory, got {text!r}")
        cat, name = sub.category, sub.subcategory
        local_sub = ItemFilter.of_local_subcategory(cat, name)
        rows = (
            (LOCAL, local_sub),
            (ItemFilter.of_local_category(cat), local_sub),
            (ALL, sub),
            (ItemFilter.of_category(cat), sub),
        )
        specs += [ScenarioSpec(tr, te, Method.SKNN, tuple(cutoffs)) for tr, te in rows]
    return specs


PRESETS = {"table3": table3, "table4": table4, "table5": table5}


def preset(name: str, cutoffs=(10, 20), subcategories=None) -> list[ScenarioSpec]:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    if name == "table5" and subcategories:
        return table5(subcategories, cutoffs)
    return PRESETS[name](cutoffs=cutoffs)
