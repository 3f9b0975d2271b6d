"""Shared end-to-end fixtures: a small evidence corpus, a geographic
case-study item, and scripted agent responses for it.

The database captions deliberately share almost no vocabulary with the
case-study caption, so rule-mock retrieval flags every event hit as low
overlap; the marathon items share most of their vocabulary, which keeps
the rule-mock quiet.
"""

from __future__ import annotations

from oocdetect.agents import EngineSettings, IndexBundle
from oocdetect.corpus import Category, Label, NewsItem
from oocdetect.database import build_database

from conftest import make_item

JUAREZ_CAPTION = (
    "Crowds cheer and take photos as the pope arrives to meet with "
    "World of Work representatives in Ciudad Juarez"
)


def juarez_item() -> NewsItem:
    return make_item(
        "case-juarez",
        JUAREZ_CAPTION,
        label=Label.FALSIFIED,
        category=Category.PERSON,
        visual_classes=("Ciudad Juarez",),
    )


def unrelated_db_items() -> list[NewsItem]:
    """Five items whose captions share no content words with the case study."""
    specs = [
        ("db1", "Snowfall blankets mountain villages overnight", ("Snowfall",)),
        ("db2", "Engineers test solar panels atop Windtech Labs", ("Windtech Labs",)),
        ("db3", "Dancers rehearse ballet steps backstage before curtain", ("Dancers",)),
        ("db4", "Farmers harvest ripe wheat under summer skies", ("Farmers",)),
        ("db5", "Chefs prepare seafood dishes at Dockside Kitchens", ("Dockside Kitchens",)),
    ]
    return [
        make_item(item_id, caption, label=Label.PRISTINE, category=Category.SCENE,
                  visual_classes=classes)
        for item_id, caption, classes in specs
    ]


def marathon_items() -> list[NewsItem]:
    """Items sharing most vocabulary; retrieval stays unflagged among them."""
    specs = [
        ("m1", "Runners cross the finish line at the City Marathon", ("City Marathon",)),
        ("m2", "Runners approach the finish line of the City Marathon in record numbers", ("City Marathon",)),
        ("m3", "Spectators cheer runners near the finish line of the City Marathon", ("City Marathon",)),
        ("m4", "Volunteers hand water to runners along the City Marathon course", ("City Marathon",)),
    ]
    return [
        make_item(item_id, caption, label=Label.PRISTINE, category=Category.SCENE,
                  visual_classes=classes)
        for item_id, caption, classes in specs
    ]


def fixture_bundle(settings: EngineSettings, items: list[NewsItem]) -> IndexBundle:
    bundle, _ = build_database(items, settings)
    return bundle


def juarez_script() -> dict[str, dict[str, str]]:
    """Scripted stage responses for the geographic case study."""
    return {
        "retrieval": {
            "case-juarez": (
                "The retrieved article places a World of Work event in Ciudad "
                "Juarez, so the named location is plausible on its own.\n"
                "FLAGS:\n"
                "- the pope is not visible anywhere in the image\n"
                "- no meeting with World of Work representatives can be confirmed from the scene"
            )
        },
        "detective": {
            "case-juarez": (
                "Element review:\n"
                "ELEMENT time: unknown — nothing in the image pins down a date\n"
                "ELEMENT place: consistent — retrieved coverage supports Ciudad Juarez as the setting\n"
                "ELEMENT person: contradicted — the pope does not appear among the people shown\n"
                "ELEMENT event: contradicted — the claimed meeting is absent from the image\n"
                "ELEMENT object: consistent — phones raised by a crowd match the caption's framing"
            )
        },
        "analyst": {
            "case-juarez": (
                "The geographic context holds up: retrieved coverage ties the "
                "World of Work gathering to Ciudad Juarez. But the person and "
                "event at the heart of the caption fail verification: the pope "
                "is absent from the image and no meeting is visible, so the "
                "caption pairs a real place with people and events the photo "
                "does not show.\n"
                "VERDICT: OOC"
            )
        },
    }


def scripted_verdict_table(items: list[NewsItem]) -> dict[str, dict[str, str]]:
    """Analyst-only script answering each item according to its label."""
    analyst = {}
    for item in items:
        if item.label is Label.FALSIFIED:
            analyst[item.id] = "The evidence contradicts the caption.\nVERDICT: OOC"
        else:
            analyst[item.id] = "The evidence supports the caption.\nVERDICT: PRISTINE"
    return {"analyst": analyst}
