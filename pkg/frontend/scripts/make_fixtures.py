"""Regenerate the client test fixtures from the engine's wire output.

Each case is a random trigger sequence rendered as wire messages plus the
engine's final per-reference status map; the client's display model must end
in exactly the same state after applying the messages.

Run from the repository root:  python3 frontend/scripts/make_fixtures.py
"""
import json
import random
from pathlib import Path

from gazeadapt import protocol
from gazeadapt.engine import (
    DESATURATE,
    EngineConfig,
    HIGHLIGHT,
    InterventionEngine,
    Strategy,
)
from gazeadapt.fixtures import build_corpus

OUT = Path(__file__).resolve().parent.parent / "test" / "fixtures" / "dual_replay.json"


def wire(command):
    if command.kind == HIGHLIGHT:
        msg = protocol.Highlight(refId=command.reference_id,
                                 barIds=list(command.bar_ids),
                                 outline=command.outline, width=command.width_px)
    elif command.kind == DESATURATE:
        msg = protocol.Desaturate(refId=command.reference_id,
                                  outline=command.outline)
    else:
        msg = protocol.Remove(refId=command.reference_id)
    return json.loads(protocol.encode(msg))


def main() -> None:
    rng = random.Random(2024)
    corpus = build_corpus()
    cases = []
    for _ in range(200):
        doc = rng.choice(corpus)
        strategy = rng.choice(list(Strategy))
        engine = InterventionEngine(doc, EngineConfig(strategy=strategy))
        ids = [r.id for r in doc.references]
        messages = []
        for rid in rng.sample(ids, k=rng.randint(1, len(ids))):
            for command in engine.apply_removal_strategy(rid):
                messages.append(wire(command))
        cases.append({
            "docId": doc.id,
            "strategy": strategy.value,
            "bars": {r.id: list(r.data_point_ids) for r in doc.references},
            "messages": messages,
            "expected": {rid: status.value for rid, status in engine.status_map.items()},
        })
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps({"cases": cases}, indent=1) + "\n", encoding="utf-8")
    print(f"wrote {len(cases)} cases to {OUT}")


if __name__ == "__main__":
    main()
