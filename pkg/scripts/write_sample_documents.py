"""Write example input documents for the CLI into data/ (behaviors, realizations, device)."""

import json
from fractions import Fraction
from pathlib import Path

from hypercontext.behaviors import generalized_coin_toss, rearranged_device_behavior
from hypercontext.device import default_device, overlapped_device
from hypercontext.polytope import GlobalDistribution
from hypercontext.realizations import classical_to_quantum, nc_to_classical
from hypercontext.scenario import BOT, TOP

OUT = Path(__file__).resolve().parent.parent / "data"


def dump(name, doc, indent=1):
    (OUT / name).write_text(json.dumps(doc, indent=indent, ensure_ascii=False) + "\n", encoding="utf-8")
    print(OUT / name)


def main():
    OUT.mkdir(exist_ok=True)
    rb = rearranged_device_behavior()
    dump("coin_toss.behavior.json", generalized_coin_toss().to_json())
    dump("rearranged.behavior.json", rb.to_json())
    section = GlobalDistribution(rb.scenario, {(TOP, BOT, TOP, BOT, TOP): Fraction(1, 2),
                                               (BOT, TOP, BOT, TOP, BOT): Fraction(1, 2)})
    cr = nc_to_classical(section)
    dump("rearranged.classical.json", cr.to_json())
    dump("rearranged.quantum.json", classical_to_quantum(cr).to_json(), indent=None)
    dump("default.device.json", default_device().to_json())
    dump("overlapped.device.json", overlapped_device().to_json())
    dump("bad_scenario.json", {"measurements": ["A0", "A1"], "outcomes": [BOT, TOP],
                               "contexts": [["A0", "A1"], ["A0"]]})


if __name__ == "__main__":
    main()
