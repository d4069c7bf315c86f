#!/usr/bin/env python3
"""Regenerate the demo market specs shipped under specs/.

single_good.json is the analytic market: one good, two consumers with
zero observable utility under plain logit, one supplier with linear
unit cost and adjustment weight 1/2, so the equilibrium price is
c + 2*gamma*(count - y_nat) = 3 exactly. market_n6.json is a seeded
random six-good market with two consumer types and two suppliers.
"""

from pathlib import Path

import marketclear as mc
from marketclear import specio

SPEC_DIR = Path(__file__).resolve().parent.parent / "specs"


def main():
    SPEC_DIR.mkdir(exist_ok=True)
    single = mc.Market(
        n=1,
        consumers=(mc.ConsumerType(count=2.0, a=[0.0], nests=mc.NestStructure.single(1)),),
        suppliers=(mc.Supplier(y_nat=[0.0], gamma=0.5, lo=[0.0], hi=[10.0], c=[1.0]),),
    )
    specio.save_document(specio.market_to_document(single), SPEC_DIR / "single_good.json")
    specio.save_document(specio.generate_market(6, 2, 2, seed=7),
                         SPEC_DIR / "market_n6.json")
    print(f"wrote {SPEC_DIR / 'single_good.json'}")
    print(f"wrote {SPEC_DIR / 'market_n6.json'}")


if __name__ == "__main__":
    main()
